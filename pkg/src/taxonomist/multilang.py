"""Display-name resolution over primary/secondary display languages.

Rendering is a pure view over the taxonomy: the preferred label matching
the first configured language wins (exact tag, then primary-subtag match),
with the IRI local name as the guaranteed fallback for the primary name.
Secondary names give translators context and may be absent.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .errors import EmptyLabel, InvalidCriteria
from .model import (
    AnnotationAssertion,
    AnnotationValue,
    AtomicChange,
    Iri,
    Taxonomy,
    add,
    local_name,
    normalize_lang,
    primary_subtag,
)
from . import vocab


@dataclass(frozen=True)
class DisplayLanguageConfig:
    primary: tuple[str, ...]
    secondary: tuple[str, ...] = ()
    default_for_new: Optional[str] = None

    def __post_init__(self):
        if not self.primary:
            raise InvalidCriteria("at least one primary display language is required")
        object.__setattr__(self, "primary", tuple(normalize_lang(t) for t in self.primary))
        object.__setattr__(self, "secondary", tuple(normalize_lang(t) for t in self.secondary))
        if set(self.primary) & set(self.secondary):
            raise InvalidCriteria("primary and secondary languages must be disjoint")
        default = self.default_for_new or self.primary[0]
        default = normalize_lang(default)
        if default not in self.primary:
            raise InvalidCriteria("default language must be a primary display language")
        object.__setattr__(self, "default_for_new", default)

    def to_json(self) -> dict:
        return {"primary": list(self.primary), "secondary": list(self.secondary),
                "default": self.default_for_new}

    @classmethod
    def from_json(cls, data: dict) -> "DisplayLanguageConfig":
        return cls(tuple(data.get("primary", ("en",))),
                   tuple(data.get("secondary", ())),
                   data.get("default"))


DEFAULT_CONFIG = DisplayLanguageConfig(primary=("en",))


@dataclass(frozen=True)
class DisplayName:
    text: str
    language: Optional[str]  # None marks the IRI local-name fallback

    @property
    def is_iri_fallback(self) -> bool:
        return self.language is None


def _best_label(labels: Iterable[AnnotationValue], langs: tuple[str, ...]) -> Optional[DisplayName]:
    values = [v for v in labels if v.lang is not None]
    for tag in langs:
        exact = [v for v in values if v.lang == tag]
        if exact:
            best = min(exact, key=lambda v: v.lexical)
            return DisplayName(best.lexical, best.lang)
        sub = primary_subtag(tag)
        loose = [v for v in values if primary_subtag(v.lang) == sub]
        if loose:
            best = min(loose, key=lambda v: (v.lexical, v.lang))
            return DisplayName(best.lexical, best.lang)
    return None


def resolve_display_name(tax: Taxonomy, entity: Iri, cfg: DisplayLanguageConfig
                         ) -> tuple[DisplayName, Optional[DisplayName]]:
    """Primary display name (always present) and optional secondary name."""
    tax.require_declared(entity)
    labels = tax.labels_of(entity)
    primary = _best_label(labels, cfg.primary)
    if primary is None:
        primary = DisplayName(local_name(entity), None)
    secondary = _best_label(labels, cfg.secondary) if cfg.secondary else None
    return primary, secondary


def primary_name(tax: Taxonomy, entity: Iri, cfg: DisplayLanguageConfig) -> str:
    return resolve_display_name(tax, entity, cfg)[0].text


def missing_languages(tax: Taxonomy, entity: Iri, required: set[str]) -> set[str]:
    """Required language tags with no exact-tag preferred label on the entity."""
    tax.require_declared(entity)
    have = {v.lang for v in tax.labels_of(entity) if v.lang is not None}
    return {normalize_lang(t) for t in required} - have


def default_label_change(entity: Iri, text: str, cfg: DisplayLanguageConfig) -> AtomicChange:
    """Label a new entity in the project default language."""
    cleaned = text.strip()
    if not cleaned:
        raise EmptyLabel("label text must not be blank")
    return add(AnnotationAssertion(
        vocab.LABEL, entity, AnnotationValue(cleaned, lang=cfg.default_for_new)))
