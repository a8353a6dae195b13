"""Entity tags: colored labels assigned manually or by criteria rules.

A rule binds a Boolean criteria tree to a tag; rules are re-evaluated on
every commit so tag assignments are never stale relative to a revision.
Criteria cover annotation matching (exact value, regex, numeric range),
structural tests (descendant-of, deprecated), and the constraint-style
checks (label uniqueness per language, annotation value disjointness).
"""

from __future__ import annotations

import functools
import json
import re
from dataclasses import dataclass, field
from typing import Optional, Union

from .errors import (
    AlreadyAssigned,
    DuplicateTagLabel,
    InvalidCriteria,
    InvalidPattern,
    NotAssigned,
    UnknownTag,
)
from .model import Iri, Taxonomy, check_iri, normalize_lang

_COLOR_RE = re.compile(r"^#[0-9A-Fa-f]{6}$")


@dataclass(frozen=True)
class Tag:
    id: str
    label: str
    color: str = "#808080"
    description: Optional[str] = None

    def __post_init__(self):
        if not _COLOR_RE.match(self.color):
            raise InvalidCriteria(f"color must be #RRGGBB, got {self.color!r}")


# --- value matchers -------------------------------------------------------


@dataclass(frozen=True)
class Equals:
    lexical: str
    lang: Optional[str] = None

    def __post_init__(self):
        if self.lang is not None:
            object.__setattr__(self, "lang", normalize_lang(self.lang))


@dataclass(frozen=True)
class Regex:
    pattern: str

    def __post_init__(self):
        _compiled(self.pattern)


@dataclass(frozen=True)
class NumericRange:
    minimum: Optional[float] = None
    maximum: Optional[float] = None
    min_inclusive: bool = True
    max_inclusive: bool = True

    def __post_init__(self):
        if self.minimum is not None and self.maximum is not None \
                and self.minimum > self.maximum:
            raise InvalidCriteria("range minimum exceeds maximum")


@dataclass(frozen=True)
class AnyValue:
    pass


ValueMatcher = Union[Equals, Regex, NumericRange, AnyValue]


@functools.lru_cache(maxsize=512)
def _compiled(pattern: str) -> re.Pattern:
    try:
        return re.compile(pattern)
    except re.error as err:
        raise InvalidPattern(f"bad pattern {pattern!r}: {err}") from err


def matcher_matches(matcher: ValueMatcher, value) -> bool:
    if isinstance(matcher, AnyValue):
        return True
    if isinstance(matcher, Equals):
        return value.lexical == matcher.lexical and (
            matcher.lang is None or value.lang == matcher.lang)
    if isinstance(matcher, Regex):
        return _compiled(matcher.pattern).fullmatch(value.lexical) is not None
    # numeric range: non-numeric lexicals simply fail to match
    try:
        number = float(value.lexical)
    except ValueError:
        return False
    if matcher.minimum is not None:
        if number < matcher.minimum or (number == matcher.minimum
                                        and not matcher.min_inclusive):
            return False
    if matcher.maximum is not None:
        if number > matcher.maximum or (number == matcher.maximum
                                        and not matcher.max_inclusive):
            return False
    return True


# --- criteria tree ---------------------------------------------------------


@dataclass(frozen=True)
class And:
    children: tuple

    def __post_init__(self):
        if not self.children:
            raise InvalidCriteria("And needs at least one child")


@dataclass(frozen=True)
class Or:
    children: tuple

    def __post_init__(self):
        if not self.children:
            raise InvalidCriteria("Or needs at least one child")


@dataclass(frozen=True)
class Not:
    child: "Criteria"


@dataclass(frozen=True)
class HasAnnotation:
    property: Iri
    matcher: ValueMatcher = field(default_factory=AnyValue)

    def __post_init__(self):
        check_iri(self.property)


@dataclass(frozen=True)
class MissingAnnotation:
    property: Iri
    lang: Optional[str] = None

    def __post_init__(self):
        check_iri(self.property)
        if self.lang is not None:
            object.__setattr__(self, "lang", normalize_lang(self.lang))


@dataclass(frozen=True)
class IsDescendantOf:
    ancestor: Iri

    def __post_init__(self):
        check_iri(self.ancestor)


@dataclass(frozen=True)
class IsDeprecated:
    pass


@dataclass(frozen=True)
class NonUniqueLabel:
    lang: str

    def __post_init__(self):
        object.__setattr__(self, "lang", normalize_lang(self.lang))


@dataclass(frozen=True)
class AnnotationOverlap:
    property_a: Iri
    property_b: Iri

    def __post_init__(self):
        check_iri(self.property_a)
        check_iri(self.property_b)


Criteria = Union[And, Or, Not, HasAnnotation, MissingAnnotation, IsDescendantOf,
                 IsDeprecated, NonUniqueLabel, AnnotationOverlap]


@dataclass(frozen=True)
class TagRule:
    tag: str
    criteria: Criteria
    enabled: bool = True


def match_entity(tax: Taxonomy, criteria: Criteria, entity: Iri) -> bool:
    """Evaluate a criteria tree against one declared entity."""
    tax.require_declared(entity)
    return _match(tax, criteria, entity)


def _match(tax: Taxonomy, c: Criteria, e: Iri) -> bool:
    if isinstance(c, And):
        return all(_match(tax, child, e) for child in c.children)
    if isinstance(c, Or):
        return any(_match(tax, child, e) for child in c.children)
    if isinstance(c, Not):
        return not _match(tax, c.child, e)
    if isinstance(c, HasAnnotation):
        return any(matcher_matches(c.matcher, a.value)
                   for a in tax.annotations_on(e, c.property))
    if isinstance(c, MissingAnnotation):
        return not any(c.lang is None or a.value.lang == c.lang
                       for a in tax.annotations_on(e, c.property))
    if isinstance(c, IsDescendantOf):
        return tax.is_descendant_of(e, c.ancestor)
    if isinstance(c, IsDeprecated):
        return tax.is_deprecated(e)
    if isinstance(c, NonUniqueLabel):
        if tax.is_deprecated(e):
            return False
        for value in tax.labels_of(e):
            if value.lang != c.lang:
                continue
            for other in tax.label_subjects(value.lexical, value.lang):
                if other != e and not tax.is_deprecated(other):
                    return True
        return False
    if isinstance(c, AnnotationOverlap):
        pairs_a = {(v.lexical, v.lang) for v in tax.values_of(e, c.property_a)}
        if not pairs_a:
            return False
        return any((v.lexical, v.lang) in pairs_a
                   for v in tax.values_of(e, c.property_b))
    raise InvalidCriteria(f"unknown criteria node: {c!r}")


def evaluate_all(tax: Taxonomy, rules: list[TagRule],
                 manual: Optional[dict[Iri, set[str]]] = None) -> dict[Iri, set[str]]:
    """Full tag assignment map: manual assignments plus enabled rule matches."""
    assignments: dict[Iri, set[str]] = {
        e: set(tags) for e, tags in (manual or {}).items() if tags
    }
    enabled = [r for r in rules if r.enabled]
    if enabled:
        for entity in tax.classes:
            for rule in enabled:
                if _match(tax, rule.criteria, entity):
                    assignments.setdefault(entity, set()).add(rule.tag)
    return assignments


# --- criteria/rule JSON codec (rule file format) ---------------------------


def matcher_to_json(m: ValueMatcher) -> dict:
    if isinstance(m, Equals):
        out = {"kind": "equals", "lexical": m.lexical}
        if m.lang is not None:
            out["lang"] = m.lang
        return out
    if isinstance(m, Regex):
        return {"kind": "regex", "pattern": m.pattern}
    if isinstance(m, NumericRange):
        return {"kind": "range", "min": m.minimum, "max": m.maximum,
                "minInclusive": m.min_inclusive, "maxInclusive": m.max_inclusive}
    return {"kind": "any"}


def matcher_from_json(data: dict) -> ValueMatcher:
    kind = data.get("kind")
    if kind == "equals":
        return Equals(data["lexical"], data.get("lang"))
    if kind == "regex":
        return Regex(data["pattern"])
    if kind == "range":
        return NumericRange(data.get("min"), data.get("max"),
                            data.get("minInclusive", True), data.get("maxInclusive", True))
    if kind == "any":
        return AnyValue()
    raise InvalidCriteria(f"unknown matcher kind: {kind!r}")


def criteria_to_json(c: Criteria) -> dict:
    if isinstance(c, And):
        return {"kind": "and", "children": [criteria_to_json(x) for x in c.children]}
    if isinstance(c, Or):
        return {"kind": "or", "children": [criteria_to_json(x) for x in c.children]}
    if isinstance(c, Not):
        return {"kind": "not", "child": criteria_to_json(c.child)}
    if isinstance(c, HasAnnotation):
        return {"kind": "hasAnnotation", "property": c.property,
                "matcher": matcher_to_json(c.matcher)}
    if isinstance(c, MissingAnnotation):
        out = {"kind": "missingAnnotation", "property": c.property}
        if c.lang is not None:
            out["lang"] = c.lang
        return out
    if isinstance(c, IsDescendantOf):
        return {"kind": "isDescendantOf", "ancestor": c.ancestor}
    if isinstance(c, IsDeprecated):
        return {"kind": "isDeprecated"}
    if isinstance(c, NonUniqueLabel):
        return {"kind": "nonUniqueLabel", "lang": c.lang}
    return {"kind": "annotationOverlap", "propertyA": c.property_a,
            "propertyB": c.property_b}


def criteria_from_json(data: dict) -> Criteria:
    kind = data.get("kind")
    if kind == "and":
        return And(tuple(criteria_from_json(x) for x in data["children"]))
    if kind == "or":
        return Or(tuple(criteria_from_json(x) for x in data["children"]))
    if kind == "not":
        return Not(criteria_from_json(data["child"]))
    if kind == "hasAnnotation":
        matcher = matcher_from_json(data["matcher"]) if "matcher" in data else AnyValue()
        return HasAnnotation(data["property"], matcher)
    if kind == "missingAnnotation":
        return MissingAnnotation(data["property"], data.get("lang"))
    if kind == "isDescendantOf":
        return IsDescendantOf(data["ancestor"])
    if kind == "isDeprecated":
        return IsDeprecated()
    if kind == "nonUniqueLabel":
        return NonUniqueLabel(data["lang"])
    if kind == "annotationOverlap":
        return AnnotationOverlap(data["propertyA"], data["propertyB"])
    raise InvalidCriteria(f"unknown criteria kind: {kind!r}")


def rules_to_json(rules: list[TagRule]) -> str:
    return json.dumps(
        [{"tag": r.tag, "enabled": r.enabled, "criteria": criteria_to_json(r.criteria)}
         for r in rules],
        indent=2, ensure_ascii=False)


def rules_from_json(text: str) -> list[TagRule]:
    data = json.loads(text)
    if not isinstance(data, list):
        raise InvalidCriteria("rule file must be a JSON array")
    return [TagRule(item["tag"], criteria_from_json(item["criteria"]),
                    item.get("enabled", True))
            for item in data]


# --- per-project tag state --------------------------------------------------


class TagStore:
    """Tag definitions, manual assignments, and rules for one project."""

    def __init__(self):
        self.tags: dict[str, Tag] = {}
        self.rules: dict[str, TagRule] = {}  # keyed by tag id: one rule per tag
        self.manual: dict[Iri, set[str]] = {}
        self._counter = 0

    def define_tag(self, label: str, color: str = "#808080",
                   description: Optional[str] = None,
                   tag_id: Optional[str] = None) -> Tag:
        if any(t.label == label for t in self.tags.values()):
            raise DuplicateTagLabel(f"a tag labeled {label!r} already exists")
        if tag_id is None:
            self._counter += 1
            tag_id = f"tag-{self._counter}"
            while tag_id in self.tags:
                self._counter += 1
                tag_id = f"tag-{self._counter}"
        elif tag_id in self.tags:
            raise DuplicateTagLabel(f"tag id {tag_id!r} already exists")
        tag = Tag(tag_id, label, color, description)
        self.tags[tag_id] = tag
        return tag

    def require_tag(self, tag_id: str) -> Tag:
        if tag_id not in self.tags:
            raise UnknownTag(tag_id)
        return self.tags[tag_id]

    def set_rule(self, rule: TagRule) -> None:
        self.require_tag(rule.tag)
        self.rules[rule.tag] = rule

    def drop_rule(self, tag_id: str) -> None:
        self.rules.pop(tag_id, None)

    def rule_list(self) -> list[TagRule]:
        return [self.rules[k] for k in sorted(self.rules)]

    def assign_manual(self, tax: Taxonomy, entity: Iri, tag_id: str) -> None:
        self.require_tag(tag_id)
        tax.require_declared(entity)
        assigned = self.manual.setdefault(entity, set())
        if tag_id in assigned:
            raise AlreadyAssigned(f"{tag_id} already on {entity}")
        assigned.add(tag_id)

    def unassign_manual(self, tax: Taxonomy, entity: Iri, tag_id: str) -> None:
        self.require_tag(tag_id)
        tax.require_declared(entity)
        assigned = self.manual.get(entity, set())
        if tag_id not in assigned:
            raise NotAssigned(f"{tag_id} not on {entity}")
        assigned.discard(tag_id)
        if not assigned:
            self.manual.pop(entity, None)

    def evaluate(self, tax: Taxonomy) -> dict[Iri, set[str]]:
        return evaluate_all(tax, self.rule_list(), self.manual)

    # persistence

    def to_json(self) -> dict:
        return {
            "tags": [{"id": t.id, "label": t.label, "color": t.color,
                      "description": t.description}
                     for t in sorted(self.tags.values(), key=lambda t: t.id)],
            "manual": {iri: sorted(tags) for iri, tags in sorted(self.manual.items())},
            "counter": self._counter,
        }

    @classmethod
    def from_json(cls, data: dict) -> "TagStore":
        store = cls()
        for item in data.get("tags", []):
            store.tags[item["id"]] = Tag(item["id"], item["label"],
                                         item.get("color", "#808080"),
                                         item.get("description"))
        store.manual = {iri: set(tags) for iri, tags in data.get("manual", {}).items()}
        store._counter = data.get("counter", len(store.tags))
        return store


def find_by_tag(assignments: dict[Iri, set[str]], tag_id: str, name_of) -> list[Iri]:
    """Entities carrying a tag, sorted by their primary display name
    (case-insensitive, ties broken by the raw name and IRI)."""
    hits = [e for e, tags in assignments.items() if tag_id in tags]
    return sorted(hits, key=lambda e: (name_of(e).casefold(), name_of(e), e))
