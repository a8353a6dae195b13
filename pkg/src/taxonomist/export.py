"""Relational export: interests, synonyms, and closure tables.

Downstream systems consume a flat view of the taxonomy. Rows carry stable
integer surrogate ids (persisted iri-to-id map, ids never reused), the
default-language label, a parent pointer, the depth level, and the
business flags. Excluding a class (noAds or deprecated) does not drop its
non-excluded descendants: they re-attach to the nearest exported ancestor
and levels are recomputed on the exported tree, so targetable content
stays reachable.
"""

from __future__ import annotations

import csv
import io
import json
import zipfile
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from . import vocab
from .errors import InvalidTree
from .model import Iri, Taxonomy
from .multilang import DEFAULT_CONFIG, DisplayLanguageConfig, primary_name


class IdMap:
    """Persisted iri-to-surrogate-id map; ids are stable and never reused."""

    def __init__(self, path: Optional[Path] = None):
        self.path = Path(path) if path else None
        self.ids: dict[Iri, int] = {}
        self._next = 1
        if self.path is not None and self.path.exists():
            data = json.loads(self.path.read_text(encoding="utf-8"))
            self.ids = {iri: int(n) for iri, n in data["ids"].items()}
            self._next = data["next"]

    def id_for(self, iri: Iri) -> int:
        if iri not in self.ids:
            self.ids[iri] = self._next
            self._next += 1
        return self.ids[iri]

    def save(self) -> None:
        if self.path is None:
            return
        payload = {"next": self._next,
                   "ids": dict(sorted(self.ids.items(), key=lambda kv: kv[1]))}
        self.path.write_text(json.dumps(payload) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class InterestRow:
    id: int
    iri: Iri
    label: str
    parent_id: Optional[int]
    level: int
    no_ads: bool
    is_human_reviewed: bool
    deprecated: bool


@dataclass
class ExportBundle:
    interests: list[InterestRow]
    synonyms: list[tuple[int, str, str]]          # (id, synonym, lang)
    closure: list[tuple[int, int, int]]           # (ancestorId, descendantId, distance)
    manifest: dict = field(default_factory=dict)


def export(tax: Taxonomy, at_revision: int, idmap: IdMap,
           include_no_ads: bool = False, include_deprecated: bool = False,
           cfg: DisplayLanguageConfig = DEFAULT_CONFIG,
           timestamp: Optional[datetime] = None) -> ExportBundle:
    """Build the relational view of a taxonomy snapshot.

    The root itself is never exported. Closure rows have distance >= 1 and
    cover exactly the transitive closure of the exported parent relation.
    """
    report = tax.validate_tree()
    if not report.ok:
        raise InvalidTree(report.violations)

    root = tax.root

    def excluded(iri: Iri) -> bool:
        if iri == root:
            return True
        if not include_no_ads and tax.flag_value(iri, vocab.NO_ADS):
            return True
        if not include_deprecated and tax.is_deprecated(iri):
            return True
        return False

    included = sorted(c for c in tax.classes if not excluded(c))
    included_set = set(included)
    for iri in included:
        idmap.id_for(iri)  # allocate ids deterministically, sorted by IRI

    def exported_parent(iri: Iri) -> Optional[Iri]:
        node = tax.parent_of(iri)
        seen = set()
        while node is not None and node not in seen:
            if node in included_set:
                return node
            seen.add(node)
            node = tax.parent_of(node) if tax.declared(node) or node == root else None
        return None

    parent_of: dict[Iri, Optional[Iri]] = {iri: exported_parent(iri) for iri in included}

    levels: dict[Iri, int] = {}

    def level_of(iri: Iri) -> int:
        if iri in levels:
            return levels[iri]
        parent = parent_of[iri]
        value = 1 if parent is None else level_of(parent) + 1
        levels[iri] = value
        return value

    rows = []
    for iri in included:
        parent = parent_of[iri]
        rows.append(InterestRow(
            id=idmap.id_for(iri),
            iri=iri,
            label=primary_name(tax, iri, cfg),
            parent_id=idmap.id_for(parent) if parent is not None else None,
            level=level_of(iri),
            no_ads=tax.flag_value(iri, vocab.NO_ADS),
            is_human_reviewed=tax.flag_value(iri, vocab.IS_HUMAN_REVIEWED),
            deprecated=tax.is_deprecated(iri),
        ))
    rows.sort(key=lambda r: r.id)

    synonyms = []
    for iri in included:
        row_id = idmap.id_for(iri)
        for value in tax.values_of(iri, vocab.ALT_LABEL):
            synonyms.append((row_id, value.lexical, value.lang or ""))
    synonyms.sort()

    closure = []
    for iri in included:
        descendant = idmap.id_for(iri)
        distance = 0
        node = parent_of[iri]
        while node is not None:
            distance += 1
            closure.append((idmap.id_for(node), descendant, distance))
            node = parent_of[node]
    closure.sort()

    when = timestamp or datetime.now(timezone.utc)
    bundle = ExportBundle(rows, synonyms, closure)
    bundle.manifest = {
        "revision": at_revision,
        "timestamp": when.isoformat(),
        "rowCounts": row_counts(bundle),
        "options": {"includeNoAds": include_no_ads,
                    "includeDeprecated": include_deprecated},
    }
    idmap.save()
    return bundle


def row_counts(bundle: ExportBundle) -> dict[str, int]:
    return {"interests": len(bundle.interests),
            "synonyms": len(bundle.synonyms),
            "closure": len(bundle.closure)}


def _bool(value: bool) -> str:
    return "true" if value else "false"


def interests_csv(bundle: ExportBundle) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["id", "iri", "label", "parentId", "level",
                     "noAds", "isHumanReviewed", "deprecated"])
    for r in bundle.interests:
        writer.writerow([r.id, r.iri, r.label,
                         "" if r.parent_id is None else r.parent_id, r.level,
                         _bool(r.no_ads), _bool(r.is_human_reviewed), _bool(r.deprecated)])
    return out.getvalue()


def synonyms_csv(bundle: ExportBundle) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["id", "synonym", "lang"])
    for row in bundle.synonyms:
        writer.writerow(row)
    return out.getvalue()


def closure_csv(bundle: ExportBundle) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["ancestorId", "descendantId", "distance"])
    for row in bundle.closure:
        writer.writerow(row)
    return out.getvalue()


def zip_bundle(bundle: ExportBundle) -> bytes:
    buffer = io.BytesIO()
    with zipfile.ZipFile(buffer, "w", zipfile.ZIP_DEFLATED) as archive:
        archive.writestr("interests.csv", interests_csv(bundle))
        archive.writestr("synonyms.csv", synonyms_csv(bundle))
        archive.writestr("closure.csv", closure_csv(bundle))
        archive.writestr("manifest.json", json.dumps(bundle.manifest, indent=2) + "\n")
    return buffer.getvalue()
