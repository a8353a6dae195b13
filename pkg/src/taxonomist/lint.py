"""Convention and structure lint, plus taxonomy statistics.

Implemented rules:

* ``title-case``: preferred labels in the lint language must capitalize
  every word outside a stop-word list (the first word always).
* ``sibling-duplicate-label``: two non-deprecated siblings sharing a label
  lexical in any language (the mechanical half of the MECE goal).
* ``ambiguity-suffix``: a label containing ``(`` must look like
  ``Name (Qualifier)``.
* ``missing-definition-deep``: warning for nodes at depth two or more with
  no definition.
* ``global-label-collision``: the same label+language on two non-deprecated
  entities anywhere.

Deprecated entities produce no findings unless explicitly included.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass
from itertools import combinations
from typing import Optional

from . import vocab
from .errors import InvalidTree
from .model import Declaration, Iri, SubClassOf, Taxonomy, primary_subtag

STOP_WORDS = frozenset(
    "a an and as at but by for in of on or the to with".split()
)

_AMBIGUITY_RE = re.compile(r"^[^()]+ \([^()]+\)$")


@dataclass(frozen=True)
class Finding:
    rule: str
    entity: Iri
    severity: str  # "error" | "warning"
    message: str
    related: Optional[Iri] = None


def _title_case_ok(label: str) -> bool:
    for pos, word in enumerate(label.split()):
        core = word.strip("()\"'.,;:!?")
        if not core or not core[0].isalpha():
            continue  # punctuation-only or digit-leading words pass
        if core[0].isupper():
            continue
        if pos > 0 and core.lower() in STOP_WORDS:
            continue
        return False
    return True


def lint(tax: Taxonomy, default_lang: str = "en",
         include_deprecated: bool = False) -> list[Finding]:
    """Run every registered rule; findings sorted by (rule, entity)."""
    findings: list[Finding] = []
    lint_subtag = primary_subtag(default_lang)

    def included(entity: Iri) -> bool:
        return include_deprecated or not tax.is_deprecated(entity)

    entities = sorted(e for e in tax.classes if included(e))

    for entity in entities:
        labels = tax.labels_of(entity)
        for value in labels:
            if value.lang is not None and primary_subtag(value.lang) == lint_subtag \
                    and not _title_case_ok(value.lexical):
                findings.append(Finding(
                    "title-case", entity, "warning",
                    f"label {value.lexical!r} is not in title case"))
            if "(" in value.lexical and not _AMBIGUITY_RE.match(value.lexical):
                findings.append(Finding(
                    "ambiguity-suffix", entity, "warning",
                    f"label {value.lexical!r} does not match 'Name (Qualifier)'"))
        if tax.depth(entity) >= 2 and not tax.values_of(entity, vocab.DEFINITION):
            findings.append(Finding(
                "missing-definition-deep", entity, "warning",
                "no definition on a node at depth >= 2"))

    # sibling duplicates: same lexical (any language) under one parent
    parents = {tax.parent_of(e) for e in entities if tax.parent_of(e) is not None}
    for parent in sorted(parents):
        by_lexical: dict[str, set[Iri]] = {}
        for child in tax.children_of(parent):
            if not included(child):
                continue
            for value in tax.labels_of(child):
                by_lexical.setdefault(value.lexical, set()).add(child)
        for lexical, sharers in sorted(by_lexical.items()):
            for first, second in combinations(sorted(sharers), 2):
                findings.append(Finding(
                    "sibling-duplicate-label", first, "error",
                    f"siblings share the label {lexical!r}", related=second))

    # global collisions: same (lexical, lang) anywhere
    seen_pairs: set[tuple[Iri, Iri, str, Optional[str]]] = set()
    for entity in entities:
        for value in tax.labels_of(entity):
            sharers = {
                other for other in tax.label_subjects(value.lexical, value.lang)
                if other != entity and included(other)
            }
            for other in sharers:
                first, second = sorted((entity, other))
                key = (first, second, value.lexical, value.lang)
                if key in seen_pairs:
                    continue
                seen_pairs.add(key)
                lang = value.lang or "plain"
                findings.append(Finding(
                    "global-label-collision", first, "error",
                    f"label {value.lexical!r} ({lang}) also on another entity",
                    related=second))

    findings.sort(key=lambda f: (f.rule, f.entity, f.related or "", f.message))
    return findings


def findings_csv(findings: list[Finding]) -> str:
    """Lint report export: ``rule,severity,entity,message`` (RFC 4180)."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["rule", "severity", "entity", "message"])
    for f in findings:
        writer.writerow([f.rule, f.severity, f.entity, f.message])
    return out.getvalue()


@dataclass(frozen=True)
class TaxonomyStats:
    class_count: int          # declared classes, the synthetic root excluded
    vertical_count: int       # children of the root
    max_depth: int            # root is depth 0, a vertical is depth 1
    logical_axiom_count: int
    annotation_axiom_count: int
    declaration_count: int
    deprecated_count: int

    def to_json(self) -> dict:
        return {
            "classCount": self.class_count,
            "verticalCount": self.vertical_count,
            "maxDepth": self.max_depth,
            "logicalAxiomCount": self.logical_axiom_count,
            "annotationAxiomCount": self.annotation_axiom_count,
            "declarationCount": self.declaration_count,
            "deprecatedCount": self.deprecated_count,
        }


def stats(tax: Taxonomy) -> TaxonomyStats:
    """Counts over a valid tree; raises InvalidTree otherwise."""
    report = tax.validate_tree()
    if not report.ok:
        raise InvalidTree(report.violations)

    declaration_count = 0
    logical = 0
    annotation = 0
    for ax in tax.axioms:
        if isinstance(ax, Declaration):
            declaration_count += 1
        elif isinstance(ax, SubClassOf):
            logical += 1
        else:
            annotation += 1

    root = tax.root
    if root is None:
        rootless = [c for c in tax.classes if tax.parent_of(c) is None]
        root = rootless[0] if len(rootless) == 1 else None

    classes = [c for c in tax.classes if c != root]
    vertical_count = len(tax.children_of(root)) if root else 0
    max_depth = max((tax.depth(c) for c in classes), default=0)

    return TaxonomyStats(
        class_count=len(classes),
        vertical_count=vertical_count,
        max_depth=max_depth,
        logical_axiom_count=logical,
        annotation_axiom_count=annotation,
        declaration_count=declaration_count,
        deprecated_count=len(tax.deprecated_classes()),
    )
