"""Reorganization planners: merge, bulk move, bulk annotation editing.

Planners are pure: they inspect a taxonomy snapshot and emit an ordered
change list that the change log commits as one revision. Plans are only
valid against the head they were computed from; a stale plan is rejected
by commit-time validation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Literal, Optional

from . import vocab
from .errors import (
    InvalidCriteria,
    InvalidPattern,
    RootCannotMove,
    SourceIsAncestorOfTarget,
    TargetInSources,
    UnknownEntity,
    WouldCreateCycle,
)
from .model import (
    AnnotationAssertion,
    AnnotationValue,
    AtomicChange,
    Iri,
    SubClassOf,
    Taxonomy,
    add,
    boolean_value,
    normalize_lang,
    remove,
)


@dataclass(frozen=True)
class MergeRequest:
    sources: frozenset[Iri]
    target: Iri
    commit_message: str = ""

    def __post_init__(self):
        if not self.sources:
            raise InvalidCriteria("merge needs at least one source")


def plan_merge(tax: Taxonomy, req: MergeRequest) -> list[AtomicChange]:
    """Compile a merge into one composite change.

    Per source: children are re-parented to the target, the source's own
    parent edge is removed, the source is deprecated (declaration and all
    annotations stay, so its IRI remains resolvable), and its preferred
    labels are copied to the target as alternative labels, skipping values
    the target already carries.
    """
    if req.target in req.sources:
        raise TargetInSources(f"target {req.target} is among the sources")
    tax.require_declared(req.target)
    for source in sorted(req.sources):
        tax.require_declared(source)
        if tax.is_descendant_of(req.target, source):
            raise SourceIsAncestorOfTarget(source)

    changes: list[AtomicChange] = []
    planned_adds: set[AnnotationAssertion] = set()
    for source in sorted(req.sources):
        for child in sorted(tax.children_of(source)):
            if child in req.sources:
                continue  # its own edge removal is handled below
            changes.append(remove(SubClassOf(child, source)))
            changes.append(add(SubClassOf(child, req.target)))
        parent = tax.parent_of(source)
        if parent is not None:
            changes.append(remove(SubClassOf(source, parent)))
        if not tax.is_deprecated(source):
            changes.append(add(AnnotationAssertion(
                vocab.DEPRECATED, source, boolean_value(True))))
        for value in tax.labels_of(source):
            alt = AnnotationAssertion(vocab.ALT_LABEL, req.target, value)
            if alt in tax.axioms or alt in planned_adds:
                continue
            planned_adds.add(alt)
            changes.append(add(alt))
    return changes


def plan_bulk_move(tax: Taxonomy, entities: set[Iri], new_parent: Iri) -> list[AtomicChange]:
    """Re-parent each entity under ``new_parent``; entities already there
    contribute no changes."""
    tax.require_declared(new_parent)
    ordered = sorted(entities)
    for entity in ordered:
        tax.require_declared(entity)
        if entity == tax.root:
            raise RootCannotMove("the root cannot be moved")
        if entity == new_parent or tax.is_descendant_of(new_parent, entity):
            raise WouldCreateCycle(entity)

    changes: list[AtomicChange] = []
    for entity in ordered:
        current = tax.parent_of(entity)
        if current == new_parent:
            continue
        if current is not None:
            changes.append(remove(SubClassOf(entity, current)))
        changes.append(add(SubClassOf(entity, new_parent)))
    return changes


@dataclass(frozen=True)
class AnnotationSelection:
    """Pattern-based selection of annotation assertions.

    At least one criterion must be present. The value pattern uses
    full-match semantics over the lexical value; property and language are
    exact matches; scope restricts subjects to a subtree (inclusive).
    """

    property: Optional[Iri] = None
    value_pattern: Optional[str] = None
    lang: Optional[str] = None
    scope: Optional[Iri] = None

    def __post_init__(self):
        if (self.property is None and self.value_pattern is None
                and self.lang is None and self.scope is None):
            raise InvalidCriteria("selection needs at least one criterion")
        if self.value_pattern is not None:
            _compile_pattern(self.value_pattern)


@dataclass(frozen=True)
class AnnotationAction:
    kind: Literal["replaceValue", "setLang", "delete", "copyToProperty"]
    arg: Optional[str] = None


def replace_value(template: str) -> AnnotationAction:
    return AnnotationAction("replaceValue", template)


def set_lang(tag: str) -> AnnotationAction:
    return AnnotationAction("setLang", tag)


def delete() -> AnnotationAction:
    return AnnotationAction("delete")


def copy_to_property(prop: Iri) -> AnnotationAction:
    return AnnotationAction("copyToProperty", prop)


def _compile_pattern(pattern: str) -> re.Pattern:
    try:
        return re.compile(pattern)
    except re.error as err:
        raise InvalidPattern(f"bad pattern {pattern!r}: {err}") from err


def _max_group_ref(template: str) -> int:
    """Highest $N group reference in a replacement template."""
    highest = 0
    i = 0
    while i < len(template):
        if template[i] != "$":
            i += 1
            continue
        if i + 1 < len(template) and template[i + 1] == "$":
            i += 2
            continue
        j = i + 1
        while j < len(template) and template[j].isdigit():
            j += 1
        if j == i + 1:
            raise InvalidPattern(f"dangling '$' in template {template!r}")
        highest = max(highest, int(template[i + 1:j]))
        i = j
    return highest


def _expand_template(template: str, match: Optional[re.Match], whole: str) -> str:
    out: list[str] = []
    i = 0
    while i < len(template):
        ch = template[i]
        if ch != "$":
            out.append(ch)
            i += 1
            continue
        if i + 1 < len(template) and template[i + 1] == "$":
            out.append("$")
            i += 2
            continue
        j = i + 1
        while j < len(template) and template[j].isdigit():
            j += 1
        group = int(template[i + 1:j])
        if group == 0 or match is None:
            out.append(whole)
        else:
            out.append(match.group(group) or "")
        i = j
    return "".join(out)


def plan_bulk_annotation_edit(tax: Taxonomy, sel: AnnotationSelection,
                              action: AnnotationAction) -> list[AtomicChange]:
    """Compile a bulk annotation edit into a change list.

    Delete emits one removal per match; replace/set-lang emit a removal
    plus an addition; copy-to-property emits one addition. Additions that
    would duplicate an existing or already-planned assertion are skipped,
    as are rewrites that leave the value unchanged. No matches is an empty
    plan, not an error.
    """
    pattern = _compile_pattern(sel.value_pattern) if sel.value_pattern is not None else None
    if action.kind == "replaceValue":
        if action.arg is None:
            raise InvalidPattern("replaceValue needs a template")
        refs = _max_group_ref(action.arg)
        available = pattern.groups if pattern is not None else 0
        if refs > available:
            raise InvalidPattern(
                f"template references group {refs} but pattern defines {available}")
    if action.kind == "copyToProperty" and not action.arg:
        raise InvalidCriteria("copyToProperty needs a property IRI")
    new_lang: Optional[str] = None
    if action.kind == "setLang":
        if not action.arg:
            raise InvalidCriteria("setLang needs a language tag")
        new_lang = normalize_lang(action.arg)

    if sel.scope is not None:
        tax.require_declared(sel.scope)
        subjects = sorted(tax.descendants(sel.scope) | {sel.scope})
    else:
        subjects = sorted({a.subject for a in tax.iter_annotations()})

    changes: list[AtomicChange] = []
    planned_adds: set[AnnotationAssertion] = set()

    def try_add(ax: AnnotationAssertion) -> None:
        if ax in tax.axioms or ax in planned_adds:
            return
        planned_adds.add(ax)
        changes.append(add(ax))

    for subject in subjects:
        for assertion in tax.annotations_on(subject):
            if sel.property is not None and assertion.property != sel.property:
                continue
            if sel.lang is not None and assertion.value.lang != sel.lang:
                continue
            match = None
            if pattern is not None:
                match = pattern.fullmatch(assertion.value.lexical)
                if match is None:
                    continue
            value = assertion.value
            if action.kind == "delete":
                changes.append(remove(assertion))
            elif action.kind == "replaceValue":
                new_lexical = _expand_template(action.arg, match, value.lexical)
                if new_lexical == value.lexical:
                    continue
                changes.append(remove(assertion))
                try_add(AnnotationAssertion(
                    assertion.property, subject,
                    AnnotationValue(new_lexical, value.lang, value.datatype)))
            elif action.kind == "setLang":
                if value.lang == new_lang and value.datatype is None:
                    continue
                changes.append(remove(assertion))
                try_add(AnnotationAssertion(
                    assertion.property, subject,
                    AnnotationValue(value.lexical, lang=new_lang)))
            else:  # copyToProperty
                try_add(AnnotationAssertion(action.arg, subject, value))
    return changes
