"""In-memory taxonomy model: axioms, atomic changes, and tree queries.

The taxonomy is a set of axioms (class declarations, SubClassOf edges,
annotation assertions) plus derived indexes for fast lookups. All mutation
goes through :class:`AtomicChange` application, which enforces the tree
invariants (single parent, no cycles, declared references) at the moment a
change is applied. ``apply_atomic`` is the pure, value-semantic entry
point; the change log uses the in-place variant under its writer lock.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Literal, Optional, Union

from . import vocab
from .errors import (
    AddDuplicateAxiom,
    InvalidAnnotationValue,
    InvalidIri,
    InvalidLanguageTag,
    RemoveDeclarationInUse,
    RemoveMissingAxiom,
    UndeclaredReference,
    UnknownEntity,
    WouldCreateCycle,
    WouldCreateSecondParent,
)

Iri = str

_IRI_RE = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*:[^\s<>\"{}|\\^`]+$")
_LANG_RE = re.compile(r"^[A-Za-z]{1,8}(-[A-Za-z0-9]{1,8})*$")


def check_iri(value: str) -> str:
    """Validate an absolute IRI and return it unchanged."""
    if not value or not _IRI_RE.match(value):
        raise InvalidIri(f"not an absolute IRI: {value!r}")
    return value


def normalize_lang(tag: str) -> str:
    """Validate a BCP-47 tag and lowercase its primary subtag."""
    if not tag or not _LANG_RE.match(tag):
        raise InvalidLanguageTag(f"not a well-formed language tag: {tag!r}")
    head, sep, rest = tag.partition("-")
    return head.lower() + sep + rest


def primary_subtag(tag: str) -> str:
    return tag.partition("-")[0].lower()


def local_name(iri: Iri) -> str:
    """Last path/fragment segment of an IRI; used as the display fallback."""
    for sep in ("#", "/", ":"):
        head, found, tail = iri.rpartition(sep)
        if found and tail:
            return tail
    return iri


@dataclass(frozen=True)
class AnnotationValue:
    """A literal annotation value: plain, language-tagged, or typed."""

    lexical: str
    lang: Optional[str] = None
    datatype: Optional[Iri] = None

    def __post_init__(self):
        if self.lang is not None and self.datatype is not None:
            raise InvalidAnnotationValue("lang and datatype are mutually exclusive")
        if self.lang is not None:
            object.__setattr__(self, "lang", normalize_lang(self.lang))
        if self.datatype is not None:
            check_iri(self.datatype)
            if self.datatype == vocab.XSD_BOOLEAN and self.lexical not in ("true", "false"):
                raise InvalidAnnotationValue(
                    f"boolean value must be 'true' or 'false', got {self.lexical!r}"
                )


def boolean_value(flag: bool) -> AnnotationValue:
    return AnnotationValue("true" if flag else "false", datatype=vocab.XSD_BOOLEAN)


@dataclass(frozen=True)
class Declaration:
    subject: Iri

    def __post_init__(self):
        check_iri(self.subject)


@dataclass(frozen=True)
class SubClassOf:
    sub: Iri
    sup: Iri

    def __post_init__(self):
        check_iri(self.sub)
        check_iri(self.sup)


@dataclass(frozen=True)
class AnnotationAssertion:
    property: Iri
    subject: Iri
    value: AnnotationValue

    def __post_init__(self):
        check_iri(self.property)
        check_iri(self.subject)


Axiom = Union[Declaration, SubClassOf, AnnotationAssertion]


def axiom_subject(axiom: Axiom) -> Iri:
    if isinstance(axiom, Declaration):
        return axiom.subject
    if isinstance(axiom, SubClassOf):
        return axiom.sub
    return axiom.subject


def mentions(axiom: Axiom, iri: Iri) -> bool:
    """True if the axiom references ``iri`` as subject, super, or annotation subject."""
    if isinstance(axiom, Declaration):
        return axiom.subject == iri
    if isinstance(axiom, SubClassOf):
        return iri in (axiom.sub, axiom.sup)
    return axiom.subject == iri


@dataclass(frozen=True)
class AtomicChange:
    op: Literal["add", "remove"]
    axiom: Axiom

    def invert(self) -> "AtomicChange":
        return AtomicChange("remove" if self.op == "add" else "add", self.axiom)


def add(axiom: Axiom) -> AtomicChange:
    return AtomicChange("add", axiom)


def remove(axiom: Axiom) -> AtomicChange:
    return AtomicChange("remove", axiom)


@dataclass(frozen=True)
class Violation:
    kind: str  # multiple-roots | no-root | multi-parent | cycle | undeclared-reference | unexpected-root
    subjects: tuple[Iri, ...]
    message: str


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}


class Taxonomy:
    """Axiom store with derived parent/children/label indexes.

    ``mode`` is ``"tree"`` (default, single parent enforced) or ``"dag"``
    (multiple parents allowed, cycles still rejected). The DAG switch exists
    in the data model for forward evolution but nothing in the service
    enables it.
    """

    def __init__(self, root: Optional[Iri] = None, mode: str = "tree"):
        if mode not in ("tree", "dag"):
            raise ValueError(f"unknown mode: {mode}")
        self.root = check_iri(root) if root else None
        self.mode = mode
        self.axioms: set[Axiom] = set()
        self._classes: set[Iri] = set()
        self._parents: dict[Iri, set[Iri]] = {}
        self._children: dict[Iri, set[Iri]] = {}
        self._annotations: dict[Iri, set[AnnotationAssertion]] = {}
        self._label_index: dict[tuple[str, Optional[str]], set[Iri]] = {}
        self._deprecated: set[Iri] = set()

    # --- construction -----------------------------------------------

    @classmethod
    def from_axioms(cls, axioms: Iterable[Axiom], root: Optional[Iri] = None,
                    mode: str = "tree") -> "Taxonomy":
        """Bulk-load axioms without structural checks.

        Used when reading foreign documents; the result may violate the tree
        invariants, which ``validate_tree`` will report.
        """
        tax = cls(root=root, mode=mode)
        for ax in axioms:
            tax._index_add(ax)
        return tax

    def copy(self) -> "Taxonomy":
        other = Taxonomy.__new__(Taxonomy)
        other.root = self.root
        other.mode = self.mode
        other.axioms = set(self.axioms)
        other._classes = set(self._classes)
        other._parents = {k: set(v) for k, v in self._parents.items()}
        other._children = {k: set(v) for k, v in self._children.items()}
        other._annotations = {k: set(v) for k, v in self._annotations.items()}
        other._label_index = {k: set(v) for k, v in self._label_index.items()}
        other._deprecated = set(self._deprecated)
        return other

    def __eq__(self, other) -> bool:
        if not isinstance(other, Taxonomy):
            return NotImplemented
        return self.axioms == other.axioms

    __hash__ = None  # mutable

    def __len__(self) -> int:
        return len(self.axioms)

    # --- raw index maintenance ---------------------------------------

    def _index_add(self, ax: Axiom) -> None:
        self.axioms.add(ax)
        if isinstance(ax, Declaration):
            self._classes.add(ax.subject)
        elif isinstance(ax, SubClassOf):
            self._parents.setdefault(ax.sub, set()).add(ax.sup)
            self._children.setdefault(ax.sup, set()).add(ax.sub)
        else:
            self._annotations.setdefault(ax.subject, set()).add(ax)
            if ax.property == vocab.LABEL:
                key = (ax.value.lexical, ax.value.lang)
                self._label_index.setdefault(key, set()).add(ax.subject)
            if ax.property == vocab.DEPRECATED and ax.value.lexical == "true":
                self._deprecated.add(ax.subject)

    def _index_remove(self, ax: Axiom) -> None:
        self.axioms.discard(ax)
        if isinstance(ax, Declaration):
            self._classes.discard(ax.subject)
        elif isinstance(ax, SubClassOf):
            self._discard(self._parents, ax.sub, ax.sup)
            self._discard(self._children, ax.sup, ax.sub)
        else:
            subj_anns = self._annotations.get(ax.subject)
            if subj_anns is not None:
                subj_anns.discard(ax)
                if not subj_anns:
                    del self._annotations[ax.subject]
            if ax.property == vocab.LABEL:
                self._discard(self._label_index, (ax.value.lexical, ax.value.lang), ax.subject)
            if ax.property == vocab.DEPRECATED and ax.value.lexical == "true":
                # deprecated iff some true-valued assertion remains
                if not any(
                    a.property == vocab.DEPRECATED and a.value.lexical == "true"
                    for a in self._annotations.get(ax.subject, ())
                ):
                    self._deprecated.discard(ax.subject)

    @staticmethod
    def _discard(index: dict, key, member) -> None:
        bucket = index.get(key)
        if bucket is not None:
            bucket.discard(member)
            if not bucket:
                del index[key]

    # --- change application -------------------------------------------

    def _check_reference(self, iri: Iri) -> None:
        if iri not in self._classes and iri != self.root:
            raise UndeclaredReference(iri)

    def apply(self, change: AtomicChange) -> None:
        """Apply one change in place, enforcing the structural invariants.

        Only the change log's single writer may call this on a shared
        instance; everything else should go through :func:`apply_atomic`.
        """
        ax = change.axiom
        if change.op == "add":
            if ax in self.axioms:
                raise AddDuplicateAxiom(f"axiom already present: {ax}")
            if isinstance(ax, SubClassOf):
                self._check_reference(ax.sub)
                self._check_reference(ax.sup)
                if ax.sub == ax.sup:
                    raise WouldCreateCycle(ax.sub)
                if self.mode == "tree" and self._parents.get(ax.sub):
                    raise WouldCreateSecondParent(ax.sub)
                if self._reaches(ax.sup, ax.sub):
                    raise WouldCreateCycle(ax.sub)
            elif isinstance(ax, AnnotationAssertion):
                self._check_reference(ax.subject)
            self._index_add(ax)
        else:
            if ax not in self.axioms:
                raise RemoveMissingAxiom(f"axiom not present: {ax}")
            if isinstance(ax, Declaration):
                iri = ax.subject
                if (
                    self._parents.get(iri)
                    or self._children.get(iri)
                    or self._annotations.get(iri)
                ):
                    raise RemoveDeclarationInUse(iri)
            self._index_remove(ax)

    def apply_all(self, changes: Iterable[AtomicChange]) -> None:
        """Apply a change list atomically: on failure, roll back and re-raise."""
        applied: list[AtomicChange] = []
        for change in changes:
            try:
                self.apply(change)
            except Exception:
                for done in reversed(applied):
                    self.apply(done.invert())
                raise
            applied.append(change)

    def _reaches(self, start: Iri, target: Iri) -> bool:
        """True if ``target`` is ``start`` or an ancestor of ``start``."""
        seen = set()
        frontier = [start]
        while frontier:
            node = frontier.pop()
            if node == target:
                return True
            if node in seen:
                continue
            seen.add(node)
            frontier.extend(self._parents.get(node, ()))
        return False

    # --- queries -------------------------------------------------------

    def declared(self, iri: Iri) -> bool:
        return iri in self._classes

    def require_declared(self, iri: Iri) -> None:
        if iri not in self._classes and iri != self.root:
            raise UnknownEntity(iri)

    @property
    def classes(self) -> frozenset:
        return frozenset(self._classes)

    def parent_of(self, iri: Iri) -> Optional[Iri]:
        self.require_declared(iri)
        parents = self._parents.get(iri)
        if not parents:
            return None
        return min(parents)  # unique in tree mode; deterministic otherwise

    def parents_of(self, iri: Iri) -> set[Iri]:
        return set(self._parents.get(iri, ()))

    def children_of(self, iri: Iri, include_deprecated: bool = True) -> set[Iri]:
        self.require_declared(iri)
        kids = self._children.get(iri, set())
        if include_deprecated:
            return set(kids)
        return {c for c in kids if c not in self._deprecated}

    def descendants(self, iri: Iri) -> set[Iri]:
        """Transitive closure of children, excluding ``iri`` itself."""
        self.require_declared(iri)
        out: set[Iri] = set()
        frontier = list(self._children.get(iri, ()))
        while frontier:
            node = frontier.pop()
            if node in out:
                continue
            out.add(node)
            frontier.extend(self._children.get(node, ()))
        out.discard(iri)
        return out

    def is_descendant_of(self, iri: Iri, ancestor: Iri) -> bool:
        """Strict descendant test by walking the parent chain (cycle safe)."""
        if iri == ancestor:
            return False
        seen = set()
        node = iri
        while True:
            parents = self._parents.get(node)
            if not parents:
                return False
            node = min(parents)
            if node == ancestor:
                return True
            if node in seen:
                return False
            seen.add(node)

    def depth(self, iri: Iri) -> int:
        """Edges from the root: root is 0, a vertical is 1."""
        depth = 0
        seen = set()
        node = iri
        while True:
            parents = self._parents.get(node)
            if not parents:
                return depth
            node = min(parents)
            depth += 1
            if node in seen:
                return depth
            seen.add(node)

    def annotations_on(self, subject: Iri, prop: Optional[Iri] = None) -> list[AnnotationAssertion]:
        anns = self._annotations.get(subject, ())
        if prop is None:
            return sorted(anns, key=_annotation_sort_key)
        return sorted((a for a in anns if a.property == prop), key=_annotation_sort_key)

    def values_of(self, subject: Iri, prop: Iri) -> list[AnnotationValue]:
        return [a.value for a in self.annotations_on(subject, prop)]

    def labels_of(self, subject: Iri) -> list[AnnotationValue]:
        return self.values_of(subject, vocab.LABEL)

    def label_subjects(self, lexical: str, lang: Optional[str]) -> set[Iri]:
        return set(self._label_index.get((lexical, lang), ()))

    def is_deprecated(self, iri: Iri) -> bool:
        return iri in self._deprecated

    def flag_value(self, iri: Iri, prop: Iri) -> bool:
        """True iff a boolean annotation with lexical 'true' exists."""
        return any(v.lexical == "true" for v in self.values_of(iri, prop))

    def deprecated_classes(self) -> set[Iri]:
        return set(self._deprecated)

    def iter_annotations(self) -> Iterator[AnnotationAssertion]:
        for anns in self._annotations.values():
            yield from anns

    # --- validation ------------------------------------------------------

    def validate_tree(self) -> ValidationReport:
        """Check the tree invariants and report every violation found."""
        report = ValidationReport()
        nodes: set[Iri] = set(self._classes)
        if self.root is not None and (
            self.root in self._parents
            or self.root in self._children
            or self.root in self._annotations
        ):
            nodes.add(self.root)

        for ax in self.axioms:
            if isinstance(ax, SubClassOf):
                for ref in (ax.sub, ax.sup):
                    if ref not in self._classes and ref != self.root:
                        report.violations.append(Violation(
                            "undeclared-reference", (ref,),
                            f"SubClassOf references undeclared class {ref}"))
            elif isinstance(ax, AnnotationAssertion):
                if ax.subject not in self._classes and ax.subject != self.root:
                    report.violations.append(Violation(
                        "undeclared-reference", (ax.subject,),
                        f"annotation on undeclared class {ax.subject}"))

        if self.mode == "tree":
            for child, supers in sorted(self._parents.items()):
                if len(supers) > 1:
                    report.violations.append(Violation(
                        "multi-parent", (child,),
                        f"{child} has {len(supers)} parents: {sorted(supers)}"))

        for cycle in self._find_cycles():
            report.violations.append(Violation(
                "cycle", tuple(sorted(cycle)),
                f"SubClassOf cycle: {sorted(cycle)}"))

        # merged entities are deprecated and detached on purpose; they are
        # record-keeping leftovers, not competing roots
        roots = sorted(n for n in nodes
                       if not self._parents.get(n) and n not in self._deprecated)
        if nodes and not roots:
            report.violations.append(Violation(
                "no-root", (), "no non-deprecated class without a parent"))
        elif len(roots) > 1:
            report.violations.append(Violation(
                "multiple-roots", tuple(roots),
                f"{len(roots)} root classes: {roots}"))
        elif roots and self.root is not None and roots[0] != self.root:
            report.violations.append(Violation(
                "unexpected-root", (roots[0],),
                f"single root is {roots[0]}, expected {self.root}"))

        report.violations.sort(key=lambda v: (v.kind, v.subjects))
        return report

    def _find_cycles(self) -> list[set[Iri]]:
        """Cycle clusters in the parent relation, each reported once.

        Iterative Tarjan SCC over child->parent edges; a cluster is any
        component of size > 1 (self-edges cannot be constructed).
        """
        index: dict[Iri, int] = {}
        low: dict[Iri, int] = {}
        on_stack: set[Iri] = set()
        stack: list[Iri] = []
        cycles: list[set[Iri]] = []
        counter = 0

        for start in self._parents:
            if start in index:
                continue
            work = [(start, iter(sorted(self._parents.get(start, ()))))]
            index[start] = low[start] = counter
            counter += 1
            stack.append(start)
            on_stack.add(start)
            while work:
                node, edges = work[-1]
                advanced = False
                for nxt in edges:
                    if nxt not in index:
                        index[nxt] = low[nxt] = counter
                        counter += 1
                        stack.append(nxt)
                        on_stack.add(nxt)
                        work.append((nxt, iter(sorted(self._parents.get(nxt, ())))))
                        advanced = True
                        break
                    if nxt in on_stack:
                        low[node] = min(low[node], index[nxt])
                if advanced:
                    continue
                work.pop()
                if work:
                    parent_node = work[-1][0]
                    low[parent_node] = min(low[parent_node], low[node])
                if low[node] == index[node]:
                    component = set()
                    while True:
                        member = stack.pop()
                        on_stack.discard(member)
                        component.add(member)
                        if member == node:
                            break
                    if len(component) > 1:
                        cycles.append(component)
        return cycles

    def __repr__(self) -> str:
        return (f"Taxonomy(classes={len(self._classes)}, axioms={len(self.axioms)}, "
                f"root={self.root!r}, mode={self.mode!r})")


def _annotation_sort_key(a: AnnotationAssertion):
    return (a.property, a.value.lexical, a.value.lang or "", a.value.datatype or "")


def apply_atomic(tax: Taxonomy, change: AtomicChange) -> Taxonomy:
    """Pure change application: returns a new taxonomy, input untouched."""
    out = tax.copy()
    out.apply(change)
    return out


def parent_of(tax: Taxonomy, iri: Iri) -> Optional[Iri]:
    return tax.parent_of(iri)


def descendants(tax: Taxonomy, iri: Iri) -> set[Iri]:
    return tax.descendants(iri)


def validate_tree(tax: Taxonomy) -> ValidationReport:
    return tax.validate_tree()
