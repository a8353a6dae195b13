"""Shared test utilities: naive oracles and random instance generators.

The oracles deliberately avoid the package's derived indexes; they work
from raw edge lists or the flat axiom set so they stay independent of the
code paths they check.
"""

from __future__ import annotations

import random
from collections import deque

from taxonomist import vocab
from taxonomist.model import (
    AnnotationAssertion,
    AnnotationValue,
    AtomicChange,
    Declaration,
    SubClassOf,
    Taxonomy,
    add,
)

NS = "https://interests.example.org/"
ROOT = NS + "root"

WORDS = [
    "Sofa", "Bench", "Garden", "Lamp", "Modern", "Rustic", "Vintage", "Wall",
    "Kitchen", "Outdoor", "Fashion", "Shoe", "Style", "Craft", "Light", "Desk",
]

GNARLY = ['He said "hi"', "back\\slash", "Tabs\tinside", "Ünïcödé Name", "  padded  ",
          "quote\\\"mix", "Árvíztűrő tükörfúrógép"]


# --- naive oracles ----------------------------------------------------------


def fold_axioms(changes) -> set:
    """Independent fold of add/remove over a plain set."""
    state = set()
    for change in changes:
        if change.op == "add":
            assert change.axiom not in state
            state.add(change.axiom)
        else:
            assert change.axiom in state
            state.discard(change.axiom)
    return state


def scan_parent(edges: list[tuple[str, str]], node: str):
    """Linear scan of an edge list for the unique parent."""
    found = [sup for sub, sup in edges if sub == node]
    assert len(found) <= 1
    return found[0] if found else None


def bfs_descendants(edges: list[tuple[str, str]], node: str) -> set[str]:
    """Repeated BFS over a raw (child, parent) edge list."""
    children: dict[str, list[str]] = {}
    for sub, sup in edges:
        children.setdefault(sup, []).append(sub)
    out: set[str] = set()
    queue = deque(children.get(node, []))
    while queue:
        current = queue.popleft()
        if current in out:
            continue
        out.add(current)
        queue.extend(children.get(current, []))
    out.discard(node)
    return out


def graph_has_violation(declared: set[str], edges: list[tuple[str, str]],
                        exempt: str | None = None) -> bool:
    """Naive checker: undeclared refs, indegree > 1, cycles, root count."""
    nodes = set(declared)
    for sub, sup in edges:
        for ref in (sub, sup):
            if ref not in declared and ref != exempt:
                return True
            nodes.add(ref)
    indegree: dict[str, int] = {}
    for sub, _ in edges:
        indegree[sub] = indegree.get(sub, 0) + 1
    if any(v > 1 for v in indegree.values()):
        return True
    # cycle scan: walk up from every node, bounded by node count
    parent = {}
    for sub, sup in edges:
        parent.setdefault(sub, sup)
    for start in nodes:
        node, steps = start, 0
        while node in parent:
            node = parent[node]
            steps += 1
            if steps > len(nodes):
                return True
    roots = [n for n in nodes if n not in parent]
    if nodes and len(roots) != 1:
        return True
    return False


def brute_match(tax: Taxonomy, criteria, entity: str) -> bool:
    """Criteria evaluation straight off the flat axiom set (no indexes)."""
    from taxonomist import tags as T

    axioms = tax.axioms

    def annotations(subject, prop=None):
        return [ax for ax in axioms
                if isinstance(ax, AnnotationAssertion) and ax.subject == subject
                and (prop is None or ax.property == prop)]

    def deprecated(subject):
        return any(ax.property == vocab.DEPRECATED and ax.value.lexical == "true"
                   for ax in annotations(subject))

    def edge_list():
        return [(ax.sub, ax.sup) for ax in axioms if isinstance(ax, SubClassOf)]

    def declared_classes():
        return {ax.subject for ax in axioms if isinstance(ax, Declaration)}

    def matches(c, e):
        if isinstance(c, T.And):
            return all(matches(child, e) for child in c.children)
        if isinstance(c, T.Or):
            return any(matches(child, e) for child in c.children)
        if isinstance(c, T.Not):
            return not matches(c.child, e)
        if isinstance(c, T.HasAnnotation):
            return any(T.matcher_matches(c.matcher, ax.value)
                       for ax in annotations(e, c.property))
        if isinstance(c, T.MissingAnnotation):
            hits = [ax for ax in annotations(e, c.property)
                    if c.lang is None or ax.value.lang == c.lang]
            return not hits
        if isinstance(c, T.IsDescendantOf):
            return e in bfs_descendants(edge_list(), c.ancestor)
        if isinstance(c, T.IsDeprecated):
            return deprecated(e)
        if isinstance(c, T.NonUniqueLabel):
            if deprecated(e):
                return False
            mine = {(ax.value.lexical, ax.value.lang)
                    for ax in annotations(e, vocab.LABEL) if ax.value.lang == c.lang}
            for other in declared_classes():
                if other == e or deprecated(other):
                    continue
                theirs = {(ax.value.lexical, ax.value.lang)
                          for ax in annotations(other, vocab.LABEL)}
                if mine & theirs:
                    return True
            return False
        if isinstance(c, T.AnnotationOverlap):
            left = {(ax.value.lexical, ax.value.lang)
                    for ax in annotations(e, c.property_a)}
            right = {(ax.value.lexical, ax.value.lang)
                     for ax in annotations(e, c.property_b)}
            return bool(left & right)
        raise AssertionError(f"unexpected criteria {c!r}")

    return matches(criteria, entity)


class BruteOracle:
    """Per-entity criteria matcher built from the flat axiom set only.

    The constructor makes one pass over ``tax.axioms`` to group raw axioms;
    matching then uses linear scans and fresh BFS walks, never the
    Taxonomy's derived indexes. Reusable across entities so the acceptance
    sweep stays within its time budget.
    """

    def __init__(self, tax: Taxonomy):
        from taxonomist import vocab as V

        self.annotations: dict[str, list] = {}
        self.edges: list[tuple[str, str]] = []
        self.declared: set[str] = set()
        for ax in tax.axioms:
            if isinstance(ax, AnnotationAssertion):
                self.annotations.setdefault(ax.subject, []).append(ax)
            elif isinstance(ax, SubClassOf):
                self.edges.append((ax.sub, ax.sup))
            else:
                self.declared.add(ax.subject)
        self.deprecated = {
            subject for subject, anns in self.annotations.items()
            if any(a.property == V.DEPRECATED and a.value.lexical == "true"
                   for a in anns)
        }

    def _props(self, subject, prop):
        return [a for a in self.annotations.get(subject, []) if a.property == prop]

    def match(self, criteria, entity) -> bool:
        from taxonomist import tags as T
        from taxonomist import vocab as V

        c, e = criteria, entity
        if isinstance(c, T.And):
            return all(self.match(child, e) for child in c.children)
        if isinstance(c, T.Or):
            return any(self.match(child, e) for child in c.children)
        if isinstance(c, T.Not):
            return not self.match(c.child, e)
        if isinstance(c, T.HasAnnotation):
            return any(T.matcher_matches(c.matcher, a.value)
                       for a in self._props(e, c.property))
        if isinstance(c, T.MissingAnnotation):
            return not [a for a in self._props(e, c.property)
                        if c.lang is None or a.value.lang == c.lang]
        if isinstance(c, T.IsDescendantOf):
            return e in bfs_descendants(self.edges, c.ancestor)
        if isinstance(c, T.IsDeprecated):
            return e in self.deprecated
        if isinstance(c, T.NonUniqueLabel):
            if e in self.deprecated:
                return False
            mine = {(a.value.lexical, a.value.lang)
                    for a in self._props(e, V.LABEL) if a.value.lang == c.lang}
            if not mine:
                return False
            for other in self.declared:
                if other == e or other in self.deprecated:
                    continue
                theirs = {(a.value.lexical, a.value.lang)
                          for a in self._props(other, V.LABEL)}
                if mine & theirs:
                    return True
            return False
        if isinstance(c, T.AnnotationOverlap):
            left = {(a.value.lexical, a.value.lang)
                    for a in self._props(e, c.property_a)}
            right = {(a.value.lexical, a.value.lang)
                     for a in self._props(e, c.property_b)}
            return bool(left & right)
        raise AssertionError(f"unexpected criteria {c!r}")


def all_pairs_label_collisions(tax: Taxonomy, include_deprecated=False) -> set[tuple]:
    """Quadratic scan for (a, b, lexical, lang) global label collisions."""
    subjects = sorted(tax.classes)
    labels = {
        s: {(v.lexical, v.lang) for v in tax.labels_of(s) }
        for s in subjects
    }
    out = set()
    for i, a in enumerate(subjects):
        if not include_deprecated and tax.is_deprecated(a):
            continue
        for b in subjects[i + 1:]:
            if not include_deprecated and tax.is_deprecated(b):
                continue
            for lexical, lang in labels[a] & labels[b]:
                out.add((a, b, lexical, lang))
    return out


# --- random instances --------------------------------------------------------


def random_criteria_for_acceptance(rng: random.Random, depth: int = 0):
    """Random criteria tree over the standard vocabulary (bounded depth)."""
    from taxonomist import tags as T

    options = ["has", "missing", "descendant", "deprecated", "nonunique", "overlap"]
    if depth < 2:
        options += ["and", "or", "not"]
    kind = rng.choice(options)
    if kind == "and":
        return T.And(tuple(random_criteria_for_acceptance(rng, depth + 1)
                           for _ in range(rng.randint(1, 3))))
    if kind == "or":
        return T.Or(tuple(random_criteria_for_acceptance(rng, depth + 1)
                          for _ in range(rng.randint(1, 3))))
    if kind == "not":
        return T.Not(random_criteria_for_acceptance(rng, depth + 1))
    if kind == "has":
        prop = rng.choice([vocab.LABEL, vocab.ALT_LABEL, vocab.DEFINITION, vocab.NO_ADS])
        matcher = rng.choice([
            T.AnyValue(),
            T.Equals("true"),
            T.Regex(r".*[Ss]ofa.*"),
            T.Regex(r"\w+ \w+"),
            T.NumericRange(0, 100),
        ])
        return T.HasAnnotation(prop, matcher)
    if kind == "missing":
        prop = rng.choice([vocab.LABEL, vocab.DEFINITION])
        return T.MissingAnnotation(prop, rng.choice([None, "en", "hu"]))
    if kind == "descendant":
        return T.IsDescendantOf(f"{NS}c{rng.randint(0, 40)}")
    if kind == "deprecated":
        return T.IsDeprecated()
    if kind == "nonunique":
        return T.NonUniqueLabel(rng.choice(["en", "hu"]))
    return T.AnnotationOverlap(vocab.LABEL, vocab.ALT_LABEL)


def random_label(rng: random.Random, gnarly: bool = False) -> str:
    if gnarly and rng.random() < 0.25:
        return rng.choice(GNARLY)
    count = rng.randint(1, 3)
    return " ".join(rng.choice(WORDS) for _ in range(count))


def random_tree_changes(rng: random.Random, n_classes: int, langs=("en", "hu"),
                        p_label: float = 0.9, p_alt: float = 0.25,
                        p_def: float = 0.2, p_flag: float = 0.1,
                        gnarly: bool = False) -> list[AtomicChange]:
    """Declare a root plus ``n_classes`` classes forming a random tree."""
    changes = [add(Declaration(ROOT))]
    iris = [ROOT]
    for i in range(n_classes):
        iri = f"{NS}c{i}"
        parent = rng.choice(iris)
        changes.append(add(Declaration(iri)))
        changes.append(add(SubClassOf(iri, parent)))
        if rng.random() < p_label:
            changes.append(add(AnnotationAssertion(
                vocab.LABEL, iri,
                AnnotationValue(random_label(rng, gnarly), lang=rng.choice(langs)))))
        if rng.random() < p_alt:
            changes.append(add(AnnotationAssertion(
                vocab.ALT_LABEL, iri,
                AnnotationValue(random_label(rng, gnarly), lang=rng.choice(langs)))))
        if rng.random() < p_def:
            changes.append(add(AnnotationAssertion(
                vocab.DEFINITION, iri,
                AnnotationValue(f"Definition of c{i}.", lang="en"))))
        if rng.random() < p_flag:
            prop = rng.choice([vocab.NO_ADS, vocab.IS_HUMAN_REVIEWED, vocab.DEPRECATED])
            changes.append(add(AnnotationAssertion(
                prop, iri, AnnotationValue("true", datatype=vocab.XSD_BOOLEAN))))
        iris.append(iri)
    return changes


def build_taxonomy(changes, root: str = ROOT, mode: str = "tree") -> Taxonomy:
    tax = Taxonomy(root=root, mode=mode)
    tax.apply_all(changes)
    return tax


def random_taxonomy(rng: random.Random, n_classes: int, **kwargs) -> Taxonomy:
    return build_taxonomy(random_tree_changes(rng, n_classes, **kwargs))


def edge_list(tax: Taxonomy) -> list[tuple[str, str]]:
    return [(ax.sub, ax.sup) for ax in tax.axioms if isinstance(ax, SubClassOf)]
