"""Quality lint rules and taxonomy statistics."""

from __future__ import annotations

import random

import pytest

from taxonomist import vocab
from taxonomist.errors import InvalidTree
from taxonomist.lint import Finding, findings_csv, lint, stats
from taxonomist.model import (
    AnnotationAssertion,
    AnnotationValue,
    Declaration,
    SubClassOf,
    Taxonomy,
    add,
    boolean_value,
)

from helpers import (
    NS,
    ROOT,
    all_pairs_label_collisions,
    build_taxonomy,
    random_tree_changes,
)


def decl(n):
    return add(Declaration(NS + n))


def edge(a, b):
    return add(SubClassOf(NS + a, NS + b))


def label(n, text, lang="en"):
    return add(AnnotationAssertion(vocab.LABEL, NS + n, AnnotationValue(text, lang=lang)))


def rules_fired(findings: list[Finding]) -> set[str]:
    return {f.rule for f in findings}


class TestLintRules:
    def test_clean_taxonomy_has_no_findings(self):
        tax = build_taxonomy([
            decl("root"), decl("home_decor"), edge("home_decor", "root"),
            label("home_decor", "Home Decor"),
        ])
        assert lint(tax) == []

    def test_sibling_duplicate_label_error(self):
        tax = build_taxonomy([
            decl("root"), decl("living_room"), edge("living_room", "root"),
            decl("sofas_a"), edge("sofas_a", "living_room"), label("sofas_a", "Sofas"),
            decl("sofas_b"), edge("sofas_b", "living_room"), label("sofas_b", "Sofas", "hu"),
        ])
        dupes = [f for f in lint(tax) if f.rule == "sibling-duplicate-label"]
        assert len(dupes) == 1
        assert dupes[0].severity == "error"
        assert dupes[0].entity == NS + "sofas_a"
        assert dupes[0].related == NS + "sofas_b"

    def test_ambiguity_suffix(self):
        good = build_taxonomy([decl("root"), decl("t"), edge("t", "root"),
                               label("t", "Topiary (Plant)")])
        assert "ambiguity-suffix" not in rules_fired(lint(good))
        bad = build_taxonomy([decl("root"), decl("t"), edge("t", "root"),
                              label("t", "Topiary (")])
        assert "ambiguity-suffix" in rules_fired(lint(bad))

    def test_title_case(self):
        bad = build_taxonomy([decl("root"), decl("t"), edge("t", "root"),
                              label("t", "mid century architecture")])
        assert "title-case" in rules_fired(lint(bad))
        stop_ok = build_taxonomy([decl("root"), decl("t"), edge("t", "root"),
                                  label("t", "Food and Drink")])
        assert "title-case" not in rules_fired(lint(stop_ok))
        # non-default languages are not title-case checked
        hungarian = build_taxonomy([decl("root"), decl("t"), edge("t", "root"),
                                    label("t", "kézműves ajándék", "hu")])
        assert "title-case" not in rules_fired(lint(hungarian))
        numbered = build_taxonomy([decl("root"), decl("t"), edge("t", "root"),
                                   label("t", "1960's San Francisco")])
        assert "title-case" not in rules_fired(lint(numbered))

    def test_missing_definition_on_deep_node(self):
        tax = build_taxonomy([
            decl("root"), decl("v"), edge("v", "root"),
            decl("mid"), edge("mid", "v"), label("mid", "Mid"),
            decl("deep"), edge("deep", "mid"), label("deep", "Deep"),
        ])
        findings = [f for f in lint(tax) if f.rule == "missing-definition-deep"]
        assert {f.entity for f in findings} == {NS + "mid", NS + "deep"}
        assert all(f.severity == "warning" for f in findings)
        tax.apply(add(AnnotationAssertion(
            vocab.DEFINITION, NS + "mid", AnnotationValue("A definition.", lang="en"))))
        findings = [f for f in lint(tax) if f.rule == "missing-definition-deep"]
        assert {f.entity for f in findings} == {NS + "deep"}

    def test_global_label_collision_matches_all_pairs_oracle(self):
        rng = random.Random(5005)
        for _ in range(25):
            tax = build_taxonomy(random_tree_changes(
                rng, rng.randint(2, 30), p_label=0.95, p_flag=0.2))
            got = {(f.entity, f.related) for f in lint(tax)
                   if f.rule == "global-label-collision"}
            want = {(a, b) for a, b, _, _ in all_pairs_label_collisions(tax)}
            assert got == want

    def test_deprecated_entities_skipped_by_default(self):
        tax = build_taxonomy([
            decl("root"), decl("old"), edge("old", "root"), label("old", "dup"),
            decl("new"), edge("new", "root"), label("new", "dup"),
        ])
        assert rules_fired(lint(tax)) >= {"global-label-collision"}
        tax.apply(add(AnnotationAssertion(
            vocab.DEPRECATED, NS + "old", boolean_value(True))))
        assert "global-label-collision" not in rules_fired(lint(tax))
        assert "global-label-collision" in rules_fired(lint(tax, include_deprecated=True))

    def test_findings_sorted_and_csv_export(self):
        tax = build_taxonomy([
            decl("root"), decl("b"), edge("b", "root"), label("b", "lower case"),
            decl("a"), edge("a", "root"), label("a", "Broken ("),
        ])
        findings = lint(tax)
        assert findings == sorted(findings, key=lambda f: (f.rule, f.entity))
        csv_text = findings_csv(findings)
        lines = csv_text.splitlines()
        assert lines[0] == "rule,severity,entity,message"
        assert len(lines) == len(findings) + 1


class TestStats:
    def test_root_only(self):
        tax = build_taxonomy([decl("root")])
        s = stats(tax)
        assert s.class_count == 0
        assert s.vertical_count == 0
        assert s.max_depth == 0
        assert s.declaration_count == 1
        assert s.logical_axiom_count == 0
        assert s.annotation_axiom_count == 0

    def test_counts_match_naive_scan(self):
        rng = random.Random(606)
        for _ in range(20):
            tax = build_taxonomy(random_tree_changes(rng, rng.randint(1, 50)))
            s = stats(tax)
            decls = [ax for ax in tax.axioms if isinstance(ax, Declaration)]
            edges = [ax for ax in tax.axioms if isinstance(ax, SubClassOf)]
            anns = [ax for ax in tax.axioms if isinstance(ax, AnnotationAssertion)]
            assert s.declaration_count == len(decls)
            assert s.logical_axiom_count == len(edges)
            assert s.annotation_axiom_count == len(anns)
            assert s.class_count == len(decls) - 1  # root excluded
            assert s.class_count == s.logical_axiom_count  # one edge per class
            assert s.vertical_count == len(tax.children_of(ROOT))
            assert s.max_depth == max(
                (tax.depth(c) for c in tax.classes if c != ROOT), default=0)

    def test_invalid_tree_rejected(self):
        tax = Taxonomy.from_axioms(
            [Declaration(NS + "a"), Declaration(NS + "b"),
             SubClassOf(NS + "a", NS + "b"), SubClassOf(NS + "b", NS + "a")])
        with pytest.raises(InvalidTree):
            stats(tax)

    def test_vertical_depth_is_one(self):
        tax = build_taxonomy([decl("root"), decl("v"), edge("v", "root")])
        assert tax.depth(NS + "v") == 1
        assert stats(tax).max_depth == 1
