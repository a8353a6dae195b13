"""Relational export: row shaping, flag handling, closure correctness."""

from __future__ import annotations

import io
import json
import random
import zipfile

import pytest

from taxonomist import vocab
from taxonomist.errors import InvalidTree
from taxonomist.export import (
    IdMap,
    closure_csv,
    export,
    interests_csv,
    row_counts,
    synonyms_csv,
    zip_bundle,
)
from taxonomist.lint import stats
from taxonomist.model import (
    AnnotationAssertion,
    AnnotationValue,
    Declaration,
    SubClassOf,
    Taxonomy,
    add,
    boolean_value,
)

from helpers import NS, build_taxonomy, random_tree_changes


def decl(n):
    return add(Declaration(NS + n))


def edge(a, b):
    return add(SubClassOf(NS + a, NS + b))


def label(n, text):
    return add(AnnotationAssertion(vocab.LABEL, NS + n, AnnotationValue(text, lang="en")))


def flag(n, prop):
    return add(AnnotationAssertion(prop, NS + n, boolean_value(True)))


@pytest.fixture
def sample():
    return build_taxonomy([
        decl("root"),
        decl("home"), edge("home", "root"), label("home", "Home Decor"),
        decl("lighting"), edge("lighting", "home"), label("lighting", "Lighting"),
        add(AnnotationAssertion(vocab.ALT_LABEL, NS + "lighting",
                                AnnotationValue("Lamps", lang="en"))),
        decl("sensitive"), edge("sensitive", "home"), label("sensitive", "Sensitive"),
        flag("sensitive", vocab.NO_ADS),
        decl("under_sensitive"), edge("under_sensitive", "sensitive"),
        label("under_sensitive", "Fine Topic"),
        decl("old"), edge("old", "home"), label("old", "Old Topic"),
        flag("old", vocab.DEPRECATED),
        flag("lighting", vocab.IS_HUMAN_REVIEWED),
    ])


class TestExport:
    def test_no_ads_excluded_by_default_present_when_included(self, sample):
        bundle = export(sample, 1, IdMap())
        iris = {r.iri for r in bundle.interests}
        assert NS + "sensitive" not in iris
        assert NS + "old" not in iris  # deprecated also excluded by default

        bundle = export(sample, 1, IdMap(), include_no_ads=True, include_deprecated=True)
        rows = {r.iri: r for r in bundle.interests}
        assert rows[NS + "sensitive"].no_ads is True
        assert rows[NS + "old"].deprecated is True
        assert rows[NS + "lighting"].is_human_reviewed is True

    def test_excluded_parent_reattaches_children_upward(self, sample):
        bundle = export(sample, 1, IdMap())
        rows = {r.iri: r for r in bundle.interests}
        fine = rows[NS + "under_sensitive"]
        home = rows[NS + "home"]
        assert fine.parent_id == home.id  # skipped the excluded noAds parent
        assert fine.level == home.level + 1

    def test_root_only_taxonomy_exports_nothing(self):
        bundle = export(build_taxonomy([decl("root")]), 0, IdMap())
        assert bundle.interests == []
        assert row_counts(bundle) == {"interests": 0, "synonyms": 0, "closure": 0}

    def test_levels_and_parent_null_iff_level_one(self, sample):
        bundle = export(sample, 1, IdMap())
        for row in bundle.interests:
            assert (row.parent_id is None) == (row.level == 1)

    def test_synonyms_reference_existing_rows(self, sample):
        bundle = export(sample, 1, IdMap())
        ids = {r.id for r in bundle.interests}
        assert bundle.synonyms == [(next(r.id for r in bundle.interests
                                         if r.iri == NS + "lighting"), "Lamps", "en")]
        for row_id, _, _ in bundle.synonyms:
            assert row_id in ids

    def test_closure_matches_all_pairs_bfs(self):
        rng = random.Random(404)
        for _ in range(20):
            tax = build_taxonomy(random_tree_changes(
                rng, rng.randint(1, 60), p_flag=0.15))
            bundle = export(tax, 1, IdMap(), include_no_ads=True, include_deprecated=True)
            parent = {r.id: r.parent_id for r in bundle.interests}
            expected = set()
            for row in bundle.interests:
                node, distance = parent[row.id], 1
                while node is not None:
                    expected.add((node, row.id, distance))
                    node = parent[node]
                    distance += 1
            assert set(bundle.closure) == expected

    def test_interests_count_cross_checks_stats(self, sample):
        bundle = export(sample, 1, IdMap())
        s = stats(sample)
        excluded = 2  # one noAds, one deprecated
        assert len(bundle.interests) == s.class_count - excluded

    def test_invalid_tree_rejected(self):
        tax = Taxonomy.from_axioms(
            [Declaration(NS + "a"), Declaration(NS + "b"),
             SubClassOf(NS + "a", NS + "b"), SubClassOf(NS + "b", NS + "a")])
        with pytest.raises(InvalidTree):
            export(tax, 1, IdMap())


class TestDeterminismAndIds:
    def test_same_input_same_bytes(self, sample):
        idmap = IdMap()
        a = export(sample, 1, idmap)
        b = export(sample, 1, idmap)
        assert interests_csv(a) == interests_csv(b)
        assert synonyms_csv(a) == synonyms_csv(b)
        assert closure_csv(a) == closure_csv(b)

    def test_ids_stable_across_exports_and_restarts(self, sample, tmp_path):
        path = tmp_path / "idmap.json"
        idmap = IdMap(path)
        first = export(sample, 1, idmap)
        ids_before = {r.iri: r.id for r in first.interests}

        reloaded = IdMap(path)
        second = export(sample, 2, reloaded, include_no_ads=True, include_deprecated=True)
        ids_after = {r.iri: r.id for r in second.interests}
        for iri, row_id in ids_before.items():
            assert ids_after[iri] == row_id
        # previously-excluded entities got fresh ids, never reusing old ones
        assert len(set(ids_after.values())) == len(ids_after)

    def test_deprecated_then_excluded_keeps_id(self, sample, tmp_path):
        path = tmp_path / "idmap.json"
        idmap = IdMap(path)
        everything = export(sample, 1, idmap, include_no_ads=True, include_deprecated=True)
        old_id = next(r.id for r in everything.interests if r.iri == NS + "old")
        IdMap(path)  # reload
        assert json.loads(path.read_text())["ids"][NS + "old"] == old_id


class TestRendering:
    def test_csv_headers_and_manifest(self, sample):
        bundle = export(sample, 7, IdMap())
        assert interests_csv(bundle).splitlines()[0] == \
            "id,iri,label,parentId,level,noAds,isHumanReviewed,deprecated"
        assert synonyms_csv(bundle).splitlines()[0] == "id,synonym,lang"
        assert closure_csv(bundle).splitlines()[0] == "ancestorId,descendantId,distance"
        assert bundle.manifest["revision"] == 7
        assert bundle.manifest["rowCounts"] == row_counts(bundle)

    def test_zip_bundle_contents(self, sample):
        payload = zip_bundle(export(sample, 1, IdMap()))
        with zipfile.ZipFile(io.BytesIO(payload)) as archive:
            assert sorted(archive.namelist()) == [
                "closure.csv", "interests.csv", "manifest.json", "synonyms.csv"]
            manifest = json.loads(archive.read("manifest.json"))
            assert manifest["revision"] == 1
