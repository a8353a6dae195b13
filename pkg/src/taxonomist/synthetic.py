"""Synthetic taxonomy generator for benchmarks, demos, and shape tests.

``shaped_taxonomy_changes`` builds a change list for a taxonomy with an exact
class count, an exact number of verticals, and an exact maximum depth
(one spine branch is pinned to the target depth; everything else attaches
at random below the cap). Output is deterministic for a given seed.
"""

from __future__ import annotations

import random

from . import vocab
from .model import (
    AnnotationAssertion,
    AnnotationValue,
    AtomicChange,
    Declaration,
    SubClassOf,
    Taxonomy,
    add,
)

ADJECTIVES = [
    "Modern", "Rustic", "Vintage", "Minimal", "Coastal", "Urban", "Classic",
    "Bohemian", "Industrial", "Nordic", "Tropical", "Retro", "Cozy", "Sleek",
]

NOUNS = [
    "Decor", "Lighting", "Crafts", "Recipes", "Outfits", "Gardens", "Prints",
    "Furniture", "Travel", "Fitness", "Weddings", "Storage", "Art", "Gadgets",
]


def _label_for(index: int, rng: random.Random) -> str:
    return f"{rng.choice(ADJECTIVES)} {rng.choice(NOUNS)} {index:05d}"


def shaped_taxonomy_changes(seed: int = 0, classes: int = 11_000, verticals: int = 24,
                        max_depth: int = 12,
                        namespace: str = vocab.DEFAULT_NAMESPACE,
                        root: str = vocab.DEFAULT_ROOT_IRI,
                        default_lang: str = "en",
                        p_definition: float = 0.35, p_alt: float = 0.15,
                        ) -> list[AtomicChange]:
    """Change list declaring ``classes`` interests under ``verticals`` top
    nodes with maximum depth exactly ``max_depth``."""
    spine_extra = max(max_depth - 1, 0)
    if classes < verticals + spine_extra:
        raise ValueError("class budget too small for the requested shape")
    if classes > verticals + spine_extra and max_depth < 2:
        raise ValueError("extra classes need max_depth >= 2 to attach below verticals")

    rng = random.Random(seed)
    changes: list[AtomicChange] = [add(Declaration(root))]
    depth_of: dict[str, int] = {root: 0}
    attachable: list[str] = []  # nodes with depth < max_depth - 1 accept children

    def new_node(index: int, parent: str, label: str) -> str:
        iri = f"{namespace}i{index:05d}"
        depth = depth_of[parent] + 1
        depth_of[iri] = depth
        changes.append(add(Declaration(iri)))
        changes.append(add(SubClassOf(iri, parent)))
        changes.append(add(AnnotationAssertion(
            vocab.LABEL, iri, AnnotationValue(label, lang=default_lang))))
        if rng.random() < p_definition:
            changes.append(add(AnnotationAssertion(
                vocab.DEFINITION, iri,
                AnnotationValue(f"A curated interest in {label.lower()}.",
                                lang=default_lang))))
        if rng.random() < p_alt:
            changes.append(add(AnnotationAssertion(
                vocab.ALT_LABEL, iri,
                AnnotationValue(f"{label} Ideas", lang=default_lang))))
        if depth < max_depth:
            attachable.append(iri)
        return iri

    index = 0
    vertical_iris = []
    for _ in range(verticals):
        index += 1
        vertical_iris.append(new_node(index, root, _label_for(index, rng)))

    # pin one branch to the exact target depth
    spine_parent = vertical_iris[0]
    for _ in range(spine_extra):
        index += 1
        spine_parent = new_node(index, spine_parent, _label_for(index, rng))

    while index < classes:
        index += 1
        parent = attachable[rng.randrange(len(attachable))]
        new_node(index, parent, _label_for(index, rng))

    return changes


def shaped_taxonomy(seed: int = 0, **kwargs) -> Taxonomy:
    changes = shaped_taxonomy_changes(seed, **kwargs)
    tax = Taxonomy(root=kwargs.get("root", vocab.DEFAULT_ROOT_IRI))
    tax.apply_all(changes)
    return tax
