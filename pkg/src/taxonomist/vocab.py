"""Annotation vocabulary and namespace constants.

The recognized annotation properties form a fixed, closed set; unknown
properties are still stored verbatim so that foreign documents survive a
round trip.
"""

from __future__ import annotations

RDFS_NS = "http://www.w3.org/2000/01/rdf-schema#"
SKOS_NS = "http://www.w3.org/2004/02/skos/core#"
OWL_NS = "http://www.w3.org/2002/07/owl#"
XSD_NS = "http://www.w3.org/2001/XMLSchema#"

# Project-local vocabulary for business/curation flags.
VOCAB_NS = "https://vocab.example.org/taxonomy#"

# Default namespace for minted entity IRIs; projects may override it.
DEFAULT_NAMESPACE = "https://interests.example.org/"
DEFAULT_ROOT_IRI = DEFAULT_NAMESPACE + "root"

LABEL = RDFS_NS + "label"
ALT_LABEL = SKOS_NS + "altLabel"
DEFINITION = SKOS_NS + "definition"
DEPRECATED = OWL_NS + "deprecated"
NO_ADS = VOCAB_NS + "noAds"
IS_HUMAN_REVIEWED = VOCAB_NS + "isHumanReviewed"
EXAMPLE_PIN = VOCAB_NS + "examplePin"

XSD_BOOLEAN = XSD_NS + "boolean"
XSD_INTEGER = XSD_NS + "integer"
XSD_STRING = XSD_NS + "string"

#: Properties the tooling knows how to edit, lint, and export.
KNOWN_ANNOTATION_PROPERTIES = frozenset(
    {LABEL, ALT_LABEL, DEFINITION, DEPRECATED, NO_ADS, IS_HUMAN_REVIEWED, EXAMPLE_PIN}
)

#: Datatypes accepted for typed literals.
SUPPORTED_DATATYPES = frozenset({XSD_BOOLEAN, XSD_INTEGER, XSD_STRING})

#: Prefix table used for serialization and CURIE resolution.
DEFAULT_PREFIXES = {
    "rdfs": RDFS_NS,
    "skos": SKOS_NS,
    "owl": OWL_NS,
    "xsd": XSD_NS,
    "tax": VOCAB_NS,
}
