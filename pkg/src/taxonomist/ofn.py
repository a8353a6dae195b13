"""OWL functional-style-syntax subset: parser, canonical serializer, seed import.

Grammar (whitespace-insensitive between tokens, ``#`` starts a line comment):

    Prefix(p:=<iri>)*
    Ontology(<iri>
      Declaration(Class(ref))
      SubClassOf(ref ref)
      AnnotationAssertion(ref ref literal)
    )

    literal := "lexical"@lang | "lexical"^^datatype-ref | "lexical"
    ref     := p:localname | <absolute-iri>

Anything outside this subset raises ``UnsupportedConstruct``; nothing is
silently dropped. Serialization is canonical (axioms sorted by kind rank,
subject, property, lexical value) so equal taxonomies produce identical
bytes regardless of construction order.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, field
from typing import Optional

from . import vocab
from .errors import (
    EmptySheet,
    InvalidRow,
    OfnParseError,
    UndeclaredPrefix,
    UnsupportedConstruct,
)
from .model import (
    AnnotationAssertion,
    AnnotationValue,
    AtomicChange,
    Axiom,
    Declaration,
    Iri,
    SubClassOf,
    Taxonomy,
    add,
)

_AXIOM_RANK = {Declaration: 0, SubClassOf: 1, AnnotationAssertion: 2}

_LOCAL_RE = re.compile(r"^[A-Za-z0-9_][A-Za-z0-9_.\-]*$")

_TOKEN_RE = re.compile(
    r"""
      (?P<ws>\s+)
    | (?P<comment>\#[^\n]*)
    | (?P<iriref><[^<>\s]*>)
    | (?P<string>"(?:[^"\\]|\\.)*")
    | (?P<langtag>@[A-Za-z0-9\-]+)
    | (?P<dtypesep>\^\^)
    | (?P<pname>(?:[A-Za-z][A-Za-z0-9_.\-]*)?:(?:[A-Za-z0-9_][A-Za-z0-9_.\-]*)?)
    | (?P<ident>[A-Za-z][A-Za-z0-9]*)
    | (?P<punct>[()=])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise OfnParseError(line, pos - line_start + 1, "a token", text[pos])
        kind = m.lastgroup
        value = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(_Token(kind, value, line, pos - line_start + 1))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            line_start = pos + value.rindex("\n") + 1
        pos = m.end()
    tokens.append(_Token("eof", "", line, len(text) - line_start + 1))
    return tokens


@dataclass
class OfnDocument:
    """A parsed or to-be-serialized ontology document."""

    prefixes: dict[str, Iri]
    ontology_iri: Iri
    axioms: list[Axiom] = field(default_factory=list)

    def axiom_set(self) -> frozenset:
        return frozenset(self.axioms)


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str, text: Optional[str] = None) -> _Token:
        tok = self.next()
        if tok.kind != kind or (text is not None and tok.text != text):
            raise OfnParseError(tok.line, tok.col, text or kind, tok.text)
        return tok

    def parse(self) -> OfnDocument:
        prefixes: dict[str, Iri] = {}
        while self.peek().kind == "ident" and self.peek().text == "Prefix":
            self.next()
            self.expect("punct", "(")
            name = self.expect("pname")
            prefix, _, local = name.text.partition(":")
            if local:
                raise OfnParseError(name.line, name.col, "prefix name ending in ':'", name.text)
            self.expect("punct", "=")
            iri_tok = self.expect("iriref")
            prefixes[prefix] = iri_tok.text[1:-1]
            self.expect("punct", ")")
        self.prefixes = prefixes

        head = self.expect("ident", "Ontology")
        del head
        self.expect("punct", "(")
        onto = self.expect("iriref")
        axioms = []
        while True:
            tok = self.peek()
            if tok.kind == "punct" and tok.text == ")":
                self.next()
                break
            if tok.kind == "eof":
                raise OfnParseError(tok.line, tok.col, "an axiom or ')'", "end of input")
            axioms.append(self.parse_axiom())
        tail = self.peek()
        if tail.kind != "eof":
            raise OfnParseError(tail.line, tail.col, "end of input", tail.text)
        return OfnDocument(prefixes, onto.text[1:-1], axioms)

    def parse_axiom(self) -> Axiom:
        tok = self.next()
        if tok.kind != "ident":
            raise OfnParseError(tok.line, tok.col, "an axiom keyword", tok.text)
        if tok.text == "Declaration":
            self.expect("punct", "(")
            entity_kind = self.expect("ident")
            if entity_kind.text != "Class":
                raise UnsupportedConstruct(
                    f"Declaration({entity_kind.text})", entity_kind.line, entity_kind.col)
            self.expect("punct", "(")
            subject = self.parse_ref()
            self.expect("punct", ")")
            self.expect("punct", ")")
            return Declaration(subject)
        if tok.text == "SubClassOf":
            self.expect("punct", "(")
            sub = self.parse_ref()
            sup = self.parse_ref()
            self.expect("punct", ")")
            return SubClassOf(sub, sup)
        if tok.text == "AnnotationAssertion":
            self.expect("punct", "(")
            prop = self.parse_ref()
            subject = self.parse_ref()
            value = self.parse_literal()
            self.expect("punct", ")")
            return AnnotationAssertion(prop, subject, value)
        raise UnsupportedConstruct(tok.text, tok.line, tok.col)

    def parse_ref(self) -> Iri:
        tok = self.next()
        if tok.kind == "iriref":
            return tok.text[1:-1]
        if tok.kind == "pname":
            prefix, _, local = tok.text.partition(":")
            if prefix not in self.prefixes:
                raise UndeclaredPrefix(prefix, tok.line, tok.col)
            return self.prefixes[prefix] + local
        if tok.kind == "ident":
            # a nested construct such as ObjectSomeValuesFrom(...)
            raise UnsupportedConstruct(tok.text, tok.line, tok.col)
        raise OfnParseError(tok.line, tok.col, "an IRI or prefixed name", tok.text)

    def parse_literal(self) -> AnnotationValue:
        tok = self.expect("string")
        lexical = _unescape(tok.text[1:-1])
        nxt = self.peek()
        if nxt.kind == "langtag":
            self.next()
            return AnnotationValue(lexical, lang=nxt.text[1:])
        if nxt.kind == "dtypesep":
            self.next()
            dt_tok = self.peek()
            datatype = self.parse_ref()
            if datatype not in vocab.SUPPORTED_DATATYPES:
                raise UnsupportedConstruct(f"datatype <{datatype}>", dt_tok.line, dt_tok.col)
            return AnnotationValue(lexical, datatype=datatype)
        return AnnotationValue(lexical)


def _unescape(raw: str) -> str:
    return raw.replace('\\"', '"').replace("\\\\", "\\") if "\\" in raw else raw


def _escape(lexical: str) -> str:
    return lexical.replace("\\", "\\\\").replace('"', '\\"')


def parse_ofn(text: str) -> OfnDocument:
    """Parse a document in the subset grammar; never drops constructs silently."""
    return _Parser(text).parse()


def axiom_sort_key(ax: Axiom):
    """Canonical total order: (kind rank, subject, property, lexical, ...)."""
    if isinstance(ax, Declaration):
        return (0, ax.subject, "", "", "", "", "")
    if isinstance(ax, SubClassOf):
        return (1, ax.sub, "", "", ax.sup, "", "")
    v = ax.value
    return (2, ax.subject, ax.property, v.lexical, "", v.lang or "", v.datatype or "")


def serialize_ofn(doc: OfnDocument) -> str:
    """Canonical text form; equal axiom sets serialize byte-identically."""
    shortener = _RefShortener(doc.prefixes)
    lines = []
    for prefix in sorted(doc.prefixes):
        lines.append(f"Prefix({prefix}:=<{doc.prefixes[prefix]}>)")
    lines.append(f"Ontology(<{doc.ontology_iri}>")
    for ax in sorted(set(doc.axioms), key=axiom_sort_key):
        lines.append(_render_axiom(ax, shortener))
    lines.append(")")
    return "\n".join(lines) + "\n"


class _RefShortener:
    def __init__(self, prefixes: dict[str, Iri]):
        # longest namespace wins; ties broken by prefix name
        self.table = sorted(prefixes.items(), key=lambda kv: (-len(kv[1]), kv[0]))

    def ref(self, iri: Iri) -> str:
        for prefix, ns in self.table:
            if iri.startswith(ns):
                local = iri[len(ns):]
                if _LOCAL_RE.match(local):
                    return f"{prefix}:{local}"
        return f"<{iri}>"


def _render_axiom(ax: Axiom, s: _RefShortener) -> str:
    if isinstance(ax, Declaration):
        return f"Declaration(Class({s.ref(ax.subject)}))"
    if isinstance(ax, SubClassOf):
        return f"SubClassOf({s.ref(ax.sub)} {s.ref(ax.sup)})"
    v = ax.value
    lit = f'"{_escape(v.lexical)}"'
    if v.lang is not None:
        lit += f"@{v.lang}"
    elif v.datatype is not None:
        lit += f"^^{s.ref(v.datatype)}"
    return f"AnnotationAssertion({s.ref(ax.property)} {s.ref(ax.subject)} {lit})"


def document_for(tax: Taxonomy, ontology_iri: Iri, namespace: Iri = vocab.DEFAULT_NAMESPACE,
                 extra_prefixes: Optional[dict[str, Iri]] = None) -> OfnDocument:
    """Wrap a taxonomy in a document with the standard prefix table."""
    prefixes = {"": namespace, **vocab.DEFAULT_PREFIXES}
    if extra_prefixes:
        prefixes.update(extra_prefixes)
    return OfnDocument(prefixes, ontology_iri, sorted(tax.axioms, key=axiom_sort_key))


def serialize_taxonomy(tax: Taxonomy, ontology_iri: Iri,
                       namespace: Iri = vocab.DEFAULT_NAMESPACE) -> str:
    return serialize_ofn(document_for(tax, ontology_iri, namespace))


# --- legacy spreadsheet seed ---------------------------------------------

SEED_HEADER = ("level1", "level2", "level3")


@dataclass
class SeedSheet:
    """Rows of the legacy three-level spreadsheet."""

    rows: list[tuple[str, str, str]]

    @classmethod
    def from_csv(cls, text: str) -> "SeedSheet":
        reader = csv.reader(io.StringIO(text))
        try:
            header = next(reader)
        except StopIteration:
            raise EmptySheet("sheet has no header row") from None
        if tuple(h.strip().lower() for h in header) != SEED_HEADER:
            raise InvalidRow(0, f"header must be {','.join(SEED_HEADER)}")
        rows = []
        for raw in reader:
            padded = [c.strip() for c in raw] + [""] * (3 - len(raw))
            rows.append((padded[0], padded[1], padded[2]))
        return cls(rows)


def slugify(label: str) -> str:
    """Lowercase, spaces to underscores, every other non-alphanumeric dropped."""
    slug = re.sub(r"\s+", "_", label.strip().lower())
    slug = re.sub(r"[^a-z0-9_]", "", slug)
    return slug or "class"


def import_seed(sheet: SeedSheet, root: Iri, namespace: Iri = vocab.DEFAULT_NAMESPACE,
                default_lang: str = "en",
                existing: Optional[Taxonomy] = None) -> list[AtomicChange]:
    """Compile a seed sheet into a change list rooted under ``root``.

    One class per distinct path node; duplicate sibling names collapse into
    one class, while the same name under different parents mints separate
    IRIs (numeric suffix on slug collision). When ``existing`` is given,
    path nodes already present (matched by label under the same parent) are
    reused, so follow-up sheets can extend a live taxonomy.
    """
    data_rows = [r for r in sheet.rows if any(r)]
    if not data_rows:
        raise EmptySheet("sheet has no data rows")
    for idx, row in enumerate(sheet.rows):
        for k in (1, 2):
            if row[k] and not row[k - 1]:
                raise InvalidRow(idx, f"level{k + 1} set but level{k} empty")

    used_slugs = set()
    if existing is not None:
        for iri in existing.classes:
            if iri.startswith(namespace):
                used_slugs.add(iri[len(namespace):])

    def find_existing(parent: Iri, name: str) -> Optional[Iri]:
        if existing is None:
            return None
        if not existing.declared(parent) and parent != existing.root:
            return None
        for child in existing.children_of(parent):
            if any(value.lexical == name for value in existing.labels_of(child)):
                return child
        return None

    changes: list[AtomicChange] = []
    if existing is None or not existing.declared(root):
        changes.append(add(Declaration(root)))

    path_to_iri: dict[tuple[str, ...], Iri] = {}

    def node_for(path: tuple[str, ...]) -> Iri:
        if path in path_to_iri:
            return path_to_iri[path]
        parent = root if len(path) == 1 else node_for(path[:-1])
        name = path[-1]
        found = find_existing(parent, name)
        if found is not None:
            path_to_iri[path] = found
            return found
        slug = slugify(name)
        candidate, n = slug, 1
        while candidate in used_slugs:
            n += 1
            candidate = f"{slug}_{n}"
        used_slugs.add(candidate)
        iri = namespace + candidate
        path_to_iri[path] = iri
        changes.append(add(Declaration(iri)))
        changes.append(add(SubClassOf(iri, parent)))
        changes.append(add(AnnotationAssertion(
            vocab.LABEL, iri, AnnotationValue(name, lang=default_lang))))
        return iri

    for row in data_rows:
        names = [n for n in row if n]
        for depth in range(len(names)):
            node_for(tuple(names[: depth + 1]))

    return changes
