"""Event-sourced revision log with a materialized head taxonomy.

Each revision is an atomically committed composite change (ordered axiom
adds/removes) with author, timestamp, message, and provenance. The log is
append-only; the head taxonomy is the fold of all revisions and is rebuilt
by replay when a log file is opened. Persistence is one JSON object per
line, append-only, so the on-disk history is diffable and crash-tolerant
(a torn final line is discarded on load).
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Iterable, Optional

from .errors import (
    ChangeError,
    EmptyChangeSet,
    InverseNotApplicable,
    UnknownRevision,
    ValidationFailed,
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
    mentions,
)

PROVENANCE_KINDS = {"manual", "merge", "bulkMove", "bulkAnnotation", "revert", "seedImport"}


@dataclass(frozen=True)
class Provenance:
    kind: str
    of: Optional[int] = None  # reverted revision number

    def __post_init__(self):
        if self.kind not in PROVENANCE_KINDS:
            raise ValueError(f"unknown provenance kind: {self.kind}")
        if (self.kind == "revert") != (self.of is not None):
            raise ValueError("'of' is required for revert and only for revert")


MANUAL = Provenance("manual")
MERGE = Provenance("merge")
BULK_MOVE = Provenance("bulkMove")
BULK_ANNOTATION = Provenance("bulkAnnotation")
SEED_IMPORT = Provenance("seedImport")


def revert_of(number: int) -> Provenance:
    return Provenance("revert", number)


@dataclass(frozen=True)
class Revision:
    number: int
    changes: tuple[AtomicChange, ...]
    author: str
    timestamp: datetime
    message: str
    provenance: Provenance

    def mentions(self, iri: Iri) -> bool:
        return any(mentions(c.axiom, iri) for c in self.changes)

    def mentioned_iris(self) -> set[Iri]:
        out: set[Iri] = set()
        for c in self.changes:
            ax = c.axiom
            if isinstance(ax, Declaration):
                out.add(ax.subject)
            elif isinstance(ax, SubClassOf):
                out.add(ax.sub)
                out.add(ax.sup)
            else:
                out.add(ax.subject)
        return out


# --- JSON codec (log records, event payloads, API bodies) -----------------


def axiom_to_json(ax: Axiom) -> dict:
    if isinstance(ax, Declaration):
        return {"kind": "declaration", "subject": ax.subject}
    if isinstance(ax, SubClassOf):
        return {"kind": "subClassOf", "sub": ax.sub, "super": ax.sup}
    value: dict = {"lexical": ax.value.lexical}
    if ax.value.lang is not None:
        value["lang"] = ax.value.lang
    if ax.value.datatype is not None:
        value["datatype"] = ax.value.datatype
    return {"kind": "annotation", "property": ax.property, "subject": ax.subject,
            "value": value}


def axiom_from_json(data: dict) -> Axiom:
    kind = data.get("kind")
    if kind == "declaration":
        return Declaration(data["subject"])
    if kind == "subClassOf":
        return SubClassOf(data["sub"], data["super"])
    if kind == "annotation":
        v = data["value"]
        return AnnotationAssertion(
            data["property"], data["subject"],
            AnnotationValue(v["lexical"], v.get("lang"), v.get("datatype")))
    raise ValueError(f"unknown axiom kind: {kind!r}")


def change_to_json(change: AtomicChange) -> dict:
    return {"op": change.op, "axiom": axiom_to_json(change.axiom)}


def change_from_json(data: dict) -> AtomicChange:
    op = data.get("op")
    if op not in ("add", "remove"):
        raise ValueError(f"unknown change op: {op!r}")
    return AtomicChange(op, axiom_from_json(data["axiom"]))


def revision_to_json(rev: Revision) -> dict:
    prov: dict = {"kind": rev.provenance.kind}
    if rev.provenance.of is not None:
        prov["of"] = rev.provenance.of
    return {
        "rev": rev.number,
        "author": rev.author,
        "ts": rev.timestamp.isoformat(),
        "msg": rev.message,
        "prov": prov,
        "changes": [change_to_json(c) for c in rev.changes],
    }


def revision_from_json(data: dict) -> Revision:
    prov = data["prov"]
    return Revision(
        number=data["rev"],
        changes=tuple(change_from_json(c) for c in data["changes"]),
        author=data["author"],
        timestamp=datetime.fromisoformat(data["ts"]),
        message=data["msg"],
        provenance=Provenance(prov["kind"], prov.get("of")),
    )


def _utcnow() -> datetime:
    return datetime.now(timezone.utc)


class ProjectLog:
    """Append-only revision log plus the materialized head taxonomy.

    Commits are serialized by an internal lock (single writer per project);
    reads of ``head`` and ``revisions`` are safe against the immutable
    revision list. When ``path`` is given, every commit is appended to the
    JSONL file before it becomes visible.
    """

    def __init__(self, project: str, root: Optional[Iri] = None, mode: str = "tree",
                 path: Optional[Path] = None,
                 clock: Callable[[], datetime] = _utcnow):
        self.project = project
        self.path = Path(path) if path else None
        self.clock = clock
        self.revisions: list[Revision] = []
        self.head = Taxonomy(root=root, mode=mode)
        self._entity_index: dict[Iri, list[int]] = {}
        self._lock = threading.RLock()
        if self.path is not None and self.path.exists():
            self._load()

    # --- persistence ---------------------------------------------------

    def _load(self) -> None:
        raw = self.path.read_text(encoding="utf-8")
        good_length = 0
        for lineno, line in enumerate(raw.splitlines(keepends=True), start=1):
            stripped = line.strip()
            if not stripped:
                good_length += len(line)
                continue
            try:
                rev = revision_from_json(json.loads(stripped))
            except (json.JSONDecodeError, KeyError, ValueError):
                if good_length + len(line) >= len(raw):
                    break  # torn final record from a crash; drop it
                raise
            if rev.number != len(self.revisions) + 1:
                raise ValueError(
                    f"{self.path}:{lineno}: revision {rev.number} out of order")
            self._admit(rev)
            good_length += len(line)
        if good_length < len(raw):
            with open(self.path, "r+", encoding="utf-8") as fh:
                fh.truncate(good_length)

    def _append_record(self, rev: Revision) -> None:
        if self.path is None:
            return
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(revision_to_json(rev), ensure_ascii=False) + "\n")

    def _admit(self, rev: Revision) -> None:
        """Apply a trusted revision to head and the indexes (load path)."""
        self.head.apply_all(rev.changes)
        self.revisions.append(rev)
        for iri in rev.mentioned_iris():
            self._entity_index.setdefault(iri, []).append(rev.number)

    # --- operations ------------------------------------------------------

    def commit(self, changes: Iterable[AtomicChange], author: str, message: str,
               provenance: Provenance = MANUAL) -> Revision:
        """Apply a composite change atomically and append a revision.

        On any failing change the already-applied prefix is rolled back and
        ``ValidationFailed`` is raised; head and the revision list are then
        exactly as before the call.
        """
        change_list = tuple(changes)
        if not change_list:
            raise EmptyChangeSet("a revision needs at least one change")
        with self._lock:
            applied: list[AtomicChange] = []
            for change in change_list:
                try:
                    self.head.apply(change)
                except ChangeError as err:
                    for done in reversed(applied):
                        self.head.apply(done.invert())
                    raise ValidationFailed(change, err) from err
                applied.append(change)

            now = self.clock()
            if self.revisions and now < self.revisions[-1].timestamp:
                now = self.revisions[-1].timestamp
            rev = Revision(
                number=len(self.revisions) + 1,
                changes=change_list,
                author=author,
                timestamp=now,
                message=message,
                provenance=provenance,
            )
            self.revisions.append(rev)
            for iri in rev.mentioned_iris():
                self._entity_index.setdefault(iri, []).append(rev.number)
            self._append_record(rev)
            return rev

    def revert(self, number: int, author: str, message: Optional[str] = None) -> Revision:
        """Commit the inverse of a revision (inverse changes, reverse order)."""
        target = self.revision(number)
        inverse = tuple(c.invert() for c in reversed(target.changes))
        with self._lock:
            try:
                return self.commit(
                    inverse, author,
                    message if message is not None else f"Revert of revision {number}",
                    provenance=revert_of(number))
            except ValidationFailed as err:
                raise InverseNotApplicable(err.change.axiom, err.reason) from err

    def revision(self, number: int) -> Revision:
        if not isinstance(number, int) or number < 1 or number > len(self.revisions):
            raise UnknownRevision(number)
        return self.revisions[number - 1]

    def history(self, entity: Optional[Iri] = None, limit: Optional[int] = None,
                offset: int = 0) -> list[Revision]:
        """Revisions in descending number order, optionally filtered by entity."""
        if entity is None:
            numbers = range(len(self.revisions), 0, -1)
        else:
            numbers = list(reversed(self._entity_index.get(entity, ())))
        out = []
        for pos, number in enumerate(numbers):
            if pos < offset:
                continue
            if limit is not None and len(out) >= limit:
                break
            out.append(self.revisions[number - 1])
        return out

    def replay(self, upto: int) -> Taxonomy:
        """Taxonomy state as of revision ``upto`` (0 = empty taxonomy)."""
        if not isinstance(upto, int) or upto < 0 or upto > len(self.revisions):
            raise UnknownRevision(upto)
        tax = Taxonomy(root=self.head.root, mode=self.head.mode)
        for rev in self.revisions[:upto]:
            tax.apply_all(rev.changes)
        return tax

    @property
    def head_revision(self) -> int:
        return len(self.revisions)
