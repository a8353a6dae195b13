"""Per-entity discussion threads with mentions and entity links.

Threads are append-only: comments are never edited or deleted, matching
the audit discipline of the revision log. Comment bodies are parsed into
segments (text, @mention, [[entity link]], bare URL); concatenating the
segments' source text always reproduces the body exactly.
"""

from __future__ import annotations

import json
import re
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Literal, Optional

from .errors import EmptyBody, UnknownThread
from .model import Iri, Taxonomy

_SPECIAL_RE = re.compile(
    r"""
      (?P<entity>\[\[[^\[\]]+\]\])
    | (?P<url>https?://[^\s<>\[\]]+)
    | (?P<mention>(?<![\w@])@[A-Za-z0-9_.\-]+)
    """,
    re.VERBOSE,
)

_TRAILING_PUNCT = ".,;:!?)'\""


@dataclass(frozen=True)
class Segment:
    kind: Literal["text", "mention", "entityLink", "externalLink"]
    source: str
    value: Optional[str] = None  # user id, entity IRI, or URL

    def to_json(self) -> dict:
        out = {"kind": self.kind, "source": self.source}
        if self.value is not None:
            out["value"] = self.value
        return out

    @classmethod
    def from_json(cls, data: dict) -> "Segment":
        return cls(data["kind"], data["source"], data.get("value"))


def resolve_entity_ref(text: str, prefixes: dict[str, str]) -> Optional[Iri]:
    """Expand the inside of a ``[[...]]`` link to an IRI.

    Accepts a full IRI, a CURIE against the project prefixes (the empty
    prefix is the project namespace), or a bare local name.
    """
    text = text.strip()
    if not text:
        return None
    if text.startswith(("http://", "https://", "urn:")):
        return text
    prefix, sep, local = text.partition(":")
    if sep and prefix in prefixes:
        return prefixes[prefix] + local
    if not sep and "" in prefixes:
        return prefixes[""] + text
    return None


def parse_segments(body: str, prefixes: dict[str, str]) -> list[Segment]:
    """Split a comment body into renderable segments (lossless)."""
    segments: list[Segment] = []
    pos = 0

    def text_segment(upto: int) -> None:
        if upto > pos:
            segments.append(Segment("text", body[pos:upto]))

    for match in _SPECIAL_RE.finditer(body):
        start, end = match.start(), match.end()
        raw = match.group()
        if match.lastgroup == "url":
            # punctuation glued to the end of a URL belongs to the prose
            trimmed = raw.rstrip(_TRAILING_PUNCT)
            end = start + len(trimmed)
            raw = trimmed
        text_segment(start)
        if match.lastgroup == "mention":
            segments.append(Segment("mention", raw, raw[1:]))
        elif match.lastgroup == "url":
            segments.append(Segment("externalLink", raw, raw))
        else:
            iri = resolve_entity_ref(raw[2:-2], prefixes)
            if iri is None:
                segments.append(Segment("text", raw))
            else:
                segments.append(Segment("entityLink", raw, iri))
        pos = end
    text_segment(len(body))
    return segments


@dataclass(frozen=True)
class Comment:
    author: str
    body: str
    segments: tuple[Segment, ...]
    timestamp: datetime

    def mentions(self) -> set[str]:
        return {s.value for s in self.segments if s.kind == "mention"}

    def entity_links(self) -> list[Iri]:
        return [s.value for s in self.segments if s.kind == "entityLink"]

    def to_json(self) -> dict:
        return {"author": self.author, "body": self.body,
                "segments": [s.to_json() for s in self.segments],
                "ts": self.timestamp.isoformat()}


@dataclass
class DiscussionThread:
    id: str
    entity: Iri
    status: str = "open"  # open | resolved
    comments: list[Comment] = field(default_factory=list)
    created: datetime = field(default_factory=lambda: datetime.now(timezone.utc))
    updated: datetime = field(default_factory=lambda: datetime.now(timezone.utc))

    def participants(self) -> set[str]:
        return {c.author for c in self.comments}

    def to_json(self) -> dict:
        return {"id": self.id, "entity": self.entity, "status": self.status,
                "created": self.created.isoformat(), "updated": self.updated.isoformat(),
                "comments": [c.to_json() for c in self.comments]}


def _utcnow() -> datetime:
    return datetime.now(timezone.utc)


class DiscussionBoard:
    """All threads of one project, persisted as an append-only JSONL log."""

    def __init__(self, path: Optional[Path] = None,
                 clock: Callable[[], datetime] = _utcnow):
        self.path = Path(path) if path else None
        self.clock = clock
        self.threads: dict[str, DiscussionThread] = {}
        self._counter = 0
        self._lock = threading.RLock()
        if self.path is not None and self.path.exists():
            self._load()

    # --- persistence -----------------------------------------------------

    def _load(self) -> None:
        for line in self.path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            record = json.loads(line)
            if record["type"] == "comment":
                comment = Comment(record["author"], record["body"],
                                  tuple(Segment.from_json(s) for s in record["segments"]),
                                  datetime.fromisoformat(record["ts"]))
                thread = self.threads.get(record["thread"])
                if thread is None:
                    thread = DiscussionThread(record["thread"], record["entity"],
                                              created=comment.timestamp,
                                              updated=comment.timestamp)
                    self.threads[thread.id] = thread
                    self._counter = max(self._counter, _thread_number(thread.id))
                thread.comments.append(comment)
                thread.updated = comment.timestamp
            else:
                thread = self.threads.get(record["thread"])
                if thread is not None:
                    thread.status = record["status"]
                    thread.updated = datetime.fromisoformat(record["ts"])

    def _append(self, record: dict) -> None:
        if self.path is None:
            return
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")

    # --- operations --------------------------------------------------------

    def post_comment(self, tax: Taxonomy, entity: Iri, author: str, body: str,
                     thread_id: Optional[str] = None,
                     prefixes: Optional[dict[str, str]] = None
                     ) -> tuple[DiscussionThread, Comment, set[str]]:
        """Open a thread (or reply) and return (thread, comment, recipients).

        Recipients are prior thread participants plus mentioned users,
        never including the comment's author.
        """
        if not body.strip():
            raise EmptyBody("comment body must not be blank")
        with self._lock:
            if thread_id is None:
                tax.require_declared(entity)
                self._counter += 1
                thread = DiscussionThread(f"t{self._counter}", entity)
                now = self.clock()
                thread.created = thread.updated = now
                self.threads[thread.id] = thread
            else:
                thread = self.require_thread(thread_id)
            prior = thread.participants()
            comment = Comment(author, body,
                              tuple(parse_segments(body, prefixes or {})),
                              self.clock())
            thread.comments.append(comment)
            thread.updated = comment.timestamp
            recipients = (prior | comment.mentions()) - {author}
            self._append({"type": "comment", "thread": thread.id,
                          "entity": thread.entity, **comment.to_json()})
            return thread, comment, recipients

    def set_status(self, thread_id: str, status: str) -> tuple[DiscussionThread, bool]:
        """Update a thread's status; returns (thread, actually changed)."""
        if status not in ("open", "resolved"):
            raise ValueError(f"unknown thread status: {status}")
        with self._lock:
            thread = self.require_thread(thread_id)
            if thread.status == status:
                return thread, False
            thread.status = status
            thread.updated = self.clock()
            self._append({"type": "status", "thread": thread.id,
                          "status": status, "ts": thread.updated.isoformat()})
            return thread, True

    def require_thread(self, thread_id: str) -> DiscussionThread:
        if thread_id not in self.threads:
            raise UnknownThread(thread_id)
        return self.threads[thread_id]

    def threads_for(self, entity: Iri) -> list[DiscussionThread]:
        return sorted((t for t in self.threads.values() if t.entity == entity),
                      key=lambda t: (t.created, t.id))

    def list_threads(self, sort: str = "byCreated",
                     name_of: Optional[Callable[[Iri], str]] = None
                     ) -> list[DiscussionThread]:
        """Stable thread listing: byEntity | byCreated | byUpdated.

        Time sorts put the most recent first; byEntity groups threads under
        case-insensitive display-name order, oldest thread first inside a
        group.
        """
        threads = list(self.threads.values())
        if sort == "byCreated":
            return sorted(threads, key=lambda t: (t.created, t.id), reverse=True)
        if sort == "byUpdated":
            return sorted(threads, key=lambda t: (t.updated, t.id), reverse=True)
        if sort == "byEntity":
            name_of = name_of or (lambda iri: iri)
            return sorted(threads,
                          key=lambda t: (name_of(t.entity).casefold(), t.entity,
                                         t.created, t.id))
        raise ValueError(f"unknown sort key: {sort}")

    def resolved_count(self) -> int:
        return sum(1 for t in self.threads.values() if t.status == "resolved")


def _thread_number(thread_id: str) -> int:
    try:
        return int(thread_id.lstrip("t"))
    except ValueError:
        return 0
