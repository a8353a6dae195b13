"""Project container and service pipeline.

A project bundles the revision log with its settings, tag store,
discussion board, outbox, and event stream. Every mutation funnels
through the per-project lock: commits re-evaluate tag rules before any
event is emitted, so subscribers never observe tags that are stale
relative to a revision. Events carry a gapless per-project sequence
number; ``RevisionCommitted`` events arrive in revision-number order and
contain the full change list.
"""

from __future__ import annotations

import itertools
import json
import threading
from collections import deque
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Iterable, Optional
from urllib.parse import quote

from . import lint as lint_mod
from . import vocab
from .authz import ProjectAcl, Role, UserStore
from .changelog import (
    MANUAL,
    Provenance,
    ProjectLog,
    Revision,
    revision_to_json,
)
from .discussions import DiscussionBoard, DiscussionThread
from .errors import (
    DuplicateProject,
    InvalidQuery,
    SeqTooOld,
    UnknownProject,
    UnknownTag,
)
from .export import ExportBundle, IdMap
from .export import export as export_bundle
from .model import AtomicChange, Iri, Taxonomy
from .multilang import (
    DEFAULT_CONFIG,
    DisplayLanguageConfig,
    resolve_display_name,
)
from .notify import Outbox, chat_body, email_body
from .ofn import serialize_taxonomy
from .refactor import (
    AnnotationAction,
    AnnotationSelection,
    MergeRequest,
    plan_bulk_annotation_edit,
    plan_bulk_move,
    plan_merge,
)
from .tags import TagRule, TagStore, find_by_tag, rules_from_json, rules_to_json


def _utcnow() -> datetime:
    return datetime.now(timezone.utc)


SEARCH_FIELDS = {"label": vocab.LABEL, "altLabel": vocab.ALT_LABEL,
                 "definition": vocab.DEFINITION}

MAX_SEARCH_LIMIT = 500


@dataclass(frozen=True)
class EventEnvelope:
    seq: int
    kind: str  # RevisionCommitted | CommentPosted | TagsChanged | SettingsChanged
    payload: dict
    ts: str

    def to_json(self) -> dict:
        return {"seq": self.seq, "kind": self.kind, "payload": self.payload,
                "ts": self.ts}

    @classmethod
    def from_json(cls, data: dict) -> "EventEnvelope":
        return cls(data["seq"], data["kind"], data["payload"], data["ts"])


class EventBus:
    """Ordered, gapless per-project event stream with replay.

    Events are appended to ``events.jsonl`` and kept in memory (optionally
    bounded by ``retention``; subscribing below the retained window raises
    ``SeqTooOld``). Subscribers replay history past ``from_seq`` and then
    receive live events; ``None`` items are idle heartbeats.
    """

    def __init__(self, path: Optional[Path] = None, retention: Optional[int] = None,
                 clock: Callable[[], datetime] = _utcnow):
        self.path = Path(path) if path else None
        self.retention = retention
        self.clock = clock
        self._events: deque[EventEnvelope] = deque()
        self._first_seq = 1
        self._next_seq = 1
        self._cond = threading.Condition()
        if self.path is not None and self.path.exists():
            for line in self.path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    self._admit(EventEnvelope.from_json(json.loads(line)))

    def _admit(self, envelope: EventEnvelope) -> None:
        self._events.append(envelope)
        self._next_seq = envelope.seq + 1
        self._trim()

    def _trim(self) -> None:
        if self.retention is None:
            return
        while len(self._events) > self.retention:
            dropped = self._events.popleft()
            self._first_seq = dropped.seq + 1

    def publish(self, kind: str, payload: dict) -> EventEnvelope:
        with self._cond:
            envelope = EventEnvelope(self._next_seq, kind, payload,
                                     self.clock().isoformat())
            self._next_seq += 1
            self._events.append(envelope)
            self._trim()
            if self.path is not None:
                with open(self.path, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps(envelope.to_json(), ensure_ascii=False) + "\n")
            self._cond.notify_all()
            return envelope

    @property
    def current_seq(self) -> int:
        return self._next_seq - 1

    def events_since(self, from_seq: int) -> list[EventEnvelope]:
        with self._cond:
            if from_seq + 1 < self._first_seq:
                raise SeqTooOld(from_seq, self._first_seq)
            skip = max(0, from_seq + 1 - self._first_seq)
            return list(itertools.islice(self._events, skip, None))

    def subscribe(self, from_seq: int = 0, stop: Optional[threading.Event] = None,
                  idle: float = 0.25, heartbeat: bool = False
                  ) -> Iterable[Optional[EventEnvelope]]:
        """Yield events with seq > from_seq, forever (or until ``stop``).

        With ``heartbeat=True`` a ``None`` is yielded after each idle wait
        so callers can emit keep-alives and notice closed connections.
        """
        wanted = from_seq
        while stop is None or not stop.is_set():
            with self._cond:
                batch = self.events_since(wanted)
                if not batch:
                    self._cond.wait(idle)
                    batch = self.events_since(wanted)
            if batch:
                for envelope in batch:
                    yield envelope
                wanted = batch[-1].seq
            elif heartbeat:
                yield None


@dataclass
class ProjectSettings:
    """Per-project configuration, persisted as one flat JSON document."""

    name: str
    acl: ProjectAcl
    languages: DisplayLanguageConfig = DEFAULT_CONFIG
    webhook: Optional[str] = None
    namespace: str = vocab.DEFAULT_NAMESPACE
    root: str = vocab.DEFAULT_ROOT_IRI

    def to_json(self) -> dict:
        out = {"name": self.name}
        out.update(self.languages.to_json())
        out.update(self.acl.to_json())
        out["webhook"] = self.webhook
        out["namespace"] = self.namespace
        out["rootIri"] = self.root
        return out

    @classmethod
    def from_json(cls, data: dict) -> "ProjectSettings":
        return cls(
            name=data.get("name", ""),
            languages=DisplayLanguageConfig.from_json(data),
            acl=ProjectAcl.from_json(data),
            webhook=data.get("webhook"),
            namespace=data.get("namespace", vocab.DEFAULT_NAMESPACE),
            root=data.get("rootIri", vocab.DEFAULT_ROOT_IRI),
        )


def deep_link(project_id: str, iri: Iri) -> str:
    """Stable entity URL, independent of the entity's place in the tree."""
    return f"/p/{project_id}/e/{quote(iri, safe='')}"


class Project:
    """One taxonomy project: log, tags, discussions, settings, events."""

    def __init__(self, project_id: str, settings: ProjectSettings,
                 directory: Optional[Path] = None,
                 clock: Callable[[], datetime] = _utcnow,
                 poster: Optional[Callable[[str, dict], None]] = None,
                 event_retention: Optional[int] = None):
        self.id = project_id
        self.settings = settings
        self.dir = Path(directory) if directory else None
        self.clock = clock
        self._lock = threading.RLock()
        if self.dir is not None:
            self.dir.mkdir(parents=True, exist_ok=True)

        def sub(name: str) -> Optional[Path]:
            return self.dir / name if self.dir is not None else None

        self.log = ProjectLog(project_id, root=settings.root,
                              path=sub("log.jsonl"), clock=clock)
        tags_path = sub("tags.json")
        if tags_path is not None and tags_path.exists():
            self.tagstore = TagStore.from_json(
                json.loads(tags_path.read_text(encoding="utf-8")))
        else:
            self.tagstore = TagStore()
        rules_path = sub("rules.json")
        if rules_path is not None and rules_path.exists():
            for rule in rules_from_json(rules_path.read_text(encoding="utf-8")):
                self.tagstore.rules[rule.tag] = rule
        self.board = DiscussionBoard(sub("discussions.jsonl"), clock=clock)
        self.outbox = Outbox(sub("outbox.jsonl"), poster=poster)
        self.bus = EventBus(sub("events.jsonl"), retention=event_retention, clock=clock)
        self.idmap = IdMap(sub("idmap.json"))
        self.assignments: dict[Iri, set[str]] = self.tagstore.evaluate(self.log.head)

    # --- persistence helpers ------------------------------------------------

    @classmethod
    def create(cls, project_id: str, name: str, owner: str,
               directory: Optional[Path] = None, **kwargs) -> "Project":
        settings = ProjectSettings(name=name, acl=ProjectAcl(owner=owner))
        project = cls(project_id, settings, directory, **kwargs)
        project.save_settings()
        return project

    @classmethod
    def load(cls, project_id: str, directory: Path, **kwargs) -> "Project":
        settings = ProjectSettings.from_json(
            json.loads((directory / "settings.json").read_text(encoding="utf-8")))
        return cls(project_id, settings, directory, **kwargs)

    def save_settings(self) -> None:
        if self.dir is not None:
            path = self.dir / "settings.json"
            path.write_text(json.dumps(self.settings.to_json(), indent=2) + "\n",
                            encoding="utf-8")

    def _save_tags(self) -> None:
        if self.dir is not None:
            (self.dir / "tags.json").write_text(
                json.dumps(self.tagstore.to_json(), indent=2) + "\n", encoding="utf-8")
            (self.dir / "rules.json").write_text(
                rules_to_json(self.tagstore.rule_list()) + "\n", encoding="utf-8")

    # --- naming ----------------------------------------------------------

    @property
    def head(self) -> Taxonomy:
        return self.log.head

    def display_name(self, iri: Iri) -> str:
        primary, _ = resolve_display_name(self.head, iri, self.settings.languages)
        return primary.text

    def _prefixes(self) -> dict[str, str]:
        return {"": self.settings.namespace, **vocab.DEFAULT_PREFIXES}

    def deep_link(self, iri: Iri) -> str:
        self.head.require_declared(iri)
        return deep_link(self.id, iri)

    # --- commit pipeline ----------------------------------------------------

    def require(self, actor: str, role: Role) -> None:
        self.settings.acl.require(actor, role)

    def commit(self, actor: str, changes: Iterable[AtomicChange], message: str,
               provenance: Provenance = MANUAL) -> Revision:
        self.require(actor, Role.EDIT)
        with self._lock:
            revision = self.log.commit(changes, actor, message, provenance)
            self._after_commit(revision)
            return revision

    def _after_commit(self, revision: Revision) -> None:
        """Rule re-evaluation first, then events; order is the contract."""
        new_assignments = self.tagstore.evaluate(self.head)
        diff = _assignment_diff(self.assignments, new_assignments)
        self.assignments = new_assignments
        self.bus.publish("RevisionCommitted", revision_to_json(revision))
        if diff:
            self.bus.publish("TagsChanged",
                             {"revision": revision.number, "changes": diff})

    def revert(self, actor: str, number: int, message: Optional[str] = None) -> Revision:
        self.require(actor, Role.EDIT)
        with self._lock:
            revision = self.log.revert(number, actor, message)
            self._after_commit(revision)
            return revision

    def merge(self, actor: str, sources: set[Iri], target: Iri,
              message: str) -> Optional[Revision]:
        self.require(actor, Role.EDIT)
        with self._lock:
            plan = plan_merge(self.head, MergeRequest(frozenset(sources), target))
            if not plan:
                return None
            return self.commit(actor, plan, message, Provenance("merge"))

    def move(self, actor: str, entities: set[Iri], new_parent: Iri,
             message: str) -> Optional[Revision]:
        self.require(actor, Role.EDIT)
        with self._lock:
            plan = plan_bulk_move(self.head, entities, new_parent)
            if not plan:
                return None
            return self.commit(actor, plan, message, Provenance("bulkMove"))

    def bulk_annotate(self, actor: str, selection: AnnotationSelection,
                      action: AnnotationAction, message: str) -> Optional[Revision]:
        self.require(actor, Role.EDIT)
        with self._lock:
            plan = plan_bulk_annotation_edit(self.head, selection, action)
            if not plan:
                return None
            return self.commit(actor, plan, message, Provenance("bulkAnnotation"))

    # --- tags ---------------------------------------------------------------

    def define_tag(self, actor: str, label: str, color: str = "#808080",
                   description: Optional[str] = None):
        self.require(actor, Role.EDIT)
        with self._lock:
            tag = self.tagstore.define_tag(label, color, description)
            self._save_tags()
            return tag

    def set_rule(self, actor: str, rule: TagRule) -> None:
        self.require(actor, Role.EDIT)
        with self._lock:
            self.tagstore.set_rule(rule)
            self._save_tags()
            self._tags_changed()

    def import_rules(self, actor: str, text: str) -> int:
        self.require(actor, Role.EDIT)
        rules = rules_from_json(text)
        with self._lock:
            for rule in rules:
                self.tagstore.set_rule(rule)
            self._save_tags()
            self._tags_changed()
            return len(rules)

    def export_rules(self, actor: str) -> str:
        self.require(actor, Role.VIEW)
        return rules_to_json(self.tagstore.rule_list())

    def assign_tag(self, actor: str, entity: Iri, tag_id: str) -> None:
        self.require(actor, Role.EDIT)
        with self._lock:
            self.tagstore.assign_manual(self.head, entity, tag_id)
            self._save_tags()
            self._tags_changed()

    def unassign_tag(self, actor: str, entity: Iri, tag_id: str) -> None:
        self.require(actor, Role.EDIT)
        with self._lock:
            self.tagstore.unassign_manual(self.head, entity, tag_id)
            self._save_tags()
            self._tags_changed()

    def _tags_changed(self) -> None:
        new_assignments = self.tagstore.evaluate(self.head)
        diff = _assignment_diff(self.assignments, new_assignments)
        self.assignments = new_assignments
        if diff:
            self.bus.publish("TagsChanged", {"revision": None, "changes": diff})

    def tagged_entities(self, actor: str, tag_id: str) -> list[Iri]:
        self.require(actor, Role.VIEW)
        self.tagstore.require_tag(tag_id)
        with self._lock:
            return find_by_tag(self.assignments, tag_id, self.display_name)

    def tags_of(self, entity: Iri) -> list[str]:
        return sorted(self.assignments.get(entity, ()))

    # --- discussions -----------------------------------------------------

    def post_comment(self, actor: str, entity: Optional[Iri], body: str,
                     thread_id: Optional[str] = None) -> tuple[DiscussionThread, dict]:
        self.require(actor, Role.COMMENT)
        with self._lock:
            if thread_id is not None:
                entity = self.board.require_thread(thread_id).entity
            thread, comment, recipients = self.board.post_comment(
                self.head, entity, actor, body, thread_id, self._prefixes())
            notification = self._notify("CommentPosted", thread, recipients)
            payload = {**notification["webhook"],
                       "comment": comment.to_json(),
                       "threadStatus": thread.status,
                       "recipients": sorted(recipients)}
            self.bus.publish("CommentPosted", payload)
            return thread, payload

    def set_thread_status(self, actor: str, thread_id: str, status: str
                          ) -> DiscussionThread:
        self.require(actor, Role.COMMENT)
        with self._lock:
            thread, changed = self.board.set_status(thread_id, status)
            if changed and status == "resolved":
                recipients = thread.participants() - {actor}
                notification = self._notify("ThreadResolved", thread, recipients)
                self.bus.publish("CommentPosted", {
                    **notification["webhook"], "kind": "ThreadResolved",
                    "threadStatus": thread.status,
                    "recipients": sorted(recipients)})
            return thread

    def _notify(self, kind: str, thread: DiscussionThread,
                recipients: set[str]) -> dict:
        last = thread.comments[-1]
        webhook = {
            "kind": kind,
            "project": self.id,
            "entityIri": thread.entity,
            "entityLabel": self.display_name(thread.entity),
            "threadId": thread.id,
            "author": last.author,
            "bodyPreview": last.body[:200],
            "deepLink": deep_link(self.id, thread.entity),
        }
        entry = {"webhook": webhook,
                 "recipients": sorted(recipients),
                 "email": email_body(webhook),
                 "chat": chat_body(webhook)}
        self.outbox.add(entry)
        return entry

    def deliver_notifications(self) -> int:
        return self.outbox.deliver_pending(self.settings.webhook)

    def list_threads(self, actor: str, sort: str = "byCreated") -> list[DiscussionThread]:
        self.require(actor, Role.VIEW)
        with self._lock:
            return self.board.list_threads(sort, name_of=self.display_name)

    # --- reads -----------------------------------------------------------

    def search(self, actor: str, text: str = "",
               fields: Optional[list[str]] = None,
               tag: Optional[str] = None,
               include_deprecated: bool = False,
               limit: int = 50) -> list[dict]:
        self.require(actor, Role.VIEW)
        if limit < 1 or limit > MAX_SEARCH_LIMIT:
            raise InvalidQuery(f"limit must be 1..{MAX_SEARCH_LIMIT}")
        if not text and tag is None:
            raise InvalidQuery("text is required unless a tag filter is given")
        chosen = fields or ["label", "altLabel", "definition"]
        for name in chosen:
            if name not in SEARCH_FIELDS:
                raise InvalidQuery(f"unknown search field {name!r}")
        if tag is not None:
            self.tagstore.require_tag(tag)

        needle = text.casefold()
        with self._lock:
            head = self.head
            hits = []
            for entity in head.classes:
                if not include_deprecated and head.is_deprecated(entity):
                    continue
                if tag is not None and tag not in self.assignments.get(entity, ()):
                    continue
                best = None
                for name in chosen:
                    for value in head.values_of(entity, SEARCH_FIELDS[name]):
                        hay = value.lexical.casefold()
                        if not needle:
                            rank = 3
                        elif hay == needle:
                            rank = 0
                        elif hay.startswith(needle):
                            rank = 1
                        elif needle in hay:
                            rank = 2
                        else:
                            continue
                        if best is None or rank < best[0]:
                            best = (rank, name)
                if best is not None:
                    display, _ = resolve_display_name(head, entity, self.settings.languages)
                    hits.append((best[0], display.text.casefold(), entity, display, best[1]))
            hits.sort(key=lambda h: (h[0], h[1], h[2]))
            return [{"iri": entity,
                     "displayName": {"text": display.text, "language": display.language},
                     "matchedField": matched,
                     "rank": ("exact", "prefix", "substring", "tag")[rank]}
                    for rank, _, entity, display, matched in hits[:limit]]

    def entity_view(self, actor: str, iri: Iri,
                    include_deprecated_children: bool = False) -> dict:
        self.require(actor, Role.VIEW)
        with self._lock:
            head = self.head
            head.require_declared(iri)
            cfg = self.settings.languages
            primary, secondary = resolve_display_name(head, iri, cfg)

            def name_pair(entity: Iri) -> dict:
                p, s = resolve_display_name(head, entity, cfg)
                out = {"text": p.text, "language": p.language}
                if s is not None:
                    out["secondary"] = {"text": s.text, "language": s.language}
                return out

            children = []
            for child in sorted(head.children_of(iri, include_deprecated=include_deprecated_children),
                                key=lambda c: (self.display_name(c).casefold(), c)):
                children.append({
                    "iri": child,
                    "displayName": name_pair(child),
                    "deprecated": head.is_deprecated(child),
                    "tags": self.tags_of(child),
                    "childCount": len(head.children_of(child, include_deprecated=False)),
                })

            breadcrumb = []
            node = head.parent_of(iri) if head.declared(iri) else None
            while node is not None:
                breadcrumb.append(node)
                node = head.parent_of(node) if head.declared(node) else None
            breadcrumb.reverse()

            annotations = [
                {"property": a.property,
                 "value": {"lexical": a.value.lexical,
                           **({"lang": a.value.lang} if a.value.lang else {}),
                           **({"datatype": a.value.datatype} if a.value.datatype else {})}}
                for a in head.annotations_on(iri)
            ]
            return {
                "iri": iri,
                "deepLink": deep_link(self.id, iri),
                "displayName": {"text": primary.text, "language": primary.language},
                "secondaryDisplayName": (
                    {"text": secondary.text, "language": secondary.language}
                    if secondary else None),
                "labels": [{"lexical": v.lexical, "lang": v.lang}
                           for v in head.labels_of(iri)],
                "altLabels": [{"lexical": v.lexical, "lang": v.lang}
                              for v in head.values_of(iri, vocab.ALT_LABEL)],
                "definitions": [{"lexical": v.lexical, "lang": v.lang}
                                for v in head.values_of(iri, vocab.DEFINITION)],
                "noAds": head.flag_value(iri, vocab.NO_ADS),
                "isHumanReviewed": head.flag_value(iri, vocab.IS_HUMAN_REVIEWED),
                "deprecated": head.is_deprecated(iri),
                "parent": head.parent_of(iri) if head.declared(iri) else None,
                "breadcrumb": breadcrumb,
                "children": children,
                "tags": [
                    {"id": t, "label": self.tagstore.tags[t].label,
                     "color": self.tagstore.tags[t].color}
                    for t in self.tags_of(iri) if t in self.tagstore.tags],
                "threads": [t.id for t in self.board.threads_for(iri)],
                "annotations": annotations,
                "revision": self.log.head_revision,
            }

    def taxonomy_ofn(self, actor: str) -> str:
        self.require(actor, Role.VIEW)
        with self._lock:
            return serialize_taxonomy(self.head, self.settings.namespace + self.id,
                                      self.settings.namespace)

    def history(self, actor: str, entity: Optional[Iri] = None,
                limit: Optional[int] = None, offset: int = 0) -> list[Revision]:
        self.require(actor, Role.VIEW)
        return self.log.history(entity, limit, offset)

    def lint(self, actor: str, include_deprecated: bool = False):
        self.require(actor, Role.VIEW)
        with self._lock:
            return lint_mod.lint(self.head,
                                 default_lang=self.settings.languages.default_for_new,
                                 include_deprecated=include_deprecated)

    def stats(self, actor: str):
        self.require(actor, Role.VIEW)
        with self._lock:
            return lint_mod.stats(self.head)

    def export(self, actor: str, include_no_ads: bool = False,
               include_deprecated: bool = False,
               rev: Optional[int] = None) -> ExportBundle:
        self.require(actor, Role.VIEW)
        with self._lock:
            if rev is None or rev == self.log.head_revision:
                snapshot, at = self.head, self.log.head_revision
            else:
                snapshot, at = self.log.replay(rev), rev
            return export_bundle(snapshot, at, self.idmap,
                                 include_no_ads=include_no_ads,
                                 include_deprecated=include_deprecated,
                                 cfg=self.settings.languages)

    # --- settings ----------------------------------------------------------

    def update_settings(self, actor: str, data: dict) -> dict:
        """Apply a settings document (languages / webhook / ACL sections)."""
        self.require(actor, Role.MANAGE)
        with self._lock:
            sections = []
            if {"primary", "secondary", "default"} & data.keys():
                merged = {**self.settings.languages.to_json(),
                          **{k: v for k, v in data.items()
                             if k in ("primary", "secondary", "default")}}
                self.settings.languages = DisplayLanguageConfig.from_json(merged)
                sections.append("languages")
            if "webhook" in data:
                self.settings.webhook = data["webhook"] or None
                sections.append("webhook")
            if "name" in data:
                self.settings.name = data["name"]
                sections.append("name")
            if "acl" in data:
                grants = {user: Role.parse(name) for user, name in data["acl"].items()}
                self.settings.acl.replace_grants(actor, grants)
                sections.append("acl")
            self.save_settings()
            if sections:
                self.bus.publish("SettingsChanged", {"sections": sections})
            return self.settings.to_json()


def _assignment_diff(old: dict[Iri, set[str]], new: dict[Iri, set[str]]) -> list[dict]:
    diff = []
    for entity in sorted(old.keys() | new.keys()):
        before = old.get(entity, set())
        after = new.get(entity, set())
        if before != after:
            diff.append({"entity": entity,
                         "added": sorted(after - before),
                         "removed": sorted(before - after)})
    return diff


class Server:
    """All projects plus the server-level user registry."""

    def __init__(self, data_dir: Optional[Path] = None,
                 clock: Callable[[], datetime] = _utcnow,
                 poster: Optional[Callable[[str, dict], None]] = None,
                 event_retention: Optional[int] = None):
        self.data_dir = Path(data_dir) if data_dir else None
        self.clock = clock
        self.poster = poster
        self.event_retention = event_retention
        self._lock = threading.RLock()
        if self.data_dir is not None:
            self.data_dir.mkdir(parents=True, exist_ok=True)
        self.users = UserStore(self.data_dir / "users.json" if self.data_dir else None)
        self.projects: dict[str, Project] = {}
        if self.data_dir is not None:
            projects_dir = self.data_dir / "projects"
            if projects_dir.exists():
                for child in sorted(projects_dir.iterdir()):
                    if (child / "settings.json").exists():
                        self.projects[child.name] = Project.load(
                            child.name, child, clock=clock, poster=poster,
                            event_retention=event_retention)

    def _project_dir(self, project_id: str) -> Optional[Path]:
        if self.data_dir is None:
            return None
        return self.data_dir / "projects" / project_id

    def create_project(self, actor: str, project_id: str, name: str = "") -> Project:
        self.users.require_user(actor)
        if not project_id or not project_id.replace("-", "").replace("_", "").isalnum():
            raise InvalidQuery(f"bad project id: {project_id!r}")
        with self._lock:
            if project_id in self.projects:
                raise DuplicateProject(f"project {project_id!r} already exists")
            project = Project.create(project_id, name or project_id, actor,
                                     self._project_dir(project_id), clock=self.clock,
                                     poster=self.poster,
                                     event_retention=self.event_retention)
            self.projects[project_id] = project
            return project

    def project(self, project_id: str) -> Project:
        if project_id not in self.projects:
            raise UnknownProject(project_id)
        return self.projects[project_id]

    def projects_for(self, user: str) -> list[dict]:
        out = []
        for project_id in sorted(self.projects):
            project = self.projects[project_id]
            role = project.settings.acl.role_of(user)
            if role is not None:
                out.append({"id": project_id, "name": project.settings.name,
                            "role": role.label,
                            "revision": project.log.head_revision})
        return out

    def deliver_all_notifications(self) -> int:
        return sum(p.deliver_notifications() for p in self.projects.values())
