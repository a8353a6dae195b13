"""HTTP facade: JSON API, OFN/export downloads, and the SSE event stream.

Every mutating endpoint maps 1:1 to a project operation and the project
enforces the capability requirement before touching state. The event
stream is server-sent events with ``Last-Event-ID`` resume (equivalently
``?from=seq``); subscribers receive every event with a higher sequence
number, in order, with no gaps.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

from fastapi import Depends, FastAPI, Query, Request, Response
from fastapi.responses import (
    FileResponse,
    JSONResponse,
    PlainTextResponse,
    StreamingResponse,
)
from pydantic import BaseModel, Field

from . import __version__
from .authz import Role
from .changelog import Provenance, Revision, change_from_json, revision_to_json
from .errors import (
    AlreadyAssigned,
    DuplicateProject,
    DuplicateTagLabel,
    DuplicateUser,
    InvalidQuery,
    InverseNotApplicable,
    LoginFailed,
    NotAssigned,
    PermissionDenied,
    SeqTooOld,
    TaxonomistError,
    UnknownEntity,
    UnknownProject,
    UnknownRevision,
    UnknownTag,
    UnknownThread,
    UnknownUser,
    ValidationFailed,
)
from .export import interests_csv, row_counts, zip_bundle
from .lint import findings_csv
from .project import Project, Server
from .refactor import AnnotationAction, AnnotationSelection
from .tags import TagRule, criteria_from_json

_CONFLICTS = (ValidationFailed, InverseNotApplicable, AlreadyAssigned, NotAssigned,
              DuplicateProject, DuplicateTagLabel, DuplicateUser)
_NOT_FOUND = (UnknownEntity, UnknownProject, UnknownRevision, UnknownTag,
              UnknownThread, UnknownUser)


def _status_for(err: TaxonomistError) -> int:
    if isinstance(err, PermissionDenied):
        return 403
    if isinstance(err, _NOT_FOUND):
        return 404
    if isinstance(err, LoginFailed):
        return 401
    if isinstance(err, SeqTooOld):
        return 410
    if isinstance(err, _CONFLICTS):
        return 409
    return 400


class Credentials(BaseModel):
    username: str
    password: str


class CommitBody(BaseModel):
    changes: list[dict]
    message: str = ""
    provenance: str = "manual"


class MergeBody(BaseModel):
    sources: list[str]
    target: str
    message: str = ""


class MoveBody(BaseModel):
    entities: list[str]
    newParent: str
    message: str = ""


class BulkAnnotateBody(BaseModel):
    selection: dict
    action: dict
    message: str = ""


class RevertBody(BaseModel):
    message: Optional[str] = None


class ProjectBody(BaseModel):
    id: str
    name: str = ""


class TagBody(BaseModel):
    label: str
    color: str = "#808080"
    description: Optional[str] = None


class EntityRef(BaseModel):
    entity: str


class ThreadBody(BaseModel):
    entity: Optional[str] = None
    body: str
    thread: Optional[str] = None


class StatusBody(BaseModel):
    status: str = Field(pattern="^(open|resolved)$")


def _thread_json(thread) -> dict:
    return thread.to_json()


def _revision_response(revision: Optional[Revision]) -> dict:
    if revision is None:
        return {"revision": None, "applied": 0}
    return {"revision": revision_to_json(revision), "applied": len(revision.changes)}


def create_app(server: Server, static_dir: Optional[Path] = None,
               sse_idle: float = 0.25) -> FastAPI:
    app = FastAPI(title="taxonomist", version=__version__)
    index_html = Path(static_dir) / "index.html" if static_dir else None

    @app.exception_handler(TaxonomistError)
    async def _domain_error(_request: Request, err: TaxonomistError):
        return JSONResponse(status_code=_status_for(err),
                            content={"error": type(err).__name__, "detail": str(err)})

    def current_user(request: Request) -> str:
        header = request.headers.get("authorization", "")
        token = header[7:] if header.lower().startswith("bearer ") else None
        if token is None:
            token = request.query_params.get("token")
        user = server.users.resolve(token) if token else None
        if user is None:
            raise LoginFailed("missing or invalid bearer token")
        return user

    # --- accounts and projects -------------------------------------------

    @app.post("/users", status_code=201)
    def register(body: Credentials):
        server.users.register(body.username, body.password)
        return {"username": body.username}

    @app.post("/login")
    def login(body: Credentials):
        token = server.users.login(body.username, body.password)
        return {"token": token, "username": body.username}

    @app.get("/projects")
    def list_projects(user: str = Depends(current_user)):
        return {"projects": server.projects_for(user)}

    @app.post("/projects", status_code=201)
    def create_project(body: ProjectBody, user: str = Depends(current_user)):
        project = server.create_project(user, body.id, body.name)
        return {"id": project.id, "name": project.settings.name, "role": "Manage"}

    def project_of(project_id: str) -> Project:
        return server.project(project_id)

    # --- taxonomy reads -----------------------------------------------------

    @app.get("/p/{project_id}/taxonomy")
    def taxonomy(project_id: str, user: str = Depends(current_user)):
        text = project_of(project_id).taxonomy_ofn(user)
        return PlainTextResponse(text, media_type="text/plain; charset=utf-8")

    @app.get("/p/{project_id}/e/{iri:path}")
    def entity(project_id: str, iri: str, request: Request,
               includeDeprecated: bool = False):
        # a pasted deep link opens the app; API clients get JSON
        accepts = request.headers.get("accept", "")
        if index_html is not None and index_html.exists() and "text/html" in accepts:
            return FileResponse(index_html)
        actor = current_user(request)
        return project_of(project_id).entity_view(
            actor, iri, include_deprecated_children=includeDeprecated)

    @app.get("/p/{project_id}/search")
    def search(project_id: str, q: str = "", fields: Optional[str] = None,
               tag: Optional[str] = None, includeDeprecated: bool = False,
               limit: int = 50, user: str = Depends(current_user)):
        chosen = [f for f in (fields.split(",") if fields else []) if f]
        results = project_of(project_id).search(
            user, q, chosen or None, tag, includeDeprecated, limit)
        return {"results": results}

    @app.get("/p/{project_id}/history")
    def history(project_id: str, entity: Optional[str] = None,
                limit: Optional[int] = Query(default=None, ge=1),
                offset: int = Query(default=0, ge=0),
                user: str = Depends(current_user)):
        revisions = project_of(project_id).history(user, entity, limit, offset)
        return {"revisions": [revision_to_json(r) for r in revisions]}

    @app.get("/p/{project_id}/lint")
    def lint(project_id: str, format: str = "json", includeDeprecated: bool = False,
             user: str = Depends(current_user)):
        findings = project_of(project_id).lint(user, include_deprecated=includeDeprecated)
        if format == "csv":
            return PlainTextResponse(findings_csv(findings),
                                     media_type="text/csv; charset=utf-8")
        return {"findings": [
            {"rule": f.rule, "entity": f.entity, "severity": f.severity,
             "message": f.message,
             **({"related": f.related} if f.related else {})}
            for f in findings]}

    @app.get("/p/{project_id}/stats")
    def stats(project_id: str, user: str = Depends(current_user)):
        return project_of(project_id).stats(user).to_json()

    @app.get("/p/{project_id}/export")
    def export(project_id: str, noAds: bool = False, deprecated: bool = False,
               rev: Optional[int] = None, format: str = "zip",
               user: str = Depends(current_user)):
        bundle = project_of(project_id).export(
            user, include_no_ads=noAds, include_deprecated=deprecated, rev=rev)
        if format == "manifest":
            return bundle.manifest
        if format == "interests":
            return PlainTextResponse(interests_csv(bundle),
                                     media_type="text/csv; charset=utf-8")
        payload = zip_bundle(bundle)
        return Response(payload, media_type="application/zip", headers={
            "Content-Disposition":
                f'attachment; filename="{project_id}-export.zip"',
            "X-Row-Counts": json.dumps(row_counts(bundle)),
        })

    # --- mutations -----------------------------------------------------------

    @app.post("/p/{project_id}/commit")
    def commit(project_id: str, body: CommitBody, user: str = Depends(current_user)):
        if body.provenance not in ("manual", "seedImport"):
            raise ValidationFailed(body.provenance,
                                   ValueError("provenance must be manual or seedImport"))
        try:
            changes = [change_from_json(c) for c in body.changes]
        except (KeyError, ValueError, TypeError) as err:
            raise InvalidQuery(f"bad change payload: {err}") from err
        revision = project_of(project_id).commit(
            user, changes, body.message, Provenance(body.provenance))
        return _revision_response(revision)

    @app.post("/p/{project_id}/merge")
    def merge(project_id: str, body: MergeBody, user: str = Depends(current_user)):
        revision = project_of(project_id).merge(
            user, set(body.sources), body.target, body.message)
        return _revision_response(revision)

    @app.post("/p/{project_id}/move")
    def move(project_id: str, body: MoveBody, user: str = Depends(current_user)):
        revision = project_of(project_id).move(
            user, set(body.entities), body.newParent, body.message)
        return _revision_response(revision)

    @app.post("/p/{project_id}/bulk-annotate")
    def bulk_annotate(project_id: str, body: BulkAnnotateBody,
                      user: str = Depends(current_user)):
        selection = AnnotationSelection(
            property=body.selection.get("property"),
            value_pattern=body.selection.get("pattern"),
            lang=body.selection.get("lang"),
            scope=body.selection.get("scope"))
        action = AnnotationAction(body.action["kind"], body.action.get("arg"))
        revision = project_of(project_id).bulk_annotate(
            user, selection, action, body.message)
        return _revision_response(revision)

    @app.post("/p/{project_id}/revert/{rev}")
    def revert(project_id: str, rev: int, body: Optional[RevertBody] = None,
               user: str = Depends(current_user)):
        message = body.message if body else None
        revision = project_of(project_id).revert(user, rev, message)
        return _revision_response(revision)

    # --- tags -------------------------------------------------------------

    @app.get("/p/{project_id}/tags")
    def tags(project_id: str, user: str = Depends(current_user)):
        project = project_of(project_id)
        project.require(user, Role.VIEW)
        return {"tags": [
            {"id": t.id, "label": t.label, "color": t.color,
             "description": t.description}
            for t in sorted(project.tagstore.tags.values(), key=lambda t: t.id)]}

    @app.post("/p/{project_id}/tags", status_code=201)
    def define_tag(project_id: str, body: TagBody, user: str = Depends(current_user)):
        tag = project_of(project_id).define_tag(user, body.label, body.color,
                                                body.description)
        return {"id": tag.id, "label": tag.label, "color": tag.color,
                "description": tag.description}

    @app.post("/p/{project_id}/tags/{tag_id}/assign")
    def assign_tag(project_id: str, tag_id: str, body: EntityRef,
                   user: str = Depends(current_user)):
        project_of(project_id).assign_tag(user, body.entity, tag_id)
        return {"ok": True}

    @app.post("/p/{project_id}/tags/{tag_id}/unassign")
    def unassign_tag(project_id: str, tag_id: str, body: EntityRef,
                     user: str = Depends(current_user)):
        project_of(project_id).unassign_tag(user, body.entity, tag_id)
        return {"ok": True}

    @app.get("/p/{project_id}/tagged/{tag_id}")
    def tagged(project_id: str, tag_id: str, user: str = Depends(current_user)):
        project = project_of(project_id)
        entities = project.tagged_entities(user, tag_id)
        return {"entities": [
            {"iri": iri, "displayName": project.display_name(iri)}
            for iri in entities]}

    @app.get("/p/{project_id}/tag-rules")
    def tag_rules(project_id: str, user: str = Depends(current_user)):
        text = project_of(project_id).export_rules(user)
        return json.loads(text)

    @app.post("/p/{project_id}/tag-rules")
    def set_tag_rules(project_id: str, request_body: list[dict] | dict,
                      user: str = Depends(current_user)):
        project = project_of(project_id)
        if isinstance(request_body, dict):
            rule = TagRule(request_body["tag"],
                           criteria_from_json(request_body["criteria"]),
                           request_body.get("enabled", True))
            project.set_rule(user, rule)
            return {"imported": 1}
        count = project.import_rules(user, json.dumps(request_body))
        return {"imported": count}

    # --- discussions ----------------------------------------------------------

    @app.post("/p/{project_id}/threads", status_code=201)
    def post_comment(project_id: str, body: ThreadBody,
                     user: str = Depends(current_user)):
        thread, payload = project_of(project_id).post_comment(
            user, body.entity, body.body, body.thread)
        return {"thread": _thread_json(thread), "notification": payload}

    @app.put("/p/{project_id}/threads/{thread_id}/status")
    def set_status(project_id: str, thread_id: str, body: StatusBody,
                   user: str = Depends(current_user)):
        thread = project_of(project_id).set_thread_status(user, thread_id, body.status)
        return {"thread": _thread_json(thread)}

    @app.get("/p/{project_id}/comments")
    def comments(project_id: str, sort: str = "byCreated",
                 user: str = Depends(current_user)):
        threads = project_of(project_id).list_threads(user, sort)
        return {"threads": [_thread_json(t) for t in threads]}

    # --- settings ---------------------------------------------------------------

    @app.get("/p/{project_id}/settings")
    def get_settings(project_id: str, user: str = Depends(current_user)):
        project = project_of(project_id)
        project.require(user, Role.VIEW)
        return project.settings.to_json()

    @app.put("/p/{project_id}/settings")
    def put_settings(project_id: str, body: dict, user: str = Depends(current_user)):
        return project_of(project_id).update_settings(user, body)

    @app.get("/p/{project_id}/members")
    def members(project_id: str, user: str = Depends(current_user)):
        project = project_of(project_id)
        project.require(user, Role.VIEW)
        return {"members": sorted(project.settings.acl.grants)}

    # --- events (SSE) -------------------------------------------------------------

    @app.get("/p/{project_id}/events")
    def events(project_id: str, request: Request, from_seq: int = Query(default=0, alias="from"),
               user: str = Depends(current_user)):
        project = project_of(project_id)
        project.require(user, Role.VIEW)
        last_id = request.headers.get("last-event-id")
        start = from_seq
        if last_id:
            try:
                start = max(start, int(last_id))
            except ValueError:
                pass
        # surface SeqTooOld as an HTTP error before streaming starts
        project.bus.events_since(start)

        def stream():
            for envelope in project.bus.subscribe(start, idle=sse_idle, heartbeat=True):
                if envelope is None:
                    yield ": hb\n\n"
                    continue
                data = json.dumps(envelope.to_json(), ensure_ascii=False)
                yield f"id: {envelope.seq}\nevent: {envelope.kind}\ndata: {data}\n\n"

        return StreamingResponse(stream(), media_type="text/event-stream", headers={
            "Cache-Control": "no-cache",
            "X-Accel-Buffering": "no",
        })

    # --- static frontend -----------------------------------------------------------

    if static_dir is not None and Path(static_dir).exists():
        from fastapi.staticfiles import StaticFiles

        @app.get("/")
        def index():
            return FileResponse(index_html)

        app.mount("/ui", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
