"""Notification outbox with webhook delivery.

Actual email/chat delivery is out of scope: notification payloads are
persisted to an outbox and, when a webhook endpoint is configured, POSTed
with exponential backoff until acknowledged (at-least-once; a delivery may
repeat after a crash between the POST and the ack record).
"""

from __future__ import annotations

import json
import logging
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

logger = logging.getLogger(__name__)

#: seconds before retry attempt n (capped at the last entry)
BACKOFF = (0.5, 1.0, 2.0, 4.0, 8.0, 16.0)


def email_body(payload: dict) -> str:
    """Plain-text email-style rendering of a notification payload."""
    lines = [
        f"Subject: [{payload['project']}] {payload['kind']}: {payload['entityLabel']}",
        "",
        f"{payload['author']} on {payload['entityLabel']} (thread {payload['threadId']}):",
        "",
        payload["bodyPreview"],
        "",
        f"Open in the editor: {payload['deepLink']}",
    ]
    return "\n".join(lines)


def chat_body(payload: dict) -> dict:
    """Chat-webhook-style rendering (single text field)."""
    return {"text": f"*{payload['author']}* on <{payload['deepLink']}|"
                    f"{payload['entityLabel']}>: {payload['bodyPreview']}"}


@dataclass
class OutboxEntry:
    id: int
    payload: dict
    attempts: int = 0
    delivered: bool = False
    not_before: float = 0.0


@dataclass
class Outbox:
    """Persistent queue of notification events for one project.

    ``poster`` is called as ``poster(url, body)`` and must raise on
    failure; the default uses ``httpx``. Tests inject a recording poster.
    """

    path: Optional[Path] = None
    poster: Optional[Callable[[str, dict], None]] = None
    entries: list[OutboxEntry] = field(default_factory=list)
    _lock: threading.RLock = field(default_factory=threading.RLock)
    _next_id: int = 1

    def __post_init__(self):
        if self.path is not None:
            self.path = Path(self.path)
            if self.path.exists():
                self._load()

    def _load(self) -> None:
        acked: set[int] = set()
        loaded: list[OutboxEntry] = []
        for line in self.path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            record = json.loads(line)
            if "ack" in record:
                acked.add(record["ack"])
            else:
                loaded.append(OutboxEntry(record["id"], record["event"]))
        for entry in loaded:
            entry.delivered = entry.id in acked
        self.entries = loaded
        self._next_id = max((e.id for e in loaded), default=0) + 1

    def _append(self, record: dict) -> None:
        if self.path is None:
            return
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")

    def add(self, payload: dict) -> OutboxEntry:
        with self._lock:
            entry = OutboxEntry(self._next_id, payload)
            self._next_id += 1
            self.entries.append(entry)
            self._append({"id": entry.id, "event": payload})
            return entry

    def pending(self) -> list[OutboxEntry]:
        with self._lock:
            return [e for e in self.entries if not e.delivered]

    def deliver_pending(self, url: Optional[str], now: Optional[float] = None) -> int:
        """Try every due pending entry once; returns the number delivered.

        Without a webhook URL the outbox just accumulates (payloads stay
        inspectable); nothing is dropped.
        """
        if not url:
            return 0
        poster = self.poster or _default_poster
        clock = time.monotonic if now is None else (lambda: now)
        delivered = 0
        for entry in self.pending():
            if entry.not_before > clock():
                continue
            body = entry.payload.get("webhook", entry.payload)
            try:
                poster(url, body)
            except Exception as err:  # noqa: BLE001 - any transport failure retries
                entry.attempts += 1
                delay = BACKOFF[min(entry.attempts - 1, len(BACKOFF) - 1)]
                entry.not_before = clock() + delay
                logger.warning("webhook delivery %s failed (attempt %d): %s",
                               entry.id, entry.attempts, err)
                continue
            with self._lock:
                entry.delivered = True
                self._append({"ack": entry.id})
            delivered += 1
        return delivered


def _default_poster(url: str, body: dict) -> None:
    import httpx

    response = httpx.post(url, json=body, timeout=10.0)
    response.raise_for_status()


class OutboxWorker(threading.Thread):
    """Background delivery loop used by the long-running server."""

    def __init__(self, outbox: Outbox, url_of: Callable[[], Optional[str]],
                 interval: float = 1.0):
        super().__init__(daemon=True)
        self.outbox = outbox
        self.url_of = url_of
        self.interval = interval
        self.stop_event = threading.Event()

    def run(self) -> None:
        while not self.stop_event.wait(self.interval):
            try:
                self.outbox.deliver_pending(self.url_of())
            except Exception:  # noqa: BLE001
                logger.exception("outbox delivery loop error")

    def stop(self) -> None:
        self.stop_event.set()
