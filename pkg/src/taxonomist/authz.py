"""Projects, users, and the four coarse-grained capability levels.

``Manage > Edit > Comment > View``; a grant implies every lower level.
Sessions are bearer tokens issued at login against locally stored salted
password hashes (PBKDF2); there is no external identity provider.
"""

from __future__ import annotations

import enum
import hashlib
import json
import secrets
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import (
    CannotDemoteOwner,
    DuplicateUser,
    LoginFailed,
    PermissionDenied,
    UnknownUser,
)

_PBKDF2_ITERATIONS = 50_000


class Role(enum.IntEnum):
    VIEW = 1
    COMMENT = 2
    EDIT = 3
    MANAGE = 4

    @classmethod
    def parse(cls, name: str) -> "Role":
        try:
            return cls[name.upper()]
        except KeyError:
            raise ValueError(f"unknown role: {name!r}") from None

    @property
    def label(self) -> str:
        return self.name.capitalize()


@dataclass
class ProjectAcl:
    owner: str
    grants: dict[str, Role] = field(default_factory=dict)

    def __post_init__(self):
        self.grants.setdefault(self.owner, Role.MANAGE)
        if self.grants[self.owner] != Role.MANAGE:
            raise CannotDemoteOwner("the owner always holds Manage")

    def role_of(self, user: str) -> Optional[Role]:
        return self.grants.get(user)

    def check(self, user: str, required: Role) -> bool:
        """True iff the user's granted level covers ``required``.

        Unknown users simply check false; no error.
        """
        granted = self.grants.get(user)
        return granted is not None and granted >= required

    def require(self, user: str, required: Role) -> None:
        if not self.check(user, required):
            raise PermissionDenied(user, required.label)

    def grant(self, actor: str, user: str, role: Role) -> None:
        self.require(actor, Role.MANAGE)
        if user == self.owner and role != Role.MANAGE:
            raise CannotDemoteOwner("the owner always holds Manage")
        self.grants[user] = role

    def revoke(self, actor: str, user: str) -> None:
        self.require(actor, Role.MANAGE)
        if user == self.owner:
            raise CannotDemoteOwner("the owner always holds Manage")
        self.grants.pop(user, None)

    def replace_grants(self, actor: str, grants: dict[str, Role]) -> None:
        """Wholesale ACL replacement (settings PUT); the owner's Manage is
        re-added if omitted, but an explicit demotion is an error."""
        self.require(actor, Role.MANAGE)
        if self.owner in grants and grants[self.owner] != Role.MANAGE:
            raise CannotDemoteOwner("the owner always holds Manage")
        self.grants = dict(grants)
        self.grants[self.owner] = Role.MANAGE

    def to_json(self) -> dict:
        return {"owner": self.owner,
                "acl": {user: role.label for user, role in sorted(self.grants.items())}}

    @classmethod
    def from_json(cls, data: dict) -> "ProjectAcl":
        return cls(owner=data["owner"],
                   grants={user: Role.parse(name)
                           for user, name in data.get("acl", {}).items()})


@dataclass(frozen=True)
class _StoredUser:
    salt: str
    digest: str


class UserStore:
    """Server-level user registry plus bearer-token sessions."""

    def __init__(self, path: Optional[Path] = None):
        self.path = Path(path) if path else None
        self._users: dict[str, _StoredUser] = {}
        self._tokens: dict[str, str] = {}
        self._lock = threading.RLock()
        if self.path is not None and self.path.exists():
            data = json.loads(self.path.read_text(encoding="utf-8"))
            self._users = {name: _StoredUser(u["salt"], u["digest"])
                           for name, u in data.items()}

    def _save(self) -> None:
        if self.path is None:
            return
        data = {name: {"salt": u.salt, "digest": u.digest}
                for name, u in sorted(self._users.items())}
        self.path.write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")

    @staticmethod
    def _digest(password: str, salt: str) -> str:
        return hashlib.pbkdf2_hmac(
            "sha256", password.encode(), bytes.fromhex(salt), _PBKDF2_ITERATIONS).hex()

    def register(self, username: str, password: str) -> None:
        if not username or not username.replace("-", "").replace("_", "").replace(".", "").isalnum():
            raise ValueError(f"bad username: {username!r}")
        with self._lock:
            if username in self._users:
                raise DuplicateUser(f"user {username!r} already exists")
            salt = secrets.token_hex(16)
            self._users[username] = _StoredUser(salt, self._digest(password, salt))
            self._save()

    def exists(self, username: str) -> bool:
        return username in self._users

    def require_user(self, username: str) -> None:
        if username not in self._users:
            raise UnknownUser(username)

    def login(self, username: str, password: str) -> str:
        """Verify credentials and issue a bearer token."""
        with self._lock:
            stored = self._users.get(username)
            if stored is None or not secrets.compare_digest(
                    stored.digest, self._digest(password, stored.salt)):
                raise LoginFailed("bad username or password")
            token = secrets.token_urlsafe(32)
            self._tokens[token] = username
            return token

    def resolve(self, token: str) -> Optional[str]:
        return self._tokens.get(token)

    def logout(self, token: str) -> None:
        with self._lock:
            self._tokens.pop(token, None)

    def usernames(self) -> list[str]:
        return sorted(self._users)
