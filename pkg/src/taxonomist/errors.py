"""Exception types shared across the package.

Every error carries enough structure for the HTTP layer to map it to a
status code and a useful message without string matching.
"""

from __future__ import annotations


class TaxonomistError(Exception):
    """Base class for all domain errors."""


# --- core model ---------------------------------------------------------


class InvalidIri(TaxonomistError):
    pass


class InvalidLanguageTag(TaxonomistError):
    pass


class InvalidAnnotationValue(TaxonomistError):
    pass


class UnknownEntity(TaxonomistError):
    def __init__(self, iri: str):
        self.iri = iri
        super().__init__(f"unknown entity: {iri}")


class ChangeError(TaxonomistError):
    """An atomic change cannot be applied to the current taxonomy."""


class RemoveMissingAxiom(ChangeError):
    pass


class AddDuplicateAxiom(ChangeError):
    pass


class WouldCreateCycle(ChangeError):
    def __init__(self, entity: str, message: str | None = None):
        self.entity = entity
        super().__init__(message or f"edge would create a cycle through {entity}")


class WouldCreateSecondParent(ChangeError):
    def __init__(self, entity: str):
        self.entity = entity
        super().__init__(f"{entity} already has a parent (tree mode)")


class UndeclaredReference(ChangeError):
    def __init__(self, iri: str):
        self.iri = iri
        super().__init__(f"reference to undeclared class: {iri}")


class RemoveDeclarationInUse(ChangeError):
    def __init__(self, iri: str):
        self.iri = iri
        super().__init__(f"cannot remove declaration of {iri}: still referenced")


# --- owl-io -------------------------------------------------------------


class OfnParseError(TaxonomistError):
    def __init__(self, line: int, col: int, expected: str, found: str = ""):
        self.line = line
        self.col = col
        self.expected = expected
        self.found = found
        detail = f"line {line}, col {col}: expected {expected}"
        if found:
            detail += f", found {found!r}"
        super().__init__(detail)


class UnsupportedConstruct(TaxonomistError):
    def __init__(self, construct: str, line: int, col: int):
        self.construct = construct
        self.line = line
        self.col = col
        super().__init__(f"unsupported construct {construct!r} at line {line}, col {col}")


class UndeclaredPrefix(TaxonomistError):
    def __init__(self, prefix: str, line: int, col: int):
        self.prefix = prefix
        self.line = line
        self.col = col
        super().__init__(f"undeclared prefix {prefix!r} at line {line}, col {col}")


class EmptySheet(TaxonomistError):
    pass


class InvalidRow(TaxonomistError):
    def __init__(self, index: int, message: str = ""):
        self.index = index
        super().__init__(f"invalid seed row {index}: {message}")


# --- change log ---------------------------------------------------------


class ValidationFailed(TaxonomistError):
    """A commit was rejected; the head taxonomy is unchanged."""

    def __init__(self, change, reason: Exception):
        self.change = change
        self.reason = reason
        super().__init__(f"change {change} rejected: {reason}")


class EmptyChangeSet(TaxonomistError):
    pass


class UnknownRevision(TaxonomistError):
    def __init__(self, number: int):
        self.number = number
        super().__init__(f"unknown revision {number}")


class InverseNotApplicable(TaxonomistError):
    def __init__(self, axiom, reason: Exception | None = None):
        self.axiom = axiom
        self.reason = reason
        super().__init__(f"revert conflicts with a later change on {axiom}")


# --- refactor ops -------------------------------------------------------


class TargetInSources(TaxonomistError):
    pass


class SourceIsAncestorOfTarget(TaxonomistError):
    def __init__(self, source: str):
        self.source = source
        super().__init__(f"source {source} is an ancestor of the merge target")


class RootCannotMove(TaxonomistError):
    pass


class InvalidPattern(TaxonomistError):
    pass


# --- tags ---------------------------------------------------------------


class UnknownTag(TaxonomistError):
    def __init__(self, tag: str):
        self.tag = tag
        super().__init__(f"unknown tag: {tag}")


class DuplicateTagLabel(TaxonomistError):
    pass


class AlreadyAssigned(TaxonomistError):
    pass


class NotAssigned(TaxonomistError):
    pass


class InvalidCriteria(TaxonomistError):
    pass


# --- multilang ----------------------------------------------------------


class EmptyLabel(TaxonomistError):
    pass


# --- authz / sessions ---------------------------------------------------


class PermissionDenied(TaxonomistError):
    def __init__(self, user: str, required: str):
        self.user = user
        self.required = required
        super().__init__(f"user {user!r} lacks {required} capability")


class CannotDemoteOwner(TaxonomistError):
    pass


class LoginFailed(TaxonomistError):
    pass


class UnknownUser(TaxonomistError):
    def __init__(self, user: str):
        self.user = user
        super().__init__(f"unknown user: {user}")


class DuplicateUser(TaxonomistError):
    pass


# --- discussions --------------------------------------------------------


class UnknownThread(TaxonomistError):
    def __init__(self, thread_id: str):
        self.thread_id = thread_id
        super().__init__(f"unknown thread: {thread_id}")


class EmptyBody(TaxonomistError):
    pass


# --- api service --------------------------------------------------------


class InvalidQuery(TaxonomistError):
    pass


class SeqTooOld(TaxonomistError):
    def __init__(self, requested: int, oldest: int):
        self.requested = requested
        self.oldest = oldest
        super().__init__(f"events before seq {oldest} were compacted (requested {requested})")


class UnknownProject(TaxonomistError):
    def __init__(self, project_id: str):
        self.project_id = project_id
        super().__init__(f"unknown project: {project_id}")


class DuplicateProject(TaxonomistError):
    pass


# --- export -------------------------------------------------------------


class InvalidTree(TaxonomistError):
    def __init__(self, violations):
        self.violations = violations
        super().__init__(f"taxonomy is not a valid tree ({len(violations)} violations)")
