"""Exception types shared across the package."""

from __future__ import annotations


class OcqError(Exception):
    """Base class for all errors raised by this package."""


class UnknownRef(OcqError, LookupError):
    """An event or object id (or code) is not present in the log."""


class ParseError(OcqError, ValueError):
    """Malformed input: OCEL JSON, query JSON, or a duration literal."""


class DanglingRef(OcqError, ValueError):
    """A relationship points at an object id that does not exist."""


class EventWithoutObjects(OcqError, ValueError):
    """Strict mode: an event carries no qualified object references."""


class UnboundVariableInPredicate(OcqError, ValueError):
    """A predicate references a variable that no step binds."""


class InvalidQuery(OcqError, ValueError):
    """A query tree failed structural validation.

    ``findings`` holds the individual problems as reported by
    :func:`ocq.model.validate_tree`.
    """

    def __init__(self, findings):
        self.findings = list(findings)
        super().__init__("; ".join(str(f) for f in self.findings) or "invalid query")


class ResultTooLarge(OcqError, RuntimeError):
    """Evaluation aborted: a node table exceeded the configured row cap."""


class TooLargeForOracle(OcqError, RuntimeError):
    """The brute-force evaluator refused an enumeration above its guard."""


class UnknownNode(OcqError, LookupError):
    """A node id is not part of the query tree or result."""
