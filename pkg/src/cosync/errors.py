"""Error taxonomy shared across the package.

Four user-facing failure categories map onto the CLI exit codes:

* bad operation inputs (``InvalidInputError``) and malformed configuration
  (``ConfigError``) -> exit code 1
* broken runtime invariants (``InvariantError``, ``LockstepError``) -> exit
  code 2, because they indicate a bug in the simulator rather than in the
  caller's input.
"""


class CosyncError(Exception):
    """Base class for all package errors."""


class InvalidInputError(CosyncError, ValueError):
    """An operation received an argument outside its documented domain."""


class InvariantError(CosyncError, RuntimeError):
    """An internal consistency check failed (simulator bug, not user error)."""


class LockstepError(InvariantError):
    """The physics clock and the network clock stopped agreeing."""


class ConfigError(CosyncError):
    """A scenario or profile file could not be parsed or validated.

    Carries enough context to point the user at the first offending line.
    """

    def __init__(self, message, *, source=None, line=None, field=None):
        self.source = source
        self.line = line
        self.field = field
        prefix = ""
        if source is not None:
            prefix = source if line is None else "%s:%d" % (source, line)
        elif line is not None:
            prefix = "line %d" % line
        if field is not None:
            message = "field %r: %s" % (field, message)
        super().__init__("%s: %s" % (prefix, message) if prefix else message)


class RoutingError(CosyncError):
    """No valid route exists between the requested endpoints."""
