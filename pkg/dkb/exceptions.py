# encoding: utf-8

from __future__ import absolute_import, division, print_function, unicode_literals


class DkbError(Exception):
    """A generic exception for all others to extend."""
    pass


class ParseError(DkbError):
    """Raised when a document, query or path cannot be read."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super(ParseError, self).__init__('\n'.join(d.format() for d in self.diagnostics))


class UnsafeQuery(DkbError):
    """Raised when a variable is constrained only by (in)equalities."""
    pass


class FreshConstantViolation(DkbError):
    """Raised when a fresh-variable value already occurs in the source state."""
    pass


class InconsistentInitialState(DkbError):
    """Raised when exploration or replay starts from an inconsistent ABox."""
    pass


class PreconditionViolation(DkbError):
    pass


class UnknownAction(DkbError):
    pass


class PathError(DkbError):
    """Raised when a label sequence cannot be run in the partial system."""
    pass


class InvariantViolation(DkbError):
    """Raised when an internal guarantee does not hold."""
    pass


class UnreadableInput(DkbError):
    """Raised when an input file cannot be opened or decoded."""
    pass
