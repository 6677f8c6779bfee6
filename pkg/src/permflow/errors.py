"""Exception types shared across the package."""


class PermflowError(Exception):
    """Base class for all package errors."""


class InputError(PermflowError, ValueError):
    """Malformed input: bad shape, non-finite entries, unparsable files."""


class DimensionError(InputError):
    """A vector or matrix has the wrong length for the state it is fed to."""


class DomainError(InputError):
    """Argument outside the mathematical domain of the operation."""


class InvalidSpecError(InputError):
    """A process specification is inconsistent or unsupported."""


class NoClosedFormError(PermflowError, ValueError):
    """The requested integral is not finite or has no available formula."""


class CapExceededError(PermflowError, RuntimeError):
    """An enumeration would exceed a configured size cap.

    ``cap`` names the configuration field that was hit, ``limit`` is its
    value and ``required`` is what the call would have needed.
    """

    def __init__(self, cap, limit, required, hint=""):
        self.cap = cap
        self.limit = limit
        self.required = required
        msg = f"{cap} exceeded: need {required}, limit is {limit}"
        if hint:
            msg += f" ({hint})"
        super().__init__(msg)
