"""Exception types shared across the package.

Plain ValueError is used for domain errors (bad arguments, elements outside
the ground set, dependent sets where independent ones are required).
"""


class CapabilityError(RuntimeError):
    """Instance too large for an exact/brute-force code path."""


class InvariantViolation(RuntimeError):
    """An internal guarantee failed; indicates a bug, never user error."""


class VerificationError(RuntimeError):
    """A verification check (cmd_verify / property certification) failed."""
