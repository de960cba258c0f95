class GraphFormatError(ValueError):
    """Malformed graph6 / JSON input."""


class OrbitTruncatedError(RuntimeError):
    """Orbit enumeration hit its member limit before closure."""


class SizeCapError(ValueError):
    """Instance is larger than a configured method cap."""


class VerificationError(AssertionError):
    """An internal consistency check failed; indicates a bug, never bad input."""
