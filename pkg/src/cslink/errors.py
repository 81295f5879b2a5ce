"""Exception hierarchy shared across the package."""


class CslinkError(Exception):
    """Base class for all cslink errors."""


class InputError(CslinkError, ValueError):
    """Malformed or out-of-contract input (bad JSON, bad dimensions, bad parameters)."""


class QuantizationError(InputError):
    """A coupling or charge violates its integrality requirement."""


class SingularityError(CslinkError):
    """Kernel evaluated at (nearly) coincident points; the cycles touch or intersect."""


class DegenerateCrossingError(CslinkError):
    """Intersection counting hit a tangential or boundary-grazing crossing."""


class FramingInstabilityError(CslinkError):
    """Push-off self-linking changed when the offset was halved; epsilon too large."""
