"""Exception hierarchy for Holonomy Lab."""


class HolonomyError(Exception):
    """Base class for every error raised by the library."""


class DimensionError(HolonomyError, ValueError):
    """Matrix shapes do not fit the requested operation."""


class ChartError(HolonomyError, ValueError):
    """A point or loop lives on the wrong chart."""


class ParameterError(HolonomyError, ValueError):
    """A scalar argument is outside its admissible range."""


class RangeError(ParameterError):
    """A requested area cannot be reached within the control bounds."""


class LoopError(HolonomyError, ValueError):
    """A loop is not closed or its segments do not join."""


class CompositionError(LoopError):
    """Two loops cannot be composed."""


class ShapeError(LoopError):
    """An operation needs a loop of a particular shape."""


class AbelianizationError(HolonomyError):
    """Connection components do not commute on the enclosed surface."""


class UnsupportedError(HolonomyError, NotImplementedError):
    """The chart carries no data for the requested operation."""


class InputError(HolonomyError, ValueError):
    """User-supplied gate or target is malformed."""


class SynthesisError(HolonomyError):
    """A loop program misses its target beyond the requested tolerance."""


class LeakageWarning(UserWarning):
    """Population reached the top of a truncated Fock space."""
