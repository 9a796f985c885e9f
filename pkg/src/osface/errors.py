"""Exception hierarchy shared by all numerical modules."""


class OSFaceError(Exception):
    """Base class for errors raised by :mod:`osface`."""


class DomainError(OSFaceError, ValueError):
    """An argument is outside the domain of the operation (NaN, inf, bad nome)."""


class DegenerateSampleError(OSFaceError):
    """A sample makes a relative residual meaningless; the caller should resample."""


class PoleError(OSFaceError):
    """A theta factor in a denominator is below the guard.

    ``factor`` names the offending theta factor, e.g. ``"[h]"``.
    """

    def __init__(self, factor, modulus=None):
        self.factor = factor
        self.modulus = modulus
        msg = f"theta factor {factor} in a denominator vanishes"
        if modulus is not None:
            msg += f" (|value| = {modulus:.3e})"
        super().__init__(msg)


class CapacityError(OSFaceError):
    """Input is too large for an exhaustive algorithm."""


class ConfigError(OSFaceError):
    """Suite configuration could not be parsed or is invalid."""
