"""Exception types shared across the package."""


class PpgofError(Exception):
    """Base class for all package-specific errors."""


class DomainError(PpgofError, ValueError):
    """Parameter vector outside the family's admissible region."""


class UnsupportedFamilyError(PpgofError, ValueError):
    """Operation not defined for the requested family."""


class RangeError(PpgofError, ValueError):
    """Time argument outside the observation window."""


class CoverageError(PpgofError, ValueError):
    """Piecewise hazard does not cover the requested horizon."""


class IdentifiabilityError(PpgofError, RuntimeError):
    """Estimation problem has no usable solution (no bracket, singular information)."""


class SupportError(PpgofError, ValueError):
    """Fitted model assigns no mass where the target does."""


class UnitNormError(PpgofError, ValueError):
    """Reflection endpoints are not unit vectors in the working inner product."""


class TableMismatchError(PpgofError, ValueError):
    """Null table incompatible with the tested model (wrong dimension)."""


class TableFormatError(PpgofError, ValueError):
    """Null table file is corrupt, truncated, or has the wrong schema version."""
