"""Exception hierarchy for the zeta-derivative laboratory.

Every failure mode that a caller can recover from (retry with more
precision, perturb a rectangle, rescan a gap) gets its own class; anything
else is a plain bug and raises builtins.
"""


class ZdlError(Exception):
    """Base class for all laboratory errors."""


class ConfigError(ZdlError):
    """Malformed configuration file or inconsistent option values."""


class PoleProximity(ZdlError):
    """Evaluation point too close to the pole at s = 1 for a certified result."""


class PrecisionExhausted(ZdlError):
    """Certified error radius cannot reach the target within resource caps."""


class GammaPole(ZdlError):
    """Completed-factor evaluation requested at a pole of Gamma(s/2)."""


class DenominatorZero(ZdlError):
    """Certified disk of a quotient's denominator contains zero."""


class ZeroOnPath(ZdlError):
    """Argument tracking hit a point where the function vanishes to working accuracy."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class FarPointNotDominated(ZdlError):
    """Far-field anchor point fails |f - 1| < 1/2, so its argument branch is ambiguous."""


class SubdivisionLimit(ZdlError):
    """Rectangle subdivision reached the minimum cell size without isolating zeros."""


class StoreError(ZdlError):
    """Base class for persistent-store failures."""


class OverlapConflict(StoreError):
    """New segment overlaps an existing one with different records."""


class CorruptSegment(StoreError):
    """Stored segment fails its checksum or cannot be parsed (not at end of file)."""


class GapsPresent(StoreError):
    """Requested range is not fully covered by stored segments."""
