"""Exception classes shared across the package."""


class BecProbeError(Exception):
    """Base class for all errors raised by this package."""


class CutoffTooSmall(BecProbeError):
    """Requested state carries too much probability mass above the Fock cutoff."""


class BadDims(BecProbeError):
    """Operand has subsystem dimensions incompatible with the operation."""


class DimMismatch(BecProbeError):
    """Two operands that must share dimensions do not."""


class NegativeRate(BecProbeError):
    """A dissipation rate was negative."""


class NonPositiveInput(BecProbeError):
    """A physical quantity that must be positive was not."""


class NonPositiveVolume(NonPositiveInput):
    """Trap volume must be positive."""


class OnResonance(BecProbeError):
    """Magnetic field too close to the Feshbach resonance pole."""


class ZeroChi(BecProbeError):
    """Qubit-oscillator coupling chi must be nonzero (and positive where required)."""


class StepTooLarge(BecProbeError):
    """Fixed-step integration lost trace beyond tolerance; reduce dt."""


class NonUniformGrid(BecProbeError):
    """Fringe extraction needs a uniform phase grid with at least 8 points."""


class ConfigError(BecProbeError):
    """Run configuration failed to parse."""


class ValidationError(BecProbeError):
    """Run configuration parsed but failed validation."""
