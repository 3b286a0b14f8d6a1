"""Exception hierarchy. Every error raised on purpose by the library derives from MosaicError."""


class MosaicError(Exception):
    """Base class."""


class SingularMetric(MosaicError):
    """det g is at or below the singularity tolerance."""


class DomainError(MosaicError):
    """Evaluation point outside the chart domain."""


class JetUnavailable(MosaicError):
    """A chart cannot provide the derivative order requested."""


class RankCap(MosaicError):
    """Tensor rank above the supported maximum."""


class IndexOutOfRange(MosaicError):
    """Shuffle raise/lower index outside its admissible range."""


class RankMismatch(MosaicError):
    """Operands of incompatible rank."""


class EventMismatch(MosaicError):
    """A chart transition does not map to the same spacetime events."""


class MissingJet(MosaicError):
    """A field jet lacks partial derivatives needed by an operator."""


class UnknownKind(MosaicError):
    """Unrecognised derivative kind."""


class UnsupportedKind(MosaicError):
    """A scenario has no closed form for the requested kind or rank."""


class StepTooLarge(MosaicError):
    """Time integration diverged."""


class CFLViolation(MosaicError):
    """Eulerian time step violates the advective CFL bound."""


class ZeroField(MosaicError):
    """Operation undefined for a vanishing field."""


class NoCirculation(MosaicError):
    """No tangential circulation at the requested latitude."""


class SlotOutOfRange(MosaicError):
    """Tensor slot index outside 1..rank."""
