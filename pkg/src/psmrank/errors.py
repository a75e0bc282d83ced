"""Exception types shared across the package.

Every error raised on a documented failure path derives from PsmrankError so
callers (and the CLI) can separate contract violations from genuine bugs.
"""


class PsmrankError(Exception):
    """Base class for all documented failure modes."""


# --- array file parsing -----------------------------------------------------

class BadMagic(PsmrankError):
    """File does not start with the expected NPY v1.0 magic/version bytes."""


class UnsupportedDtype(PsmrankError):
    """Array dtype is not little-endian float32/float64."""


class FortranOrderUnsupported(PsmrankError):
    """Array was written in Fortran (column-major) order."""


class TruncatedPayload(PsmrankError):
    """Payload byte count does not match the header's shape and itemsize."""


class UnsupportedShape(PsmrankError):
    """Array is not 1-D or 2-D, or has a zero-length axis."""


class NonFiniteInput(PsmrankError):
    """A matrix or vector contains NaN or +/-Inf."""


# --- manifest / dataset assembly --------------------------------------------

class ParseError(PsmrankError):
    """Manifest or label file is malformed."""


class MissingFile(PsmrankError):
    """A path referenced by the manifest does not exist."""


class DuplicateCandidateId(PsmrankError):
    """Two manifest candidates share an id."""


class UttIdMismatch(PsmrankError):
    """Feature/posterior files and the label sidecar disagree on utterances."""


class FrameCountMismatch(PsmrankError):
    """Posterior grid frame count differs from the feature frame count."""


class InvalidPosterior(PsmrankError):
    """Posterior grid rows are not normalized log-probabilities."""


# --- alignment ---------------------------------------------------------------

class EmptyLabels(PsmrankError):
    """Label sequence is empty."""


class InfeasibleLength(PsmrankError):
    """Too few frames to emit the label sequence under CTC rules."""


class AllPathsImpossible(PsmrankError):
    """Every valid alignment has probability zero."""


class EnumerationTooLarge(PsmrankError):
    """Brute-force enumeration guard exceeded."""


class EmptyAlignedSet(PsmrankError):
    """No non-blank frames survived alignment pooling."""


# --- evidence scoring ---------------------------------------------------------

class DegenerateShape(PsmrankError):
    """Too few samples or an all-zero feature matrix."""


class NoEvaluableClass(PsmrankError):
    """Every one-vs-rest target is constant; evidence is undefined."""


# --- distribution distances ---------------------------------------------------

class LengthMismatch(PsmrankError):
    """Paired vectors have different lengths."""


class ZeroDimension(PsmrankError):
    """Feature dimension is zero."""


class DimensionMismatch(PsmrankError):
    """Source and target feature dimensions differ."""


class EmptyDomain(PsmrankError):
    """A source or target domain has no utterances/points."""


class TooManyPoints(PsmrankError):
    """Exact embedding guard exceeded."""


class BandwidthSearchFailed(PsmrankError):
    """Perplexity calibration did not converge for some row."""


# --- rank evaluation -----------------------------------------------------------

class TooFewPoints(PsmrankError):
    """Correlation needs at least 3 paired observations."""


class DomainError(PsmrankError):
    """Argument outside the mathematical domain of the function."""


class CandidateSetMismatch(PsmrankError):
    """Score columns do not cover the same candidate set."""


class MixedSeeds(PsmrankError):
    """One method column mixes scores produced under different seeds."""
