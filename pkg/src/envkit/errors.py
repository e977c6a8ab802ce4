"""Exception hierarchy shared by all modules."""


class EnvkitError(ValueError):
    """Base class; every error carries an optional numeric residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NonSquare(EnvkitError):
    pass


class NotHermitian(EnvkitError):
    pass


class ZeroMatrix(EnvkitError):
    pass


class TooFewSamples(EnvkitError):
    pass


class NotNormalized(EnvkitError):
    pass


class BadSubsystemIndex(EnvkitError):
    pass


class NonOrthonormalBasis(EnvkitError):
    pass


class LengthMismatch(EnvkitError):
    pass


class DimensionMismatch(EnvkitError):
    pass


class ShapeMismatch(EnvkitError):
    pass


class NotTracePreserving(EnvkitError):
    pass


class BadParam(EnvkitError):
    pass


class BadProbabilities(EnvkitError):
    pass


class ComplementNotTracePreserving(EnvkitError):
    pass


class NotAdmissible(EnvkitError):
    pass


class NotPure(EnvkitError):
    pass


class NonUnitaryInput(EnvkitError):
    pass


class CompletionViolated(EnvkitError):
    pass


class UnsupportedDimension(EnvkitError):
    pass


class NotEnvariancePair(EnvkitError):
    pass


class GapTooSmall(EnvkitError):
    def __init__(self, t, gap):
        super().__init__(f"spectral gap {gap:.3e} below tolerance at t={t:.6g}", gap)
        self.t = t
        self.gap = gap


class NotHermitianSample(EnvkitError):
    pass


class ZeroProbabilityBranch(EnvkitError):
    pass
