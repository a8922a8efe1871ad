"""Exception hierarchy shared by the numerical modules and the CLI."""


class NumericalError(RuntimeError):
    """A computation left its validated numerical regime (CLI exit code 3)."""


class NotHermitianError(ValueError):
    pass


class DefectiveSpectrumError(NumericalError):
    """Eigenvectors coalesce, so no complete biorthogonal system exists."""

    def __init__(self, cluster, message=None):
        self.cluster = tuple(cluster)
        super().__init__(message or f"defective eigenvalue cluster {self.cluster}")


class NoiseClassError(ValueError):
    """An operation that requires phase-covariant noise got a non-commuting pair."""


class UnstableDerivativeError(NumericalError):
    pass


class InconsistentPureStateError(ValueError):
    pass


class StepUnderflowError(NumericalError):
    pass
