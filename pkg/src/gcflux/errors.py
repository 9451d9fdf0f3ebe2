"""Exception hierarchy shared by all modules."""


class GCFluxError(Exception):
    """Base class; ``code`` is the machine-readable name printed by the CLI."""

    @property
    def code(self) -> str:
        return type(self).__name__


class HoleNotGridAligned(GCFluxError):
    pass


class EmptyMesh(GCFluxError):
    pass


class ResolutionIncompatible(GCFluxError):
    pass


class NotSymmetric(GCFluxError):
    pass


class SingularTensor(GCFluxError):
    pass


class DomainError(GCFluxError):
    pass


class DegenerateSegment(GCFluxError):
    pass


class MissingMeanValue(GCFluxError):
    pass


class SolverBreakdown(GCFluxError):
    pass


class SingularSystem(GCFluxError):
    pass


class NoExactSolution(GCFluxError):
    pass


class NonDoublingLevels(GCFluxError):
    pass


class ConfigError(GCFluxError):
    pass


class IoError(GCFluxError):
    pass
