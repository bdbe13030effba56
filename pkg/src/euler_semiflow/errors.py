"""Exception hierarchy shared by all modules."""


class EulerSemiflowError(Exception):
    """Base class for every error raised by this package."""


class DomainError(EulerSemiflowError, ValueError):
    """An argument lies outside the domain of the function."""


class HorizonError(EulerSemiflowError, ValueError):
    """A requested time lies outside the stored trajectory."""


class ContinuationError(EulerSemiflowError, ValueError):
    """Two trajectories cannot be glued at the requested time."""


class GridMismatchError(EulerSemiflowError, ValueError):
    """Objects defined on different spatial grids were combined."""


class DatumMismatchError(EulerSemiflowError, ValueError):
    """Trajectories were compared that do not share an initial datum."""


class SolverError(EulerSemiflowError, RuntimeError):
    """Base class for failures inside a time integration."""


class CFLError(SolverError):
    """The admissible time step collapsed."""


class VacuumError(SolverError):
    """Density (or pressure) dropped below the vacuum floor."""


class EntropyFloorError(SolverError):
    """The minimum-entropy principle S >= s0*rho was violated."""


class NotConstructibleError(EulerSemiflowError, ValueError):
    """A closed-form candidate does not exist for the given data."""


class CandidateGenerationError(EulerSemiflowError, RuntimeError):
    """Every member of a candidate suite failed."""


class FileFormatError(EulerSemiflowError, ValueError):
    """A trajectory container is truncated, corrupt or of the wrong kind."""
