"""Exception hierarchy shared by every module of the package."""


class OrthoglideError(Exception):
    """Base class for all errors raised by this package."""


class UnreachablePose(OrthoglideError):
    pass


class NoAssembly(OrthoglideError):
    pass


class DegenerateBranch(OrthoglideError):
    pass


class AssemblyModeViolation(OrthoglideError):
    pass


class NearSingular(OrthoglideError):
    pass


class LegSingularity(OrthoglideError):
    pass


class IllConditioned(OrthoglideError):
    pass


class NotYetAvailable(OrthoglideError):
    pass


class InsufficientHistory(OrthoglideError):
    pass


class OutOfRange(OrthoglideError):
    pass


class WorkspaceViolation(OrthoglideError):
    pass


class SimDiverged(OrthoglideError):
    pass


class EmptyWindow(OrthoglideError):
    pass


class ConfigError(OrthoglideError):
    pass
