"""Exception types raised by the numerical layers."""


class DispersiveError(Exception):
    """Base class for all library errors."""


class PoleProximity(DispersiveError):
    pass


class SigmaOutOfRange(DispersiveError):
    pass


class InsideBand(DispersiveError):
    """Transfer matrix has unimodular eigenvalues; no decaying solution."""


class WindowAtPole(DispersiveError):
    pass


class UnpairedEdge(DispersiveError):
    pass


class NotOnBand(DispersiveError):
    pass


class DegenerateEdge(DispersiveError):
    pass


class AmbiguousSymmetry(DispersiveError):
    pass


class NonConvergent(DispersiveError):
    pass


class MultipleRoots(DispersiveError):
    pass


class RootAtEdge(DispersiveError):
    pass


class BranchCrossing(DispersiveError):
    pass


class MissingBaseline(DispersiveError):
    pass


class ConfigError(DispersiveError):
    """Invalid configuration; ``path`` names the offending field."""

    def __init__(self, path, reason):
        self.path = path
        self.reason = reason
        super().__init__(f"{path}: {reason}")
