"""Exception hierarchy shared by every l1lab module."""


class L1LabError(Exception):
    """Base class for all library errors."""


class InvalidParameter(L1LabError, ValueError):
    pass


class ShapeError(L1LabError, ValueError):
    pass


class DegenerateInput(L1LabError, ValueError):
    """Input points collide (zero distance between distinct labels)."""

    def __init__(self, message, indices=()):
        super().__init__(message)
        self.indices = tuple(indices)


class InvalidMetric(L1LabError, ValueError):
    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class ResourceLimit(L1LabError):
    """Requested size exceeds what the exact/enumerative routine supports."""


class DisconnectedGraph(L1LabError, ValueError):
    pass


class RealizationFailed(L1LabError):
    def __init__(self, message, best_distortion=float("inf")):
        super().__init__(message)
        self.best_distortion = best_distortion


class CalibrationFailed(L1LabError):
    def __init__(self, message, C=float("nan"), discrepancy=float("nan")):
        super().__init__(message)
        self.C = C
        self.discrepancy = discrepancy


class EventNotAchieved(L1LabError):
    """Rejection sampling ran out of tries; ``best`` holds the best attempt."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class IncompleteScales(L1LabError, ValueError):
    def __init__(self, message, missing=()):
        super().__init__(message)
        self.missing = tuple(missing)


class PreconditionViolation(L1LabError, ValueError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness
