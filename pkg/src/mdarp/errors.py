"""Exception types shared across the package."""


class MdarpError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(MdarpError):
    pass


class InvalidVertexId(MdarpError):
    pass


class SchemaError(MdarpError):
    def __init__(self, path, message=""):
        self.path = path
        super().__init__(f"{path}: {message}" if message else str(path))


class MetricViolation(MdarpError):
    def __init__(self, violations):
        self.violations = list(violations)
        head = "; ".join(str(v) for v in self.violations[:3])
        super().__init__(f"{len(self.violations)} metric violation(s): {head}")


class BadParams(MdarpError):
    pass


class EmptySubset(MdarpError):
    pass


class EmptyDepotSet(MdarpError):
    pass


class NotEulerian(MdarpError):
    pass


class Disconnected(MdarpError):
    pass


class IndexSetMismatch(MdarpError):
    pass


class NotPerfectSquare(MdarpError):
    pass


class ThetaOutOfRange(MdarpError):
    pass


class LengthMismatch(MdarpError):
    pass


class DegenerateScaling(MdarpError):
    pass


class NoSegmentForSpec(MdarpError):
    pass


class SizeExceedsCapacity(MdarpError):
    pass


class LimitExceeded(MdarpError):
    pass


class ZeroLowerBound(MdarpError):
    pass
