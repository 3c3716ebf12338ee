"""Exception hierarchy shared by all satcap modules."""


class SatcapError(Exception):
    """Base class for every error raised by satcap."""


class InfeasibleNu(SatcapError, ValueError):
    """A direction cosine cannot be realized under the requested fixed polar angle."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class EmptyConstellation(SatcapError, ValueError):
    pass


class LengthMismatch(SatcapError, ValueError):
    pass


class NonConstantDelaysWithTTD(SatcapError, ValueError):
    pass


class EigenFailure(SatcapError, ArithmeticError):
    """Eigen-decomposition failed or produced a significantly negative eigenvalue."""

    def __init__(self, message, sample_index=None):
        super().__init__(message)
        self.sample_index = sample_index


class KdTooSmall(SatcapError, ValueError):
    pass


class Mu0OutOfRange(SatcapError, ValueError):
    pass


class TooFewPoints(SatcapError, ValueError):
    pass


class OutOfTable(SatcapError, KeyError):
    pass


class IncompleteCoverage(SatcapError, ValueError):
    pass


class EmptyHemisphere(SatcapError, ValueError):
    pass
