"""Exception hierarchy shared by all modules."""


class LqBregmanError(Exception):
    """Base class for errors raised by :mod:`lqbregman`."""


class DimensionMismatch(LqBregmanError, ValueError):
    """Vector or subspace dimensions do not agree."""


class DegenerateBasis(LqBregmanError, ValueError):
    """A basis is rank deficient or otherwise unusable."""


class NumericalConsistencyError(LqBregmanError, ArithmeticError):
    """A quantity that must be nonnegative came out clearly negative."""


class SolverDivergence(LqBregmanError, RuntimeError):
    """An inner projection solver hit ``max_iter`` above tolerance.

    The last iterate is available as ``result`` when the solver got that far.
    """

    def __init__(self, msg, result=None):
        super().__init__(msg)
        self.result = result


class NonConvergence(LqBregmanError, RuntimeError):
    """An outer iteration exhausted ``max_iter`` while still moving."""

    def __init__(self, msg, trace=None):
        super().__init__(msg)
        self.trace = trace


class OracleRankTooHigh(LqBregmanError, ValueError):
    """The brute-force oracle only handles subspaces of rank <= 3."""


class InsufficientDecay(LqBregmanError, ValueError):
    """Too few usable points to fit a linear rate."""


class PointInIntersection(LqBregmanError, ValueError):
    """Regularity ratio requested at a point of the intersection."""


class ConfigParseError(LqBregmanError, ValueError):
    """An experiment configuration is malformed."""
