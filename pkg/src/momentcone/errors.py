"""Exception hierarchy. Every error carries a stable ``kind`` used by the CLI."""


class MomentConeError(Exception):
    kind = "internal"

    def __init__(self, message="", **details):
        super().__init__(message)
        self.details = details


class IndexSetMismatch(MomentConeError):
    kind = "index_set_mismatch"


class IrregularIndexSet(MomentConeError):
    kind = "irregular_index_set"


class MalformedInput(MomentConeError):
    kind = "malformed_input"


class RegularityViolation(MomentConeError):
    kind = "regularity_violation"


class EmptyGrid(MomentConeError):
    kind = "empty_grid"


class ToleranceNotReached(MomentConeError):
    kind = "tolerance_not_reached"

    def __init__(self, message="", estimate=None, achieved=None, **details):
        super().__init__(message, **details)
        self.estimate = estimate
        self.achieved = achieved


class NumericalBreakdown(MomentConeError):
    kind = "numerical_breakdown"


class RankDeficient(MomentConeError):
    kind = "rank_deficient"


class DegenerateDensity(MomentConeError):
    kind = "degenerate_density"


class BetaTooLarge(MomentConeError):
    kind = "beta_too_large"


class KExhausted(MomentConeError):
    kind = "k_exhausted"


class NotStrictlyPositive(MomentConeError):
    kind = "not_strictly_positive"


class AtomicInfeasible(MomentConeError):
    kind = "atomic_infeasible"
