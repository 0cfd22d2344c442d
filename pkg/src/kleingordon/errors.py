"""Exception hierarchy shared by all modules."""


class KGError(Exception):
    """Base class for every error raised by this package."""


class PositivityFailure(KGError, ValueError):
    """The kinetic operator ``u2`` is not positive definite."""


class DimensionMismatch(KGError, ValueError):
    pass


class DefinitenessEmpty(KGError):
    """No real ``mu`` satisfies ``||(V - mu) U^-1|| < 1``."""


class CholeskyFailure(KGError):
    """``L - mu J`` is numerically not positive definite."""

    def __init__(self, pivot: int, message: str | None = None):
        self.pivot = pivot
        super().__init__(message or f"Cholesky breakdown at pivot {pivot}")


class ConditionViolated(KGError):
    """``||(V - mu) U^-1|| >= 1`` where a strict bound was required."""

    def __init__(self, value: float, message: str | None = None):
        self.value = value
        super().__init__(message or f"condition norm {value:.6g} >= 1")


class NegativeRadicand(KGError):
    def __init__(self, radicand: float):
        self.radicand = radicand
        super().__init__(f"negative radicand {radicand:.6g} in p-functional")


class DegenerateDenominator(KGError):
    def __init__(self, value: float):
        self.value = value
        super().__init__(f"denominator {value:.3g} too small")


class LemmaViolation(KGError):
    """Interpolated potential exceeded the endpoint condition norms."""


class NotComparable(KGError, ValueError):
    pass


class NonCommuting(KGError, ValueError):
    pass


class FamilyUndefined(KGError, ValueError):
    pass


class OutOfValidity(KGError, ValueError):
    pass


class InclusionViolation(KGError):
    def __init__(self, report: dict):
        self.report = report
        super().__init__(f"eigenvalue outside enclosure: {report}")
