import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Tuple

from App.errors import NullEventError, UnsupportedError
from App.models.chain import Decomposition, EvidencePattern, segments
from App.models.transition import VALIDITY_TOLERANCE, TransitionMatrix, entry, measures

IDENTIFIED_TOLERANCE = 1e-12


class Method(Enum):
    SIMPLE = "simple"
    UNOBSERVED = "unobserved"
    EVIDENCE = "evidence-product"
    MONOTONICITY = "monotonicity"


@dataclass(frozen=True)
class BoundsResult:
    """
    A closed interval [lo, hi] inside [0, 1] for a probability of causation.

    Attributes:
        lo, hi (float): the bounds.
        identified (bool): hi - lo <= IDENTIFIED_TOLERANCE.
        method (Method): which formula produced the interval.
        factors (Tuple[Tuple[float, float], ...]): per-segment (lo, hi) whose products give
            the interval, for the evidence product; empty otherwise.
    """

    lo: float
    hi: float
    identified: bool
    method: Method
    factors: Tuple[Tuple[float, float], ...] = ()

    @classmethod
    def build(cls, lo: float, hi: float, method: Method, factors=()) -> "BoundsResult":
        lo = min(1.0, max(0.0, lo))
        hi = min(1.0, max(0.0, hi))
        if hi < lo:
            # only rounding can get here; the formulas order the endpoints
            lo, hi = min(lo, hi), max(lo, hi)
        return cls(lo=lo, hi=hi, identified=(hi - lo) <= IDENTIFIED_TOLERANCE, method=method,
                   factors=tuple(factors))

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def __str__(self) -> str:
        return f"[{self.lo:.9g}, {self.hi:.9g}]"


def _denominator(P: TransitionMatrix, x: int, y: int, where: str = "") -> float:
    value = entry(P, x, y)
    if value <= VALIDITY_TOLERANCE:
        suffix = f" ({where})" if where else ""
        raise NullEventError(f"Pr(Y={y} | X<-{x}) = 0 under P={P}; the evidence is impossible{suffix}")
    return value


def _sign(x: int, y: int) -> float:
    return 1.0 if x == y else -1.0


def single_step_upper_bounds(P: TransitionMatrix) -> Dict[Tuple[int, int], float]:
    """
    Simple upper bounds for the four (x, y) cases in closed form:
    rho >= 0 gives UB(00)=1, UB(01)=gamma, UB(10)=1, UB(11)=delta;
    rho < 0 gives UB(00)=delta, UB(01)=1, UB(10)=gamma, UB(11)=1.
    """
    m = measures(P)
    if P.rho >= 0.0:
        return {(0, 0): 1.0, (0, 1): m.gamma, (1, 0): 1.0, (1, 1): m.delta}
    return {(0, 0): m.delta, (0, 1): 1.0, (1, 0): m.gamma, (1, 1): 1.0}


def simple_bounds(P: TransitionMatrix, x: int, y: int) -> BoundsResult:
    denominator = _denominator(P, x, y)
    sign = _sign(x, y)
    lo = max(0.0, sign * P.tau) / denominator
    hi = 0.5 * (1.0 + sign * P.tau - abs(P.rho)) / denominator

    if 0.0 <= P.tau < 1.0:
        closed_form = single_step_upper_bounds(P)[(x, y)]
        assert math.isclose(hi, closed_form, rel_tol=1e-9, abs_tol=1e-9), \
            f"simple upper bound {hi} disagrees with its closed form {closed_form} for P={P}, x={x}, y={y}"
    return BoundsResult.build(lo, hi, Method.SIMPLE)


def unobserved_bounds(D: Decomposition, x: int, y: int, where: str = "") -> BoundsResult:
    """Bounds when X=x, Y=y are observed and the chain's mediators are not."""
    P = D.composed()
    denominator = _denominator(P, x, y, where)
    sign = _sign(x, y)
    lo = max(0.0, sign * P.tau) / denominator
    hi = 0.5 * (D.xi_upper() + sign * P.tau) / denominator
    # one step and no mediators: this is the simple bound
    return BoundsResult.build(lo, hi, Method.SIMPLE if D.n == 1 else Method.UNOBSERVED)


def evidence_bounds(D: Decomposition, E: EvidencePattern) -> BoundsResult:
    """
    Bounds given observations on X, Y and any subset of mediators.

    The probability of causation factorises over the segments between
    consecutive observed nodes; each factor is bounded by the
    unobserved-mediator bounds of its segment, and the bounds multiply.
    """
    parts = segments(D, E)
    factors = [
        unobserved_bounds(part.decomposition(), part.start_value, part.end_value, where=part.label())
        for part in parts
    ]
    if len(factors) == 1:
        return factors[0]

    lo = math.prod(f.lo for f in factors)
    hi = math.prod(f.hi for f in factors)
    return BoundsResult.build(lo, hi, Method.EVIDENCE, factors=[(f.lo, f.hi) for f in factors])


def require_positive_effect(P: TransitionMatrix, what: str) -> None:
    if P.tau <= 0.0:
        raise UnsupportedError(f"{what} needs tau > 0, got {P}")
