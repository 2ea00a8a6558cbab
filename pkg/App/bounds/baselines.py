from dataclasses import dataclass, fields
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from App.bounds.engine import BoundsResult, Method, simple_bounds
from App.bounds.extremal import Regime, extremal_table
from App.errors import CausaBoundError, ConstructionInfeasibleError, DomainError, UnsupportedError
from App.models.counterfactual import pc_at
from App.models.transition import TransitionMatrix, entry, from_matrix

MIXTURE_TOLERANCE = 1e-12


class CovariateKind(Enum):
    OBSERVED_IDENTIFIES_ONE = "observed_identifies_one"
    UNOBSERVED_EXTREMAL = "unobserved_extremal"


@dataclass(frozen=True)
class CovariateModel:
    """
    A binary covariate C with Pr(C=1) = pi and the laws P0, P1 of Y given
    X within each stratum.
    """

    pi: float
    P0: TransitionMatrix
    P1: TransitionMatrix

    def mixture(self) -> np.ndarray:
        return self.pi * self.P1.as_matrix() + (1.0 - self.pi) * self.P0.as_matrix()

    def mixture_error(self, target: TransitionMatrix) -> float:
        return float(np.max(np.abs(self.mixture() - target.as_matrix())))

    def stratum(self, c: int) -> Tuple[float, TransitionMatrix]:
        return (self.pi, self.P1) if c == 1 else (1.0 - self.pi, self.P0)


@dataclass(frozen=True)
class CovariateResult:
    kind: CovariateKind
    model: CovariateModel
    pc: float
    stratum_pc: Tuple[Optional[float], Optional[float]]


def monotonicity_bound(P: TransitionMatrix) -> BoundsResult:
    """PC under no prevention: the slack sits at its lower end, xi = tau."""
    if P.tau < 0.0:
        raise UnsupportedError(f"Monotonicity needs tau >= 0, got {P}")
    value = pc_at(P, P.tau, 1, 1)
    return BoundsResult.build(value, value, Method.MONOTONICITY)


def _stratum_pc(law: TransitionMatrix) -> Optional[float]:
    if entry(law, 1, 1) <= MIXTURE_TOLERANCE:
        return None
    bounds = simple_bounds(law, 1, 1)
    if not bounds.identified:
        raise ConstructionInfeasibleError(f"Covariate stratum {law} does not identify PC: {bounds}")
    return bounds.lo


def covariate_construction(P: TransitionMatrix, kind) -> CovariateResult:
    """
    Fixed binary-covariate constructions consistent with P.

    observed_identifies_one: observing C=1 identifies PC at 1.
    unobserved_extremal: an unobserved C for which X=Y=1 identifies PC at the
    simple upper bound (1 for rho < 0).
    """
    kind = CovariateKind(kind)
    if P.tau <= 0.0:
        raise UnsupportedError(f"Covariate constructions need tau > 0, got {P}")
    tau, rho = P.tau, P.rho
    s = 1.0 + tau + rho

    try:
        if kind is CovariateKind.OBSERVED_IDENTIFIES_ONE:
            pi = (1.0 + tau - rho) / 2.0
            lower_row = [(1.0 - tau - rho) / 2.0, s / 2.0]
            P1 = from_matrix([[1.0, 0.0], lower_row])
            P0 = from_matrix([[0.0, 1.0], lower_row])
        elif rho < 0.0:
            pi = s / 2.0
            spread = 1.0 - tau - rho
            P1 = from_matrix([[1.0, 0.0], [0.0, 1.0]])
            P0 = from_matrix([[-2.0 * rho / spread, (1.0 - tau + rho) / spread], [1.0, 0.0]])
        else:
            pi = s / 2.0
            P1 = from_matrix([[(1.0 + tau - rho) / s, 2.0 * rho / s], [0.0, 1.0]])
            P0 = from_matrix([[0.0, 1.0], [1.0, 0.0]])
    except (DomainError, ZeroDivisionError) as exc:
        raise ConstructionInfeasibleError(f"{kind.value} is infeasible for {P}: {exc}") from exc

    model = CovariateModel(pi=pi, P0=P0, P1=P1)
    error = model.mixture_error(P)
    if error > MIXTURE_TOLERANCE:
        raise ConstructionInfeasibleError(f"{kind.value} mixes to a law off {P} by {error!r}")

    stratum_pc = (_stratum_pc(P0), _stratum_pc(P1))
    if kind is CovariateKind.OBSERVED_IDENTIFIES_ONE:
        pc = stratum_pc[1]
    else:
        # mixture over strata, each weighted by Pr(C=c | X=1, Y=1)
        joint = entry(P, 1, 1)
        pc = 0.0
        for c in (0, 1):
            weight, law = model.stratum(c)
            if stratum_pc[c] is not None:
                pc += weight * entry(law, 1, 1) / joint * stratum_pc[c]
    return CovariateResult(kind=kind, model=model, pc=min(1.0, max(0.0, pc)), stratum_pc=stratum_pc)


@dataclass(frozen=True)
class ComparisonRow:
    """
    Bounds on PC for X=Y=1 under different side information; None where the
    quantity is undefined for (tau, rho).
    """

    tau: float
    rho: float
    sLB: Optional[float] = None
    sUB: Optional[float] = None
    mono: Optional[float] = None
    hom2LB: Optional[float] = None
    hom2UB: Optional[float] = None
    homInfLB: Optional[float] = None
    homInfUB: Optional[float] = None
    best2Point: Optional[float] = None
    best2oLB: Optional[float] = None
    covUnobserved: Optional[float] = None

    @classmethod
    def columns(cls) -> Tuple[str, ...]:
        return tuple(f.name for f in fields(cls))

    def values(self) -> Tuple[Optional[float], ...]:
        return tuple(getattr(self, name) for name in self.columns())


def _attempt(compute):
    try:
        return compute()
    except CausaBoundError:
        return None


def comparison_row(P: TransitionMatrix) -> ComparisonRow:
    from App.asymptotics.homogeneous import limits, profile

    simple = _attempt(lambda: simple_bounds(P, 1, 1))
    mono = _attempt(lambda: monotonicity_bound(P))
    two_step = _attempt(lambda: profile(P, 2))
    unlimited = _attempt(lambda: limits(P))
    table = _attempt(lambda: extremal_table(P))
    covariate = _attempt(lambda: covariate_construction(P, CovariateKind.UNOBSERVED_EXTREMAL))

    return ComparisonRow(
        tau=P.tau,
        rho=P.rho,
        sLB=simple.lo if simple else None,
        sUB=simple.hi if simple else None,
        mono=mono.lo if mono else None,
        hom2LB=two_step.oLB if two_step else None,
        hom2UB=two_step.oUB if two_step else None,
        homInfLB=unlimited.oLB if unlimited else None,
        homInfUB=unlimited.oUB if unlimited else None,
        best2Point=table.value(Regime.ALL_POSITIVE, "smallest", "upper") if table else None,
        best2oLB=table.value(Regime.ALL_POSITIVE, "largest", "lower") if table else None,
        covUnobserved=covariate.pc if covariate else None,
    )
