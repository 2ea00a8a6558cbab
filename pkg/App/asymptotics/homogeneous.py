import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from App.bounds.extremal import closed_form_mixed, min_mixed_upper_bound
from App.errors import PreconditionError, UnsupportedError
from App.models.transition import TransitionMatrix, homogeneous_step, measures

PROFILE_COLUMNS = ("uLB", "uUB", "oLB", "oUB", "mLB", "mUB")
# relative slack for the monotonicity and curvature checks
SHAPE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class HomogeneousRow:
    """
    Bounds for the homogeneous decomposition of length n.

    Attributes:
        n (int): number of steps.
        uLB, uUB (float): mediators unobserved.
        oLB, oUB (float): every mediator observed at 1.
        mLB, mUB (Optional[float]): worst alternating evidence; None for n = 1
            and for degenerate laws, where mixed evidence is impossible.
    """

    n: int
    uLB: float
    uUB: float
    oLB: float
    oUB: float
    mLB: Optional[float]
    mUB: Optional[float]

    def values(self) -> Tuple[Optional[float], ...]:
        return tuple(getattr(self, name) for name in PROFILE_COLUMNS)


@dataclass(frozen=True)
class HomogeneousProfile:
    base: TransitionMatrix
    rows: Tuple[HomogeneousRow, ...]

    def row(self, n: int) -> HomogeneousRow:
        for item in self.rows:
            if item.n == n:
                return item
        raise KeyError(n)

    def column(self, name: str) -> np.ndarray:
        if name not in PROFILE_COLUMNS:
            raise KeyError(name)
        return np.array([np.nan if getattr(r, name) is None else getattr(r, name) for r in self.rows])

    @property
    def ns(self) -> np.ndarray:
        return np.array([r.n for r in self.rows])


@dataclass(frozen=True)
class LimitReport:
    """
    Bounds in the limit of infinitely many homogeneous mediators.

    For a degenerate law the chain adds nothing: the u and o values are
    the identified constant, and mLB/mUB are None.
    """

    base: TransitionMatrix
    uLB: float
    uUB: float
    oLB: float
    oUB: float
    mLB: Optional[float]
    mUB: Optional[float]
    degenerate: bool


@dataclass(frozen=True)
class ShapeCheck:
    name: str
    passed: bool
    vacuous: bool
    first_violation: Optional[int] = None


@dataclass(frozen=True)
class MonotonicityReport:
    """Pass/fail ledger of the shape and doubling checks on a profile, n = 1..n_max."""

    base: TransitionMatrix
    n_max: int
    checks: Tuple[ShapeCheck, ...]
    skipped: bool
    constants: Optional[LimitReport] = None

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def get(self, name: str) -> ShapeCheck:
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(name)

    def failures(self) -> List[ShapeCheck]:
        return [check for check in self.checks if not check.passed]


def _require_profile_hypotheses(P: TransitionMatrix) -> None:
    if not (0.0 < P.tau < 1.0):
        raise UnsupportedError(f"Homogeneous profiles need 0 < tau < 1, got {P}")


def _mixed_upper(step: TransitionMatrix, n: int) -> float:
    try:
        return closed_form_mixed(step, n)[1]
    except PreconditionError:
        return min_mixed_upper_bound(step, n)


def _profile_arrays(P: TransitionMatrix, ns: np.ndarray) -> Dict[str, np.ndarray]:
    """Vectorised u and o bounds over an array of chain lengths, all in the log domain."""
    tau, rho = P.tau, P.rho
    s = 1.0 + tau + rho
    ns = np.asarray(ns, dtype=float)

    scaled_log = math.log(tau) / ns
    tau_step = np.exp(scaled_log)
    rho_step = rho * (-np.expm1(scaled_log)) / (1.0 - tau)
    abs_rho_step = np.abs(rho_step)

    u_lb = np.full(ns.shape, 2.0 * tau / s)
    u_ub = (tau + np.exp(ns * np.log1p(-abs_rho_step))) / s
    o_lb = tau * np.exp(-ns * np.log1p((tau_step - 1.0 + rho_step) / 2.0))
    if rho >= 0.0:
        # log delta' = log1p(-2|rho'| / (1 + tau' + |rho'|))
        o_ub = np.exp(ns * np.log1p(-2.0 * abs_rho_step / (1.0 + tau_step + abs_rho_step)))
    else:
        o_ub = np.ones(ns.shape)

    return {
        "uLB": np.minimum(1.0, u_lb),
        "uUB": np.minimum(1.0, u_ub),
        "oLB": np.minimum(1.0, o_lb),
        "oUB": np.minimum(1.0, o_ub),
    }


def _row(P: TransitionMatrix, n: int, arrays: Dict[str, np.ndarray], index: int) -> HomogeneousRow:
    m_lb: Optional[float] = None
    m_ub: Optional[float] = None
    if n >= 2 and not P.is_degenerate:
        m_lb = 0.0
        m_ub = _mixed_upper(homogeneous_step(P, n), n)
    return HomogeneousRow(
        n=n,
        uLB=float(arrays["uLB"][index]),
        uUB=float(arrays["uUB"][index]),
        oLB=float(arrays["oLB"][index]),
        oUB=float(arrays["oUB"][index]),
        mLB=m_lb,
        mUB=m_ub,
    )


def profile(P: TransitionMatrix, n: int) -> HomogeneousRow:
    _require_profile_hypotheses(P)
    if n < 1:
        raise PreconditionError(f"n must be a positive integer, got {n}")
    # surfaces an infeasible root before any bound is read
    homogeneous_step(P, n)
    arrays = _profile_arrays(P, np.array([n]))
    return _row(P, n, arrays, 0)


def profile_table(P: TransitionMatrix, n_max: int) -> HomogeneousProfile:
    _require_profile_hypotheses(P)
    if n_max < 1:
        raise PreconditionError(f"n_max must be a positive integer, got {n_max}")
    ns = np.arange(1, n_max + 1)
    arrays = _profile_arrays(P, ns)
    rows = tuple(_row(P, int(n), arrays, i) for i, n in enumerate(ns))
    return HomogeneousProfile(base=P, rows=rows)


def limits(P: TransitionMatrix) -> LimitReport:
    _require_profile_hypotheses(P)
    tau, rho = P.tau, P.rho
    s = 1.0 + tau + rho
    sigma = measures(P).sigma
    log_tau = math.log(tau)

    u_lb = 2.0 * tau / s
    u_ub = (tau + math.exp(abs(sigma) * log_tau)) / s
    o_lb = math.exp(0.5 * (1.0 + sigma) * log_tau)
    o_ub = min(1.0, math.exp(sigma * log_tau))

    if P.is_degenerate:
        return LimitReport(base=P, uLB=u_lb, uUB=min(1.0, u_ub), oLB=o_lb, oUB=o_ub,
                           mLB=None, mUB=None, degenerate=True)
    return LimitReport(base=P, uLB=u_lb, uUB=min(1.0, u_ub), oLB=o_lb, oUB=o_ub,
                       mLB=0.0, mUB=0.0 if rho != 0.0 else 1.0, degenerate=False)


def _first(mask: np.ndarray, ns: np.ndarray) -> Optional[int]:
    bad = np.flatnonzero(~mask)
    return int(ns[bad[0]]) if bad.size else None


def _monotone(values: np.ndarray, ns: np.ndarray, increasing: bool) -> Tuple[bool, Optional[int]]:
    if values.size < 2:
        return True, None
    slack = SHAPE_TOLERANCE * max(1.0, float(np.max(np.abs(values))))
    diff = np.diff(values)
    mask = diff > -slack if increasing else diff < slack
    return bool(mask.all()), _first(mask, ns[1:])


def _curvature(values: np.ndarray, ns: np.ndarray, concave: bool) -> Tuple[bool, Optional[int]]:
    if values.size < 3:
        return True, None
    slack = SHAPE_TOLERANCE * max(1.0, float(np.max(np.abs(values))))
    second = values[2:] - 2.0 * values[1:-1] + values[:-2]
    mask = second < slack if concave else second > -slack
    return bool(mask.all()), _first(mask, ns[1:-1])


def _doubling(values: np.ndarray, n_max: int, smaller: bool) -> Tuple[bool, Optional[int]]:
    n = 1
    while 2 * n <= n_max:
        now, doubled = values[n - 1], values[2 * n - 1]
        holds = doubled < now if smaller else doubled > now
        if not holds:
            return False, n
        n *= 2
    return True, None


def monotonicity_report(P: TransitionMatrix, n_max: int) -> MonotonicityReport:
    """
    Shape checks of the homogeneous bounds: oLB increasing and concave,
    uUB decreasing and convex, oUB (rho > 0) decreasing and convex, and
    the doubling inequalities over n = 1, 2, 4, ... up to n_max.

    Violations are findings, not errors. Degenerate laws are skipped and
    the identified constants are reported instead.
    """
    _require_profile_hypotheses(P)
    if P.is_degenerate:
        return MonotonicityReport(base=P, n_max=n_max, checks=(), skipped=True, constants=limits(P))

    table = profile_table(P, n_max)
    ns = table.ns
    o_lb, u_ub, o_ub = table.column("oLB"), table.column("uUB"), table.column("oUB")
    # uUB is constant 1 at rho = 0 and oUB is constant 1 for rho <= 0
    u_vacuous = P.rho == 0.0
    o_vacuous = P.rho <= 0.0

    def check(name, outcome, vacuous=False):
        passed, where = outcome
        return ShapeCheck(name=name, passed=True if vacuous else passed, vacuous=vacuous,
                          first_violation=None if vacuous else where)

    checks = (
        check("oLB_increasing", _monotone(o_lb, ns, increasing=True)),
        check("oLB_concave", _curvature(o_lb, ns, concave=True)),
        check("uUB_decreasing", _monotone(u_ub, ns, increasing=False), u_vacuous),
        check("uUB_convex", _curvature(u_ub, ns, concave=False), u_vacuous),
        check("oUB_decreasing", _monotone(o_ub, ns, increasing=False), o_vacuous),
        check("oUB_convex", _curvature(o_ub, ns, concave=False), o_vacuous),
        check("uUB_doubling", _doubling(u_ub, n_max, smaller=True), u_vacuous),
        check("oLB_doubling", _doubling(o_lb, n_max, smaller=False)),
        check("oUB_doubling", _doubling(o_ub, n_max, smaller=True), o_vacuous),
    )
    return MonotonicityReport(base=P, n_max=n_max, checks=checks, skipped=False)
