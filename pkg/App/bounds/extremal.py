import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from App.bounds.engine import evidence_bounds, require_positive_effect, single_step_upper_bounds
from App.errors import CausaBoundError, ConstructionInfeasibleError, PreconditionError, UnsupportedError
from App.models.chain import Decomposition, EvidencePattern
from App.models.transition import VALIDITY_TOLERANCE, TransitionMatrix, compose, measures

WITNESS_TOLERANCE = 1e-10
MAX_SEARCH_STEPS = 24
# rows per enumeration chunk in the mixed-evidence search
SEARCH_CHUNK = 1 << 16


class ConstructionKind(Enum):
    SUFF_THEN_NEC = "suff_then_nec"
    MAX_OUB = "max_oUB"
    NEC_THEN_SUFF = "nec_then_suff"
    MAX_MUB_NONPOS = "max_mUB_nonpos"
    MAX_MUB_NONNEG = "max_mUB_nonneg"


class Regime(Enum):
    UNOBSERVED = "unobserved"
    ALL_POSITIVE = "all-positive"
    MIXED = "mixed"


@dataclass(frozen=True)
class ExtremalEntry:
    regime: Regime
    extreme: str  # "largest" | "smallest"
    side: str  # "upper" | "lower"
    value: float
    witness: Decomposition
    pattern: EvidencePattern
    identified: bool


@dataclass(frozen=True)
class ExtremalReport:
    """
    Largest and smallest achievable bounds over all complete mediation
    chains of a fixed overall law, one entry per (regime, extreme, side),
    each with a witnessing decomposition and evidence pattern.
    """

    base: TransitionMatrix
    entries: Tuple[ExtremalEntry, ...]

    def get(self, regime: Regime, extreme: str, side: str) -> ExtremalEntry:
        for item in self.entries:
            if item.regime is regime and item.extreme == extreme and item.side == side:
                return item
        raise KeyError((regime, extreme, side))

    def value(self, regime: Regime, extreme: str, side: str) -> float:
        return self.get(regime, extreme, side).value

    def __iter__(self) -> Iterator[ExtremalEntry]:
        return iter(self.entries)


def _require_table_hypotheses(P: TransitionMatrix) -> None:
    require_positive_effect(P, "Extremal constructions")
    if abs(P.rho) >= 1.0 - P.tau - VALIDITY_TOLERANCE:
        raise UnsupportedError(f"Extremal constructions need |rho| < 1 - tau (non-degenerate), got {P}")


def construct(kind: ConstructionKind, P: TransitionMatrix) -> Decomposition:
    """Two-step decompositions of P that attain the extremal bounds."""
    kind = ConstructionKind(kind)
    _require_table_hypotheses(P)
    tau, rho = P.tau, P.rho
    s = 1.0 + tau + rho
    d = 1.0 + tau - rho

    if kind is ConstructionKind.SUFF_THEN_NEC:
        # X=1 sufficient for M=1, M=1 necessary for Y=1
        pairs = [(2.0 * tau / s, (1.0 - tau + rho) / s), (s / 2.0, (tau + rho - 1.0) / 2.0)]
    elif kind is ConstructionKind.NEC_THEN_SUFF:
        # X=1 necessary for M=1, M=1 sufficient for Y=1
        pairs = [(2.0 * tau / d, (tau + rho - 1.0) / d), (d / 2.0, (1.0 - tau + rho) / 2.0)]
    elif kind is ConstructionKind.MAX_OUB:
        if rho <= 0.0:
            raise PreconditionError(f"{kind.value} requires rho > 0, got {P}")
        pairs = [(tau / (1.0 - rho), 0.0), (1.0 - rho, rho)]
    elif kind is ConstructionKind.MAX_MUB_NONPOS:
        if rho > 0.0:
            raise PreconditionError(f"{kind.value} requires rho <= 0, got {P}")
        pairs = [(2.0 * tau / s, 0.0), (s / 2.0, rho)]
    else:
        if rho < 0.0:
            raise PreconditionError(f"{kind.value} requires rho >= 0, got {P}")
        pairs = [(tau * s / (2.0 * (tau + rho)), rho * s / (2.0 * (tau + rho))), (2.0 * (tau + rho) / s, 0.0)]

    try:
        D = Decomposition.from_pairs(pairs)
    except (CausaBoundError, ZeroDivisionError) as exc:
        raise ConstructionInfeasibleError(f"{kind.value} is infeasible for {P}: {exc}") from exc

    back = compose(*D.steps)
    if abs(back.tau - tau) > 1e-12 or abs(back.rho - rho) > 1e-12:
        raise ConstructionInfeasibleError(f"{kind.value} recomposes to {back}, not {P}")
    return D


def _entry(regime, extreme, side, value, witness: Decomposition, pattern: str) -> ExtremalEntry:
    E = EvidencePattern.parse(pattern)
    result = evidence_bounds(witness, E)
    attained = result.hi if side == "upper" else result.lo
    if abs(attained - value) > WITNESS_TOLERANCE:
        raise ConstructionInfeasibleError(
            f"Witness {witness} with pattern {pattern} gives {side} bound {attained!r}, expected {value!r}")
    return ExtremalEntry(regime=regime, extreme=extreme, side=side, value=value, witness=witness,
                         pattern=E, identified=result.identified)


def extremal_table(P: TransitionMatrix) -> ExtremalReport:
    _require_table_hypotheses(P)
    tau, rho = P.tau, P.rho
    s = 1.0 + tau + rho
    s_lb = 2.0 * tau / s

    direct = Decomposition((P,))
    suff_nec = construct(ConstructionKind.SUFF_THEN_NEC, P)
    nec_suff = construct(ConstructionKind.NEC_THEN_SUFF, P)
    if rho > 0.0:
        largest_o_ub = (construct(ConstructionKind.MAX_OUB, P), "111")
    else:
        largest_o_ub = (direct, "11")
    if rho <= 0.0:
        largest_m_ub = construct(ConstructionKind.MAX_MUB_NONPOS, P)
    else:
        largest_m_ub = construct(ConstructionKind.MAX_MUB_NONNEG, P)

    U, O, M = Regime.UNOBSERVED, Regime.ALL_POSITIVE, Regime.MIXED
    entries = (
        _entry(U, "largest", "upper", (1.0 + tau - abs(rho)) / s, direct, "11"),
        _entry(U, "largest", "lower", s_lb, direct, "11"),
        _entry(U, "smallest", "upper", s_lb, suff_nec, "1?1"),
        _entry(U, "smallest", "lower", s_lb, suff_nec, "1?1"),
        _entry(O, "largest", "upper", min(1.0, 1.0 - rho), *largest_o_ub),
        _entry(O, "largest", "lower", (1.0 + tau - rho) / 2.0, nec_suff, "111"),
        _entry(O, "smallest", "upper", s_lb, suff_nec, "111"),
        _entry(O, "smallest", "lower", s_lb, suff_nec, "111"),
        _entry(M, "largest", "upper", 1.0, largest_m_ub, "101"),
        _entry(M, "largest", "lower", 0.0, nec_suff, "101"),
        _entry(M, "smallest", "upper", 0.0, nec_suff, "101"),
        _entry(M, "smallest", "lower", 0.0, nec_suff, "101"),
    )
    return ExtremalReport(base=P, entries=entries)


def inequality_checks(P: TransitionMatrix, D: Optional[Decomposition] = None) -> Dict[str, bool]:
    """
    The inequalities the extremal values rest on, evaluated for P and,
    when given, for a decomposition D of P with positive steps.
    """
    tau, rho = P.tau, P.rho
    slack = 1e-12
    checks = {
        "simple_lower_below_largest_lower": 2.0 * tau / (1.0 + tau + rho) <= (1.0 + tau - rho) / 2.0 + slack,
        "largest_lower_below_simple_upper":
            (1.0 + tau - rho) / 2.0 <= min(1.0, (1.0 + tau - rho) / (1.0 + tau + rho)) + slack,
        "simple_upper_below_largest_upper":
            min(1.0, (1.0 + tau - rho) / (1.0 + tau + rho)) <= min(1.0, 1.0 - rho) + slack,
    }
    if D is not None:
        checks["leading_entries_product"] = (
            math.prod((1.0 + s.tau - s.rho) / 2.0 for s in D.steps) <= (1.0 + tau - rho) / 2.0 + slack)
        checks["upper_caps_product"] = (
            math.prod(min(1.0, 1.0 - s.rho) for s in D.steps) <= min(1.0, 1.0 - rho) + slack)
        checks["decomposed_slack_below_simple"] = D.xi_upper() <= 1.0 - abs(rho) + slack
    return checks


def _homogeneous_step(D: Decomposition) -> TransitionMatrix:
    if not D.is_homogeneous():
        raise PreconditionError(f"Mixed-evidence search needs identical steps, got {D}")
    step = D.steps[0]
    if not (0.0 < step.tau < 1.0):
        raise UnsupportedError(f"Mixed-evidence search needs 0 < tau' < 1, got {step}")
    if D.n < 2:
        raise PreconditionError("Mixed evidence needs at least one mediator (n >= 2)")
    return step


def _upper_bound_table(step: TransitionMatrix) -> np.ndarray:
    table = single_step_upper_bounds(step)
    return np.array([[table[(0, 0)], table[(0, 1)]], [table[(1, 0)], table[(1, 1)]]])


def _pattern_from_inner(bits: np.ndarray) -> str:
    return "1" + "".join(str(int(b)) for b in bits) + "1"


def _search(step: TransitionMatrix, n: int) -> Tuple[str, float]:
    if n > MAX_SEARCH_STEPS:
        raise PreconditionError(
            f"Exhaustive search over {n} steps is too large (limit {MAX_SEARCH_STEPS}); use the closed form")
    table = _upper_bound_table(step)
    inner = n - 1
    total = 1 << inner
    # column 0 is node 1; rows enumerate inner patterns in lexicographic order
    shifts = np.arange(inner - 1, -1, -1)

    best_value = math.inf
    best_index = -1
    for start in range(0, total - 1, SEARCH_CHUNK):  # the last index is the all-ones pattern
        stop = min(start + SEARCH_CHUNK, total - 1)
        index = np.arange(start, stop, dtype=np.int64)
        bits = (index[:, None] >> shifts) & 1
        ones = np.ones((len(index), 1), dtype=np.int64)
        nodes = np.hstack([ones, bits, ones])
        values = table[nodes[:, :-1], nodes[:, 1:]].prod(axis=1)
        chunk_min = values.min()
        if chunk_min < best_value * (1.0 - 1e-12):
            best_value = float(chunk_min)
            best_index = int(index[np.flatnonzero(values <= chunk_min * (1.0 + 1e-12))[0]])

    bits = (np.array([best_index]) >> shifts) & 1
    return _pattern_from_inner(bits), best_value


def mixed_witness(step: TransitionMatrix, n: int) -> str:
    """Alternating pattern 1010...1; for odd n the last two symbols follow the sign of rho."""
    if n % 2 == 0:
        return "10" * (n // 2) + "1"
    if step.rho >= 0.0:
        return "10" * ((n - 1) // 2) + "11"
    return "10" * ((n - 3) // 2) + "1001"


def closed_form_mixed(step: TransitionMatrix, n: int) -> Tuple[str, float]:
    m = measures(step)
    if not m.gamma < m.delta ** 2:
        raise PreconditionError(
            f"Closed form needs gamma < delta'^2, got gamma={m.gamma!r}, delta'={m.delta!r} for step {step}")
    if n % 2 == 0:
        value = m.gamma ** (n // 2)
    else:
        value = m.gamma ** ((n - 1) // 2) * m.delta
    return mixed_witness(step, n), value


def worst_case_mixed(D: Decomposition, want: str = "search") -> Tuple[EvidencePattern, float]:
    """
    The mixed-evidence pattern (endpoints 1, at least one mediator at 0)
    with the smallest upper bound, for a homogeneous chain.
    """
    step = _homogeneous_step(D)
    if want == "search":
        pattern, value = _search(step, D.n)
    elif want == "closed_form":
        pattern, value = closed_form_mixed(step, D.n)
    else:
        raise PreconditionError(f"want must be 'search' or 'closed_form', got {want!r}")
    return EvidencePattern.parse(pattern), value


def min_mixed_upper_bound(step: TransitionMatrix, n: int) -> float:
    """
    Smallest mixed-evidence upper bound over all full patterns, by dynamic
    programming over (current value, zero seen) in the log domain; exact
    for every n, agrees with the exhaustive search.
    """
    if n < 2:
        raise PreconditionError("Mixed evidence needs at least one mediator (n >= 2)")
    with np.errstate(divide="ignore"):
        log_table = np.log(_upper_bound_table(step))
    # best[v, z]: smallest log-bound of a prefix ending at value v, z = a 0 was seen
    best = np.full((2, 2), np.inf)
    best[1, 0] = 0.0
    for position in range(1, n + 1):
        last = position == n
        nxt = np.full((2, 2), np.inf)
        for v in (0, 1):
            for z in (0, 1):
                if best[v, z] == np.inf:
                    continue
                for w in ((1,) if last else (0, 1)):
                    z_next = 1 if (z or w == 0) else 0
                    candidate = best[v, z] + log_table[v, w]
                    if candidate < nxt[w, z_next]:
                        nxt[w, z_next] = candidate
        best = nxt
    return float(np.exp(best[1, 1]))
