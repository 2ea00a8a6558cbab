from dataclasses import dataclass
from typing import List, Optional, Tuple

from App.bounds.engine import evidence_bounds, simple_bounds
from App.errors import PreconditionError
from App.models.chain import Decomposition, EvidencePattern, Mark
from App.models.transition import TransitionMatrix, entry, homogeneous_step, power

# relative tolerance for ties when reading off the best k
TIE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class PlanRow:
    """
    Outcome of observing the single mediator M_k.

    Attributes:
        k (int): node index of the observed mediator, 1 <= k <= n-1.
        LB_if_one (float): lower bound on PC if M_k is seen at 1.
        posterior_prob_one (float): Pr(M_k = 1 | X = 1, Y = 1) under the chain law.
        expected_LB (float): LB_if_one weighted by posterior_prob_one; seeing 0 gives 0.
        denominator (float): Pr(M_k=1 | X<-1) Pr(Y=1 | M_k<-1), the product LB_if_one divides by.
    """

    k: int
    LB_if_one: float
    posterior_prob_one: float
    expected_LB: float
    denominator: float


@dataclass(frozen=True)
class PlanTable:
    base: TransitionMatrix
    step: Optional[TransitionMatrix]
    n: int
    no_observation_lb: float
    rows: Tuple[PlanRow, ...]
    best_k: Tuple[int, ...]

    def row(self, k: int) -> PlanRow:
        for item in self.rows:
            if item.k == k:
                return item
        raise KeyError(k)


def _best(rows: List[PlanRow]) -> Tuple[int, ...]:
    top = max(r.LB_if_one for r in rows)
    return tuple(r.k for r in rows if r.LB_if_one >= top * (1.0 - TIE_TOLERANCE))


def _check_length(n: int) -> None:
    if n < 2:
        raise PreconditionError(f"Planning needs at least one mediator (n >= 2), got n={n}")


def plan_from_step(step: TransitionMatrix, n: int) -> PlanTable:
    """Single-observation plan for n copies of a per-step law."""
    _check_length(n)
    P = power(step, n)
    no_observation = simple_bounds(P, 1, 1).lo
    joint = entry(P, 1, 1)

    rows = []
    for k in range(1, n):
        head, tail = power(step, k), power(step, n - k)
        lb_if_one = simple_bounds(head, 1, 1).lo * simple_bounds(tail, 1, 1).lo
        denominator = entry(head, 1, 1) * entry(tail, 1, 1)
        posterior = denominator / joint
        rows.append(PlanRow(k=k, LB_if_one=lb_if_one, posterior_prob_one=posterior,
                            expected_LB=posterior * lb_if_one, denominator=denominator))
    return PlanTable(base=P, step=step, n=n, no_observation_lb=no_observation, rows=tuple(rows),
                     best_k=_best(rows))


def plan_single_observation(P: TransitionMatrix, n: int) -> PlanTable:
    """
    Which single mediator of a homogeneous n-step chain of overall law P
    is most informative to observe. For odd n both middle nodes tie.
    """
    _check_length(n)
    return plan_from_step(homogeneous_step(P, n), n)


def plan_decomposition(D: Decomposition) -> PlanTable:
    """Same table for an arbitrary chain, read through the evidence bounds."""
    _check_length(D.n)
    P = D.composed()
    no_observation = simple_bounds(P, 1, 1).lo
    joint = entry(P, 1, 1)

    rows = []
    for k in range(1, D.n):
        marks = [Mark.ONE] + [Mark.UNOBSERVED] * (D.n - 1) + [Mark.ONE]
        marks[k] = Mark.ONE
        lb_if_one = evidence_bounds(D, EvidencePattern(tuple(marks))).lo
        head = Decomposition(D.steps[:k]).composed()
        tail = Decomposition(D.steps[k:]).composed()
        denominator = entry(head, 1, 1) * entry(tail, 1, 1)
        posterior = denominator / joint
        rows.append(PlanRow(k=k, LB_if_one=lb_if_one, posterior_prob_one=posterior,
                            expected_LB=posterior * lb_if_one, denominator=denominator))
    return PlanTable(base=P, step=None, n=D.n, no_observation_lb=no_observation, rows=tuple(rows),
                     best_k=_best(rows))
