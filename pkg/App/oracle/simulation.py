import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.stats import chi2, chi2_contingency

from App.errors import NullEventError, PreconditionError
from App.models.chain import Decomposition, EvidencePattern
from App.models.counterfactual import response_distribution
from App.oracle.sharpness import SlackAssignment

DEFAULT_BLOCK_SIZE = 1 << 16
MAX_SIMULATED_STEPS = 20
# smallest expected cell count for a stratum to count as conclusive
MIN_EXPECTED = 5.0

# response types, in the order of ResponseDistribution.as_array
CONST0, CONST1, IDENTITY, FLIP = range(4)


def _encode(nodes: np.ndarray, causation: np.ndarray) -> np.ndarray:
    # node values as binary digits, X most significant, causation last
    code = np.zeros(nodes.shape[0], dtype=np.int64)
    for column in nodes.T:
        code = code * 2 + column
    return code * 2 + np.asarray(causation, dtype=np.int64)


@dataclass(frozen=True)
class SimulationOutcome:
    """
    Counts of simulated units.

    Attributes:
        counts (np.ndarray): shape (2,) * (n + 1) + (2,); axes are X, M1, ..., Y and
            last the indicator that X affects Y.
        seed (int): seed the draws were derived from.
        samples (int): number of units; equals counts.sum().
    """

    counts: np.ndarray
    seed: int
    samples: int

    def __post_init__(self):
        if int(self.counts.sum()) != self.samples:
            raise PreconditionError(f"Counts sum to {int(self.counts.sum())}, expected {self.samples}")

    @property
    def n(self) -> int:
        return self.counts.ndim - 2

    @classmethod
    def from_samples(cls, nodes: np.ndarray, causation: np.ndarray, seed: int) -> "SimulationOutcome":
        """Builds counts from an (m, n+1) array of node values and an (m,) causation indicator."""
        nodes = np.asarray(nodes, dtype=np.int64)
        width = nodes.shape[1] + 1
        counts = np.bincount(_encode(nodes, causation), minlength=1 << width).reshape((2,) * width)
        return cls(counts=counts, seed=seed, samples=int(nodes.shape[0]))


@dataclass(frozen=True)
class EmpiricalEstimate:
    value: float
    standard_error: float
    support: int


@dataclass(frozen=True)
class ConditionalTest:
    later: int
    earlier: int
    given: int
    statistic: float
    dof: int
    p_value: float
    sparse_strata: Tuple[int, ...]


@dataclass(frozen=True)
class MarkovCheck:
    passed: bool
    inconclusive: bool
    significance: float
    tests: Tuple[ConditionalTest, ...] = field(default_factory=tuple)

    @property
    def statistic(self) -> float:
        return float(sum(t.statistic for t in self.tests))

    @property
    def min_p_value(self) -> Optional[float]:
        return min((t.p_value for t in self.tests), default=None)


@dataclass
class ChainSimulator:
    """
    Monte Carlo draws from the structural model of a mediation chain.

    Each unit gets X, then an independent response function per step
    (constant 0, constant 1, identity or flip) drawn with the probabilities
    fixed by the step law and its slack. Draws are made in blocks of
    block_size; block b uses a Philox stream seeded with (seed, b), so
    results depend only on the seed and not on workers.
    """

    logger: logging.Logger
    block_size: int = DEFAULT_BLOCK_SIZE
    workers: int = 1

    def _block(self, D: Decomposition, cumulative: np.ndarray, exposure_prob: float,
               seed: int, block: int, size: int) -> np.ndarray:
        generator = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, block])))
        # always the full block, so a unit's draws do not depend on the sample size
        uniforms = generator.random((D.n + 1, self.block_size))[:, :size]

        nodes = np.empty((size, D.n + 1), dtype=np.int64)
        nodes[:, 0] = uniforms[0] < exposure_prob
        transmits = np.ones(size, dtype=bool)
        for i in range(1, D.n + 1):
            kind = np.minimum(np.searchsorted(cumulative[i - 1], uniforms[i], side="right"), FLIP)
            parent = nodes[:, i - 1]
            nodes[:, i] = np.select(
                [kind == CONST0, kind == CONST1, kind == IDENTITY],
                [0, 1, parent],
                default=1 - parent,
            )
            transmits &= kind >= IDENTITY

        return np.bincount(_encode(nodes, transmits), minlength=1 << (D.n + 2))

    def simulate(self, D: Decomposition, A: SlackAssignment, samples: int, seed: int,
                 exposure_prob: float = 0.5) -> SimulationOutcome:
        if samples < 1:
            raise PreconditionError(f"samples must be at least 1, got {samples}")
        if D.n > MAX_SIMULATED_STEPS:
            raise PreconditionError(f"Simulation is limited to {MAX_SIMULATED_STEPS} steps, got {D.n}")
        if not (0.0 <= exposure_prob <= 1.0):
            raise PreconditionError(f"exposure_prob must lie in [0, 1], got {exposure_prob}")
        A.validate(D)

        cumulative = np.array([
            np.cumsum(response_distribution(step, xi).as_array())[:-1]
            for step, xi in zip(D.steps, A.xis)
        ])
        blocks = math.ceil(samples / self.block_size)
        sizes = [min(self.block_size, samples - b * self.block_size) for b in range(blocks)]

        def run(block: int) -> np.ndarray:
            return self._block(D, cumulative, exposure_prob, seed, block, sizes[block])

        self.logger.info(f"Simulating {samples} units of {D} in {blocks} block(s), seed {seed}")
        if self.workers > 1 and blocks > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                parts = list(pool.map(run, range(blocks)))
        else:
            parts = [run(b) for b in range(blocks)]

        counts = np.sum(parts, axis=0).reshape((2,) * (D.n + 2))
        return SimulationOutcome(counts=counts, seed=seed, samples=samples)


def _estimate(hits: float, support: int) -> EmpiricalEstimate:
    value = hits / support
    return EmpiricalEstimate(value=value, standard_error=math.sqrt(value * (1.0 - value) / support),
                             support=support)


def empirical_pc(outcome: SimulationOutcome, E: EvidencePattern) -> EmpiricalEstimate:
    """Share of units matching the evidence in which X affects Y."""
    if E.n != outcome.n:
        raise PreconditionError(f"Evidence '{E}' covers {E.n + 1} nodes, the simulation has {outcome.n + 1}")
    index = tuple(slice(None) if bit is None else bit for bit in (m.value_bit for m in E.marks))
    matching = outcome.counts[index]
    totals = matching.reshape(-1, 2).sum(axis=0)
    support = int(totals.sum())
    if support == 0:
        raise NullEventError(f"No simulated unit matches evidence '{E}'")
    return _estimate(float(totals[1]), support)


def empirical_causation_rate(outcome: SimulationOutcome) -> EmpiricalEstimate:
    totals = outcome.counts.reshape(-1, 2).sum(axis=0)
    return _estimate(float(totals[1]), outcome.samples)


def _conditional_test(nodes: np.ndarray, later: int, earlier: int, given: int) -> ConditionalTest:
    summed = tuple(axis for axis in range(nodes.ndim) if axis not in (earlier, given, later))
    # axes left in order earlier < given < later
    table = nodes.sum(axis=summed)
    statistic, dof, sparse = 0.0, 0, []
    for value in (0, 1):
        stratum = table[:, value, :]
        try:
            g, _, stratum_dof, expected = chi2_contingency(stratum, correction=False, lambda_="log-likelihood")
        except ValueError:
            sparse.append(value)
            continue
        if expected.min() < MIN_EXPECTED:
            sparse.append(value)
        statistic += g
        dof += stratum_dof
    p_value = float(chi2.sf(statistic, dof)) if dof > 0 else 1.0
    return ConditionalTest(later=later, earlier=earlier, given=given, statistic=float(statistic), dof=dof,
                           p_value=p_value, sparse_strata=tuple(sparse))


def markov_check(outcome: SimulationOutcome, significance: float = 0.01,
                 logger: Optional[logging.Logger] = None) -> MarkovCheck:
    """
    G-tests of M(i+1) independent of M(j) given M(i), for every j < i,
    summed over the strata of M(i), with a Bonferroni correction across
    tests. Strata with an expected count below 5 make the check
    inconclusive; a chain without mediators passes vacuously.
    """
    nodes = outcome.counts.sum(axis=-1)
    n = outcome.n
    tests: List[ConditionalTest] = [
        _conditional_test(nodes, later=i + 1, earlier=j, given=i)
        for i in range(1, n)
        for j in range(i)
    ]
    if not tests:
        return MarkovCheck(passed=True, inconclusive=False, significance=significance)

    threshold = significance / len(tests)
    passed = all(t.p_value >= threshold for t in tests)
    inconclusive = any(t.sparse_strata for t in tests)
    if logger is not None:
        if inconclusive:
            logger.warning(f"Markov check has sparse strata in {sum(bool(t.sparse_strata) for t in tests)} "
                           f"of {len(tests)} test(s); the decision is inconclusive")
        logger.info(f"Markov check over {len(tests)} test(s): {'pass' if passed else 'reject'} "
                    f"at level {significance}")
    return MarkovCheck(passed=passed, inconclusive=inconclusive, significance=significance, tests=tuple(tests))


