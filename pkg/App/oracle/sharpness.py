import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from App.bounds.engine import BoundsResult, evidence_bounds
from App.errors import InfeasibleSlackError, NullEventError, PreconditionError, StructuralError
from App.models.chain import Decomposition, EvidencePattern, segments
from App.models.counterfactual import xi_bounds
from App.models.transition import VALIDITY_TOLERANCE, entry

MAX_ORACLE_STEPS = 8
SHARPNESS_TOLERANCE = 1e-10


@dataclass(frozen=True)
class SlackAssignment:
    """One slack per step of a chain; the chain's slack is their product."""

    xis: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "xis", tuple(float(x) for x in self.xis))

    @classmethod
    def lower(cls, D: Decomposition) -> "SlackAssignment":
        return cls(tuple(xi_bounds(step).lo for step in D.steps))

    @classmethod
    def upper(cls, D: Decomposition) -> "SlackAssignment":
        return cls(tuple(xi_bounds(step).hi for step in D.steps))

    def validate(self, D: Decomposition) -> None:
        if len(self.xis) != D.n:
            raise StructuralError(f"Expected {D.n} slacks, got {len(self.xis)}")
        for i, (step, xi) in enumerate(zip(D.steps, self.xis), start=1):
            lo, hi = xi_bounds(step)
            if xi < lo - VALIDITY_TOLERANCE or xi > hi + VALIDITY_TOLERANCE:
                raise InfeasibleSlackError(f"Slack xi_{i}={xi!r} lies outside [{lo!r}, {hi!r}] for step {step}")


def _pc_rows(D: Decomposition, E: EvidencePattern, xis: np.ndarray) -> np.ndarray:
    """PC for each row of a (m, n) array of slack assignments."""
    value = np.ones(xis.shape[0])
    for part in segments(D, E):
        denominator = entry(part.law, part.start_value, part.end_value)
        if denominator <= VALIDITY_TOLERANCE:
            raise NullEventError(f"Segment {part.label()} has probability 0 under {part.law}")
        sign = 1.0 if part.start_value == part.end_value else -1.0
        xi_segment = np.prod(xis[:, part.start_index:part.end_index], axis=1)
        value = value * (0.5 * (xi_segment + sign * part.law.tau) / denominator)
    return np.clip(value, 0.0, 1.0)


def pc_at_assignment(D: Decomposition, E: EvidencePattern, A: SlackAssignment) -> float:
    A.validate(D)
    return float(_pc_rows(D, E, np.array([A.xis]))[0])


def _slack_box(D: Decomposition) -> Tuple[np.ndarray, np.ndarray]:
    box = [xi_bounds(step) for step in D.steps]
    return np.array([b.lo for b in box]), np.array([b.hi for b in box])


def endpoint_assignments(D: Decomposition) -> np.ndarray:
    """All 2^n corners of the slack box, one row per corner."""
    lo, hi = _slack_box(D)
    corners = (np.arange(1 << D.n)[:, None] >> np.arange(D.n)) & 1
    return np.where(corners == 1, hi, lo)


@dataclass(frozen=True)
class SharpnessResult:
    passed: bool
    bounds: BoundsResult
    endpoint_min: float
    endpoint_max: float
    argmin: SlackAssignment
    argmax: SlackAssignment
    interior_min: Optional[float]
    interior_max: Optional[float]
    interior_violations: int


@dataclass
class SharpnessOracle:
    """
    Checks evidence bounds against brute force: the extremes of PC over
    the corners of the slack box must equal the bounds, and random interior
    assignments must fall inside them.

    Attributes:
        logger (logging.Logger): receives a line per check.
        interior_samples (int): random interior assignments per check.
        tolerance (float): absolute agreement required at the corners.
    """

    logger: logging.Logger
    interior_samples: int = 1000
    tolerance: float = SHARPNESS_TOLERANCE

    def check(self, D: Decomposition, E: EvidencePattern, seed: int = 0) -> SharpnessResult:
        if D.n > MAX_ORACLE_STEPS:
            raise PreconditionError(f"Endpoint enumeration is limited to {MAX_ORACLE_STEPS} steps, got {D.n}")
        bounds = evidence_bounds(D, E)

        corners = endpoint_assignments(D)
        values = _pc_rows(D, E, corners)
        low, high = int(np.argmin(values)), int(np.argmax(values))
        endpoint_min, endpoint_max = float(values[low]), float(values[high])
        passed = (abs(endpoint_min - bounds.lo) <= self.tolerance
                  and abs(endpoint_max - bounds.hi) <= self.tolerance)

        interior_min = interior_max = None
        violations = 0
        if self.interior_samples > 0:
            rng = np.random.default_rng(seed)
            lo, hi = _slack_box(D)
            samples = lo + rng.random((self.interior_samples, D.n)) * (hi - lo)
            inside = _pc_rows(D, E, samples)
            interior_min, interior_max = float(inside.min()), float(inside.max())
            violations = int(np.count_nonzero((inside < bounds.lo - self.tolerance)
                                              | (inside > bounds.hi + self.tolerance)))
            passed = passed and violations == 0

        if passed:
            self.logger.info(f"Sharpness check passed for {D} with evidence {E}: {bounds}")
        else:
            self.logger.warning(
                f"Sharpness check failed for {D} with evidence {E}: bounds {bounds}, "
                f"corners [{endpoint_min:.12g}, {endpoint_max:.12g}], {violations} interior violation(s)")

        return SharpnessResult(
            passed=passed,
            bounds=bounds,
            endpoint_min=endpoint_min,
            endpoint_max=endpoint_max,
            argmin=SlackAssignment(tuple(corners[low])),
            argmax=SlackAssignment(tuple(corners[high])),
            interior_min=interior_min,
            interior_max=interior_max,
            interior_violations=violations,
        )

    def check_all_patterns(self, D: Decomposition, x: int = 1, y: int = 1,
                           seed: int = 0) -> Sequence[Tuple[EvidencePattern, SharpnessResult]]:
        """Runs check for every observation pattern of the mediators, skipping impossible evidence."""
        results = []
        for mask in range(3 ** (D.n - 1)):
            bits = [x]
            for _ in range(D.n - 1):
                mask, digit = divmod(mask, 3)
                bits.append(None if digit == 2 else digit)
            bits.append(y)
            E = EvidencePattern.from_bits(bits)
            try:
                results.append((E, self.check(D, E, seed=seed)))
            except NullEventError:
                continue
        return results


def sharpness_check(D: Decomposition, E: EvidencePattern, interior_samples: int = 1000, seed: int = 0,
                    logger: Optional[logging.Logger] = None) -> SharpnessResult:
    oracle = SharpnessOracle(logger=logger or logging.getLogger(__name__), interior_samples=interior_samples)
    return oracle.check(D, E, seed=seed)
