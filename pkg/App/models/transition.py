import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from App.errors import (
    ConstructionInfeasibleError,
    DomainError,
    PreconditionError,
    UndefinedSufficiencyError,
    UnsupportedError,
)

VALIDITY_TOLERANCE = 1e-12


@dataclass(frozen=True)
class TransitionMatrix:
    """
    A binary interventional law Pr(Y=y | X<-x) stored as (tau, rho).

    The four entries are derived views:

        P = | (1+tau-rho)/2   (1-tau+rho)/2 |
            | (1-tau-rho)/2   (1+tau+rho)/2 |

    Attributes:
        tau (float): average causal effect, Pr(Y=1|X<-1) - Pr(Y=1|X<-0).
        rho (float): prevalence offset, Pr(Y=1|X<-1) - Pr(Y=0|X<-0).

    Methods:
        entry(x, y) -> float:
            Returns the (x, y) entry of the matrix.

        as_matrix() -> np.ndarray:
            Returns the 2x2 row-stochastic array.

        is_degenerate -> bool:
            True when |tau| + |rho| = 1, i.e. one entry of the law is 1.

        sufficiency_for_zero() -> float:
            For tau < 0, the relative sufficiency of X=1 for Y=0.

    Violations of |tau| + |rho| <= 1 within VALIDITY_TOLERANCE are clamped
    onto the boundary; larger violations raise DomainError.
    """

    tau: float
    rho: float

    def __post_init__(self):
        tau = float(self.tau)
        rho = float(self.rho)
        if not (math.isfinite(tau) and math.isfinite(rho)):
            raise DomainError(f"Non-finite transition parameters: tau={tau}, rho={rho}")

        excess = abs(tau) + abs(rho) - 1.0
        if excess > VALIDITY_TOLERANCE:
            raise DomainError(f"Invalid transition: |tau|+|rho| = {abs(tau) + abs(rho)!r} exceeds 1 (tau={tau}, rho={rho})")
        if excess > 0.0:
            tau = math.copysign(min(abs(tau), 1.0), tau)
            rho = math.copysign(1.0 - abs(tau), rho)

        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "rho", rho)

    def entry(self, x: int, y: int) -> float:
        return entry(self, x, y)

    def as_matrix(self) -> np.ndarray:
        tau, rho = self.tau, self.rho
        return 0.5 * np.array(
            [[1.0 + tau - rho, 1.0 - tau + rho],
             [1.0 - tau - rho, 1.0 + tau + rho]]
        )

    @property
    def is_degenerate(self) -> bool:
        return abs(self.tau) + abs(self.rho) >= 1.0 - VALIDITY_TOLERANCE

    def sufficiency_for_zero(self) -> float:
        if self.tau >= 0.0:
            raise UnsupportedError("Relative sufficiency for Y=0 is only read for tau < 0")
        return -self.rho / (1.0 + self.tau)

    def __str__(self) -> str:
        return f"({self.tau:.9g}, {self.rho:.9g})"


@dataclass(frozen=True)
class DerivedMeasures:
    """sigma: relative sufficiency; gamma and delta: the single-step upper-bound ratios."""

    sigma: float
    gamma: float
    delta: float


def _check_bit(value: int, name: str) -> int:
    if value not in (0, 1):
        raise DomainError(f"{name} must be 0 or 1, got {value!r}")
    return int(value)


def _check_probability(value: float, name: str) -> float:
    value = float(value)
    if not (0.0 <= value <= 1.0):
        raise DomainError(f"{name} must lie in [0, 1], got {value!r}")
    return value


def from_conditionals(p1_given_do0: float, p1_given_do1: float) -> TransitionMatrix:
    p0 = _check_probability(p1_given_do0, "p1_given_do0")
    p1 = _check_probability(p1_given_do1, "p1_given_do1")
    return TransitionMatrix(tau=p1 - p0, rho=p1 - (1.0 - p0))


def from_matrix(rows: Sequence[Sequence[float]]) -> TransitionMatrix:
    """Builds the (tau, rho) form of a 2x2 row-stochastic matrix."""
    matrix = np.asarray(rows, dtype=float)
    if matrix.shape != (2, 2):
        raise DomainError(f"Expected a 2x2 matrix, got shape {matrix.shape}")
    if np.any(matrix < -VALIDITY_TOLERANCE) or np.any(matrix > 1.0 + VALIDITY_TOLERANCE):
        raise DomainError(f"Matrix entries must lie in [0, 1]: {matrix.tolist()}")
    if not np.allclose(matrix.sum(axis=1), 1.0, rtol=0.0, atol=VALIDITY_TOLERANCE):
        raise DomainError(f"Matrix rows must sum to 1: {matrix.tolist()}")
    return TransitionMatrix(tau=matrix[1, 1] - matrix[0, 1], rho=matrix[1, 1] - matrix[0, 0])


def entry(P: TransitionMatrix, x: int, y: int) -> float:
    x = _check_bit(x, "x")
    y = _check_bit(y, "y")
    tau, rho = P.tau, P.rho
    if x == 1:
        value = 0.5 * (1.0 + tau + rho) if y == 1 else 0.5 * (1.0 - tau - rho)
    else:
        value = 0.5 * (1.0 - tau + rho) if y == 1 else 0.5 * (1.0 + tau - rho)
    # rounding can push a zero entry a hair below 0
    return min(1.0, max(0.0, value))


def compose(a: TransitionMatrix, b: TransitionMatrix) -> TransitionMatrix:
    """Law of X -> Z when a is the law of X -> M and b the law of M -> Z."""
    result = TransitionMatrix(tau=a.tau * b.tau, rho=a.rho * b.tau + b.rho)
    assert np.allclose(a.as_matrix() @ b.as_matrix(), result.as_matrix(), rtol=0.0, atol=1e-12), \
        f"composition of {a} and {b} disagrees with the matrix product"
    return result


def power(P: TransitionMatrix, n: int) -> TransitionMatrix:
    """n-fold self-composition, evaluated in closed form."""
    if n < 1:
        raise PreconditionError(f"n must be a positive integer, got {n}")
    tau, rho = P.tau, P.rho
    if tau > 0.0:
        log_tau = math.log(tau)
        tau_n = math.exp(n * log_tau)
        # geometric sum 1 + tau + ... + tau^(n-1)
        geometric = -math.expm1(n * log_tau) / (1.0 - tau) if tau < 1.0 else float(n)
    elif tau == 0.0:
        tau_n = 0.0
        geometric = 1.0
    else:
        tau_n = tau ** n
        geometric = (1.0 - tau_n) / (1.0 - tau)
    return TransitionMatrix(tau=tau_n, rho=rho * geometric)


def homogeneous_step(P: TransitionMatrix, n: int) -> TransitionMatrix:
    """
    The constant one-step law Q with Q composed n times equal to P.

    tau' = tau^(1/n) and rho' = rho (1 - tau^(1/n)) / (1 - tau); the
    relative sufficiency of Q equals that of P.
    """
    if n < 1:
        raise PreconditionError(f"n must be a positive integer, got {n}")
    if not (0.0 < P.tau < 1.0):
        raise UnsupportedError(f"Homogeneous roots need 0 < tau < 1, got tau={P.tau}")

    scaled_log = math.log(P.tau) / n
    tau_step = math.exp(scaled_log)
    rho_step = P.rho * (-math.expm1(scaled_log)) / (1.0 - P.tau)
    try:
        return TransitionMatrix(tau=tau_step, rho=rho_step)
    except DomainError as exc:
        raise ConstructionInfeasibleError(f"No valid {n}-step root of {P}: {exc}") from exc


def measures(P: TransitionMatrix) -> DerivedMeasures:
    if P.tau >= 1.0:
        raise UndefinedSufficiencyError(f"sigma is undefined for tau >= 1 (got {P})")
    if P.tau < 0.0:
        raise UnsupportedError(f"sigma, gamma and delta are read for tau >= 0 (got {P})")

    sigma = min(1.0, max(-1.0, P.rho / (1.0 - P.tau)))
    abs_sigma = abs(sigma)
    gamma = (1.0 - abs_sigma) / (1.0 + abs_sigma)
    abs_rho = abs(P.rho)
    delta = (1.0 + P.tau - abs_rho) / (1.0 + P.tau + abs_rho)
    return DerivedMeasures(sigma=sigma, gamma=gamma, delta=delta)
