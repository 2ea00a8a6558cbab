from dataclasses import dataclass, field
from typing import NamedTuple, Sequence, Tuple

import numpy as np

from App.errors import InfeasibleSlackError, NullEventError, StructuralError
from App.models.chain import Decomposition
from App.models.transition import VALIDITY_TOLERANCE, TransitionMatrix, entry

# cell order inside PotentialOutcomeTable.cells
CELL_LABELS = ((0, 0), (0, 1), (1, 0), (1, 1))


class Interval(NamedTuple):
    lo: float
    hi: float


@dataclass(frozen=True)
class PotentialOutcomeTable:
    """
    Joint law of the potential outcomes (Y0, Y1) for a law P and slack xi.

    Attributes:
        base (TransitionMatrix): the interventional law the table is consistent with.
        xi (float): the slack, equal to Pr(Y0 != Y1), the probability of general causation.
        cells (Tuple[float, float, float, float]): Pr(Y0=y0, Y1=y1) ordered (0,0), (0,1), (1,0), (1,1).

    Methods:
        cell(y0, y1) -> float
        general_causation -> float
        margins() -> np.ndarray: rows Pr(Y_x = y), which reproduce the rows of P.
    """

    base: TransitionMatrix
    xi: float
    cells: Tuple[float, float, float, float] = field(init=False)

    def __post_init__(self):
        tau, rho, xi = self.base.tau, self.base.rho, float(self.xi)
        raw = (
            0.5 * (1.0 - rho - xi),
            0.5 * (xi + tau),
            0.5 * (xi - tau),
            0.5 * (1.0 + rho - xi),
        )
        for label, value in zip(CELL_LABELS, raw):
            if value < -VALIDITY_TOLERANCE:
                raise InfeasibleSlackError(
                    f"Slack xi={xi!r} is infeasible for P={self.base}: "
                    f"cell Pr(Y0={label[0]}, Y1={label[1]}) = {value!r} < 0; feasible range is {xi_bounds(self.base)}")
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "cells", tuple(max(0.0, value) for value in raw))

    def cell(self, y0: int, y1: int) -> float:
        return self.cells[CELL_LABELS.index((y0, y1))]

    @property
    def general_causation(self) -> float:
        return self.cell(0, 1) + self.cell(1, 0)

    def margins(self) -> np.ndarray:
        grid = np.array(self.cells).reshape(2, 2)
        # row x, column y: Pr(Y_x = y)
        return np.array([grid.sum(axis=1), grid.sum(axis=0)])


@dataclass(frozen=True)
class ResponseDistribution:
    """Table-1 cells read as canonical response functions of the parent value."""

    const0: float
    const1: float
    identity: float
    flip: float

    def as_array(self) -> np.ndarray:
        return np.array([self.const0, self.const1, self.identity, self.flip])


def xi_bounds(P: TransitionMatrix) -> Interval:
    lo, hi = abs(P.tau), 1.0 - abs(P.rho)
    return Interval(lo, max(lo, hi))


def xi_bounds_decomposed(D: Decomposition) -> Interval:
    lo = abs(D.composed().tau)
    return Interval(lo, max(lo, D.xi_upper()))


def table_at(P: TransitionMatrix, xi: float) -> PotentialOutcomeTable:
    return PotentialOutcomeTable(base=P, xi=xi)


def _conditioning_entry(P: TransitionMatrix, x: int, y: int) -> float:
    value = entry(P, x, y)
    if value <= VALIDITY_TOLERANCE:
        raise NullEventError(f"Pr(Y={y} | X<-{x}) = 0 under P={P}; cannot condition on X={x}, Y={y}")
    return value


def pc_at(P: TransitionMatrix, xi: float, x: int, y: int) -> float:
    """Probability that X=x caused Y=y given both were observed, for the world with slack xi."""
    table = table_at(P, xi)
    denominator = _conditioning_entry(P, x, y)
    numerator = table.cell(1 - y, y) if x == 1 else table.cell(y, 1 - y)
    return min(1.0, max(0.0, numerator / denominator))


def response_distribution(P: TransitionMatrix, xi: float) -> ResponseDistribution:
    table = table_at(P, xi)
    return ResponseDistribution(
        const0=table.cell(0, 0),
        const1=table.cell(1, 1),
        identity=table.cell(0, 1),
        flip=table.cell(1, 0),
    )


def causation_probability(D: Decomposition, xis: Sequence[float]) -> float:
    """Pr(X affects Y) along a chain: the product of per-step slacks."""
    if len(xis) != D.n:
        raise StructuralError(f"Expected {D.n} slacks, got {len(xis)}")
    for step, xi in zip(D.steps, xis):
        table_at(step, xi)
    return float(np.prod(xis))
