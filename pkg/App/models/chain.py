from dataclasses import dataclass, field
from enum import Enum
from functools import reduce
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from App.errors import StructuralError, UnsupportedError
from App.models.transition import TransitionMatrix, compose


class Mark(Enum):
    ZERO = "0"
    ONE = "1"
    UNOBSERVED = "?"

    @property
    def value_bit(self) -> Optional[int]:
        if self is Mark.UNOBSERVED:
            return None
        return int(self.value)

    def toggled(self) -> "Mark":
        if self is Mark.ZERO:
            return Mark.ONE
        if self is Mark.ONE:
            return Mark.ZERO
        return self


@dataclass(frozen=True)
class Decomposition:
    """
    A complete mediation chain X = M0 -> M1 -> ... -> Mn = Y.

    Attributes:
        steps (Tuple[TransitionMatrix, ...]): per-step laws, step i maps M(i-1) to M(i).

    Methods:
        composed() -> TransitionMatrix:
            Overall law, the left-to-right fold of compose.

        xi_upper() -> float:
            Product of (1 - |rho_i|), the decomposed upper limit of the slack.

        homogeneous(step, n) -> Decomposition:
            n copies of the same step.
    """

    steps: Tuple[TransitionMatrix, ...]

    def __post_init__(self):
        steps = tuple(self.steps)
        if not steps:
            raise StructuralError("A decomposition needs at least one step")
        for step in steps:
            if not isinstance(step, TransitionMatrix):
                raise StructuralError(f"Decomposition steps must be TransitionMatrix values, got {step!r}")
        object.__setattr__(self, "steps", steps)

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[float, float]]) -> "Decomposition":
        return cls(tuple(TransitionMatrix(tau, rho) for tau, rho in pairs))

    @classmethod
    def homogeneous(cls, step: TransitionMatrix, n: int) -> "Decomposition":
        return cls((step,) * n)

    @property
    def n(self) -> int:
        return len(self.steps)

    def composed(self) -> TransitionMatrix:
        return reduce(compose, self.steps)

    def xi_upper(self) -> float:
        return float(np.prod([1.0 - abs(step.rho) for step in self.steps]))

    def is_homogeneous(self, tolerance: float = 1e-12) -> bool:
        first = self.steps[0]
        return all(abs(s.tau - first.tau) <= tolerance and abs(s.rho - first.rho) <= tolerance
                   for s in self.steps)

    def __str__(self) -> str:
        return "|".join(str(step) for step in self.steps)


@dataclass(frozen=True)
class EvidencePattern:
    """Per-node observation record for X = M0, M1, ..., Mn = Y, written as a string over {0, 1, ?}."""

    marks: Tuple[Mark, ...]

    def __post_init__(self):
        marks = tuple(self.marks)
        if len(marks) < 2:
            raise StructuralError(f"An evidence pattern covers at least X and Y, got {len(marks)} node(s)")
        if marks[0] is Mark.UNOBSERVED or marks[-1] is Mark.UNOBSERVED:
            raise StructuralError("X and Y must be observed in every evidence pattern")
        object.__setattr__(self, "marks", marks)

    @classmethod
    def parse(cls, text: str) -> "EvidencePattern":
        try:
            return cls(tuple(Mark(ch) for ch in text.strip()))
        except ValueError as exc:
            raise StructuralError(f"Evidence pattern {text!r} must use only '0', '1' and '?'") from exc

    @classmethod
    def unobserved(cls, n: int, x: int = 1, y: int = 1) -> "EvidencePattern":
        return cls((Mark(str(x)),) + (Mark.UNOBSERVED,) * (n - 1) + (Mark(str(y)),))

    @classmethod
    def from_bits(cls, bits: Sequence[Optional[int]]) -> "EvidencePattern":
        return cls(tuple(Mark.UNOBSERVED if b is None else Mark(str(int(b))) for b in bits))

    def format(self) -> str:
        return "".join(mark.value for mark in self.marks)

    def __str__(self) -> str:
        return self.format()

    @property
    def n(self) -> int:
        return len(self.marks) - 1

    @property
    def x(self) -> int:
        return self.marks[0].value_bit

    @property
    def y(self) -> int:
        return self.marks[-1].value_bit

    def observed_indices(self) -> List[int]:
        return [i for i, mark in enumerate(self.marks) if mark is not Mark.UNOBSERVED]

    def has_observed_mediator(self) -> bool:
        return len(self.observed_indices()) > 2


@dataclass(frozen=True)
class Segment:
    """
    The stretch of chain between two consecutive observed nodes.

    Attributes:
        start_index, end_index (int): node indices of the observed endpoints.
        start_value, end_value (int): observed values at those nodes.
        inner_steps (Tuple[TransitionMatrix, ...]): the steps spanned by the segment.
        law (TransitionMatrix): composed law of the inner steps.
        xi_upper (float): product of (1 - |rho_i|) over the inner steps.
    """

    start_index: int
    end_index: int
    start_value: int
    end_value: int
    inner_steps: Tuple[TransitionMatrix, ...]
    law: TransitionMatrix = field(init=False)
    xi_upper: float = field(init=False)

    def __post_init__(self):
        decomposition = Decomposition(self.inner_steps)
        object.__setattr__(self, "inner_steps", decomposition.steps)
        object.__setattr__(self, "law", decomposition.composed())
        object.__setattr__(self, "xi_upper", decomposition.xi_upper())

    def decomposition(self) -> Decomposition:
        return Decomposition(self.inner_steps)

    def label(self) -> str:
        return f"M{self.start_index}={self.start_value} -> M{self.end_index}={self.end_value}"


def check_lengths(D: Decomposition, E: EvidencePattern) -> None:
    if E.n != D.n:
        raise StructuralError(
            f"Evidence pattern '{E}' covers {E.n + 1} nodes but the chain has {D.n} steps ({D.n + 1} nodes)")


def segments(D: Decomposition, E: EvidencePattern) -> List[Segment]:
    check_lengths(D, E)
    observed = E.observed_indices()
    return [
        Segment(
            start_index=start,
            end_index=end,
            start_value=E.marks[start].value_bit,
            end_value=E.marks[end].value_bit,
            inner_steps=D.steps[start:end],
        )
        for start, end in zip(observed, observed[1:])
    ]


def normalize_labels(D: Decomposition, E: EvidencePattern) -> Tuple[Decomposition, EvidencePattern, Tuple[int, ...]]:
    """
    Relabels nodes so every step has a positive effect.

    Flipping node i swaps the columns of step i, (tau, rho) -> (-tau, -rho),
    and the rows of step i+1, (tau, rho) -> (-tau, rho). Mediators are
    flipped greedily from the left; Y is flipped last when the overall
    effect is negative. X is never flipped. Returns the relabelled chain,
    the relabelled pattern and the flipped node indices.
    """
    check_lengths(D, E)
    if any(step.tau == 0.0 for step in D.steps):
        raise UnsupportedError("Cannot normalize labels: a step has zero effect, its sign is undefined")

    steps = list(D.steps)
    marks = list(E.marks)
    flipped: List[int] = []
    for i in range(1, D.n + 1):
        if flipped and flipped[-1] == i - 1:
            steps[i - 1] = TransitionMatrix(-steps[i - 1].tau, steps[i - 1].rho)
        if steps[i - 1].tau < 0.0:
            steps[i - 1] = TransitionMatrix(-steps[i - 1].tau, -steps[i - 1].rho)
            marks[i] = marks[i].toggled()
            flipped.append(i)

    return Decomposition(tuple(steps)), EvidencePattern(tuple(marks)), tuple(flipped)
