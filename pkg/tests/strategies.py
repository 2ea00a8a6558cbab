"""Hypothesis strategies for transition laws and chains.

A law is drawn as a pair of conditionals p0 = P(Y=1|X=0), p1 = P(Y=1|X=1).
With u = p1 - 1/2 and v = p0 - 1/2 we have |tau| + |rho| = 2 max(|u|, |v|),
so keeping both conditionals margin/2 away from 0 and 1 keeps the law that
far inside the valid region.
"""
import hypothesis.strategies as st
from hypothesis import assume

from App.models.chain import Decomposition
from App.models.transition import TransitionMatrix, from_conditionals


def conditionals(margin: float = 0.0) -> st.SearchStrategy:
    edge = margin / 2.0
    return st.floats(edge, 1.0 - edge, allow_nan=False, allow_infinity=False)


@st.composite
def laws(
    draw,
    positive: bool = False,
    margin: float = 0.0,
    min_effect: float = 0.02,
    max_effect: float = 0.98,
) -> TransitionMatrix:
    """A valid law with min_effect <= |tau| <= max_effect (tau > 0 if positive)."""
    p0 = draw(conditionals(margin))
    p1 = draw(conditionals(margin))
    assume(min_effect <= abs(p1 - p0) <= max_effect)
    if positive and p1 < p0:
        p0, p1 = p1, p0
    return from_conditionals(p0, p1)


def chains(
    min_n: int = 1,
    max_n: int = 6,
    positive: bool = False,
    margin: float = 0.0,
    min_effect: float = 0.02,
) -> st.SearchStrategy:
    step = laws(positive=positive, margin=margin, min_effect=min_effect)
    return st.lists(step, min_size=min_n, max_size=max_n).map(lambda steps: Decomposition(tuple(steps)))


@st.composite
def slacks(draw, D: Decomposition) -> tuple:
    """One slack per step, inside [|tau_i|, 1 - |rho_i|]."""
    return tuple(
        draw(st.floats(abs(P.tau), max(abs(P.tau), 1.0 - abs(P.rho)), allow_nan=False))
        for P in D.steps
    )

