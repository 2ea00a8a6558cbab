import itertools
from functools import reduce

import numpy as np
import pytest
from hypothesis import given, settings

from App.bounds.engine import evidence_bounds
from App.errors import NullEventError, StructuralError, UnsupportedError
from App.models.chain import Decomposition, EvidencePattern, Mark, normalize_labels, segments
from App.models.transition import TransitionMatrix
from tests.strategies import chains


def all_patterns(n, x=None, y=None):
    ends = (0, 1)
    for first in ends if x is None else (x,):
        for last in ends if y is None else (y,):
            for inner in itertools.product("01?", repeat=n - 1):
                yield EvidencePattern.parse(f"{first}{''.join(inner)}{last}")


class TestDecomposition:

    def test_needs_a_step(self):
        with pytest.raises(StructuralError):
            Decomposition(())

    def test_rejects_foreign_steps(self):
        with pytest.raises(StructuralError):
            Decomposition(((0.5, 0.0),))

    @given(D=chains(1, 10, min_effect=0.0))
    def test_composed_matches_matrix_products(self, D):
        product = reduce(np.matmul, [step.as_matrix() for step in D.steps])
        np.testing.assert_allclose(D.composed().as_matrix(), product, rtol=0, atol=1e-12)

    @given(D=chains(5, 5))
    def test_composed_closed_form(self, D):
        taus = np.array([s.tau for s in D.steps])
        rhos = np.array([s.rho for s in D.steps])
        rho = sum(rhos[i] * np.prod(taus[i + 1:]) for i in range(5))
        assert D.composed().tau == pytest.approx(np.prod(taus), abs=1e-12)
        assert D.composed().rho == pytest.approx(rho, abs=1e-12)

    def test_homogeneous(self):
        step = TransitionMatrix(0.5, 0.1)
        D = Decomposition.homogeneous(step, 3)
        assert D.n == 3
        assert D.is_homogeneous()
        assert not Decomposition.from_pairs([(0.5, 0.1), (0.5, 0.0)]).is_homogeneous()


class TestEvidencePattern:

    @pytest.mark.parametrize("text", ["11", "1?01", "0??1", "10101"])
    def test_round_trip(self, text):
        assert EvidencePattern.parse(text).format() == text

    @pytest.mark.parametrize("text", ["1", "?1", "1?", "1x1", ""])
    def test_rejects_malformed(self, text):
        with pytest.raises(StructuralError):
            EvidencePattern.parse(text)

    def test_accessors(self):
        E = EvidencePattern.parse("1?0?1")
        assert (E.n, E.x, E.y) == (4, 1, 1)
        assert E.observed_indices() == [0, 2, 4]
        assert E.has_observed_mediator()
        assert not EvidencePattern.unobserved(4).has_observed_mediator()
        assert EvidencePattern.unobserved(3, 0, 1).format() == "0??1"
        assert EvidencePattern.from_bits([1, None, 0]).marks == (Mark.ONE, Mark.UNOBSERVED, Mark.ZERO)


class TestSegments:

    def test_unobserved_mediators(self):
        D = Decomposition.from_pairs([(0.5, 0.0), (0.5, 0.0)])
        parts = segments(D, EvidencePattern.parse("1?1"))
        assert len(parts) == 1
        assert len(parts[0].inner_steps) == 2
        assert parts[0].law.tau == pytest.approx(0.25)

    def test_all_observed(self):
        D = Decomposition.from_pairs([(0.5, 0.0), (0.5, 0.0)])
        parts = segments(D, EvidencePattern.parse("101"))
        assert [(p.start_value, p.end_value) for p in parts] == [(1, 0), (0, 1)]
        assert all(len(p.inner_steps) == 1 for p in parts)

    @given(D=chains(4, 4))
    def test_partition(self, D):
        parts = segments(D, EvidencePattern.parse("1?0?1"))
        assert [(p.start_index, p.end_index, p.start_value, p.end_value) for p in parts] == [(0, 2, 1, 0), (2, 4, 0, 1)]
        assert sum((p.inner_steps for p in parts), ()) == D.steps
        assert parts[0].xi_upper == pytest.approx((1 - abs(D.steps[0].rho)) * (1 - abs(D.steps[1].rho)))

    def test_length_mismatch(self):
        D = Decomposition.from_pairs([(0.5, 0.0), (0.5, 0.0)])
        with pytest.raises(StructuralError):
            segments(D, EvidencePattern.parse("1??1"))


class TestNormalizeLabels:

    def test_example(self):
        D = Decomposition.from_pairs([(-0.5, 0.2), (-0.4, 0.0)])
        N, E, flipped = normalize_labels(D, EvidencePattern.parse("111"))
        assert [(s.tau, s.rho) for s in N.steps] == [pytest.approx((0.5, -0.2)), pytest.approx((0.4, 0.0))]
        assert flipped == (1,)
        assert E.format() == "101"
        assert N.composed().tau == pytest.approx(D.composed().tau)
        assert N.composed().rho == pytest.approx(D.composed().rho)

    @given(D=chains(3, 3, positive=True))
    def test_positive_chain_unchanged(self, D):
        E = EvidencePattern.parse("1?01")
        N, F, flipped = normalize_labels(D, E)
        assert N == D
        assert F == E
        assert flipped == ()

    def test_zero_effect(self):
        with pytest.raises(UnsupportedError):
            normalize_labels(Decomposition.from_pairs([(0.0, 0.3)]), EvidencePattern.parse("11"))

    @given(D=chains(1, 5))
    def test_all_steps_positive_after(self, D):
        N, _, _ = normalize_labels(D, EvidencePattern.unobserved(D.n))
        assert all(step.tau > 0.0 for step in N.steps)

    @settings(max_examples=60)
    @given(D=chains(1, 4, margin=0.02))
    def test_bounds_invariant(self, D):
        for E in all_patterns(D.n):
            N, F, _ = normalize_labels(D, E)
            try:
                before = evidence_bounds(D, E)
            except NullEventError:
                with pytest.raises(NullEventError):
                    evidence_bounds(N, F)
                continue
            after = evidence_bounds(N, F)
            assert after.lo == pytest.approx(before.lo, abs=1e-12)
            assert after.hi == pytest.approx(before.hi, abs=1e-12)
