import pytest

from App.bounds.baselines import (
    ComparisonRow,
    CovariateKind,
    comparison_row,
    covariate_construction,
    monotonicity_bound,
)
from App.bounds.engine import Method, simple_bounds
from App.bounds.extremal import Regime, extremal_table
from App.errors import UnsupportedError
from App.models.transition import TransitionMatrix

GRID = [(tau, rho) for tau in (0.1, 0.2, 0.3, 0.4, 0.6) for rho in (-0.3, -0.1, 0.0, 0.1, 0.3)
        if abs(rho) < 1.0 - tau]


class TestMonotonicityBound:

    @pytest.mark.parametrize("tau, rho, expected", [(1 / 3, 0.0, 0.5), (0.3, 0.7, 0.3), (0.0, 0.0, 0.0)])
    def test_examples(self, tau, rho, expected):
        result = monotonicity_bound(TransitionMatrix(tau, rho))
        assert result.lo == pytest.approx(expected, abs=1e-12)
        assert result.identified
        assert result.method is Method.MONOTONICITY

    @pytest.mark.parametrize("tau, rho", GRID)
    def test_equals_smallest_lower_bound(self, tau, rho):
        P = TransitionMatrix(tau, rho)
        report = extremal_table(P)
        assert monotonicity_bound(P).lo == pytest.approx(report.value(Regime.ALL_POSITIVE, "smallest", "lower"),
                                                         abs=1e-12)

    def test_prevention_is_unsupported(self):
        with pytest.raises(UnsupportedError):
            monotonicity_bound(TransitionMatrix(-0.2, 0.1))


class TestCovariateConstruction:

    def test_unobserved_positive_offset(self):
        result = covariate_construction(TransitionMatrix(0.2, 0.1), CovariateKind.UNOBSERVED_EXTREMAL)
        assert result.model.pi == pytest.approx(0.65)
        assert result.pc == pytest.approx(1.1 / 1.3)
        assert result.pc == pytest.approx(0.846154, abs=1e-6)

    def test_unobserved_negative_offset(self):
        result = covariate_construction(TransitionMatrix(0.2, -0.2), "unobserved_extremal")
        assert result.pc == pytest.approx(1.0)

    def test_observed(self):
        result = covariate_construction(TransitionMatrix(1 / 3, 0.0), CovariateKind.OBSERVED_IDENTIFIES_ONE)
        assert result.model.pi == pytest.approx(2 / 3)
        assert result.pc == pytest.approx(1.0)
        assert result.stratum_pc[1] == pytest.approx(1.0)
        assert result.stratum_pc[0] == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("tau, rho", GRID)
    @pytest.mark.parametrize("kind", list(CovariateKind))
    def test_mixture_identity(self, tau, rho, kind):
        P = TransitionMatrix(tau, rho)
        result = covariate_construction(P, kind)
        assert result.model.mixture_error(P) <= 1e-12
        assert 0.0 <= result.model.pi <= 1.0

    @pytest.mark.parametrize("tau, rho", GRID)
    def test_unobserved_attains_simple_upper_bound(self, tau, rho):
        P = TransitionMatrix(tau, rho)
        result = covariate_construction(P, CovariateKind.UNOBSERVED_EXTREMAL)
        assert result.pc == pytest.approx(simple_bounds(P, 1, 1).hi, abs=1e-12)

    @pytest.mark.parametrize("tau, rho", GRID)
    def test_observed_identifies_one(self, tau, rho):
        assert covariate_construction(TransitionMatrix(tau, rho), "observed_identifies_one").pc == pytest.approx(1.0)

    def test_needs_positive_effect(self):
        with pytest.raises(UnsupportedError):
            covariate_construction(TransitionMatrix(0.0, 0.2), CovariateKind.OBSERVED_IDENTIFIES_ONE)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            covariate_construction(TransitionMatrix(0.2, 0.1), "observed_everything")


class TestComparisonRow:

    def test_values(self):
        row = comparison_row(TransitionMatrix(0.2, 0.4))
        assert (row.sLB, row.sUB, row.mono) == pytest.approx((0.25, 0.5, 0.25))
        assert row.hom2LB == pytest.approx(0.269290, abs=1e-5)
        assert row.hom2UB == pytest.approx(0.461434, abs=1e-6)
        assert (row.homInfLB, row.homInfUB) == pytest.approx((0.299070, 0.447214), abs=1e-6)
        assert (row.best2Point, row.best2oLB) == pytest.approx((0.25, 0.4))
        assert row.covUnobserved == pytest.approx(0.5)

    def test_columns_follow_fields(self):
        row = comparison_row(TransitionMatrix(0.2, 0.1))
        assert ComparisonRow.columns()[:2] == ("tau", "rho")
        assert len(row.values()) == len(ComparisonRow.columns())

    def test_undefined_cells_are_empty(self):
        row = comparison_row(TransitionMatrix(0.3, 0.7))
        assert row.best2Point is None and row.best2oLB is None
        assert row.sLB == pytest.approx(0.3)

        row = comparison_row(TransitionMatrix(-0.2, 0.1))
        assert row.mono is None and row.hom2LB is None and row.covUnobserved is None
        assert row.sUB is not None
