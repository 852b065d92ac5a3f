import math

import numpy as np
import pytest

from app.core.exceptions import DomainError
from app.schemas.experiment_schema import LemmaCaseSchema
from app.services import timescale_service as ts


class TestIteratedFunctions:
    def test_iter_exp(self):
        assert ts.iter_exp(0, 2.5) == 2.5
        assert ts.iter_exp(2, 0.0) == pytest.approx(math.e)
        assert ts.iter_exp(4, 10.0) == math.inf

    def test_iter_log(self):
        assert ts.iter_log(1, math.e) == pytest.approx(1.0)
        assert ts.iter_log(2, ts.iter_exp(3, 0.0)) == pytest.approx(1.0, abs=1e-12)
        assert ts.iter_log(0, -5.0) == -5.0
        assert ts.iter_log(-1, 1.0) == pytest.approx(math.e)

    @pytest.mark.parametrize("m, t", [(1, 1.0), (1, 0.5), (2, 2.0), (3, 10.0)])
    def test_domain(self, m, t):
        with pytest.raises(DomainError):
            ts.iter_log(m, t)

    def test_series_matches_scalar(self):
        grid = np.geomspace(20.0, 1e4, 7)
        np.testing.assert_allclose(ts.iter_log_series(2, grid), [ts.iter_log(2, t) for t in grid])

    def test_series_domain(self):
        with pytest.raises(DomainError):
            ts.iter_log_series(2, [2.0, 10.0])

    def test_derivative_against_finite_difference(self):
        for m in (0, 1, 2, 3):
            t, h = 50.0, 1e-5
            fd = (ts.iter_log(m, t + h) - ts.iter_log(m, t - h)) / (2 * h)
            assert ts.iter_log_derivative(m, t) == pytest.approx(fd, rel=1e-7)


class TestScaleVector:
    def test_log_values(self):
        sv = ts.scale_vector(2, 100.0)
        assert sv.log_values == pytest.approx(
            (100.0, math.log(100.0), math.log(math.log(100.0)), math.log(math.log(math.log(100.0))))
        )
        assert sv.value(0) == 100.0
        assert sv.value(-1) == pytest.approx(math.exp(100.0))

    def test_exponential_entry_never_overflows(self):
        sv = ts.scale_vector(0, 1e4)
        assert sv.log_of(-1) == 1e4
        assert sv.value(-1) == math.inf

    def test_domain(self):
        with pytest.raises(DomainError):
            ts.scale_vector(1, 1.0)

    def test_log_monomial(self):
        sv = ts.scale_vector(1, 10.0)
        log_mag, phase = ts.log_monomial((0, -1, 0.5), (2.0, 0.0, 1.0), sv)
        assert log_mag == pytest.approx(-math.log(10.0) + 0.5 * math.log(math.log(10.0)))
        assert phase == pytest.approx(20.0 + math.log(math.log(10.0)))


class TestLemmaIntegral:
    def test_closed_form_without_decay(self):
        # λ = 0: ∫_0^t e^{-γ(t-τ)} dτ = (1 - e^{-γt})/γ
        value = ts.lemma_integral(0, 0.0, 2.0, 1.0, 3.0)
        assert value == pytest.approx((1 - math.exp(-6.0)) / 2, rel=1e-10)

    def test_zero_horizon(self):
        assert ts.lemma_integral(1, 1.0, 1.0, 2.0, 0.0) == 0.0

    def test_ratio_tends_to_inverse_gamma(self):
        max_ratio, rows = ts.integral_lemma_ratio(1, 1.0, 0.5, 2.0, [100.0, 1000.0])
        assert rows[-1][2] == pytest.approx(2.0, rel=0.01)
        assert max_ratio < 2.1

    def test_invalid_parameters(self):
        with pytest.raises(ValueError):
            ts.integral_lemma_ratio(0, 0.0, 1.0, 1.0, [1.0])

    def test_table_is_bounded(self):
        cases = [
            LemmaCaseSchema(m=0, lam=1, gamma=1, t_star=1),
            LemmaCaseSchema(m=1, lam=1, gamma=1, t_star=2),
            LemmaCaseSchema(m=1, lam=2, gamma=0.5, t_star=2),
        ]
        table = ts.lemma_integral_table(cases, ts.default_lemma_grid(1e3, 25))
        assert len(table.summaries) == 3
        assert len(table.rows) == 75
        assert all(s.bounded for s in table.summaries)
        assert all(abs(s.trend_slope) < ts.TREND_TOL for s in table.summaries)
