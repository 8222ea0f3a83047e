"""Tests for the L1 weight sequences and the alpha_n / beta_m scalings."""

import math
from decimal import Decimal, getcontext

import numpy as np
import pytest

from core.coeffs import (coeff_tables, l1_error_constant, scalings, space_weights,
                         time_weights)
from core.errors import ParameterError
from core.params import FractionalParams, Grid

ORDERS = [0.2, 0.5, 0.8]


def _decimal_weights(order: float, count: int) -> list[float]:
    getcontext().prec = 40
    power = Decimal(1) - Decimal(repr(order))
    return [float(Decimal(l + 1) ** power - Decimal(l) ** power) for l in range(count)]


class TestTimeWeights:
    @pytest.mark.parametrize("xi", ORDERS)
    def test_b_matches_high_precision(self, xi):
        b, _ = time_weights(xi, 50)
        np.testing.assert_allclose(b, _decimal_weights(xi, 50), rtol=1e-12)

    @pytest.mark.parametrize("xi", ORDERS)
    def test_leading_entries(self, xi):
        b, gamma = time_weights(xi, 8)
        assert b[0] == 1.0
        assert gamma[0] == 1.0
        assert gamma[1] == pytest.approx(2.0 ** (1.0 - xi) - 2.0)

    @pytest.mark.parametrize("xi", ORDERS)
    def test_b_positive_decreasing(self, xi):
        b, _ = time_weights(xi, 200)
        assert np.all(b > 0)
        assert np.all(np.diff(b) < 0)

    @pytest.mark.parametrize("xi", ORDERS)
    def test_gamma_negative_after_first(self, xi):
        _, gamma = time_weights(xi, 200)
        assert np.all(gamma[1:] < 0)

    @pytest.mark.parametrize("xi", ORDERS)
    def test_partial_sums_telescope(self, xi):
        b, gamma = time_weights(xi, 300)
        for k in (0, 1, 17, 150, 299):
            assert math.fsum(gamma[:k + 1]) == pytest.approx(b[k], rel=1e-12, abs=1e-15)

    def test_lengths(self):
        b, gamma = time_weights(0.3, 13)
        assert b.shape == gamma.shape == (13,)

    @pytest.mark.parametrize("bad", [0.0, 1.0, -0.1, 1.5])
    def test_rejects_order_outside_unit_interval(self, bad):
        with pytest.raises(ParameterError, match="xi"):
            time_weights(bad, 4)

    @pytest.mark.parametrize("bad", [0, -3])
    def test_rejects_empty_sequence(self, bad):
        with pytest.raises(ParameterError):
            time_weights(0.5, bad)


class TestSpaceWeights:
    @pytest.mark.parametrize("eta", ORDERS)
    def test_delta_asymptotics(self, eta):
        _, delta = space_weights(eta, 10_001)
        k = 10_000
        ratio = delta[k] * k ** (1.0 + eta) / (eta * (eta - 1.0))
        assert 0.98 <= ratio <= 1.02

    @pytest.mark.parametrize("xi", ORDERS)
    def test_gamma_asymptotics(self, xi):
        _, gamma = time_weights(xi, 10_001)
        k = 10_000
        ratio = gamma[k] * k ** (1.0 + xi) / (xi * (xi - 1.0))
        assert 0.98 <= ratio <= 1.02

    def test_same_formula_as_time(self):
        d, delta = space_weights(0.4, 20)
        b, gamma = time_weights(0.4, 20)
        np.testing.assert_array_equal(d, b)
        np.testing.assert_array_equal(delta, gamma)

    def test_rejects_bad_eta(self):
        with pytest.raises(ParameterError, match="eta"):
            space_weights(1.0, 4)


class TestScalings:
    def test_values(self):
        params = FractionalParams(xi=0.5, eta=0.5)
        grid = Grid(m=15, n=16)
        alpha_n, beta_m = scalings(params, grid)
        assert alpha_n == pytest.approx((1 / 16) ** 0.5 * math.gamma(1.5))
        assert beta_m == pytest.approx((1 / 16) ** 0.5 * math.gamma(1.5))

    def test_rejects_mismatched_horizon(self):
        with pytest.raises(ParameterError, match="T"):
            scalings(FractionalParams(xi=0.5, eta=0.5, T=2.0), Grid(4, 4, T=1.0))

    def test_coeff_tables_bundle(self):
        params = FractionalParams(xi=0.2, eta=0.8)
        grid = Grid(m=7, n=9)
        tables = coeff_tables(params, grid)
        assert tables.b.shape == tables.gamma.shape == (9,)
        assert tables.d.shape == tables.delta.shape == (7,)
        assert (tables.alpha_n, tables.beta_m) == scalings(params, grid)


class TestErrorConstant:
    @pytest.mark.parametrize("order", ORDERS)
    def test_positive(self, order):
        assert l1_error_constant(order) > 0

    def test_closed_form(self):
        expected = (0.25 + 0.5 / (0.5 * 1.5)) / (2 * math.gamma(0.5))
        assert l1_error_constant(0.5) == pytest.approx(expected)

    def test_rejects_bad_order(self):
        with pytest.raises(ParameterError):
            l1_error_constant(1.0)
