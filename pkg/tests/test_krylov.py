"""Tests for the GMRES driver."""

import numpy as np
import pytest

from core.errors import BreakdownError, ParameterError, ResourceCapError
from core.krylov import GmresOptions, gmres


def _dense(A):
    return lambda v: A @ v


@pytest.fixture()
def well_conditioned(rng):
    size = 40
    return np.eye(size) + 0.1 * rng.standard_normal((size, size)) / np.sqrt(size)


class TestGmresOptions:
    @pytest.mark.parametrize("kwargs", [{"tol": 0.0}, {"tol": -1.0}, {"maxit": 0},
                                        {"max_basis": 1}, {"side": "both"}])
    def test_rejects_invalid(self, kwargs):
        with pytest.raises(ParameterError):
            GmresOptions(**kwargs)

    def test_defaults(self):
        opts = GmresOptions()
        assert opts.tol == 1e-8
        assert opts.maxit is None
        assert opts.max_basis is None
        assert opts.side == "right"


class TestGmres:
    def test_diagonal_converges_in_size_steps(self):
        A = np.diag(np.arange(1.0, 6.0))
        b = np.ones(5)
        report = gmres(_dense(A), b, GmresOptions(tol=1e-12))
        assert report.converged
        assert report.iterations <= 5
        np.testing.assert_allclose(report.solution, b / np.arange(1.0, 6.0), rtol=1e-10)

    def test_nonsymmetric(self, well_conditioned, rng):
        b = rng.standard_normal(40)
        report = gmres(_dense(well_conditioned), b, GmresOptions(tol=1e-10))
        assert report.converged
        assert report.true_relres <= 1e-9
        np.testing.assert_allclose(report.solution, np.linalg.solve(well_conditioned, b),
                                   atol=1e-8)

    def test_history_starts_at_one_and_decreases(self, well_conditioned, rng):
        report = gmres(_dense(well_conditioned), rng.standard_normal(40))
        history = report.residual_history
        assert history[0] == 1.0
        assert len(history) == report.iterations + 1
        assert np.all(np.diff(history) <= 1e-14)
        assert report.final_relres == history[-1]

    def test_exact_preconditioner_takes_one_step(self, well_conditioned, rng):
        b = rng.standard_normal(40)
        inverse = np.linalg.inv(well_conditioned)
        report = gmres(_dense(well_conditioned), b, apply_pinv=_dense(inverse))
        assert report.converged
        assert report.iterations == 1
        np.testing.assert_allclose(report.solution, inverse @ b, atol=1e-10)

    def test_right_preconditioning_reports_original_residual(self, well_conditioned, rng):
        b = rng.standard_normal(40)
        diag = np.diag(np.diag(well_conditioned))
        report = gmres(_dense(well_conditioned), b, GmresOptions(tol=1e-10),
                       apply_pinv=lambda v: v / np.diag(diag))
        residual = np.linalg.norm(b - well_conditioned @ report.solution) / np.linalg.norm(b)
        assert residual == pytest.approx(report.true_relres, rel=1e-6, abs=1e-14)
        assert residual <= 1e-9

    def test_left_exact_preconditioner_takes_one_step(self, well_conditioned, rng):
        b = rng.standard_normal(40)
        inverse = np.linalg.inv(well_conditioned)
        report = gmres(_dense(well_conditioned), b, GmresOptions(side="left"),
                       apply_pinv=_dense(inverse))
        assert report.converged
        assert report.iterations == 1
        np.testing.assert_allclose(report.solution, inverse @ b, atol=1e-10)

    def test_left_preconditioning_stops_on_preconditioned_residual(self, well_conditioned, rng):
        b = rng.standard_normal(40)
        d = np.diag(well_conditioned)
        report = gmres(_dense(well_conditioned), b, GmresOptions(tol=1e-10, side="left"),
                       apply_pinv=lambda v: v / d)
        assert report.converged
        scaled = np.linalg.norm((b - well_conditioned @ report.solution) / d) / np.linalg.norm(b / d)
        assert scaled == pytest.approx(report.final_relres, rel=1e-4, abs=1e-13)
        assert report.true_relres <= 1e-8
        np.testing.assert_allclose(report.solution, np.linalg.solve(well_conditioned, b),
                                   atol=1e-8)

    def test_side_ignored_without_preconditioner(self, well_conditioned, rng):
        b = rng.standard_normal(40)
        right = gmres(_dense(well_conditioned), b, GmresOptions(side="right"))
        left = gmres(_dense(well_conditioned), b, GmresOptions(side="left"))
        assert left.iterations == right.iterations
        np.testing.assert_array_equal(left.solution, right.solution)

    def test_zero_rhs(self):
        report = gmres(_dense(np.eye(3)), np.zeros(3))
        assert report.converged
        assert report.iterations == 0
        np.testing.assert_array_equal(report.solution, np.zeros(3))
        assert report.true_relres == 0.0

    def test_maxit_stops_without_convergence(self):
        A = np.diag(np.arange(1.0, 11.0))
        report = gmres(_dense(A), np.ones(10), GmresOptions(tol=1e-14, maxit=2))
        assert not report.converged
        assert report.iterations == 2
        assert report.residual_history.size == 3

    def test_history_not_recorded(self):
        A = np.diag(np.arange(1.0, 6.0))
        report = gmres(_dense(A), np.ones(5), GmresOptions(record_residuals=False))
        assert report.residual_history.size == 1

    def test_without_reorthogonalization(self, well_conditioned, rng):
        b = rng.standard_normal(40)
        report = gmres(_dense(well_conditioned), b, GmresOptions(tol=1e-10, reorthogonalize=False))
        assert report.converged
        assert report.true_relres <= 1e-9

    def test_basis_grows_past_initial_capacity(self, rng):
        size = 150
        A = np.diag(np.linspace(1.0, 1e4, size)) + np.diag(np.full(size - 1, 0.5), -1)
        b = rng.standard_normal(size)
        report = gmres(_dense(A), b, GmresOptions(tol=1e-10))
        assert report.iterations > 64
        assert report.true_relres <= 1e-7

    def test_basis_cap(self):
        A = np.diag(np.arange(1.0, 11.0))
        with pytest.raises(ResourceCapError, match="basis vectors"):
            gmres(_dense(A), np.ones(10), GmresOptions(max_basis=2))

    def test_breakdown(self):
        A = np.array([[0.0, 1.0], [0.0, 0.0]])
        with pytest.raises(BreakdownError):
            gmres(_dense(A), np.array([1.0, 0.0]))

    def test_rejects_matrix_rhs(self):
        with pytest.raises(ParameterError):
            gmres(_dense(np.eye(2)), np.ones((2, 2)))
