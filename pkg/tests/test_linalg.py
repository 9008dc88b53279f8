from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from subspace_update.exceptions import NoConvergenceError, SingularMatrixError
from subspace_update.linalg import (
    EPS,
    orthogonal_residual,
    rank_one_accumulate,
    small_svd,
    solve,
    solve_transposed,
)

from .conftest import random_stiefel


class TestRankOneAccumulate:
    def test_single_entry(self):
        out = rank_one_accumulate(np.eye(2), np.array([1.0, 0.0]), np.array([0.0, 1.0]))
        np.testing.assert_array_equal(out, [[1.0, 1.0], [0.0, 1.0]])

    def test_outer_product(self):
        out = rank_one_accumulate(np.zeros((2, 2)), np.array([1.0, 2.0]), np.array([3.0, 4.0]))
        np.testing.assert_array_equal(out, [[3.0, 4.0], [6.0, 8.0]])

    def test_zero_scale(self, rng):
        A = rng.standard_normal((4, 3))
        out = rank_one_accumulate(A, rng.standard_normal(4), rng.standard_normal(3), scale=0.0)
        np.testing.assert_array_equal(out, A)

    def test_does_not_modify_input(self, rng):
        A = rng.standard_normal((3, 2))
        A0 = A.copy()
        rank_one_accumulate(A, np.ones(3), np.ones(2))
        np.testing.assert_array_equal(A, A0)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            rank_one_accumulate(np.eye(2), np.ones(3), np.ones(2))

    @given(
        st.lists(st.integers(-2**20, 2**20), min_size=6, max_size=6),
        st.lists(st.integers(-2**10, 2**10), min_size=3, max_size=3),
        st.lists(st.integers(-2**10, 2**10), min_size=2, max_size=2),
        st.integers(-8, 8),
    )
    def test_exact_on_small_integers(self, A, x, y, scale):
        A = np.array(A, dtype=float).reshape(3, 2)
        x, y = np.array(x, float), np.array(y, float)
        out = rank_one_accumulate(A, x, y, float(scale))
        np.testing.assert_array_equal(out, A + scale * np.outer(x, y))

    @settings(max_examples=50)
    @given(st.integers(0, 2**32 - 1))
    def test_rounding_bound(self, seed):
        r = np.random.default_rng(seed)
        A, x, y = r.standard_normal((3, 4)), r.standard_normal(3), r.standard_normal(4)
        s = float(r.standard_normal())
        out = rank_one_accumulate(A, x, y, s)
        for i in range(3):
            for j in range(4):
                exact = Fraction(A[i, j]) + Fraction(s) * Fraction(x[i]) * Fraction(y[j])
                err = abs(Fraction(out[i, j]) - exact)
                # one rounding each in s*y, x*(s*y) and the sum
                bound = 3 * EPS * (abs(A[i, j]) + abs(s * x[i] * y[j]))
                assert float(err) <= bound


class TestOrthogonalResidual:
    def test_orthogonal_input(self):
        q, nrm = orthogonal_residual(np.array([[1.0], [0.0]]), np.array([0.0, 1.0]))
        np.testing.assert_array_equal(q, [0.0, 1.0])
        assert nrm == 1.0

    def test_in_range_input(self):
        q, nrm = orthogonal_residual(np.array([[1.0], [0.0]]), np.array([1.0, 0.0]))
        np.testing.assert_array_equal(q, [0.0, 0.0])
        assert nrm == 0.0

    def test_removes_first_coordinate(self):
        U = np.array([[1.0], [0.0], [0.0]])
        q, nrm = orthogonal_residual(U, np.ones(3))
        np.testing.assert_array_equal(q, [0.0, 1.0, 1.0])
        assert nrm == pytest.approx(np.sqrt(2.0), rel=1e-15)

    def test_coefficients(self, rng):
        U = random_stiefel(rng, 50, 4)
        a = rng.standard_normal(50)
        q, nrm, c = orthogonal_residual(U, a, return_coeffs=True)
        np.testing.assert_allclose(c, U.T @ a, atol=1e-14)
        np.testing.assert_allclose(U @ c + q, a, atol=1e-13)

    @pytest.mark.parametrize("n,p", [(10, 3), (200, 20), (2000, 50)])
    def test_orthogonality_random(self, rng, n, p):
        U = random_stiefel(rng, n, p)
        for _ in range(5):
            a = rng.standard_normal(n)
            q, _ = orthogonal_residual(U, a)
            assert np.max(np.abs(U.T @ q)) <= 1e-12 * np.linalg.norm(a)

    @pytest.mark.parametrize("offset", [1e-3, 1e-6, 1e-9])
    def test_second_pass_for_nearly_dependent(self, rng, offset):
        # a single classical pass leaves |U^T q| ~ eps ||a||, far above eps ||q||
        U = random_stiefel(rng, 300, 10)
        a = U @ rng.standard_normal(10) + offset * rng.standard_normal(300)
        q, nrm = orthogonal_residual(U, a)
        assert np.max(np.abs(U.T @ q)) <= 1e-12 * np.linalg.norm(a)
        assert np.max(np.abs(U.T @ q)) <= 1e-13 * nrm


class TestSolveTransposed:
    def test_identity(self):
        np.testing.assert_array_equal(solve_transposed(np.eye(2), np.array([1.0, 2.0])), [-1.0, -2.0])

    def test_diagonal(self):
        W = np.diag([2.0, 4.0])
        np.testing.assert_array_equal(solve_transposed(W, np.array([2.0, 4.0])), [-1.0, -1.0])

    @pytest.mark.parametrize("upper", [False, True])
    def test_triangular(self, upper):
        W = np.array([[1.0, 1.0], [0.0, 1.0]])
        x = solve_transposed(W, np.array([1.0, 1.0]), upper=upper)
        np.testing.assert_array_equal(x, [-1.0, 0.0])
        np.testing.assert_array_equal(W.T @ x, [-1.0, -1.0])

    def test_singular(self):
        with pytest.raises(SingularMatrixError):
            solve_transposed(np.array([[1.0, 2.0], [2.0, 4.0]]), np.ones(2))
        with pytest.raises(SingularMatrixError):
            solve_transposed(np.zeros((3, 3)), np.ones(3))
        with pytest.raises(SingularMatrixError):
            solve_transposed(np.array([[1.0, 1.0], [0.0, 0.0]]), np.ones(2), upper=True)

    def test_pivoting_needed(self):
        W = np.array([[0.0, 1.0], [1.0, 0.0]])
        x = solve_transposed(W, np.array([3.0, 5.0]))
        np.testing.assert_array_equal(x, [-5.0, -3.0])

    @pytest.mark.parametrize("p", [1, 5, 20, 50])
    def test_residual_random(self, rng, p):
        for _ in range(10):
            W = rng.standard_normal((p, p)) + 2 * np.sqrt(p) * np.eye(p)
            b = rng.standard_normal(p)
            x = solve_transposed(W, b)
            kappa = np.linalg.cond(W)
            assert np.linalg.norm(W.T @ x + b) <= 1e-10 * kappa * np.linalg.norm(b)
            R = np.triu(W)
            xr = solve_transposed(R, b, upper=True)
            assert np.linalg.norm(R.T @ xr + b) <= 1e-10 * np.linalg.cond(R) * np.linalg.norm(b)

    def test_solve_forward(self, rng):
        W = rng.standard_normal((6, 6)) + 5 * np.eye(6)
        c = rng.standard_normal(6)
        np.testing.assert_allclose(W @ solve(W, c), c, atol=1e-13)


class TestSmallSvd:
    @pytest.mark.parametrize(
        "A,expected",
        [
            (np.eye(3), [1.0, 1.0, 1.0]),
            (np.diag([3.0, 2.0]), [3.0, 2.0]),
            (np.diag([2.0, 3.0]), [3.0, 2.0]),
            (np.array([[0.0, 1.0], [1.0, 0.0]]), [1.0, 1.0]),
        ],
    )
    def test_examples(self, A, expected):
        np.testing.assert_allclose(small_svd(A).singular_values, expected, rtol=1e-15)

    @pytest.mark.parametrize("seed", range(10))
    def test_2x2_against_characteristic_polynomial(self, seed):
        a, b, c, d = np.random.default_rng(seed).standard_normal(4)
        # sigma^2 solves l^2 - (a^2+b^2+c^2+d^2) l + (ad - bc)^2 = 0
        tr = a * a + b * b + c * c + d * d
        det = (a * d - b * c) ** 2
        disc = np.sqrt(tr * tr - 4 * det)
        s1 = np.sqrt((tr + disc) / 2)
        s2 = abs(a * d - b * c) / s1
        got = small_svd(np.array([[a, b], [c, d]])).singular_values
        np.testing.assert_allclose(got, [s1, s2], rtol=1e-13)

    @pytest.mark.parametrize("shape", [(1, 1), (4, 4), (31, 30), (64, 64), (400, 20), (7, 12)])
    def test_factorization_properties(self, rng, shape):
        A = rng.standard_normal(shape)
        r = small_svd(A)
        k = min(shape)
        nA = np.linalg.norm(A)
        assert np.linalg.norm(A - (r.u_factor * r.singular_values) @ r.v_factor.T) <= 1e-12 * nA
        assert np.linalg.norm(r.u_factor.T @ r.u_factor - np.eye(k)) <= 1e-12
        assert np.linalg.norm(r.v_factor.T @ r.v_factor - np.eye(k)) <= 1e-12
        assert np.all(np.diff(r.singular_values) <= 0)
        np.testing.assert_allclose(
            r.singular_values, np.linalg.svd(A, compute_uv=False), rtol=0, atol=1e-13 * nA
        )

    def test_rank_deficient_keeps_orthonormal_u(self):
        A = np.outer([1.0, 2.0, 3.0, 4.0], [1.0, -1.0, 0.5])
        r = small_svd(A)
        assert np.linalg.norm(r.u_factor.T @ r.u_factor - np.eye(3)) <= 1e-12
        assert np.linalg.norm(A - (r.u_factor * r.singular_values) @ r.v_factor.T) <= 1e-12 * np.linalg.norm(A)
        zero = small_svd(np.zeros((3, 2)))
        np.testing.assert_array_equal(zero.singular_values, [0.0, 0.0])
        np.testing.assert_allclose(zero.u_factor.T @ zero.u_factor, np.eye(2))

    def test_size_guard(self):
        with pytest.raises(ValueError):
            small_svd(np.ones((65, 65)))

    def test_no_convergence(self, rng):
        with pytest.raises(NoConvergenceError):
            small_svd(rng.standard_normal((10, 10)), max_sweeps=1)
