import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from randlink.linalg import RidgeMode, pinv_solve, ridge_solve, sigmoid


def normal_residual(D, Y, beta, lam):
    # Gradient of ||D b - Y||^2 + lam ||b||^2, up to the factor 2.
    return D.T @ (D @ beta - Y) + lam * beta


class TestRidgeSolve:
    def test_identity_half(self):
        np.testing.assert_allclose(ridge_solve(np.eye(2), np.eye(2), 1.0), 0.5 * np.eye(2), atol=1e-15)

    def test_identity_pinv(self):
        np.testing.assert_allclose(ridge_solve(np.eye(2), np.eye(2), 0.0, "pinv"), np.eye(2))

    def test_primal_dual_agree_6x4(self, rng):
        D = rng.normal(size=(6, 4))
        Y = rng.normal(size=(6, 2))
        bp = ridge_solve(D, Y, 0.5, RidgeMode.PRIMAL)
        bd = ridge_solve(D, Y, 0.5, RidgeMode.DUAL)
        np.testing.assert_allclose(bp, bd, rtol=1e-10)
        assert np.max(np.abs(normal_residual(D, Y, bp, 0.5))) < 1e-8

    def test_auto_picks_smaller_system(self, rng):
        wide = rng.normal(size=(5, 40))
        Y = rng.normal(size=(5, 3))
        np.testing.assert_array_equal(
            ridge_solve(wide, Y, 2.0), ridge_solve(wide, Y, 2.0, RidgeMode.DUAL)
        )
        tall = wide.T
        Y2 = rng.normal(size=(40, 3))
        np.testing.assert_array_equal(
            ridge_solve(tall, Y2, 2.0), ridge_solve(tall, Y2, 2.0, RidgeMode.PRIMAL)
        )

    def test_auto_zero_lambda_is_pinv(self, rng):
        D = rng.normal(size=(7, 3))
        Y = rng.normal(size=(7, 2))
        np.testing.assert_array_equal(ridge_solve(D, Y, 0.0), pinv_solve(D, Y))

    @pytest.mark.parametrize("mode", ["primal", "dual"])
    def test_zero_lambda_rejected(self, mode):
        with pytest.raises(ValueError, match="pinv"):
            ridge_solve(np.eye(2), np.eye(2), 0.0, mode)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="row mismatch"):
            ridge_solve(np.eye(3), np.eye(2), 1.0)

    def test_non_finite(self):
        D = np.eye(2)
        D[0, 1] = np.nan
        with pytest.raises(ValueError, match="non-finite"):
            ridge_solve(D, np.eye(2), 1.0)

    def test_negative_lambda(self):
        with pytest.raises(ValueError):
            ridge_solve(np.eye(2), np.eye(2), -1.0)


@settings(max_examples=60, deadline=None)
@given(
    T=st.integers(1, 30),
    p=st.integers(1, 30),
    K=st.integers(1, 4),
    log_lam=st.floats(-6, 6),
    seed=st.integers(0, 2**32 - 1),
)
def test_primal_dual_property(T, p, K, log_lam, seed):
    rng = np.random.default_rng(seed)
    D = rng.normal(size=(T, p))
    Y = rng.normal(size=(T, K))
    lam = 2.0**log_lam
    bp = ridge_solve(D, Y, lam, "primal")
    bd = ridge_solve(D, Y, lam, "dual")
    scale = max(np.max(np.abs(bp)), 1e-300)
    assert np.max(np.abs(bp - bd)) <= 1e-8 * scale + 1e-14
    bound = 1e-8 * (1 + np.max(np.abs(D.T @ Y)))
    assert np.max(np.abs(normal_residual(D, Y, bp, lam))) < bound


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), l1=st.floats(-4, 4), gap=st.floats(0.01, 4))
def test_monotone_shrinkage(seed, l1, gap):
    rng = np.random.default_rng(seed)
    D = rng.normal(size=(12, 6))
    Y = rng.normal(size=(12, 2))
    small = ridge_solve(D, Y, 2.0**l1)
    large = ridge_solve(D, Y, 2.0 ** (l1 + gap))
    assert np.linalg.norm(large) <= np.linalg.norm(small) * (1 + 1e-12)


class TestPinvSolve:
    def test_identity(self, rng):
        Y = rng.normal(size=(3, 2))
        np.testing.assert_allclose(pinv_solve(np.eye(3), Y), Y, atol=1e-15)

    def test_least_squares_mean(self):
        np.testing.assert_allclose(pinv_solve([[1.0], [1.0]], [[0.0], [2.0]]), [[1.0]])

    def test_rank_deficient_matches_small_ridge(self, rng):
        # 8 x 5 of rank 3, integer-valued so the dependence is exact in floating point:
        # column 3 duplicates column 0, column 4 is column 0 + column 1.
        base = rng.integers(-5, 6, size=(8, 3)).astype(float)
        D = np.column_stack([base, base[:, 0], base[:, 0] + base[:, 1]])
        Y = rng.normal(size=(8, 2))
        # Oracle: ridge at lam = 1e-10 evaluated in 50-digit arithmetic.
        mpmath.mp.dps = 50
        Dm, Ym = mpmath.matrix(D.tolist()), mpmath.matrix(Y.tolist())
        G = Dm.T * Dm + mpmath.mpf("1e-10") * mpmath.eye(5)
        rhs = Dm.T * Ym
        limit = np.column_stack([
            [float(v) for v in mpmath.lu_solve(G, rhs.column(j))] for j in range(Y.shape[1])
        ])
        np.testing.assert_allclose(pinv_solve(D, Y), limit, atol=1e-6)

    def test_minimum_norm(self, rng):
        D = rng.normal(size=(4, 2)) @ rng.normal(size=(2, 6))
        Y = rng.normal(size=(4, 1))
        beta = pinv_solve(D, Y)
        # Other least-squares solutions differ by a null-space component.
        _, s, Vt = np.linalg.svd(D)
        null = Vt[2:].T
        for _ in range(20):
            other = beta + null @ rng.normal(size=(null.shape[1], 1))
            np.testing.assert_allclose(D @ other, D @ beta, atol=1e-9)
            assert np.linalg.norm(beta) <= np.linalg.norm(other) + 1e-8

    def test_zero_matrix(self):
        np.testing.assert_array_equal(pinv_solve(np.zeros((3, 2)), np.ones((3, 1))), np.zeros((2, 1)))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            pinv_solve(np.eye(3), np.ones((2, 1)))


class TestSigmoid:
    def test_zero(self):
        assert sigmoid(0.0) == 0.5

    def test_symmetry(self, rng):
        x = rng.uniform(-30, 30, size=1000)
        np.testing.assert_allclose(sigmoid(x) + sigmoid(-x), 1.0, atol=1e-15)

    def test_one_against_mpmath(self):
        mpmath.mp.dps = 50
        ref = 1 / (1 + mpmath.exp(-1))
        assert abs(float(sigmoid(1.0)) - float(ref)) < 1e-12

    def test_saturates_without_warnings(self):
        with np.errstate(all="raise"):
            out = sigmoid(np.array([-1000.0, 1000.0]))
        np.testing.assert_array_equal(out, [0.0, 1.0])

    def test_open_interval_moderate_range(self, rng):
        s = sigmoid(rng.uniform(-30, 30, size=1000))
        assert np.all((s > 0) & (s < 1))
