import math

import numpy as np
import pytest
import scipy.linalg

from etcsim.numerics import (
    build_companion,
    is_hurwitz,
    locate_crossing,
    rk4_step,
    solve_lyapunov,
)


def stable_companion_gains(rng: np.random.Generator, n: int) -> np.ndarray:
    """Gains whose companion matrix has prescribed stable eigenvalues."""
    roots = -rng.uniform(0.3, 6.0, size=n)
    coeffs = np.poly(roots)  # s^n + k1 s^(n-1) + ... + kn
    return coeffs[1:]


class TestCompanion:
    def test_order_two(self):
        assert np.array_equal(build_companion([5.0, 5.0]), [[-5.0, 1.0], [-5.0, 0.0]])

    def test_order_one(self):
        assert np.array_equal(build_companion([1.0]), [[-1.0]])

    def test_order_three(self):
        expected = [[-1.0, 1.0, 0.0], [-2.0, 0.0, 1.0], [-3.0, 0.0, 0.0]]
        assert np.array_equal(build_companion([1.0, 2.0, 3.0]), expected)

    def test_characteristic_polynomial(self):
        k = [4.0, 3.0, 2.0]
        A = build_companion(k)
        assert np.allclose(np.poly(A), [1.0, *k])


class TestHurwitz:
    def test_stable_companion(self):
        assert is_hurwitz(build_companion([5.0, 5.0]))

    def test_double_integrator(self):
        assert not is_hurwitz(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_scalar(self):
        assert is_hurwitz(np.array([[-1.0]]))

    def test_non_square(self):
        with pytest.raises(ValueError):
            is_hurwitz(np.zeros((2, 3)))


class TestLyapunov:
    def test_study_observer(self):
        # hand solution of the three scalar equations for k=[5,5]:
        # p11+p12 = 0.1, 2 p12 = -1, p11 - 5 p12 - 5 p22 = 0
        cert = solve_lyapunov(build_companion([5.0, 5.0]))
        assert np.allclose(cert.P, [[0.6, -0.5], [-0.5, 0.62]], atol=1e-12)
        assert cert.lambda_min == pytest.approx(0.1099, abs=1e-3)
        assert cert.residual_norm <= 1e-9

    def test_scalar(self):
        cert = solve_lyapunov(np.array([[-1.0]]))
        assert np.allclose(cert.P, [[0.5]])

    def test_diagonal(self):
        cert = solve_lyapunov(np.array([[-2.0, 0.0], [0.0, -2.0]]))
        assert np.allclose(cert.P, 0.25 * np.eye(2))

    def test_matches_scipy(self):
        rng = np.random.default_rng(7)
        for n in (2, 3, 5, 8):
            A = build_companion(stable_companion_gains(rng, n))
            ours = solve_lyapunov(A).P
            ref = scipy.linalg.solve_continuous_lyapunov(A.T, -np.eye(n))
            assert np.allclose(ours, ref, atol=1e-9)

    def test_random_companions_residual_and_definiteness(self):
        rng = np.random.default_rng(42)
        for _ in range(100):
            n = int(rng.integers(1, 7))
            A = build_companion(stable_companion_gains(rng, n))
            cert = solve_lyapunov(A)
            assert cert.residual_norm <= 1e-9
            assert cert.lambda_min > 0.0

    def test_rejects_unstable(self):
        with pytest.raises(ValueError):
            solve_lyapunov(np.array([[0.0, 1.0], [0.0, 0.0]]))


class TestRK4:
    def test_zero_field(self):
        x = np.array([1.0, -2.0])
        out = rk4_step(lambda t, x: np.zeros(2), 0.0, x, 0.3)
        assert np.array_equal(out, x)

    def test_exponential_decay(self):
        out = rk4_step(lambda t, x: -x, 0.0, np.array([1.0]), 0.1)
        assert out[0] == pytest.approx(math.exp(-0.1), abs=1e-7)

    def test_pure_time_quadrature(self):
        out = rk4_step(lambda t, x: np.array([1.0]), 0.0, np.array([0.0]), 0.5)
        assert out[0] == pytest.approx(0.5, abs=1e-15)

    @pytest.mark.parametrize("lam", [-1.0, -5.0])
    def test_fifth_order_local_error(self, lam):
        f = lambda t, x: lam * x
        x0 = np.array([1.0])
        for h in (0.1, 0.05):
            err_h = abs(rk4_step(f, 0.0, x0, h)[0] - math.exp(lam * h))
            err_h2 = abs(rk4_step(f, 0.0, x0, h / 2)[0] - math.exp(lam * h / 2))
            assert err_h / err_h2 >= 16.0 * 0.9

    def test_rejects_bad_step(self):
        with pytest.raises(ValueError):
            rk4_step(lambda t, x: x, 0.0, np.array([1.0]), 0.0)

    def test_non_finite_flagged(self):
        with pytest.raises(FloatingPointError):
            rk4_step(lambda t, x: x * 1e308, 0.0, np.array([1e308]), 2.0)


class TestLocateCrossing:
    def test_linear(self):
        assert locate_crossing(lambda t: t - 1.0, 0.0, 2.0, 1e-9) == pytest.approx(1.0, abs=1e-9)

    def test_sqrt_two(self):
        t = locate_crossing(lambda t: t * t - 2.0, 0.0, 2.0, 1e-9)
        assert t == pytest.approx(math.sqrt(2.0), abs=1e-8)

    def test_no_sign_change(self):
        with pytest.raises(ValueError, match="no sign change"):
            locate_crossing(lambda t: -1.0, 0.0, 1.0, 1e-9)

    def test_result_bracket_semantics(self):
        g = lambda t: t - 0.37
        t = locate_crossing(g, 0.0, 1.0, 1e-10)
        assert g(t) >= 0.0
        assert g(t - 1e-9) < 0.0

    def test_tol_refinement_consistent(self):
        g = lambda t: math.sin(t) - 0.5
        coarse = locate_crossing(g, 0.0, 1.5, 1e-6)
        fine = locate_crossing(g, 0.0, 1.5, 1e-12)
        assert abs(coarse - fine) <= 1e-6
        assert fine == pytest.approx(math.asin(0.5), abs=1e-11)
