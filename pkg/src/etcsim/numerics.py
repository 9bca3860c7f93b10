"""Small dense numerics: companion matrices, Lyapunov certificates, RK4, bisection.

Everything here targets system orders up to ~10, so dense O(n^6) solves are
perfectly fine and keep the code free of external solver dependencies.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "LyapunovCert",
    "build_companion",
    "is_hurwitz",
    "solve_lyapunov",
    "rk4_step",
    "locate_crossing",
]

HURWITZ_TOL = 1e-12


@dataclass(frozen=True)
class LyapunovCert:
    """Solution of P*A + A^T*P = -I together with its spectral data."""

    P: np.ndarray
    lambda_min: float
    lambda_max: float
    residual_norm: float


def build_companion(k: Sequence[float]) -> np.ndarray:
    """Observer companion matrix: -k down the first column, shifted identity right.

    For k=[k1,...,kn] the characteristic polynomial is
    s^n + k1*s^(n-1) + ... + kn.
    """
    k = np.asarray(k, dtype=float)
    n = k.shape[0]
    if n < 1:
        raise ValueError("k must have at least one entry")
    A = np.zeros((n, n))
    A[:, 0] = -k
    A[: n - 1, 1:] = np.eye(n - 1)
    return A


def is_hurwitz(A: np.ndarray) -> bool:
    """True iff every eigenvalue satisfies Re(lambda) < -1e-12."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    eig = np.linalg.eigvals(A)
    return bool(np.all(eig.real < -HURWITZ_TOL))


def solve_lyapunov(A_c: np.ndarray) -> LyapunovCert:
    """Solve P*A_c + A_c^T*P = -I by Kronecker vectorization.

    The n^2 x n^2 system (I (x) A_c^T + A_c^T (x) I) vec(P) = -vec(I) is solved
    densely and the result symmetrized.  A_c must be Hurwitz; an indefinite or
    non-symmetric P signals inconsistent input and raises.
    """
    A_c = np.asarray(A_c, dtype=float)
    n = A_c.shape[0]
    eye = np.eye(n)
    M = np.kron(eye, A_c.T) + np.kron(A_c.T, eye)
    try:
        vec_p = np.linalg.solve(M, -eye.reshape(-1))
    except np.linalg.LinAlgError as exc:
        raise ValueError("singular Lyapunov system; A_c is not Hurwitz") from exc
    P = vec_p.reshape(n, n)
    sym_err = float(np.max(np.abs(P - P.T)))
    if sym_err > 1e-12 * (1.0 + float(np.max(np.abs(P)))):
        raise ValueError(f"Lyapunov solution is not symmetric (error {sym_err:.3e})")
    P = 0.5 * (P + P.T)
    eigs = np.linalg.eigvalsh(P)
    lam_min, lam_max = float(eigs[0]), float(eigs[-1])
    if lam_min <= 0.0:
        raise ValueError(f"Lyapunov solution is indefinite (lambda_min={lam_min:.3e})")
    residual = float(np.linalg.norm(P @ A_c + A_c.T @ P + eye, ord="fro"))
    return LyapunovCert(P=P, lambda_min=lam_min, lambda_max=lam_max, residual_norm=residual)


def rk4_step(
    f: Callable[[float, np.ndarray], np.ndarray],
    t: float,
    x: np.ndarray,
    h: float,
) -> np.ndarray:
    """One classical fourth-order Runge-Kutta step of size h."""
    if h <= 0.0:
        raise ValueError("step size must be positive")
    k1 = np.asarray(f(t, x), dtype=float)
    k2 = np.asarray(f(t + 0.5 * h, x + 0.5 * h * k1), dtype=float)
    k3 = np.asarray(f(t + 0.5 * h, x + 0.5 * h * k2), dtype=float)
    k4 = np.asarray(f(t + h, x + h * k3), dtype=float)
    out = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(out)):
        raise FloatingPointError(f"non-finite RK4 stage at t={t!r}")
    return out


def locate_crossing(
    g: Callable[[float], float],
    t_lo: float,
    t_hi: float,
    tol: float,
) -> float:
    """Bisect the sign change of g on [t_lo, t_hi] to a bracket of width <= tol.

    Requires g(t_lo) < 0 <= g(t_hi).  Returns the right endpoint of the final
    bracket, i.e. the earliest time at resolution tol where g >= 0.
    """
    g_lo = g(t_lo)
    g_hi = g(t_hi)
    if g_lo >= 0.0:
        raise ValueError("g(t_lo) must be negative")
    if g_hi < 0.0:
        raise ValueError("no sign change on the interval")
    lo, hi = t_lo, t_hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break  # interval at float resolution
        if g(mid) >= 0.0:
            hi = mid
        else:
            lo = mid
    return hi
