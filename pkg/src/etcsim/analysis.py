"""Diagnostics mirroring the stability analysis, plus the parameter advisor.

The estimation error, companion variables and Lyapunov candidate are proof
constructs: they may read the true uncertain parameter, which the controller
never does.  The advisor reproduces the parameter-selection recipe and reports
each inequality with its margin.  Structural checks (Hurwitz observer, trigger
ordering, sigma range, gain positivity, the filter-gain floor) are binding;
the conservative recipe bounds are reported as advisory margins.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .controller import ControllerContext, GainSet, TriggerThresholds
from .numerics import LyapunovCert, build_companion, is_hurwitz, solve_lyapunov
from .plant import PlantModel
from .results import ED1, ED2, EventRecord, Sample

if TYPE_CHECKING:
    from .results import SimResult

__all__ = [
    "DiagnosticFrame",
    "ConstraintResult",
    "AdvisorReport",
    "AdvisorError",
    "estimation_error",
    "companion_variables",
    "lyapunov_value",
    "diagnostic_frame",
    "lemma1_audit",
    "invariance_check",
    "practical_bound",
    "trigger_statistics",
    "advise_parameters",
]


def estimation_error(
    x: np.ndarray, xi: np.ndarray, zeta: np.ndarray, theta: float
) -> np.ndarray:
    """Observer decomposition error eps = x - (xi + theta * zeta)."""
    return np.asarray(x) - (np.asarray(xi) + theta * np.asarray(zeta))


def companion_variables(
    y: float,
    xi: np.ndarray,
    zeta: np.ndarray,
    theta_hat: float,
    alpha_f: np.ndarray,
    ctx: ControllerContext,
) -> tuple[np.ndarray, np.ndarray]:
    """Continuous companions (alpha_hat_1..n-1, upsilon_hat_2..n) of the virtual inputs.

    Same recursion as the controller's virtual inputs but fed with the
    continuous signals, so the two coincide exactly whenever the continuous
    state equals the latched state and y equals the transmitted output.
    """
    from .exprlang import eval_expr

    gains = ctx.gains
    n = ctx.n
    varpi = eval_expr(ctx.psi[0], y) + zeta[1]
    alpha_hat = np.empty(n - 1)
    upsilon_hat = np.empty(n - 1)
    alpha_hat[0] = -gains.c[0] * y - theta_hat * varpi
    upsilon_hat[0] = alpha_f[0] - alpha_hat[0]
    for i in range(2, n):
        z_i = xi[i - 1] - alpha_f[i - 2]
        alpha_hat[i - 1] = (
            -gains.c[i - 1] * z_i
            - ctx.k[i - 1] * (y - xi[0])
            - gains.rho[i - 2] * upsilon_hat[i - 2]
        )
        upsilon_hat[i - 1] = alpha_f[i - 1] - alpha_hat[i - 1]
    return alpha_hat, upsilon_hat


def lyapunov_value(
    z: np.ndarray,
    upsilon_hat: np.ndarray,
    theta_tilde: float,
    eps: np.ndarray,
    zeta: np.ndarray,
    P: np.ndarray,
) -> tuple[float, tuple[float, ...]]:
    """Composite Lyapunov candidate and its per-step breakdown (V_1..V_n).

    V_1 = (z_1^2 + theta_tilde^2 + upsilon_hat_2^2)/2 + eps'P eps + zeta'P zeta,
    V_i = (z_i^2 + upsilon_hat_{i+1}^2)/2 for i = 2..n-1, V_n = z_n^2/2.
    """
    n = z.shape[0]
    parts = [
        0.5 * (z[0] ** 2 + theta_tilde**2 + upsilon_hat[0] ** 2)
        + float(eps @ P @ eps)
        + float(zeta @ P @ zeta)
    ]
    for i in range(2, n):
        parts.append(0.5 * (z[i - 1] ** 2 + upsilon_hat[i - 1] ** 2))
    parts.append(0.5 * z[n - 1] ** 2)
    return float(sum(parts)), tuple(parts)


@dataclass(frozen=True)
class DiagnosticFrame:
    """Proof-side view of one closed-loop instant."""

    t: float
    eps: np.ndarray
    z: np.ndarray
    upsilon_hat: np.ndarray
    theta_tilde: float
    V: float
    V_parts: tuple[float, ...]


def diagnostic_frame(
    t: float,
    x: np.ndarray,
    xi: np.ndarray,
    zeta: np.ndarray,
    theta_hat: float,
    alpha_f: np.ndarray,
    theta_true: float,
    P: np.ndarray,
    ctx: ControllerContext,
) -> DiagnosticFrame:
    y = float(x[0])
    eps = estimation_error(x, xi, zeta, theta_true)
    z = np.empty(ctx.n)
    z[0] = y
    z[1:] = xi[1:] - alpha_f
    _, upsilon_hat = companion_variables(y, xi, zeta, theta_hat, alpha_f, ctx)
    theta_tilde = theta_true - theta_hat
    V, parts = lyapunov_value(z, upsilon_hat, theta_tilde, eps, zeta, P)
    return DiagnosticFrame(
        t=t, eps=eps, z=z, upsilon_hat=upsilon_hat, theta_tilde=theta_tilde, V=V, V_parts=parts
    )


def _max_abs_ydot_estimate(samples: list[Sample]) -> float:
    """Finite-difference bound on |ydot| from the recorded output series."""
    best = 0.0
    for a, b in zip(samples, samples[1:]):
        dt = b.t - a.t
        if dt > 0.0:
            best = max(best, abs(b.y - a.y) / dt)
    return best


def lemma1_audit(
    result: "SimResult",
    thresholds: TriggerThresholds,
    loc_tol: float = 1e-9,
) -> dict:
    """Check |y(t) - ybar(t_j)| <= gamma_y + gamma_ybar (+ localization slack).

    The slack term 10 * loc_tol * max|ydot| covers the event localizer's
    threshold overshoot; max|ydot| is estimated from the recorded series.
    """
    samples = result.samples
    max_error = max((abs(s.y - s.ybar_ctrl) for s in samples), default=0.0)
    slack = 10.0 * loc_tol * _max_abs_ydot_estimate(samples)
    bound = thresholds.gamma_y_tilde + slack
    violations = sum(1 for s in samples if abs(s.y - s.ybar_ctrl) > bound)
    return {"max_error": max_error, "violations": violations, "bound": bound, "slack": slack}


def invariance_check(result: "SimResult", q: float) -> dict:
    """Positive-invariance audit of the sublevel set {V <= q} along the run."""
    V0 = result.samples[0].V
    V_max = max(s.V for s in result.samples)
    if V0 > q:
        return {"precondition_ok": False, "contained": False, "V0": V0, "V_max": V_max, "q": q}
    contained = V_max <= q * (1.0 + 1e-6)
    return {"precondition_ok": True, "contained": contained, "V0": V0, "V_max": V_max, "q": q}


def practical_bound(result: "SimResult", tail_start: float) -> float:
    """Empirical ultimate bound: sup |y(t)| over t >= tail_start."""
    tail = [abs(s.y) for s in result.samples if s.t >= tail_start]
    if not tail:
        raise ValueError(f"no samples at or after tail_start={tail_start!r}")
    return max(tail)


def trigger_statistics(events: list[EventRecord]) -> dict:
    """Per-detector counts and inter-event gap statistics."""
    out = {}
    for detector in (ED1, ED2):
        times = [e.t for e in events if e.detector == detector]
        if len(times) >= 2:
            gaps = [b - a for a, b in zip(times, times[1:])]
            min_gap, mean_gap = min(gaps), sum(gaps) / len(gaps)
        else:
            min_gap = mean_gap = math.inf
        out[detector] = {"count": len(times), "min_gap": min_gap, "mean_gap": mean_gap}
    return out


class AdvisorError(ValueError):
    """Advisor precondition failure (non-Hurwitz observer, bad sigma, bad q)."""


@dataclass(frozen=True)
class ConstraintResult:
    name: str
    satisfied: bool
    margin: float
    required: bool  # structural checks are binding; recipe bounds are advisory


@dataclass(frozen=True)
class AdvisorReport:
    A_c_hurwitz: bool
    P: LyapunovCert
    constraint_results: tuple[ConstraintResult, ...]
    suggested_delta: float
    c_lower_bounds: tuple[float, ...]
    c_of_beta: float
    q_floor: float
    q_floor_at_c_delta: float
    c0_target: float

    @property
    def structural_ok(self) -> bool:
        return all(c.satisfied for c in self.constraint_results if c.required)

    def constraint(self, name: str) -> ConstraintResult:
        for c in self.constraint_results:
            if c.name == name:
                return c
        raise KeyError(name)


def advise_parameters(
    model: PlantModel,
    k: np.ndarray,
    gains: GainSet,
    thresholds: TriggerThresholds,
    q: float,
    c_delta: float = 0.1,
    c_small_delta: float = 1.1,
) -> AdvisorReport:
    """Reproduce the parameter-selection recipe and audit every inequality.

    c_delta is the slack budget kept for the filter-error terms; c_small_delta
    (> 1) scales the suggested adaptation leak.  The target c0 for the
    feedback-gain bounds is d_bar / q evaluated at the suggested leak.
    """
    n = model.n
    sigma = gains.sigma
    if q <= 0.0:
        raise AdvisorError(f"q={q} must be positive")
    if not 0.0 < sigma < 0.2:
        raise AdvisorError(f"sigma={sigma} outside (0, 1/5)")
    if c_small_delta <= 1.0:
        raise AdvisorError(f"c_small_delta={c_small_delta} must exceed 1")
    if c_delta < 0.0:
        raise AdvisorError(f"c_delta={c_delta} must be nonnegative")
    theta_bar = model.theta_bar
    if 2.0 * q <= theta_bar**2:
        raise AdvisorError(
            f"suggested-delta formula undefined: 2q={2 * q} <= theta_bar^2={theta_bar ** 2}"
        )

    A_c = build_companion(k)
    hurwitz = is_hurwitz(A_c)
    if not hurwitz:
        raise AdvisorError("A_c built from k is not Hurwitz")
    cert = solve_lyapunov(A_c)
    P_norm = cert.lambda_max  # 2-norm of a symmetric positive definite matrix
    lam_bar = cert.lambda_max
    L = model.lipschitz_aggregate
    psi0_norm = float(np.linalg.norm(model.psi_vector(0.0)))
    g_tilde = thresholds.gamma_y_tilde
    sigma_bar = 1.0 - 5.0 * sigma

    def eta0(c_d: float) -> float:
        return 2.0 * P_norm**2 * psi0_norm**2 / sigma + c_d

    eta1 = 2.0 * sigma_bar / lam_bar

    def eta_floor(c_d: float) -> float:
        e0 = eta0(c_d)
        eta2 = (
            2.0 * e0 * sigma
            + c_small_delta * theta_bar**2 * (1.0 + g_tilde**2)
            + eta1 * theta_bar**2 * sigma / 2.0
        ) / sigma
        eta3 = (c_small_delta - 1.0) * e0 * theta_bar**2
        return (eta2 + math.sqrt(eta2**2 + 4.0 * eta1 * eta3)) / (2.0 * eta1)

    q_floor = eta_floor(0.0)
    q_floor_at_c_delta = eta_floor(c_delta)

    suggested_delta = (
        2.0 * c_small_delta / (2.0 * q - theta_bar**2)
        * (eta0(c_delta) + (1.0 + g_tilde**2) * q / sigma)
    )
    d_bar = suggested_delta * theta_bar**2 / 2.0 + eta0(c_delta)
    c0 = d_bar / q

    c1_structural = (
        1.0
        + 1.0 / (4.0 * sigma)
        + 30.0 * sigma * L**2 * g_tilde**2
        + 5.0 * sigma * thresholds.gamma_zeta**2
        + P_norm**2 * L**2 / sigma
    )
    c_lower_bounds = [c1_structural + c0]
    c_lower_bounds += [4.5 + c0] * (n - 2)
    c_lower_bounds += [1.0 + c0]

    checks: list[ConstraintResult] = []

    def add(name: str, margin: float, required: bool) -> None:
        checks.append(
            ConstraintResult(name=name, satisfied=margin >= 0.0, margin=margin, required=required)
        )

    eig_real_max = float(np.max(np.linalg.eigvals(A_c).real))
    add("A_c_hurwitz: max Re(eig) < 0", -eig_real_max, required=True)
    add("gamma_ybar > gamma_y", thresholds.gamma_ybar - thresholds.gamma_y, required=True)
    add("sigma in (0, 1/5)", min(sigma, 0.2 - sigma), required=True)
    gain_entries = (*gains.c, *gains.rho, *gains.phi, *gains.varrho, gains.delta)
    add("gains positive", min(gain_entries), required=True)
    for i, (rho_i, phi_i, vr_i) in enumerate(zip(gains.rho, gains.phi, gains.varrho), start=2):
        add(
            f"rho_{i} >= 3/2 + phi_{i} + varrho_{i}",
            rho_i - (1.5 + phi_i + vr_i),
            required=True,
        )
        add(
            f"rho_{i} >= 2 + phi_{i} + varrho_{i}",
            rho_i - (2.0 + phi_i + vr_i),
            required=False,
        )
    add("c_1 >= recipe bound + c0", gains.c[0] - c_lower_bounds[0], required=False)
    for i in range(2, n):
        add(f"c_{i} >= 9/2 + c0", gains.c[i - 1] - c_lower_bounds[i - 1], required=False)
    add(f"c_{n} >= 1 + c0", gains.c[n - 1] - c_lower_bounds[n - 1], required=False)
    delta_bar = gains.delta / 2.0 - (1.0 + g_tilde**2) / (2.0 * sigma)
    add("delta_bar = delta/2 - (1+gamma_tilde^2)/(2 sigma) > 0", delta_bar, required=False)
    add("q >= eta_floor(c_delta)", q - q_floor_at_c_delta, required=False)

    c_bar = [gains.c[0] - c1_structural]
    c_bar += [gains.c[i - 1] - 4.5 for i in range(2, n)]
    c_bar += [gains.c[n - 1] - 1.0]
    c_of_beta = min(
        *(2.0 * v for v in c_bar),
        *(2.0 * v for v in gains.varrho),
        2.0 * delta_bar,
        sigma_bar / lam_bar,
    )

    return AdvisorReport(
        A_c_hurwitz=hurwitz,
        P=cert,
        constraint_results=tuple(checks),
        suggested_delta=suggested_delta,
        c_lower_bounds=tuple(c_lower_bounds),
        c_of_beta=c_of_beta,
        q_floor=q_floor,
        q_floor_at_c_delta=q_floor_at_c_delta,
        c0_target=c0,
    )
