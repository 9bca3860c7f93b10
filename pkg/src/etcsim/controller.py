"""Controller-side stack: observer, adaptive law, dynamic filter, control law, ED2.

All controller ODE right-hand sides are frozen at the last ED2 instant t_j, so
between firings every controller state evolves affinely in time.  States are
always evaluated from the t_j anchor (never accumulated), which makes the
evolution exact: advancing in one step or in any split of sub-steps yields
bit-identical values.  The frozen derivatives also give each trigger condition
a closed-form deadline gamma / ||derivative||, computable at t_j.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exprlang import NonlinearityExpr, eval_expr
from .results import ED2, EventRecord

__all__ = [
    "GainSet",
    "TriggerThresholds",
    "ControllerContext",
    "ControllerLatch",
    "ControllerDerivs",
    "ControllerState",
    "observer_derivatives",
    "adaptive_derivative",
    "filter_derivative",
    "virtual_inputs",
    "control_law",
    "compute_deadline",
    "ed2_on_arrival",
    "ed2_fire",
    "initialize_controller",
]

# The filter-gain floor rho_i >= 3/2 + phi_i + varrho_i is the form the
# reference gain set actually satisfies; the stricter 2 + phi_i + varrho_i
# variant is reported by the parameter advisor but not enforced at load.
RHO_MARGIN_ENFORCED = 1.5


@dataclass(frozen=True)
class GainSet:
    """Controller gains: feedback c, filter rho, and the analysis parameters.

    rho, phi, varrho are indexed by filter stage i = 2..n and stored 0-based.
    phi, varrho and sigma never enter the closed loop; they parameterize the
    stability certificate checked by the advisor.
    """

    c: tuple[float, ...]
    rho: tuple[float, ...]
    phi: tuple[float, ...]
    varrho: tuple[float, ...]
    delta: float
    sigma: float

    def validate(self, n: int) -> None:
        if len(self.c) != n:
            raise ValueError(f"c must have length n={n}")
        for name, seq in (("rho", self.rho), ("phi", self.phi), ("varrho", self.varrho)):
            if len(seq) != n - 1:
                raise ValueError(f"{name} must have length n-1={n - 1}")
        entries = (*self.c, *self.rho, *self.phi, *self.varrho, self.delta)
        if any(v <= 0.0 for v in entries):
            raise ValueError("all gain entries must be strictly positive")
        if not 0.0 < self.sigma < 0.2:
            raise ValueError(f"sigma={self.sigma} must lie in (0, 1/5)")
        for i, (rho_i, phi_i, vr_i) in enumerate(zip(self.rho, self.phi, self.varrho), start=2):
            floor = RHO_MARGIN_ENFORCED + phi_i + vr_i
            if rho_i < floor:
                raise ValueError(
                    f"rho_{i}={rho_i} violates rho_{i} >= {RHO_MARGIN_ENFORCED}+phi_{i}+varrho_{i}={floor}"
                )


@dataclass(frozen=True)
class TriggerThresholds:
    gamma_y: float
    gamma_ybar: float
    gamma_xi: float
    gamma_zeta: float
    gamma_h: float
    gamma_f: float

    def validate(self) -> None:
        entries = (
            self.gamma_y, self.gamma_ybar, self.gamma_xi,
            self.gamma_zeta, self.gamma_h, self.gamma_f,
        )
        if any(v <= 0.0 for v in entries):
            raise ValueError("all trigger thresholds must be strictly positive")
        if not self.gamma_ybar > self.gamma_y:
            raise ValueError(
                f"gamma_ybar={self.gamma_ybar} must exceed gamma_y={self.gamma_y}"
            )

    @property
    def gamma_y_tilde(self) -> float:
        """Combined output error bound gamma_y + gamma_ybar."""
        return self.gamma_y + self.gamma_ybar


@dataclass(frozen=True)
class ControllerContext:
    """Everything an ED2 firing needs to rebuild derivatives and the control."""

    n: int
    A_c: np.ndarray
    k: np.ndarray
    psi: tuple[NonlinearityExpr, ...]
    gains: GainSet
    thresholds: TriggerThresholds

    def psi_vector(self, ybar: float) -> np.ndarray:
        return np.array([eval_expr(p, ybar) for p in self.psi])


@dataclass
class ControllerLatch:
    """Sampled values held since the last ED2 instant t_j."""

    t_j: float
    ybar: float
    xi: np.ndarray
    zeta: np.ndarray
    theta_hat: float
    alpha_f: np.ndarray  # [alpha_2f, ..., alpha_nf]


@dataclass
class ControllerDerivs:
    """Constant right-hand sides on [t_j, t_{j+1})."""

    xi: np.ndarray
    zeta: np.ndarray
    theta_hat: float
    alpha_f: np.ndarray


@dataclass
class ControllerState:
    latch: ControllerLatch
    derivs: ControllerDerivs
    u_held: float
    deadline: float
    deadline_cause: str
    ed2_count: int = 0

    def eval_at(self, t: float) -> tuple[np.ndarray, np.ndarray, float, np.ndarray]:
        """Exact affine state at time t in [t_j, t_{j+1}]."""
        dt = t - self.latch.t_j
        return (
            self.latch.xi + self.derivs.xi * dt,
            self.latch.zeta + self.derivs.zeta * dt,
            self.latch.theta_hat + self.derivs.theta_hat * dt,
            self.latch.alpha_f + self.derivs.alpha_f * dt,
        )


def observer_derivatives(
    latch: ControllerLatch, u: float, ctx: ControllerContext
) -> tuple[np.ndarray, np.ndarray]:
    """xi_dot = A_c xi(t_j) + k ybar(t_j) + b u;  zeta_dot = A_c zeta(t_j) + psi(ybar(t_j))."""
    xi_dot = ctx.A_c @ latch.xi + ctx.k * latch.ybar
    xi_dot[-1] += u
    zeta_dot = ctx.A_c @ latch.zeta + ctx.psi_vector(latch.ybar)
    return xi_dot, zeta_dot


def adaptive_derivative(latch: ControllerLatch, delta: float, psi1: NonlinearityExpr) -> float:
    """theta_hat_dot = ybar(t_j) * [psi_1(ybar(t_j)) + zeta_2(t_j)] - delta * theta_hat(t_j)."""
    return latch.ybar * (eval_expr(psi1, latch.ybar) + latch.zeta[1]) - delta * latch.theta_hat


def virtual_inputs(latch: ControllerLatch, ctx: ControllerContext) -> np.ndarray:
    """Backstepping virtual inputs [alpha_1, ..., alpha_{n-1}] at the latched values.

    alpha_1 = -c_1 ybar - theta_hat (psi_1(ybar) + zeta_2); for i = 2..n-1
    alpha_i = -c_i z_i - k_i (ybar - xi_1) - rho_i upsilon_i with
    z_i = xi_i - alpha_if and upsilon_i = alpha_if - alpha_{i-1}.
    """
    gains = ctx.gains
    ybar = latch.ybar
    varpi_bar = eval_expr(ctx.psi[0], ybar) + latch.zeta[1]
    alphas = np.empty(ctx.n - 1)
    alphas[0] = -gains.c[0] * ybar - latch.theta_hat * varpi_bar
    for i in range(2, ctx.n):  # stage i produces alpha_i
        z_i = latch.xi[i - 1] - latch.alpha_f[i - 2]
        upsilon_i = latch.alpha_f[i - 2] - alphas[i - 2]
        alphas[i - 1] = (
            -gains.c[i - 1] * z_i
            - ctx.k[i - 1] * (ybar - latch.xi[0])
            - gains.rho[i - 2] * upsilon_i
        )
    return alphas


def control_law(latch: ControllerLatch, alphas: np.ndarray, ctx: ControllerContext) -> float:
    """u = -c_n z_n(t_j) - k_n (ybar(t_j) - xi_1(t_j)) - rho_n upsilon_n(t_j)."""
    n = ctx.n
    z_n = latch.xi[n - 1] - latch.alpha_f[n - 2]
    upsilon_n = latch.alpha_f[n - 2] - alphas[n - 2]
    return float(
        -ctx.gains.c[n - 1] * z_n
        - ctx.k[n - 1] * (latch.ybar - latch.xi[0])
        - ctx.gains.rho[n - 2] * upsilon_n
    )


def filter_derivative(latch: ControllerLatch, alphas: np.ndarray, rho: tuple[float, ...]) -> np.ndarray:
    """alpha_if_dot = rho_i (-alpha_if(t_j) + alpha_{i-1}(t_j)) for i = 2..n."""
    return np.asarray(rho) * (-latch.alpha_f + alphas)


def _deadline(derivs: ControllerDerivs, thresholds: TriggerThresholds) -> tuple[float, str]:
    """Smallest gamma/||derivative|| over the four self-trigger conditions."""
    candidates = (
        (thresholds.gamma_xi, float(np.linalg.norm(derivs.xi)), "e_xi"),
        (thresholds.gamma_zeta, float(np.linalg.norm(derivs.zeta)), "e_zeta"),
        (thresholds.gamma_h, abs(derivs.theta_hat), "e_h"),
        (thresholds.gamma_f, float(np.linalg.norm(derivs.alpha_f)), "e_f"),
    )
    best, cause = math.inf, ""
    for gamma, norm, name in candidates:
        if norm > 0.0:
            offset = gamma / norm
            if offset < best:
                best, cause = offset, name
    return best, cause


def compute_deadline(state: ControllerState, thresholds: TriggerThresholds) -> float:
    """Next self-trigger instant t_j + min gamma/||derivative||; +inf if all rest."""
    offset, _ = _deadline(state.derivs, thresholds)
    return state.latch.t_j + offset


def ed2_on_arrival(state: ControllerState, ybar_new: float, gamma_ybar: float) -> bool:
    """Arrival condition |ybar_new - ybar(t_j)| >= gamma_ybar, checked only when
    a freshly transmitted output reaches the controller."""
    return abs(ybar_new - state.latch.ybar) >= gamma_ybar


def _refresh(state: ControllerState, t_star: float, ybar: float, ctx: ControllerContext) -> None:
    xi, zeta, theta_hat, alpha_f = state.eval_at(t_star)
    state.latch = ControllerLatch(
        t_j=t_star, ybar=ybar, xi=xi, zeta=zeta, theta_hat=theta_hat, alpha_f=alpha_f
    )
    alphas = virtual_inputs(state.latch, ctx)
    u = control_law(state.latch, alphas, ctx)
    if not math.isfinite(u):
        raise FloatingPointError(f"non-finite control recomputed at t={t_star!r}")
    xi_dot, zeta_dot = observer_derivatives(state.latch, u, ctx)
    state.derivs = ControllerDerivs(
        xi=xi_dot,
        zeta=zeta_dot,
        theta_hat=adaptive_derivative(state.latch, ctx.gains.delta, ctx.psi[0]),
        alpha_f=filter_derivative(state.latch, alphas, ctx.gains.rho),
    )
    state.u_held = u
    offset, cause = _deadline(state.derivs, ctx.thresholds)
    state.deadline = t_star + offset
    state.deadline_cause = cause


def ed2_fire(
    state: ControllerState,
    t_star: float,
    ybar_current: float,
    ctx: ControllerContext,
    cause: str,
) -> EventRecord:
    """Advance the controller to t_star, re-latch everything, rebuild u and deadlines.

    cause is "e_ybar" for an arrival-triggered firing and the deadline's
    condition name otherwise; the event value is the fired error measured just
    before re-latching.
    """
    if t_star < state.latch.t_j:
        raise ValueError(f"ED2 firing at t={t_star!r} precedes t_j={state.latch.t_j!r}")
    xi, zeta, theta_hat, alpha_f = state.eval_at(t_star)
    if cause == "e_ybar":
        value = abs(ybar_current - state.latch.ybar)
    elif cause == "e_xi":
        value = float(np.linalg.norm(xi - state.latch.xi))
    elif cause == "e_zeta":
        value = float(np.linalg.norm(zeta - state.latch.zeta))
    elif cause == "e_h":
        value = abs(theta_hat - state.latch.theta_hat)
    elif cause == "e_f":
        value = float(np.linalg.norm(alpha_f - state.latch.alpha_f))
    else:
        raise ValueError(f"unknown ED2 condition {cause!r}")
    _refresh(state, t_star, ybar_current, ctx)
    state.ed2_count += 1
    return EventRecord(t=t_star, detector=ED2, condition=cause, value=value)


def initialize_controller(
    ctx: ControllerContext,
    t0: float,
    xi0: np.ndarray,
    zeta0: np.ndarray,
    theta_hat0: float,
    alpha_f0: np.ndarray,
    ybar0: float,
) -> ControllerState:
    """Initial sample at t0: latch the initial conditions and compute u(t0).

    Mirrors the plant-side convention: this defines the first t_j but is not
    counted as an ED2 event.
    """
    latch = ControllerLatch(
        t_j=t0,
        ybar=ybar0,
        xi=np.asarray(xi0, dtype=float).copy(),
        zeta=np.asarray(zeta0, dtype=float).copy(),
        theta_hat=float(theta_hat0),
        alpha_f=np.asarray(alpha_f0, dtype=float).copy(),
    )
    zeros = ControllerDerivs(
        xi=np.zeros(ctx.n), zeta=np.zeros(ctx.n), theta_hat=0.0, alpha_f=np.zeros(ctx.n - 1)
    )
    state = ControllerState(
        latch=latch, derivs=zeros, u_held=0.0, deadline=math.inf, deadline_cause=""
    )
    _refresh(state, t0, ybar0, ctx)
    return state
