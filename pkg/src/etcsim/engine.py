"""Closed-loop orchestration: continuous plant, affine controller, event ordering.

Loop contract per base step: propose an RK4 plant step with the held control
frozen; localize any ED1 crossing by bisection and deliver the output to the
controller (ideal zero-delay channel, arrival condition checked on delivery);
truncate at the controller deadline when it falls inside the step; handle the
earliest event first and re-enter; at exact ties ED1 is processed before ED2;
after any ED2 firing the plant integration restarts because u changed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .analysis import diagnostic_frame
from .controller import (
    ControllerContext,
    GainSet,
    TriggerThresholds,
    ed2_fire,
    ed2_on_arrival,
    initialize_controller,
)
from .numerics import build_companion, is_hurwitz, locate_crossing, rk4_step, solve_lyapunov
from .plant import PlantModel, PlantState, ed1_condition, ed1_fire, plant_derivative
from .results import Sample, SimResult, Summary, compute_summary

__all__ = ["SimConfig", "EventStormError", "run_simulation", "replay_summary"]

EVENT_STORM_LIMIT = 10**6


class EventStormError(RuntimeError):
    """More than the allowed number of detector firings in one run."""


@dataclass
class SimConfig:
    """Complete description of one deterministic closed-loop run."""

    model: PlantModel
    k: np.ndarray
    gains: GainSet
    thresholds: TriggerThresholds
    x0: np.ndarray
    xi0: np.ndarray
    zeta0: np.ndarray
    theta_hat0: float
    alpha_f0: np.ndarray
    t_end: float
    h: float = 0.01
    record_stride: int = 1
    q: Optional[float] = None
    loc_tol: float = 1e-9

    def validate(self) -> None:
        self.model.validate()
        n = self.model.n
        if n < 2:
            raise ValueError("the controller structure requires system order n >= 2")
        if self.h <= 0.0:
            raise ValueError("base step h must be positive")
        if self.t_end <= 0.0:
            raise ValueError("t_end must be positive")
        if self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")
        if self.loc_tol <= 0.0:
            raise ValueError("localization tolerance must be positive")
        for name, vec, length in (
            ("k", self.k, n),
            ("x0", self.x0, n),
            ("xi0", self.xi0, n),
            ("zeta0", self.zeta0, n),
            ("alpha_f0", self.alpha_f0, n - 1),
        ):
            if np.asarray(vec).shape != (length,):
                raise ValueError(f"{name} must be a vector of length {length}")
        self.gains.validate(n)
        self.thresholds.validate()
        if not is_hurwitz(build_companion(self.k)):
            raise ValueError("observer gain k yields a non-Hurwitz companion matrix")


def run_simulation(config: SimConfig) -> SimResult:
    """Deterministic trajectory of the event-triggered closed loop on [0, t_end]."""
    config.validate()
    model = config.model
    n = model.n
    A_c = build_companion(config.k)
    P = solve_lyapunov(A_c).P
    ctx = ControllerContext(
        n=n,
        A_c=A_c,
        k=np.asarray(config.k, dtype=float),
        psi=tuple(model.psi),
        gains=config.gains,
        thresholds=config.thresholds,
    )

    x = np.asarray(config.x0, dtype=float).copy()
    t_cur = 0.0
    y0 = float(x[0])
    plant = PlantState(t=0.0, x=x, y_latched=y0, tbar_last=0.0)
    ctrl = initialize_controller(
        ctx, 0.0, config.xi0, config.zeta0, config.theta_hat0, config.alpha_f0, ybar0=y0
    )

    events = []
    samples: list[Sample] = []
    gamma_y = config.thresholds.gamma_y
    gamma_ybar = config.thresholds.gamma_ybar
    loc_tol = config.loc_tol

    def field_fn(t: float, state: np.ndarray) -> np.ndarray:
        return plant_derivative(state, ctrl.u_held, model)

    def record(t: float, state: np.ndarray) -> None:
        xi, zeta, theta_hat, alpha_f = ctrl.eval_at(t)
        frame = diagnostic_frame(
            t, state, xi, zeta, theta_hat, alpha_f, model.theta_true, P, ctx
        )
        sample = Sample(
            t=t,
            x=state.copy(),
            y=float(state[0]),
            ybar=plant.y_latched,
            u=ctrl.u_held,
            xi=xi,
            zeta=zeta,
            theta_hat=theta_hat,
            alpha_f=alpha_f,
            eps_norm=float(np.linalg.norm(frame.eps)),
            V=frame.V,
            ybar_ctrl=ctrl.latch.ybar,
        )
        if samples and samples[-1].t == t:
            samples[-1] = sample  # same instant: keep the post-event view
        else:
            samples.append(sample)

    def guard_storm() -> None:
        if len(events) > EVENT_STORM_LIMIT:
            raise EventStormError(
                f"event storm: >{EVENT_STORM_LIMIT} firings by t={t_cur:.6g} "
                f"(ED1={plant.ed1_count}, ED2={ctrl.ed2_count}); "
                "check thresholds and gains"
            )

    record(0.0, x)

    steps_done = 0
    while t_cur < config.t_end:
        t_grid = min((steps_done + 1) * config.h, config.t_end)
        while t_cur < t_grid:
            # a deadline left exactly at the current instant (tie resolved
            # in favor of an ED1 arrival that did not fire ED2) goes first
            if ctrl.deadline <= t_cur:
                events.append(ed2_fire(ctrl, t_cur, plant.y_latched, ctx, ctrl.deadline_cause))
                record(t_cur, x)
                guard_storm()
                continue
            t_stop = min(t_grid, ctrl.deadline)
            h_trial = t_stop - t_cur
            x_trial = rk4_step(field_fn, t_cur, x, h_trial)
            g_start = ed1_condition(float(x[0]), plant, gamma_y)
            if g_start >= 0.0:
                raise RuntimeError(
                    f"ED1 margin nonnegative at segment start t={t_cur!r}; scheduling bug"
                )
            g_end = ed1_condition(float(x_trial[0]), plant, gamma_y)
            if g_end >= 0.0:
                t_from, x_from = t_cur, x

                def g_of_t(t: float) -> float:
                    if t <= t_from:
                        return g_start
                    state = rk4_step(field_fn, t_from, x_from, t - t_from)
                    return ed1_condition(float(state[0]), plant, gamma_y)

                t_star = locate_crossing(g_of_t, t_cur, t_stop, loc_tol)
                x = rk4_step(field_fn, t_cur, x, t_star - t_cur)
                t_cur = t_star
                plant.t, plant.x = t_cur, x
                y_star = float(x[0])
                events.append(ed1_fire(plant, t_star, y_star))
                if ed2_on_arrival(ctrl, y_star, gamma_ybar):
                    events.append(ed2_fire(ctrl, t_star, y_star, ctx, "e_ybar"))
                record(t_cur, x)
                guard_storm()
                continue
            x = x_trial
            t_cur = t_stop
            plant.t, plant.x = t_cur, x
            if t_stop == ctrl.deadline:
                events.append(ed2_fire(ctrl, t_cur, plant.y_latched, ctx, ctrl.deadline_cause))
                record(t_cur, x)
                guard_storm()
        steps_done += 1
        if steps_done % config.record_stride == 0:
            record(t_cur, x)

    record(config.t_end, x)
    result = SimResult(samples=samples, events=events)
    result.summary = compute_summary(samples, events)
    return result


def replay_summary(result: SimResult) -> Summary:
    """Recompute the summary from the raw series; must equal the stored one."""
    recomputed = compute_summary(result.samples, result.events)
    if result.summary is not None and recomputed != result.summary:
        raise ValueError(
            "stored summary disagrees with the recorded series; recording bug"
        )
    return recomputed
