"""Comparison controller: full-state event-triggered backstepping, second-order case.

The comparison scheme monitors the full plant state on the controller side.
Monitoring is sampled: trigger decisions happen on a fine grid of
``monitor_substeps`` per base step, and when |v - v_latched| >= gamma_c at a
decision instant the control updates to the freshly monitored value.  (Acting
on an older, crossing-localized value instead behaves as a pure control delay
and destabilizes the transient.)  Plant-to-controller transmissions are
charged once per base step; controller-to-plant once per trigger.  The module
is deliberately hard-coded to the n=2 study plant (psi = (cos y, y+1)) and
exists only to reproduce the transmission-count comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import rk4_step
from .results import ED2, EventRecord, Sample, SimResult, compute_summary

__all__ = ["BaselineConfig", "BaselineResult", "baseline_v", "run_baseline"]


@dataclass(frozen=True)
class BaselineConfig:
    x0: tuple[float, float]
    theta_hat0: float
    theta_true: float = 1.0
    k_fb: float = 4.0
    c_fb: float = 4.0  # the alpha_1 gain
    gamma_c: float = 0.06
    leak: float = 1.5
    h: float = 0.01
    t_end: float = 10.0
    monitor_substeps: int = 2
    record_stride: int = 1

    def validate(self) -> None:
        if self.gamma_c <= 0.0:
            raise ValueError("gamma_c must be positive")
        if self.h <= 0.0 or self.t_end <= 0.0:
            raise ValueError("h and t_end must be positive")
        if self.monitor_substeps < 1:
            raise ValueError("monitor_substeps must be >= 1")


@dataclass
class BaselineResult:
    result: SimResult
    plant_to_controller: int  # one transmission per base step (monitoring)
    controller_to_plant: int  # one transmission per trigger


def _theta_hat_dot(x1: float, x2: float, theta_hat: float, cfg: BaselineConfig) -> float:
    alpha1 = -cfg.c_fb * x1 - theta_hat * math.cos(x1)
    z2 = x2 - alpha1
    d_alpha1_dx1 = -cfg.c_fb + theta_hat * math.sin(x1)
    return (
        x1 * math.cos(x1)
        + z2 * (x1 + 1.0 - d_alpha1_dx1 * math.cos(x1))
        - cfg.leak * theta_hat
    )


def baseline_v(
    x: np.ndarray,
    theta_hat: float,
    cfg: BaselineConfig = BaselineConfig((5.0, -5.0), 4.0),
) -> float:
    """Continuously defined control signal of the full-state scheme.

    v = -k z2 - z1 + (d alpha1/d x1) x2 - theta_hat (x1 + 1 - d alpha1/d x1)
        + (d alpha1/d theta_hat) theta_hat_dot
    with alpha1 = -c x1 - theta_hat cos(x1), z1 = x1, z2 = x2 - alpha1.
    """
    x1, x2 = float(x[0]), float(x[1])
    alpha1 = -cfg.c_fb * x1 - theta_hat * math.cos(x1)
    z1 = x1
    z2 = x2 - alpha1
    d_alpha1_dx1 = -cfg.c_fb + theta_hat * math.sin(x1)
    d_alpha1_dth = -math.cos(x1)
    th_dot = _theta_hat_dot(x1, x2, theta_hat, cfg)
    return (
        -cfg.k_fb * z2
        - z1
        + d_alpha1_dx1 * x2
        - theta_hat * (x1 + 1.0 - d_alpha1_dx1)
        + d_alpha1_dth * th_dot
    )


def run_baseline(cfg: BaselineConfig) -> BaselineResult:
    """Simulate the full-state comparison loop on the shared base-step grid."""
    cfg.validate()
    theta = cfg.theta_true

    state = np.array([cfg.x0[0], cfg.x0[1], cfg.theta_hat0], dtype=float)
    t_cur = 0.0
    u_held = baseline_v(state[:2], state[2], cfg)
    v_latched = u_held
    events: list[EventRecord] = []
    samples: list[Sample] = []

    def field_fn(t: float, s: np.ndarray) -> np.ndarray:
        x1, x2, th = s
        return np.array(
            [
                x2 + theta * math.cos(x1),
                u_held + theta * (x1 + 1.0),
                _theta_hat_dot(x1, x2, th, cfg),
            ]
        )

    def record(t: float, s: np.ndarray) -> None:
        y = float(s[0])
        sample = Sample(
            t=t,
            x=s[:2].copy(),
            y=y,
            ybar=y,
            u=u_held,
            xi=np.zeros(2),
            zeta=np.zeros(2),
            theta_hat=float(s[2]),
            alpha_f=np.zeros(1),
            eps_norm=0.0,
            V=0.0,
            ybar_ctrl=y,
        )
        if samples and samples[-1].t == t:
            samples[-1] = sample
        else:
            samples.append(sample)

    record(0.0, state)

    steps_done = 0
    while t_cur < cfg.t_end:
        t_step = t_cur
        t_grid = min((steps_done + 1) * cfg.h, cfg.t_end)
        for sub in range(1, cfg.monitor_substeps + 1):
            if sub < cfg.monitor_substeps:
                t_next = t_step + (t_grid - t_step) * sub / cfg.monitor_substeps
            else:
                t_next = t_grid
            state = rk4_step(field_fn, t_cur, state, t_next - t_cur)
            t_cur = t_next
            v_now = baseline_v(state[:2], state[2], cfg)
            if abs(v_now - v_latched) >= cfg.gamma_c:
                events.append(
                    EventRecord(
                        t=t_cur, detector=ED2, condition="e_v", value=abs(v_now - v_latched)
                    )
                )
                v_latched = v_now
                u_held = v_now
                record(t_cur, state)
        steps_done += 1
        if steps_done % cfg.record_stride == 0:
            record(t_cur, state)

    record(cfg.t_end, state)
    result = SimResult(samples=samples, events=events)
    result.summary = compute_summary(samples, events)
    return BaselineResult(
        result=result,
        plant_to_controller=steps_done,
        controller_to_plant=len(events),
    )
