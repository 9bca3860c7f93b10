"""True system: output-feedback-form dynamics, plant-side output ZOH, detector ED1."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exprlang import NonlinearityExpr, eval_expr
from .results import ED1, EventRecord

__all__ = ["PlantModel", "PlantState", "plant_derivative", "ed1_condition", "ed1_fire"]


@dataclass(frozen=True)
class PlantModel:
    """System order, uncertain parameter, nonlinearities and their Lipschitz data.

    theta_true is the simulator's ground truth; the controller never reads it.
    L and Psi are the user-supplied Lipschitz constants and slope bounds of the
    psi_i (they are metadata for analysis, not inputs to the dynamics).
    """

    n: int
    theta_true: float
    theta_bar: float
    psi: tuple[NonlinearityExpr, ...]
    L: tuple[float, ...]
    Psi: tuple[float, ...]

    def validate(self) -> None:
        if self.n < 1:
            raise ValueError("system order n must be >= 1")
        if abs(self.theta_true) > self.theta_bar:
            raise ValueError(
                f"|theta_true|={abs(self.theta_true)} exceeds theta_bar={self.theta_bar}"
            )
        for name, seq in (("psi", self.psi), ("L", self.L), ("Psi", self.Psi)):
            if len(seq) != self.n:
                raise ValueError(f"{name} must have length n={self.n}")
        if any(v <= 0.0 for v in self.L) or any(v <= 0.0 for v in self.Psi):
            raise ValueError("Lipschitz constants and slope bounds must be positive")

    @property
    def lipschitz_aggregate(self) -> float:
        """Combined constant sqrt(sum L_i^2) used by the analysis layer."""
        return math.sqrt(sum(v * v for v in self.L))

    def psi_vector(self, y: float) -> np.ndarray:
        return np.array([eval_expr(p, y) for p in self.psi])


@dataclass
class PlantState:
    """Continuous plant state plus the ED1 latch bookkeeping."""

    t: float
    x: np.ndarray
    y_latched: float
    tbar_last: float
    ed1_count: int = 0

    @property
    def y(self) -> float:
        return float(self.x[0])


def plant_derivative(x: np.ndarray, u: float, model: PlantModel) -> np.ndarray:
    """xdot_i = x_{i+1} + theta*psi_i(x_1) for i < n; xdot_n = u + theta*psi_n(x_1)."""
    y = float(x[0])
    dx = model.theta_true * model.psi_vector(y)
    dx[:-1] += x[1:]
    dx[-1] += u
    return dx


def ed1_condition(y_now: float, state: PlantState, gamma_y: float) -> float:
    """Trigger margin |y - y_latched| - gamma_y; ED1 fires when it reaches >= 0."""
    return abs(y_now - state.y_latched) - gamma_y


def ed1_fire(state: PlantState, t_star: float, y_star: float) -> EventRecord:
    """Latch the output at a localized ED1 crossing and log the firing.

    The initial latch at t=0 is set directly when the state is constructed and
    is not routed through here, so ed1_count only counts genuine firings.
    """
    if t_star <= state.tbar_last:
        raise ValueError(
            f"ED1 firing time {t_star!r} does not advance past {state.tbar_last!r}"
        )
    e_y = abs(y_star - state.y_latched)
    state.y_latched = y_star
    state.tbar_last = t_star
    state.ed1_count += 1
    return EventRecord(t=t_star, detector=ED1, condition="e_y", value=e_y)
