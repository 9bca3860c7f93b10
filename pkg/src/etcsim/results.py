"""Result containers shared by the simulation engine and the analysis layer."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

__all__ = ["ED1", "ED2", "EventRecord", "Sample", "Summary", "SimResult", "compute_summary"]

ED1 = "ED1"
ED2 = "ED2"


@dataclass(frozen=True)
class EventRecord:
    """A detector firing: when, which detector, which condition, at what value."""

    t: float
    detector: str  # ED1 or ED2
    condition: str  # e_y, e_ybar, e_xi, e_zeta, e_h, e_f
    value: float


@dataclass(frozen=True)
class Sample:
    """One recorded frame of the closed loop.

    ``ybar`` is the plant-side ZOH output; ``ybar_ctrl`` is the copy latched at
    the controller on the last ED2 instant.  Held signals are recorded with
    their right-continuous (post-event) values.
    """

    t: float
    x: np.ndarray
    y: float
    ybar: float
    u: float
    xi: np.ndarray
    zeta: np.ndarray
    theta_hat: float
    alpha_f: np.ndarray
    eps_norm: float
    V: float
    ybar_ctrl: float


@dataclass(frozen=True)
class Summary:
    ed1_count: int
    ed2_count: int
    ed1_min_gap: float
    ed1_mean_gap: float
    ed2_min_gap: float
    ed2_mean_gap: float
    tail_sup_y: float
    V_max: float
    lemma1_max_error: float


@dataclass
class SimResult:
    samples: list[Sample]
    events: list[EventRecord]
    summary: Optional[Summary] = field(default=None)


def _gap_stats(times: list[float]) -> tuple[float, float]:
    if len(times) < 2:
        return math.inf, math.inf
    gaps = [b - a for a, b in zip(times, times[1:])]
    return min(gaps), sum(gaps) / len(gaps)


def compute_summary(samples: list[Sample], events: list[EventRecord]) -> Summary:
    """Summary statistics recomputable from the raw series alone.

    The tail window for the ultimate output bound is the second half of the
    recorded horizon.
    """
    ed1_times = [e.t for e in events if e.detector == ED1]
    ed2_times = [e.t for e in events if e.detector == ED2]
    ed1_min, ed1_mean = _gap_stats(ed1_times)
    ed2_min, ed2_mean = _gap_stats(ed2_times)
    tail_start = samples[-1].t / 2.0 if samples else 0.0
    tail = [abs(s.y) for s in samples if s.t >= tail_start]
    return Summary(
        ed1_count=len(ed1_times),
        ed2_count=len(ed2_times),
        ed1_min_gap=ed1_min,
        ed1_mean_gap=ed1_mean,
        ed2_min_gap=ed2_min,
        ed2_mean_gap=ed2_mean,
        tail_sup_y=max(tail) if tail else 0.0,
        V_max=max(s.V for s in samples) if samples else 0.0,
        lemma1_max_error=max(abs(s.y - s.ybar_ctrl) for s in samples) if samples else 0.0,
    )
