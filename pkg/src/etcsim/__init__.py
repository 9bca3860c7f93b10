"""etcsim: deterministic event-triggered adaptive output-feedback control simulator."""

from .analysis import (
    AdvisorError,
    AdvisorReport,
    ConstraintResult,
    DiagnosticFrame,
    advise_parameters,
    companion_variables,
    diagnostic_frame,
    estimation_error,
    invariance_check,
    lemma1_audit,
    lyapunov_value,
    practical_bound,
    trigger_statistics,
)
from .baseline import BaselineConfig, baseline_v, run_baseline
from .controller import (
    ControllerContext,
    ControllerState,
    GainSet,
    TriggerThresholds,
    compute_deadline,
    control_law,
    ed2_fire,
    ed2_on_arrival,
    initialize_controller,
    virtual_inputs,
)
from .engine import EventStormError, SimConfig, replay_summary, run_simulation
from .exprlang import (
    ExprEvalError,
    ExprSyntaxError,
    NonlinearityExpr,
    eval_expr,
    parse_expr,
    print_expr,
)
from .numerics import (
    LyapunovCert,
    build_companion,
    is_hurwitz,
    locate_crossing,
    rk4_step,
    solve_lyapunov,
)
from .plant import PlantModel, PlantState, ed1_condition, ed1_fire, plant_derivative
from .results import ED1, ED2, EventRecord, Sample, SimResult, Summary

__version__ = "0.1.0"
