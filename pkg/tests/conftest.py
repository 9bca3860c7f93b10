import numpy as np
import pytest

from etcsim import (
    GainSet,
    PlantModel,
    SimConfig,
    TriggerThresholds,
    parse_expr,
    run_simulation,
)

CASE1_GAMMAS = (0.05, 0.051, 0.2, 0.2, 0.2, 0.2)
CASE2_GAMMAS = (0.3, 0.31, 0.5, 0.5, 0.5, 0.5)


def study_model() -> PlantModel:
    return PlantModel(
        n=2,
        theta_true=1.0,
        theta_bar=1.5,
        psi=(parse_expr("cos(y)"), parse_expr("y+1")),
        L=(1.0, 1.0),
        Psi=(1.0, 1.0),
    )


def study_gains(delta: float = 0.6) -> GainSet:
    return GainSet(
        c=(8.5, 5.5), rho=(12.0,), phi=(10.0,), varrho=(0.16,), delta=delta, sigma=0.1
    )


def study_config(gammas=CASE1_GAMMAS, t_end: float = 10.0, h: float = 0.01, **kw) -> SimConfig:
    return SimConfig(
        model=study_model(),
        k=np.array([5.0, 5.0]),
        gains=study_gains(),
        thresholds=TriggerThresholds(*gammas),
        x0=np.array([5.0, -5.0]),
        xi0=np.zeros(2),
        zeta0=np.array([0.0, -4.0]),
        theta_hat0=4.0,
        alpha_f0=np.zeros(1),
        t_end=t_end,
        h=h,
        q=50.0,
        **kw,
    )


@pytest.fixture(scope="session")
def case1_result():
    return run_simulation(study_config(CASE1_GAMMAS))


@pytest.fixture(scope="session")
def case2_result():
    return run_simulation(study_config(CASE2_GAMMAS))
