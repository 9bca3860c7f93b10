import math

import numpy as np
import pytest

from etcsim import PlantModel, PlantState, parse_expr
from etcsim.plant import ed1_condition, ed1_fire, plant_derivative
from tests.conftest import study_model


def make_state(y_latched: float = 5.0, t: float = 0.0) -> PlantState:
    return PlantState(t=t, x=np.array([y_latched, -5.0]), y_latched=y_latched, tbar_last=t)


class TestPlantDerivative:
    def test_study_initial_point(self):
        dx = plant_derivative(np.array([5.0, -5.0]), 0.0, study_model())
        assert dx[0] == pytest.approx(-5.0 + math.cos(5.0), abs=1e-15)
        assert dx[1] == pytest.approx(6.0, abs=1e-15)

    def test_unforced_origin_no_uncertainty(self):
        model = PlantModel(
            n=2, theta_true=0.0, theta_bar=1.0,
            psi=(parse_expr("cos(y)"), parse_expr("y+1")),
            L=(1.0, 1.0), Psi=(1.0, 1.0),
        )
        assert np.array_equal(plant_derivative(np.zeros(2), 0.0, model), np.zeros(2))

    def test_unit_control_at_origin(self):
        dx = plant_derivative(np.zeros(2), 1.0, study_model())
        assert np.allclose(dx, [1.0, 2.0])


class TestED1Condition:
    def test_fire_above_threshold(self):
        g = ed1_condition(5.06, make_state(5.0), 0.05)
        assert g == pytest.approx(0.01, abs=1e-12)
        assert g >= 0.0

    def test_zero_error(self):
        assert ed1_condition(5.0, make_state(5.0), 0.05) == -0.05

    def test_boundary_uses_geq(self):
        g = ed1_condition(4.95, make_state(5.0), 0.05)
        assert g == pytest.approx(0.0, abs=1e-12)


class TestED1Fire:
    def test_latch_update(self):
        state = make_state(5.0)
        event = ed1_fire(state, 0.02, 5.05)
        assert state.y_latched == 5.05
        assert state.tbar_last == 0.02
        assert state.ed1_count == 1
        assert event.detector == "ED1"
        assert event.condition == "e_y"
        assert event.value == pytest.approx(0.05, abs=1e-12)

    def test_non_advancing_time_rejected(self):
        state = make_state(5.0)
        ed1_fire(state, 0.02, 5.05)
        with pytest.raises(ValueError):
            ed1_fire(state, 0.02, 5.10)

    def test_initial_latch_not_counted(self):
        # initialization latches y(0) directly at construction, count stays 0
        state = make_state(5.0, t=0.0)
        assert state.ed1_count == 0
        assert state.y_latched == 5.0


class TestPlantModelValidation:
    def test_theta_bound(self):
        model = PlantModel(
            n=1, theta_true=2.0, theta_bar=1.5,
            psi=(parse_expr("y"),), L=(1.0,), Psi=(1.0,),
        )
        with pytest.raises(ValueError, match="theta_bar"):
            model.validate()

    def test_length_mismatch(self):
        model = PlantModel(
            n=2, theta_true=0.0, theta_bar=1.0,
            psi=(parse_expr("y"),), L=(1.0, 1.0), Psi=(1.0, 1.0),
        )
        with pytest.raises(ValueError, match="psi"):
            model.validate()

    def test_nonpositive_lipschitz(self):
        model = PlantModel(
            n=1, theta_true=0.0, theta_bar=1.0,
            psi=(parse_expr("y"),), L=(0.0,), Psi=(1.0,),
        )
        with pytest.raises(ValueError, match="positive"):
            model.validate()

    def test_aggregate(self):
        assert study_model().lipschitz_aggregate == pytest.approx(math.sqrt(2.0))
