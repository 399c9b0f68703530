import time

import numpy as np
import pytest

from src.config_loader import Config
from src.dynamics.engine import (
    STOP_ALL_AT_RISK,
    STOP_MAX_TICKS,
    at_risk_rate,
    band_counts,
    exposure,
    hospitalize_check,
    move,
    onset_tick,
    simulate,
    step,
    surge_tick,
)
from src.dynamics.health import update_health, update_health_array
from src.dynamics.model import stream_seeds
from src.dynamics.params import HealthParams
from src.dynamics.state import SimState
from src.environment.world import RecoveryTable, build_world
from src.exceptions import ConfigurationError, UndefinedRateError, ValidationError
from src.pollution.series import HOME, WORK
from src.population.synthesis import AgentGroup

from .helpers import home_agent, residential_world, zero_recovery

FULL_HORIZON = 8764


class TestHealthUpdate:
    def setup_method(self):
        self.params = HealthParams(alpha=0.01)

    def test_first_exposure_takes_the_seed_decrement(self):
        assert update_health(300, 150, self.params) == pytest.approx(299)

    def test_clean_air_at_full_health_changes_nothing(self):
        assert update_health(300, 99.9, self.params) == 300

    def test_loss_grows_with_the_deficit(self):
        # threshold is inclusive
        assert update_health(200, 100, self.params) == pytest.approx(199)
        assert update_health(100.5, 150, self.params) == pytest.approx(100.5 - 0.01 * 199.5)

    def test_recovery_below_adaptive_capacity(self):
        assert update_health(50, 50, self.params, grade=5) == pytest.approx(50.5)
        assert update_health(50, 50, self.params, grade=None) == 50

    def test_recovery_stops_at_adaptive_capacity(self):
        assert update_health(99.9, 0, self.params, grade=5) == pytest.approx(100.0)
        assert update_health(150, 0, self.params, grade=5) == 150

    def test_exposed_agent_below_capacity_still_recovers(self):
        assert update_health(50, 150, self.params, grade=5) == pytest.approx(50 - 2.5 + 0.5)

    def test_health_never_drops_below_zero(self):
        assert update_health(1, 150, HealthParams(alpha=0.5)) == 0.0

    def test_eta_scales_the_loss_per_group(self):
        params = HealthParams(alpha=0.01, eta={"young": 1.0, "active": 1.0, "old": 2.0})
        assert update_health(200, 150, params, group=AgentGroup.OLD) == pytest.approx(198)
        assert update_health(200, 150, params, group=AgentGroup.ACTIVE) == pytest.approx(199)

    def test_deficit_compounds_geometrically(self):
        params = zero_recovery(alpha=0.05)
        h = np.array([300.0])
        for k in range(12):
            h = update_health_array(h, np.array([150.0]), np.array([1.0]), np.array([0.0]), params)
            assert 300 - h[0] == pytest.approx(1.05 ** k)


class TestHealthParams:
    @pytest.mark.parametrize("overrides", [
        {"alpha": 0.0},
        {"alpha": 1.0},
        {"eta": {"young": 1.0, "active": 1.0}},
        {"eta": {"young": 1.0, "active": 0.0, "old": 1.0}},
        {"adaptive_capacity": 400.0},
        {"road_multiplier": 0.5},
        {"hospital_stay": 0},
    ])
    def test_invalid_parameters(self, overrides):
        with pytest.raises(ConfigurationError):
            HealthParams(**overrides)

    def test_from_config(self):
        config = Config.from_dict({"health": {"alpha": 0.007, "eta": {"young": 1.2, "active": 1.0, "old": 1.5}}})

        params = HealthParams.from_config(config)

        assert params.alpha == 0.007
        assert params.eta_vector() == (1.2, 1.0, 1.5)
        assert params.recovery.rates == (0.1, 0.2, 0.3, 0.4, 0.5)

    def test_from_config_bad_value(self):
        with pytest.raises(ConfigurationError):
            HealthParams.from_config(Config.from_dict({"health": {"alpha": "fast"}}))


class TestState:
    def test_tick_kinds_alternate(self, make_inputs):
        state = SimState(make_inputs([home_agent(0)]), zero_recovery())
        assert [state.kind_of(t) for t in range(4)] == [WORK, HOME, WORK, HOME]

    def test_unplaced_agent(self, make_inputs):
        with pytest.raises(ValidationError):
            SimState(make_inputs([home_agent(0, home_cell=None)]), zero_recovery())

    def test_recovery_table_must_cover_every_grade(self, make_inputs):
        world = build_world(np.full((2, 2), 110), np.full((2, 2), 3), "d")
        with pytest.raises(ConfigurationError):
            SimState(make_inputs([home_agent(0)], world=world), zero_recovery())


class TestMovement:
    def test_workers_commute_and_return(self, make_inputs):
        state = SimState(make_inputs([home_agent(0, home_cell=0, work_cell=24)]), zero_recovery())

        move(state, WORK)
        assert state.current[0] == 24
        move(state, HOME)
        assert state.current[0] == 0

    def test_young_agents_stay_within_radius(self, make_inputs):
        state = SimState(make_inputs([home_agent(0, age=8, home_cell=12)]), zero_recovery(), seed=5,
                         young_radius=1)
        allowed = {7, 11, 12, 13, 17}

        for _ in range(30):
            move(state, WORK)
            assert state.current[0] in allowed
            move(state, HOME)
            assert state.current[0] == 12

    def test_patients_do_not_move(self, make_inputs):
        state = SimState(make_inputs([home_agent(0, home_cell=0, work_cell=24)]), zero_recovery())
        state.remaining[0] = 5
        state.current[0] = 7

        move(state, WORK)
        assert state.current[0] == 7
        move(state, HOME)
        assert state.current[0] == 7

    def test_young_day_cells_cover_the_radius_three_disk(self, make_inputs):
        world = residential_world(size=9)
        home = 4 * 9 + 4
        state = SimState(make_inputs([home_agent(0, age=8, home_cell=home)], world=world), zero_recovery(),
                         seed=2, young_radius=3)
        disk = world.neighbors_within((4, 4), 3)

        visited = set()
        for _ in range(2000):
            move(state, WORK)
            visited.add(world.coords(int(state.current[0])))
            move(state, HOME)

        assert len(disk) == 29
        assert visited == disk

    def test_unknown_tick_kind(self, make_inputs):
        state = SimState(make_inputs([home_agent(0)]), zero_recovery())
        with pytest.raises(ValidationError):
            move(state, "night")

    def test_road_cells_multiply_exposure(self, make_inputs):
        world = build_world(np.array([[110, 150]]), np.array([[1, 0]]), "d")
        inputs = make_inputs([home_agent(0, home_cell=0, work_cell=1)], value=100.0, world=world)
        state = SimState(inputs, HealthParams(road_multiplier=1.5))

        move(state, WORK)
        assert exposure(state)[0] == pytest.approx(150.0)
        move(state, HOME)
        assert exposure(state)[0] == pytest.approx(100.0)

    def test_unit_road_multiplier_leaves_exposure_unchanged(self, make_inputs):
        world = build_world(np.array([[110, 150]]), np.array([[1, 0]]), "d")
        inputs = make_inputs([home_agent(0, home_cell=0, work_cell=1)], value=100.0, world=world)
        state = SimState(inputs, HealthParams(road_multiplier=1.0))

        move(state, WORK)
        assert exposure(state)[0] == 100.0
        move(state, HOME)
        assert exposure(state)[0] == 100.0


class TestHospital:
    def test_admission_stay_and_discharge(self, make_inputs):
        state = SimState(make_inputs([home_agent(0), home_agent(1)]), zero_recovery())
        state.health[0] = 0.0

        hospitalize_check(state)
        assert state.remaining[0] == 28
        assert state.admissions.tolist() == [1, 0]
        assert at_risk_rate(state) == 0.5

        for _ in range(27):
            hospitalize_check(state)
        assert state.hospitalized[0]
        assert state.health[0] == 0.0

        hospitalize_check(state)
        assert not state.hospitalized[0]
        assert state.health[0] == 100.0
        assert state.admissions[0] == 1
        assert at_risk_rate(state) == 0.0


class TestSimulate:
    def test_all_at_risk_stop_matches_closed_form(self, make_inputs):
        # D(k) = 1.5^k after the seed tick; 1.5^14 > 200 > 1.5^13
        result = simulate(make_inputs([home_agent(0)], value=200.0), zero_recovery(alpha=0.5), max_ticks=80)

        assert result.stop_cause == STOP_ALL_AT_RISK
        assert result.final_tick == 15
        np.testing.assert_array_equal(result.rates[:14], 0.0)
        assert result.rates[14] == 1.0
        np.testing.assert_allclose(result.mean_health, 300 - 1.5 ** np.arange(15))

    @pytest.mark.parametrize("alpha", [0.001, 0.0043, 0.01])
    def test_closed_form_over_the_full_horizon(self, make_inputs, alpha):
        inputs = make_inputs([home_agent(0)], value=200.0, n=FULL_HORIZON)

        result = simulate(inputs, zero_recovery(alpha=alpha), max_ticks=FULL_HORIZON)

        deficit = (1 + alpha) ** np.arange(result.n_ticks)
        crossing = int(np.flatnonzero(deficit > 200)[0])
        assert result.stop_cause == STOP_ALL_AT_RISK
        assert result.final_tick == crossing + 1
        np.testing.assert_array_equal(result.rates[:crossing], 0.0)
        assert result.rates[crossing] == 1.0
        np.testing.assert_allclose(result.mean_health, 300 - deficit, rtol=1e-9)

    def test_clean_air_runs_to_the_horizon(self, make_inputs):
        agents = [home_agent(i, age=age) for i, age in enumerate([8, 40, 70] * 10)]

        started = time.perf_counter()
        result = simulate(make_inputs(agents, value=0.0, n=FULL_HORIZON), HealthParams(),
                          max_ticks=FULL_HORIZON)
        elapsed = time.perf_counter() - started

        assert result.stop_cause == STOP_MAX_TICKS
        assert result.final_tick == FULL_HORIZON
        np.testing.assert_array_equal(result.rates, 0.0)
        np.testing.assert_array_equal(result.mean_health, 300.0)
        assert elapsed < 60

    def test_horizon_stop(self, make_inputs):
        result = simulate(make_inputs([home_agent(0), home_agent(1, age=70)], value=50.0),
                          zero_recovery(), max_ticks=10)

        assert result.stop_cause == STOP_MAX_TICKS
        assert result.final_tick == 10
        assert result.n_ticks == 10
        np.testing.assert_array_equal(result.rates, 0.0)
        assert result.onset_tick() is None

    def test_series_shorter_than_horizon(self, make_inputs):
        with pytest.raises(ConfigurationError):
            simulate(make_inputs([home_agent(0)], n=10), zero_recovery(), max_ticks=20)

    def test_no_assessed_agents(self, make_inputs):
        with pytest.raises(UndefinedRateError):
            simulate(make_inputs([home_agent(0, cross_district=True)]), zero_recovery(), max_ticks=5)

    def test_cross_district_agents_are_not_assessed(self, make_inputs):
        agents = [home_agent(0), home_agent(1, cross_district=True), home_agent(2, age=8)]

        result = simulate(make_inputs(agents, value=200.0), zero_recovery(alpha=0.5), max_ticks=20)

        assert result.assessed.tolist() == [1, 1, 0]
        assert result.stop_cause == STOP_ALL_AT_RISK
        frame = result.trajectory_frame()
        assert set(frame["group"]) == {"young", "active", "all"}
        assert list(frame.columns) == ["tick", "group", "at_risk_count", "at_risk_rate"]

    def test_step_past_the_horizon(self, make_inputs):
        state = SimState(make_inputs([home_agent(0)]), zero_recovery(), max_ticks=1)
        step(state)
        with pytest.raises(ValidationError):
            step(state)

    def test_health_oscillates_when_capacity_is_full_health(self, make_inputs):
        pattern = np.array([200.0] * 6 + [50.0] * 10)
        params = HealthParams(alpha=0.5, adaptive_capacity=300.0, recovery=RecoveryTable((0.1,)))

        result = simulate(make_inputs([home_agent(0)], value=np.tile(pattern, 10)), params, max_ticks=64)

        rises = np.diff(result.mean_health)
        assert (rises > 0).any()
        assert (rises < 0).any()

    def test_no_recovery_above_default_capacity(self, make_inputs):
        pattern = np.array([200.0] * 6 + [50.0] * 10)
        params = HealthParams(alpha=0.5, recovery=RecoveryTable((0.1,)))

        result = simulate(make_inputs([home_agent(0)], value=np.tile(pattern, 10)), params, max_ticks=16)

        np.testing.assert_array_equal(result.mean_health[6:16], result.mean_health[5])

    def test_patients_count_as_at_risk_whatever_their_health(self, make_inputs):
        state = SimState(make_inputs([home_agent(0), home_agent(1)]), zero_recovery())
        state.remaining[0] = 3
        state.health[0] = 250.0

        assert state.at_risk_mask().tolist() == [True, False]
        assert state.agent(0).hospitalized

    def test_snapshot_and_district_table(self, make_inputs):
        result = simulate(make_inputs([home_agent(0), home_agent(1, cross_district=True)], value=50.0),
                          zero_recovery(), max_ticks=4, snapshot=True)

        assert result.agents["cross_district"].tolist() == [False, True]
        assert result.agents["band"].tolist() == ["green", "green"]
        districts = result.district_frame()
        assert districts.loc[0, "assessed"] == 1
        assert districts.loc[0, "at_risk_rate"] == 0.0


class TestIndicators:
    def test_onset_tick(self):
        assert onset_tick(np.array([0.0, 0.01, 0.06, 0.2])) == 2
        assert onset_tick(np.array([0.0, 0.01])) is None

    def test_surge_tick(self):
        assert surge_tick(np.array([0.0, 0.1, 0.5, 0.6])) == 2
        assert surge_tick(np.zeros(5)) is None

    def test_band_counts(self):
        assert band_counts(np.array([250.0, 200.0, 199.0, 100.0, 99.9, 0.0])).tolist() == [2, 2, 2]


class TestModel:
    def test_stream_seeds_are_stable_and_distinct(self):
        seeds = stream_seeds(42)
        assert seeds == stream_seeds(42)
        assert len(set(seeds)) == 3
        assert seeds != stream_seeds(43)

    def test_same_seed_same_run(self, small_model):
        model = small_model()

        first = model.run(seed=3, max_ticks=30)
        second = model.run(seed=3, max_ticks=30)

        assert first.seed == 3
        np.testing.assert_array_equal(first.at_risk, second.at_risk)
        np.testing.assert_array_equal(first.mean_health, second.mean_health)

    def test_population_from_census(self, small_model):
        agents = small_model().agents(seed=1)

        assert len(agents) == 80
        assert sum(a.group is AgentGroup.ACTIVE for a in agents) == 40
        assert all(a.work_district == "d" for a in agents if a.group is AgentGroup.ACTIVE)

    def test_variant_shares_loaded_inputs(self, small_model):
        model = small_model()
        variant = model.variant({"pollution.scenario": "inc"})

        assert variant.load_worlds() is model.load_worlds()
        assert variant.config.get("pollution.scenario") == "inc"
        assert model.config.get("pollution.scenario") == "bau"
        assert len(variant.projected_series()["d"]) == 2 * len(model.load_base_series()["d"])
