import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hetero_orch.autoscaler import (
    ScalerConfig,
    ScalerState,
    apply_cooldown,
    desired_replicas,
    target_metric,
)
from hetero_orch.catalog import DeploymentUnitSpec


def unit(tput=50.0, target=1.0):
    return DeploymentUnitSpec(
        id="u", model_name="m", hardware_kind="Other", framework="Other",
        execution_mode="Graph", cost_per_hour=1.0, max_throughput=tput, base_latency=0.5,
        utilization_target=target,
    )


def test_target_metric(table1):
    assert target_metric(table1["sd21-inf2"]) == pytest.approx(73.5)
    assert target_metric(table1["sd21-g5-triton"]) == pytest.approx(81.0)
    assert target_metric(unit(50.0, 1.0)) == 50


def test_desired_replicas_examples(table1):
    inf2 = table1["sd21-inf2"]
    assert desired_replicas(inf2, 150, 0) == 3
    assert desired_replicas(inf2, 0, 5) == 0
    assert desired_replicas(inf2, 0, 5, ScalerConfig(min_replicas=2)) == 2
    u = unit(50.0, 1.0)
    for n in range(1, 10):
        assert desired_replicas(u, n * 50.0, 0) == n


def test_desired_replicas_clamped():
    assert desired_replicas(unit(), 10_000, 0, ScalerConfig(max_replicas=4)) == 4


def test_desired_replicas_negative():
    with pytest.raises(ValueError):
        desired_replicas(unit(), -1.0)


def test_config_validation():
    with pytest.raises(ValueError):
        ScalerConfig(min_replicas=5, max_replicas=2)
    with pytest.raises(ValueError):
        ScalerConfig(cooldown_up=-1)


unit_st = st.builds(unit, st.floats(1.0, 500.0), st.floats(0.05, 1.0))


@given(unit_st, st.floats(0, 1e4), st.floats(0, 1e4))
def test_monotone(u, a, b):
    cfg = ScalerConfig(max_replicas=10**6)
    lo, hi = sorted((a, b))
    assert desired_replicas(u, lo, 0, cfg) <= desired_replicas(u, hi, 0, cfg)


@given(unit_st, st.floats(0, 1e4))
def test_covers_without_overshoot(u, arrival):
    cfg = ScalerConfig(max_replicas=10**6)
    n = desired_replicas(u, arrival, 0, cfg)
    tm = target_metric(u)
    assert n * tm >= arrival
    if n > cfg.min_replicas:
        assert (n - 1) * tm < arrival


def test_cooldown_examples():
    cfg = ScalerConfig(cooldown_up=30, cooldown_down=120)
    state = ScalerState.initial(["a"], cfg)
    state["a"].current_replicas = 2
    state["a"].last_scale_up_at = 100.0
    assert apply_cooldown(state, "a", 4, 105.0, cfg) == 2
    assert state["a"].last_scale_up_at == 100.0
    assert apply_cooldown(state, "a", 4, 160.0, cfg) == 4
    assert state["a"].last_scale_up_at == 160.0
    before = (state["a"].last_scale_up_at, state["a"].last_scale_down_at)
    assert apply_cooldown(state, "a", 4, 161.0, cfg) == 4
    assert (state["a"].last_scale_up_at, state["a"].last_scale_down_at) == before


def test_scale_down_waits_for_its_own_cooldown():
    cfg = ScalerConfig(cooldown_up=0, cooldown_down=120)
    state = ScalerState.initial(["a"], cfg)
    assert apply_cooldown(state, "a", 5, 0.0, cfg) == 5
    assert apply_cooldown(state, "a", 1, 10.0, cfg) == 1  # never scaled down before
    assert apply_cooldown(state, "a", 0, 50.0, cfg) == 1
    assert apply_cooldown(state, "a", 0, 130.0, cfg) == 0


@given(st.lists(st.tuples(st.integers(0, 20), st.floats(0, 50)), max_size=30),
       st.floats(0, 60), st.floats(0, 200))
def test_cooldown_never_moves_forbidden_direction(steps, up, down):
    cfg = ScalerConfig(cooldown_up=up, cooldown_down=down, max_replicas=20)
    state = ScalerState.initial(["a"], cfg)
    now = 0.0
    for proposal, gap in steps:
        now += gap
        unit_state = state["a"]
        before = unit_state.current_replicas
        last_up, last_down = unit_state.last_scale_up_at, unit_state.last_scale_down_at
        after = apply_cooldown(state, "a", proposal, now, cfg)
        if after > before:
            assert now - last_up >= up
        if after < before:
            assert now - last_down >= down
        assert after in (before, proposal)
    assert math.isfinite(now)
