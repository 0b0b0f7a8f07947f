"""Simulator tests: deterministic trajectories, path equivalence, statistics."""

import json
from fractions import Fraction
from math import isclose

import pytest

from vass_asym.model import IncompleteStrategy, parse_vass
from vass_asym.sim import (
    DegenerateInput,
    TrajectoryStats,
    ZeroWitness,
    _cumulative_thresholds,
    estimate_tails,
    expected_update,
    fit_exponent,
    multicycle_strategy_from_x,
    simulate_many,
    simulate_one,
)

F = Fraction


def two_loop_choice():
    """One controlled state with +1 and -1 self-loops."""
    return parse_vass(
        json.dumps(
            {
                "dimension": 1,
                "states": [{"name": "s", "kind": "nondet"}],
                "transitions": [
                    {"id": "t_a", "from": "s", "to": "s", "update": [1]},
                    {"id": "t_b", "from": "s", "to": "s", "update": [-1]},
                ],
            }
        )
    )


# ---------------------------------------------------------------------------
# deterministic single trajectories
# ---------------------------------------------------------------------------


def test_decreasing_loop_exact_trajectory(dec_loop):
    st = simulate_one(dec_loop, 5, strategy={"p": "t_dec"})
    assert st == TrajectoryStats(
        terminated=True,
        steps=6,
        max_counter=(5,),
        transition_counts={"t_dec": 6},
        realized_type=("M1",),
    )


def test_increasing_loop_hits_cap(inc_loop):
    st = simulate_one(inc_loop, 3, strategy={"p": "t_inc"}, max_steps=10)
    assert not st.terminated
    assert st.steps == 10
    assert st.max_counter == (13,)
    assert st.transition_counts == {"t_inc": 10}
    assert st.realized_type == ("M1",)


def test_zero_cycle_oscillates_at_zero(zero_cycle):
    st = simulate_one(
        zero_cycle,
        0,
        strategy={"p": "t_pq", "q": "t_qp"},
        max_steps=101,
    )
    assert not st.terminated
    assert st.steps == 101
    assert st.max_counter == (1,)
    assert st.transition_counts == {"t_pq": 51, "t_qp": 50}
    assert st.realized_type == ("M1",)


def test_walk_peak_excludes_terminal_configuration(walk):
    # from 0 the first down-step terminates immediately: the peak is the
    # start value, never the terminal -1
    for run in range(50):
        st = simulate_one(walk, 0, run=run, seed=7)
        assert st.terminated
        assert st.max_counter[0] >= 0


def test_default_init_state_is_least_name(pump):
    st = simulate_one(pump, 1, strategy={"a": "a_q", "e": "e_e"}, max_steps=50)
    assert st.realized_type[0] == "M1"  # started in a's class


def test_unknown_init_state_rejected(walk):
    with pytest.raises(ValueError):
        simulate_one(walk, 1, init_state="nope")
    with pytest.raises(ValueError):
        simulate_one(walk, -1)
    with pytest.raises(ValueError):
        simulate_one(walk, 1, max_steps=0)


# ---------------------------------------------------------------------------
# path equivalence and determinism
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("n,seed", [(0, 0), (3, 1), (7, 2), (20, 3)])
def test_fast_and_slow_paths_identical_on_walk(walk, n, seed):
    for run in range(8):
        fast = simulate_one(walk, n, run=run, seed=seed, max_steps=5000)
        slow = simulate_one(
            walk, n, run=run, seed=seed, max_steps=5000, _vectorized=False
        )
        assert fast == slow


def test_fast_and_slow_paths_identical_on_pump(pump):
    strat = {"a": "a_q", "c": "c_c", "e": "e_e"}
    for run in range(10):
        fast = simulate_one(pump, 4, run=run, seed=11, strategy=strat, max_steps=3000)
        slow = simulate_one(
            pump, 4, run=run, seed=11, strategy=strat, max_steps=3000, _vectorized=False
        )
        assert fast == slow


def test_fast_path_spans_multiple_blocks(inc_loop):
    # 10000 steps > one 4096 block: block chaining must stay consistent
    fast = simulate_one(inc_loop, 0, strategy={"p": "t_inc"}, max_steps=10000)
    slow = simulate_one(
        inc_loop, 0, strategy={"p": "t_inc"}, max_steps=10000, _vectorized=False
    )
    assert fast == slow
    assert fast.steps == 10000 and fast.max_counter == (10000,)


def test_simulate_many_matches_simulate_one(walk):
    batch = simulate_many(walk, 2, 12, seed=5, max_steps=2000)
    for r, st in enumerate(batch):
        assert st == simulate_one(walk, 2, run=r, seed=5, max_steps=2000)


def test_thread_layout_does_not_change_results(walk, monkeypatch):
    one = simulate_many(walk, 3, 20, seed=9, max_steps=1000, threads=1)
    three = simulate_many(walk, 3, 20, seed=9, max_steps=1000, threads=3)
    assert one == three
    monkeypatch.setenv("VASS_ASYM_THREADS", "4")
    via_env = simulate_many(walk, 3, 20, seed=9, max_steps=1000)
    assert via_env == one


def test_runs_differ_across_run_index_and_seed(walk):
    a = simulate_one(walk, 6, run=0, seed=0, max_steps=4000)
    b = simulate_one(walk, 6, run=1, seed=0, max_steps=4000)
    c = simulate_one(walk, 6, run=0, seed=1, max_steps=4000)
    assert len({a.steps, b.steps, c.steps}) > 1 or not (a == b == c)


# ---------------------------------------------------------------------------
# threshold arithmetic
# ---------------------------------------------------------------------------


def test_cumulative_thresholds_exact_values():
    assert list(_cumulative_thresholds([F(1, 3), F(2, 3)])) == [6148914691236517205]
    assert list(_cumulative_thresholds([F(1, 2), F(1, 2)])) == [2**63]
    assert list(_cumulative_thresholds([F(1)])) == []
    th = _cumulative_thresholds([F(1, 4), F(1, 4), F(1, 2)])
    assert list(th) == [2**62, 2**63]


# ---------------------------------------------------------------------------
# strategy handling
# ---------------------------------------------------------------------------


def test_incomplete_strategy_only_when_state_entered(pump, dec_loop):
    # c is controlled but unreachable under a_q: no entry required
    st = simulate_one(pump, 1, strategy={"a": "a_q", "e": "e_e"}, max_steps=200)
    assert st.steps > 0
    with pytest.raises(IncompleteStrategy):
        simulate_one(dec_loop, 1, strategy={})
    with pytest.raises(IncompleteStrategy):
        simulate_one(dec_loop, 1)


def test_randomized_strategy_validated(dec_loop):
    m = two_loop_choice()
    with pytest.raises(IncompleteStrategy):
        simulate_one(m, 1, strategy={"s": {"t_a": F(1, 2)}})  # sums to 1/2
    with pytest.raises(IncompleteStrategy):
        simulate_one(m, 1, strategy={"s": {"t_missing": F(1)}})
    st = simulate_one(m, 1, strategy={"s": {"t_a": F(1, 2), "t_b": F(1, 2)}})
    assert st.steps >= 1


def test_randomized_strategy_statistics():
    m = two_loop_choice()
    # biased 3/4 up: strong positive drift, runs should mostly hit the cap
    sigma = {"s": {"t_a": F(3, 4), "t_b": F(1, 4)}}
    batch = simulate_many(m, 2, 300, seed=3, strategy=sigma, max_steps=400)
    survived = sum(1 for st in batch if not st.terminated)
    assert survived > 250
    ups = sum(st.transition_counts.get("t_a", 0) for st in batch)
    total = sum(st.steps for st in batch)
    assert 0.70 < ups / total < 0.80


def test_pump_realized_types_split_between_sinks(pump):
    strat = {"a": "a_q", "e": "e_e"}
    seen = set()
    for run in range(24):
        st = simulate_one(pump, 2, run=run, seed=1, strategy=strat, max_steps=500)
        assert st.realized_type in {("M1", "M3"), ("M1", "M4")}
        seen.add(st.realized_type)
        again = simulate_one(pump, 2, run=run, seed=1, strategy=strat, max_steps=500)
        assert again == st
    assert seen == {("M1", "M3"), ("M1", "M4")}


# ---------------------------------------------------------------------------
# statistical sanity (fixed seeds, generous tolerances)
# ---------------------------------------------------------------------------


def test_walk_from_zero_halves_terminate_in_one_step(walk):
    batch = simulate_many(walk, 0, 2000, seed=2, max_steps=2000)
    one_step = sum(1 for st in batch if st.terminated and st.steps == 1)
    assert isclose(one_step / 2000, 0.5, abs_tol=0.04)


# ---------------------------------------------------------------------------
# tail aggregation
# ---------------------------------------------------------------------------


def test_estimate_tails_caps_and_groups(walk):
    rep = estimate_tails(walk, [4, 8], 200, seed=1, theta=2)
    assert rep.n_list == (4, 8)
    assert rep.caps == {4: 64, 8: 256}
    for n in (4, 8):
        (g,) = rep.groups[n]
        assert g.realized_type == ("M1",)
        assert g.runs == 200
        assert g.terminated + g.truncated == 200
        assert not g.low_sample
        assert (g.median_steps is None) == (2 * g.terminated <= g.runs)
        assert rep.group(n, ("M1",)) is g
        assert rep.group(n, ("M9",)) is None


def test_estimate_tails_max_steps_overrides_theta(walk):
    rep = estimate_tails(walk, [4], 10, seed=1, theta=2, max_steps=17)
    assert rep.caps == {4: 17}
    (g,) = rep.groups[4]
    assert g.low_sample


def test_estimate_tails_strategy_factory(dec_loop):
    calls = []

    def factory(n):
        calls.append(n)
        return {"p": "t_dec"}

    rep = estimate_tails(dec_loop, [2, 5], 4, seed=0, strategy=factory)
    assert calls == [2, 5]
    assert rep.group(2, ("M1",)).median_steps == 3.0
    assert rep.group(5, ("M1",)).median_steps == 6.0
    assert rep.group(5, ("M1",)).median_peaks == (5.0,)


def test_estimate_tails_rejects_bad_n_list(walk):
    with pytest.raises(ValueError):
        estimate_tails(walk, [], 10)
    with pytest.raises(ValueError):
        estimate_tails(walk, [4, 4], 10)
    with pytest.raises(ValueError):
        estimate_tails(walk, [8, 4], 10)


# ---------------------------------------------------------------------------
# exponent fitting
# ---------------------------------------------------------------------------


def test_fit_exponent_recovers_power_laws():
    assert isclose(fit_exponent([2, 4, 8], [4.0, 16.0, 64.0]), 2.0, abs_tol=1e-9)
    assert isclose(
        fit_exponent([2, 4, 8, 16], [8.0, 64.0, 512.0, 4096.0]), 3.0, abs_tol=1e-9
    )


def test_fit_exponent_degenerate_inputs():
    with pytest.raises(DegenerateInput):
        fit_exponent([2, 4], [4.0, 16.0])
    with pytest.raises(DegenerateInput):
        fit_exponent([2, 4, 4], [4.0, 16.0, 16.0])
    with pytest.raises(DegenerateInput):
        fit_exponent([2, 4, 8], [4.0, 0.0, 64.0])
    with pytest.raises(DegenerateInput):
        fit_exponent([2, 4, 8], [4.0, None, 64.0])
    with pytest.raises(DegenerateInput):
        fit_exponent([2, 4, 8], [4.0, 16.0])


# ---------------------------------------------------------------------------
# strategies from flow witnesses
# ---------------------------------------------------------------------------


def test_multicycle_strategy_from_flow():
    m = two_loop_choice()
    sigma = multicycle_strategy_from_x(m, {"t_a": F(2), "t_b": F(1)})
    assert sigma == {"s": {"t_a": F(2, 3), "t_b": F(1, 3)}}
    st = simulate_one(m, 1, strategy=sigma, max_steps=50)
    assert st.steps >= 1


def test_multicycle_strategy_rejects_degenerate_flows(zero_cycle):
    m = two_loop_choice()
    with pytest.raises(ZeroWitness):
        multicycle_strategy_from_x(m, {"t_a": F(0), "t_b": F(0)})
    with pytest.raises(ValueError):
        multicycle_strategy_from_x(m, {"t_a": F(-1), "t_b": F(2)})
    # zero-outflow states are simply absent from the strategy
    sigma = multicycle_strategy_from_x(zero_cycle, {"t_pq": F(0), "t_qp": F(1)})
    assert sigma == {"q": {"t_qp": F(1)}}


def test_expected_update_exact(walk, dec_loop, zero_cycle):
    assert expected_update(walk, None, "p") == (F(0),)
    assert expected_update(dec_loop, {"p": "t_dec"}, "p") == (F(-1),)
    m = two_loop_choice()
    sigma = {"s": {"t_a": F(2, 3), "t_b": F(1, 3)}}
    assert expected_update(m, sigma, "s") == (F(1, 3),)
    assert expected_update(zero_cycle, {"p": "t_pq"}, "p") == (F(1),)
    with pytest.raises(IncompleteStrategy):
        expected_update(m, None, "s")
