"""Structural layer tests.

Two independent oracles back the algorithms here:
- end components: subset enumeration checks every candidate state set directly
  against the closure + strong-connectivity definition, then takes maximal sets;
- reachability values: exhaustive evaluation of every memoryless deterministic
  strategy via the exact chain solver.
"""

from fractions import Fraction
from itertools import combinations, product

import pytest
from hypothesis import given, settings

from vass_asym.graph import (
    Mec,
    TypeSeq,
    _chain_values,
    enumerate_types,
    is_dag_like,
    max_reach_probability,
    max_reach_values,
    mec_decomposition,
    mec_quotient_edges,
    state_to_mec,
    transition_to_mec,
)
from vass_asym.model import PROB, State, Transition, VassMdp, parse_vass
from tests.strategies import random_models


def _strongly_connected(states, edges):
    if not states:
        return False
    succ = {s: [] for s in states}
    pred = {s: [] for s in states}
    for a, b in edges:
        succ[a].append(b)
        pred[b].append(a)
    for adj in (succ, pred):
        seen = {next(iter(sorted(states)))}
        frontier = list(seen)
        while frontier:
            s = frontier.pop()
            for nxt in adj[s]:
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
        if seen != set(states):
            return False
    return True


def brute_force_mecs(m):
    """Maximal end components by direct subset checking."""
    names = m.state_names()
    ec_sets = []
    for r in range(1, len(names) + 1):
        for cand in combinations(names, r):
            cs = set(cand)
            ok = True
            for s in cs:
                outs = m.out(s)
                inside = [t for t in outs if t.target in cs]
                if m.kind(s) == PROB:
                    if len(inside) != len(outs):
                        ok = False
                        break
                elif not inside:
                    ok = False
                    break
            if not ok:
                continue
            internal_edges = [
                (t.source, t.target)
                for t in m.transitions
                if t.source in cs and t.target in cs
            ]
            if _strongly_connected(cs, internal_edges):
                ec_sets.append(frozenset(cs))
    return {c for c in ec_sets if not any(c < d for d in ec_sets)}


@given(random_models())
@settings(max_examples=120, deadline=None)
def test_mec_decomposition_matches_subset_oracle(m):
    mecs = mec_decomposition(m)
    got = {mec.states for mec in mecs}
    assert got == brute_force_mecs(m)
    # internal transition sets are exactly the induced transitions
    for mec in mecs:
        induced = {
            t.tid
            for t in m.transitions
            if t.source in mec.states and t.target in mec.states
        }
        assert mec.transitions == induced
    # disjointness and id order
    seen = set()
    for mec in mecs:
        assert not (mec.states & seen)
        seen |= mec.states
    assert [mec.mid for mec in mecs] == [f"M{i}" for i in range(1, len(mecs) + 1)]
    assert sorted(min(mec.states) for mec in mecs) == [min(mec.states) for mec in mecs]


def test_pump_mec_structure(pump):
    mecs = mec_decomposition(pump)
    assert {mec.mid: set(mec.states) for mec in mecs} == {
        "M1": {"a", "b"},
        "M2": {"c"},
        "M3": {"e"},
        "M4": {"f"},
    }
    owner = state_to_mec(mecs)
    assert "q" not in owner
    towner = transition_to_mec(mecs)
    assert towner["c_c"] == "M2"
    assert "a_q" not in towner  # leaves M1, not internal
    assert is_dag_like(pump, mecs)


def test_walk_is_single_mec(walk):
    mecs = mec_decomposition(walk)
    assert len(mecs) == 1
    assert mecs[0].states == frozenset({"p"})
    assert mecs[0].transitions == frozenset({"t_down", "t_up"})


def _mutually_reachable_classes_model():
    # two singleton classes that can reach each other only through escaping
    # probabilistic states, so they stay distinct classes
    states = [
        State("p", "nondet"),
        State("q", "nondet"),
        State("r", "prob"),
        State("r2", "prob"),
        State("s", "nondet"),
    ]
    transitions = [
        Transition("t_p", "p", (0,), "p"),
        Transition("t_pr", "p", (0,), "r"),
        Transition("t_q", "q", (0,), "q"),
        Transition("t_qr", "q", (0,), "r2"),
        Transition("t_r_q", "r", (0,), "q", Fraction(1, 2)),
        Transition("t_r_s", "r", (0,), "s", Fraction(1, 2)),
        Transition("t_r2_p", "r2", (0,), "p", Fraction(1, 2)),
        Transition("t_r2_s", "r2", (0,), "s", Fraction(1, 2)),
        Transition("t_s", "s", (0,), "s"),
    ]
    return VassMdp(1, states, transitions)


def test_not_dag_like_detected():
    m = _mutually_reachable_classes_model()
    mecs = mec_decomposition(m)
    assert {frozenset(x.states) for x in mecs} == {
        frozenset({"p"}),
        frozenset({"q"}),
        frozenset({"s"}),
    }
    assert not is_dag_like(m, mecs)


def test_pump_types_and_weights(pump):
    types = enumerate_types(pump, max_len=4)
    as_map = {ts.mecs: ts.weight for ts in types}
    assert as_map == {
        ("M1",): Fraction(1),
        ("M2",): Fraction(1),
        ("M3",): Fraction(1),
        ("M4",): Fraction(1),
        ("M1", "M2"): Fraction(1),
        ("M1", "M3"): Fraction(1, 2),
        ("M1", "M4"): Fraction(1, 2),
    }
    assert len(types) == 7
    # complete already at max_len = number of classes
    assert types == enumerate_types(pump, max_len=4 + 3)


def test_types_respect_max_len(pump):
    assert all(len(ts.mecs) == 1 for ts in enumerate_types(pump, max_len=1))
    with pytest.raises(ValueError):
        enumerate_types(pump, max_len=0)


def test_type_step_must_avoid_third_class():
    # M1 -> M2 -> M3 chain: M3 only reachable through M2's state, so the
    # type (M1, M3) must not be offered.
    states = [
        State("a", "nondet"),
        State("b", "nondet"),
        State("c", "nondet"),
    ]
    transitions = [
        Transition("t_a", "a", (0,), "a"),
        Transition("t_ab", "a", (0,), "b"),
        Transition("t_b", "b", (0,), "b"),
        Transition("t_bc", "b", (0,), "c"),
        Transition("t_c", "c", (0,), "c"),
    ]
    m = VassMdp(1, states, transitions)
    mecs = mec_decomposition(m)
    edges = mec_quotient_edges(m, mecs)
    assert edges == {"M1": ["M2"], "M2": ["M3"], "M3": []}
    got = {ts.mecs for ts in enumerate_types(m, max_len=3)}
    assert ("M1", "M3") not in got
    assert ("M1", "M2", "M3") in got


# --- reachability --------------------------------------------------------------


def brute_force_reach(m, targets, sinks):
    """Max reach probability per state by enumerating all MD strategies."""
    movable = [
        s.name
        for s in m.nondet_states()
        if s.name not in targets and s.name not in sinks
    ]
    choices = [[t.tid for t in m.out(name)] for name in movable]
    best = {s.name: Fraction(0) for s in m.states}
    for combo in product(*choices) if movable else [()]:
        choice = dict(zip(movable, combo))
        vals = _chain_values(m, choice, targets, sinks)
        for name, v in vals.items():
            if v > best[name]:
                best[name] = v
    return best


@given(random_models(max_states=4))
@settings(max_examples=60, deadline=None)
def test_max_reach_matches_strategy_enumeration(m):
    names = m.state_names()
    targets = frozenset({names[-1]})
    sinks = frozenset({names[0]}) - targets
    values, choice = max_reach_values(m, targets, sinks)
    expected = brute_force_reach(m, targets, sinks)
    assert values == expected
    # the returned strategy actually attains the optimum
    attained = _chain_values(m, choice, targets, sinks)
    assert attained == values


def test_pair_probabilities_constant_on_class(pump):
    mecs = mec_decomposition(pump)
    by_id = {mec.mid: mec for mec in mecs}
    m1, m3 = by_id["M1"], by_id["M3"]
    sinks = frozenset(
        s for mec in mecs if mec.mid not in ("M1", "M3") for s in mec.states
    )
    values, _ = max_reach_values(pump, frozenset(m3.states), sinks)
    assert {values[s] for s in m1.states} == {Fraction(1, 2)}


def test_pair_probability_requires_distinct(pump):
    mecs = mec_decomposition(pump)
    with pytest.raises(ValueError):
        max_reach_probability(pump, mecs[0], mecs[0], mecs=mecs)


def test_half_probability_exact(pump):
    mecs = {mec.mid: mec for mec in mec_decomposition(pump)}
    assert max_reach_probability(pump, mecs["M1"], mecs["M2"]) == 1
    assert max_reach_probability(pump, mecs["M1"], mecs["M4"]) == Fraction(1, 2)
    assert max_reach_probability(pump, mecs["M2"], mecs["M1"]) == 0
