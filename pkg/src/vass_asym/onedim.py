"""One-counter models: behaviour detectors, growth case table, and oracles.

A memoryless deterministic strategy turns the model into a finite chain whose
bottom components each treat the single counter in one of four ways: drift up
(Increasing), drift down (Decreasing), zero drift with every cycle summing to
zero (BoundedZero), or zero drift with some nonzero cycle (UnboundedZero).

The detectors decide, per class, whether each behaviour is achievable by some
strategy, producing exact rational witnesses; `labels_from_inventory` is the
pure case table turning a class-visit sequence plus those flags into growth
estimates; `brute_force_classify` enumerates every strategy as an independent
ground truth; `energy_safe` answers whether some recurrent behaviour never
loses counter value along any cycle; `hamiltonian_reduction` encodes
undirected-graph Hamiltonicity into exactly that question.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from math import prod
from typing import Iterator, Mapping, Optional, Sequence

from .dichotomy import (
    Estimate,
    Label,
    RankingFunction,
    SystemIWitness,
    compute_maximal_solutions,
    counter_effect,
    rank_delta,
)
from .graph import (
    Mec,
    TypeSeq,
    _sccs,
    enumerate_types,
    is_dag_like,
    mec_decomposition,
    transition_to_mec,
)
from .model import (
    NONDET,
    PROB,
    Counter,
    Measure,
    State,
    Termination,
    Transition,
    TransitionCount,
    VassMdp,
    apply_md_strategy,
    measure_key,
)
from .ratlp import solve_linear_system


class NotABottomScc(ValueError):
    """The given state set is not a bottom component of the strategy chain."""


class PreconditionViolated(RuntimeError):
    """A zero-drift detector was called although some class is increasing."""


class TooManyStrategies(RuntimeError):
    """Strategy enumeration would exceed the requested bound."""


class VertexNotInGraph(KeyError):
    """The distinguished vertex is not a vertex of the input graph."""


class BsccClass(str, Enum):
    INCREASING = "Increasing"
    DECREASING = "Decreasing"
    BOUNDED_ZERO = "BoundedZero"
    UNBOUNDED_ZERO = "UnboundedZero"


# ---------------------------------------------------------------------------
# chain-level analysis (exact stationary distribution, drift, cycle structure)
# ---------------------------------------------------------------------------


def bottom_sccs(chain: VassMdp) -> list[frozenset[str]]:
    """Bottom strongly connected components of a chain (or any model's graph),
    ordered by least member state."""
    nodes = [s.name for s in chain.states]
    succ = {n: [t.target for t in chain.out(n)] for n in nodes}
    comp = _sccs(nodes, succ)
    leaves = set(comp.values())
    for n in nodes:
        for tgt in succ[n]:
            if comp[tgt] != comp[n]:
                leaves.discard(comp[n])
    groups: dict[int, set[str]] = {}
    for n in nodes:
        if comp[n] in leaves:
            groups.setdefault(comp[n], set()).add(n)
    return sorted((frozenset(g) for g in groups.values()), key=min)


@dataclass(frozen=True)
class BsccAnalysis:
    """Exact behaviour of one bottom component of a strategy chain."""

    states: frozenset[str]
    transitions: frozenset[str]
    cls: BsccClass
    stationary: dict[str, Fraction]
    drift: Fraction


def _bscc_edges(chain: VassMdp, states: frozenset[str]) -> list[Transition]:
    edges = []
    for name in sorted(states):
        for t in chain.out(name):
            assert t.target in states, "bottom component is not closed"
            edges.append(t)
    return edges


def _potential_defect(
    edges: Sequence[Transition],
) -> tuple[Optional[str], dict[str, Fraction]]:
    """Try to explain every edge's counter update as a potential difference.

    Returns (None, potentials) when all cycles through the edges sum to zero,
    else (tid of a violating edge, partial potentials). The edge set must be
    strongly connected so a directed traversal reaches every node.
    """
    nodes = sorted({e.source for e in edges} | {e.target for e in edges})
    adj: dict[str, list[Transition]] = {n: [] for n in nodes}
    for e in edges:
        adj[e.source].append(e)
    pot: dict[str, Fraction] = {nodes[0]: Fraction(0)}
    frontier = [nodes[0]]
    while frontier:
        s = frontier.pop()
        for e in adj[s]:
            if e.target not in pot:
                pot[e.target] = pot[s] + e.update[0]
                frontier.append(e.target)
    assert len(pot) == len(nodes), "edge set is not strongly connected"
    for e in edges:
        if pot[e.target] != pot[e.source] + e.update[0]:
            return e.tid, pot
    return None, pot


def _analyze_bscc(chain: VassMdp, states: frozenset[str]) -> BsccAnalysis:
    edges = _bscc_edges(chain, states)
    names = sorted(states)
    idx = {n: i for i, n in enumerate(names)}

    # stationary distribution: replace one balance row with normalization
    matrix = [[Fraction(1)] * len(names)]
    rhs = [Fraction(1)]
    for s in names[1:]:
        row = [Fraction(0)] * len(names)
        row[idx[s]] += 1
        for e in edges:
            if e.target == s:
                row[idx[e.source]] -= e.prob
        matrix.append(row)
        rhs.append(Fraction(0))
    sol = solve_linear_system(matrix, rhs)
    assert sol is not None, "stationary system is singular on a bottom component"
    pi = {n: sol[idx[n]] for n in names}
    assert all(v > 0 for v in pi.values()), "stationary distribution not positive"
    for s in names:  # includes the balance row the solve replaced
        inflow = sum((pi[e.source] * e.prob for e in edges if e.target == s), Fraction(0))
        assert inflow == pi[s], "stationary balance failed re-substitution"

    drift = sum((pi[e.source] * e.prob * e.update[0] for e in edges), Fraction(0))
    if drift > 0:
        cls = BsccClass.INCREASING
    elif drift < 0:
        cls = BsccClass.DECREASING
    else:
        defect, _ = _potential_defect(edges)
        cls = BsccClass.BOUNDED_ZERO if defect is None else BsccClass.UNBOUNDED_ZERO
    return BsccAnalysis(
        states=states,
        transitions=frozenset(e.tid for e in edges),
        cls=cls,
        stationary=pi,
        drift=drift,
    )


def bscc_analysis(
    m: VassMdp, strategy: Mapping[str, str], bscc_states: Sequence[str] | frozenset[str]
) -> BsccAnalysis:
    """Exact stationary distribution, drift, and behaviour class of one bottom
    component of the chain induced by a memoryless deterministic strategy."""
    if m.dimension != 1:
        raise ValueError("behaviour classes are defined for one-counter models")
    chain = apply_md_strategy(m, dict(strategy))
    b = frozenset(bscc_states)
    if b not in bottom_sccs(chain):
        raise NotABottomScc(f"{sorted(b)} is not a bottom component of the strategy chain")
    return _analyze_bscc(chain, b)


def classify_bscc(
    m: VassMdp, strategy: Mapping[str, str], bscc_states: Sequence[str] | frozenset[str]
) -> BsccClass:
    return bscc_analysis(m, strategy, bscc_states).cls


def verify_stationary(
    chain: VassMdp, states: frozenset[str], pi: Mapping[str, Fraction]
) -> list[str]:
    """Re-substitute a claimed stationary distribution: exact balance at every
    state, positivity, normalization. Pure checking, no solving."""
    bad: list[str] = []
    if set(pi) != set(states):
        return [f"support mismatch: {sorted(pi)} vs {sorted(states)}"]
    edges = _bscc_edges(chain, frozenset(states))
    if sum(pi.values()) != 1:
        bad.append("weights do not sum to 1")
    for s in sorted(states):
        if pi[s] <= 0:
            bad.append(f"weight of {s} not positive")
        inflow = sum((pi[e.source] * e.prob for e in edges if e.target == s), Fraction(0))
        if inflow != pi[s]:
            bad.append(f"balance fails at {s}: inflow {inflow} != {pi[s]}")
    return bad


# ---------------------------------------------------------------------------
# per-class behaviour detectors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IncreasingWitness:
    """Flow with strictly positive counter effect inside one class."""

    mec_id: str
    flow: SystemIWitness
    effect: Fraction


@dataclass(frozen=True)
class BoundedZeroWitness:
    """A zero-cycle end component: a strategy whose bottom component keeps the
    counter unchanged along every cycle."""

    mec_id: str
    ranking: RankingFunction
    kept_states: frozenset[str]
    kept_transitions: frozenset[str]
    component_states: frozenset[str]
    component_transitions: frozenset[str]
    strategy: dict[str, str]
    stationary: dict[str, Fraction]


@dataclass(frozen=True)
class UnboundedZeroWitness:
    """A flow component with zero drift but a cycle of nonzero counter sum."""

    mec_id: str
    flow: SystemIWitness
    component_transitions: frozenset[str]
    defect_transition: str


@dataclass(frozen=True)
class MecFlags:
    """Achievable bottom-component behaviours of one class.

    `bounded_zero`/`unbounded_zero` are None for an increasing class: the
    zero-drift machinery is neither defined nor needed there, and the case
    table never reads them. `bz_transitions` are the transitions lying on some
    zero-cycle end component; `uz_transitions` those lying on some zero-drift
    oscillating component but on no zero-cycle one. Witness payloads are
    attached when the flags come from the detectors (the strategy-enumeration
    oracle builds flag-only inventories).
    """

    mec_id: str
    increasing: bool
    bounded_zero: Optional[bool]
    unbounded_zero: Optional[bool]
    bz_transitions: frozenset[str]
    uz_transitions: frozenset[str]
    flow: Optional[SystemIWitness] = None
    ranking: Optional[RankingFunction] = None
    kept_states: Optional[frozenset[str]] = None
    kept_transitions: Optional[frozenset[str]] = None
    uz_component: Optional[frozenset[str]] = None
    uz_defect_transition: Optional[str] = None


@dataclass(frozen=True)
class ClassInventory:
    """Behaviour flags for every class, keyed by class id."""

    flags: dict[str, MecFlags]

    @property
    def any_increasing(self) -> bool:
        return any(f.increasing for f in self.flags.values())

    @property
    def any_bounded_zero(self) -> bool:
        return any(f.bounded_zero is True for f in self.flags.values())

    @property
    def any_unbounded_zero(self) -> bool:
        return any(f.unbounded_zero is True for f in self.flags.values())

    @property
    def all_decreasing(self) -> bool:
        return all(
            not f.increasing and f.bounded_zero is False and f.unbounded_zero is False
            for f in self.flags.values()
        )


def _zero_delta_subsystem(
    m: VassMdp, mec: Mec, ranking: RankingFunction
) -> tuple[frozenset[str], frozenset[str]]:
    """Largest subsystem of the class in which the rank is preserved exactly:
    controlled transitions keep only zero rank delta; a probabilistic state
    survives only if every branch preserves the rank; states losing all
    choices cascade out. Returns (states, transitions), possibly empty."""
    delta = {tid: rank_delta(m, ranking, m.transition(tid)) for tid in mec.transitions}
    alive = set(mec.states)
    while True:
        dead = []
        for s in alive:
            if m.kind(s) == PROB:
                ok = all(
                    t.tid in mec.transitions and delta[t.tid] == 0 and t.target in alive
                    for t in m.out(s)
                )
            else:
                ok = any(
                    t.tid in mec.transitions and delta[t.tid] == 0 and t.target in alive
                    for t in m.out(s)
                )
            if not ok:
                dead.append(s)
        if not dead:
            break
        alive.difference_update(dead)
    kept = set()
    for s in alive:
        for t in m.out(s):
            if t.tid not in mec.transitions or t.target not in alive:
                continue
            if m.kind(s) == PROB or delta[t.tid] == 0:
                kept.add(t.tid)
    return frozenset(alive), frozenset(kept)


def _subsystem_model(
    m: VassMdp, states: frozenset[str], transitions: frozenset[str]
) -> VassMdp:
    return VassMdp(
        m.dimension,
        [m.state(n) for n in sorted(states)],
        [m.transition(t) for t in sorted(transitions)],
    )


def _support_components(
    m: VassMdp, witness: SystemIWitness
) -> list[frozenset[str]]:
    """Strongly connected components of the witness flow's support, as
    transition sets. Flow conservation keeps every support edge inside its
    component, so the grouping is well defined."""
    edges = [m.transition(tid) for tid in sorted(witness.positive_transitions)]
    if not edges:
        return []
    nodes = sorted({e.source for e in edges} | {e.target for e in edges})
    succ: dict[str, list[str]] = {n: [] for n in nodes}
    for e in edges:
        succ[e.source].append(e.target)
    comp = _sccs(nodes, succ)
    groups: dict[int, set[str]] = {}
    for e in edges:
        assert comp[e.source] == comp[e.target], "support edge crosses components"
        groups.setdefault(comp[e.source], set()).add(e.tid)
    return sorted((frozenset(g) for g in groups.values()), key=min)


def _nonincreasing_flags(
    m: VassMdp, mec: Mec, witness: SystemIWitness, ranking: RankingFunction
) -> MecFlags:
    assert ranking.y[1] >= 1, (
        "a class without positive counter effect must put positive weight on the counter"
    )
    kept_states, kept_transitions = _zero_delta_subsystem(m, mec, ranking)
    if kept_states:
        sub = _subsystem_model(m, kept_states, kept_transitions)
        bz_transitions = frozenset().union(
            *(sm.transitions for sm in mec_decomposition(sub))
        )
        bz = True
    else:
        bz_transitions = frozenset()
        bz = False

    uz_component: Optional[frozenset[str]] = None
    uz_defect: Optional[str] = None
    for comp in _support_components(m, witness):
        defect, _ = _potential_defect([m.transition(t) for t in sorted(comp)])
        if defect is not None:
            uz_component, uz_defect = comp, defect
            break
    uz = uz_component is not None
    uz_transitions = witness.positive_transitions - bz_transitions

    # internal cross-checks of the two detector routes (both exact)
    assert bz_transitions <= witness.positive_transitions, (
        "zero-cycle component transitions must admit positive flow"
    )
    assert bool(uz_transitions) == uz, (
        "oscillation flag must agree with the transition-level split"
    )
    return MecFlags(
        mec_id=mec.mid,
        increasing=False,
        bounded_zero=bz,
        unbounded_zero=uz,
        bz_transitions=bz_transitions,
        uz_transitions=uz_transitions,
        flow=witness,
        ranking=ranking,
        kept_states=kept_states if kept_states else None,
        kept_transitions=kept_transitions if kept_states else None,
        uz_component=uz_component,
        uz_defect_transition=uz_defect,
    )


def compute_inventory(
    m: VassMdp, mecs: Optional[Sequence[Mec]] = None
) -> ClassInventory:
    """Behaviour flags for every class of a one-counter model."""
    if m.dimension != 1:
        raise ValueError("behaviour inventories are defined for one-counter models")
    if mecs is None:
        mecs = mec_decomposition(m)
    flags: dict[str, MecFlags] = {}
    for mec in mecs:
        witness, ranking = compute_maximal_solutions(m, mec)
        if 1 in witness.positive_counters:
            flags[mec.mid] = MecFlags(
                mec_id=mec.mid,
                increasing=True,
                bounded_zero=None,
                unbounded_zero=None,
                bz_transitions=frozenset(),
                uz_transitions=frozenset(),
                flow=witness,
                ranking=ranking,
            )
        else:
            flags[mec.mid] = _nonincreasing_flags(m, mec, witness, ranking)
    return ClassInventory(flags=flags)


def detect_increasing(
    m: VassMdp, mecs: Optional[Sequence[Mec]] = None
) -> Optional[IncreasingWitness]:
    """First class (in id order) admitting a strategy with positive drift, as
    an exact flow whose counter effect is >= 1; None if no class does."""
    if m.dimension != 1:
        raise ValueError("behaviour detectors are defined for one-counter models")
    if mecs is None:
        mecs = mec_decomposition(m)
    for mec in mecs:
        witness, _ = compute_maximal_solutions(m, mec)
        if 1 in witness.positive_counters:
            effect = counter_effect(m, witness, 1)
            assert effect >= 1
            return IncreasingWitness(mec_id=mec.mid, flow=witness, effect=effect)
    return None


def _require_no_increasing(m: VassMdp, mecs: Sequence[Mec]) -> None:
    hit = detect_increasing(m, mecs)
    if hit is not None:
        raise PreconditionViolated(
            f"class {hit.mec_id} admits positive drift; "
            "zero-drift detectors require that no class does"
        )


def _bounded_zero_witness(m: VassMdp, flags: MecFlags) -> BoundedZeroWitness:
    assert flags.kept_states is not None and flags.kept_transitions is not None
    sub = _subsystem_model(m, flags.kept_states, flags.kept_transitions)
    comp = mec_decomposition(sub)[0]
    strategy: dict[str, str] = {}
    for s in m.nondet_states():
        if s.name in comp.states:
            strategy[s.name] = min(
                t.tid for t in sub.out(s.name) if t.tid in comp.transitions
            )
        else:
            strategy[s.name] = m.out(s.name)[0].tid
    analysis = bscc_analysis(m, strategy, comp.states)
    assert analysis.cls == BsccClass.BOUNDED_ZERO, (
        "zero-cycle component failed its own behaviour check"
    )
    return BoundedZeroWitness(
        mec_id=flags.mec_id,
        ranking=flags.ranking,
        kept_states=flags.kept_states,
        kept_transitions=flags.kept_transitions,
        component_states=comp.states,
        component_transitions=analysis.transitions,
        strategy=strategy,
        stationary=analysis.stationary,
    )


def detect_bounded_zero(
    m: VassMdp, mecs: Optional[Sequence[Mec]] = None
) -> Optional[BoundedZeroWitness]:
    """First class (in id order) admitting a bottom component all of whose
    cycles keep the counter unchanged. Only defined when no class is
    increasing (PreconditionViolated otherwise)."""
    if m.dimension != 1:
        raise ValueError("behaviour detectors are defined for one-counter models")
    if mecs is None:
        mecs = mec_decomposition(m)
    _require_no_increasing(m, mecs)
    inv = compute_inventory(m, mecs)
    for mec in mecs:
        f = inv.flags[mec.mid]
        if f.bounded_zero:
            return _bounded_zero_witness(m, f)
    return None


def detect_unbounded_zero(
    m: VassMdp, mecs: Optional[Sequence[Mec]] = None
) -> Optional[UnboundedZeroWitness]:
    """First class (in id order) admitting a zero-drift bottom component with
    a cycle of nonzero counter sum. Only defined when no class is increasing
    (PreconditionViolated otherwise)."""
    if m.dimension != 1:
        raise ValueError("behaviour detectors are defined for one-counter models")
    if mecs is None:
        mecs = mec_decomposition(m)
    _require_no_increasing(m, mecs)
    inv = compute_inventory(m, mecs)
    for mec in mecs:
        f = inv.flags[mec.mid]
        if f.unbounded_zero:
            assert f.flow is not None and f.uz_component is not None
            assert f.uz_defect_transition is not None
            return UnboundedZeroWitness(
                mec_id=mec.mid,
                flow=f.flow,
                component_transitions=f.uz_component,
                defect_transition=f.uz_defect_transition,
            )
    return None


# ---------------------------------------------------------------------------
# the growth case table
# ---------------------------------------------------------------------------


def labels_from_inventory(
    inventory: ClassInventory,
    measure: Measure,
    beta: Sequence[str],
    transition_owner: Mapping[str, str],
) -> Estimate:
    """Growth estimate of one measure along one class-visit sequence, read off
    the behaviour flags alone. Pure function: the analyzer and any oracle
    recomputation must agree bit for bit.

    `exact=True` marks the combinations backed verbatim by the classification
    theory; combinations extended beyond it (longer sequences, mixed regimes)
    keep the defensible bound and say in `note` what was extended.
    """
    for mid in beta:
        if mid not in inventory.flags:
            raise ValueError(f"unknown class id {mid!r} in type")
    if not beta:
        raise ValueError("type must contain at least one class")
    flags = [inventory.flags[mid] for mid in beta]
    single = len(beta) == 1
    any_inc_g = inventory.any_increasing
    clean_zero_regime = not any_inc_g and not inventory.any_bounded_zero
    all_dec = inventory.all_decreasing
    long_note = "single-class statement applied to a longer sequence"

    if isinstance(measure, Counter):
        if measure.index != 1:
            raise ValueError("one-counter case table: counter index must be 1")
        inc = [f.mec_id for f in flags if f.increasing]
        if inc:
            return Estimate(
                label=Label.UNBOUNDED,
                tag="increasing-class-pumping",
                exact=single,
                note=None if single else long_note,
                witnesses={"class": inc[0]},
            )
        return Estimate(
            label=Label.TIGHT_LINEAR,
            tag="no-increasing-class-linear",
            exact=not any_inc_g,
            note=None
            if not any_inc_g
            else "linear statement assumes no class of the whole model is increasing",
        )

    if isinstance(measure, Termination):
        heavy = [f.mec_id for f in flags if f.increasing or f.bounded_zero]
        if heavy:
            return Estimate(
                label=Label.UNBOUNDED,
                tag="increasing-or-zero-cycle-class",
                exact=single,
                note=None if single else long_note,
                witnesses={"class": heavy[0]},
            )
        osc = [f.mec_id for f in flags if f.unbounded_zero]
        if osc:
            if clean_zero_regime:
                return Estimate(
                    label=Label.TIGHT_QUADRATIC,
                    tag="zero-oscillation-quadratic",
                    exact=single,
                    note=None if single else long_note,
                    witnesses={"class": osc[0]},
                )
            return Estimate(
                label=Label.LOWER_QUADRATIC,
                tag="zero-oscillation-quadratic",
                exact=False,
                note="matching quadratic upper bound stated only when no class "
                "of the whole model is increasing or keeps zero cycles",
                witnesses={"class": osc[0]},
            )
        return Estimate(
            label=Label.TIGHT_LINEAR,
            tag="all-classes-decreasing",
            exact=all_dec,
            note=None
            if all_dec
            else "linear statement assumes every class of the whole model is decreasing",
        )

    assert isinstance(measure, TransitionCount)
    tid = measure.tid
    owner = transition_owner.get(tid)
    if owner is None:
        return Estimate(
            label=Label.UPPER_TYPE_LENGTH,
            tag="transient-transition-geometric-tail",
            exact=True,
            bound=len(beta),
            note="uses are bounded in expectation independently of the start "
            "value; tail decays geometrically",
            witnesses={"transition": tid},
        )
    if owner not in beta:
        return Estimate(
            label=Label.TIGHT_ZERO,
            tag="class-not-in-type",
            exact=True,
            witnesses={"transition": tid, "class": owner},
        )
    pumped_before = any(
        any(flags[j].increasing for j in range(i + 1))
        for i, mid in enumerate(beta)
        if mid == owner
    )
    if pumped_before:
        return Estimate(
            label=Label.UNBOUNDED,
            tag="pumping-before-or-at-class",
            exact=True,
            witnesses={"transition": tid, "class": owner},
        )
    owner_flags = inventory.flags[owner]
    if tid in owner_flags.bz_transitions:
        return Estimate(
            label=Label.UNBOUNDED,
            tag="zero-cycle-component-transition",
            exact=single,
            note=None if single else long_note,
            witnesses={"transition": tid, "class": owner},
        )
    if tid in owner_flags.uz_transitions:
        if clean_zero_regime:
            return Estimate(
                label=Label.TIGHT_QUADRATIC,
                tag="zero-oscillation-transition",
                exact=single,
                note=None if single else long_note,
                witnesses={"transition": tid, "class": owner},
            )
        return Estimate(
            label=Label.LOWER_QUADRATIC,
            tag="zero-oscillation-transition",
            exact=False,
            note="matching quadratic upper bound stated only when no class "
            "of the whole model is increasing or keeps zero cycles",
            witnesses={"transition": tid, "class": owner},
        )
    return Estimate(
        label=Label.UPPER_LINEAR,
        tag="strict-rank-decrease-transition",
        exact=all_dec,
        note=None
        if all_dec
        else "linear upper bound; no tight claim outside the all-decreasing regime",
        witnesses={"transition": tid, "class": owner},
    )


@dataclass
class OneDimReport:
    """Full classification of a one-counter model."""

    mecs: list[Mec]
    types: list[TypeSeq]
    inventory: ClassInventory
    dag_like: bool
    types_complete: bool
    estimates: dict[str, dict[tuple[str, ...], Estimate]]


def classify_onedim(
    m: VassMdp,
    measures: Optional[Sequence[Measure]] = None,
    max_type_len: Optional[int] = None,
) -> OneDimReport:
    """Classify every requested measure along every realizable class-visit
    sequence of a one-counter model (all measures by default)."""
    if m.dimension != 1:
        raise ValueError("this classification is defined for one-counter models")
    mecs = mec_decomposition(m)
    dag = is_dag_like(m, mecs)
    if max_type_len is None:
        max_type_len = len(mecs)
    types = enumerate_types(m, max_type_len, mecs)
    inventory = compute_inventory(m, mecs)
    owner = transition_to_mec(mecs)
    if measures is None:
        measures = [Termination(), Counter(1)] + [
            TransitionCount(t.tid) for t in m.transitions
        ]
    estimates: dict[str, dict[tuple[str, ...], Estimate]] = {}
    for ms in measures:
        per_type = {}
        for ts in types:
            per_type[ts.mecs] = labels_from_inventory(inventory, ms, ts.mecs, owner)
        estimates[measure_key(ms)] = per_type
    return OneDimReport(
        mecs=list(mecs),
        types=types,
        inventory=inventory,
        dag_like=dag,
        types_complete=dag and max_type_len >= len(mecs),
        estimates=estimates,
    )


# ---------------------------------------------------------------------------
# strategy-enumeration oracle
# ---------------------------------------------------------------------------

StrategyKey = tuple[tuple[str, str], ...]


def _strategy_space(m: VassMdp) -> tuple[list[str], list[tuple[str, ...]], int]:
    controlled = [s.name for s in m.nondet_states()]
    menus = [tuple(t.tid for t in m.out(n)) for n in controlled]
    return controlled, menus, prod(len(menu) for menu in menus)


def _iter_strategies(m: VassMdp) -> Iterator[dict[str, str]]:
    controlled, menus, _ = _strategy_space(m)
    for combo in itertools.product(*menus):
        yield dict(zip(controlled, combo))


def brute_force_classify(
    m: VassMdp, bound: int = 10**6
) -> dict[tuple[StrategyKey, frozenset[str]], BsccClass]:
    """Ground truth by exhaustion: the behaviour class of every bottom
    component of every memoryless deterministic strategy."""
    if m.dimension != 1:
        raise ValueError("behaviour classes are defined for one-counter models")
    _, _, total = _strategy_space(m)
    if total > bound:
        raise TooManyStrategies(
            f"{total} memoryless strategies exceed the enumeration bound {bound}"
        )
    out: dict[tuple[StrategyKey, frozenset[str]], BsccClass] = {}
    for choice in _iter_strategies(m):
        chain = apply_md_strategy(m, choice)
        key = tuple(sorted(choice.items()))
        for b in bottom_sccs(chain):
            out[(key, b)] = _analyze_bscc(chain, b).cls
    return out


def chain_bscc_transitions(
    m: VassMdp, strategy: Mapping[str, str], states: frozenset[str]
) -> frozenset[str]:
    """Transition ids used inside one bottom component of a strategy chain."""
    chain = apply_md_strategy(m, dict(strategy))
    return frozenset(e.tid for e in _bscc_edges(chain, frozenset(states)))


# ---------------------------------------------------------------------------
# energy safety
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EnergyAnswer:
    """Answer to: does some strategy own a bottom component in which no cycle
    loses counter value (so a finite initial credit suffices forever)?"""

    status: str  # "Safe" | "Unsafe" | "UnknownNPRegime"
    strategy: Optional[dict[str, str]] = None
    bscc_states: Optional[frozenset[str]] = None
    note: Optional[str] = None


def _has_negative_cycle(edges: Sequence[Transition], nodes: Sequence[str]) -> bool:
    dist = {n: 0 for n in nodes}
    for i in range(len(nodes)):
        changed = False
        for e in edges:
            w = e.update[0]
            if dist[e.source] + w < dist[e.target]:
                dist[e.target] = dist[e.source] + w
                changed = True
        if not changed:
            return False
    return True


def energy_safe(m: VassMdp, brute_bound: int = 10**6) -> EnergyAnswer:
    """Decide existence of a non-losing bottom component.

    Without an increasing class the question collapses to the zero-cycle
    detector (a non-losing component has drift <= 0 and cycles >= 0, hence all
    cycles exactly zero), answered in polynomial time with a witness. With an
    increasing class the question is genuinely hard and is answered by
    strategy enumeration up to `brute_bound`, else UnknownNPRegime.
    """
    if m.dimension != 1:
        raise ValueError("energy safety is defined for one-counter models")
    mecs = mec_decomposition(m)
    if detect_increasing(m, mecs) is None:
        w = detect_bounded_zero(m, mecs)
        if w is not None:
            return EnergyAnswer(
                status="Safe",
                strategy=w.strategy,
                bscc_states=w.component_states,
                note="zero-cycle bottom component: every cycle keeps the counter unchanged",
            )
        return EnergyAnswer(
            status="Unsafe",
            note="no class admits positive drift or zero cycles: every bottom "
            "component drifts down or oscillates unboundedly",
        )
    _, _, total = _strategy_space(m)
    if total > brute_bound:
        return EnergyAnswer(
            status="UnknownNPRegime",
            note=f"{total} strategies exceed the enumeration bound {brute_bound}",
        )
    for choice in _iter_strategies(m):
        chain = apply_md_strategy(m, choice)
        for b in bottom_sccs(chain):
            edges = _bscc_edges(chain, b)
            if not _has_negative_cycle(edges, sorted(b)):
                return EnergyAnswer(
                    status="Safe",
                    strategy=dict(choice),
                    bscc_states=b,
                    note="bottom component with no negative cycle",
                )
    return EnergyAnswer(
        status="Unsafe",
        note="every bottom component of every strategy contains a negative cycle",
    )


def pivot_safe_bruteforce(m: VassMdp, pivot: str, bound: int = 10**6) -> bool:
    """Does some strategy own a non-losing bottom component containing `pivot`?

    Decided by strategy enumeration (TooManyStrategies beyond `bound`). This
    is the question the Hamiltonicity gadget reduces to.
    """
    if m.dimension != 1:
        raise ValueError("energy safety is defined for one-counter models")
    if pivot not in m.state_names():
        raise ValueError(f"unknown state {pivot!r}")
    _, _, total = _strategy_space(m)
    if total > bound:
        raise TooManyStrategies(
            f"{total} memoryless strategies exceed the enumeration bound {bound}"
        )
    for choice in _iter_strategies(m):
        chain = apply_md_strategy(m, choice)
        for b in bottom_sccs(chain):
            if pivot in b and not _has_negative_cycle(_bscc_edges(chain, b), sorted(b)):
                return True
    return False


# ---------------------------------------------------------------------------
# Hamiltonicity gadget
# ---------------------------------------------------------------------------


def hamiltonian_reduction(graph: Mapping, pivot: str) -> VassMdp:
    """Encode undirected-graph Hamiltonicity as a one-counter energy question.

    Every directed edge gains +1, except edges leaving `pivot`, which cost
    |V| - 1. A memoryless strategy makes every state choose one successor, so
    each bottom component is a simple cycle; a cycle through `pivot` of length
    k sums to k - |V|, and cycles avoiding `pivot` are strictly positive.
    Hence the graph has a Hamiltonian cycle iff some strategy owns a
    non-losing bottom component containing `pivot`. Meaningful for graphs
    with at least three vertices (a single edge through `pivot` closes a
    2-cycle of sum 2 - |V|, which is non-negative only in the degenerate
    two-vertex graph).
    """
    try:
        vertices = list(graph["vertices"])
        raw_edges = list(graph["edges"])
    except (KeyError, TypeError) as exc:
        raise ValueError("graph must be a mapping with 'vertices' and 'edges'") from exc
    if len(set(vertices)) != len(vertices) or not vertices:
        raise ValueError("vertices must be nonempty and unique")
    if not all(isinstance(v, str) and v for v in vertices):
        raise ValueError("vertices must be nonempty strings")
    if pivot not in vertices:
        raise VertexNotInGraph(pivot)
    known = set(vertices)
    pairs: set[tuple[str, str]] = set()
    for e in raw_edges:
        u, v = e
        if u not in known or v not in known:
            raise ValueError(f"edge {e!r} mentions an unknown vertex")
        if u == v:
            raise ValueError(f"self-loop at {u!r} is not allowed")
        pairs.add((min(u, v), max(u, v)))
    n = len(vertices)
    states = [State(v, NONDET) for v in sorted(vertices)]
    transitions = []
    for u, v in sorted(pairs):
        for src, tgt in ((u, v), (v, u)):
            update = 1 - n if src == pivot else 1
            transitions.append(
                Transition(f"t:{src}:{tgt}", src, (update,), tgt, None)
            )
    # an isolated vertex has no outgoing transition; let model validation say so
    return VassMdp(1, states, transitions)
