"""The growth dichotomy for strongly connected classes, and the DAG pipeline.

Per class (maximal end component) two homogeneous rational systems drive every
label decision:

System (I) — pumping flows. Unknown x: one nonnegative value per internal
transition. Constraints: componentwise nonnegative total counter effect
``sum_t x(t) u_t >= 0``; flow conservation at every state; and out of every
probabilistic state the flow splits proportionally to the transition
probabilities (``x(t) = P(t) * outflow(source)``). A solution with
``sum_t x(t) u_t(c) > 0`` pumps counter c quadratically along runs that can
afford to stay in the class linearly long; ``x(t) > 0`` does the same for the
use count of t.

System (II) — ranking functions. Unknowns: nonnegative counter coefficients
y(c) and state potentials z(p); rank(p, v) = z(p) + <v, y>. Constraints: the
rank never increases along controlled transitions and never increases in
expectation out of probabilistic states. ``y(c) > 0`` caps counter c linearly;
a strictly decreasing row caps the corresponding transition's use count.

Exactly one side of each candidate is achievable (the dichotomy): for every
counter, y(c) > 0 or a flow pumps it; for every transition, its rank row is
strict (resp. its source's expected row) or a flow uses it. `verify_dichotomy`
checks this disjunction exhaustively from the two maximal solutions.

The DAG pipeline walks a type (class sequence): counters already pumped to a
quadratic lower bound have their updates zeroed in later classes — the run can
afford to pay them — which can promote further counters; promotions are
monotone and never revert.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Optional, Sequence, Union

from .graph import Mec, is_dag_like, mec_decomposition, mec_quotient_edges, transition_to_mec
from .model import (
    NONDET,
    PROB,
    Counter,
    Measure,
    Termination,
    Transition,
    TransitionCount,
    UnknownTransition,
    VassMdp,
    augment_step_counter,
    zero_counters,
)
from .ratlp import LpProblem, LpSolution, con, maximize_strict_count, scale_to_integers, solve_feasibility


class NotDagLike(ValueError):
    pass


class InvalidType(ValueError):
    pass


class Label(str, Enum):
    """Estimate vocabulary shared by both report layers."""

    TIGHT_ZERO = "TightZero"
    TIGHT_LINEAR = "TightLinear"
    TIGHT_QUADRATIC = "TightQuadratic"
    LOWER_QUADRATIC = "LowerQuadratic"
    UPPER_LINEAR = "UpperLinear"
    UPPER_TYPE_LENGTH = "UpperTypeLength"
    UNBOUNDED = "Unbounded"


@dataclass(frozen=True)
class Estimate:
    """One (measure, type) entry of a report.

    `exact` records whether the label is fully backed by the classification
    theory for this regime; entries extended beyond the verbatim case analysis
    carry exact=False and say why in `note`. `tag` is a machine-readable name
    of the justifying fact. `witnesses` holds the exact objects the claim
    re-substitutes against (flows, rankings, stationary distributions, ...).
    """

    label: Label
    tag: str
    exact: bool = True
    bound: Optional[int] = None  # payload for UPPER_TYPE_LENGTH
    note: Optional[str] = None
    beyond_quadratic_hint: bool = False
    witnesses: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SystemIWitness:
    """Integer-scaled maximal pumping flow of one class."""

    mec_id: str
    x: dict[str, Fraction]
    positive_counters: frozenset[int]       # counters c with sum_t x(t) u_t(c) > 0
    positive_transitions: frozenset[str]    # transitions with x(t) > 0


@dataclass(frozen=True)
class RankingFunction:
    """Integer-scaled maximal ranking solution of one class."""

    mec_id: str
    y: dict[int, Fraction]
    z: dict[str, Fraction]
    strict_nondet: frozenset[str]   # controlled transitions with rank delta < 0
    strict_prob: frozenset[str]     # probabilistic states with expected delta < 0

    def rank(self, state: str, counters: Sequence[int]) -> Fraction:
        return self.z[state] + sum(
            (self.y[c] * v for c, v in zip(sorted(self.y), counters)), Fraction(0)
        )


def _xvar(tid: str) -> str:
    return f"x:{tid}"


def _yvar(c: int) -> str:
    return f"y:{c}"


def _zvar(name: str) -> str:
    return f"z:{name}"


def build_system_I(m: VassMdp, mec: Mec) -> LpProblem:
    """Pumping-flow system over the class's internal transitions.

    Candidates (in order): one per counter (positive total effect), then one
    per internal transition (positive flow).
    """
    tids = sorted(mec.transitions)
    variables = tuple(_xvar(t) for t in tids)
    constraints = [con({_xvar(t): 1}, ">=", 0, label=f"nonneg:{t}") for t in tids]

    for c in range(1, m.dimension + 1):
        coeffs = {}
        for t in tids:
            u = m.transition(t).update[c - 1]
            if u:
                coeffs[_xvar(t)] = coeffs.get(_xvar(t), 0) + u
        constraints.append(con(coeffs, ">=", 0, label=f"counter:{c}"))

    for s in sorted(mec.states):
        coeffs: dict[str, Fraction] = {}
        for t in tids:
            tr = m.transition(t)
            if tr.target == s:
                coeffs[_xvar(t)] = coeffs.get(_xvar(t), Fraction(0)) + 1
            if tr.source == s:
                coeffs[_xvar(t)] = coeffs.get(_xvar(t), Fraction(0)) - 1
        constraints.append(con(coeffs, "==", 0, label=f"flow:{s}"))

    for s in sorted(mec.states):
        if m.kind(s) != PROB:
            continue
        outs = m.out(s)
        assert all(t.tid in mec.transitions for t in outs), "class closure violated"
        for t in outs:
            coeffs = {_xvar(o.tid): -t.prob for o in outs}
            coeffs[_xvar(t.tid)] = coeffs.get(_xvar(t.tid), Fraction(0)) + 1
            constraints.append(con(coeffs, "==", 0, label=f"prop:{t.tid}"))

    candidates = []
    for c in range(1, m.dimension + 1):
        coeffs = {
            _xvar(t): m.transition(t).update[c - 1]
            for t in tids
            if m.transition(t).update[c - 1]
        }
        candidates.append(con(coeffs, ">=", 0, label=f"counter:{c}"))
    for t in tids:
        candidates.append(con({_xvar(t): 1}, ">=", 0, label=f"transition:{t}"))

    return LpProblem(variables, tuple(constraints), tuple(candidates))


def _rank_row(m: VassMdp, t: Transition) -> dict[str, Fraction]:
    """Coefficients of rank(target) - rank(source) + <u, y> as an LP row."""
    coeffs: dict[str, Fraction] = {}
    coeffs[_zvar(t.target)] = coeffs.get(_zvar(t.target), Fraction(0)) + 1
    coeffs[_zvar(t.source)] = coeffs.get(_zvar(t.source), Fraction(0)) - 1
    for c in range(1, m.dimension + 1):
        u = t.update[c - 1]
        if u:
            coeffs[_yvar(c)] = coeffs.get(_yvar(c), Fraction(0)) + u
    return {k: v for k, v in coeffs.items() if v != 0}


def build_system_II(m: VassMdp, mec: Mec) -> LpProblem:
    """Ranking system over the class.

    Candidates (in order): one per counter (y(c) > 0), then one per controlled
    internal transition (strict rank decrease), then one per probabilistic
    member state (strict expected decrease).
    """
    tids = sorted(mec.transitions)
    states = sorted(mec.states)
    variables = tuple(_yvar(c) for c in range(1, m.dimension + 1)) + tuple(
        _zvar(s) for s in states
    )
    constraints = [
        con({_yvar(c): 1}, ">=", 0, label=f"nonneg:y{c}")
        for c in range(1, m.dimension + 1)
    ] + [con({_zvar(s): 1}, ">=", 0, label=f"nonneg:z{s}") for s in states]

    nondet_rows: list[tuple[str, dict[str, Fraction]]] = []
    prob_rows: list[tuple[str, dict[str, Fraction]]] = []
    for t in tids:
        tr = m.transition(t)
        if m.kind(tr.source) == NONDET:
            nondet_rows.append((t, _rank_row(m, tr)))
    for s in states:
        if m.kind(s) != PROB:
            continue
        coeffs: dict[str, Fraction] = {}
        for t in m.out(s):
            for k, v in _rank_row(m, t).items():
                coeffs[k] = coeffs.get(k, Fraction(0)) + t.prob * v
        prob_rows.append((s, {k: v for k, v in coeffs.items() if v != 0}))

    for t, row in nondet_rows:
        constraints.append(con(row, "<=", 0, label=f"nondet:{t}"))
    for s, row in prob_rows:
        constraints.append(con(row, "<=", 0, label=f"prob:{s}"))

    candidates = [
        con({_yvar(c): 1}, ">=", 0, label=f"counter:{c}")
        for c in range(1, m.dimension + 1)
    ]
    for t, row in nondet_rows:
        candidates.append(con({k: -v for k, v in row.items()}, ">=", 0, label=f"nondet:{t}"))
    for s, row in prob_rows:
        candidates.append(con({k: -v for k, v in row.items()}, ">=", 0, label=f"prob:{s}"))

    return LpProblem(tuple(variables), tuple(constraints), tuple(candidates))


def _achieved_labels(problem: LpProblem, solution: LpSolution) -> set[str]:
    return {problem.candidates[i].label for i in solution.achieved_strict}


def compute_maximal_solutions(m: VassMdp, mec: Mec) -> tuple[SystemIWitness, RankingFunction]:
    """Integer-scaled maximal solutions of systems (I) and (II) for one class.

    Maximal: strict on exactly the achievable candidates (see
    `maximize_strict_count`); after scaling, every nonzero entry is >= 1.
    """
    p1 = build_system_I(m, mec)
    s1 = scale_to_integers(maximize_strict_count(p1), min_nonzero_one=True)
    labels1 = _achieved_labels(p1, s1)
    witness = SystemIWitness(
        mec_id=mec.mid,
        x={t: s1.assignment[_xvar(t)] for t in sorted(mec.transitions)},
        positive_counters=frozenset(
            c for c in range(1, m.dimension + 1) if f"counter:{c}" in labels1
        ),
        positive_transitions=frozenset(
            t for t in mec.transitions if f"transition:{t}" in labels1
        ),
    )

    p2 = build_system_II(m, mec)
    s2 = scale_to_integers(maximize_strict_count(p2), min_nonzero_one=True)
    labels2 = _achieved_labels(p2, s2)
    ranking = RankingFunction(
        mec_id=mec.mid,
        y={c: s2.assignment[_yvar(c)] for c in range(1, m.dimension + 1)},
        z={s: s2.assignment[_zvar(s)] for s in sorted(mec.states)},
        strict_nondet=frozenset(
            t
            for t in mec.transitions
            if m.kind(m.transition(t).source) == NONDET and f"nondet:{t}" in labels2
        ),
        strict_prob=frozenset(
            s for s in mec.states if m.kind(s) == PROB and f"prob:{s}" in labels2
        ),
    )
    return witness, ranking


def rank_delta(m: VassMdp, r: RankingFunction, t: Transition) -> Fraction:
    """rank(target, v + u) - rank(source, v): independent of v."""
    return (
        r.z[t.target]
        - r.z[t.source]
        + sum((Fraction(u) * r.y[c + 1] for c, u in enumerate(t.update)), Fraction(0))
    )


def expected_rank_delta(m: VassMdp, r: RankingFunction, state: str) -> Fraction:
    return sum(
        (t.prob * rank_delta(m, r, t) for t in m.out(state)), Fraction(0)
    )


def counter_effect(m: VassMdp, w: SystemIWitness, c: int) -> Fraction:
    return sum(
        (w.x[t] * m.transition(t).update[c - 1] for t in w.x), Fraction(0)
    )


def verify_system_I_witness(m: VassMdp, mec: Mec, w: SystemIWitness) -> list[str]:
    """Exact re-substitution; returns human-readable violations (empty = valid)."""
    bad: list[str] = []
    if set(w.x) != set(mec.transitions):
        return [f"flow domain mismatch in {mec.mid}"]
    for t, v in w.x.items():
        if v < 0:
            bad.append(f"x({t}) = {v} < 0")
    for c in range(1, m.dimension + 1):
        eff = counter_effect(m, w, c)
        if eff < 0:
            bad.append(f"counter {c} effect {eff} < 0")
        if (eff > 0) != (c in w.positive_counters):
            bad.append(f"counter {c} strictness claim mismatch (effect {eff})")
    for s in mec.states:
        inflow = sum((w.x[t] for t in w.x if m.transition(t).target == s), Fraction(0))
        outflow = sum((w.x[t] for t in w.x if m.transition(t).source == s), Fraction(0))
        if inflow != outflow:
            bad.append(f"flow not conserved at {s}: in {inflow} != out {outflow}")
        if m.kind(s) == PROB:
            for t in m.out(s):
                if w.x[t.tid] != t.prob * outflow:
                    bad.append(f"flow out of {s} not proportional on {t.tid}")
    for t, v in w.x.items():
        if (v > 0) != (t in w.positive_transitions):
            bad.append(f"transition {t} strictness claim mismatch (x = {v})")
    return bad


def verify_ranking(m: VassMdp, mec: Mec, r: RankingFunction) -> list[str]:
    """Exact re-substitution for a ranking solution (empty = valid)."""
    bad: list[str] = []
    if set(r.y) != set(range(1, m.dimension + 1)) or set(r.z) != set(mec.states):
        return [f"ranking domain mismatch in {mec.mid}"]
    for c, v in r.y.items():
        if v < 0:
            bad.append(f"y({c}) = {v} < 0")
    for s, v in r.z.items():
        if v < 0:
            bad.append(f"z({s}) = {v} < 0")
    nonzero = [abs(v) for v in list(r.y.values()) + list(r.z.values()) if v != 0]
    if nonzero and min(nonzero) < 1:
        bad.append("minimum nonzero entry below 1")
    for t in sorted(mec.transitions):
        tr = m.transition(t)
        if m.kind(tr.source) == NONDET:
            d = rank_delta(m, r, tr)
            if d > 0:
                bad.append(f"rank increases along {t}: delta {d}")
            if (d < 0) != (t in r.strict_nondet):
                bad.append(f"strictness claim mismatch on {t} (delta {d})")
    for s in sorted(mec.states):
        if m.kind(s) == PROB:
            d = expected_rank_delta(m, r, s)
            if d > 0:
                bad.append(f"expected rank increases out of {s}: delta {d}")
            if (d < 0) != (s in r.strict_prob):
                bad.append(f"strictness claim mismatch at {s} (delta {d})")
    return bad


def verify_dichotomy(
    m: VassMdp, mec: Mec, w: SystemIWitness, r: RankingFunction
) -> bool:
    """Every counter and every internal transition is covered by one side.

    Counters: y(c) > 0 or the flow pumps c. Controlled transitions: strict
    rank decrease or positive flow. Transitions out of probabilistic states:
    strict expected decrease at the source or positive flow.
    """
    if verify_system_I_witness(m, mec, w) or verify_ranking(m, mec, r):
        return False
    for c in range(1, m.dimension + 1):
        if not (r.y[c] > 0 or counter_effect(m, w, c) > 0):
            return False
    for t in sorted(mec.transitions):
        tr = m.transition(t)
        if m.kind(tr.source) == NONDET:
            covered = rank_delta(m, r, tr) < 0 or w.x[t] > 0
        else:
            covered = expected_rank_delta(m, r, tr.source) < 0 or w.x[t] > 0
        if not covered:
            return False
    return True


def classify_counters_mec(m: VassMdp, mec: Mec) -> dict[int, Label]:
    """Within one class: TightLinear iff the maximal ranking has y(c) > 0,
    else LowerQuadratic (the dichotomy provides the pumping flow)."""
    witness, ranking = compute_maximal_solutions(m, mec)
    out = {}
    for c in range(1, m.dimension + 1):
        if ranking.y[c] > 0:
            out[c] = Label.TIGHT_LINEAR
        else:
            assert counter_effect(m, witness, c) > 0, (
                f"dichotomy violated for counter {c} in {mec.mid}"
            )
            out[c] = Label.LOWER_QUADRATIC
    return out


# --- DAG pipeline ---------------------------------------------------------------


@dataclass
class DagPipelineStep:
    mec_id: str
    newly_pumped: frozenset[int]
    witness: SystemIWitness          # of the zeroed class
    ranking: RankingFunction         # of the zeroed class
    zeroed: frozenset[int]           # counters zeroed before this class
    hint: bool                       # fluctuation-limited pump detected here


@dataclass
class DagPipelineState:
    """Walk state: the monotonically growing pumped-counter set plus a record
    of each class's contribution (for reports and re-verification)."""

    pumped: frozenset[int]
    steps: list[DagPipelineStep]


def _pump_probe(m: VassMdp, mec: Mec, c: int) -> dict[str, Fraction]:
    """A flow with strictly positive effect on counter c (must exist when the
    zeroed ranking gives y(c) = 0 — that is the dichotomy)."""
    p1 = build_system_I(m, mec)
    probe_row = next(cand for cand in p1.candidates if cand.label == f"counter:{c}")
    sol = solve_feasibility(
        LpProblem(p1.variables, p1.constraints + (probe_row.with_rhs(1),))
    )
    assert sol is not None, f"dichotomy violated: counter {c} not pumpable in {mec.mid}"
    return {t: sol.assignment[_xvar(t)] for t in sorted(mec.transitions)}


def _fluctuation_hint(
    m_orig: VassMdp, mec: Mec, pump_x: dict[str, Fraction], pumped: frozenset[int]
) -> bool:
    """True when the pump leans on an already-pumped counter without spending
    it in expectation — the signature of growth beyond the generic quadratic
    lower bound (the pump is limited by fluctuations, not by budget)."""
    support = [t for t, v in pump_x.items() if v > 0]
    touched = {
        c
        for c in pumped
        if any(m_orig.transition(t).update[c - 1] != 0 for t in support)
    }
    if not touched:
        return False
    for c in touched:
        drift = sum(
            (pump_x[t] * m_orig.transition(t).update[c - 1] for t in support),
            Fraction(0),
        )
        if drift < 0:
            return False
    return True


def run_dag_pipeline(
    m: VassMdp, beta_mecs: Sequence[Mec], track_hint_for: Optional[int] = None
) -> DagPipelineState:
    """Walk the type, zeroing already-pumped counters before each class."""
    pumped: frozenset[int] = frozenset()
    steps: list[DagPipelineStep] = []
    for mec in beta_mecs:
        zeroed_model = zero_counters(m, pumped) if pumped else m
        witness, ranking = compute_maximal_solutions(zeroed_model, mec)
        newly = frozenset(
            c
            for c in range(1, m.dimension + 1)
            if c not in pumped and ranking.y[c] == 0
        )
        hint = False
        if track_hint_for is not None and track_hint_for in newly and pumped:
            pump_x = _pump_probe(zeroed_model, mec, track_hint_for)
            hint = _fluctuation_hint(m, mec, pump_x, pumped)
        steps.append(
            DagPipelineStep(
                mec_id=mec.mid,
                newly_pumped=newly,
                witness=witness,
                ranking=ranking,
                zeroed=pumped,
                hint=hint,
            )
        )
        pumped = pumped | newly
    return DagPipelineState(pumped=pumped, steps=steps)


def _validate_type(
    m: VassMdp, beta: Sequence[str], mecs: Sequence[Mec]
) -> list[Mec]:
    by_id = {mec.mid: mec for mec in mecs}
    if not beta:
        raise InvalidType("a type must contain at least one class")
    unknown = [b for b in beta if b not in by_id]
    if unknown:
        raise InvalidType(f"unknown class ids {unknown}")
    for a, b in zip(beta, beta[1:]):
        if a == b:
            raise InvalidType("types collapse consecutive duplicates")
    edges = mec_quotient_edges(m, mecs)
    for a, b in zip(beta, beta[1:]):
        if b not in edges[a]:
            raise InvalidType(f"step {a} -> {b} is not realizable")
    return [by_id[b] for b in beta]


def classify_dag(
    m: VassMdp,
    beta: Sequence[str],
    measure: Measure,
    mecs: Optional[Sequence[Mec]] = None,
) -> Estimate:
    """Asymptotic estimate of one measure conditioned on one type, for any
    dimension, on DAG-like models.

    Counters get the exact tight-linear / lower-quadratic dichotomy. The
    termination time rides on an appended step counter (incremented by every
    transition); a single transition's use count rides on a step counter
    incremented by that transition alone, where only the quadratic lower
    transfers — a linear cap on the step counter caps the count from above but
    promises no uses, hence `UpperLinear`.
    """
    if mecs is None:
        mecs = mec_decomposition(m)
    if not is_dag_like(m, mecs):
        raise NotDagLike("class graph has mutually reachable classes")
    beta = tuple(beta)
    beta_mecs = _validate_type(m, beta, mecs)

    if isinstance(measure, Counter):
        c = measure.index
        if not (1 <= c <= m.dimension):
            raise ValueError(f"counter index {c} out of range")
        state = run_dag_pipeline(m, beta_mecs, track_hint_for=c)
        return _counter_estimate(state, c, beta)

    if isinstance(measure, Termination):
        aug = augment_step_counter(m)
        sc = aug.dimension
        aug_mecs = mec_decomposition(aug)
        assert [x.states for x in aug_mecs] == [x.states for x in mecs]
        state = run_dag_pipeline(aug, _remap(aug_mecs, beta), track_hint_for=sc)
        est = _counter_estimate(state, sc, beta)
        note = "termination time tracked by an appended step counter"
        return Estimate(
            label=est.label,
            tag=est.tag,
            exact=est.exact,
            note=note,
            beyond_quadratic_hint=est.beyond_quadratic_hint,
            witnesses=est.witnesses,
        )

    if isinstance(measure, TransitionCount):
        tid = measure.tid
        if not m.has_transition(tid):
            raise UnknownTransition(tid)
        towner = transition_to_mec(mecs)
        if tid not in towner:
            return Estimate(
                label=Label.UPPER_TYPE_LENGTH,
                bound=len(beta),
                tag="transient-transition-geometric-tail",
                exact=True,
                note=(
                    "the transition lies in no class; along a fixed type its "
                    "use count has a geometric tail, so any constant is an "
                    "upper estimate"
                ),
            )
        if towner[tid] not in beta:
            return Estimate(
                label=Label.TIGHT_ZERO,
                tag="class-not-in-type",
                exact=True,
                note="the transition's class is never visited by this type",
            )
        aug = augment_step_counter(m, only=tid)
        sc = aug.dimension
        aug_mecs = mec_decomposition(aug)
        assert [x.states for x in aug_mecs] == [x.states for x in mecs]
        state = run_dag_pipeline(aug, _remap(aug_mecs, beta), track_hint_for=sc)
        est = _counter_estimate(state, sc, beta)
        if est.label is Label.LOWER_QUADRATIC:
            return Estimate(
                label=Label.LOWER_QUADRATIC,
                tag=est.tag,
                exact=True,
                beyond_quadratic_hint=est.beyond_quadratic_hint,
                witnesses=est.witnesses,
                note="pumping flow uses the transition quadratically often",
            )
        return Estimate(
            label=Label.UPPER_LINEAR,
            tag="rank-coefficient-positive",
            exact=True,
            witnesses=est.witnesses,
            note=(
                "a positive rank coefficient on the dedicated step counter "
                "caps the use count linearly; no lower bound is claimed — "
                "the count may be zero"
            ),
        )

    raise TypeError(f"not a measure: {measure!r}")


def _remap(aug_mecs: Sequence[Mec], beta: Sequence[str]) -> list[Mec]:
    by_id = {mec.mid: mec for mec in aug_mecs}
    return [by_id[b] for b in beta]


def _counter_estimate(state: DagPipelineState, c: int, beta: Sequence[str]) -> Estimate:
    witnesses = {
        "pipeline": [
            {
                "class": step.mec_id,
                "zeroed_counters": sorted(step.zeroed),
                "newly_pumped": sorted(step.newly_pumped),
                "flow": step.witness,
                "ranking": step.ranking,
            }
            for step in state.steps
        ]
    }
    if c in state.pumped:
        promoted_at = next(s.mec_id for s in state.steps if c in s.newly_pumped)
        hint = any(s.hint for s in state.steps if c in s.newly_pumped)
        return Estimate(
            label=Label.LOWER_QUADRATIC,
            tag="flow-pumping-quadratic-lower",
            exact=True,
            beyond_quadratic_hint=hint,
            note=f"pumped in class {promoted_at} along type {','.join(beta)}"
            + ("; fluctuation-limited pump, growth may exceed degree 2" if hint else ""),
            witnesses=witnesses,
        )
    return Estimate(
        label=Label.TIGHT_LINEAR,
        tag="rank-coefficient-positive",
        exact=True,
        witnesses=witnesses,
    )
