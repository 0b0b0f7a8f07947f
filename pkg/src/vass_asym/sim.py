"""Monte Carlo validation: exact-threshold sampling of trajectories.

Randomness discipline: every run owns an independent Philox stream keyed by
(seed, n * 2**32 + run), and every executed step consumes exactly one raw
64-bit word from that stream — including probability-1 branches. Branches are
picked by comparing the word against cumulative thresholds floor(cum * 2**64),
so each branch's sampling probability is off by less than 2**-64 from its
exact rational probability. Because consumption is one word per step in
stream order, the vectorized fast path, the scalar path, and any thread
layout all produce byte-identical trajectories.

The fast path applies while the run sits in a state whose every resolved
branch is a self-loop (the absorbing tail phase of typical models): blocks of
draws are mapped to branch indices, update rows are cumulatively summed, and
the first terminal crossing, per-counter maxima, and branch-use counts are
read off vectorized. It requires |counter| < 2**53 and |update| <= 2**20 so
int64 arithmetic cannot overflow; otherwise the scalar path (arbitrary
precision integers) takes over.
"""

from __future__ import annotations

import os
import statistics
from collections import Counter as TallyCounter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import ceil, inf
from typing import Callable, Mapping, Optional, Sequence, Union

import numpy as np

from .graph import mec_decomposition, state_to_mec
from .model import NONDET, IncompleteStrategy, VassMdp

MASK64 = (1 << 64) - 1
BLOCK = 4096
FAST_COUNTER_LIMIT = 1 << 53
FAST_UPDATE_LIMIT = 1 << 20

# a strategy is one choice per controlled state: either a transition id or a
# full rational distribution over outgoing transition ids
Strategy = Mapping[str, Union[str, Mapping[str, Fraction]]]


class ZeroWitness(ValueError):
    """The flow has empty support, so no strategy can be derived from it."""


class DegenerateInput(ValueError):
    """The data cannot support a log-log slope fit."""


@dataclass(frozen=True)
class TrajectoryStats:
    """Everything one run contributes to the estimates.

    `steps` is the number of executed steps; when `terminated` it equals the
    termination time (the terminal step is included). `max_counter` is the
    per-counter peak over all configurations strictly before the terminal one
    (the start configuration included). `transition_counts` includes the
    terminal transition. `realized_type` is the sequence of distinct classes
    visited, in order of first entry after the previous class.
    """

    terminated: bool
    steps: int
    max_counter: tuple[int, ...]
    transition_counts: dict[str, int]
    realized_type: tuple[str, ...]


def _cumulative_thresholds(probs: Sequence[Fraction]) -> np.ndarray:
    """First k-1 cumulative probabilities scaled to 64-bit thresholds:
    a draw u selects branch i iff th[i-1] <= u < th[i] (implicit th[k-1]=2^64).
    """
    out = []
    cum = Fraction(0)
    for p in probs[:-1]:
        cum += p
        out.append((cum.numerator << 64) // cum.denominator)
    return np.array(out, dtype=np.uint64)


class _DrawStream:
    """Sequential raw 64-bit words of one run's Philox stream, block-buffered.

    Words are consumed strictly in stream order no matter how calls mix
    scalar and block takes, which is what makes the two execution paths
    byte-identical.
    """

    def __init__(self, seed: int, stream: int):
        self._bg = np.random.Philox(
            key=np.array([seed & MASK64, stream & MASK64], dtype=np.uint64)
        )
        self._buf = np.empty(0, dtype=np.uint64)
        self._pos = 0

    def take(self, k: int) -> np.ndarray:
        avail = len(self._buf) - self._pos
        if avail >= k:
            out = self._buf[self._pos : self._pos + k]
            self._pos += k
            return out
        head = self._buf[self._pos :]
        fresh = self._bg.random_raw(max(k - avail, BLOCK))
        self._buf = fresh
        self._pos = k - avail
        return np.concatenate([head, fresh[: self._pos]]) if avail else fresh[:k]

    def one(self) -> int:
        if self._pos >= len(self._buf):
            self._buf = self._bg.random_raw(BLOCK)
            self._pos = 0
        u = int(self._buf[self._pos])
        self._pos += 1
        return u


class _StateRec:
    """One state's resolved branch table."""

    __slots__ = (
        "tids",
        "targets",
        "updates",
        "thresholds",
        "updates_np",
        "all_self",
        "fast_ok",
    )

    def __init__(self, name: str, branches: list[tuple[str, str, tuple[int, ...], Fraction]]):
        self.tids = [b[0] for b in branches]
        self.targets = [b[1] for b in branches]
        self.updates = [b[2] for b in branches]
        self.thresholds = _cumulative_thresholds([b[3] for b in branches])
        self.all_self = all(t == name for t in self.targets)
        self.fast_ok = (
            self.all_self
            and len(self.updates[0]) > 0
            and all(abs(u) <= FAST_UPDATE_LIMIT for upd in self.updates for u in upd)
        )
        self.updates_np = (
            np.array(self.updates, dtype=np.int64).reshape(len(self.tids), -1)
            if self.fast_ok
            else None
        )

    def pick(self, u: int) -> int:
        if not len(self.thresholds):
            return 0
        return int(np.searchsorted(self.thresholds, np.uint64(u), side="right"))


class _Resolved:
    """Model plus strategy, resolved lazily into per-state branch tables."""

    def __init__(self, m: VassMdp, strategy: Optional[Strategy]):
        self.m = m
        self.dimension = m.dimension
        self.strategy = dict(strategy) if strategy else {}
        self.owner = state_to_mec(mec_decomposition(m))
        self._recs: dict[str, _StateRec] = {}

    def resolve(self, name: str) -> _StateRec:
        rec = self._recs.get(name)
        if rec is not None:
            return rec
        outs = self.m.out(name)
        if self.m.kind(name) == NONDET:
            entry = self.strategy.get(name)
            if entry is None:
                raise IncompleteStrategy(
                    f"run reached controlled state {name!r} with no strategy entry"
                )
            if isinstance(entry, str):
                dist = {entry: Fraction(1)}
            else:
                dist = {tid: Fraction(p) for tid, p in entry.items() if p != 0}
            known = {t.tid for t in outs}
            if not set(dist) <= known:
                raise IncompleteStrategy(
                    f"strategy at {name!r} uses transitions {sorted(set(dist) - known)} "
                    "not leaving that state"
                )
            if any(p < 0 for p in dist.values()) or sum(dist.values()) != 1:
                raise IncompleteStrategy(
                    f"strategy at {name!r} must be a probability distribution"
                )
            branches = [
                (t.tid, t.target, t.update, dist[t.tid]) for t in outs if t.tid in dist
            ]
        else:
            branches = [(t.tid, t.target, t.update, t.prob) for t in outs]
        rec = _StateRec(name, branches)
        self._recs[name] = rec
        return rec


def _run(
    res: _Resolved,
    n: int,
    stream: _DrawStream,
    cap: int,
    init_state: str,
    vectorized: bool,
) -> TrajectoryStats:
    d = res.dimension
    cur = [n] * d
    peak = list(cur)
    counts: TallyCounter = TallyCounter()
    rtype: list[str] = []
    mid = res.owner.get(init_state)
    if mid is not None:
        rtype.append(mid)
    state = init_state
    steps = 0
    terminated = False

    while steps < cap:
        rec = res.resolve(state)
        if (
            vectorized
            and rec.fast_ok
            and all(abs(c) < FAST_COUNTER_LIMIT for c in cur)
        ):
            block = min(BLOCK, cap - steps)
            us = stream.take(block)
            if len(rec.thresholds):
                idx = np.searchsorted(rec.thresholds, us, side="right")
            else:
                idx = np.zeros(block, dtype=np.intp)
            pos = np.cumsum(rec.updates_np[idx], axis=0)
            pos += np.array(cur, dtype=np.int64)
            term_rows = (pos < 0).any(axis=1)
            if term_rows.any():
                j = int(np.argmax(term_rows))
                for b, c in enumerate(np.bincount(idx[: j + 1], minlength=len(rec.tids))):
                    if c:
                        counts[rec.tids[b]] += int(c)
                if j > 0:
                    for k, v in enumerate(pos[:j].max(axis=0)):
                        peak[k] = max(peak[k], int(v))
                cur = [int(v) for v in pos[j]]
                steps += j + 1
                terminated = True
                break
            for b, c in enumerate(np.bincount(idx, minlength=len(rec.tids))):
                if c:
                    counts[rec.tids[b]] += int(c)
            for k, v in enumerate(pos.max(axis=0)):
                peak[k] = max(peak[k], int(v))
            cur = [int(v) for v in pos[-1]]
            steps += block
            continue

        i = rec.pick(stream.one())
        counts[rec.tids[i]] += 1
        steps += 1
        cur = [c + u for c, u in zip(cur, rec.updates[i])]
        if any(c < 0 for c in cur):
            terminated = True
            break
        for k, c in enumerate(cur):
            if c > peak[k]:
                peak[k] = c
        state = rec.targets[i]
        mid = res.owner.get(state)
        if mid is not None and (not rtype or rtype[-1] != mid):
            rtype.append(mid)

    return TrajectoryStats(
        terminated=terminated,
        steps=steps,
        max_counter=tuple(peak),
        transition_counts=dict(counts),
        realized_type=tuple(rtype),
    )


def _init_state(m: VassMdp, init_state: Optional[str]) -> str:
    if init_state is None:
        return min(m.state_names())
    if init_state not in m.state_names():
        raise ValueError(f"unknown state {init_state!r}")
    return init_state


def simulate_one(
    m: VassMdp,
    n: int,
    *,
    run: int = 0,
    seed: int = 0,
    strategy: Optional[Strategy] = None,
    max_steps: int = 10**6,
    init_state: Optional[str] = None,
    _vectorized: bool = True,
) -> TrajectoryStats:
    """Sample one trajectory from the all-`n` start configuration."""
    if n < 0:
        raise ValueError("start value n must be >= 0")
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    res = _Resolved(m, strategy)
    stream = _DrawStream(seed, (n << 32) + run)
    return _run(res, n, stream, max_steps, _init_state(m, init_state), _vectorized)


def _thread_count(threads: Optional[int]) -> int:
    if threads is not None:
        return max(1, threads)
    env = os.environ.get("VASS_ASYM_THREADS", "")
    try:
        return max(1, int(env))
    except ValueError:
        return 1


def simulate_many(
    m: VassMdp,
    n: int,
    runs: int,
    *,
    seed: int = 0,
    strategy: Optional[Strategy] = None,
    max_steps: int = 10**6,
    init_state: Optional[str] = None,
    threads: Optional[int] = None,
    _vectorized: bool = True,
) -> list[TrajectoryStats]:
    """Sample `runs` independent trajectories. Results are indexed by run and
    independent of the thread layout (each run owns its own stream)."""
    if n < 0:
        raise ValueError("start value n must be >= 0")
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    start = _init_state(m, init_state)
    nthreads = _thread_count(threads)

    def work(run_indices: range) -> list[TrajectoryStats]:
        res = _Resolved(m, strategy)  # per-worker tables: no shared mutation
        return [
            _run(res, n, _DrawStream(seed, (n << 32) + r), max_steps, start, _vectorized)
            for r in run_indices
        ]

    if nthreads == 1 or runs <= 1:
        return work(range(runs))
    chunk = ceil(runs / nthreads)
    ranges = [range(i, min(i + chunk, runs)) for i in range(0, runs, chunk)]
    with ThreadPoolExecutor(max_workers=nthreads) as pool:
        parts = list(pool.map(work, ranges))
    return [stat for part in parts for stat in part]


# ---------------------------------------------------------------------------
# aggregation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TailGroup:
    """Aggregates of the runs of one start value that realized one type.

    `median_steps` treats truncated runs as exceeding every finite value and
    is None when they could flip the median (termination rate <= 50%).
    `median_peaks` are medians of recorded per-counter peaks; for truncated
    runs the recorded peak is a lower bound on the true one.
    """

    realized_type: tuple[str, ...]
    runs: int
    terminated: int
    truncated: int
    low_sample: bool
    median_steps: Optional[float]
    median_peaks: tuple[Optional[float], ...]


@dataclass(frozen=True)
class TailReport:
    n_list: tuple[int, ...]
    seed: int
    caps: dict[int, int]
    groups: dict[int, tuple[TailGroup, ...]]

    def group(self, n: int, realized_type: Sequence[str]) -> Optional[TailGroup]:
        for g in self.groups[n]:
            if g.realized_type == tuple(realized_type):
                return g
        return None


def _median_or_none(values: list[float]) -> Optional[float]:
    med = statistics.median(values)
    return None if med == inf else float(med)


def estimate_tails(
    m: VassMdp,
    n_list: Sequence[int],
    runs: int,
    *,
    seed: int = 0,
    strategy: Union[None, Strategy, Callable[[int], Strategy]] = None,
    theta: Optional[float] = None,
    max_steps: Optional[int] = None,
    init_state: Optional[str] = None,
    threads: Optional[int] = None,
) -> TailReport:
    """Simulate `runs` trajectories per start value and aggregate by realized
    type. The step cap per start value n is `max_steps` when given, else
    ceil(4 * n**theta) when a growth exponent hint `theta` is given, else
    10**6. `strategy` may be a single strategy or a per-n factory n->strategy.
    """
    if not n_list or sorted(set(n_list)) != list(n_list):
        raise ValueError("n_list must be strictly increasing and nonempty")
    caps: dict[int, int] = {}
    groups: dict[int, tuple[TailGroup, ...]] = {}
    for n in n_list:
        cap = max_steps if max_steps is not None else (
            max(1, ceil(4 * n**theta)) if theta is not None else 10**6
        )
        caps[n] = cap
        strat = strategy(n) if callable(strategy) else strategy
        stats = simulate_many(
            m,
            n,
            runs,
            seed=seed,
            strategy=strat,
            max_steps=cap,
            init_state=init_state,
            threads=threads,
        )
        by_type: dict[tuple[str, ...], list[TrajectoryStats]] = {}
        for st in stats:
            by_type.setdefault(st.realized_type, []).append(st)
        out = []
        for rtype in sorted(by_type, key=lambda t: (-len(by_type[t]), t)):
            sample = by_type[rtype]
            terminated = sum(1 for st in sample if st.terminated)
            steps_vals = [
                float(st.steps) if st.terminated else inf for st in sample
            ]
            med_steps = _median_or_none(steps_vals)
            med_peaks = tuple(
                _median_or_none([float(st.max_counter[k]) for st in sample])
                for k in range(m.dimension)
            )
            out.append(
                TailGroup(
                    realized_type=rtype,
                    runs=len(sample),
                    terminated=terminated,
                    truncated=len(sample) - terminated,
                    low_sample=len(sample) < 100,
                    median_steps=med_steps,
                    median_peaks=med_peaks,
                )
            )
        groups[n] = tuple(out)
    return TailReport(
        n_list=tuple(n_list), seed=seed, caps=caps, groups=groups
    )


def fit_exponent(ns: Sequence[int], values: Sequence[float]) -> float:
    """Least-squares slope of log(value) against log(n)."""
    if len(ns) != len(values) or len(ns) < 3:
        raise DegenerateInput("need at least 3 paired points")
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise DegenerateInput("start values must be strictly increasing")
    if any(n <= 0 for n in ns) or any(v is None or v <= 0 for v in values):
        raise DegenerateInput("points must be positive to take logarithms")
    slope, _ = np.polyfit(np.log(np.array(ns, dtype=float)), np.log(np.array(values, dtype=float)), 1)
    return float(slope)


# ---------------------------------------------------------------------------
# strategies from witnesses
# ---------------------------------------------------------------------------


def multicycle_strategy_from_x(
    m: VassMdp, x: Mapping[str, Fraction]
) -> dict[str, dict[str, Fraction]]:
    """Turn a conservation-respecting flow into a randomized memoryless
    strategy: each controlled state with positive outflow picks each outgoing
    transition proportionally to its flow. States with zero outflow get no
    entry (the strategy keeps the run inside the flow's support, so they are
    never reached from it)."""
    if any(Fraction(v) < 0 for v in x.values()):
        raise ValueError("flow values must be non-negative")
    if all(Fraction(v) == 0 for v in x.values()):
        raise ZeroWitness("flow has empty support")
    out: dict[str, dict[str, Fraction]] = {}
    for s in m.nondet_states():
        flows = {t.tid: Fraction(x.get(t.tid, 0)) for t in m.out(s.name)}
        total = sum(flows.values())
        if total == 0:
            continue
        out[s.name] = {tid: v / total for tid, v in flows.items() if v > 0}
    return out


def expected_update(
    m: VassMdp, strategy: Optional[Strategy], state: str
) -> tuple[Fraction, ...]:
    """Exact expected counter change of one step from `state` under the
    resolved branch distribution."""
    outs = m.out(state)
    if m.kind(state) == NONDET:
        entry = dict(strategy or {}).get(state)
        if entry is None:
            raise IncompleteStrategy(f"no strategy entry for controlled state {state!r}")
        if isinstance(entry, str):
            dist = {entry: Fraction(1)}
        else:
            dist = {tid: Fraction(p) for tid, p in entry.items()}
        probs = [dist.get(t.tid, Fraction(0)) for t in outs]
    else:
        probs = [t.prob for t in outs]
    total = [Fraction(0)] * m.dimension
    for t, p in zip(outs, probs):
        for k, u in enumerate(t.update):
            total[k] += p * u
    return tuple(total)
