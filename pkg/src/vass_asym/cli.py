"""Command line interface.

Subcommands: `analyze` (growth classification report), `simulate` (Monte
Carlo tail estimation), `mecs` / `types` (structure inspection), `energy`
(non-losing component decision), `gen-hamiltonian` (graph-to-model
reduction).

Exit codes: 0 success; 1 invalid input (bad JSON, schema or validation
errors, unknown names, bad options); 2 out of scope (class graph not
DAG-like where the analysis requires it, detector preconditions violated,
enumeration bounds exceeded); 3 internal attestation failure (an emitted
witness did not re-substitute exactly — never expected).

Every analysis report is attested before being emitted: all flows,
rankings, stationary distributions, and reachability value certificates it
carries are re-checked by exact rational substitution.
"""

from __future__ import annotations

import argparse
import io
import csv
import json
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence, Union

from . import __version__
from .dichotomy import (
    Estimate,
    InvalidType,
    NotDagLike,
    RankingFunction,
    SystemIWitness,
    classify_dag,
    compute_maximal_solutions,
    verify_ranking,
    verify_system_I_witness,
)
from .graph import (
    Mec,
    TypeSeq,
    enumerate_types,
    is_dag_like,
    max_reach_values,
    mec_decomposition,
    verify_reach_values,
)
from .model import (
    Counter,
    IncompleteStrategy,
    Measure,
    SchemaError,
    Termination,
    TransitionCount,
    UnknownTransition,
    ValidationError,
    VassMdp,
    apply_md_strategy,
    augment_step_counter,
    measure_key,
    model_digest,
    parse_measure,
    parse_vass,
    serialize_vass,
    zero_counters,
)
from .onedim import (
    ClassInventory,
    PreconditionViolated,
    TooManyStrategies,
    VertexNotInGraph,
    classify_onedim,
    detect_bounded_zero,
    energy_safe,
    hamiltonian_reduction,
    verify_stationary,
)
from .sim import TailReport, estimate_tails, multicycle_strategy_from_x

INITIAL_CONVENTION = (
    "runs start in the lexicographically least state name unless overridden, "
    "with every counter at the scale parameter n"
)


class AttestationError(RuntimeError):
    """An emitted witness failed exact re-substitution."""


class _CliError(Exception):
    """Usage error raised instead of argparse's default exit."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # noqa: A003 - argparse API
        raise _CliError(f"{self.prog}: {message}")


# ---------------------------------------------------------------------------
# serialization helpers
# ---------------------------------------------------------------------------


def _frac(x: Fraction) -> str:
    return str(Fraction(x))


def _ser_flow(w: SystemIWitness) -> dict:
    return {
        "class": w.mec_id,
        "flow": {tid: _frac(v) for tid, v in sorted(w.x.items()) if v != 0},
        "positive_counters": sorted(w.positive_counters),
        "positive_transitions": sorted(w.positive_transitions),
    }


def _ser_ranking(r: RankingFunction) -> dict:
    return {
        "class": r.mec_id,
        "counter_coefficients": {str(c): _frac(v) for c, v in sorted(r.y.items())},
        "state_offsets": {s: _frac(v) for s, v in sorted(r.z.items())},
        "strict_controlled_transitions": sorted(r.strict_nondet),
        "strict_probabilistic_states": sorted(r.strict_prob),
    }


def _ser_witnesses(w: dict) -> dict:
    out: dict = {}
    for key, val in w.items():
        if key == "pipeline":
            out[key] = [
                {
                    "class": step["class"],
                    "zeroed_counters": list(step["zeroed_counters"]),
                    "newly_pumped": list(step["newly_pumped"]),
                    "flow": _ser_flow(step["flow"]),
                    "ranking": _ser_ranking(step["ranking"]),
                }
                for step in val
            ]
        else:
            out[key] = val
    return out


def _ser_estimate(beta: tuple[str, ...], est: Estimate) -> dict:
    return {
        "type": list(beta),
        "label": est.label.value,
        "tag": est.tag,
        "exact": est.exact,
        "bound": est.bound,
        "note": est.note,
        "beyond_quadratic_hint": est.beyond_quadratic_hint,
        "witnesses": _ser_witnesses(est.witnesses),
    }


def _ser_inventory(inv: Optional[ClassInventory]) -> Optional[dict]:
    if inv is None:
        return None
    out = {}
    for mid in sorted(inv.flags):
        f = inv.flags[mid]
        witnesses: dict = {}
        if f.flow is not None:
            witnesses["flow"] = _ser_flow(f.flow)
        if f.ranking is not None:
            witnesses["ranking"] = _ser_ranking(f.ranking)
        if f.kept_states is not None:
            witnesses["zero_cycle_kept_states"] = sorted(f.kept_states)
        if f.kept_transitions is not None:
            witnesses["zero_cycle_kept_transitions"] = sorted(f.kept_transitions)
        if f.uz_component is not None:
            witnesses["oscillating_component"] = sorted(f.uz_component)
        if f.uz_defect_transition is not None:
            witnesses["oscillation_defect_transition"] = f.uz_defect_transition
        out[mid] = {
            "increasing": f.increasing,
            "bounded_zero": f.bounded_zero,
            "unbounded_zero": f.unbounded_zero,
            "zero_cycle_transitions": sorted(f.bz_transitions),
            "oscillation_transitions": sorted(f.uz_transitions),
            "witnesses": witnesses,
        }
    return out


# ---------------------------------------------------------------------------
# attestation
# ---------------------------------------------------------------------------


def _base_model(m: VassMdp, measure: Measure) -> VassMdp:
    if isinstance(measure, Termination):
        return augment_step_counter(m)
    if isinstance(measure, TransitionCount):
        return augment_step_counter(m, only=measure.tid)
    return m


def _attest(
    m: VassMdp,
    mecs: Sequence[Mec],
    types: Sequence[TypeSeq],
    estimates: dict[str, dict[tuple[str, ...], Estimate]],
    inventory: Optional[ClassInventory],
) -> int:
    """Re-substitute every witness behind the report; raise on any failure."""
    failures: list[str] = []
    checks = 0
    by_id = {mec.mid: mec for mec in mecs}

    if inventory is not None:
        for mid in sorted(inventory.flags):
            f = inventory.flags[mid]
            checks += 1
            failures += [f"class {mid} flow: {e}" for e in verify_system_I_witness(m, by_id[mid], f.flow)]
            checks += 1
            failures += [f"class {mid} ranking: {e}" for e in verify_ranking(m, by_id[mid], f.ranking)]
        # the zero-cycle detector (and its stationary witness) exists only in
        # the regime where no class admits positive drift
        if not inventory.any_increasing:
            w = detect_bounded_zero(m, mecs)
            if w is not None:
                chain = apply_md_strategy(m, w.strategy)
                checks += 1
                failures += [
                    f"class {w.mec_id} stationary: {e}"
                    for e in verify_stationary(chain, w.component_states, w.stationary)
                ]

    pair_cache: dict[tuple[str, str], Fraction] = {}

    def pair(a: str, b: str) -> Fraction:
        nonlocal checks
        if (a, b) not in pair_cache:
            targets = frozenset(by_id[b].states)
            sinks = frozenset(
                s for mec in mecs if mec.mid not in (a, b) for s in mec.states
            )
            values, choice = max_reach_values(m, targets, sinks)
            checks += 1
            failures.extend(
                f"reach {a}->{b}: {e}"
                for e in verify_reach_values(m, targets, sinks, values, choice)
            )
            pair_cache[(a, b)] = values[min(by_id[a].states)]
        return pair_cache[(a, b)]

    for ts in types:
        weight = Fraction(1)
        for a, b in zip(ts.mecs, ts.mecs[1:]):
            weight *= pair(a, b)
        checks += 1
        if weight != ts.weight:
            failures.append(
                f"type {','.join(ts.mecs)}: reported weight {ts.weight} != recomputed {weight}"
            )

    for mkey, per_type in estimates.items():
        measure = parse_measure(mkey)
        base: Optional[VassMdp] = None
        base_mecs: dict[str, Mec] = {}
        for beta, est in per_type.items():
            pipeline = est.witnesses.get("pipeline") if est.witnesses else None
            if not pipeline:
                continue
            if base is None:
                base = _base_model(m, measure)
                base_mecs = {x.mid: x for x in mec_decomposition(base)}
            for step in pipeline:
                zeroed = step["zeroed_counters"]
                zm = zero_counters(base, zeroed) if zeroed else base
                mec = base_mecs[step["class"]]
                where = f"{mkey} along {','.join(beta)} at class {step['class']}"
                checks += 1
                failures += [f"{where} flow: {e}" for e in verify_system_I_witness(zm, mec, step["flow"])]
                checks += 1
                failures += [f"{where} ranking: {e}" for e in verify_ranking(zm, mec, step["ranking"])]

    if failures:
        raise AttestationError("; ".join(failures))
    return checks


# ---------------------------------------------------------------------------
# analyze
# ---------------------------------------------------------------------------


def _validate_measures(m: VassMdp, measures: Optional[list[Measure]]) -> None:
    for ms in measures or []:
        if isinstance(ms, Counter) and not (1 <= ms.index <= m.dimension):
            raise ValueError(
                f"counter index {ms.index} out of range 1..{m.dimension}"
            )
        if isinstance(ms, TransitionCount) and not m.has_transition(ms.tid):
            raise UnknownTransition(ms.tid)


def build_analysis(
    m: VassMdp,
    measures: Optional[list[Measure]] = None,
    max_type_len: Optional[int] = None,
) -> dict:
    """Classify, attest, and serialize: the `analyze` subcommand's payload."""
    _validate_measures(m, measures)
    mecs = mec_decomposition(m)
    dag = is_dag_like(m, mecs)
    if max_type_len is None:
        max_type_len = max(1, len(mecs))

    if m.dimension == 1:
        rep = classify_onedim(m, measures, max_type_len)
        types = rep.types
        inventory = rep.inventory
        estimates = rep.estimates
        types_complete = rep.types_complete
    else:
        if measures is None:
            measures = (
                [Termination()]
                + [Counter(c) for c in range(1, m.dimension + 1)]
                + [TransitionCount(t.tid) for t in m.transitions]
            )
        types = enumerate_types(m, max_type_len, mecs)
        estimates = {}
        for ms in measures:
            estimates[measure_key(ms)] = {
                ts.mecs: classify_dag(m, ts.mecs, ms, mecs) for ts in types
            }
        inventory = None
        types_complete = dag and max_type_len >= len(mecs)

    checks = _attest(m, mecs, types, estimates, inventory)

    return {
        "tool": {"name": "vass-asym", "version": __version__},
        "model": {
            "digest": model_digest(m),
            "dimension": m.dimension,
            "states": len(m.states),
            "transitions": len(m.transitions),
        },
        "initial_convention": INITIAL_CONVENTION,
        "classes": [
            {
                "id": mec.mid,
                "states": sorted(mec.states),
                "transitions": sorted(mec.transitions),
            }
            for mec in mecs
        ],
        "dag_like": dag,
        "types_complete": types_complete,
        "max_type_len": max_type_len,
        "types": [
            {"classes": list(ts.mecs), "weight": _frac(ts.weight)} for ts in types
        ],
        "inventory": _ser_inventory(inventory),
        "estimates": {
            mkey: [_ser_estimate(beta, est) for beta, est in per_type.items()]
            for mkey, per_type in estimates.items()
        },
        "attestation": {"exact_arithmetic": True, "checks": checks},
    }


def _analysis_text(doc: dict) -> str:
    lines = [
        f"model sha256:{doc['model']['digest'][:16]} dimension={doc['model']['dimension']} "
        f"states={doc['model']['states']} transitions={doc['model']['transitions']}",
        "classes:",
    ]
    for cls in doc["classes"]:
        lines.append(
            f"  {cls['id']}: states={{{','.join(cls['states'])}}} "
            f"transitions={{{','.join(cls['transitions'])}}}"
        )
    shape = "DAG-like" if doc["dag_like"] else "not DAG-like"
    complete = "complete" if doc["types_complete"] else f"cut at length {doc['max_type_len']}"
    lines.append(f"class graph: {shape}; {len(doc['types'])} types ({complete})")
    lines.append("types:")
    for ts in doc["types"]:
        lines.append(f"  ({','.join(ts['classes'])}) weight={ts['weight']}")
    if doc["inventory"] is not None:
        lines.append("behaviour inventory:")
        for mid, f in doc["inventory"].items():
            parts = [f"increasing={f['increasing']}"]
            if f["bounded_zero"] is not None:
                parts.append(f"zero_cycles={f['bounded_zero']}")
                parts.append(f"oscillation={f['unbounded_zero']}")
            lines.append(f"  {mid}: {' '.join(parts)}")
    lines.append("estimates:")
    for mkey, entries in doc["estimates"].items():
        for e in entries:
            flag = "exact" if e["exact"] else "extended"
            extra = f" bound={e['bound']}" if e["bound"] is not None else ""
            hint = " growth-may-exceed-degree-2" if e["beyond_quadratic_hint"] else ""
            lines.append(
                f"  {mkey} | ({','.join(e['type'])}): {e['label']}{extra} "
                f"{flag} [{e['tag']}]{hint}"
            )
            if e["note"]:
                lines.append(f"      note: {e['note']}")
    lines.append(
        f"attestation: {doc['attestation']['checks']} exact re-substitution checks passed"
    )
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def _load_strategy(arg: str, m: VassMdp):
    """--strategy argument: a JSON file path, or witness:<class-id> to derive
    a randomized strategy from that class's maximal pumping flow."""
    if arg.startswith("witness:"):
        mid = arg[len("witness:") :]
        for mec in mec_decomposition(m):
            if mec.mid == mid:
                w, _ = compute_maximal_solutions(m, mec)
                return multicycle_strategy_from_x(m, w.x)
        raise ValueError(f"no class named {mid!r}")
    doc = json.loads(Path(arg).read_text())
    if not isinstance(doc, dict):
        raise ValueError("strategy file must map state names to choices")
    out: dict[str, Union[str, dict[str, Fraction]]] = {}
    for state, entry in doc.items():
        if isinstance(entry, str):
            out[state] = entry
        elif isinstance(entry, dict):
            out[state] = {tid: Fraction(p) for tid, p in entry.items()}
        else:
            raise ValueError(
                f"strategy for {state!r} must be a transition id or a distribution"
            )
    return out


def _ser_strategy(strategy) -> Optional[dict]:
    if strategy is None:
        return None
    return {
        state: entry if isinstance(entry, str) else {t: _frac(p) for t, p in entry.items()}
        for state, entry in strategy.items()
    }


def build_sim_report(m: VassMdp, rep: TailReport, init_state: str, runs: int, strategy) -> dict:
    return {
        "tool": {"name": "vass-asym", "version": __version__},
        "model": {"digest": model_digest(m), "dimension": m.dimension},
        "initial_convention": INITIAL_CONVENTION,
        "seed": rep.seed,
        "init_state": init_state,
        "runs_per_n": runs,
        "strategy": _ser_strategy(strategy),
        "n_list": list(rep.n_list),
        "caps": {str(n): c for n, c in rep.caps.items()},
        "groups": [
            {
                "n": n,
                "realized_type": list(g.realized_type),
                "runs": g.runs,
                "terminated": g.terminated,
                "truncated": g.truncated,
                "low_sample": g.low_sample,
                "median_steps": g.median_steps,
                "median_peaks": list(g.median_peaks),
            }
            for n in rep.n_list
            for g in rep.groups[n]
        ],
    }


def _sim_text(doc: dict) -> str:
    lines = [
        f"model sha256:{doc['model']['digest'][:16]} dimension={doc['model']['dimension']} "
        f"init={doc['init_state']} seed={doc['seed']} runs_per_n={doc['runs_per_n']}"
    ]
    for n in doc["n_list"]:
        lines.append(f"n={n} cap={doc['caps'][str(n)]}")
        for g in doc["groups"]:
            if g["n"] != n:
                continue
            med = "-" if g["median_steps"] is None else f"{g['median_steps']:g}"
            peaks = ",".join("-" if p is None else f"{p:g}" for p in g["median_peaks"])
            warn = " LOW-SAMPLE" if g["low_sample"] else ""
            lines.append(
                f"  ({','.join(g['realized_type'])}) runs={g['runs']} "
                f"terminated={g['terminated']} truncated={g['truncated']} "
                f"median_steps={med} median_peaks=[{peaks}]{warn}"
            )
    return "\n".join(lines)


def _sim_csv(doc: dict, dimension: int) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(
        ["n", "realized_type", "runs", "terminated", "truncated", "low_sample", "median_steps"]
        + [f"median_peak_{c}" for c in range(1, dimension + 1)]
        + ["cap"]
    )
    for g in doc["groups"]:
        writer.writerow(
            [
                g["n"],
                "+".join(g["realized_type"]),
                g["runs"],
                g["terminated"],
                g["truncated"],
                int(g["low_sample"]),
                "" if g["median_steps"] is None else g["median_steps"],
            ]
            + ["" if p is None else p for p in g["median_peaks"]]
            + [doc["caps"][str(g["n"])]]
        )
    return buf.getvalue().rstrip("\n")


# ---------------------------------------------------------------------------
# subcommand implementations
# ---------------------------------------------------------------------------


def _read_model(path: str) -> VassMdp:
    return parse_vass(Path(path).read_text())


def _emit(text: str, output: Optional[str]) -> None:
    if output:
        Path(output).write_text(text + "\n")
    else:
        print(text)


def _cmd_analyze(args) -> int:
    m = _read_model(args.model)
    measures = [parse_measure(s) for s in args.measure] if args.measure else None
    doc = build_analysis(m, measures, args.max_type_len)
    if args.json:
        _emit(json.dumps(doc, indent=2), args.output)
    else:
        _emit(_analysis_text(doc), args.output)
    return 0


def _cmd_simulate(args) -> int:
    m = _read_model(args.model)
    try:
        n_list = [int(part) for part in args.n.split(",") if part.strip() != ""]
    except ValueError:
        raise ValueError(f"--n expects comma-separated integers, got {args.n!r}") from None
    strategy = _load_strategy(args.strategy, m) if args.strategy else None
    init = args.init_state if args.init_state else min(m.state_names())
    rep = estimate_tails(
        m,
        n_list,
        args.runs,
        seed=args.seed,
        strategy=strategy,
        theta=args.theta,
        max_steps=args.max_steps,
        init_state=init,
        threads=args.threads,
    )
    doc = build_sim_report(m, rep, init, args.runs, strategy)
    if args.csv:
        _emit(_sim_csv(doc, m.dimension), args.output)
    elif args.json:
        _emit(json.dumps(doc, indent=2), args.output)
    else:
        _emit(_sim_text(doc), args.output)
    return 0


def _cmd_mecs(args) -> int:
    m = _read_model(args.model)
    mecs = mec_decomposition(m)
    dag = is_dag_like(m, mecs)
    if args.json:
        doc = {
            "classes": [
                {
                    "id": mec.mid,
                    "states": sorted(mec.states),
                    "transitions": sorted(mec.transitions),
                }
                for mec in mecs
            ],
            "dag_like": dag,
        }
        _emit(json.dumps(doc, indent=2), args.output)
        return 0
    lines = [
        f"{mec.mid}: states={{{','.join(sorted(mec.states))}}} "
        f"transitions={{{','.join(sorted(mec.transitions))}}}"
        for mec in mecs
    ]
    lines.append("class graph: " + ("DAG-like" if dag else "not DAG-like"))
    _emit("\n".join(lines), args.output)
    return 0


def _cmd_types(args) -> int:
    m = _read_model(args.model)
    mecs = mec_decomposition(m)
    max_len = args.max_type_len if args.max_type_len else max(1, len(mecs))
    types = enumerate_types(m, max_len, mecs)
    if args.json:
        doc = {
            "max_type_len": max_len,
            "complete": is_dag_like(m, mecs) and max_len >= len(mecs),
            "types": [
                {"classes": list(ts.mecs), "weight": _frac(ts.weight)} for ts in types
            ],
        }
        _emit(json.dumps(doc, indent=2), args.output)
        return 0
    lines = [f"({','.join(ts.mecs)}) weight={ts.weight}" for ts in types]
    _emit("\n".join(lines), args.output)
    return 0


def _cmd_energy(args) -> int:
    m = _read_model(args.model)
    ans = energy_safe(m, brute_bound=args.brute_bound)
    if args.json:
        doc = {
            "status": ans.status,
            "strategy": ans.strategy,
            "component": sorted(ans.bscc_states) if ans.bscc_states else None,
            "note": ans.note,
        }
        _emit(json.dumps(doc, indent=2), args.output)
        return 0
    lines = [ans.status]
    if ans.strategy:
        lines.append(
            "strategy: " + ", ".join(f"{s}->{t}" for s, t in sorted(ans.strategy.items()))
        )
    if ans.bscc_states:
        lines.append(f"component: {{{','.join(sorted(ans.bscc_states))}}}")
    if ans.note:
        lines.append(f"note: {ans.note}")
    _emit("\n".join(lines), args.output)
    return 0


def _cmd_gen_hamiltonian(args) -> int:
    doc = json.loads(Path(args.graph).read_text())
    m = hamiltonian_reduction(doc, args.pivot)
    _emit(json.dumps(serialize_vass(m), indent=2), args.output)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="vass-asym",
        description="Exact asymptotic growth classification and Monte Carlo "
        "validation for probabilistic counter machines.",
    )
    parser.add_argument("--version", action="version", version=f"vass-asym {__version__}")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("analyze", help="classify growth of measures along class-visit types")
    p.add_argument("model", help="model JSON file")
    p.add_argument(
        "--measure",
        action="append",
        metavar="L|C:<c>|T:<t>",
        help="measure to classify (repeatable; default: all)",
    )
    p.add_argument(
        "--max-type-len",
        type=int,
        default=None,
        help="longest class-visit sequence to enumerate (default: number of classes)",
    )
    p.add_argument("--json", action="store_true", help="emit the JSON report")
    p.add_argument("--text", action="store_true", help="emit the text report (default)")
    p.add_argument("-o", "--output", default=None, help="write to file instead of stdout")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("simulate", help="estimate measure tails by simulation")
    p.add_argument("model", help="model JSON file")
    p.add_argument("--n", required=True, help="comma-separated start values, increasing")
    p.add_argument("--runs", type=int, required=True, help="trajectories per start value")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument(
        "--strategy",
        default=None,
        help="strategy JSON file, or witness:<class-id> to derive one from "
        "that class's maximal pumping flow",
    )
    p.add_argument("--theta", type=float, default=None, help="cap steps at ceil(4*n**theta)")
    p.add_argument("--max-steps", type=int, default=None, help="fixed step cap (overrides --theta)")
    p.add_argument("--init-state", default=None, help="start state (default: least name)")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--csv", action="store_true", help="emit CSV rows")
    p.add_argument("--json", action="store_true", help="emit the JSON report")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("mecs", help="list the class decomposition")
    p.add_argument("model")
    p.add_argument("--json", action="store_true")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=_cmd_mecs)

    p = sub.add_parser("types", help="list realizable class-visit sequences with weights")
    p.add_argument("model")
    p.add_argument("--max-type-len", type=int, default=None)
    p.add_argument("--json", action="store_true")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=_cmd_types)

    p = sub.add_parser("energy", help="decide existence of a non-losing bottom component")
    p.add_argument("model")
    p.add_argument("--brute-bound", type=int, default=10**6)
    p.add_argument("--json", action="store_true")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=_cmd_energy)

    p = sub.add_parser(
        "gen-hamiltonian",
        help="encode undirected-graph Hamiltonicity as a one-counter energy model",
    )
    p.add_argument("graph", help='graph JSON file: {"vertices": [...], "edges": [[a,b],...]}')
    p.add_argument("pivot", help="vertex whose visit the counter meters")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=_cmd_gen_hamiltonian)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _CliError as e:
        print(str(e), file=sys.stderr)
        return 1
    except BrokenPipeError:
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 0
    except (NotDagLike, PreconditionViolated, TooManyStrategies) as e:
        print(f"out of scope: {e}", file=sys.stderr)
        return 2
    except AttestationError as e:
        print(f"attestation failure: {e}", file=sys.stderr)
        return 3
    except (
        SchemaError,
        ValidationError,
        InvalidType,
        UnknownTransition,
        IncompleteStrategy,
        VertexNotInGraph,
        json.JSONDecodeError,
        ValueError,
        KeyError,
        OSError,
    ) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
