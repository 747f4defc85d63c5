"""Command-line entry point: simulate, analyze, search, words.

Exit codes: 0 success and all monitors clean, 1 monitor or coverage
failure, 2 validation error, 3 inconclusive search.  The default seed
comes from the RINGSWEEP_SEED environment variable; identical command
lines (including seed) produce byte-identical trace files.
"""
from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from . import adversary as adv
from . import analysis
from .engine import read_trace_file, write_trace_file
from .scenario import (
    Scenario,
    ScenarioError,
    parse_removals,
    parse_robot_record,
    parse_scenario_file,
    run_scenario,
)
from .words import (
    complement,
    divergence_rounds,
    max_common_factor_len,
    transform_identifier,
)
from .directions import Chirality

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_VALIDATION = 2
EXIT_INCONCLUSIVE = 3


def _default_seed() -> int:
    env = os.environ.get("RINGSWEEP_SEED")
    try:
        return int(env) if env else 0
    except ValueError:
        return 0


def _add_scenario_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scenario", help="scenario file (key = value lines)")
    p.add_argument("--n", type=int, help="ring size")
    p.add_argument("--algo", choices=["pef3", "pef2"])
    p.add_argument("--robots", help="comma-separated robot ids, e.g. 0,1,2")
    p.add_argument(
        "--robot",
        action="append",
        default=[],
        metavar="REC",
        help="detailed robot record, e.g. 'id=0 pos=1 dir=L chirality=cw'",
    )
    p.add_argument("--schedule", choices=["static", "recurrent", "eventual_missing", "removal_list"])
    p.add_argument("--seed", type=int)
    p.add_argument("--p", type=float, help="edge presence probability (recurrent schedules)")
    p.add_argument("--recurrence-bound", type=int)
    p.add_argument("--missing-edge", type=int)
    p.add_argument("--cutoff", type=int)
    p.add_argument("--removals", help="edge:[start,end];... with end=inf allowed")
    p.add_argument("--adversary", help="'confinement' or 'witness:<path>'")
    p.add_argument("--stall-cap", type=int)
    p.add_argument("--rounds", type=int)
    p.add_argument("--mutations", help="comma-separated fault-injection flags")


def _scenario_from_args(args) -> Scenario:
    sc = parse_scenario_file(args.scenario) if args.scenario else Scenario()
    if args.n is not None:
        sc.n = args.n
    if args.algo is not None:
        sc.algo = args.algo
    if args.robots is not None:
        from .scenario import RobotSpec

        sc.robots = [RobotSpec(id=int(x)) for x in args.robots.split(",") if x.strip()]
    for rec in args.robot:
        sc.robots.append(parse_robot_record(rec))
    if args.schedule is not None:
        sc.schedule = args.schedule
    sc.seed = args.seed if args.seed is not None else (sc.seed or _default_seed())
    if args.p is not None:
        sc.p = args.p
    if args.recurrence_bound is not None:
        sc.recurrence_bound = args.recurrence_bound
    if args.missing_edge is not None:
        sc.missing_edge = args.missing_edge
    if args.cutoff is not None:
        sc.cutoff = args.cutoff
    if args.removals is not None:
        sc.removals = parse_removals(args.removals)
    if args.adversary is not None:
        sc.adversary = args.adversary
    if args.stall_cap is not None:
        sc.stall_cap = args.stall_cap
    if args.rounds is not None:
        sc.rounds = args.rounds
    if args.mutations is not None:
        sc.mutations = frozenset(x.strip() for x in args.mutations.split(",") if x.strip())
    return sc


def _strategy_for(sc: Scenario):
    if sc.adversary is None:
        return None
    if sc.adversary == "confinement":
        return adv.ConfinementAdversary(sc.n, stall_cap=sc.stall_cap)
    path = sc.adversary.split(":", 1)[1]
    witness = adv.read_witness_file(path)
    return adv.WitnessStrategy(witness)


def _simulate_one(sc: Scenario, out_path: str | None, print_prefix: str = "") -> int:
    if sc.adversary and sc.adversary.startswith("witness:"):
        # The witness embeds its own cohort and ring; the scenario only
        # contributes the horizon.
        witness = adv.read_witness_file(sc.adversary.split(":", 1)[1])
        trace = adv.replay_witness(witness, sc.rounds)
    else:
        trace = run_scenario(sc, strategy=_strategy_for(sc))
    if out_path:
        write_trace_file(trace, out_path)
    towers = analysis.detect_towers(trace)
    suffix = max(0, min(trace.rounds - 1, trace.rounds // 2))
    cov = analysis.coverage(trace, suffix)
    print(
        f"{print_prefix}coverage[{suffix}:]: {cov.verdict()}   towers: {len(towers)}"
        + (f"   trace: {out_path}" if out_path else "")
    )
    return EXIT_OK if cov.covered else EXIT_FINDINGS


def cmd_simulate(args) -> int:
    sc = _scenario_from_args(args)
    if args.batch is None:
        return _simulate_one(sc, args.out)
    import copy

    codes = []
    base_out = args.out or "trace"

    def one(j: int) -> int:
        scj = copy.deepcopy(sc)
        scj.seed = sc.seed + j
        return _simulate_one(scj, f"{base_out}.seed{scj.seed}.jsonl", print_prefix=f"[seed {scj.seed}] ")

    with ThreadPoolExecutor(max_workers=min(args.batch, 8)) as pool:
        codes = list(pool.map(one, range(args.batch)))
    return max(codes) if codes else EXIT_OK


def cmd_analyze(args) -> int:
    trace = read_trace_file(args.trace)
    towers = analysis.detect_towers(trace)
    violations = analysis.monitor_lemmas(trace, towers)
    suffix = args.suffix_start if args.suffix_start is not None else max(
        0, min(trace.rounds - 1, trace.rounds // 2)
    )
    cov = analysis.coverage(trace, suffix, args.window)
    long_lived = sum(1 for t in towers if t.long_lived)
    print(f"rounds: {trace.rounds}   n: {trace.n}   algo: {trace.algo}")
    print(f"coverage[{suffix}:]: {cov.verdict()}")
    print(f"towers: {len(towers)} ({long_lived} long-lived)")
    coh = {rid: analysis.coherence_round(trace, rid) for rid in trace.robot_ids}
    print(f"coherence rounds: {coh}")
    if trace.meta.get("schedule", {}).get("kind") == "eventual_missing":
        rep = analysis.sentinel_visitor_report(trace)
        print(
            f"sentinels at edge {rep.missing_edge}: established="
            f"{rep.established_round}   meetings={len(rep.meetings)}"
        )
    if violations:
        print(f"violations: {len(violations)}")
        for v in violations[:20]:
            print(f"  [{v.monitor}] round {v.round}: {v.detail}")
        if len(violations) > 20:
            print(f"  ... {len(violations) - 20} more")
    else:
        print("violations: none")
    if args.findings:
        with open(args.findings, "w", encoding="utf-8", newline="\n") as fh:
            analysis.write_findings(violations, fh)
    return EXIT_FINDINGS if (violations or not cov.covered) else EXIT_OK


def cmd_search(args) -> int:
    if args.n > 6:
        print(f"search is desk-scale: n must be <= 6, got {args.n}", file=sys.stderr)
        return EXIT_VALIDATION
    ids = [int(x) for x in args.robots.split(",") if x.strip()]
    if not ids or len(ids) > 3:
        print("search needs 1..3 robot ids", file=sys.stderr)
        return EXIT_VALIDATION
    sc = Scenario(n=args.n, algo=args.algo, rounds=1, seed=args.seed or _default_seed())
    from .scenario import RobotSpec, build_robots

    sc.robots = [RobotSpec(id=i) for i in ids]
    for rec in args.robot:
        spec = parse_robot_record(rec)
        sc.robots = [spec if r.id == spec.id else r for r in sc.robots]
        if spec.id not in [r.id for r in sc.robots]:
            sc.robots.append(spec)
    try:
        sc.validate()
    except ScenarioError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_VALIDATION
    robots = build_robots(sc)
    result = adv.game_search(
        args.n, robots, args.algo, max_absent=args.max_absent, state_budget=args.state_budget
    )
    print(
        f"verdict: {result.verdict}   explored states: {result.explored}"
        f"   max simultaneous absent: {result.max_absent}"
    )
    if result.witness is not None:
        w = result.witness
        print(
            f"witness: path {w.path_length}, cycle {w.cycle_length}, "
            f"starved nodes {list(w.starved_nodes)}, "
            f"permanently absent {list(w.cycle_always_absent)}"
        )
        if args.witness_out:
            adv.write_witness_file(w, args.witness_out)
            print(f"witness written to {args.witness_out}")
    if result.verdict == adv.VERDICT_INCONCLUSIVE:
        print(f"state budget {result.state_budget} exhausted", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def cmd_words(args) -> int:
    did_something = False
    if args.transform is not None:
        print(transform_identifier(args.transform))
        did_something = True
    if args.lcf is not None:
        a, b = args.lcf
        u, v = transform_identifier(a), transform_identifier(b)
        bound = len(u) + len(v)
        print(max_common_factor_len(u, v, bound))
        did_something = True
    if args.lcf_complement is not None:
        a, b = args.lcf_complement
        u, v = transform_identifier(a), complement(transform_identifier(b))
        bound = len(u) + len(v)
        print(max_common_factor_len(u, v, bound))
        did_something = True
    if args.divergence is not None:
        a, b = args.divergence
        chir_b = (
            Chirality.RIGHT_IS_CLOCKWISE
            if args.chirality == "same"
            else Chirality.RIGHT_IS_COUNTER_CLOCKWISE
        )
        from .words import divergence_cap

        d = divergence_rounds(
            a, 1, Chirality.RIGHT_IS_CLOCKWISE, b, 1, chir_b, divergence_cap(a, b)
        )
        print(d if d is not None else "no divergence within cap")
        did_something = True
    if args.table is not None:
        hi = args.table
        ids = list(range(hi + 1))
        print("id\ttransformed")
        for i in ids:
            print(f"{i}\t{transform_identifier(i)}")
        print("\nlongest common factor of periodic repetitions (bound = |u|+|v|)")
        print("\t" + "\t".join(map(str, ids)))
        for a in ids:
            row = []
            for b in ids:
                u, v = transform_identifier(a), transform_identifier(b)
                row.append(str(max_common_factor_len(u, v, len(u) + len(v))))
            print(f"{a}\t" + "\t".join(row))
        print("\nsynchronized draws to divergence (same chirality, start index 1)")
        print("\t" + "\t".join(map(str, ids)))
        from .words import divergence_cap

        for a in ids:
            row = []
            for b in ids:
                d = divergence_rounds(
                    a, 1, Chirality.RIGHT_IS_CLOCKWISE,
                    b, 1, Chirality.RIGHT_IS_CLOCKWISE,
                    divergence_cap(a, b),
                )
                row.append(str(d) if d is not None else "-")
            print(f"{a}\t" + "\t".join(row))
        did_something = True
    if not did_something:
        print("nothing to do: pass --transform, --lcf, --divergence or --table", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ringsweep",
        description="Simulate and verify self-stabilizing perpetual exploration of dynamic rings.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run a scenario and report coverage")
    _add_scenario_flags(p_sim)
    p_sim.add_argument("--out", help="trace output path (line-delimited records)")
    p_sim.add_argument("--batch", type=int, help="run this many consecutive seeds concurrently")
    p_sim.set_defaults(func=cmd_simulate)

    p_an = sub.add_parser("analyze", help="coverage, towers and lemma monitors over a trace file")
    p_an.add_argument("trace")
    p_an.add_argument("--suffix-start", type=int)
    p_an.add_argument("--window", type=int)
    p_an.add_argument("--findings", help="write machine-readable findings here")
    p_an.set_defaults(func=cmd_analyze)

    p_se = sub.add_parser("search", help="exhaustive reactive-adversary confinement search")
    p_se.add_argument("--n", type=int, required=True)
    p_se.add_argument("--robots", required=True, help="comma-separated robot ids (<= 3)")
    p_se.add_argument("--robot", action="append", default=[], metavar="REC",
                      help="pin fields of one robot, e.g. 'id=0 pos=0 dir=R chirality=cw'")
    p_se.add_argument("--algo", choices=["pef3", "pef2"], default="pef3")
    p_se.add_argument("--seed", type=int)
    p_se.add_argument("--max-absent", type=int, default=1,
                      help="simultaneously absent edges the adversary may choose (default 1)")
    p_se.add_argument("--state-budget", type=int, default=2_000_000)
    p_se.add_argument("--witness-out", help="write the winning policy here")
    p_se.set_defaults(func=cmd_search)

    p_wo = sub.add_parser("words", help="transformed identifiers and word oracles")
    p_wo.add_argument("--transform", type=int, metavar="ID")
    p_wo.add_argument("--lcf", type=int, nargs=2, metavar=("A", "B"))
    p_wo.add_argument("--lcf-complement", type=int, nargs=2, metavar=("A", "B"))
    p_wo.add_argument("--divergence", type=int, nargs=2, metavar=("A", "B"))
    p_wo.add_argument("--chirality", choices=["same", "opposite"], default="same")
    p_wo.add_argument("--table", type=int, metavar="MAX_ID")
    p_wo.set_defaults(func=cmd_words)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_VALIDATION
    except (ValueError, OSError) as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
