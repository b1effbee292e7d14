"""Command-line entry point.

Subcommands: ``compile`` (cefsm -> TSF JSON), ``solve``, ``kmax``,
``strategy``, ``simulate``, ``gen``, ``risk``, ``scaling``, ``export-dot``.
Progress goes to stderr; stdout stays machine-parseable.  Exit codes: 0 ok,
1 validation/solve/model errors, 2 usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import benchmarks, engine, risk, scaling, tsf
from .cefsm import CefsmError, compile_explicit, compile_model, parse
from .simulate import save_trace, simulate


def _progress(msg: str) -> None:
    print(msg, file=sys.stderr)


def _json_out(doc: dict, path: str | None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _load_system(args) -> tsf.TransitionSystem:
    return tsf.load(args.input)


def _resolve_mode(mode: str, system: tsf.TransitionSystem) -> str:
    if mode != "auto":
        return mode
    return "repair" if system.repair else "base"


def _fmt_states(system: tsf.TransitionSystem, states) -> str:
    return "{" + ", ".join(system.label(s) for s in sorted(states)) + "}"


# -- subcommand handlers -------------------------------------------------------


def cmd_compile(args) -> int:
    model = parse(Path(args.input).read_text())
    compiler = compile_explicit if args.identities else compile_model
    system, state_dict = compiler(
        model, max_configs=args.max_configs, with_labels=args.labels
    )
    out = Path(args.out)
    tsf.save(system, out)
    dict_path = Path(args.dict) if args.dict else out.with_suffix("").with_suffix(".dict.json")
    _json_out({str(i): d for i, d in state_dict.items()}, str(dict_path))
    _progress(
        f"compiled {args.input}: {system.num_states} states, "
        f"{len(system.controlled)}/{len(system.uncontrolled)}/{len(system.repair)} "
        f"controlled/uncontrolled/repair edges, {len(system.errors)} error states"
    )
    _progress(f"wrote {out} and {dict_path}")
    return 0


def cmd_solve(args) -> int:
    system = _load_system(args)
    mode = _resolve_mode(args.mode, system)
    result = engine.safe_k(system, system.non_error, args.k, mode)
    strategy = engine.res_k(system, args.k, mode)
    if args.format == "json":
        _json_out(
            {
                "k": args.k,
                "mode": mode,
                "safe_k": sorted(result.safe_set),
                "res_k": sorted(strategy.resilient),
                "labels": {str(s): system.label(s) for s in range(system.num_states)},
            },
            args.out,
        )
    else:
        lines = [
            f"safe_{args.k} = {_fmt_states(system, result.safe_set)}",
            f"res_{args.k} = {_fmt_states(system, strategy.resilient)}",
        ]
        text = "\n".join(lines) + "\n"
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
    return 0


def cmd_kmax(args) -> int:
    system = _load_system(args)
    mode = _resolve_mode(args.mode, system)
    result = engine.k_max(system, mode, state=args.state)
    if args.format == "json":
        doc = {
            "state": system.initial if args.state is None else args.state,
            "mode": mode,
            "k_max": result.value,
            "unbounded": result.unbounded,
            "evaluations": result.evaluations,
        }
        _json_out(doc, args.out)
    else:
        text = result.describe() + "\n"
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
    if args.strategy_out and result.strategy is not None:
        engine.save_strategy(result.strategy, args.strategy_out)
        _progress(f"wrote strategy for k={result.strategy.k} to {args.strategy_out}")
    return 0


def cmd_strategy(args) -> int:
    system = _load_system(args)
    mode = _resolve_mode(args.mode, system)
    strategy = engine.res_k(system, args.k, mode)
    engine.save_strategy(strategy, args.out)
    _progress(
        f"res_{args.k} has {len(strategy.resilient)} resilient states, "
        f"{len(strategy.recovery_moves)} recovery entries; wrote {args.out}"
    )
    return 0


def cmd_simulate(args) -> int:
    system = _load_system(args)
    strategy = engine.load_strategy(args.strategy)
    report = simulate(
        system,
        strategy,
        antagonist=args.antagonist,
        plays=args.plays,
        horizon=args.horizon,
        seed=args.seed,
    )
    _json_out(report.to_json_dict(), args.out)
    if report.first_error_trace is not None:
        trace_path = args.trace_out or "simulate.trace.json"
        save_trace(report.first_error_trace, trace_path)
        _progress(f"error reached; first failing play written to {trace_path}")
    if args.plot:
        from . import report as report_mod

        report_mod.render_simulation_figure(report, args.plot)
        _progress(f"wrote {args.plot}")
    return 0 if report.errors == 0 else 1


def cmd_gen(args) -> int:
    spec = benchmarks.BenchmarkSpec(
        family=args.family, n=args.n, m=args.m, r=args.r, c=args.c, ell=args.ell
    )
    out = Path(args.out)
    if spec.family == "chain":
        system = benchmarks.chain(spec.ell)
        tsf.save(system, out)
    else:
        out.write_text(benchmarks.generate_text(spec))
    _progress(f"wrote {out} (design resilience level {spec.expected_k})")
    return 0


def cmd_risk(args) -> int:
    profile = risk.MissionProfile(
        mission_hours=args.T,
        mtbf_hours=args.mtbf,
        repair_seconds=risk.parse_duration_seconds(args.repair),
    )
    table = risk.risk_table(profile, risk.parse_k_range(args.k))
    text = risk.format_csv(table) if args.format == "csv" else risk.format_text(table)
    if args.out:
        Path(args.out).write_text(text)
        _progress(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    if args.plot:
        from . import report as report_mod

        report_mod.render_risk_figure(table, args.plot)
        _progress(f"wrote {args.plot}")
    return 0


def cmd_scaling(args) -> int:
    edge_targets = [int(x) for x in args.edges.split(",")]
    ks = [int(x) for x in args.k.split(",")]
    _progress(f"timing safe_k on chains near {edge_targets} edges for k in {ks} ...")
    records = scaling.measure_chain_scaling(edge_targets, ks, repeats=args.repeats)
    text = scaling.format_csv(records)
    if args.out:
        Path(args.out).write_text(text)
        _progress(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    if args.plot:
        from . import report as report_mod

        report_mod.render_scaling_figure(records, args.plot)
        _progress(f"wrote {args.plot}")
    return 0


def cmd_export_dot(args) -> int:
    system = _load_system(args)
    text = tsf.to_dot(system)
    if args.out:
        Path(args.out).write_text(text)
        _progress(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


# -- parser --------------------------------------------------------------------


def _add_mode(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--mode",
        choices=("auto", "base", "repair"),
        default="auto",
        help="game mode; auto picks repair when the system has repair edges",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kresil",
        description="dense-failure resilience: solve, synthesize, and validate controllers",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="compile a .cefsm model to TSF JSON")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dict", help="state dictionary path (default: <out>.dict.json)")
    p.add_argument("--identities", action="store_true", help="track replica identities (<=3)")
    p.add_argument("--labels", action="store_true", help="attach readable state labels")
    p.add_argument("--max-configs", type=int, default=5_000_000)
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("solve", help="print the block-survival and resilient sets")
    p.add_argument("--input", required=True)
    p.add_argument("--k", type=int, required=True)
    _add_mode(p)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("kmax", help="find the maximal resilience level")
    p.add_argument("--input", required=True)
    p.add_argument("--state", type=int, help="state to rate (default: initial)")
    _add_mode(p)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out")
    p.add_argument("--strategy-out", help="also write the strategy at k_max")
    p.set_defaults(func=cmd_kmax)

    p = sub.add_parser("strategy", help="export the memoryless controller as JSON")
    p.add_argument("--input", required=True)
    p.add_argument("--k", type=int, required=True)
    _add_mode(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_strategy)

    p = sub.add_parser("simulate", help="play a strategy against fault injection")
    p.add_argument("--input", required=True)
    p.add_argument("--strategy", required=True)
    p.add_argument("--antagonist", choices=("random", "greedy"), default="greedy")
    p.add_argument("--plays", type=int, default=1000)
    p.add_argument("--horizon", type=int, default=1000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", help="statistics JSON path (default: stdout)")
    p.add_argument("--trace-out", help="failing-play trace path")
    p.add_argument("--plot", help="recovery-length histogram PNG")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("gen", help="generate a benchmark model or system")
    p.add_argument("--family", choices=benchmarks.FAMILIES, required=True)
    p.add_argument("--n", type=int, help="processors (avionics)")
    p.add_argument("--m", type=int, help="memory modules (avionics)")
    p.add_argument("--r", type=int, help="replicas / servers")
    p.add_argument("--c", type=int, default=1, help="clients")
    p.add_argument("--ell", type=int, help="chain length")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("risk", help="total-vs-dense failure probability table")
    p.add_argument("--T", type=float, required=True, help="mission time, hours")
    p.add_argument("--mtbf", type=float, required=True, help="mean time between failures, hours")
    p.add_argument("--repair", required=True, help="repair time, e.g. 36s / 2m / 0.5h")
    p.add_argument("--k", required=True, help="levels, e.g. 1..6 or 3 or 1,2,5")
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.add_argument("--out")
    p.add_argument("--plot", help="probability curve PNG")
    p.set_defaults(func=cmd_risk)

    p = sub.add_parser("scaling", help="time the solver across chain sizes")
    p.add_argument("--edges", default="125000,250000,500000,1000000", help="comma list")
    p.add_argument("--k", default="1,2", help="comma list")
    p.add_argument("--repeats", type=int, default=2)
    p.add_argument("--out")
    p.add_argument("--plot", help="log-log timing PNG")
    p.set_defaults(func=cmd_scaling)

    p = sub.add_parser("export-dot", help="render a system as GraphViz DOT")
    p.add_argument("--input", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_export_dot)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "k", None) is not None and isinstance(args.k, int) and args.k < 0:
        parser.error("k must be non-negative")
    try:
        return args.func(args)
    except (tsf.TsfError, CefsmError, ValueError, OSError) as exc:
        print(f"kresil: {exc}", file=sys.stderr)
        return 1


def run() -> None:
    sys.exit(main())
