"""Command-line front end: ``larscache {simulate,sweep,compare,tune,gen-trace}``.

Exit codes: 0 success, 2 usage error, 3 input error, 4 internal invariant failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys

from . import report, workloads
from .config import (Algorithm, ConfigError, Objective, Scheme, format_retention, load_config,
                     parse_retention)
from .engine import EngineError
from .schemes import SchemeError, run_drs, run_fixed, run_lars, run_sram, run_synergy
from .trace import Dist, TraceError, WorkloadSpec, application_id, generate_trace, read_trace, write_trace
from .tuner import HistoryStore, TunerError

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_INTERNAL = 0, 2, 3, 4

_SCHEMES = {"sram": Scheme.SRAM, "stt": Scheme.STT_FIXED, "stt_fixed": Scheme.STT_FIXED,
            "drs": Scheme.DRS_PERFECT, "lars": Scheme.LARS, "synergy": Scheme.LARS_DRS_SYNERGY}


class UsageError(Exception):
    pass


def _common(p: argparse.ArgumentParser, trace=True) -> None:
    p.add_argument("--config", help="config file (default: $LARSCACHE_CONFIG or bundled)")
    if trace:
        p.add_argument("--trace", required=True, help="trace file")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def _tuner_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tuner", choices=[a.value for a in Algorithm])
    p.add_argument("--objective", choices=[o.value for o in Objective])
    p.add_argument("--interval", type=int, help="tuning interval in instructions")
    p.add_argument("--history", help="retention-history file (read and updated)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="larscache", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one scheme over a trace")
    _common(p)
    p.add_argument("--scheme", choices=sorted(_SCHEMES), required=True)
    p.add_argument("--retention", help="unit for stt/drs, or pin lars to one unit (e.g. 10ms)")
    _tuner_flags(p)

    p = sub.add_parser("sweep", help="fixed-retention sweep plus SRAM and DRS baselines")
    _common(p)
    p.add_argument("--retention", help="DRS retention (default from config)")

    p = sub.add_parser("compare", help="SRAM, DRS, LARS variants and synergy, relative to DRS")
    _common(p)
    p.add_argument("--retention", help="DRS retention (default from config)")
    p.add_argument("--objective", choices=[o.value for o in Objective])
    p.add_argument("--interval", type=int, help="tuning interval in instructions")

    p = sub.add_parser("tune", help="run the tuner only and report per-unit window metrics")
    _common(p)
    _tuner_flags(p)

    p = sub.add_parser("gen-trace", help="write a synthetic trace")
    p.add_argument("--out", required=True)
    p.add_argument("--config", help="config file (supplies the clock frequency)")
    d = WorkloadSpec()
    p.add_argument("--num-blocks", type=int, default=d.num_blocks)
    p.add_argument("--working-set", type=int, default=d.working_set_bytes, help="bytes")
    p.add_argument("--write-fraction", type=float, default=d.write_fraction)
    p.add_argument("--gap", default=str(d.inter_access_gap),
                   help="instructions between references, e.g. fixed:4 or exponential:8")
    p.add_argument("--lifetime", default=str(d.reuse_lifetime),
                   help="block lifetime in seconds, e.g. fixed:5e-3 or loguniform:1e-5:1e-2")
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--length", type=int, default=d.length)
    p.add_argument("--line-size", type=int, default=d.line_size_bytes)
    p.add_argument("--preset", choices=sorted(workloads.PRESETS),
                   help="write a bundled desk-scale workload instead (other shape flags ignored)")
    return ap


def _load(args):
    cfg = load_config(args.config)
    changes = {}
    if getattr(args, "tuner", None):
        changes["algorithm"] = Algorithm(args.tuner)
    if getattr(args, "objective", None):
        changes["objective"] = Objective(args.objective)
    if getattr(args, "interval", None):
        changes["tuning_interval_instructions"] = args.interval
    return cfg.with_tuner(**changes) if changes else cfg


def _retention_index(cfg, text, default):
    if text is None:
        return default
    return cfg.retentions.index_of(parse_retention(text))


def _emit(args, text: str) -> None:
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _records(path):
    return list(read_trace(path))


def cmd_simulate(args) -> int:
    cfg = _load(args)
    trace = _records(args.trace)
    scheme = _SCHEMES[args.scheme]
    if scheme is Scheme.SRAM:
        res = run_sram(cfg, trace)
    elif scheme is Scheme.STT_FIXED:
        if args.retention is None:
            raise UsageError("--retention is required for --scheme stt")
        res = run_fixed(cfg, trace, _retention_index(cfg, args.retention, None))
    elif scheme is Scheme.DRS_PERFECT:
        res = run_drs(cfg, trace, _retention_index(cfg, args.retention, cfg.scheme.drs_retention_index))
    elif scheme is Scheme.LARS and args.retention is not None:
        idx = _retention_index(cfg, args.retention, None)
        res = run_fixed(cfg.with_scheme(scheme=Scheme.LARS), trace, idx,
                        name=f"lars-fixed-{format_retention(cfg.retentions[idx])}")
        res.scheme = Scheme.LARS
    else:
        history = HistoryStore.load(args.history) if args.history else None
        app = application_id(args.trace) if history is not None else None
        tuned = run_lars(cfg, trace, history=history, app_id=app)
        if history is not None:
            history.save(args.history)
        res = tuned if scheme is Scheme.LARS else run_synergy(cfg, trace, tuned)
    _emit(args, report.render([report.row_from_result(res)], args.format))
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load(args)
    trace = _records(args.trace)
    rows = [report.row_from_result(run_sram(cfg, trace))]
    for i in range(len(cfg.retentions)):
        rows.append(report.row_from_result(run_fixed(cfg, trace, i)))
    drs_idx = _retention_index(cfg, args.retention, cfg.scheme.drs_retention_index)
    rows.append(report.row_from_result(run_drs(cfg, trace, drs_idx)))
    _emit(args, report.render(report.normalize(rows, "sram"), args.format))
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = _load(args)
    trace = _records(args.trace)
    drs_idx = _retention_index(cfg, args.retention, cfg.scheme.drs_retention_index)
    optimal = run_lars(cfg, trace, Algorithm.OPTIMAL)
    results = [
        run_sram(cfg, trace),
        run_drs(cfg, trace, drs_idx),
        optimal,
        run_lars(cfg, trace, Algorithm.MISS),
        run_lars(cfg, trace, Algorithm.MISS_LB),
        run_synergy(cfg, trace, optimal),
    ]
    rows = [report.row_from_result(r) for r in results]
    _emit(args, report.render(report.normalize(rows, "drs"), args.format))
    return EXIT_OK


def cmd_tune(args) -> int:
    cfg = _load(args)
    trace = _records(args.trace)
    history = HistoryStore.load(args.history) if args.history else None
    app = application_id(args.trace) if history is not None else None
    res = run_lars(cfg, trace, history=history, app_id=app)
    if history is not None:
        history.save(args.history)
    t = res.tuning
    sampled = [{"retention_s": cfg.retentions[i], **m._asdict()} for i, m in t.sampled]
    if args.format == "json":
        doc = {"algorithm": t.algorithm, "objective": cfg.tuner.objective.value,
               "chosen_retention_s": res.retention_s, "chosen_index": res.retention_index,
               "base_metric": t.base_metric, "complete": t.complete,
               "from_history": t.from_history, "retunes": t.retunes, "sampled": sampled}
        text = json.dumps(doc, indent=2) + "\n"
    else:
        buf = io.StringIO()
        cols = ["retention_s", "energy_nj", "latency_cycles", "edp", "misses", "miss_rate", "chosen"]
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for i, row in zip((i for i, _ in t.sampled), sampled):
            w.writerow([repr(row[c]) if isinstance(row.get(c), float) else row.get(c, "")
                        for c in cols[:-1]] + [str(i == res.retention_index).lower()])
        text = buf.getvalue()
    _emit(args, text)
    return EXIT_OK


def cmd_gen_trace(args) -> int:
    if args.preset:
        write_trace(args.out, workloads.build(args.preset),
                    header=f"larscache gen-trace --preset {args.preset}")
        return EXIT_OK
    freq = load_config(args.config).clock.frequency_hz
    try:
        spec = WorkloadSpec(num_blocks=args.num_blocks, working_set_bytes=args.working_set,
                            write_fraction=args.write_fraction,
                            inter_access_gap=Dist.parse(args.gap),
                            reuse_lifetime=Dist.parse(args.lifetime), seed=args.seed,
                            length=args.length, frequency_hz=freq, line_size_bytes=args.line_size)
        spec.validate()
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    write_trace(args.out, generate_trace(spec), header=(
        f"larscache gen-trace seed={spec.seed} length={spec.length} blocks={spec.num_blocks} "
        f"gap={spec.inter_access_gap} lifetime={spec.reuse_lifetime}"))
    return EXIT_OK


_COMMANDS = {"simulate": cmd_simulate, "sweep": cmd_sweep, "compare": cmd_compare,
             "tune": cmd_tune, "gen-trace": cmd_gen_trace}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"larscache: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, TraceError, SchemeError, TunerError, OSError) as exc:
        print(f"larscache: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (AssertionError, EngineError) as exc:
        print(f"larscache: internal invariant failure: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
