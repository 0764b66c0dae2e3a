"""Command-line entry point: gen, run, offline, compare, sweep."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from .driver import measure_peak_rss, run, run_all_fast, run_offline_pair
from .model import POLICIES, CapacityError, ConfigError, SimConfig, load_config
from .recommender import recs_to_json
from .report import atomic_write, write_reports
from .trace import TraceError, WorkloadSpec, generate_workload, read_trace, trace_hash

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _csv_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", required=True, help="JSON configuration file")
    p.add_argument("--trace", dest="trace_path")
    p.add_argument("--output-prefix")
    p.add_argument("--policy")
    p.add_argument("--heuristic")
    p.add_argument("--fast-capacity-pct", type=float)
    p.add_argument("--fast-capacity-pages", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--interval-ns", type=float)
    p.add_argument("--sample-period", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tiersim", description="Guided data tiering simulator")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("gen", help="generate a synthetic trace")
    gen.add_argument("--spec", required=True, help="JSON workload spec")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)

    _add_config_flags(sub.add_parser("run", help="simulate one policy"))
    _add_config_flags(sub.add_parser("offline", help="profile pass + guided pass"))
    cmp_ = sub.add_parser("compare", help="run several policies on one trace")
    _add_config_flags(cmp_)
    cmp_.add_argument("--policies", type=_csv_list, default=list(POLICIES))
    sweep = sub.add_parser("sweep", help="fast-tier capacity sweep")
    _add_config_flags(sweep)
    sweep.add_argument("--pcts", type=_csv_list, required=True, help="comma-separated percentages of peak RSS")
    sweep.add_argument("--policies", type=_csv_list, default=["first-touch", "offline", "online"])
    return parser


def resolve_config(args) -> SimConfig:
    cfg = load_config(args.config)
    changes = {}
    for name in ("trace_path", "output_prefix", "policy", "heuristic", "seed"):
        value = getattr(args, name)
        if value is not None:
            changes[name] = value
    if args.fast_capacity_pct is not None:
        changes.update(fast_capacity_pct=args.fast_capacity_pct, fast_capacity_pages=None)
    if args.fast_capacity_pages is not None:
        changes.update(fast_capacity_pages=args.fast_capacity_pages, fast_capacity_pct=None)
    if args.interval_ns is not None:
        changes["interval_ns"] = args.interval_ns
    if args.sample_period is not None:
        changes["sample_period"] = args.sample_period
    cfg = cfg.with_overrides(**changes)
    if getattr(args, "command", None) == "offline":
        cfg = cfg.with_overrides(policy="offline")
    if args.command in ("compare", "sweep") and cfg.fast_capacity_pages is None and cfg.fast_capacity_pct is None:
        cfg = cfg.with_overrides(fast_capacity_pct=100.0)
    if cfg.trace_path is None:
        raise ConfigError("no trace_path given (config key or --trace)")
    if cfg.output_prefix is None:
        raise ConfigError("no output_prefix given (config key or --output-prefix)")
    if not Path(cfg.trace_path).is_file():
        raise ConfigError(f"trace file not found: {cfg.trace_path}")
    return cfg.validate()


def _check_policies(policies: list[str]) -> None:
    if not policies:
        raise ConfigError("empty policy list")
    for p in policies:
        if p not in POLICIES:
            raise ConfigError(f"unknown policy {p!r}; valid: {', '.join(POLICIES)}")


def _one_line(result, baseline=None) -> str:
    s = result.summary(baseline)
    rel = "" if s.relative_throughput is None else f" rel_throughput={s.relative_throughput:.4f}"
    return (f"{result.policy}: total_sim_ns={result.total_sim_ns:.0f} accesses={result.accesses} "
            f"migrated_bytes={result.migration_bytes}{rel}")


def cmd_gen(args) -> int:
    try:
        spec = WorkloadSpec.from_dict(json.loads(Path(args.spec).read_text())).validate()
    except OSError as exc:
        raise ConfigError(f"cannot read workload spec {args.spec}: {exc.strerror}") from None
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid workload spec {args.spec}: {exc}") from None
    atomic_write(args.out, "\n".join(generate_workload(spec, args.seed)) + "\n")
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = resolve_config(args)
    events = read_trace(cfg.trace_path)
    digest = trace_hash(events)
    if cfg.policy == "offline":
        profile_run, result = run_offline_pair(cfg, events, digest=digest)
        atomic_write(cfg.output_prefix + ".profile.json", profile_run.profile.to_json() + "\n")
        atomic_write(cfg.output_prefix + ".recs.json", recs_to_json(profile_run.recommendations) + "\n")
    else:
        result = run(cfg, events, digest=digest)
    write_reports(result, cfg.output_prefix)
    print(_one_line(result))
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = resolve_config(args)
    _check_policies(args.policies)
    events = read_trace(cfg.trace_path)
    digest = trace_hash(events)
    baseline = run_all_fast(cfg, events, digest=digest)
    rows = []
    for policy in args.policies:
        result = run(cfg.with_overrides(policy=policy), events, digest=digest)
        write_reports(result, f"{cfg.output_prefix}.{policy}", baseline)
        rel = result.summary(baseline).relative_throughput
        rows.append([policy, f"{result.total_sim_ns:.0f}", f"{rel:.6f}"])
        print(_one_line(result, baseline))
    atomic_write(cfg.output_prefix + ".compare.csv", _table(["policy", "total_sim_ns", "relative_throughput"], rows))
    return EXIT_OK


def _table(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def cmd_sweep(args) -> int:
    cfg = resolve_config(args)
    _check_policies(args.policies)
    if not args.pcts:
        raise ConfigError("empty capacity percentage list")
    try:
        pcts = [float(p) for p in args.pcts]
    except ValueError:
        raise ConfigError(f"capacity percentages must be numbers: {args.pcts}") from None
    events = read_trace(cfg.trace_path)
    digest = trace_hash(events)
    peak = measure_peak_rss(events, cfg.cost.page_bytes)
    baseline = run_all_fast(cfg, events, digest=digest)
    rows, details = [], []
    for policy in args.policies:
        for pct in pcts:
            run_cfg = cfg.with_overrides(policy=policy, fast_capacity_pct=pct, fast_capacity_pages=None)
            result = run(run_cfg, events, digest=digest)
            rel = result.summary(baseline).relative_throughput
            label = f"{pct:g}"
            write_reports(result, f"{cfg.output_prefix}.{policy}.{label}", baseline)
            rows.append([policy, label, f"{rel:.6f}"])
            details.append({"policy": policy, "pct": pct, "fast_capacity_pages": result.fast_capacity_pages,
                            "total_sim_ns": result.total_sim_ns, "relative_throughput": rel,
                            "migration_bytes": result.migration_bytes})
            print(_one_line(result, baseline) + f" pct={label}")
    atomic_write(cfg.output_prefix + ".sweep.csv", _table(["policy", "pct", "relative_throughput"], rows))
    doc = {"peak_rss_pages": peak, "baseline_total_sim_ns": baseline.total_sim_ns,
           "trace_hash": digest, "runs": details}
    atomic_write(cfg.output_prefix + ".sweep.json", json.dumps(doc, indent=1, sort_keys=True) + "\n")
    return EXIT_OK


COMMANDS = {"gen": cmd_gen, "run": cmd_run, "offline": cmd_run, "compare": cmd_compare, "sweep": cmd_sweep}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except (UsageError, ConfigError) as exc:
        print(f"tiersim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TraceError, CapacityError, OSError) as exc:
        print(f"tiersim: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
