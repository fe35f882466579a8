"""Command-line interface.

Subcommands: ``run`` (Monte Carlo sweep -> CSV), ``converge``
(per-iteration traces), ``sweep-k`` (RIS element sweep preset) and
``oracle`` (brute-force comparison suites).  Exit codes: 0 success,
1 configuration error, 2 runtime or infeasibility exhaustion.
"""

from __future__ import annotations

import argparse
import sys

from . import experiments
from .experiments import ConfigError


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="flat key=value config file")
    sub.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                     help="override a single config key (repeatable)")
    sub.add_argument("--out", help="output CSV path (overrides config)")
    sub.add_argument("--seed-range", metavar="START:STOP",
                     help="half-open seed range, e.g. 0:500")
    sub.add_argument("--jobs", type=int, help="parallel seed workers")
    sub.add_argument("--print-config", action="store_true",
                     help="print the effective configuration and exit")


def _build_config(args) -> experiments.ExperimentConfig:
    values: dict[str, str] = {}
    if args.config:
        values.update(experiments.load_config_file(args.config))
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, val = item.split("=", 1)
        values[key.strip()] = val.strip()
    cfg = experiments.build_config(values)
    if args.out:
        cfg.output_path = args.out
    if args.seed_range:
        try:
            start, stop = (int(x) for x in args.seed_range.split(":"))
        except ValueError as exc:
            raise ConfigError(f"bad --seed-range {args.seed_range!r}") from exc
        if stop <= start:
            raise ConfigError("--seed-range stop must exceed start")
        cfg.seed_start, cfg.seed_count = start, stop - start
    if args.jobs:
        cfg.jobs = args.jobs
    cfg.validate()
    return cfg


def _cmd_run(args) -> int:
    cfg = _build_config(args)
    if args.print_config:
        print(experiments.dump_config(cfg), end="")
        return 0
    rows = experiments.run_experiment(cfg)
    n_feasible = sum(r.feasible for r in rows)
    print(f"wrote {len(rows)} rows"
          + (f" to {cfg.output_path}" if cfg.output_path else "")
          + f"; {n_feasible} feasible")
    if n_feasible == 0:
        print("no feasible solution for any (seed, sweep, scheme)",
              file=sys.stderr)
        return 2
    return 0


def _cmd_converge(args) -> int:
    cfg = _build_config(args)
    if args.print_config:
        print(experiments.dump_config(cfg), end="")
        return 0
    rows = experiments.run_convergence_trace(cfg)
    print(f"wrote {len(rows)} trace rows"
          + (f" to {cfg.output_path}" if cfg.output_path else ""))
    return 0


def _cmd_sweep_k(args) -> int:
    args.set = list(args.set) + ["sweep.kind=ris_elements"]
    if not any(s.startswith("sweep.values") for s in args.set):
        args.set.append("sweep.values=10, 15, 20")
    return _cmd_run(args)


def _cmd_oracle(args) -> int:
    from . import oracles

    ok = True
    suites = ("power", "joint", "sandwich") if args.suite == "all" else (args.suite,)
    if "power" in suites:
        rows = oracles.run_power_suite(n_instances=args.instances or 50,
                                       verbose=args.verbose)
        worst = min((r["solver"] - 0.98 * r["oracle"]) for r in rows)
        good = worst >= -1e-12
        slow = max(r["seconds"] for r in rows)
        print(f"power-oracle: {'PASS' if good else 'FAIL'} "
              f"(worst margin {worst:.3e}, max {slow:.2f}s)")
        ok &= good
    if "joint" in suites:
        rows = oracles.run_joint_suite(n_instances=args.instances or 20,
                                       verbose=args.verbose)
        worst = min((r["solver"] - 0.95 * r["oracle"]) for r in rows)
        good = worst >= -1e-12
        print(f"joint-oracle: {'PASS' if good else 'FAIL'} "
              f"(worst margin {worst:.3e})")
        ok &= good
    if "sandwich" in suites:
        rows = oracles.run_sandwich_suite(n_instances=args.instances or 20,
                                          verbose=args.verbose)
        sandwich_ok = all(r["extracted"] <= r["relaxed"] + 1e-9 for r in rows
                          if r["feasible"])
        near = all(r["extracted"] >= 0.95 * r["oracle"] - 1e-12 for r in rows
                   if r["feasible"] and r["oracle"] > 0)
        good = sandwich_ok and near
        print(f"sandwich: {'PASS' if good else 'FAIL'} "
              f"(bound {'ok' if sandwich_ok else 'violated'}, "
              f"extraction {'ok' if near else 'short'})")
        ok &= good
    return 0 if ok else 2


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="risnoma",
        description="RIS-assisted NOMA D2D sum-rate experiments")
    subs = parser.add_subparsers(dest="command", required=True)

    p_run = subs.add_parser("run", help="Monte Carlo sweep to CSV")
    _add_common(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_conv = subs.add_parser("converge", help="per-iteration objective traces")
    _add_common(p_conv)
    p_conv.set_defaults(func=_cmd_converge)

    p_k = subs.add_parser("sweep-k", help="RIS element sweep preset (10/15/20)")
    _add_common(p_k)
    p_k.set_defaults(func=_cmd_sweep_k)

    p_or = subs.add_parser("oracle", help="brute-force comparison suites")
    p_or.add_argument("--suite", choices=("power", "joint", "sandwich", "all"),
                      default="all")
    p_or.add_argument("--instances", type=int, default=None)
    p_or.add_argument("--verbose", action="store_true")
    p_or.set_defaults(func=_cmd_oracle)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - defensive
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
