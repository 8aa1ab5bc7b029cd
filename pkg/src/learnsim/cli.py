"""Command-line interface: simulate, sweep, optimize, serve.

Data goes to --out files (or stdout when --out is omitted); diagnostics and
summaries go to stderr. Exit code 0 means no errors, 2 means a usage or
config problem. All outputs are byte-deterministic for identical invocations.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from learnsim.integrate import Trajectory, richardson_error, simulate_timeline
from learnsim.optimize import (
    OptimizerSettings,
    optimize_schedule,
)
from learnsim.scenario import (
    SCENARIO_NAMES,
    ConfigError,
    SimulationConfig,
    builtin_scenario,
    config_from_dict,
    config_to_dict,
    parse_config,
    validate_config,
)

USAGE_ERROR = 2


class CliError(Exception):
    """Fatal usage/config problem; message goes to stderr, exit code 2."""


def _fmt(value: float) -> str:
    """Numbers are written with 9 significant digits."""
    return format(value, ".9g")


def _add_config_args(parser: argparse.ArgumentParser) -> None:
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--config", metavar="PATH",
                        help="JSON config file")
    source.add_argument("--scenario", metavar="NAME",
                        help="builtin scenario: %s" % ", ".join(SCENARIO_NAMES))
    parser.add_argument("--dt", type=float, default=None,
                        help="override the config's dt_min")
    parser.add_argument("--record-every", type=int, default=None,
                        help="override the config's sampling stride")


def _load_config(args) -> SimulationConfig:
    if args.scenario is not None:
        try:
            config = builtin_scenario(args.scenario)
        except ConfigError as exc:
            raise CliError("\n".join(exc.errors)) from exc
    else:
        path = Path(args.config)
        try:
            text = path.read_text()
        except OSError as exc:
            raise CliError(f"cannot read config {path}: {exc}") from exc
        try:
            config = parse_config(text)
        except ConfigError as exc:
            raise CliError("\n".join(f"{path}: {e}" for e in exc.errors)) \
                from exc
    overrides = {}
    if args.dt is not None:
        overrides["dt_min"] = args.dt
    if getattr(args, "record_every", None) is not None:
        overrides["record_every"] = args.record_every
    if overrides:
        config = replace(config, **overrides)
        errors = validate_config(config)
        if errors:
            raise CliError("\n".join(errors))
    return config


def _open_out(path: str | None):
    if path is None:
        return sys.stdout, False
    try:
        return open(path, "w", newline=""), True
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc}") from exc


def write_trajectory_csv(trajectory: Trajectory, stream) -> None:
    n = trajectory.params.n
    header = ["t_min", "phase", "U", "S", "Z_total"]
    header += [f"Z_{i + 1}" for i in range(n)]
    header += ["r", "P", "F"]
    stream.write(",".join(header) + "\n")
    for s in trajectory.samples:
        row = [_fmt(s.t), s.phase, _fmt(s.U), _fmt(s.S), _fmt(s.Z_total)]
        row += [_fmt(z) for z in s.Z]
        row += [_fmt(s.r), _fmt(s.P), _fmt(s.F)]
        stream.write(",".join(row) + "\n")


def _cmd_simulate(args) -> int:
    config = _load_config(args)
    trajectory = simulate_timeline(config)
    stream, close = _open_out(args.out)
    try:
        write_trajectory_csv(trajectory, stream)
    finally:
        if close:
            stream.close()
    final = trajectory.samples[-1]
    per_comp = " ".join(f"Z_{i + 1}={_fmt(z)}" for i, z in enumerate(final.Z))
    err = richardson_error(config, config.dt_min)
    print(f"final Z_total={_fmt(final.Z_total)} ({per_comp}) "
          f"clamps={trajectory.clamp_count} "
          f"richardson(dt={_fmt(config.dt_min)})={_fmt(err)}",
          file=sys.stderr)
    return 0


def _resolve_path(doc, dotted: str):
    """Split 'params.gamma[0]' into its container and final key/index."""
    tokens: list = []
    for part in dotted.split("."):
        indices: list[int] = []
        while part.endswith("]"):
            part, bracket, idx = part[:-1].rpartition("[")
            if not bracket or not idx.isdigit():
                raise CliError(f"cannot resolve --param {dotted!r}: "
                               f"bad index [{idx}]")
            indices.append(int(idx))
        if not part and not indices:
            raise CliError(f"cannot resolve --param {dotted!r}: empty path "
                           "component")
        if part:
            tokens.append(part)
        tokens.extend(reversed(indices))
    if not tokens:
        raise CliError(f"cannot resolve --param {dotted!r}: empty path")
    node = doc
    for token in tokens[:-1]:
        try:
            node = node[token]
        except (KeyError, IndexError, TypeError):
            raise CliError(f"cannot resolve --param {dotted!r}: "
                           f"no such entry {token!r}") from None
    last = tokens[-1]
    ok = (isinstance(node, dict) and last in node) or \
         (isinstance(node, list) and isinstance(last, int)
          and 0 <= last < len(node))
    if not ok:
        raise CliError(f"cannot resolve --param {dotted!r}: "
                       f"no such entry {last!r}")
    return node, last


def _cmd_sweep(args) -> int:
    base = _load_config(args)
    try:
        values = [float(v) for v in args.values.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise CliError(f"bad --values list: {exc}") from exc
    if not values:
        raise CliError("--values is empty; give a comma-separated list")

    rows = []
    for value in values:
        doc = config_to_dict(base)
        node, key = _resolve_path(doc, args.param)
        node[key] = value
        try:
            config = config_from_dict(doc)
        except ConfigError as exc:
            raise CliError(f"{args.param}={_fmt(value)}: "
                           + "; ".join(exc.errors)) from exc
        trajectory = simulate_timeline(config)
        final = trajectory.samples[-1]
        deficit = 1.0 - min(s.r for s in trajectory.samples)
        rows.append((value, final.Z_total, final.Z[-1], deficit))

    stream, close = _open_out(args.out)
    try:
        stream.write("value,Z_total,Z_n,peak_r_deficit\n")
        for row in rows:
            stream.write(",".join(_fmt(v) for v in row) + "\n")
    finally:
        if close:
            stream.close()
    print(f"swept {args.param} over {len(values)} values", file=sys.stderr)
    return 0


def _cmd_optimize(args) -> int:
    template = _load_config(args)
    if args.budget < 1:
        raise CliError("--budget must be >= 1")
    settings = OptimizerSettings(budget=args.budget, seed=args.seed,
                                 U_max=args.u_max, step_init=args.step_init)
    result = optimize_schedule(template, settings)
    report = {
        "U_values": list(result.schedule.U_values),
        "objective": result.objective,
        "evaluations": result.evaluations,
        "trace": result.trace,
    }
    stream, close = _open_out(args.out)
    try:
        stream.write(json.dumps(report, indent=2) + "\n")
    finally:
        if close:
            stream.close()
    print(f"best objective {_fmt(result.objective)} after "
          f"{result.evaluations} evaluations", file=sys.stderr)
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from learnsim.service import create_app

    app = create_app(session_dir=args.session_dir,
                     default_tick_rate=args.tick_rate,
                     console_dir=args.console_dir)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="learnsim",
        description="Simulate compartment models of classroom learning.")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate",
                         help="run one timeline and write the trajectory CSV")
    _add_config_args(sim)
    sim.add_argument("--out", metavar="PATH", default=None,
                     help="CSV output file (default: stdout)")
    sim.set_defaults(func=_cmd_simulate)

    sweep = sub.add_parser("sweep",
                           help="rerun a config while varying one parameter")
    _add_config_args(sweep)
    sweep.add_argument("--param", required=True, metavar="PATH",
                       help="dotted path, e.g. params.C or params.gamma[0]")
    sweep.add_argument("--values", required=True, metavar="V1,V2,...",
                       help="comma-separated numbers")
    sweep.add_argument("--out", metavar="PATH", default=None)
    sweep.set_defaults(func=_cmd_sweep)

    opt = sub.add_parser("optimize",
                         help="search for the best lesson requirements")
    _add_config_args(opt)
    opt.add_argument("--seed", type=int, default=0)
    opt.add_argument("--budget", type=int, default=500,
                     help="max objective evaluations")
    opt.add_argument("--u-max", type=float, default=10.0,
                     help="upper bound for requirement values")
    opt.add_argument("--step-init", type=float, default=1.0,
                     help="initial coordinate step")
    opt.add_argument("--out", metavar="PATH", default=None,
                     help="JSON report file (default: stdout)")
    opt.set_defaults(func=_cmd_optimize)

    serve = sub.add_parser("serve", help="run the live session service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--session-dir", default="./sessions",
                       help="directory for session event logs")
    serve.add_argument("--tick-rate", type=float, default=1.0,
                       help="simulated minutes per wall second")
    serve.add_argument("--console-dir", default=None, metavar="DIR",
                       help="serve a built teacher console from DIR "
                            "under /console")
    serve.set_defaults(func=_cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"learnsim: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except ConfigError as exc:
        for error in exc.errors:
            print(f"learnsim: {error}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
