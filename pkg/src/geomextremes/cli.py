"""Command-line entry point.

Subcommands: ``sample`` (write one sampled configuration), ``beta`` (print
the limit constants), ``bounds`` (print alpha/r estimates), ``run``
(execute an experiment and write the report plus tables), ``report``
(render an existing report to tables and figures).

Exit codes: 0 success, 2 configuration error, 3 runtime error. The thread
budget may be overridden by the GEOMEXTREMES_THREADS environment variable;
an explicit --threads flag wins over it.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np
import yaml

from .bounds import estimate_alpha, estimate_r
from .config import (
    ConfigError,
    apply_overrides,
    load_config_text,
    model_from_config,
    parse_config,
    plan_from_config,
    render_config,
)
from .harness import run_experiment
from .report import read_report, render_figures, render_tables, write_report
from .rng import substream
from .sampling import flats_as_arrays, planes_as_arrays

_THREADS_ENV = "GEOMEXTREMES_THREADS"


def _fmt(x: float) -> str:
    return f"{float(x):.12g}"


def _add_model_flags(sub):
    sub.add_argument("--model", required=True, help="model tag")
    sub.add_argument(
        "--body",
        default="unit-square",
        help="observation window: unit-square, unit-cube or an inline "
        "mapping such as '{kind: ball, center: [0, 0], radius: 1}'",
    )
    sub.add_argument("--d", type=int, help="ambient dimension")
    sub.add_argument("--k", type=int, help="flat dimension (kflat_distance)")
    sub.add_argument("--a", type=float, help="distance power (kflat_distance)")
    sub.add_argument(
        "--r", type=float, help="direction density power (hyperplane_simplices)"
    )
    sub.add_argument("--variant", help="gilbert_voronoi: inradius or gilbert-edge")
    sub.add_argument("--process", choices=("poisson", "binomial"))
    sub.add_argument(
        "--haar",
        action="store_true",
        help="Haar direction law (the default and only file-level choice)",
    )
    sub.add_argument(
        "--limit-samples",
        type=int,
        help="Monte Carlo sample count for simulated limit constants",
    )
    sub.add_argument("--limit-seed", type=int, help="seed for those constants")
    sub.add_argument("--y-max", type=float, help="kflat window threshold cap")


def _flags_to_config(args):
    body = args.body
    if isinstance(body, str) and body.lstrip().startswith("{"):
        try:
            body = yaml.safe_load(body)
        except yaml.YAMLError as exc:
            raise ConfigError(f"geometry.body: invalid mapping: {exc}") from exc
    if args.d is not None and body == "unit-cube":
        body = {"kind": "unit-cube", "d": args.d}
    geometry = {"body": body}
    if args.d is not None:
        geometry["d"] = args.d
    if args.k is not None:
        geometry["k"] = args.k
    if args.a is not None:
        geometry["a"] = args.a
    if args.r is not None:
        geometry["r"] = args.r
    raw = {"model": args.model, "geometry": geometry}
    if args.process:
        raw["process"] = args.process
    if args.variant:
        raw["variant"] = args.variant
    if args.limit_samples is not None:
        raw["limit_samples"] = args.limit_samples
    if args.limit_seed is not None:
        raw["limit_seed"] = args.limit_seed
    if args.y_max is not None:
        raw["y_max"] = args.y_max
    if getattr(args, "seed", None) is not None:
        raw["seed"] = args.seed
    return parse_config(raw)


def _cmd_beta(args) -> int:
    model = model_from_config(_flags_to_config(args))
    lim = model.limit
    print(f"beta = {_fmt(lim.beta)}")
    print(f"tau = {_fmt(lim.tau)}")
    print(f"gamma = {_fmt(lim.gamma)}")
    print(f"se = {_fmt(lim.se)}")
    print(f"provenance = {lim.provenance}")
    return 0


def _cmd_bounds(args) -> int:
    config = _flags_to_config(args)
    model = model_from_config(config)
    a_est = estimate_alpha(
        model,
        args.t,
        args.y1,
        args.y,
        samples=args.samples,
        seed=substream(config.seed, 1),
    )
    print(
        f"alpha = {_fmt(a_est.alpha)} (se {_fmt(a_est.alpha_se)}, "
        f"samples {a_est.samples})"
    )
    if a_est.no_hits:
        print("alpha estimate saw no hits; treat as an upper-bound scale")
    r_est = estimate_r(
        model, args.t, args.y, seed=substream(config.seed, 2)
    )
    print(
        f"r = {_fmt(r_est.r)} (se {_fmt(r_est.r_se)}, "
        f"ell {r_est.ell if r_est.ell is not None else '-'})"
    )
    return 0


def _config_columns(config):
    """Header and row array for a sampled configuration."""
    points = getattr(config, "points", None)
    if points is not None:
        d = points.shape[1] if points.size else config.dimension
        return [f"x{i + 1}" for i in range(d)], np.asarray(points, dtype=float)
    if isinstance(config, list) and config and hasattr(config[0], "offset"):
        normals, offsets = planes_as_arrays(config)
        d = normals.shape[1]
        header = [f"normal_{i + 1}" for i in range(d)] + ["offset"]
        return header, np.column_stack([normals, offsets])
    if isinstance(config, list) and config and hasattr(config[0], "basis"):
        bases, spans = flats_as_arrays(config)
        n, d, k = spans.shape
        header = [f"base_{i + 1}" for i in range(d)]
        for j in range(k):
            header += [f"dir{j + 1}_{i + 1}" for i in range(d)]
        cols = spans.reshape(n, d * k, order="F")
        return header, np.column_stack([bases, cols])
    if isinstance(config, list) and not config:
        return ["empty"], np.empty((0, 1))
    raise RuntimeError(f"cannot serialize configuration {type(config).__name__}")


def _cmd_sample(args) -> int:
    config = _flags_to_config(args)
    model = model_from_config(config)
    drawn = model.sample(args.t, substream(config.seed, 0))
    header, rows = _config_columns(drawn)
    lines = [",".join(header)]
    for row in np.atleast_2d(rows):
        lines.append(",".join(repr(float(v)) for v in row))
    text = "\n".join(lines) + "\n"
    if args.output == "-":
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {len(lines) - 1} atoms to {args.output}")
    return 0


def _cmd_run(args) -> int:
    raw = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                raw = load_config_text(fh.read(), source=args.config)
        except OSError as exc:
            raise ConfigError(f"{args.config}: cannot read config: {exc}")
    raw = apply_overrides(raw, args.set or [])
    env_threads = os.environ.get(_THREADS_ENV)
    if env_threads is not None:
        try:
            raw["threads"] = int(env_threads)
        except ValueError:
            raise ConfigError(
                f"{_THREADS_ENV}: expected an integer, got {env_threads!r}"
            )
    if args.threads is not None:
        raw["threads"] = args.threads
    if args.seed is not None:
        raw["seed"] = args.seed
    if args.replications is not None:
        raw["replications"] = args.replications
    if args.output is not None:
        raw["output"] = dict(raw.get("output") or {})
        raw["output"]["report"] = args.output
    config = parse_config(raw)
    if args.print_config:
        sys.stdout.write(render_config(config))
        return 0
    model = model_from_config(config)
    plan = plan_from_config(config, model)
    report = run_experiment(plan)
    for entry in report.results:
        print(
            f"t={entry['t']:g} m={entry['m']} "
            f"ks={_fmt(entry['ks'])} infinite={entry['infinite_count']}"
        )
    if report.rate is not None:
        print(
            f"rate slope={_fmt(report.rate['slope'])} "
            f"r_squared={_fmt(report.rate['r_squared'])}"
        )
    written = write_report(report, config.output["report"])
    tables_dir = config.output.get("tables_dir")
    if tables_dir:
        written.extend(render_tables(report, tables_dir))
    figures_dir = config.output.get("figures_dir")
    if figures_dir:
        written.extend(render_figures(report, figures_dir))
    for path in written:
        print(f"wrote {path}")
    return 0


def _cmd_report(args) -> int:
    report = read_report(args.report_path)
    out_dir = args.output or os.path.dirname(os.path.abspath(args.report_path))
    written = render_tables(report, out_dir)
    written.extend(render_figures(report, out_dir))
    for path in written:
        print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="geomextremes",
        description="Simulate extremal statistics of geometric processes "
        "and check them against their limit laws.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("sample", help="write one sampled configuration")
    _add_model_flags(p)
    p.add_argument("--t", type=float, required=True, help="intensity or size")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", default="-", help="path or - for stdout")
    p.set_defaults(func=_cmd_sample)

    p = subs.add_parser("beta", help="print the limit constants")
    _add_model_flags(p)
    p.set_defaults(func=_cmd_beta, seed=None)

    p = subs.add_parser("bounds", help="print alpha and r estimates")
    _add_model_flags(p)
    p.add_argument("--t", type=float, required=True, help="intensity or size")
    p.add_argument("--y", type=float, default=1.0, help="upper threshold")
    p.add_argument("--y1", type=float, default=0.0, help="lower threshold")
    p.add_argument("--samples", type=int, help="fixed sample count")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_bounds)

    p = subs.add_parser("run", help="run an experiment and write its report")
    p.add_argument("--config", help="config file path")
    p.add_argument(
        "--set",
        action="append",
        metavar="KEY.PATH=VALUE",
        help="override a config entry (repeatable)",
    )
    p.add_argument("--seed", type=int, help="master seed override")
    p.add_argument("--threads", type=int, help="thread budget override")
    p.add_argument("--replications", type=int, help="replication override")
    p.add_argument("--output", help="report path override")
    p.add_argument(
        "--print-config",
        action="store_true",
        help="print the effective merged config and exit",
    )
    p.set_defaults(func=_cmd_run)

    p = subs.add_parser("report", help="render a report to tables and figures")
    p.add_argument("report_path", help="existing report file")
    p.add_argument("--output", help="output directory (default: alongside)")
    p.set_defaults(func=_cmd_report)

    return parser


def cli_main(argv=None) -> int:
    """Parse argv and dispatch; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return int(code) if code is not None else 0
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        raise
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


def main() -> None:
    raise SystemExit(cli_main())
