"""Command-line entry point.

Subcommands:
  synth  - write a synthetic stream to CSV (plus a sidecar JSON with the
           true coefficient matrix)
  run    - prequential evaluation of a learner over a CSV or generated
           stream, emitting JSON-lines metrics and a summary JSON
  bench  - throughput benchmark of the solver chain
  sweep  - grid sweep of hyperparameters, one prequential run per cell

Exit codes: 0 success, 2 configuration error, 3 malformed input row,
4 numerical failure during a run.
"""

import argparse
import json
import secrets
import sys
import time
from pathlib import Path

import numpy as np

from . import datagen, harness
from .baselines import PaLearner, SomorLearner
from .core import HyperParams, MoresLearner
from .exceptions import ConfigError, MoresError
from .suffstats import Sample

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INPUT = 3
EXIT_NUMERIC = 4


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------- CSV I/O

def write_csv(path, samples):
    """Write samples using the `x1..xd,y1..ym` header schema with full
    float precision so a read-back reproduces the stream exactly."""
    d = samples[0].x.shape[0]
    m = samples[0].y.shape[0]
    header = [f"x{i+1}" for i in range(d)] + [f"y{j+1}" for j in range(m)]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for s in samples:
            row = [format(v, ".17g") for v in s.x] + [format(v, ".17g") for v in s.y]
            fh.write(",".join(row) + "\n")


def read_csv(path, d=None, m=None):
    """Read a stream CSV; d and m are inferred from the header when not
    given.  Raises CliError (exit 3) naming the offending line."""
    path = Path(path)
    if not path.exists():
        raise CliError(f"input file not found: {path}", EXIT_INPUT)
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise CliError(f"{path}: empty file", EXIT_INPUT)
    header = [c.strip() for c in lines[0].split(",")]
    inferred_d = sum(1 for c in header if c.startswith("x"))
    inferred_m = sum(1 for c in header if c.startswith("y"))
    if inferred_d + inferred_m != len(header) or inferred_d == 0 or inferred_m == 0:
        if d is None or m is None:
            raise CliError(
                f"{path}: header does not follow the x1..xd,y1..ym schema and "
                "--d/--m were not given", EXIT_CONFIG,
            )
    else:
        d = d or inferred_d
        m = m or inferred_m
    samples = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split(",")
        if len(fields) != d + m:
            raise CliError(
                f"{path}: line {lineno}: expected {d + m} fields, got {len(fields)}",
                EXIT_INPUT,
            )
        try:
            values = [float(v) for v in fields]
        except ValueError as exc:
            raise CliError(f"{path}: line {lineno}: {exc}", EXIT_INPUT)
        samples.append(Sample(x=np.array(values[:d]), y=np.array(values[d:])))
    return samples, d, m


# ------------------------------------------------------------- config file

def load_config_file(path):
    """Flat key=value file; '#' starts a comment.  Flags win over file
    values."""
    values = {}
    p = Path(path)
    if not p.exists():
        raise CliError(f"config file not found: {path}", EXIT_CONFIG)
    for lineno, line in enumerate(p.read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(f"{path}: line {lineno}: expected key=value", EXIT_CONFIG)
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def resolve(args, key, cast, default=None):
    """flag > config file > default."""
    flag_value = getattr(args, key, None)
    if flag_value is not None:
        return flag_value
    cfg = getattr(args, "_config_values", {})
    if key in cfg:
        try:
            return cast(cfg[key])
        except ValueError:
            raise CliError(f"config value for '{key}' is not valid: {cfg[key]}",
                           EXIT_CONFIG)
    return default


def build_hyperparams(args):
    try:
        return HyperParams(
            alpha=resolve(args, "alpha", float, 1.0),
            beta=resolve(args, "beta", float, 1.0),
            rho=resolve(args, "rho", float, 1.0),
            eta=resolve(args, "eta", float, 100.0),
            mu=resolve(args, "mu", float, 0.9),
            update_period=resolve(args, "update_period", int, 1),
        ).validate()
    except ConfigError as exc:
        raise CliError(f"invalid hyperparameters: {exc}", EXIT_CONFIG)


def make_learner(name, d, m, hp, args):
    if name == "mores":
        return MoresLearner(d, m, hp)
    if name == "somor":
        return SomorLearner(d, m, xi=resolve(args, "xi", float, 1.0))
    if name in ("pa1", "pa2"):
        return PaLearner(d, m, variant=name,
                         c=resolve(args, "pa_c", float, 1.0),
                         eps=resolve(args, "pa_eps", float, 0.0))
    raise CliError(f"unknown learner '{name}' (field: --learner)", EXIT_CONFIG)


def make_stream(args, seed):
    """Build the sample stream from --input or a generator spec.

    Returns (samples, d, m, p_ref or None)."""
    kind = getattr(args, "synth", None)
    if getattr(args, "input", None):
        samples, d, m = read_csv(args.input, getattr(args, "d", None),
                                 getattr(args, "m", None))
        return samples, d, m, None
    if kind is None:
        raise CliError("one of --input or --synth is required", EXIT_CONFIG)
    samples_n = resolve(args, "samples", int, 500)
    if samples_n < 1:
        raise CliError("--samples must be >= 1", EXIT_CONFIG)
    try:
        if kind == "correlated":
            cfg = datagen.SynthConfig(
                seed=seed, samples=samples_n,
                d_features=resolve(args, "d", int, 10),
                noise_std=resolve(args, "noise_std", float, 0.1),
            )
            samples, p_real = datagen.gen_correlated(cfg)
            return samples, cfg.d_features + 1, 3, p_real
        if kind == "linear":
            d = resolve(args, "d", int, 10)
            m = resolve(args, "m", int, 3)
            samples, p_real = datagen.gen_noiseless_linear(seed, samples_n, d, m)
            return samples, d, m, p_real
        if kind == "drifting":
            d = resolve(args, "d", int, 10)
            m = resolve(args, "m", int, 3)
            switch_at = resolve(args, "switch_at", int, samples_n // 2)
            samples, (p_a, p_b, _) = datagen.gen_drifting(
                seed, samples_n, d, m, switch_at)
            return samples, d, m, p_b
    except ConfigError as exc:
        raise CliError(str(exc), EXIT_CONFIG)
    raise CliError(f"unknown generator '{kind}' (field: --synth)", EXIT_CONFIG)


def pick_seed(args):
    seed = resolve(args, "seed", int, None)
    if seed is None:
        seed = secrets.randbits(32)
    return seed


# ------------------------------------------------------------- subcommands

def cmd_synth(args):
    seed = pick_seed(args)
    samples, d, m, p_real = make_stream(args, seed)
    if args.out is None:
        raise CliError("--out is required", EXIT_CONFIG)
    write_csv(args.out, samples)
    meta = {
        "seed": seed,
        "d": d,
        "m": m,
        "samples": len(samples),
        "generator": args.synth,
    }
    if p_real is not None:
        meta["p_real"] = np.asarray(p_real).tolist()
    sidecar = str(Path(args.out).with_suffix(".meta.json"))
    with open(sidecar, "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2)
    print(f"wrote {len(samples)} rows to {args.out} (+ {sidecar})")
    return EXIT_OK


def cmd_run(args):
    seed = pick_seed(args)
    hp = build_hyperparams(args)
    samples, d, m, p_real = make_stream(args, seed)
    learner_name = resolve(args, "learner", str, "mores")
    learner = make_learner(learner_name, d, m, hp, args)
    skip_first = resolve(args, "skip_first", int, 0)
    diag_every = resolve(args, "diag_every", int, 0)
    opts = harness.ReportOptions(
        diag_every=diag_every,
        p_ref=p_real if diag_every > 0 else None,
        skip_first=skip_first,
    )
    start = time.perf_counter()
    report = harness.prequential_run(learner, samples, opts)
    wall = time.perf_counter() - start
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            for record in report.records:
                fh.write(json.dumps(record) + "\n")
        summary_path = str(Path(args.out).with_suffix(".summary.json"))
        summary = {
            "per_output_mae": report.per_output_mae.tolist(),
            "average_mae": report.average_mae,
            "rounds": report.rounds,
            "wall_time_sec": wall,
            "seed": seed,
            "complete": report.complete,
            "config": {
                "learner": learner_name,
                "d": d, "m": m,
                "skip_first": skip_first,
                "hyperparams": hp.__dict__,
            },
        }
        if not report.complete:
            summary["error"] = report.error
        with open(summary_path, "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2)
        if args.plot:
            from .plotting import render_report_figures
            figures = render_report_figures(report.records, str(Path(args.out).with_suffix("")))
            for f in figures:
                print(f"wrote {f}")
        print(f"wrote {args.out} and {summary_path}")
    if not report.complete:
        raise CliError(f"numerical failure: {report.error}", EXIT_NUMERIC)
    print(f"average MAE: {report.average_mae:.6g} over {report.rounds} rounds")
    return EXIT_OK


def cmd_bench(args):
    hp = build_hyperparams(args)
    d = resolve(args, "d", int, 21)
    m = resolve(args, "m", int, 7)
    samples = resolve(args, "samples", int, 20000)
    if d < 1 or m < 1 or samples < 1:
        raise CliError("bench requires positive --d, --m, --samples", EXIT_CONFIG)
    result = harness.throughput_bench(d, m, samples, hp)
    result["note"] = "rates vary run to run by roughly +-20% on shared hardware"
    print(json.dumps(result, indent=2))
    return EXIT_OK


def parse_grid(specs):
    grid = {}
    allowed = set(HyperParams().__dict__)
    for spec in specs:
        if "=" not in spec:
            raise CliError(f"grid spec must look like name=v1,v2,... : {spec}",
                           EXIT_CONFIG)
        name, values = spec.split("=", 1)
        name = name.strip()
        if name not in allowed:
            raise CliError(f"unknown hyperparameter in grid: {name}", EXIT_CONFIG)
        try:
            cast = int if name == "update_period" else float
            grid[name] = [cast(v) for v in values.split(",") if v.strip()]
        except ValueError as exc:
            raise CliError(f"bad grid values for {name}: {exc}", EXIT_CONFIG)
        if not grid[name]:
            raise CliError(f"empty grid for {name}", EXIT_CONFIG)
    if not grid:
        raise CliError("at least one --grid spec is required", EXIT_CONFIG)
    return grid


def cmd_sweep(args):
    seed = pick_seed(args)
    hp = build_hyperparams(args)
    samples, d, m, _ = make_stream(args, seed)
    grid = parse_grid(args.grid)
    skip_first = resolve(args, "skip_first", int, 0)
    opts = harness.ReportOptions(skip_first=skip_first, keep_predictions=False)
    rows = harness.sweep(grid, samples, hp, d, m, opts)
    output = json.dumps({"seed": seed, "results": rows}, indent=2)
    if args.out:
        Path(args.out).write_text(output + "\n")
        print(f"wrote {args.out}")
    else:
        print(output)
    return EXIT_OK


# ------------------------------------------------------------------ parser

def add_common(p):
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--config", default=None,
                   help="flat key=value config file; flags win")


def add_stream_args(p):
    p.add_argument("--input", default=None, help="CSV stream (x1..xd,y1..ym header)")
    p.add_argument("--synth", default=None,
                   choices=["correlated", "linear", "drifting"],
                   help="generate the stream instead of reading a file")
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--noise-std", dest="noise_std", type=float, default=None)
    p.add_argument("--switch-at", dest="switch_at", type=int, default=None)


def add_hp_args(p):
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--mu", type=float, default=None)
    p.add_argument("--update-period", dest="update_period", type=int, default=None)
    p.add_argument("--xi", type=float, default=None, help="SOMOR slack bound")
    p.add_argument("--pa-c", dest="pa_c", type=float, default=None)
    p.add_argument("--pa-eps", dest="pa_eps", type=float, default=None)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mores",
        description="Streaming multiple-output regression with learned "
                    "coefficient-change and residual metrics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic stream CSV")
    add_common(p)
    add_stream_args(p)
    p.add_argument("--out", required=False, default=None)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("run", help="prequential evaluation of a learner")
    add_common(p)
    add_stream_args(p)
    add_hp_args(p)
    p.add_argument("--learner", default=None,
                   choices=["mores", "somor", "pa1", "pa2"])
    p.add_argument("--out", default=None, help="JSON-lines metrics output path")
    p.add_argument("--skip-first", dest="skip_first", type=int, default=None)
    p.add_argument("--diag-every", dest="diag_every", type=int, default=None)
    p.add_argument("--plot", action="store_true",
                   help="render figures next to the metrics output")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bench", help="throughput benchmark")
    add_common(p)
    add_hp_args(p)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--samples", type=int, default=None)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("sweep", help="hyperparameter grid sweep")
    add_common(p)
    add_stream_args(p)
    add_hp_args(p)
    p.add_argument("--grid", action="append", default=[],
                   help="name=v1,v2,... (repeatable)")
    p.add_argument("--skip-first", dest="skip_first", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args._config_values = (
            load_config_file(args.config) if getattr(args, "config", None) else {}
        )
        if args.command == "synth" and args.synth is None:
            args.synth = "correlated"
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except MoresError as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
