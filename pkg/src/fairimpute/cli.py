"""Command-line entry point: ``fairimpute <subcommand> ...``.

Exit codes: 0 success, 1 configuration or input error, 2 runtime failure with a
partial report written.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

import numpy as np

from .amputation import ampute, mask_dataset, mechanism
from .data import DataError, Schema, load_csv, normalize_columns, write_csv
from .harness.benchmark import run_imputation_benchmark, run_prediction_benchmark
from .harness.config import ConfigError, coerce_value, load_config
from .harness.report import emit_report
from .harness.synthetic import SyntheticSpec, generate_synthetic
from .imputers import IMPUTERS, impute, imputer_parameters

log = logging.getLogger("fairimpute")

EXIT_OK, EXIT_INPUT, EXIT_RUNTIME = 0, 1, 2


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", type=Path, default=default, help="experiment config file")
    parser.add_argument("--seed", type=int, default=default, help="master seed (unsigned 64-bit)")
    parser.add_argument("--reps", type=int, default=default, help="number of repeats")
    parser.add_argument("--out", type=Path, default=default, help="output directory or file")
    parser.add_argument("--format", choices=("csv", "md"), default=default, help="report format")


def _schema_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--sensitive", action="append", default=[],
                        help="sensitive column name (repeatable, primary first)")
    parser.add_argument("--majority", action="append", default=[],
                        help="majority label for each --sensitive, in the same order")
    parser.add_argument("--response", help="response column name")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fairimpute", description=__doc__.splitlines()[0])
    _global_flags(parser, suppress=False)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic dataset as csv")
    _global_flags(p, suppress=True)
    defaults = SyntheticSpec()
    for f in dataclasses.fields(SyntheticSpec):
        if f.name == "seed":
            continue
        p.add_argument(f"--{f.name.replace('_', '-')}", type=type(getattr(defaults, f.name)),
                       default=None)

    p = sub.add_parser("ampute", help="hide entries of a csv under a mechanism")
    _global_flags(p, suppress=True)
    p.add_argument("--input", type=Path, required=True)
    _schema_flags(p)
    p.add_argument("--mechanism", required=True, help="label 1a..3d or mcar(p)")
    p.add_argument("--L", type=int, default=5, dest="L")
    p.add_argument("--no-normalize", action="store_true", help="ampute raw values")

    p = sub.add_parser("impute", help="complete a masked csv")
    _global_flags(p, suppress=True)
    p.add_argument("--input", type=Path, required=True, help="masked csv with NA cells")
    p.add_argument("--mask", type=Path, required=True, help="0/1 mask csv (1 = observed)")
    _schema_flags(p)
    p.add_argument("--method", choices=sorted(IMPUTERS), required=True)
    p.add_argument("--param", action="append", default=[], help="hyperparameter key=value")
    p.add_argument("--no-sensitive", action="store_true", help="do not use sensitive columns as predictors")

    for name, helptext in (("bench-impute", "imputation fairness benchmark"),
                           ("bench-predict", "prediction fairness benchmark")):
        p = sub.add_parser(name, help=helptext)
        _global_flags(p, suppress=True)
    return parser


def _schema(args) -> Schema:
    return Schema(args.sensitive, args.majority, args.response)


def _out_file(out, default_name: str) -> Path:
    out = Path(out) if out is not None else Path(".")
    return out if out.suffix else out / default_name


def cmd_synth(args) -> int:
    spec = SyntheticSpec()
    if args.config is not None:
        cfg = load_config(args.config)
        if cfg.synthetic is None:
            raise ConfigError("config has no [synthetic] section")
        spec = cfg.synthetic
    overrides = {f.name: getattr(args, f.name) for f in dataclasses.fields(SyntheticSpec)
                 if f.name != "seed" and getattr(args, f.name, None) is not None}
    if args.seed is not None:
        overrides["seed"] = args.seed
    spec = dataclasses.replace(spec, **overrides)
    ds = generate_synthetic(spec)
    path = _out_file(args.out, "synthetic.csv")
    write_csv(path, ds.column_names, ds.values)
    print(path)
    return EXIT_OK


def cmd_ampute(args) -> int:
    ds = load_csv(args.input, _schema(args))
    if not args.no_normalize:
        ds = normalize_columns(ds)
    spec = mechanism(args.mechanism, args.L)
    md = ampute(ds, spec, np.random.default_rng(args.seed or 0))
    out = Path(args.out) if args.out is not None else Path(".")
    write_csv(out / "masked.csv", ds.column_names, md.observed)
    write_csv(out / "mask.csv", ds.column_names, md.mask, fmt="%d")
    print(out / "masked.csv")
    print(out / "mask.csv")
    return EXIT_OK


def _parse_params(method: str, pairs) -> dict:
    defaults = imputer_parameters(method)
    params = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or key not in defaults:
            raise ConfigError(f"bad --param {pair!r}; {method} accepts {sorted(defaults)}")
        params[key] = coerce_value(value, defaults[key])
    return params


def cmd_impute(args) -> int:
    template, observed, token_mask = load_csv(args.input, _schema(args), missing_token="NA")
    mask_ds = load_csv(args.mask)
    mask = mask_ds.values.astype(np.int8)
    if mask.shape != observed.shape or not np.isin(mask, (0, 1)).all():
        raise DataError("mask file must be a 0/1 matrix with the same shape as the input")
    if not np.array_equal(mask, token_mask):
        raise DataError("mask file disagrees with the NA cells of the input")
    md = mask_dataset(template, mask)
    params = _parse_params(args.method, args.param)
    completed = impute(md, args.method, params, np.random.default_rng(args.seed or 0),
                       use_sensitive=not args.no_sensitive)
    path = _out_file(args.out, "completed.csv")
    write_csv(path, template.column_names, completed.values)
    print(path)
    return EXIT_OK


def cmd_bench(args, predict: bool) -> int:
    if args.config is None:
        raise ConfigError("--config is required")
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.master_seed = args.seed
    if args.reps is not None:
        cfg.repeats = args.reps
    if args.out is not None:
        cfg.out = args.out
    if args.format is not None:
        cfg.format = args.format
    cfg.validate()
    if predict:
        report = run_prediction_benchmark(cfg)
        stem = "predict_report"
    else:
        report = run_imputation_benchmark(cfg)
        stem = "impute_report"
    path = emit_report(report, cfg.format, Path(cfg.out) / f"{stem}.{cfg.format}")
    print(path)
    if report.has_failures:
        log.error("some cells failed; see rows marked ':failed' in %s", path)
        return EXIT_RUNTIME
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "synth":
            return cmd_synth(args)
        if args.command == "ampute":
            return cmd_ampute(args)
        if args.command == "impute":
            return cmd_impute(args)
        return cmd_bench(args, predict=args.command == "bench-predict")
    except (ConfigError, DataError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
