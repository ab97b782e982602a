"""Command-line interface.

Subcommands: ampute, impute, reduce, evaluate, plot-strip, plot-density.
Exit codes: 0 success, 1 usage error, 2 data error, 3 I/O error.  Every
run writes a structured JSON report next to its outputs.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .encode import WeightingScheme
from .errors import DataError
from .forest import ForestParams
from .impute import ImputeParams, missforest_impute, nrmse, pfc
from .ingest import (
    AmputationConfig,
    CsvOptions,
    ampute_mcar,
    read_csv,
    read_schema,
    write_csv,
    write_schema,
)
from .pca import PcaModel, reduce as reduce_pipeline
from .plots import render_density, render_stripplot
from .table import MixedTable

THREADS_ENV_VAR = "MIXEDREDUCE_THREADS"


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; this CLI reserves 2 for
    data errors and uses 1 for usage."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_csv_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--delimiter", default=",", help="field delimiter (default ,)")
    p.add_argument(
        "--na-token",
        action="append",
        dest="na_tokens",
        metavar="TOKEN",
        help="text treated as missing; repeatable (default: NA and empty)",
    )
    p.add_argument(
        "--no-header", action="store_true", help="input files have no header row"
    )
    p.add_argument("--schema", type=Path, help="schema sidecar file pinning column types")


def _add_forest_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--trees", type=int, default=100, help="trees per forest (default 100)")
    p.add_argument("--mtry", type=int, help="features tried per split (default sqrt)")
    p.add_argument(
        "--max-iter", type=int, default=10, help="imputation sweep cap (default 10)"
    )
    p.add_argument("--threads", type=int, help="worker threads for forest fitting")


def _csv_options(args: argparse.Namespace) -> CsvOptions:
    tokens = tuple(args.na_tokens) if args.na_tokens else ("NA", "")
    return CsvOptions(
        delimiter=args.delimiter, na_tokens=tokens, has_header=not args.no_header
    )


def _impute_params(args: argparse.Namespace) -> ImputeParams:
    forest = ForestParams(n_trees=args.trees, mtry=args.mtry, seed=args.seed)
    return ImputeParams(forest=forest, max_iterations=args.max_iter, seed=args.seed)


def _threads(args: argparse.Namespace) -> int:
    # Default is single-threaded: tree growth is interpreter-bound, so
    # extra threads only help on tables large enough for the numpy work
    # to dominate.  Results are identical at any thread count.
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get(THREADS_ENV_VAR)
    if env:
        return max(1, int(env))
    return 1


def _load_table(args: argparse.Namespace, path: Path) -> MixedTable:
    options = _csv_options(args)
    schema = read_schema(args.schema) if args.schema else None
    return read_csv(path, options, schema)


def _out_dir(args: argparse.Namespace) -> Path:
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_report(path: Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_mask(mask: np.ndarray, names: list[str], path: Path, options: CsvOptions) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, delimiter=options.delimiter)
        if options.has_header:
            writer.writerow(names)
        for row in mask.astype(int):
            writer.writerow(row.tolist())


def _read_mask(path: Path, options: CsvOptions) -> np.ndarray:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh, delimiter=options.delimiter))
    if options.has_header:
        rows = rows[1:]
    try:
        values = np.array([[int(cell) for cell in row] for row in rows], dtype=np.int64)
    except ValueError as exc:
        raise DataError(f"{path}: mask cells must be 0 or 1 ({exc})") from None
    if values.size and not np.isin(values, (0, 1)).all():
        raise DataError(f"{path}: mask cells must be 0 or 1")
    return values.astype(bool)


def _write_scores(scores: np.ndarray, path: Path, options: CsvOptions) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, delimiter=options.delimiter)
        if options.has_header:
            writer.writerow([f"PC{i + 1}" for i in range(scores.shape[1])])
        for row in scores:
            writer.writerow([repr(float(v)) for v in row])


def _write_model(model: PcaModel, path: Path) -> None:
    def fmt(v: float) -> str:
        return format(v, ".17g")

    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"components {model.n_components}\n")
        fh.write(f"columns {model.center.shape[0]}\n")
        fh.write("sdev " + " ".join(fmt(v) for v in model.sdev) + "\n")
        fh.write("center " + " ".join(fmt(v) for v in model.center) + "\n")
        fh.write("proportion " + " ".join(fmt(v) for v in model.proportion) + "\n")
        fh.write("rotation\n")
        for row in model.rotation:
            fh.write(" ".join(fmt(v) for v in row) + "\n")


def _strip_series(
    table: MixedTable, holes: np.ndarray, max_vars: int
) -> tuple[dict[str, np.ndarray], dict[str, np.ndarray]]:
    """Observed/imputed value series for the quantitative variables with
    the most imputed cells (descending count, ties by column order)."""
    counts = []
    for j, spec in enumerate(table.specs):
        if spec.is_quantitative and holes[:, j].any():
            counts.append((-int(holes[:, j].sum()), j))
    counts.sort()
    observed: dict[str, np.ndarray] = {}
    imputed: dict[str, np.ndarray] = {}
    for _, j in counts[:max_vars]:
        name = table.specs[j].name
        observed[name] = table.column_data(j)[~holes[:, j]]
        imputed[name] = table.column_data(j)[holes[:, j]]
    return observed, imputed


def _density_series(
    table: MixedTable, holes: np.ndarray
) -> tuple[str, np.ndarray, np.ndarray] | None:
    """The most-imputed quantitative variable whose observed and imputed
    series can both carry a density estimate."""
    counts = []
    for j, spec in enumerate(table.specs):
        if spec.is_quantitative and holes[:, j].any():
            counts.append((-int(holes[:, j].sum()), j))
    counts.sort()
    for _, j in counts:
        obs = table.column_data(j)[~holes[:, j]]
        imp = table.column_data(j)[holes[:, j]]
        if obs.size >= 2 and imp.size >= 2 and obs.min() < obs.max() and imp.min() < imp.max():
            return table.specs[j].name, obs, imp
    return None


def _cmd_ampute(args: argparse.Namespace) -> int:
    options = _csv_options(args)
    table = _load_table(args, args.input)
    amputed, introduced = ampute_mcar(table, AmputationConfig(args.rate, args.seed))
    out = _out_dir(args)
    write_csv(amputed, out / "amputed.csv", options)
    _write_mask(introduced, [s.name for s in table.specs], out / "introduced_mask.csv", options)
    write_schema(table.specs, out / "schema.csv")
    _write_report(
        out / "report.json",
        {
            "command": "ampute",
            "input": str(args.input),
            "rate": args.rate,
            "seed": args.seed,
            "introduced_cells": int(introduced.sum()),
            "shape": {"rows": table.n_rows, "columns": table.n_cols},
            "outputs": ["amputed.csv", "introduced_mask.csv", "schema.csv"],
        },
    )
    return 0


def _cmd_impute(args: argparse.Namespace) -> int:
    options = _csv_options(args)
    table = _load_table(args, args.input)
    result = missforest_impute(table, _impute_params(args), threads=_threads(args))
    out = _out_dir(args)
    write_csv(result.imputed, out / "imputed.csv", options)
    write_schema(result.imputed.specs, out / "schema.csv")
    _write_report(
        out / "report.json",
        {
            "command": "impute",
            "input": str(args.input),
            "seed": args.seed,
            "imputation": result.digest(),
            "shape": {"rows": table.n_rows, "columns": table.n_cols},
            "outputs": ["imputed.csv", "schema.csv"],
        },
    )
    return 0


def _cmd_reduce(args: argparse.Namespace) -> int:
    options = _csv_options(args)
    table = _load_table(args, args.input)
    introduced = None
    if args.rate is not None:
        table, introduced = ampute_mcar(table, AmputationConfig(args.rate, args.seed))
    holes = table.mask.copy()

    scheme = WeightingScheme(args.weighting)
    scores, model, report, imputation = reduce_pipeline(
        table,
        impute_params=_impute_params(args),
        scheme=scheme,
        threshold=args.threshold,
        round_enabled=not args.no_round,
        threads=_threads(args),
    )

    out = _out_dir(args)
    _write_scores(scores, out / "scores.csv", options)
    write_csv(imputation.imputed, out / "imputed.csv", options)
    _write_model(model, out / "model.txt")

    outputs = ["scores.csv", "imputed.csv", "model.txt"]
    if holes.any():
        observed, imputed_vals = _strip_series(imputation.imputed, holes, args.strip_vars)
        if observed:
            render_stripplot(observed, imputed_vals, out / "strip.svg", seed=args.seed)
            outputs.append("strip.svg")
        density = _density_series(imputation.imputed, holes)
        if density is not None:
            _, obs, imp = density
            render_density(obs, imp, out / "density.svg")
            outputs.append("density.svg")

    n, p, q = report.input_shape
    _write_report(
        out / "report.json",
        {
            "command": "reduce",
            "input": str(args.input),
            "seed": args.seed,
            "rate": args.rate,
            "threshold": report.threshold,
            "weighting": scheme.value,
            "rounded": not args.no_round,
            "selected_components": report.selected_components,
            "cumulative_at_selected": report.cumulative_at_selected,
            "total_components": model.n_components,
            "elapsed_seconds": report.elapsed_seconds,
            "shape": {"rows": n, "columns": p, "encoded_columns": q},
            "imputation": report.imputation_summary,
            "outputs": outputs,
        },
    )
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    options = _csv_options(args)
    schema = read_schema(args.schema) if args.schema else None
    truth = read_csv(args.truth, options, schema)
    imputed = read_csv(args.imputed, options, schema)
    holes = _read_mask(args.mask, options)

    quant_holes = 0
    cat_holes = 0
    for j, spec in enumerate(truth.specs):
        count = int(holes[:, j].sum()) if holes.size else 0
        if spec.is_quantitative:
            quant_holes += count
        else:
            cat_holes += count

    metrics = {
        "nrmse": nrmse(truth, imputed, holes) if quant_holes else None,
        "pfc": pfc(truth, imputed, holes),
        "quantitative_holes": quant_holes,
        "categorical_holes": cat_holes,
    }
    out = _out_dir(args)
    _write_report(out / "metrics.json", metrics)
    print(json.dumps(metrics, indent=2, sort_keys=True))
    return 0


def _cmd_plot_strip(args: argparse.Namespace) -> int:
    options = _csv_options(args)
    table = _load_table(args, args.input)
    holes = _read_mask(args.mask, options)
    if holes.shape != (table.n_rows, table.n_cols):
        raise DataError("mask shape does not match the table")
    observed, imputed = _strip_series(table, holes, args.vars)
    if not observed:
        raise DataError("no quantitative variables with imputed cells to plot")
    render_stripplot(observed, imputed, args.out, seed=args.seed)
    return 0


def _cmd_plot_density(args: argparse.Namespace) -> int:
    options = _csv_options(args)
    table = _load_table(args, args.input)
    holes = _read_mask(args.mask, options)
    if holes.shape != (table.n_rows, table.n_cols):
        raise DataError("mask shape does not match the table")
    if args.var is not None:
        names = [s.name for s in table.specs]
        if args.var not in names:
            raise DataError(f"unknown variable {args.var!r}")
        j = names.index(args.var)
        if not table.specs[j].is_quantitative:
            raise DataError(f"variable {args.var!r} is not quantitative")
        obs = table.column_data(j)[~holes[:, j]]
        imp = table.column_data(j)[holes[:, j]]
    else:
        found = _density_series(table, holes)
        if found is None:
            raise DataError("no quantitative variable has enough imputed values to plot")
        _, obs, imp = found
    render_density(obs, imp, args.out, bandwidth=args.bandwidth)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mixedreduce", description=__doc__)
    parser.add_argument("--version", action="version", version=f"mixedreduce {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ampute", help="mask a fraction of observed cells at random")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--output-dir", type=Path, required=True)
    p.add_argument("--rate", type=float, required=True, help="fraction of cells to mask")
    p.add_argument("--seed", type=int, default=0)
    _add_csv_flags(p)
    p.set_defaults(func=_cmd_ampute)

    p = sub.add_parser("impute", help="fill missing cells by iterative forest imputation")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--output-dir", type=Path, required=True)
    p.add_argument("--seed", type=int, default=0)
    _add_forest_flags(p)
    _add_csv_flags(p)
    p.set_defaults(func=_cmd_impute)

    p = sub.add_parser("reduce", help="impute, encode and project onto principal components")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--output-dir", type=Path, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rate", type=float, help="optionally mask this fraction first")
    p.add_argument(
        "--threshold", type=float, default=0.9, help="cumulative variance target (default 0.9)"
    )
    p.add_argument(
        "--weighting", choices=[s.value for s in WeightingScheme], default="famd"
    )
    p.add_argument("--no-round", action="store_true", help="skip 3-decimal rounding")
    p.add_argument(
        "--strip-vars", type=int, default=8, help="variables in the strip plot (default 8)"
    )
    _add_forest_flags(p)
    _add_csv_flags(p)
    p.set_defaults(func=_cmd_reduce)

    p = sub.add_parser("evaluate", help="score an imputation against the ground truth")
    p.add_argument("--truth", type=Path, required=True)
    p.add_argument("--imputed", type=Path, required=True)
    p.add_argument("--mask", type=Path, required=True, help="mask of evaluated holes")
    p.add_argument("--output-dir", type=Path, required=True)
    _add_csv_flags(p)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("plot-strip", help="strip plot of observed vs imputed points")
    p.add_argument("--input", type=Path, required=True, help="imputed CSV")
    p.add_argument("--mask", type=Path, required=True, help="mask of imputed cells")
    p.add_argument("--out", type=Path, required=True, help="output SVG path")
    p.add_argument("--vars", type=int, default=8, help="number of variables (default 8)")
    p.add_argument("--seed", type=int, default=0)
    _add_csv_flags(p)
    p.set_defaults(func=_cmd_plot_strip)

    p = sub.add_parser("plot-density", help="density overlay of observed vs imputed values")
    p.add_argument("--input", type=Path, required=True, help="imputed CSV")
    p.add_argument("--mask", type=Path, required=True, help="mask of imputed cells")
    p.add_argument("--out", type=Path, required=True, help="output SVG path")
    p.add_argument("--var", help="variable to plot (default: most imputed)")
    p.add_argument("--bandwidth", type=float, help="kernel bandwidth override")
    _add_csv_flags(p)
    p.set_defaults(func=_cmd_plot_density)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else int(exc.code)
    try:
        return args.func(args)
    except (DataError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
