"""Command-line interface.

Exit codes: 0 success, 2 configuration error, 3 data error (parse, sizing,
shape), 4 numerical failure, 5 file/IO error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .artifact import ModelArtifact
from .dataio import read_error_matrix, read_series, write_series, write_table
from .errors import ArtifactError, ConfigError, DataError, StlfError
from .evalstat import (
    friedman_test, nemenyi_cd, nemenyi_pairwise, rank_diagram, rank_models,
)
from .ewt import build_filter_bank, decompose, detect_boundaries, reconstruct
from .pipeline import MODELS, RunConfig, forecast_rolling, metric_dict, run_training, series_digest
from .series import describe
from .synthetic import synthetic_load
from .tuning import summarize

REPORT_SCHEMA = "stlf.report/1"
COMPARISON_SCHEMA = "stlf.comparison/1"


def _dump_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, allow_nan=True)
        fh.write("\n")


def _outdir(path) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ArtifactError(f"cannot create output directory {out}: {exc.strerror}") from None
    return out


def _load(args):
    return read_series(args.input, value_col=args.value_col, time_col=args.time_col)


def _add_input(p):
    p.add_argument("input", help="CSV file with a header row")
    p.add_argument("--value-col", help="load column (default: the only non-time column)")
    p.add_argument("--time-col", help="timestamp column (optional)")


# describe -------------------------------------------------------------------

def cmd_describe(args) -> int:
    stats = describe(_load(args)).as_dict()
    for key, val in stats.items():
        print(f"{key:>9}  {val:.4f}")
    if args.output:
        out = _outdir(args.output)
        _dump_json(out / "describe.json", stats)
        write_table(out / "describe.csv", list(stats), [list(stats.values())])
    return 0


# decompose ------------------------------------------------------------------

def cmd_decompose(args) -> int:
    series = _load(args)
    x = series.values
    origin = len(x) if args.origin is None else args.origin
    window_w = min(args.window, origin)
    if origin > len(x) or origin < 2:
        raise ConfigError(f"origin {origin} outside [2, {len(x)}]")
    window = x[origin - window_w:origin]
    gamma = args.gamma if args.gamma is not None else "auto"
    bounds = detect_boundaries(window, args.num_components)
    bank = build_filter_bank(bounds, gamma, args.grid_size)
    comps = decompose(window, bank)
    out = _outdir(args.output)
    index = np.arange(origin - window_w, origin)
    for k, comp in enumerate(comps.sub_series):
        write_table(out / f"component_{k}.csv", ["index", "value"], zip(index, comp))
    write_table(out / "window.csv", ["index", "value"], zip(index, window))
    write_table(out / "reconstruction.csv", ["index", "value"], zip(index, reconstruct(comps)))
    bank.to_csv(out / "filter_bank.csv")
    _dump_json(out / "boundaries.json", {
        "origin": origin, "window_w": window_w, "omegas": bounds.omegas.tolist(),
        "fallback": bounds.fallback, "gamma": bank.gamma,
    })
    if args.figures:
        from . import plots
        plots.components_figure(out / "components.png", window, comps.sub_series)
        plots.filter_bank_figure(out / "filter_bank.png", bank.grid, bank._sampled)
    print(f"wrote {len(comps)} components for window [{origin - window_w}, {origin}) to {out}")
    return 0


# train ----------------------------------------------------------------------

RUN_FLAGS = {
    # flag dest -> RunConfig field
    "input": "input", "value_col": "value_col", "time_col": "time_col",
    "order": "order", "window": "window_w", "num_components": "num_components",
    "include_raw": "include_raw", "drop_highest_band": "drop_highest_band",
    "freeze_boundaries": "freeze_boundaries", "layers": "num_layers",
    "nodes": "node_grid", "lambdas": "lambda_grid", "activations": "activations",
    "weight_scale": "weight_scale", "use_bias": "use_bias",
    "train_fraction": "train_fraction", "valid_fraction": "valid_fraction",
    "test_fraction": "test_fraction", "models": "models", "seed": "seed",
    "output": "output", "figures": "figures", "jobs": "n_jobs",
}


# settings that do not influence any reported number stay out of report.json
RUN_LOCAL = ("output", "n_jobs", "figures")


def resolve_run_config(args) -> RunConfig:
    data = {}
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ArtifactError(f"cannot read config {args.config}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {args.config} is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
    for dest, key in RUN_FLAGS.items():
        value = getattr(args, dest, None)
        if value is not None:
            data[key] = value
    try:
        return RunConfig.from_dict(data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def _report_text(report: dict) -> str:
    lines = [f"stlf {report['versions']['stlf']} training report",
             f"input: {report['input']['path']} ({report['input']['length']} points)",
             "split: train {n_train} / valid {n_valid} / test {n_test}".format(**report["split"]),
             "", f"{'model':<15} {'RMSE':>10} {'MASE':>8} {'MAPE':>9}"]
    for name, entry in report["models"].items():
        m = entry["metrics"]["test"]
        lines.append(f"{name:<15} {m['rmse']:>10.4f} {m['mase']:>8.4f} {m['mape']:>9.5f}")
    return "\n".join(lines) + "\n"


def cmd_train(args) -> int:
    run = resolve_run_config(args)
    if args.print_config:
        print(json.dumps(run.as_dict(), indent=2, sort_keys=True))
        return 0
    if run.input is None:
        raise ConfigError("no input series given")
    series = read_series(run.input, value_col=run.value_col, time_col=run.time_col)
    out = _outdir(run.output)
    started = time.perf_counter()
    prep, results = run_training(series, run)
    elapsed = time.perf_counter() - started

    report = {
        "schema": REPORT_SCHEMA,
        "versions": {"stlf": __version__, "numpy": np.__version__},
        "input": {"path": str(run.input), "length": len(series), "sha256": series_digest(series)},
        "config": {k: v for k, v in run.as_dict().items() if k not in RUN_LOCAL},
        "split": {"n_train": prep.n_train, "n_valid": prep.n_valid, "n_test": prep.n_test},
        "normalization": {"x_min": prep.params.x_min, "x_max": prep.params.x_max},
        "models": {},
    }
    timings = {"total_seconds": elapsed, "tuning_seconds": {}}
    text_extra = []
    for res in results:
        model_dir = _outdir(out / res.name)
        res.artifact.save(model_dir / "model.json")
        fc_name = f"forecasts_{res.name}.csv"
        ts = series.timestamps
        layer_cols = [] if res.per_layer is None else [f"layer_{i + 1}" for i in range(len(res.per_layer))]
        rows = []
        for j, t in enumerate(res.index):
            row = [int(t), "" if ts is None else ts[t].isoformat(sep=" "),
                   str(prep.segment(t)), res.fit_label[j], res.actual[j], res.forecast[j]]
            if res.per_layer is not None:
                row += list(res.per_layer[:, j])
            rows.append(row)
        write_table(out / fc_name,
                    ["index", "timestamp", "split", "fit", "actual", "forecast"] + layer_cols, rows)
        entry = {
            "artifact": f"{res.name}/model.json",
            "forecast_csv": fc_name,
            "metrics": metric_dict(res.metrics),
            "per_layer_test_rmse": res.per_layer_test_rmse,
            "feature_dim": len(res.artifact.feature_layout),
        }
        if res.artifact.model is not None:
            entry["config"] = res.artifact.model.config.as_dict()
        if res.trace is not None:
            entry["tuning"] = res.trace.as_dict(timing=False)
            res.trace.to_csv(out / f"tuning_{res.name}.csv")
            timings["tuning_seconds"][res.name] = res.trace.seconds
            text_extra.append(f"{res.name}\n{summarize(res.trace)}")
        report["models"][res.name] = entry

    _dump_json(out / "report.json", report)
    (out / "report.txt").write_text(_report_text(report) + "\n" + "\n".join(text_extra) + "\n")
    _dump_json(out / "timings.json", timings)
    if run.figures:
        from . import plots
        test = {r.name: r for r in results}
        first = results[0]
        sel = prep.segment(first.index) == "test"
        curves = {}
        for name, r in test.items():
            s = prep.segment(r.index) == "test"
            curves[name] = r.forecast[s]
        plots.forecast_figure(out / "forecasts.png", first.index[sel], first.actual[sel], curves)
    print(_report_text(report), end="")
    return 0


# forecast -------------------------------------------------------------------

def cmd_forecast(args) -> int:
    artifact = ModelArtifact.load(args.model)
    series = _load(args)
    start = artifact.min_history if args.start is None else args.start
    horizon = len(series) - start if args.horizon is None else args.horizon
    fc = forecast_rolling(artifact, series, start, horizon)
    rows = []
    for j, t in enumerate(range(start, start + horizon)):
        actual = series.values[t] if t < len(series) else ""
        rows.append([t, actual, fc[j]])
    if args.output == "-":
        print("index,actual,forecast")
        for r in rows:
            print(",".join(repr(float(v)) if isinstance(v, (float, np.floating)) else str(v) for v in r))
    else:
        write_table(args.output, ["index", "actual", "forecast"], rows)
        print(f"wrote {horizon} forecasts to {args.output}")
    return 0


# compare --------------------------------------------------------------------

def _matrix_from_reports(paths, metric):
    per_dataset = []
    for p in paths:
        try:
            with open(p) as fh:
                rep = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ArtifactError(f"cannot read report {p}: {exc}") from None
        try:
            # report.json stores models under sorted keys; the run order lives in the config
            order = rep.get("config", {}).get("models") or sorted(rep["models"])
            row = {m: rep["models"][m]["metrics"]["test"][metric] for m in order}
        except (KeyError, TypeError) as exc:
            raise DataError(f"report {p} lacks test {metric} for a model: {exc}") from None
        per_dataset.append((str(p), row))
    models = list(per_dataset[0][1])
    for name, row in per_dataset:
        if list(row) != models:
            raise DataError(f"report {name} covers models {list(row)}, expected {models}")
    errors = np.array([[row[m] for _, row in per_dataset] for m in models])
    return errors, models, [name for name, _ in per_dataset]


def cmd_compare(args) -> int:
    if bool(args.matrix) == bool(args.reports):
        raise ConfigError("give exactly one of --matrix or --reports")
    if args.matrix:
        errors, models, datasets = read_error_matrix(args.matrix)
    else:
        errors, models, datasets = _matrix_from_reports(args.reports, args.metric)
    table = rank_models(errors, models, datasets)
    chi2, p = friedman_test(table)
    cd = nemenyi_cd(table.k_models, table.n_datasets, args.alpha)
    pair = nemenyi_pairwise(table)
    out = _outdir(args.output)

    write_table(out / "ranks.csv", ["dataset"] + list(models),
                [[d] + list(table.ranks[:, j]) for j, d in enumerate(datasets)])
    write_table(out / "avg_ranks.csv", ["model", "avg_rank"], zip(models, table.avg_ranks))
    write_table(out / "pairwise.csv", [""] + list(models),
                [[m] + [float(round(v, 3)) for v in pair.p_values[i]] for i, m in enumerate(models)])
    write_table(out / "pairwise_raw.csv", [""] + list(models),
                [[m] + list(pair.raw[i]) for i, m in enumerate(models)])
    diagram = rank_diagram(table, cd)
    (out / "rank_diagram.txt").write_text(diagram + "\n")
    _dump_json(out / "comparison.json", {
        "schema": COMPARISON_SCHEMA, "models": list(models), "datasets": list(datasets),
        "avg_ranks": table.avg_ranks.tolist(), "friedman_chi2": chi2, "friedman_p": p,
        "alpha": args.alpha, "critical_distance": cd,
        "pairwise_p": pair.p_values.tolist(), "pairwise_p_raw": pair.raw.tolist(),
    })
    if args.figures:
        from . import plots
        plots.rank_figure(out / "rank_diagram.png", models, table.avg_ranks, cd)
    print(diagram)
    print(f"\nFriedman chi2 = {chi2:.4f}, p = {p:.3e} (k={table.k_models}, N={table.n_datasets})")
    print(f"Nemenyi critical distance (alpha={args.alpha}) = {cd:.4f}")
    return 0


# synth ----------------------------------------------------------------------

def cmd_synth(args) -> int:
    series = synthetic_load(args.n, seed=args.seed, noise=args.noise)
    write_series(args.output, series)
    print(f"wrote {len(series)} synthetic points to {args.output}")
    return 0


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text):
    return [int(v) for v in text.split(",") if v.strip()]


def _names(text):
    return [v.strip() for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stlf", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"stlf {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("describe", help="descriptive statistics of a series")
    _add_input(p)
    p.add_argument("--output", help="directory for describe.csv/json")
    p.set_defaults(func=cmd_describe)

    p = sub.add_parser("decompose", help="EWT of one window, one CSV per component")
    _add_input(p)
    p.add_argument("--origin", type=int, help="window end (exclusive); default: end of series")
    p.add_argument("--window", type=int, default=336)
    p.add_argument("--num-components", type=int, default=2)
    p.add_argument("--gamma", type=float, help="transition ratio (default: half the admissible bound)")
    p.add_argument("--grid-size", type=int, default=4096)
    p.add_argument("--output", required=True)
    p.add_argument("--no-figures", dest="figures", action="store_false")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("train", help="tune, fit and evaluate models on one series")
    p.add_argument("input", nargs="?", help="CSV file with a header row")
    p.add_argument("--config", help="JSON file of run settings; flags override it")
    p.add_argument("--print-config", action="store_true", help="print the resolved settings and exit")
    p.add_argument("--value-col")
    p.add_argument("--time-col")
    p.add_argument("--models", type=_names, help=f"comma list from {','.join(MODELS)}")
    p.add_argument("--order", type=int)
    p.add_argument("--window", type=int)
    p.add_argument("--num-components", type=int)
    p.add_argument("--include-raw", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--drop-highest-band", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--freeze-boundaries", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--layers", type=int)
    p.add_argument("--nodes", type=_ints, help="node grid, e.g. 50,100,150,200")
    p.add_argument("--lambdas", type=_floats, help="lambda grid, e.g. 0,0.00390625,0.0625")
    p.add_argument("--activations", type=_names)
    p.add_argument("--weight-scale", type=float)
    p.add_argument("--use-bias", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--train-fraction", type=float)
    p.add_argument("--valid-fraction", type=float)
    p.add_argument("--test-fraction", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int)
    p.add_argument("--output")
    p.add_argument("--figures", action=argparse.BooleanOptionalAction, default=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("forecast", help="rolling one-step forecasts from a saved model")
    p.add_argument("--model", required=True, help="model.json written by train")
    _add_input(p)
    p.add_argument("--start", type=int, help="first forecast origin (default: earliest possible)")
    p.add_argument("--horizon", type=int, help="number of origins (default: to the end of the series)")
    p.add_argument("--output", default="-", help="CSV path or - for stdout")
    p.set_defaults(func=cmd_forecast)

    p = sub.add_parser("compare", help="Friedman / Nemenyi comparison of models over datasets")
    p.add_argument("--matrix", help="CSV: dataset column then one error column per model")
    p.add_argument("--reports", nargs="+", help="report.json files, one per dataset")
    p.add_argument("--metric", default="rmse", choices=("rmse", "mase", "mape"))
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--output", required=True)
    p.add_argument("--no-figures", dest="figures", action="store_false")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("synth", help="write a seeded synthetic half-hourly load series")
    p.add_argument("--n", type=int, default=1490)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise", type=float, default=0.05)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except StlfError as exc:
        print(f"stlf {args.command}: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"stlf {args.command}: error: {exc}", file=sys.stderr)
        return ArtifactError.exit_code


if __name__ == "__main__":
    sys.exit(main())
