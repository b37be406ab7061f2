"""Command line front end: simulate, detect, evaluate, bench-fdr.

Data CSVs have one row per time index and one column per series, with an
optional header row of series names. All indices in files and reports are
1-based. Exit codes: 0 success, 2 validation error, 3 data error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from . import __version__
from .baseline_tv import extract_change_points, tv_denoise
from .calibration import ALPHA_MAX
from .core import TimeSeriesMatrix
from .evaluate import fdr_experiment, match_with_tolerance, precision, recall
from .gibbs_multi import (
    ConfigurationSet,
    MultiSamplerConfig,
    run_multi,
    summarize_P,
)
from .gibbs_uni import UniSamplerConfig, run as run_uni
from .reports import (
    DetectionReport,
    RunManifest,
    canonical_json,
    sha256_of_file,
)
from .simulate import (
    PiecewiseSpec,
    dependent_preset,
    gen_piecewise,
    multi_step_spec,
    single_step_spec,
)

SEED_ENV_VAR = "BERNOULLI_DETECTOR_SEED"


class ValidationError(Exception):
    exit_code = 2


class DataError(Exception):
    exit_code = 3


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ValidationError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}")


def _read_data_csv(path) -> TimeSeriesMatrix:
    try:
        with open(path, newline="") as handle:
            raw = [row for row in csv.reader(handle) if any(c.strip() for c in row)]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}")
    if not raw:
        raise DataError(f"{path} holds no data rows")

    def parse(row, row_number):
        values = []
        for col, cell in enumerate(row, start=1):
            try:
                values.append(float(cell))
            except ValueError:
                raise DataError(
                    f"{path}: cannot parse {cell.strip()!r} at row {row_number}, "
                    f"column {col}"
                )
        return values

    header = None
    body = raw
    start_row = 1
    try:
        [float(c) for c in raw[0]]
    except ValueError:
        header = [c.strip() for c in raw[0]]
        body = raw[1:]
        start_row = 2
        if len(set(header)) != len(header):
            raise DataError(f"{path}: duplicate series names in the header")
    if not body:
        raise DataError(f"{path} holds a header but no data rows")
    width = len(body[0])
    rows = []
    for offset, row in enumerate(body):
        if len(row) != width:
            raise DataError(
                f"{path}: row {start_row + offset} has {len(row)} columns, "
                f"expected {width}"
            )
        rows.append(parse(row, start_row + offset))
    values = np.asarray(rows, dtype=float).T  # file rows are time points
    if not np.isfinite(values).all():
        bad = np.argwhere(~np.isfinite(values))[0]
        raise DataError(
            f"{path}: non-finite value in series {bad[0] + 1} at time {bad[1] + 1}"
        )
    try:
        return TimeSeriesMatrix(
            values=values, series_names=tuple(header) if header else ()
        )
    except ValueError as exc:
        raise DataError(f"{path}: {exc}")


def _write_data_csv(handle, data: TimeSeriesMatrix):
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(data.series_names)
    for t in range(data.n_points):
        writer.writerow([repr(float(v)) for v in data.values[:, t]])


def _emit(text: str, out_path):
    if out_path:
        with open(out_path, "w") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


# --- detect -----------------------------------------------------------


def _validate_alpha(alpha: float):
    if not 0.0 < alpha < ALPHA_MAX:
        raise ValidationError(
            f"alpha must lie in (0, 1/e) ~ (0, {ALPHA_MAX:.6f}), got {alpha}"
        )


def _detect(args) -> int:
    if args.method != "tv":
        _validate_alpha(args.alpha)
    data = _read_data_csv(args.input)
    seed = args.seed
    parameters = {
        "method": args.method,
        "alpha": args.alpha,
        "iterations": args.iterations,
        "burn_in": args.burn_in,
        "lambda": args.lam,
        "threshold": args.threshold,
        "configs": sha256_of_file(args.configs) if args.configs else None,
        "sample_probs": args.sample_probs,
    }
    manifest = RunManifest(
        command="detect",
        parameters=parameters,
        seed=seed,
        input_sha256=sha256_of_file(args.input),
        version=__version__,
    )

    change_points: dict[str, list[int]] = {}
    marginal: dict[str, list[float]] = {}
    p_summary = None
    map_score = None

    if args.method in ("bd-uni-pseudo", "bd-uni-blocked"):
        variant = "pseudo" if args.method == "bd-uni-pseudo" else "blocked"
        root = np.random.SeedSequence(seed)
        map_score = 0.0
        for j, name in enumerate(data.series_names):
            child = np.random.SeedSequence(entropy=root.entropy, spawn_key=(j,))
            cfg = UniSamplerConfig(
                alpha=args.alpha,
                iterations=args.iterations,
                seed=child,
                variant=variant,
                burn_in=args.burn_in,
            )
            trace = run_uni(data.values[j], cfg)
            change_points[name] = [i + 1 for i in trace.best.indicator.change_points]
            marginal[name] = [float(v) for v in trace.marginal]
            map_score += trace.best.log_score
    elif args.method == "bd-multi":
        if args.configs:
            try:
                with open(args.configs) as handle:
                    configs = ConfigurationSet.from_strings(handle)
            except OSError as exc:
                raise DataError(f"cannot read {args.configs}: {exc}")
            except ValueError as exc:
                raise ValidationError(f"{args.configs}: {exc}")
            if configs.n_series != data.n_series:
                raise ValidationError(
                    f"configuration strings are {configs.n_series} bits long but "
                    f"the data has {data.n_series} series"
                )
        else:
            try:
                configs = ConfigurationSet.full(data.n_series)
            except ValueError as exc:
                raise ValidationError(str(exc))
        cfg = MultiSamplerConfig(
            alpha=args.alpha,
            iterations=args.iterations,
            seed=seed,
            sample_probs=args.sample_probs,
            burn_in=args.burn_in,
        )
        trace = run_multi(data, cfg, configs)
        for j, name in enumerate(data.series_names):
            row = trace.best.indicators.rows[j]
            change_points[name] = [i + 1 for i in row.change_points]
            marginal[name] = [float(v) for v in trace.marginal[j]]
        map_score = trace.best.log_score
        if args.sample_probs:
            summary = summarize_P(trace, configs)
            p_summary = {
                "labels": list(summary.labels),
                "median": summary.median,
                "lower_quartile": summary.lower_quartile,
                "upper_quartile": summary.upper_quartile,
            }
    else:  # tv
        if args.lam < 0:
            raise ValidationError("lambda must be >= 0")
        if args.threshold <= 0:
            raise ValidationError("threshold must be positive")
        for j, name in enumerate(data.series_names):
            sol = tv_denoise(data.values[j], args.lam)
            cps = extract_change_points(sol, args.threshold)
            change_points[name] = [i + 1 for i in cps]
            flags = np.zeros(data.n_points)
            flags[list(cps)] = 1.0
            flags[0] = flags[-1] = 1.0
            marginal[name] = [float(v) for v in flags]

    report = DetectionReport(
        method=args.method,
        series_names=data.series_names,
        n_points=data.n_points,
        change_points=change_points,
        marginal_probability=marginal,
        map_log_score=map_score,
        manifest=manifest,
        p_config_summary=p_summary,
    )
    _emit(report.to_json(), args.out)
    if args.csv:
        with open(args.csv, "w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(["series", "time", "marginal_probability", "is_change_point"])
            for name in data.series_names:
                cps = set(change_points[name])
                for t in range(1, data.n_points + 1):
                    writer.writerow(
                        [name, t, repr(marginal[name][t - 1]), int(t in cps)]
                    )
    return 0


# --- simulate ---------------------------------------------------------

_PRESET_SNR_DEFAULT = {"single-step": 5.0, "multi-step": 5.0, "dependent": 0.0}


def _scenario_from_file(path) -> dict:
    try:
        with open(path) as handle:
            scenario = json.load(handle)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}")
    if not isinstance(scenario, dict) or "kind" not in scenario:
        raise ValidationError(f"{path}: scenario must be an object with a 'kind'")
    return scenario


def _piecewise_from_scenario(scenario: dict) -> PiecewiseSpec:
    try:
        return PiecewiseSpec(
            n=int(scenario["n"]),
            boundaries=tuple(int(b) - 1 for b in scenario.get("boundaries", ())),
            means=tuple(float(m) for m in scenario["means"]),
            sigma=float(scenario["sigma"]),
            noise=scenario.get("noise", "gaussian"),
            nu=float(scenario.get("nu", 3.0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"invalid scenario: {exc}")


def _simulate(args) -> int:
    seed = args.seed
    input_digest = None
    if args.scenario:
        scenario = _scenario_from_file(args.scenario)
        input_digest = sha256_of_file(args.scenario)
        kind = scenario["kind"]
        if kind == "piecewise":
            spec = _piecewise_from_scenario(scenario)
            x = gen_piecewise(spec, seed)
            data = TimeSeriesMatrix.from_series(x)
            truth = {"series_1": [b + 1 for b in spec.boundaries]}
        elif kind == "dependent":
            from .simulate import DependencyStructure, gen_dependent

            try:
                structure = DependencyStructure.from_source_weights(
                    scenario["source_weights"]
                )
                data, indicators = gen_dependent(
                    tuple(int(b) - 1 for b in scenario["boundaries"]),
                    structure,
                    float(scenario["delta_mu"]),
                    float(scenario["sigma"]),
                    seed,
                    n=int(scenario["n"]),
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise ValidationError(f"invalid scenario: {exc}")
            truth = {
                name: [i + 1 for i in row.change_points]
                for name, row in zip(data.series_names, indicators.rows)
            }
        else:
            raise ValidationError(f"unknown scenario kind {kind!r}")
        preset = None
    else:
        preset = args.preset or "single-step"
        snr = args.snr if args.snr is not None else _PRESET_SNR_DEFAULT[preset]
        if args.noise == "student" and preset != "single-step":
            raise ValidationError(
                "student noise is only available for the single-step preset"
            )
        if preset == "single-step":
            spec = single_step_spec(snr, noise=args.noise, nu=args.nu)
            x = gen_piecewise(spec, seed)
            data = TimeSeriesMatrix.from_series(x)
            truth = {"series_1": [b + 1 for b in spec.boundaries]}
        elif preset == "multi-step":
            spec = multi_step_spec(snr)
            x = gen_piecewise(spec, seed)
            data = TimeSeriesMatrix.from_series(x)
            truth = {"series_1": [b + 1 for b in spec.boundaries]}
        else:
            data, indicators = dependent_preset(snr_db=snr, seed=seed)
            truth = {
                name: [i + 1 for i in row.change_points]
                for name, row in zip(data.series_names, indicators.rows)
            }

    manifest = RunManifest(
        command="simulate",
        parameters={
            "preset": preset,
            "scenario": input_digest,
            "snr": args.snr,
            "noise": args.noise,
            "nu": args.nu,
        },
        seed=seed,
        input_sha256=input_digest,
        version=__version__,
    )

    buffer = io.StringIO()
    _write_data_csv(buffer, data)
    _emit(buffer.getvalue(), args.out)

    truth_path = args.truth_out
    if truth_path is None and args.out:
        truth_path = args.out + ".truth.json"
    if truth_path:
        payload = {
            "manifest": manifest.to_dict(),
            "n_points": data.n_points,
            "series_names": list(data.series_names),
            "change_points": truth,
        }
        with open(truth_path, "w") as handle:
            handle.write(canonical_json(payload))
    return 0


# --- evaluate ---------------------------------------------------------


def _load_json(path, what: str) -> dict:
    try:
        with open(path) as handle:
            return json.load(handle)
    except OSError as exc:
        raise DataError(f"cannot read {what} {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise DataError(f"{what} {path} is not valid JSON: {exc}")


def _evaluate(args) -> int:
    truth_doc = _load_json(args.truth, "truth file")
    report_doc = _load_json(args.report, "report file")
    for doc, path in ((truth_doc, args.truth), (report_doc, args.report)):
        if "change_points" not in doc:
            raise DataError(f"{path} lacks a change_points table")
    truth_cps = truth_doc["change_points"]
    report_cps = report_doc["change_points"]
    if set(truth_cps) != set(report_cps):
        raise DataError(
            f"series mismatch: truth has {sorted(truth_cps)}, "
            f"report has {sorted(report_cps)}"
        )
    n_truth = truth_doc.get("n_points")
    n_report = report_doc.get("n_points")
    if n_truth is not None and n_report is not None and n_truth != n_report:
        raise DataError(f"length mismatch: truth n={n_truth}, report n={n_report}")

    tolerances = args.tolerance or [0]
    results = []
    for t in tolerances:
        per_series = {}
        pooled_tp = pooled_fp = pooled_fn = 0
        for name in sorted(truth_cps):
            m = match_with_tolerance(
                sorted(truth_cps[name]), sorted(report_cps[name]), t
            )
            per_series[name] = {
                "tp": m.tp,
                "fp": m.fp,
                "fn": m.fn,
                "recall": recall(m),
                "precision": precision(m),
            }
            pooled_tp += m.tp
            pooled_fp += m.fp
            pooled_fn += m.fn
        pooled = {
            "tp": pooled_tp,
            "fp": pooled_fp,
            "fn": pooled_fn,
            "recall": pooled_tp / (pooled_tp + pooled_fn)
            if pooled_tp + pooled_fn
            else 1.0,
            "precision": pooled_tp / (pooled_tp + pooled_fp)
            if pooled_tp + pooled_fp
            else 1.0,
        }
        results.append({"tolerance": t, "per_series": per_series, "pooled": pooled})

    manifest = RunManifest(
        command="evaluate",
        parameters={"tolerances": list(tolerances)},
        seed=None,
        input_sha256=sha256_of_file(args.report),
        version=__version__,
    )
    payload = {"manifest": manifest.to_dict(), "results": results}
    _emit(canonical_json(payload), args.out)
    return 0


# --- bench-fdr --------------------------------------------------------


def _bench_fdr(args) -> int:
    for alpha in args.alphas:
        _validate_alpha(alpha)
    if args.replicates < 1 or args.iterations < 1:
        raise ValidationError("replicates and iterations must be >= 1")
    if args.scenario:
        scenario_doc = _scenario_from_file(args.scenario)
        if scenario_doc.get("kind") != "piecewise":
            raise ValidationError("bench-fdr needs a piecewise scenario")
        spec = _piecewise_from_scenario(scenario_doc)
    else:
        snr = args.snr if args.snr is not None else 5.0
        spec = multi_step_spec(snr)
    points = fdr_experiment(
        spec,
        alphas=args.alphas,
        replicates=args.replicates,
        iterations=args.iterations,
        tolerances=tuple(args.tolerances),
        seed=args.seed,
        jobs=args.jobs,
    )
    manifest = RunManifest(
        command="bench-fdr",
        parameters={
            "alphas": list(args.alphas),
            "replicates": args.replicates,
            "iterations": args.iterations,
            "tolerances": list(args.tolerances),
            "jobs": args.jobs,
        },
        seed=args.seed,
        input_sha256=sha256_of_file(args.scenario) if args.scenario else None,
        version=__version__,
    )
    lines = ["# manifest: " + canonical_json(manifest.to_dict())]
    lines.append("alpha,tolerance,fdr_mean,fdr_std,replicates")
    for p in points:
        lines.append(
            f"{p.alpha!r},{p.tolerance},{p.fdr_mean!r},{p.fdr_std!r},{p.replicates}"
        )
    _emit("\n".join(lines) + "\n", args.out)
    return 0


# --- parser -----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bernoulli-detector",
        description="Rank-test based Bayesian change-point detection.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    detect = sub.add_parser("detect", help="detect change-points in a CSV")
    detect.add_argument("input", help="data CSV (rows = time, columns = series)")
    detect.add_argument(
        "--method",
        choices=("bd-uni-pseudo", "bd-uni-blocked", "bd-multi", "tv"),
        default="bd-uni-pseudo",
    )
    detect.add_argument("--alpha", type=float, default=0.01)
    detect.add_argument("--iterations", type=int, default=None)
    detect.add_argument("--burn-in", type=int, default=0)
    detect.add_argument("--seed", type=int, default=None)
    detect.add_argument("--configs", help="admissible configurations, one per line")
    detect.add_argument(
        "--sample-probs",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="draw configuration probabilities (bd-multi only)",
    )
    detect.add_argument("--lambda", dest="lam", type=float, default=22.3)
    detect.add_argument("--threshold", type=float, default=1e-10)
    detect.add_argument("--out", help="write the JSON report here instead of stdout")
    detect.add_argument("--csv", help="also write a flattened CSV export")
    detect.set_defaults(func=_detect)

    simulate = sub.add_parser("simulate", help="generate benchmark data")
    simulate.add_argument(
        "--preset", choices=("single-step", "multi-step", "dependent")
    )
    simulate.add_argument("--scenario", help="JSON scenario file")
    simulate.add_argument("--snr", type=float, default=None, help="SNR in dB")
    simulate.add_argument("--noise", choices=("gaussian", "student"), default="gaussian")
    simulate.add_argument("--nu", type=float, default=3.0)
    simulate.add_argument("--seed", type=int, default=None)
    simulate.add_argument("--out", help="data CSV path (default stdout)")
    simulate.add_argument("--truth-out", help="ground-truth JSON path")
    simulate.set_defaults(func=_simulate)

    evaluate = sub.add_parser("evaluate", help="score a report against ground truth")
    evaluate.add_argument("truth", help="truth JSON from simulate")
    evaluate.add_argument("report", help="detection report JSON")
    evaluate.add_argument(
        "--tolerance", type=int, action="append",
        help="position tolerance; repeatable (default 0)",
    )
    evaluate.add_argument("--out")
    evaluate.set_defaults(func=_evaluate)

    bench = sub.add_parser("bench-fdr", help="FDR versus acceptance level")
    bench.add_argument(
        "--alphas", type=float, nargs="+", default=[0.001, 0.01, 0.05, 0.1]
    )
    bench.add_argument("--replicates", type=int, default=30)
    bench.add_argument("--iterations", type=int, default=500)
    bench.add_argument("--tolerances", type=int, nargs="+", default=[0, 1, 5])
    bench.add_argument("--snr", type=float, default=None)
    bench.add_argument("--scenario", help="piecewise JSON scenario file")
    bench.add_argument("--seed", type=int, default=None)
    bench.add_argument("--jobs", type=int, default=1)
    bench.add_argument("--out")
    bench.set_defaults(func=_bench_fdr)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if hasattr(args, "seed") and args.seed is None:
            args.seed = _default_seed()
        if getattr(args, "iterations", "set") is None:
            args.iterations = 2000 if args.method == "bd-multi" else 1000
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
