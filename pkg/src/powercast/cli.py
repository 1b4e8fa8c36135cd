"""Command-line pipeline: ingest -> eda -> train -> evaluate -> compare -> report.

Stages communicate only through files under the configured output directory,
so any stage can be deleted and re-run.  All writes are atomic
(write-temp-then-rename) and byte-deterministic for a fixed config and seed.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import tempfile
from datetime import datetime
from pathlib import Path

import numpy as np

from . import stats
from .checkpoint import load_checkpoint, save_checkpoint
from .config import ConfigError, ExperimentConfig, load_config
from .metrics import acf, format_metric_table
from .series import (
    DatasetManifest,
    SplitSpec,
    TimeSeries,
    clean,
    downsample,
    load_csv,
    split_holdout,
)
from .training import predict_holdout
from .tscv import evaluate_holdout_all, run_tscv

QUARTER_SECONDS = 90 * 86400
ACF_MAX_LAG = 100


def _r(x) -> str:
    """Shortest round-trip decimal for a float (plain Python repr)."""
    return repr(float(x))


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dataset_dir(config: ExperimentConfig, name: str) -> Path:
    return config.out_dir / name


def _selected(config: ExperimentConfig, only: str | None):
    if only is None:
        return list(config.datasets)
    return [config.dataset(only)]


def _selected_archs(config: ExperimentConfig, only: str | None):
    if only is None:
        return list(config.archs)
    if only not in config.archs:
        raise ConfigError(f"architecture {only!r} not in config archs {config.archs}")
    return [only]


def _write_series_csv(path, ts: TimeSeries) -> None:
    lines = ["index,timestamp,value"]
    stamps = _timestamps(ts)
    for i, v in enumerate(ts.values):
        lines.append(f"{i},{stamps[i]},{_r(v)}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def _timestamps(ts: TimeSeries):
    base = np.datetime64(ts.start, "s")
    return (base + np.arange(len(ts)) * np.timedelta64(ts.interval_s, "s")).astype(str)


def _load_ingested(config: ExperimentConfig, name: str):
    ddir = _dataset_dir(config, name)
    manifest_path = ddir / "manifest.json"
    series_path = ddir / "series.csv"
    if not manifest_path.exists() or not series_path.exists():
        raise FileNotFoundError(f"dataset {name!r} not ingested yet (run ingest first)")
    manifest = DatasetManifest.from_json(manifest_path.read_text(encoding="utf-8"))
    values = []
    with open(series_path, "r", encoding="utf-8") as fh:
        next(fh)
        for line in fh:
            values.append(float(line.rsplit(",", 1)[1]))
    ts = TimeSeries(
        start=datetime.fromisoformat(manifest.start),
        interval_s=manifest.interval_s,
        values=np.asarray(values),
        unit=manifest.unit,
    )
    if len(ts) != manifest.points:
        raise ValueError(f"series.csv for {name!r} has {len(ts)} points, manifest says {manifest.points}")
    return ts, manifest


# ---------------------------------------------------------------------------
# commands


def cmd_ingest(config: ExperimentConfig, only: str | None = None):
    errors = []
    for ds in _selected(config, only):
        try:
            raw = load_csv(ds.path, ds.schema, source_id=ds.name, unit=ds.unit)
            cleaned, fills = clean(raw)
            if ds.resample_interval_s is not None:
                interval = ds.resample_interval_s
            else:
                interval = int(
                    min(
                        (b - a).total_seconds()
                        for a, b in zip(cleaned.timestamps, cleaned.timestamps[1:])
                    )
                )
            ts = downsample(cleaned, interval)
            train_cv, holdout = split_holdout(ts, SplitSpec(ds.holdout_boundary))
            manifest = DatasetManifest(
                source_id=ds.name,
                unit=ds.unit,
                raw_rows=len(raw),
                fills=fills,
                gap_policy="ffill",
                interval_s=ts.interval_s,
                points=len(ts),
                start=ts.start.isoformat(),
                end=ts.end.isoformat(),
                holdout_boundary=ds.holdout_boundary.isoformat(),
                train_points=len(train_cv),
                holdout_points=len(holdout),
            )
            ddir = _dataset_dir(config, ds.name)
            atomic_write_text(ddir / "manifest.json", manifest.to_json())
            _write_series_csv(ddir / "series.csv", ts)
            print(
                f"[ingest] {ds.name}: {len(ts)} points @{ts.interval_s}s, "
                f"{fills} fills, train {len(train_cv)} / holdout {len(holdout)}"
            )
        except Exception as exc:  # noqa: BLE001 - per-dataset isolation
            errors.append({"dataset": ds.name, "error": str(exc)})
    return errors


def _quarter_summary(ts: TimeSeries) -> str | None:
    if (len(ts) - 1) * ts.interval_s < QUARTER_SECONDS:
        return None
    base = np.datetime64(ts.start, "s")
    stamps = base + np.arange(len(ts)) * np.timedelta64(ts.interval_s, "s")
    months = (stamps.astype("M8[M]") - stamps.astype("M8[Y]")).astype(int)  # 0..11
    quarters = months // 3 + 1
    lines = ["quarter,count,min,q1,median,q3,max"]
    for q in (1, 2, 3, 4):
        vals = ts.values[quarters == q]
        if vals.size == 0:
            continue
        q1, med, q3 = np.percentile(vals, [25, 50, 75])
        lines.append(
            f"{q},{vals.size},{_r(vals.min())},{_r(q1)},{_r(med)},{_r(q3)},{_r(vals.max())}"
        )
    return "\n".join(lines) + "\n"


def cmd_eda(config: ExperimentConfig, only: str | None = None):
    errors = []
    for ds in _selected(config, only):
        try:
            ts, _ = _load_ingested(config, ds.name)
            edir = _dataset_dir(config, ds.name) / "eda"

            stamps = _timestamps(ts)
            lines = ["timestamp,value"]
            lines.extend(f"{stamps[i]},{_r(v)}" for i, v in enumerate(ts.values))
            atomic_write_text(edir / "series.csv", "\n".join(lines) + "\n")

            boxplot = _quarter_summary(ts)
            if boxplot is None:
                atomic_write_text(
                    edir / "notes.txt",
                    "quarterly boxplot omitted: series spans less than one quarter\n",
                )
            else:
                atomic_write_text(edir / "quarterly_boxplot.csv", boxplot)

            max_lag = min(ACF_MAX_LAG, len(ts) - 1)
            result = acf(ts.values, max_lag)
            alines = ["lag,acf,significance_bound"]
            for lag, coeff in zip(result.lags, result.coefficients):
                alines.append(f"{lag},{_r(coeff)},{_r(result.significance_bound)}")
            atomic_write_text(edir / "acf.csv", "\n".join(alines) + "\n")
            print(f"[eda] {ds.name}: acf lags 0..{max_lag}, boxplot "
                  f"{'written' if boxplot else 'omitted (short series)'}")
        except Exception as exc:  # noqa: BLE001
            errors.append({"dataset": ds.name, "error": str(exc)})
    return errors


def _records_csv(records) -> str:
    lines = [
        "dataset,arch,fold,train_windows,wall_time_s,"
        "scaled_rmse,scaled_nrmse,scaled_mae,scaled_mape_pct,scaled_r2_pct"
    ]
    for r in records:
        m = r.fold_metrics
        lines.append(
            f"{r.dataset_id},{r.arch},{r.fold_id},{r.train_windows},{_r(r.wall_time_s)},"
            f"{_r(m.rmse)},{_r(m.nrmse)},{_r(m.mae)},{_r(m.mape_pct)},{_r(m.r2_pct)}"
        )
    return "\n".join(lines) + "\n"


def cmd_train(config: ExperimentConfig, only: str | None = None,
              only_arch: str | None = None, workers: int = 1):
    errors = []
    for ds in _selected(config, only):
        for arch in _selected_archs(config, only_arch):
            try:
                ts, manifest = _load_ingested(config, ds.name)
                ts_cv = ts.slice(0, manifest.train_points)
                records = run_tscv(ts_cv, arch, config.hyper, ds.name,
                                   k=config.k, workers=workers)
                mdir = _dataset_dir(config, ds.name) / "models" / arch
                for rec in records:
                    save_checkpoint(rec.model, mdir / f"fold_{rec.fold_id:02d}.json")
                    loss_lines = ["epoch,train_mse"]
                    loss_lines.extend(
                        f"{i + 1},{_r(loss)}" for i, loss in enumerate(rec.model.epoch_losses)
                    )
                    atomic_write_text(
                        mdir / f"loss_fold_{rec.fold_id:02d}.csv",
                        "\n".join(loss_lines) + "\n",
                    )
                atomic_write_text(
                    _dataset_dir(config, ds.name) / f"records_{arch}.csv",
                    _records_csv(records),
                )
                total = sum(r.wall_time_s for r in records)
                print(f"[train] {ds.name}/{arch}: {len(records)} folds in {total:.1f}s")
            except Exception as exc:  # noqa: BLE001
                errors.append({"dataset": ds.name, "arch": arch, "error": str(exc)})
    return errors


def _load_fold_models(config: ExperimentConfig, name: str, arch: str, k: int):
    mdir = _dataset_dir(config, name) / "models" / arch
    models = []
    for fold in range(1, k + 1):
        path = mdir / f"fold_{fold:02d}.json"
        if not path.exists():
            raise FileNotFoundError(f"missing checkpoint {path}")
        models.append(load_checkpoint(path))
    return models


def cmd_evaluate(config: ExperimentConfig, only: str | None = None,
                 only_arch: str | None = None, overlay_fold: int | None = None):
    errors = []
    for ds in _selected(config, only):
        for arch in _selected_archs(config, only_arch):
            try:
                ts, manifest = _load_ingested(config, ds.name)
                history = ts.slice(0, manifest.train_points)
                holdout = ts.slice(manifest.train_points, len(ts))
                models = _load_fold_models(config, ds.name, arch, config.k)
                reports = evaluate_holdout_all(models, holdout, history)
                ddir = _dataset_dir(config, ds.name)

                atomic_write_text(
                    ddir / f"holdout_{arch}.csv", format_metric_table(reports)
                )
                nlines = ["fold,nrmse"]
                nlines.extend(f"{i + 1},{_r(r.nrmse)}" for i, r in enumerate(reports))
                atomic_write_text(ddir / f"nrmse_{arch}.csv", "\n".join(nlines) + "\n")

                # overlay for one "typical" model: median NRMSE unless a fold is forced
                if overlay_fold is None:
                    nrmses = np.array([r.nrmse for r in reports])
                    fold_ix = int(np.argsort(nrmses)[len(nrmses) // 2])
                else:
                    if not 1 <= overlay_fold <= len(models):
                        raise ValueError(f"overlay fold {overlay_fold} out of range")
                    fold_ix = overlay_fold - 1
                preds = predict_holdout(models[fold_ix], ts.values, manifest.train_points)
                stamps = _timestamps(holdout)
                olines = [f"timestamp,actual,predicted_fold{fold_ix + 1}"]
                olines.extend(
                    f"{stamps[i]},{_r(holdout.values[i])},{_r(preds[i])}"
                    for i in range(len(holdout))
                )
                atomic_write_text(ddir / f"overlay_{arch}.csv", "\n".join(olines) + "\n")
                avg = float(np.mean([r.nrmse for r in reports]))
                print(f"[evaluate] {ds.name}/{arch}: avg holdout NRMSE {avg:.4f}")
            except Exception as exc:  # noqa: BLE001
                errors.append({"dataset": ds.name, "arch": arch, "error": str(exc)})
    return errors


def _read_nrmse(config: ExperimentConfig, name: str, arch: str):
    path = _dataset_dir(config, name) / f"nrmse_{arch}.csv"
    if not path.exists():
        raise FileNotFoundError(f"missing evaluation output {path}")
    rows = path.read_text(encoding="utf-8").strip().splitlines()[1:]
    return [float(r.split(",")[1]) for r in rows]


def cmd_compare(config: ExperimentConfig, per_fold_blocks: bool = False):
    if len(config.datasets) < 2:
        return [{"error": f"comparison needs N >= 2 datasets, config has {len(config.datasets)}"}]
    missing = []
    rows = []
    labels = []
    for ds in config.datasets:
        per_arch = {}
        for arch in config.archs:
            try:
                per_arch[arch] = _read_nrmse(config, ds.name, arch)
            except FileNotFoundError as exc:
                missing.append({"dataset": ds.name, "arch": arch, "error": str(exc)})
        if len(per_arch) != len(config.archs):
            continue
        if per_fold_blocks:
            n_folds = min(len(v) for v in per_arch.values())
            for fold in range(n_folds):
                labels.append(f"{ds.name}:fold{fold + 1}")
                rows.append([per_arch[arch][fold] for arch in config.archs])
        else:
            labels.append(ds.name)
            rows.append([float(np.mean(per_arch[arch])) for arch in config.archs])
    if missing:
        return missing
    matrix = stats.make_score_matrix(np.array(rows), labels, config.archs)
    result = stats.compare_models(matrix, alpha=config.alpha)
    cdir = config.out_dir / "compare"
    atomic_write_text(cdir / "score_matrix.csv", stats.format_score_matrix(matrix))
    atomic_write_text(cdir / "comparison.csv", stats.format_comparison(result))
    print(
        f"[compare] N={matrix.scores.shape[0]} blocks, chi2={result.chi2:.4f}, "
        f"p={result.p_friedman:.4f}, CD={result.critical_difference:.4f}"
    )
    return []


def _read_summary_row(path: Path, row_name: str):
    lines = path.read_text(encoding="utf-8").strip().splitlines()
    header = lines[0].split(",")
    for line in lines[1:]:
        cells = line.split(",")
        if cells[0] == row_name:
            return dict(zip(header[1:], [float(c) for c in cells[1:]]))
    raise ValueError(f"no {row_name!r} row in {path}")


def cmd_report(config: ExperimentConfig):
    errors = []
    consolidated = ["dataset,arch,avg_nrmse,avg_r2_pct"]
    timing = ["dataset,arch,hours"]
    have_any = False
    notes = []
    for ds in config.datasets:
        for arch in config.archs:
            ddir = _dataset_dir(config, ds.name)
            holdout_path = ddir / f"holdout_{arch}.csv"
            records_path = ddir / f"records_{arch}.csv"
            if not holdout_path.exists() or not records_path.exists():
                notes.append(f"skipped {ds.name}/{arch}: missing evaluation or training outputs")
                continue
            try:
                avg = _read_summary_row(holdout_path, "Average")
                consolidated.append(
                    f"{ds.name},{arch},{_r(avg['nrmse'])},{_r(avg['r2_pct'])}"
                )
                rows = records_path.read_text(encoding="utf-8").strip().splitlines()[1:]
                total_s = sum(float(r.split(",")[4]) for r in rows)
                timing.append(f"{ds.name},{arch},{total_s / 3600.0:.2f}")
                have_any = True
            except Exception as exc:  # noqa: BLE001
                errors.append({"dataset": ds.name, "arch": arch, "error": str(exc)})
    rdir = config.out_dir / "report"
    if not have_any and not errors:
        atomic_write_text(rdir / "notes.txt", "nothing to report: no evaluated datasets found\n")
        print("[report] nothing to report")
        return errors
    atomic_write_text(rdir / "consolidated.csv", "\n".join(consolidated) + "\n")
    atomic_write_text(rdir / "timing.csv", "\n".join(timing) + "\n")
    if notes:
        atomic_write_text(rdir / "notes.txt", "\n".join(notes) + "\n")
    print(f"[report] consolidated {len(consolidated) - 1} rows")
    return errors


# ---------------------------------------------------------------------------
# argument parsing


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="powercast",
        description="Univariate load forecasting experiments: LSTM vs BLSTM.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="experiment config JSON")
        p.add_argument("--dataset", help="restrict to one dataset by name")
        p.add_argument("--arch", help="restrict to one architecture (LSTM or BLSTM)")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--workers", type=int, default=1, help="fold-level parallelism")
        p.add_argument("--out", help="override the output directory")
        return p

    common(sub.add_parser("ingest", help="load, clean, resample and split datasets"))
    common(sub.add_parser("eda", help="emit series, quarterly boxplot and ACF plot data"))
    common(sub.add_parser("train", help="expanding-window CV training per dataset/arch"))
    ev = common(sub.add_parser("evaluate", help="holdout metrics for every fold model"))
    ev.add_argument("--overlay-fold", type=int, help="fold used for the prediction overlay")
    cp = common(sub.add_parser("compare", help="Friedman/Nemenyi comparison across datasets"))
    cp.add_argument("--per-fold-blocks", action="store_true",
                    help="use one block per (dataset, fold) instead of averaged NRMSE")
    common(sub.add_parser("report", help="consolidated metric and timing tables"))
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        if args.seed is not None:
            config = dataclasses.replace(
                config, seed=args.seed, hyper=config.hyper.with_seed(args.seed)
            )
        if args.out:
            config = dataclasses.replace(config, out_dir=Path(args.out).resolve())
        if args.dataset:
            config.dataset(args.dataset)  # fail fast on unknown names
    except ConfigError as exc:
        json.dump({"command": args.command, "errors": [{"error": str(exc)}]}, sys.stderr)
        sys.stderr.write("\n")
        return 2

    if args.command == "ingest":
        errors = cmd_ingest(config, args.dataset)
    elif args.command == "eda":
        errors = cmd_eda(config, args.dataset)
    elif args.command == "train":
        errors = cmd_train(config, args.dataset, args.arch, workers=args.workers)
    elif args.command == "evaluate":
        errors = cmd_evaluate(config, args.dataset, args.arch,
                              overlay_fold=args.overlay_fold)
    elif args.command == "compare":
        errors = cmd_compare(config, per_fold_blocks=args.per_fold_blocks)
    elif args.command == "report":
        errors = cmd_report(config)
    else:  # pragma: no cover - argparse enforces the choices
        raise AssertionError(args.command)

    if errors:
        json.dump({"command": args.command, "errors": errors}, sys.stderr)
        sys.stderr.write("\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
