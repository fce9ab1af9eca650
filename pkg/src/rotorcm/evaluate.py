"""Metrics, feature throughput, the sweep orchestrator, and report output.

A sweep walks the grid {aggregation interval x reduction mode x model},
sharing one stratified split per interval so model comparisons are
paired, and records classification metrics next to the feature
throughput (features per second) of each configuration.
"""

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from rotorcm import features as feat
from rotorcm import models as mdl
from rotorcm import reduce as red

N_CLASSES = 7

# Published per-interval transmitted feature counts, injectable so
# throughput arithmetic is reproduced exactly regardless of the
# extractor's own feature counts.
PUBLISHED_FEATURE_COUNTS = {
    200: 9320,
    400: 15476,
    800: 27788,
    1200: 40100,
    1600: 52412,
    4000: 126284,
    8000: 249404,
}

STFT_PCA_COMPONENTS = (10, 15, 20)
ALL_PCA_COMPONENTS = (2, 5, 10, 15, 20)

CSV_COLUMNS = (
    "model", "n_samples", "interval_s", "mode", "components", "feature_count",
    "throughput", "acc", "prec", "rec", "f1", "seed", "status",
)


class MetricError(ValueError):
    pass


def confusion_matrix(y_true, y_pred, n_classes: int = N_CLASSES) -> np.ndarray:
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    for t, p in zip(np.asarray(y_true, dtype=np.int64), np.asarray(y_pred, dtype=np.int64)):
        cm[t, p] += 1
    return cm


def compute_metrics(cm: np.ndarray) -> tuple[float, float, float, float]:
    """(accuracy, macro precision, macro recall, macro F1).

    Classes absent from both truth and prediction are excluded from the
    macro averages; per-class 0/0 ratios are defined as 0.
    """
    cm = np.asarray(cm, dtype=np.int64)
    total = cm.sum()
    if total == 0:
        raise MetricError("empty confusion matrix")
    acc = float(np.trace(cm) / total)
    tp = np.diag(cm).astype(np.float64)
    row = cm.sum(axis=1).astype(np.float64)
    col = cm.sum(axis=0).astype(np.float64)
    present = (row + col) > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        prec = np.where(col > 0, tp / col, 0.0)
        rec = np.where(row > 0, tp / row, 0.0)
        f1 = np.where(prec + rec > 0, 2 * prec * rec / (prec + rec), 0.0)
    return (
        acc,
        float(prec[present].mean()),
        float(rec[present].mean()),
        float(f1[present].mean()),
    )


def feature_throughput(feature_count: float, interval_s: float) -> float:
    """Features communicated per second for one aggregation interval."""
    if interval_s <= 0:
        raise MetricError(f"interval_s must be positive, got {interval_s}")
    return feature_count / interval_s


def throughput_reduction(best_no_pca: float, candidate: float) -> float:
    """Percentage reduction of candidate throughput vs the no-PCA baseline."""
    return 100.0 * (1.0 - candidate / best_no_pca)


@dataclass
class SweepRecord:
    model: str
    n_samples: int
    interval_s: float
    mode: str
    components: int | None
    feature_count: float
    throughput: float
    acc: float
    prec: float
    rec: float
    f1: float
    seed: int
    status: str = "ok"


def grid_modes(mode_name: str) -> list[red.ReductionMode]:
    if mode_name == "none":
        return [red.ReductionMode("none")]
    if mode_name == "stft-pca":
        return [red.ReductionMode("stft", k) for k in STFT_PCA_COMPONENTS]
    if mode_name == "all-pca":
        return [red.ReductionMode("all", k) for k in ALL_PCA_COMPONENTS]
    raise MetricError(f"unknown sweep mode {mode_name!r}")


def _transmitted_count(mode: red.ReductionMode, out_dim: int, n: int, paper_arithmetic: bool) -> int:
    if not paper_arithmetic:
        return out_dim
    if mode.kind == "none":
        return PUBLISHED_FEATURE_COUNTS[n]
    if mode.kind == "stft":
        return mode.k + red.NON_STFT_LEN
    return mode.k


def run_sweep(
    trials,
    intervals,
    modes: list[red.ReductionMode],
    model_names,
    seed: int = 42,
    sample_rate_hz: float = 800.0,
    paper_arithmetic: bool = False,
    split_by_trial: bool = False,
    stft_params: feat.StftParams = feat.StftParams(),
    jobs: int = 1,
) -> list[SweepRecord]:
    """Evaluate every (interval, mode, model) cell of the grid.

    All cells at one interval share the same stratified split.  Per-cell
    failures are recorded in the record's status and never abort the sweep.
    """
    records: list[SweepRecord] = []
    for n in sorted(intervals):
        interval_s = n / sample_rate_hz
        try:
            windows = feat.campaign_windows(trials, n)
            X, y, trial_ids, window_indices, stft_len = feat.extract_matrix(
                windows, stft_params, sample_rate_hz
            )
            ds = mdl.Dataset(X, y, trial_ids, window_indices)
            splitter = mdl.stratified_split_by_trial if split_by_trial else mdl.stratified_split
            train, test = splitter(ds, 0.3, seed)
        except Exception as exc:  # noqa: BLE001 - recorded, not fatal
            for mode in modes:
                for name in sorted(model_names):
                    records.append(_failed_record(name, n, interval_s, mode, seed, exc))
            continue

        for mode in modes:
            # One reducer per (interval, mode), shared by all models.
            try:
                reducer = red.fit_reducer(train.X, stft_len, mode)
                tr_X = reducer.transform(train.X)
                te_X = reducer.transform(test.X)
            except Exception as exc:  # noqa: BLE001
                for name in sorted(model_names):
                    records.append(_failed_record(name, n, interval_s, mode, seed, exc))
                continue

            def run_cell(name):
                try:
                    model = mdl.make_model(name, seed).fit(tr_X, train.y)
                    cm = confusion_matrix(test.y, model.predict(te_X))
                    acc, prec, rec, f1 = compute_metrics(cm)
                    count = _transmitted_count(mode, reducer.out_dim, n, paper_arithmetic)
                    return SweepRecord(
                        model=name, n_samples=n, interval_s=interval_s, mode=mode.kind,
                        components=mode.k, feature_count=float(count),
                        throughput=feature_throughput(count, interval_s),
                        acc=acc, prec=prec, rec=rec, f1=f1, seed=seed,
                    )
                except Exception as exc:  # noqa: BLE001
                    return _failed_record(name, n, interval_s, mode, seed, exc)

            names = sorted(model_names)
            if jobs > 1:
                with ThreadPoolExecutor(max_workers=jobs) as pool:
                    records.extend(pool.map(run_cell, names))
            else:
                records.extend(run_cell(name) for name in names)
    records.sort(key=lambda r: (r.n_samples, r.mode, r.components or 0, r.model))
    return records


def _failed_record(name, n, interval_s, mode, seed, exc) -> SweepRecord:
    return SweepRecord(
        model=name, n_samples=n, interval_s=interval_s, mode=mode.kind,
        components=mode.k, feature_count=math.nan, throughput=math.nan,
        acc=math.nan, prec=math.nan, rec=math.nan, f1=math.nan, seed=seed,
        status=f"error: {exc}",
    )


def scale_components_axis(values, lo: float = 0.92, hi: float = 1.00) -> list[float]:
    """Min-max rescale of PCA component counts for parallel-coordinate plots.

    Degenerate ranges (single distinct value) map to the upper bound.
    """
    vals = [v for v in values if v is not None]
    if not vals:
        return [hi for _ in values]
    vmin, vmax = min(vals), max(vals)
    if vmin == vmax:
        return [hi for _ in values]
    return [lo + (hi - lo) * (v - vmin) / (vmax - vmin) if v is not None else hi for v in values]


def best_tradeoff(records: list[SweepRecord]) -> SweepRecord:
    """Lexicographic pick: highest F1, then lowest feature throughput."""
    ok = [r for r in records if r.status == "ok"]
    if not ok:
        raise MetricError("no successful records")
    return min(ok, key=lambda r: (-r.f1, r.throughput))


def _record_row(r: SweepRecord) -> list[str]:
    return [
        r.model, str(r.n_samples), repr(r.interval_s), r.mode,
        "" if r.components is None else str(r.components),
        repr(r.feature_count), repr(r.throughput),
        repr(r.acc), repr(r.prec), repr(r.rec), repr(r.f1),
        str(r.seed), r.status,
    ]


def emit_report(records: list[SweepRecord], out_dir: str | Path, formats=("csv", "json")) -> dict:
    """Write sweep.csv / sweep.json / parallel_coords.csv; return paths + summary."""
    if not records:
        raise MetricError("no records to report")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = {}
    if "csv" in formats:
        path = out_dir / "sweep.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_COLUMNS)
            for r in records:
                w.writerow(_record_row(r))
        written["csv"] = str(path)
    if "json" in formats:
        path = out_dir / "sweep.json"
        with open(path, "w") as fh:
            json.dump([asdict(r) for r in records], fh, indent=2)
            fh.write("\n")
        written["json"] = str(path)

    # Parallel-coordinates export: per mode group, the component-count axis
    # is min-max rescaled to [0.92, 1.00].
    path = out_dir / "parallel_coords.csv"
    scaled = {}
    for kind in sorted({r.mode for r in records}):
        group = [i for i, r in enumerate(records) if r.mode == kind]
        axis = scale_components_axis([records[i].components for i in group])
        scaled.update(dict(zip(group, axis)))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(CSV_COLUMNS[:5]) + ["components_scaled", "throughput", "acc", "prec", "rec", "f1"])
        for i, r in enumerate(records):
            w.writerow(
                _record_row(r)[:5]
                + [repr(scaled[i]), repr(r.throughput), repr(r.acc), repr(r.prec), repr(r.rec), repr(r.f1)]
            )
    written["parallel_coords"] = str(path)

    try:
        best = best_tradeoff(records)
        written["best"] = (
            f"best tradeoff: model={best.model} interval={best.n_samples} "
            f"mode={best.mode} components={best.components} "
            f"f1={best.f1:.4f} throughput={best.throughput:.4g} features/s"
        )
    except MetricError:
        written["best"] = "best tradeoff: no successful records"
    return written


def load_records(path: str | Path) -> list[SweepRecord]:
    with open(path) as fh:
        docs = json.load(fh)
    return [SweepRecord(**doc) for doc in docs]
