import json
import math

import numpy as np
import pytest

from rotorcm import evaluate as ev
from rotorcm import simgen
from rotorcm.reduce import ReductionMode


def brute_force_metrics(cm):
    """Independent per-class TP/FP/FN tally."""
    n = cm.shape[0]
    total = cm.sum()
    acc = sum(cm[i, i] for i in range(n)) / total
    precs, recs, f1s = [], [], []
    for c in range(n):
        tp = cm[c, c]
        fp = sum(cm[r, c] for r in range(n)) - tp
        fn = sum(cm[c, r] for r in range(n)) - tp
        if tp + fp + fn == 0 and cm[c].sum() == 0 and cm[:, c].sum() == 0:
            continue  # absent from truth and prediction
        p = tp / (tp + fp) if tp + fp else 0.0
        r = tp / (tp + fn) if tp + fn else 0.0
        precs.append(p)
        recs.append(r)
        f1s.append(2 * p * r / (p + r) if p + r else 0.0)
    return acc, sum(precs) / len(precs), sum(recs) / len(recs), sum(f1s) / len(f1s)


def test_diagonal_cm_perfect():
    cm = np.diag([3, 1, 4, 1, 5, 9, 2])
    assert ev.compute_metrics(cm) == (1.0, 1.0, 1.0, 1.0)


def test_symmetric_two_class():
    cm = np.array([[5, 5], [5, 5]])
    acc, prec, rec, f1 = ev.compute_metrics(cm)
    assert (acc, prec, rec, f1) == (0.5, 0.5, 0.5, 0.5)


def test_metrics_match_brute_force_oracle():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        cm = rng.integers(0, 20, size=(7, 7))
        if cm.sum() == 0:
            continue
        got = ev.compute_metrics(cm)
        want = brute_force_metrics(cm)
        for g, w in zip(got, want):
            assert g == pytest.approx(w, abs=1e-12)


def test_empty_cm_raises():
    with pytest.raises(ev.MetricError):
        ev.compute_metrics(np.zeros((7, 7), dtype=np.int64))


def test_throughput_published_values():
    assert ev.feature_throughput(9320, 0.25) == 37280.0
    assert ev.feature_throughput(249404, 10.0) == 24940.4
    assert ev.feature_throughput(94, 5.0) == 18.8
    assert ev.feature_throughput(2, 10.0) == 0.2


def test_throughput_domain_error():
    with pytest.raises(ev.MetricError):
        ev.feature_throughput(10, 0.0)


def test_throughput_reduction():
    assert ev.throughput_reduction(27788, 18.8) == pytest.approx(99.93234, abs=1e-4)
    assert ev.throughput_reduction(5.0, 5.0) == 0.0
    assert ev.throughput_reduction(5.0, 0.0) == 100.0


def small_campaign():
    cfg = simgen.SignalConfig(trial_duration_s=10.0)
    return simgen.synthesize_campaign(cfg)


def test_sweep_grid_sizes_and_sorting():
    trials = small_campaign()
    records = ev.run_sweep(
        trials, [800], ev.grid_modes("stft-pca"), ["rf", "knn"], seed=42
    )
    assert len(records) == 1 * 3 * 2
    keys = [(r.n_samples, r.mode, r.components or 0, r.model) for r in records]
    assert keys == sorted(keys)


def test_sweep_throughput_identity():
    trials = small_campaign()
    records = ev.run_sweep(trials, [400, 800], ev.grid_modes("none"), ["dt"], seed=42)
    for r in records:
        assert r.status == "ok"
        assert r.throughput * r.interval_s == pytest.approx(r.feature_count, rel=1e-15)
        assert r.interval_s == r.n_samples / 800.0


def test_sweep_paper_arithmetic_counts():
    trials = small_campaign()
    records = ev.run_sweep(
        trials, [200], ev.grid_modes("none"), ["knn"], seed=42, paper_arithmetic=True
    )
    assert records[0].feature_count == 9320
    assert records[0].throughput == 37280.0
    records = ev.run_sweep(
        trials, [4000], [ReductionMode("stft", 10)], ["rf"], seed=42, paper_arithmetic=True
    )
    assert records[0].feature_count == 94
    assert records[0].throughput == 18.8


def test_sweep_records_cell_failures_without_abort():
    trials = small_campaign()
    # k=50 exceeds the training row count at interval 8000 / 10 s trials.
    records = ev.run_sweep(trials, [8000], [ReductionMode("all", 50)], ["knn"], seed=42)
    assert len(records) == 1
    assert records[0].status.startswith("error:")
    assert math.isnan(records[0].f1)


def test_scale_components_axis():
    assert ev.scale_components_axis([10, 15, 20]) == pytest.approx([0.92, 0.96, 1.00])
    assert ev.scale_components_axis([10]) == [1.00]
    assert ev.scale_components_axis([None]) == [1.00]


def make_record(**kw):
    base = dict(
        model="rf", n_samples=4000, interval_s=5.0, mode="stft", components=10,
        feature_count=94.0, throughput=18.8, acc=1.0, prec=1.0, rec=1.0, f1=1.0,
        seed=42, status="ok",
    )
    base.update(kw)
    return ev.SweepRecord(**base)


def test_best_tradeoff_lexicographic():
    records = [
        make_record(model="dt", f1=0.9, throughput=5.0),
        make_record(model="rf", f1=1.0, throughput=18.8),
        make_record(model="knn", f1=1.0, throughput=50.0, components=20),
    ]
    best = ev.best_tradeoff(records)
    assert best.model == "rf" and best.throughput == 18.8


def test_emit_report_files(tmp_path):
    records = [
        make_record(components=k, throughput=(k + 84) / 5.0) for k in (10, 15, 20)
    ]
    written = ev.emit_report(records, tmp_path)
    csv_lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert csv_lines[0] == ",".join(ev.CSV_COLUMNS)
    assert len(csv_lines) == 4
    docs = json.loads((tmp_path / "sweep.json").read_text())
    assert [d["components"] for d in docs] == [10, 15, 20]
    pc_lines = (tmp_path / "parallel_coords.csv").read_text().splitlines()
    scaled = [float(line.split(",")[5]) for line in pc_lines[1:]]
    assert scaled == pytest.approx([0.92, 0.96, 1.00])
    assert "best tradeoff" in written["best"]


def test_report_roundtrip(tmp_path):
    records = [make_record(), make_record(model="dt", f1=0.5)]
    ev.emit_report(records, tmp_path)
    loaded = ev.load_records(tmp_path / "sweep.json")
    assert loaded == records
