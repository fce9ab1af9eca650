import math

import numpy as np
import pytest

from rotorcm import features as feat
from rotorcm.features import (
    NON_STFT_LEN,
    ShapeError,
    StftParams,
    Window,
    extract,
    make_windows,
    spectral_centroid,
    spectral_skewness,
    stft_magnitudes,
    wpt_energies,
)
from rotorcm.simgen import ConditionClass


def make_window(n, fill=None, seed=0):
    rng = np.random.default_rng(seed)
    chans = rng.standard_normal((6, n)) if fill is None else np.full((6, n), float(fill))
    return Window(chans, ConditionClass.NORMAL, 0, 0)


def streams_of(n):
    rng = np.random.default_rng(1)
    return {1: rng.standard_normal((n, 3)), 2: rng.standard_normal((n, 3))}


# ---------------------------------------------------------------- windows

def test_window_counts_48000():
    assert len(make_windows(streams_of(48000), 200, ConditionClass.NORMAL, 0)) == 240
    assert len(make_windows(streams_of(48000), 8000, ConditionClass.NORMAL, 0)) == 6


def test_short_stream_gives_empty_with_warning():
    with pytest.warns(UserWarning):
        assert make_windows(streams_of(100), 200, ConditionClass.NORMAL, 0) == []


def test_gapped_windows_dropped():
    streams = streams_of(1000)
    streams[1][350, 1] = np.nan
    ws = make_windows(streams, 200, ConditionClass.NORMAL, 0)
    assert [w.window_index for w in ws] == [0, 2, 3, 4]
    ws = make_windows(streams, 200, ConditionClass.NORMAL, 0, drop_gapped=False)
    assert len(ws) == 5


# ---------------------------------------------------------------- STFT

def test_stft_zero_signal():
    out = stft_magnitudes(np.zeros(200))
    assert out.shape == (4, 26)
    assert np.all(out == 0)


def test_stft_frame_arithmetic():
    assert stft_magnitudes(np.zeros(200), StftParams(50, 50)).shape == (4, 26)
    assert stft_magnitudes(np.zeros(230), StftParams(50, 30)).shape == (7, 26)


def test_stft_pure_cosine_oracle():
    # Direct DFT oracle: cosine at bin k over one rectangular frame gives
    # magnitude w/2 * a at bin k and ~0 elsewhere.
    w, k, a = 50, 7, 1.3
    x = a * np.cos(2 * np.pi * k * np.arange(w) / w)
    out = stft_magnitudes(x, StftParams(w, w))
    assert out.shape == (1, 26)
    assert out[0, k] == pytest.approx(w / 2 * a, rel=1e-12)
    others = np.delete(out[0], k)
    assert others.max() < 1e-9


def test_stft_too_short_raises():
    with pytest.raises(ShapeError):
        stft_magnitudes(np.zeros(10), StftParams(50, 50))


def test_parseval_per_frame():
    rng = np.random.default_rng(2)
    p = StftParams(50, 50)
    for _ in range(20):
        x = rng.standard_normal(200)
        mags = stft_magnitudes(x, p)
        for f in range(mags.shape[0]):
            frame = x[f * 50 : (f + 1) * 50]
            # one-sided -> double interior bins (w even: DC and Nyquist once)
            full = mags[f, 0] ** 2 + 2 * np.sum(mags[f, 1:-1] ** 2) + mags[f, -1] ** 2
            assert full / 50 == pytest.approx(np.sum(frame**2), rel=1e-9)


# ---------------------------------------------------------------- WPT

def test_wpt_constant_signal():
    e = wpt_energies(np.full(64, 3.0))
    # Only the all-approximation node (index 0) at each level is nonzero.
    assert e[0] == pytest.approx(64 * 9.0, rel=1e-12)
    assert np.all(e[1:4] == pytest.approx(0.0, abs=1e-18))
    assert e[4] == pytest.approx(64 * 9.0, rel=1e-12)
    assert np.all(e[5:] == pytest.approx(0.0, abs=1e-18))


def test_wpt_energy_conservation():
    rng = np.random.default_rng(3)
    for _ in range(20):
        x = rng.standard_normal(400)
        e = wpt_energies(x)
        total = np.sum(x**2)
        assert np.sum(e[:4]) == pytest.approx(total, rel=1e-9)
        assert np.sum(e[4:]) == pytest.approx(total, rel=1e-9)


def test_wpt_alternating_hand_computed():
    # Hand-computed 3-level Haar packet of [1,-1,...] (length 8):
    # level 1 detail = [sqrt2]*4, level 2 approx of that = [2,2],
    # level 3 approx again = [2*sqrt2] -> natural-order path (d,a,a),
    # i.e. level-2 node 2 and level-3 node 4 carry all 8 units of energy.
    x = np.array([1.0, -1.0] * 4)
    e = wpt_energies(x)
    level2, level3 = e[:4], e[4:]
    assert level2[2] == pytest.approx(8.0, rel=1e-12)
    assert np.all(np.abs(np.delete(level2, 2)) < 1e-12)
    assert level3[4] == pytest.approx(8.0, rel=1e-12)
    assert np.all(np.abs(np.delete(level3, 4)) < 1e-12)


def test_wpt_indivisible_length_raises():
    with pytest.raises(ValueError):
        wpt_energies(np.zeros(9))


def test_wpt_matches_explicit_basis_oracle():
    # Independent oracle: build the orthonormal depth-3 Haar packet basis
    # explicitly and compute node energies as squared projections.
    h = np.array([1.0, 1.0]) / math.sqrt(2)
    g = np.array([1.0, -1.0]) / math.sqrt(2)

    def analysis_matrix(n, filt):
        m = np.zeros((n // 2, n))
        for i in range(n // 2):
            m[i, 2 * i : 2 * i + 2] = filt
        return m

    rng = np.random.default_rng(4)
    x = rng.standard_normal(16)
    nodes = [x]
    for _ in range(3):
        nxt = []
        for node in nodes:
            a = analysis_matrix(len(node), h) @ node
            d = analysis_matrix(len(node), g) @ node
            nxt += [a, d]
        nodes = nxt
    oracle = np.array([np.sum(node**2) for node in nodes])
    e = wpt_energies(x)
    np.testing.assert_allclose(e[4:], oracle, rtol=1e-9)


# ---------------------------------------------------------------- spectral moments

def test_centroid_zero_signal():
    assert spectral_centroid(np.zeros(128)) == 0.0


def test_centroid_pure_tone():
    fs, n = 800.0, 800
    x = np.sin(2 * np.pi * 120.0 * np.arange(n) / fs)
    assert spectral_centroid(x, fs) == pytest.approx(120.0, abs=fs / n)


def test_centroid_two_tone_midpoint():
    fs, n = 800.0, 800
    t = np.arange(n) / fs
    x = np.sin(2 * np.pi * 100 * t) + np.sin(2 * np.pi * 300 * t)
    assert spectral_centroid(x, fs) == pytest.approx(200.0, abs=fs / n)


def test_skewness_symmetric_spectrum_zero():
    fs, n = 800.0, 800
    t = np.arange(n) / fs
    # Equal-magnitude tones symmetric about 200 Hz.
    x = (
        np.sin(2 * np.pi * 100 * t)
        + np.sin(2 * np.pi * 300 * t)
        + 0.5 * np.sin(2 * np.pi * 150 * t)
        + 0.5 * np.sin(2 * np.pi * 250 * t)
    )
    assert abs(spectral_skewness(x, fs)) < 1e-9


def test_skewness_single_bin_zero():
    fs, n = 800.0, 800
    x = np.sin(2 * np.pi * 120.0 * np.arange(n) / fs)
    assert spectral_skewness(x, fs) == pytest.approx(0.0, abs=1e-6)


def test_skewness_brute_force_moment_oracle():
    rng = np.random.default_rng(5)
    for _ in range(10):
        x = rng.standard_normal(256)
        mag = np.abs(np.fft.rfft(x))
        freqs = np.fft.rfftfreq(256, d=1 / 800.0)
        p = mag / mag.sum()
        mu = float(sum(pi * fi for pi, fi in zip(p, freqs)))
        var = float(sum(pi * (fi - mu) ** 2 for pi, fi in zip(p, freqs)))
        expected = float(sum(pi * (fi - mu) ** 3 for pi, fi in zip(p, freqs))) / var**1.5
        assert spectral_skewness(x, 800.0) == pytest.approx(expected, rel=1e-9)


# ---------------------------------------------------------------- extract

@pytest.mark.parametrize("n,total", [(200, 708), (4000, 12564)])
def test_extract_lengths(n, total):
    fv = extract(make_window(n))
    assert fv.values.shape[0] == total
    assert fv.stft_len == total - NON_STFT_LEN


def test_non_stft_block_is_84_for_all_intervals():
    for n in feat.TABLE_INTERVALS:
        fv = extract(make_window(n))
        assert fv.values.shape[0] - fv.stft_len == 84


def test_affine_count_law():
    for n in feat.TABLE_INTERVALS:
        fv = extract(make_window(n))
        # 3.12 n + 84 exactly, in integer arithmetic (3.12 = 78/25)
        assert 25 * fv.values.shape[0] == 78 * n + 25 * 84


def test_extract_deterministic_and_order_independent():
    w1, w2 = make_window(400, seed=1), make_window(400, seed=2)
    a1 = extract(w1).values
    a2 = extract(w2).values
    assert np.array_equal(extract(w2).values, a2)
    assert np.array_equal(extract(w1).values, a1)


def test_feature_csv(tmp_path):
    ws = [make_window(200, seed=i) for i in range(3)]
    X, y, tid, wi, stft_len = feat.extract_matrix(ws)
    path = tmp_path / "features.csv"
    feat.write_features_csv(path, X, y, tid, wi)
    header = path.read_text().splitlines()[0].split(",")
    assert header[:3] == ["label", "trial_id", "window_index"]
    assert header[3] == "f0" and header[-1] == f"f{X.shape[1] - 1}"
    back = np.loadtxt(path, delimiter=",", skiprows=1, usecols=range(3, 3 + X.shape[1]))
    np.testing.assert_array_equal(back, X)
