"""Windowing and feature extraction for 6-channel vibration streams.

Feature vector layout per window: the STFT magnitude block (6 channels,
frame-major) followed by a fixed 84-value block of 14 features per
channel (12 Haar wavelet packet node energies, spectral centroid,
spectral skewness).  With the default non-overlapping 50-sample STFT the
total length is 3.12*n + 84 for an n-sample window.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from rotorcm import kernels
from rotorcm.simgen import ConditionClass

TABLE_INTERVALS = (200, 400, 800, 1200, 1600, 4000, 8000)
NON_STFT_PER_CHANNEL = 14  # 4 level-2 + 8 level-3 WPT energies + centroid + skewness
NON_STFT_LEN = 6 * NON_STFT_PER_CHANNEL  # 84


class ShapeError(ValueError):
    pass


@dataclass(frozen=True)
class StftParams:
    window_len: int = 50
    hop: int = 50
    window_fn: str = "rectangular"  # or "hann"
    one_sided: bool = True

    def validate(self) -> None:
        if self.hop <= 0 or self.window_len <= 0:
            raise ShapeError("window_len and hop must be positive")
        if self.hop > self.window_len:
            raise ShapeError("hop must not exceed window_len")
        if self.window_fn not in ("rectangular", "hann"):
            raise ShapeError(f"unknown window_fn {self.window_fn!r}")


@dataclass
class Window:
    channels: np.ndarray  # (6, n_samples): sensor1 x/y/z then sensor2 x/y/z
    label: ConditionClass
    trial_id: int
    window_index: int

    @property
    def n_samples(self) -> int:
        return self.channels.shape[1]


@dataclass
class FeatureVector:
    values: np.ndarray
    stft_len: int
    label: ConditionClass
    trial_id: int
    window_index: int
    n_samples: int


def make_windows(
    streams: dict[int, np.ndarray],
    n_samples: int,
    label: ConditionClass,
    trial_id: int,
    drop_gapped: bool = True,
) -> list[Window]:
    """Cut time-aligned per-sensor (n, 3) streams into consecutive windows.

    Windows containing NaN gap markers are dropped when drop_gapped.
    """
    sensors = sorted(streams)
    lengths = {streams[s].shape[0] for s in sensors}
    if len(lengths) != 1:
        raise ShapeError("sensor streams must have equal length")
    stream_len = lengths.pop()
    count = stream_len // n_samples
    if count == 0:
        warnings.warn(f"stream of {stream_len} samples shorter than window {n_samples}")
    windows = []
    for w in range(count):
        sl = slice(w * n_samples, (w + 1) * n_samples)
        chans = np.concatenate([streams[s][sl].T for s in sensors], axis=0)
        if drop_gapped and np.isnan(chans).any():
            continue
        windows.append(Window(chans, label, trial_id, w))
    return windows


def windows_from_trial(trial, n_samples: int) -> list[Window]:
    streams = {1: trial.data[0].T, 2: trial.data[1].T}
    return make_windows(streams, n_samples, trial.condition, trial.trial_id)


def campaign_windows(trials, n_samples: int) -> list[Window]:
    out = []
    for trial in trials:
        out.extend(windows_from_trial(trial, n_samples))
    return out


def stft_frame_count(n_samples: int, p: StftParams) -> int:
    return (n_samples - p.window_len) // p.hop + 1


def stft_magnitudes(channel: np.ndarray, p: StftParams = StftParams()) -> np.ndarray:
    """Magnitude STFT, shape (frames, window_len//2 + 1)."""
    p.validate()
    channel = np.asarray(channel, dtype=np.float64)
    n = channel.shape[0]
    if n < p.window_len:
        raise ShapeError(f"channel of {n} samples shorter than window_len {p.window_len}")
    frames = stft_frame_count(n, p)
    idx = p.hop * np.arange(frames)[:, None] + np.arange(p.window_len)
    segs = channel[idx]
    if p.window_fn == "hann":
        segs = segs * np.hanning(p.window_len)
    return np.abs(np.fft.rfft(segs, axis=1))


def wpt_energies(channel: np.ndarray) -> np.ndarray:
    """12 Haar wavelet packet node energies (4 at level 2, 8 at level 3)."""
    return kernels.haar_wpt_energies(np.asarray(channel, dtype=np.float64))


def _spectrum(channel: np.ndarray, sample_rate_hz: float):
    mag = np.abs(np.fft.rfft(channel))
    freqs = np.fft.rfftfreq(len(channel), d=1.0 / sample_rate_hz)
    return freqs, mag


def spectral_centroid(channel: np.ndarray, sample_rate_hz: float = 800.0) -> float:
    """Magnitude-weighted mean frequency of the full-window spectrum (Hz)."""
    freqs, mag = _spectrum(np.asarray(channel, dtype=np.float64), sample_rate_hz)
    total = mag.sum()
    if total <= 0:
        return 0.0
    return float(np.dot(freqs, mag) / total)


def spectral_skewness(channel: np.ndarray, sample_rate_hz: float = 800.0) -> float:
    """Third standardized moment of the magnitude-weighted frequency distribution."""
    freqs, mag = _spectrum(np.asarray(channel, dtype=np.float64), sample_rate_hz)
    total = mag.sum()
    if total <= 0:
        return 0.0
    p = mag / total
    mu = np.dot(p, freqs)
    dev = freqs - mu
    var = np.dot(p, dev * dev)
    # Degenerate spread: all weight in one bin up to spectral leakage.
    if var <= (1e-6 * freqs[-1]) ** 2:
        return 0.0
    return float(np.dot(p, dev**3) / var**1.5)


def extract(
    window: Window,
    p: StftParams = StftParams(),
    sample_rate_hz: float = 800.0,
) -> FeatureVector:
    """Flat feature vector: STFT block (6 channels, frame-major) + 84 fixed."""
    stft_parts = [stft_magnitudes(ch, p).ravel() for ch in window.channels]
    stft_block = np.concatenate(stft_parts)
    rest = np.empty(NON_STFT_LEN)
    for c, ch in enumerate(window.channels):
        base = c * NON_STFT_PER_CHANNEL
        rest[base : base + 12] = wpt_energies(ch)
        rest[base + 12] = spectral_centroid(ch, sample_rate_hz)
        rest[base + 13] = spectral_skewness(ch, sample_rate_hz)
    return FeatureVector(
        values=np.concatenate([stft_block, rest]),
        stft_len=stft_block.shape[0],
        label=window.label,
        trial_id=window.trial_id,
        window_index=window.window_index,
        n_samples=window.n_samples,
    )


def extract_matrix(windows, p: StftParams = StftParams(), sample_rate_hz: float = 800.0):
    """Stack extracted windows into (X, y, trial_ids, window_indices, stft_len)."""
    fvs = [extract(w, p, sample_rate_hz) for w in windows]
    X = np.vstack([fv.values for fv in fvs])
    y = np.array([int(fv.label) for fv in fvs], dtype=np.int64)
    trial_ids = np.array([fv.trial_id for fv in fvs], dtype=np.int64)
    window_indices = np.array([fv.window_index for fv in fvs], dtype=np.int64)
    return X, y, trial_ids, window_indices, fvs[0].stft_len


def write_features_csv(path, X, y, trial_ids, window_indices) -> None:
    """CSV with header label,trial_id,window_index,f0..fK."""
    k = X.shape[1]
    header = "label,trial_id,window_index," + ",".join(f"f{i}" for i in range(k))
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for i in range(X.shape[0]):
            row = [str(int(y[i])), str(int(trial_ids[i])), str(int(window_indices[i]))]
            row += [repr(float(v)) for v in X[i]]
            fh.write(",".join(row) + "\n")
