"""Train-fitted z-score normalization and PCA reduction modes.

Three modes mirror the experiment variants: no reduction, PCA on the
STFT block only (the fixed 84 trailing features pass through normalized),
or PCA on the whole vector.  Everything is fitted on training rows only;
test rows are transformed with the train-fitted statistics.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

STD_FLOOR = 1e-12
NON_STFT_LEN = 84


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class ReductionMode:
    kind: str  # "none", "stft", "all"
    k: int | None = None

    def __post_init__(self):
        if self.kind not in ("none", "stft", "all"):
            raise FitError(f"unknown reduction mode {self.kind!r}")
        if self.kind != "none" and (self.k is None or self.k < 1):
            raise FitError("component count k must be a positive integer")

    def __str__(self):
        return self.kind if self.kind == "none" else f"{self.kind}({self.k})"


@dataclass
class Normalizer:
    mean: np.ndarray
    std: np.ndarray
    constant: np.ndarray  # bool mask of near-zero-variance features

    def transform(self, X: np.ndarray) -> np.ndarray:
        out = (X - self.mean) / np.where(self.constant, 1.0, self.std)
        out[:, self.constant] = 0.0
        return out


def fit_normalizer(train: np.ndarray) -> Normalizer:
    train = np.asarray(train, dtype=np.float64)
    if train.ndim != 2 or train.shape[0] < 2:
        raise FitError("normalizer needs at least 2 training rows")
    mean = train.mean(axis=0)
    std = train.std(axis=0)
    return Normalizer(mean=mean, std=std, constant=std < STD_FLOOR)


@dataclass
class PcaModel:
    components: np.ndarray  # (k, d), rows orthonormal
    explained_variance: np.ndarray  # (k,), non-increasing
    mean: np.ndarray  # (d,) training mean

    @property
    def k(self) -> int:
        return self.components.shape[0]

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=np.float64) - self.mean) @ self.components.T

    def inverse_transform(self, scores: np.ndarray) -> np.ndarray:
        return scores @ self.components + self.mean


def fit_pca(train: np.ndarray, k: int) -> PcaModel:
    """Top-k principal directions of the centered training matrix (SVD).

    Sign convention: each component's largest-magnitude entry is positive,
    making the output deterministic across linear-algebra backends.
    """
    train = np.asarray(train, dtype=np.float64)
    n, d = train.shape
    limit = min(n - 1, d)
    if not 1 <= k <= limit:
        raise FitError(f"k={k} outside 1..{limit} (rows-1={n - 1}, cols={d})")
    mean = train.mean(axis=0)
    centered = train - mean
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    components = vt[:k]
    flip = np.sign(components[np.arange(k), np.argmax(np.abs(components), axis=1)])
    components = components * flip[:, None]
    explained = s[:k] ** 2 / (n - 1)
    return PcaModel(components=components, explained_variance=explained, mean=mean)


@dataclass
class Reducer:
    """Fitted normalizer + optional PCA for one reduction mode."""

    mode: ReductionMode
    stft_len: int
    normalizer: Normalizer
    pca: PcaModel | None

    @property
    def out_dim(self) -> int:
        if self.mode.kind == "none":
            return self.normalizer.mean.shape[0]
        if self.mode.kind == "stft":
            return self.mode.k + NON_STFT_LEN
        return self.mode.k

    def transform(self, X: np.ndarray) -> np.ndarray:
        Z = self.normalizer.transform(np.asarray(X, dtype=np.float64))
        if self.mode.kind == "none":
            return Z
        if self.mode.kind == "stft":
            scores = self.pca.transform(Z[:, : self.stft_len])
            return np.hstack([scores, Z[:, self.stft_len :]])
        return self.pca.transform(Z)


def fit_reducer(train: np.ndarray, stft_len: int, mode: ReductionMode) -> Reducer:
    normalizer = fit_normalizer(train)
    Z = normalizer.transform(np.asarray(train, dtype=np.float64))
    pca = None
    if mode.kind == "stft":
        pca = fit_pca(Z[:, :stft_len], mode.k)
    elif mode.kind == "all":
        pca = fit_pca(Z, mode.k)
    return Reducer(mode=mode, stft_len=stft_len, normalizer=normalizer, pca=pca)


def apply_mode(train, test, stft_len: int, mode: ReductionMode):
    """Fit on train, transform both; returns (train_red, test_red, out_dim)."""
    reducer = fit_reducer(train, stft_len, mode)
    return reducer.transform(train), reducer.transform(test), reducer.out_dim


def save_reducer(reducer: Reducer, path: str | Path) -> None:
    doc = {
        "mode": {"kind": reducer.mode.kind, "k": reducer.mode.k},
        "stft_len": reducer.stft_len,
        "normalizer": {
            "mean": reducer.normalizer.mean.tolist(),
            "std": reducer.normalizer.std.tolist(),
            "constant": reducer.normalizer.constant.tolist(),
        },
        "pca": None
        if reducer.pca is None
        else {
            "components": reducer.pca.components.tolist(),
            "explained_variance": reducer.pca.explained_variance.tolist(),
            "mean": reducer.pca.mean.tolist(),
        },
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_reducer(path: str | Path) -> Reducer:
    with open(path) as fh:
        doc = json.load(fh)
    norm = Normalizer(
        mean=np.array(doc["normalizer"]["mean"]),
        std=np.array(doc["normalizer"]["std"]),
        constant=np.array(doc["normalizer"]["constant"], dtype=bool),
    )
    pca = None
    if doc["pca"] is not None:
        pca = PcaModel(
            components=np.array(doc["pca"]["components"]),
            explained_variance=np.array(doc["pca"]["explained_variance"]),
            mean=np.array(doc["pca"]["mean"]),
        )
    return Reducer(
        mode=ReductionMode(doc["mode"]["kind"], doc["mode"]["k"]),
        stft_len=doc["stft_len"],
        normalizer=norm,
        pca=pca,
    )
