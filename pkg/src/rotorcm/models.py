"""From-scratch classifiers behind one train/predict contract.

KNN, CART decision tree (gini), random forest, and a linear one-vs-rest
hinge-loss SVC, plus the stratified 70-30 split.  All randomness is
seeded; identical seeds give identical models and predictions.
"""

from dataclasses import dataclass, field

import numpy as np

from rotorcm import kernels

N_CLASSES = 7
MODEL_NAMES = ("knn", "dt", "rf", "svc")


class SplitError(ValueError):
    pass


class TrainingError(ValueError):
    pass


@dataclass
class Dataset:
    X: np.ndarray
    y: np.ndarray
    trial_ids: np.ndarray
    window_indices: np.ndarray

    def __len__(self):
        return self.X.shape[0]

    def take(self, idx) -> "Dataset":
        return Dataset(self.X[idx], self.y[idx], self.trial_ids[idx], self.window_indices[idx])


def _per_class_test_counts(labels, counts, test_fraction):
    base = {c: int(np.floor(n * test_fraction + 0.5)) for c, n in zip(labels, counts)}
    target = int(np.floor(sum(counts) * test_fraction + 0.5))
    # Clamp so every class keeps at least one row on each side.
    for c, n in zip(labels, counts):
        base[c] = min(max(base[c], 1), n - 1)
    # Global adjustment: nudge the classes whose allocation deviates most
    # in the direction of the correction, keeping every class within +/-1
    # of its exact proportional share.
    exact = {c: n * test_fraction for c, n in zip(labels, counts)}
    while sum(base.values()) != target:
        diff = sum(base.values()) - target
        order = sorted(labels, key=lambda c: ((base[c] - exact[c]) * -np.sign(diff), c))
        for c in order:
            n = dict(zip(labels, counts))[c]
            if diff > 0 and base[c] > 1:
                base[c] -= 1
                break
            if diff < 0 and base[c] < n - 1:
                base[c] += 1
                break
        else:
            break
    return base


def stratified_split(ds: Dataset, test_fraction: float = 0.3, seed: int = 0):
    """Deterministic stratified split; per-class proportions within +/-1 row."""
    labels, counts = np.unique(ds.y, return_counts=True)
    for c, n in zip(labels, counts):
        if n < 2:
            raise SplitError(f"class {int(c)} has only {int(n)} row(s); need >= 2")
    if len(labels) < 2:
        raise SplitError("single-class dataset cannot be split for classification")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(ds))
    test_counts = _per_class_test_counts(labels, counts, test_fraction)
    test_idx = []
    train_idx = []
    taken = {int(c): 0 for c in labels}
    for i in perm:
        c = int(ds.y[i])
        if taken[c] < test_counts[c]:
            taken[c] += 1
            test_idx.append(i)
        else:
            train_idx.append(i)
    return ds.take(np.sort(np.array(train_idx))), ds.take(np.sort(np.array(test_idx)))


def stratified_split_by_trial(ds: Dataset, test_fraction: float = 0.3, seed: int = 0):
    """Split whole trials so no trial contributes windows to both sides."""
    trials = np.unique(ds.trial_ids)
    trial_label = {int(t): int(ds.y[ds.trial_ids == t][0]) for t in trials}
    labels, counts = np.unique([trial_label[int(t)] for t in trials], return_counts=True)
    for c, n in zip(labels, counts):
        if n < 2:
            raise SplitError(f"class {int(c)} has only {int(n)} trial(s); need >= 2")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(trials)
    test_counts = _per_class_test_counts(labels, counts, test_fraction)
    taken = {int(c): 0 for c in labels}
    test_trials = set()
    for t in perm:
        c = trial_label[int(t)]
        if taken[c] < test_counts[c]:
            taken[c] += 1
            test_trials.add(int(t))
    mask = np.isin(ds.trial_ids, sorted(test_trials))
    return ds.take(np.flatnonzero(~mask)), ds.take(np.flatnonzero(mask))


def _check_features(X):
    if not np.isfinite(X).all():
        raise TrainingError("features contain NaN or Inf")


def _check_width(X, d):
    if X.ndim != 2 or X.shape[1] != d:
        raise TrainingError(f"row width {X.shape[1] if X.ndim == 2 else '?'} != training width {d}")


class KnnClassifier:
    def __init__(self, k: int = 5):
        self.k = k
        self.X = None
        self.y = None

    def fit(self, X, y):
        _check_features(X)
        self.X = np.asarray(X, dtype=np.float64)
        self.y = np.asarray(y, dtype=np.int64)
        return self

    def predict(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.shape[0] == 0:
            return np.empty(0, dtype=np.int64)
        _check_width(X, self.X.shape[1])
        d2 = (
            np.sum(X * X, axis=1)[:, None]
            - 2.0 * X @ self.X.T
            + np.sum(self.X * self.X, axis=1)[None, :]
        )
        # Stable sort keeps equal-distance neighbors in training order.
        nearest = np.argsort(d2, axis=1, kind="stable")[:, : self.k]
        out = np.empty(X.shape[0], dtype=np.int64)
        for i, row in enumerate(nearest):
            out[i] = np.bincount(self.y[row], minlength=N_CLASSES).argmax()
        return out


@dataclass
class _TreeNode:
    feature: int = -1
    threshold: float = 0.0
    left: int = -1
    right: int = -1
    label: int = -1  # leaf class when feature == -1


class DecisionTreeClassifier:
    """CART with gini impurity, midpoint thresholds, no depth limit.

    Tie-breaks are deterministic: lowest feature index, then lowest
    threshold; leaf prediction is the lowest-id majority class.
    """

    def __init__(self, min_split: int = 2, max_features: int | None = None, seed: int = 0):
        self.min_split = min_split
        self.max_features = max_features
        self.seed = seed
        self.nodes: list[_TreeNode] = []
        self.d = None

    def fit(self, X, y):
        X = np.ascontiguousarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        _check_features(X)
        self.d = X.shape[1]
        self.nodes = []
        rng = np.random.default_rng(self.seed)
        all_features = np.arange(self.d, dtype=np.int64)
        stack = [(np.arange(X.shape[0]), self._new_node())]
        while stack:
            idx, node_id = stack.pop()
            ys = y[idx]
            counts = np.bincount(ys, minlength=N_CLASSES)
            if counts.max() == len(idx) or len(idx) < self.min_split:
                self.nodes[node_id].label = int(counts.argmax())
                continue
            if self.max_features is not None and self.max_features < self.d:
                feats = rng.choice(self.d, size=self.max_features, replace=False).astype(np.int64)
            else:
                feats = all_features
            f, thr, _ = kernels.best_split_gini(X[idx], ys, feats, N_CLASSES)
            if f < 0:
                self.nodes[node_id].label = int(counts.argmax())
                continue
            mask = X[idx, f] <= thr
            node = self.nodes[node_id]
            node.feature = f
            node.threshold = thr
            node.left = self._new_node()
            node.right = self._new_node()
            stack.append((idx[mask], node.left))
            stack.append((idx[~mask], node.right))
        return self

    def _new_node(self) -> int:
        self.nodes.append(_TreeNode())
        return len(self.nodes) - 1

    def predict(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.shape[0] == 0:
            return np.empty(0, dtype=np.int64)
        _check_width(X, self.d)
        out = np.empty(X.shape[0], dtype=np.int64)
        for i, row in enumerate(X):
            n = 0
            while self.nodes[n].feature >= 0:
                node = self.nodes[n]
                n = node.left if row[node.feature] <= node.threshold else node.right
            out[i] = self.nodes[n].label
        return out

    def to_dict(self) -> dict:
        return {
            "nodes": [
                {"feature": n.feature, "threshold": n.threshold, "left": n.left,
                 "right": n.right, "label": n.label}
                for n in self.nodes
            ]
        }


class RandomForestClassifier:
    """100 seeded bootstrap CART trees, sqrt(d) features per split."""

    def __init__(self, n_trees: int = 100, seed: int = 0):
        self.n_trees = n_trees
        self.seed = seed
        self.trees: list[DecisionTreeClassifier] = []
        self.d = None

    def fit(self, X, y):
        X = np.ascontiguousarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        _check_features(X)
        self.d = X.shape[1]
        m = max(1, int(np.sqrt(self.d)))
        n = X.shape[0]
        self.trees = []
        for child in np.random.SeedSequence(self.seed).spawn(self.n_trees):
            rng = np.random.default_rng(child)
            boot = rng.integers(0, n, size=n)
            tree = DecisionTreeClassifier(max_features=m, seed=child)
            tree.fit(X[boot], y[boot])
            self.trees.append(tree)
        return self

    def predict(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.shape[0] == 0:
            return np.empty(0, dtype=np.int64)
        _check_width(X, self.d)
        votes = np.zeros((X.shape[0], N_CLASSES), dtype=np.int64)
        for tree in self.trees:
            votes[np.arange(X.shape[0]), tree.predict(X)] += 1
        return votes.argmax(axis=1)  # argmax -> lowest class id wins ties


class LinearSvcClassifier:
    """One-vs-rest linear SVM trained by full-batch subgradient descent.

    A deliberate simplification of a kernel SVC: deterministic epoch
    schedule on the primal hinge objective with C = 1.
    """

    def __init__(self, C: float = 1.0, epochs: int = 200, seed: int = 0):
        self.C = C
        self.epochs = epochs
        self.seed = seed  # accepted for interface symmetry; training is deterministic
        self.W = None
        self.b = None

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        _check_features(X)
        n, d = X.shape
        lam = 1.0 / (self.C * n)
        self.W = np.zeros((N_CLASSES, d))
        self.b = np.zeros(N_CLASSES)
        for cls in range(N_CLASSES):
            t = 2.0 * (y == cls) - 1.0
            w = np.zeros(d)
            b = 0.0
            for epoch in range(1, self.epochs + 1):
                lr = 1.0 / (lam * epoch)
                margins = t * (X @ w + b)
                active = margins < 1.0
                grad_w = lam * w - (t[active] @ X[active]) / n
                grad_b = -t[active].sum() / n
                w -= lr * grad_w
                b -= lr * grad_b
            self.W[cls] = w
            self.b[cls] = b
        return self

    def predict(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.shape[0] == 0:
            return np.empty(0, dtype=np.int64)
        _check_width(X, self.W.shape[1])
        return np.argmax(X @ self.W.T + self.b, axis=1)


def make_model(name: str, seed: int = 0):
    if name == "knn":
        return KnnClassifier(k=5)
    if name == "dt":
        return DecisionTreeClassifier(seed=seed)
    if name == "rf":
        return RandomForestClassifier(n_trees=100, seed=seed)
    if name == "svc":
        return LinearSvcClassifier(C=1.0, epochs=200, seed=seed)
    raise TrainingError(f"unknown model {name!r}; choose from {MODEL_NAMES}")


def train_model(name: str, train: Dataset, seed: int = 0):
    if len(train) == 0:
        raise TrainingError("empty training set")
    return make_model(name, seed).fit(train.X, train.y)
