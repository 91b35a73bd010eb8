"""k-nearest-neighbour classification with deterministic tie handling."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from ..errors import ConfigError, DataError
from .base import Classifier

METRICS = ("euclidean", "cosine")
_CHUNK_ELEMS = 2_000_000


def _row_norms_sq(X) -> np.ndarray:
    if sp.issparse(X):
        return np.asarray(X.multiply(X).sum(axis=1)).ravel()
    return np.einsum("ij,ij->i", X, X)


def pairwise_distances(Q, X, metric: str = "euclidean") -> np.ndarray:
    """Distances between the rows of Q and the rows of X.

    Dense euclidean distances are computed from explicit differences, so they
    are exact up to one rounding per term; sparse inputs use the expansion
    |q|^2 + |x|^2 - 2 q.x (clipped at zero). Cosine distance is 1 - cos, with
    zero vectors treated as orthogonal to everything.
    """
    if metric == "cosine":
        dots = np.asarray((Q @ X.T).todense() if sp.issparse(Q) else Q @ X.T)
        nq = np.sqrt(_row_norms_sq(Q))
        nx = np.sqrt(_row_norms_sq(X))
        denom = np.outer(nq, nx)
        cos = np.divide(dots, denom, out=np.zeros_like(dots), where=denom > 0)
        return 1.0 - cos
    if sp.issparse(Q) or sp.issparse(X):
        Qs, Xs = sp.csr_matrix(Q), sp.csr_matrix(X)
        sq = _row_norms_sq(Qs)[:, None] + _row_norms_sq(Xs)[None, :] - 2.0 * np.asarray((Qs @ Xs.T).todense())
        return np.sqrt(np.maximum(sq, 0.0))
    out = np.empty((Q.shape[0], X.shape[0]))
    step = max(1, _CHUNK_ELEMS // max(1, X.shape[0] * X.shape[1]))
    for a in range(0, Q.shape[0], step):
        diff = Q[a:a + step, None, :] - X[None, :, :]
        out[a:a + step] = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    return out


def vote(neighbor_labels: np.ndarray, neighbor_dist: np.ndarray, n_classes: int) -> np.ndarray:
    """Majority vote per row; ties -> smallest summed distance, then lowest class."""
    n, k = neighbor_labels.shape
    rows = np.repeat(np.arange(n), k)
    counts = np.zeros((n, n_classes))
    dsum = np.zeros((n, n_classes))
    np.add.at(counts, (rows, neighbor_labels.ravel()), 1.0)
    np.add.at(dsum, (rows, neighbor_labels.ravel()), neighbor_dist.ravel())
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        cand = np.flatnonzero(counts[i] == counts[i].max())
        # lexicographic: smallest summed distance, then lowest index (argmin takes the first)
        out[i] = cand[np.argmin(dsum[i, cand])]
    return out


class KNN(Classifier):
    """Lazy learner. Neighbours at equal distance are ranked by training order."""

    algorithm = "knn"
    defaults = {"k": 5, "metric": "euclidean"}

    def _validate(self):
        if self.hp["k"] < 1:
            raise ConfigError("k must be >= 1")
        if self.hp["metric"] not in METRICS:
            raise ConfigError(f"metric must be one of {METRICS}")

    def _fit(self, ts):
        if self.hp["k"] > len(ts.y):
            raise DataError(f"k={self.hp['k']} exceeds the {len(ts.y)} training samples")
        self.X = ts.X
        self.y = ts.y

    def neighbors(self, X) -> tuple[np.ndarray, np.ndarray]:
        k = self.hp["k"]
        D = pairwise_distances(X, self.X, self.hp["metric"])
        idx = np.argsort(D, axis=1, kind="stable")[:, :k]
        return idx, np.take_along_axis(D, idx, axis=1)

    def _predict(self, X):
        idx, dist = self.neighbors(X)
        return vote(self.y[idx], dist, self.n_classes)

    def _arrays(self):
        if sp.issparse(self.X):
            return {"y": self.y, "X_data": self.X.data, "X_indices": self.X.indices,
                    "X_indptr": self.X.indptr, "X_shape": np.array(self.X.shape)}
        return {"y": self.y, "X": self.X}

    def _load_arrays(self, arrays):
        self.y = arrays["y"]
        if "X" in arrays:
            self.X = arrays["X"]
        else:
            self.X = sp.csr_matrix((arrays["X_data"], arrays["X_indices"], arrays["X_indptr"]),
                                   shape=tuple(arrays["X_shape"]))
