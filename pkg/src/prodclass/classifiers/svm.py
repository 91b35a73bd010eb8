"""Kernel SVM: binary SMO on the dual, combined one-vs-one by voting.

The binary solver selects working pairs by maximal violation with
second-order choice of the partner, clips the pair update to the box, and
stops once max_{I_up}(-y G) - min_{I_low}(-y G) < tol, where G is the dual
gradient. At that point every sample satisfies the KKT conditions of the
decision function f(x) = sum_j alpha_j y_j k(x_j, x) + b to within tol.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np
import scipy.sparse as sp
from numba import njit

from ..errors import ConfigError
from .base import Classifier
from .knn import _row_norms_sq

KERNELS = ("radial", "sigmoid")
TAU = 1e-12


def kernel_matrix(A, B, kernel: str, gamma: float, coef0: float = 0.0) -> np.ndarray:
    dots = A @ B.T
    dots = np.asarray(dots.todense()) if sp.issparse(dots) else np.asarray(dots)
    if kernel == "radial":
        sq = _row_norms_sq(A)[:, None] + _row_norms_sq(B)[None, :] - 2.0 * dots
        return np.exp(-gamma * np.maximum(sq, 0.0))
    if kernel == "sigmoid":
        return np.tanh(gamma * dots + coef0)
    raise ConfigError(f"kernel must be one of {KERNELS}")


@njit(cache=True)
def smo(K, y, C, tol, max_iter):
    """Solve min 1/2 a'Qa - sum(a), 0 <= a <= C, y'a = 0 with Q_ij = y_i y_j K_ij.

    Returns (alpha, b, iterations, converged).
    """
    n = y.shape[0]
    alpha = np.zeros(n)
    G = -np.ones(n)
    it = 0
    converged = False
    while it < max_iter:
        # i: maximal violator in I_up
        gmax = -np.inf
        i = -1
        for t in range(n):
            up = (y[t] > 0 and alpha[t] < C) or (y[t] < 0 and alpha[t] > 0)
            if up and -y[t] * G[t] >= gmax:
                if -y[t] * G[t] > gmax or i < 0:
                    gmax = -y[t] * G[t]
                    i = t
        gmin = np.inf
        j = -1
        best = np.inf
        for t in range(n):
            low = (y[t] > 0 and alpha[t] > 0) or (y[t] < 0 and alpha[t] < C)
            if not low:
                continue
            v = -y[t] * G[t]
            if v < gmin:
                gmin = v
            if i >= 0:
                bdiff = gmax - v
                if bdiff > 0:
                    a = K[i, i] + K[t, t] - 2.0 * K[i, t]
                    if a <= 0:
                        a = TAU
                    obj = -(bdiff * bdiff) / a
                    if obj < best:
                        best = obj
                        j = t
        if i < 0 or j < 0 or gmax - gmin < tol:
            converged = True
            break
        it += 1
        ai, aj = alpha[i], alpha[j]
        Qij = y[i] * y[j] * K[i, j]
        if y[i] != y[j]:
            quad = K[i, i] + K[j, j] + 2.0 * Qij
            if quad <= 0:
                quad = TAU
            delta = (-G[i] - G[j]) / quad
            diff = ai - aj
            ni, nj = ai + delta, aj + delta
            if diff > 0:
                if nj < 0:
                    nj = 0.0
                    ni = diff
            else:
                if ni < 0:
                    ni = 0.0
                    nj = -diff
            if diff > 0:
                if ni > C:
                    ni = C
                    nj = C - diff
            else:
                if nj > C:
                    nj = C
                    ni = C + diff
        else:
            quad = K[i, i] + K[j, j] - 2.0 * Qij
            if quad <= 0:
                quad = TAU
            delta = (G[i] - G[j]) / quad
            s = ai + aj
            ni, nj = ai - delta, aj + delta
            if s > C:
                if ni > C:
                    ni = C
                    nj = s - C
            else:
                if nj < 0:
                    nj = 0.0
                    ni = s
            if s > C:
                if nj > C:
                    nj = C
                    ni = s - C
            else:
                if ni < 0:
                    ni = 0.0
                    nj = s
        di, dj = ni - ai, nj - aj
        alpha[i], alpha[j] = ni, nj
        for t in range(n):
            G[t] += y[t] * (y[i] * K[t, i] * di + y[j] * K[t, j] * dj)
    # bias: average over free vectors, else the middle of the feasible interval
    ub, lb = np.inf, -np.inf
    total, nfree = 0.0, 0
    for t in range(n):
        yg = y[t] * G[t]
        if alpha[t] >= C:
            if y[t] < 0:
                ub = min(ub, yg)
            else:
                lb = max(lb, yg)
        elif alpha[t] <= 0:
            if y[t] > 0:
                ub = min(ub, yg)
            else:
                lb = max(lb, yg)
        else:
            total += yg
            nfree += 1
    rho = total / nfree if nfree > 0 else 0.5 * (ub + lb)
    return alpha, -rho, it, converged


def kkt_violation(K, y, alpha, b, C) -> np.ndarray:
    """Per-sample KKT violation of a binary solution, in margin units."""
    m = y * (K @ (alpha * y) + b)
    lower = alpha <= 0
    upper = alpha >= C
    free = ~(lower | upper)
    v = np.zeros(len(y))
    v[lower] = np.maximum(0.0, 1.0 - m[lower])
    v[upper] = np.maximum(0.0, m[upper] - 1.0)
    v[free] = np.abs(m[free] - 1.0)
    return v


class SVM(Classifier):
    """One-vs-one kernel SVM. ``gamma=None`` means 1 / n_features."""

    algorithm = "svm"
    defaults = {"kernel": "radial", "C": 1.0, "gamma": None, "coef0": 0.0, "tol": 1e-3,
                "max_iter": 100_000}

    def _validate(self):
        hp = self.hp
        if hp["kernel"] not in KERNELS:
            raise ConfigError(f"kernel must be one of {KERNELS}")
        if not hp["C"] > 0 or not hp["tol"] > 0 or hp["max_iter"] < 1:
            raise ConfigError("C and tol must be > 0 and max_iter >= 1")
        if hp["gamma"] is not None and not hp["gamma"] > 0:
            raise ConfigError("gamma must be > 0")

    @property
    def gamma(self) -> float:
        g = self.hp["gamma"]
        return 1.0 / self.n_features if g is None else float(g)

    def _kernel(self, A, B):
        return kernel_matrix(A, B, self.hp["kernel"], self.gamma, float(self.hp["coef0"]))

    def _fit(self, ts):
        hp = self.hp
        C = float(hp["C"])
        K = self._kernel(ts.X, ts.X)
        present = np.unique(ts.y)
        self.pairs = np.array(list(combinations(present, 2)), dtype=np.int64).reshape(-1, 2)
        n = len(ts.y)
        coef = np.zeros((len(self.pairs), n))
        self.bias = np.zeros(len(self.pairs))
        self.machines = []
        for m, (c0, c1) in enumerate(self.pairs):
            idx = np.flatnonzero((ts.y == c0) | (ts.y == c1))
            yb = np.where(ts.y[idx] == c1, 1.0, -1.0)
            alpha, b, it, ok = smo(np.ascontiguousarray(K[np.ix_(idx, idx)]), yb, C, float(hp["tol"]),
                                   int(hp["max_iter"]))
            if not ok:
                self.warnings.append(f"SMO for classes ({c0}, {c1}) hit max_iter={hp['max_iter']} before meeting tol")
            coef[m, idx] = alpha * yb
            self.bias[m] = b
            self.machines.append({"classes": (int(c0), int(c1)), "index": idx, "alpha": alpha,
                                  "y": yb, "b": b, "iterations": it, "converged": ok})
        sv = np.flatnonzero(np.any(coef != 0, axis=0))
        self.sv_X = ts.X[sv]
        self.dual_coef = coef[:, sv]
        self.present = present

    def decision_function(self, X) -> np.ndarray:
        """(n, n_machines) pairwise decision values; positive favours the second class."""
        X = self._check(X)
        return self._decisions(X)

    def _decisions(self, X):
        if self.sv_X.shape[0] == 0:
            return np.tile(self.bias, (X.shape[0], 1))
        return self._kernel(X, self.sv_X) @ self.dual_coef.T + self.bias

    def _predict(self, X):
        n = X.shape[0]
        if len(self.pairs) == 0:
            return np.full(n, int(self.present[0]), dtype=np.int64)
        D = self._decisions(X)
        winners = np.where(D > 0, self.pairs[:, 1], self.pairs[:, 0])
        votes = np.zeros((n, self.n_classes), dtype=np.int64)
        np.add.at(votes, (np.repeat(np.arange(n), len(self.pairs)), winners.ravel()), 1)
        return np.argmax(votes, axis=1)

    def _arrays(self):
        out = {"pairs": self.pairs, "bias": self.bias, "dual_coef": self.dual_coef, "present": self.present}
        if sp.issparse(self.sv_X):
            out.update(sv_data=self.sv_X.data, sv_indices=self.sv_X.indices, sv_indptr=self.sv_X.indptr,
                       sv_shape=np.array(self.sv_X.shape))
        else:
            out["sv_X"] = self.sv_X
        return out

    def _load_arrays(self, arrays):
        self.pairs, self.bias = arrays["pairs"], arrays["bias"]
        self.dual_coef, self.present = arrays["dual_coef"], arrays["present"]
        if "sv_X" in arrays:
            self.sv_X = arrays["sv_X"]
        else:
            self.sv_X = sp.csr_matrix((arrays["sv_data"], arrays["sv_indices"], arrays["sv_indptr"]),
                                      shape=tuple(arrays["sv_shape"]))
        self.machines = []
