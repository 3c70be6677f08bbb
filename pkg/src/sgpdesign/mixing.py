"""Mixing matrices: uniform column-stochastic weights, Metropolis–Hastings, diagnostics.

Convention: ``W[i, j]`` is the weight receiver ``i`` applies to transmitter
``j``'s message, so column ``j`` describes node ``j``'s broadcast.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import AsymmetricInput
from .graphs import BaseTopology, Digraph

COLUMN_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class MixingMatrix:
    weights: np.ndarray
    support: Digraph

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    def column(self, j: int) -> list[tuple[int, float]]:
        """Nonzero ``(row, weight)`` entries of column ``j``."""
        col = self.weights[:, j]
        return [(int(i), float(col[i])) for i in np.flatnonzero(col)]

    def is_column_stochastic(self, tol: float = COLUMN_TOL) -> bool:
        return bool(np.all(self.weights >= 0) and np.allclose(self.weights.sum(axis=0), 1.0, rtol=0, atol=tol))

    def is_symmetric(self, tol: float = COLUMN_TOL) -> bool:
        return bool(np.allclose(self.weights, self.weights.T, rtol=0, atol=tol))

    def to_text(self) -> str:
        lines = [str(self.n)]
        for j in range(self.n):
            for i, w in self.column(j):
                lines.append(f"{i} {j} {w!r}")
        return "\n".join(lines) + "\n"

    def write(self, path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def from_text(cls, text: str) -> "MixingMatrix":
        rows = [ln.split() for ln in text.splitlines() if ln.strip()]
        n = int(rows[0][0])
        w = np.zeros((n, n))
        for i, j, val in rows[1:]:
            w[int(i), int(j)] = float(val)
        links = [(j, i) for i, j in zip(*np.nonzero(w)) if i != j]
        return cls(w, Digraph(n, links))


def uniform_column_stochastic(g_a: Digraph) -> MixingMatrix:
    """Each node splits unit weight equally over itself and its out-neighbors."""
    n = g_a.n
    w = np.zeros((n, n))
    for j in range(n):
        share = 1.0 / (g_a.out_degree(j) + 1)
        w[j, j] = share
        for i in g_a.out_neighbors(j):
            w[i, j] = share
    return MixingMatrix(w, g_a)


def metropolis_hastings(base: BaseTopology) -> MixingMatrix:
    """Symmetric doubly stochastic weights ``1/(1 + max(deg_i, deg_j))`` on base edges."""
    g = base.undirected
    n = g.n
    w = np.zeros((n, n))
    for i, j in g.edges:
        w[i, j] = w[j, i] = 1.0 / (1 + max(g.degree(i), g.degree(j)))
    w[np.diag_indices(n)] = 1.0 - w.sum(axis=1)
    return MixingMatrix(w, base.as_digraph())


def min_weight(w: MixingMatrix) -> float:
    """Smallest strictly positive entry, diagonal included."""
    pos = w.weights[w.weights > 0]
    if pos.size == 0:
        raise ValueError("mixing matrix has no positive entries")
    return float(pos.min())


def spectral_gap_param(w: MixingMatrix, tol: float = 1e-9, max_iter: int = 10_000) -> float:
    """``rho = max(|lambda_2|, |lambda_n|)`` of a symmetric mixing matrix.

    Power iteration on ``M^2`` with ``M = W - 11^T/n``: the top eigenvalue of
    ``M^2`` is ``rho^2`` even when ``+rho`` and ``-rho`` are both eigenvalues.
    """
    if not w.is_symmetric():
        raise AsymmetricInput("spectral gap parameter is defined for symmetric matrices only")
    n = w.n
    m = w.weights - np.full((n, n), 1.0 / n)
    m2 = m @ m
    # a generic (fixed-seed) start; structured starts can be orthogonal to the
    # top eigenvector on symmetric graphs
    x = np.random.default_rng(0x5EED).standard_normal(n)
    x /= np.linalg.norm(x)
    lam = 0.0
    for _ in range(max_iter):
        y = m2 @ x
        ny = np.linalg.norm(y)
        if ny == 0.0:
            return 0.0
        new = float(x @ y)
        x = y / ny
        if abs(new - lam) <= tol * max(abs(new), 1e-300):
            lam = new
            break
        lam = new
    return float(np.sqrt(max(lam, 0.0)))
