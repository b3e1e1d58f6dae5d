"""Friedman omnibus test, pairwise rank-sum tests with Holm correction, and
the +/-/~ significance matrices built from them."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy import stats as st

BETTER, WORSE, SAME = "+", "-", "~"


def friedman(samples) -> tuple[float, float]:
    """Friedman chi-square over a ``(n_blocks, k)`` table, tie-corrected.

    Works for ``k = 2`` too (scipy's version insists on three groups).
    Returns ``(statistic, p_value)``; a table with no variation gives p = 1.
    """
    x = np.asarray(samples, dtype=float)
    n, k = x.shape
    if k < 2 or n < 1:
        raise ValueError("need at least two treatments and one block")
    ranks = np.apply_along_axis(st.rankdata, 1, x)
    r = ranks.sum(axis=0)
    ties = 0.0
    for row in x:
        _, counts = np.unique(row, return_counts=True)
        ties += np.sum(counts ** 3 - counts)
    denom = 1.0 - ties / (n * k * (k * k - 1))
    if denom <= 0:
        return 0.0, 1.0
    chi2 = (12.0 / (n * k * (k + 1)) * np.sum(r ** 2) - 3.0 * n * (k + 1)) / denom
    return float(chi2), float(st.chi2.sf(chi2, k - 1))


def holm(pvalues) -> np.ndarray:
    """Holm step-down adjusted p-values (monotone, capped at 1)."""
    p = np.asarray(pvalues, dtype=float)
    m = len(p)
    order = np.argsort(p, kind="stable")
    adj = np.empty(m)
    running = 0.0
    for step, idx in enumerate(order):
        running = max(running, min(1.0, (m - step) * p[idx]))
        adj[idx] = running
    return adj


@dataclass
class SignificanceMatrix:
    algorithms: list[str]
    cells: list[list[str]]
    friedman_p: float = 1.0

    def cell(self, row: str, col: str) -> str:
        return self.cells[self.algorithms.index(row)][self.algorithms.index(col)]

    def wins(self, algorithm: str) -> int:
        return self.cells[self.algorithms.index(algorithm)].count(BETTER)

    def losses(self, algorithm: str) -> int:
        return self.cells[self.algorithms.index(algorithm)].count(WORSE)


def significance_matrix(samples: dict[str, np.ndarray], alpha: float = 0.05) -> SignificanceMatrix:
    """Compare algorithms from equally long per-run metric samples.

    Pairwise tests are run only when the Friedman test rejects at ``alpha``.
    A cell is ``+`` when the row algorithm is significantly better than the
    column one after Holm correction, ``-`` when worse and ``~`` otherwise.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must be in (0, 1)")
    names = list(samples)
    lengths = {len(v) for v in samples.values()}
    if len(lengths) != 1:
        raise ValueError("unequal run counts across algorithms")
    k = len(names)
    cells = [[SAME] * k for _ in range(k)]
    if k < 2:
        return SignificanceMatrix(names, cells)
    table = np.column_stack([np.asarray(samples[a], dtype=float) for a in names])
    _, p_f = friedman(table)
    if p_f >= alpha:
        return SignificanceMatrix(names, cells, p_f)
    pairs = list(combinations(range(k), 2))
    stat, raw = [], []
    for i, j in pairs:
        res = st.ranksums(table[:, i], table[:, j])
        stat.append(res.statistic)
        raw.append(res.pvalue if np.isfinite(res.pvalue) else 1.0)
    adj = holm(raw)
    for (i, j), s, p in zip(pairs, stat, adj):
        if p < alpha and s != 0:
            cells[i][j], cells[j][i] = (BETTER, WORSE) if s > 0 else (WORSE, BETTER)
    return SignificanceMatrix(names, cells, p_f)
