"""Leverage-based co-clustering and the entropy diagnostics built on it."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AllDiagonalsEmpty, BadBinCount, EmptyInput, MissingLabel, ShapeMismatch
from .masked import MaskedMatrix

SCORE_RANGE = (0.0, 100.0)
DEFAULT_BINS = 10


@dataclass(frozen=True, eq=False)
class ClusterAssignment:
    row_cluster: np.ndarray
    col_cluster: np.ndarray
    row_leverage: np.ndarray
    col_leverage: np.ndarray

    @property
    def n_clusters(self) -> int:
        return self.row_leverage.shape[1]


@dataclass
class DiagonalEntropy:
    cluster: int
    entropy: float
    size: int


@dataclass
class EntropyReport:
    whole_matrix_entropy: float
    diagonal_entropies: list
    clustering_entropy: float
    entropy_delta: float
    empty_clusters: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "whole_matrix_entropy": self.whole_matrix_entropy,
            "clustering_entropy": self.clustering_entropy,
            "entropy_delta": self.entropy_delta,
            "diagonal_entropies": [
                {"cluster": d.cluster, "entropy": d.entropy, "size": d.size}
                for d in self.diagonal_entropies
            ],
            "empty_clusters": list(self.empty_clusters),
        }


@dataclass(frozen=True, eq=False)
class IncidenceMatrix:
    group_labels: list
    cluster_count: int
    proportions: np.ndarray


def leverage(factor) -> np.ndarray:
    """Row-normalized squared coefficients; all-zero rows get ``1/c``."""
    a = np.asarray(factor, dtype=float)
    if a.ndim != 2 or a.shape[1] < 1:
        raise ShapeMismatch("leverage needs an m x c matrix with c >= 1")
    sq = a * a
    tot = sq.sum(axis=1, keepdims=True)
    out = np.full_like(sq, 1.0 / a.shape[1])
    nz = tot[:, 0] > 0
    out[nz] = sq[nz] / tot[nz]
    return out


def assign_clusters(model) -> ClusterAssignment:
    """Rows from ``W``, columns from ``H``; ties go to the lowest component."""
    rl = leverage(model.W)
    cl = leverage(model.H)
    return ClusterAssignment(np.argmax(rl, axis=1), np.argmax(cl, axis=1), rl, cl)


def reorder_for_heatmap(x: MaskedMatrix, a: ClusterAssignment) -> tuple[np.ndarray, np.ndarray]:
    if a.row_cluster.shape[0] != x.n_rows or a.col_cluster.shape[0] != x.n_cols:
        raise ShapeMismatch("assignment does not match the matrix shape")
    # lexsort is stable; last key is primary
    rows = np.lexsort((-a.row_leverage.max(axis=1), a.row_cluster))
    cols = np.lexsort((-a.col_leverage.max(axis=1), a.col_cluster))
    return rows, cols


def normalized_entropy(values, bins: int = DEFAULT_BINS, value_range=SCORE_RANGE) -> float:
    """Shannon entropy of the equal-width histogram, divided by ``log(bins)``.

    Bins span the fixed ``value_range`` so that entropies of different
    subsets are comparable; values outside it fall into the edge bins.
    """
    if int(bins) != bins or bins < 2:
        raise BadBinCount(f"bins must be an integer >= 2, got {bins}")
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise EmptyInput("cannot compute the entropy of no values")
    lo, hi = value_range
    counts, _ = np.histogram(np.clip(v, lo, hi), bins=int(bins), range=(lo, hi))
    p = counts[counts > 0] / v.size
    # + 0.0 turns a single-bin -0.0 into 0.0
    return float(-(p * np.log(p)).sum() / math.log(bins)) + 0.0


def clustering_entropy(x: MaskedMatrix, a: ClusterAssignment, bins: int = DEFAULT_BINS) -> EntropyReport:
    """Size-weighted entropy of the diagonal clusters versus the whole matrix.

    Diagonal cluster ``k`` holds the observed cells at rows and columns both
    assigned to ``k``; its size is the number of such cells.
    """
    if a.row_cluster.shape[0] != x.n_rows or a.col_cluster.shape[0] != x.n_cols:
        raise ShapeMismatch("assignment does not match the matrix shape")
    observed = x.values[x.mask]
    whole = normalized_entropy(observed, bins)
    diags, empty = [], []
    for k in range(a.n_clusters):
        r = a.row_cluster == k
        c = a.col_cluster == k
        block = x.mask[np.ix_(r, c)]
        vals = x.values[np.ix_(r, c)][block]
        if vals.size == 0:
            empty.append(k)
            continue
        diags.append(DiagonalEntropy(k, normalized_entropy(vals, bins), int(vals.size)))
    if not diags:
        raise AllDiagonalsEmpty("every diagonal cluster is empty")
    sizes = np.array([d.size for d in diags], dtype=float)
    ents = np.array([d.entropy for d in diags])
    mean = float((sizes * ents).sum() / sizes.sum())
    return EntropyReport(whole, diags, mean, mean - whole, empty)


def incidence(groups, a: ClusterAssignment) -> IncidenceMatrix:
    """Share of each group's rows that fall in each cluster."""
    labels = list(groups)
    if len(labels) != a.row_cluster.shape[0]:
        raise ShapeMismatch(f"{len(labels)} labels for {a.row_cluster.shape[0]} rows")
    for i, g in enumerate(labels):
        if g is None or g == "":
            raise MissingLabel(i)
    uniq = sorted(set(labels), key=str)
    index = {g: i for i, g in enumerate(uniq)}
    counts = np.zeros((len(uniq), a.n_clusters))
    for g, k in zip(labels, a.row_cluster):
        counts[index[g], k] += 1
    return IncidenceMatrix(uniq, a.n_clusters, counts / counts.sum(axis=1, keepdims=True))


def top_features(model, k: int, col_ids=None) -> list[list[tuple]]:
    """Per component, the ``k`` columns with the largest loadings.

    Ties are broken by column position.
    """
    H = np.asarray(model.H)
    f = H.shape[0]
    ids = list(range(f)) if col_ids is None else list(col_ids)
    pos = np.arange(f)
    out = []
    for j in range(H.shape[1]):
        order = np.lexsort((pos, -H[:, j]))[: max(int(k), 0)]
        out.append([(ids[i], float(H[i, j])) for i in order])
    return out
