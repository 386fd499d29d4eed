"""PCA baseline on mean-imputed data."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInput, EmptyColumn, InvalidInput
from .masked import MaskedMatrix

CUMULATIVE_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class PcaModel:
    components: np.ndarray  # f x c, one unit-norm loading vector per column
    explained_variance: np.ndarray
    explained_variance_ratio: np.ndarray
    cumulative_ratio: np.ndarray
    mean: np.ndarray
    scale: np.ndarray | None = None

    @property
    def rank(self) -> int:
        return int(np.sum(self.explained_variance_ratio > CUMULATIVE_SLACK))


def mean_impute(x: MaskedMatrix) -> np.ndarray:
    """Replace missing cells by the mean of the column's observed values."""
    counts = x.mask.sum(axis=0)
    for j in np.flatnonzero(counts == 0):
        raise EmptyColumn(x.col_ids[j])
    means = x.filled(0.0).sum(axis=0) / counts
    return np.where(x.mask, x.values, means[None, :])


def fit_pca(x, standardize: bool = False) -> PcaModel:
    """Eigendecomposition of the column covariance of ``x``.

    Components are sorted by decreasing eigenvalue and signed so that the
    largest-magnitude coefficient is positive.
    """
    if isinstance(x, MaskedMatrix):
        x = mean_impute(x)
    a = np.asarray(x, dtype=float)
    if a.ndim != 2 or a.shape[0] < 2:
        raise InvalidInput("PCA needs at least two rows")
    mean = a.mean(axis=0)
    y = a - mean
    scale = None
    if standardize:
        scale = y.std(axis=0, ddof=1)
        if np.any(scale == 0):
            raise DegenerateInput("cannot standardize a zero-variance column")
        y = y / scale
    cov = (y.T @ y) / (a.shape[0] - 1)
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(-evals, kind="stable")
    evals = np.clip(evals[order], 0.0, None)
    evecs = evecs[:, order]
    total = evals.sum()
    if total <= 0.0:
        raise DegenerateInput("data has zero variance")
    lead = np.argmax(np.abs(evecs), axis=0)
    signs = np.sign(evecs[lead, np.arange(evecs.shape[1])])
    signs[signs == 0] = 1.0
    evecs = evecs * signs
    ratio = evals / total
    return PcaModel(evecs, evals, ratio, np.cumsum(ratio), mean, scale)


def components_needed(model: PcaModel, threshold: float) -> int:
    """Smallest number of leading components explaining ``threshold`` of the variance."""
    if not 0.0 < threshold <= 1.0:
        raise InvalidInput(f"threshold must lie in (0, 1], got {threshold}")
    hit = np.flatnonzero(model.cumulative_ratio >= threshold - CUMULATIVE_SLACK)
    return int(hit[0]) + 1 if hit.size else len(model.cumulative_ratio)


def signed_coefficient_profile(model: PcaModel, k: int, rel_threshold: float = 0.1):
    """For each of the first ``k`` components: its coefficients sorted in
    decreasing order and how many exceed ``rel_threshold`` of the largest
    absolute coefficient in magnitude.
    """
    if k > model.components.shape[1]:
        raise InvalidInput(f"k={k} exceeds the number of components")
    out = []
    for j in range(k):
        v = model.components[:, j]
        big = np.abs(v) > rel_threshold * np.abs(v).max()
        out.append((np.sort(v)[::-1], int(big.sum())))
    return out
