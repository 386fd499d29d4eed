"""Seeded generator of planted low-rank score matrices.

Scores are ``baseline + deviation_scale * W* diag(d*) H*^T + noise``,
clipped to [0, 100].  ``W*`` and ``H*`` are block-structured: every row and
every informative column has one dominant component, which defines the
ground-truth clusters.  ``d*`` holds the direction of each component
(+1 raises scores, -1 lowers them).  Pure-noise columns carry the baseline
plus noise only.  Rows get sector-like group labels that follow the row
clusters only partially.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidSpec
from .ingest import Dataset
from .masked import MaskedMatrix


@dataclass(frozen=True)
class SynthSpec:
    n_rows: int = 500
    n_cols: int = 77
    rank: int = 6
    noise_level: float = 2.0
    missing_rate: float = 0.0
    two_sided: bool = True
    noise_features: int = 20
    seed: int = 0
    baseline_level: float = 50.0
    deviation_scale: float = 35.0
    n_groups: int = 11
    group_alignment: float = 0.6
    dominant_range: tuple = (0.6, 1.0)
    off_range: tuple = (0.0, 0.1)

    def validate(self) -> None:
        n_inf = self.n_cols - self.noise_features
        if self.n_rows < 1 or self.n_cols < 1 or self.rank < 1:
            raise InvalidSpec("n_rows, n_cols and rank must be positive")
        if self.noise_features < 0 or n_inf < 1:
            raise InvalidSpec("noise_features must leave at least one informative column")
        if self.rank > min(self.n_rows, n_inf):
            raise InvalidSpec(
                f"rank {self.rank} exceeds min(n_rows, informative columns) = {min(self.n_rows, n_inf)}"
            )
        if self.noise_level < 0:
            raise InvalidSpec("noise_level must be >= 0")
        if not 0.0 <= self.missing_rate < 1.0:
            raise InvalidSpec("missing_rate must lie in [0, 1)")
        if self.n_groups < 1:
            raise InvalidSpec("n_groups must be >= 1")
        if not 0.0 <= self.group_alignment <= 1.0:
            raise InvalidSpec("group_alignment must lie in [0, 1]")
        if self.deviation_scale < 0:
            raise InvalidSpec("deviation_scale must be >= 0")


@dataclass(frozen=True, eq=False)
class GroundTruth:
    W: np.ndarray
    H: np.ndarray
    directions: np.ndarray
    relevance: np.ndarray  # True for informative columns
    row_cluster: np.ndarray
    col_cluster: np.ndarray  # -1 for noise columns


def _block_factor(rng, clusters, rank, dominant, off):
    m = clusters.shape[0]
    out = rng.uniform(off[0], off[1], size=(m, rank))
    rows = np.flatnonzero(clusters >= 0)
    out[rows, clusters[rows]] = rng.uniform(dominant[0], dominant[1], size=rows.size)
    out[clusters < 0] = 0.0
    return out


def generate(spec: SynthSpec) -> tuple[Dataset, GroundTruth]:
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    n, f, c = spec.n_rows, spec.n_cols, spec.rank
    n_inf = f - spec.noise_features

    row_cluster = rng.permutation(np.arange(n) % c)
    col_cluster = np.concatenate(
        [np.sort(np.arange(n_inf) % c), np.full(spec.noise_features, -1)]
    )
    W = _block_factor(rng, row_cluster, c, spec.dominant_range, spec.off_range)
    H = _block_factor(rng, col_cluster, c, spec.dominant_range, spec.off_range)
    if spec.two_sided:
        directions = rng.permutation(np.where(np.arange(c) % 2 == 0, 1, -1))
    else:
        directions = np.ones(c, dtype=int)

    signal = spec.deviation_scale * (W * directions) @ H.T
    noise = spec.noise_level * rng.standard_normal((n, f))
    values = np.clip(spec.baseline_level + signal + noise, 0.0, 100.0)
    mask = rng.random((n, f)) >= spec.missing_rate

    # sectors: the row cluster's home group with probability `group_alignment`
    home = (row_cluster * spec.n_groups) // c
    aligned = rng.random(n) < spec.group_alignment
    group_idx = np.where(aligned, home, rng.integers(0, spec.n_groups, size=n))

    row_ids = [f"r{i:04d}" for i in range(n)]
    col_ids = [f"t{k}_{j:03d}" if k >= 0 else f"noise_{j:03d}" for j, k in enumerate(col_cluster)]
    prefixes = [cid.split("_")[0] + "_" for cid in col_ids]
    groups = [f"G{g:02d}" for g in group_idx]
    matrix = MaskedMatrix(np.where(mask, values, np.nan), mask, row_ids, col_ids)
    truth = GroundTruth(W, H, directions, col_cluster >= 0, row_cluster, col_cluster)
    return Dataset(matrix, groups, prefixes), truth
