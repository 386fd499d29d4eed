"""Sparse -> feature drop -> dense refit workflow and the NMF vs S2NMF comparison."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .clustering import DEFAULT_BINS, EntropyReport, assign_clusters, clustering_entropy
from .errors import InvalidConfig, NoFeaturesSurvive
from .masked import MaskedMatrix
from .nmf import FitReport, SolverConfig, as_masked, fit_nmf
from .pca import mean_impute
from .separative import fit_snmf

NULL_LOADING = 1e-10
VARIANTS = ("nmf", "snmf")
COMPARISON_ROWS = (
    "Full NMF",
    "Sparse NMF",
    "Restricted NMF",
    "Full S2NMF",
    "Sparse S2NMF",
    "Restricted S2NMF",
)


@dataclass
class RestrictedRun:
    variant: str
    sparse_model: object
    sparse_report: FitReport
    dropped_features: list
    kept_columns: np.ndarray
    restricted_matrix: MaskedMatrix
    restricted_model: object
    restricted_report: FitReport
    entropy: EntropyReport


@dataclass
class ComparisonRow:
    model: str
    dimension: int
    features: int
    h_sparsity: float
    rel_error: float
    entropy_delta: float | None = None


@dataclass
class ComparisonReport:
    rows: list

    def row(self, name: str) -> ComparisonRow:
        for r in self.rows:
            if r.model == name:
                return r
        raise KeyError(name)


def _fit(variant: str, x: MaskedMatrix, config: SolverConfig):
    if variant == "nmf":
        return fit_nmf(x, config)
    if variant == "snmf":
        return fit_snmf(x, config)
    raise InvalidConfig(f"unknown variant {variant!r}")


def null_loading_columns(H: np.ndarray) -> np.ndarray:
    """Indices of features whose loadings are all numerically zero."""
    top = float(np.max(H)) if H.size else 0.0
    return np.flatnonzero(np.all(H <= NULL_LOADING * top, axis=1))


def run_restricted(
    x,
    config: SolverConfig,
    variant: str = "nmf",
    impute_first: bool = True,
    bins: int = DEFAULT_BINS,
) -> RestrictedRun:
    """Fit sparse, drop the features with null loadings, refit dense on the rest."""
    if not config.sparsity_h > 0:
        raise InvalidConfig("the restricted workflow needs sparsity_h > 0")
    x = as_masked(x)
    if impute_first:
        x = MaskedMatrix(mean_impute(x), None, x.row_ids, x.col_ids)
    sparse_model, sparse_report = _fit(variant, x, config)

    dropped = null_loading_columns(sparse_model.H)
    kept = np.setdiff1d(np.arange(x.n_cols), dropped)
    if kept.size == 0:
        raise NoFeaturesSurvive("every feature has null loadings in the sparse fit")
    restricted = x.take_columns(kept)
    dense = dataclasses.replace(config, sparsity_h=0.0)
    model, report = _fit(variant, restricted, dense)
    entropy = clustering_entropy(restricted, assign_clusters(model), bins)
    return RestrictedRun(
        variant,
        sparse_model,
        sparse_report,
        [x.col_ids[j] for j in dropped],
        kept,
        restricted,
        model,
        report,
        entropy,
    )


def run_comparison(
    x,
    config: SolverConfig,
    impute: bool = True,
    bins: int = DEFAULT_BINS,
) -> ComparisonReport:
    """Full, sparse and restricted fits of NMF and S2NMF with a shared seed.

    ``config.sparsity_h`` is the level used by the sparse rows; the full and
    restricted rows run with sparsity 0.
    """
    x = as_masked(x)
    if impute:
        x = MaskedMatrix(mean_impute(x), None, x.row_ids, x.col_ids)
    dense = dataclasses.replace(config, sparsity_h=0.0)
    rows = []
    for variant, label in (("nmf", "NMF"), ("snmf", "S2NMF")):
        _, full = _fit(variant, x, dense)
        run = run_restricted(x, config, variant, impute_first=False, bins=bins)
        c = int(config.rank)
        rows.append(ComparisonRow(f"Full {label}", c, x.n_cols, 0.0, full.rel_sq_error))
        rows.append(
            ComparisonRow(f"Sparse {label}", c, x.n_cols, config.sparsity_h, run.sparse_report.rel_sq_error)
        )
        rows.append(
            ComparisonRow(
                f"Restricted {label}",
                c,
                int(run.kept_columns.size),
                0.0,
                run.restricted_report.rel_sq_error,
                run.entropy.entropy_delta,
            )
        )
    return ComparisonReport(rows)
