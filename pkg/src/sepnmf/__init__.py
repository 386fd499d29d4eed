"""Separative non-negative matrix factorization for score matrices with missing cells."""

from .clustering import (
    ClusterAssignment,
    EntropyReport,
    assign_clusters,
    clustering_entropy,
    incidence,
    leverage,
    normalized_entropy,
    reorder_for_heatmap,
    top_features,
)
from .errors import InputError, SepNMFError, SolverError
from .ingest import Dataset, load_csv, profile, save_csv
from .masked import (
    MaskedMatrix,
    Tensor3,
    column_medians,
    fill_rate_by_column,
    fill_rate_by_group,
    masked_residual_sq_norm,
    masked_sq_norm,
)
from .nmf import FitReport, NmfModel, SolverConfig, fit_nmf, relative_sq_error
from .pca import PcaModel, components_needed, fit_pca, signed_coefficient_profile
from .pipeline import ComparisonReport, RestrictedRun, run_comparison, run_restricted
from .separative import (
    PosNegModel,
    Separation,
    SnmfModel,
    fit_ntf2,
    fit_posneg_nmf,
    fit_snmf,
    reconstruct_original,
    separate,
)
from .sparsity import hoyer_sparsity, project_sparsity
from .synth import GroundTruth, SynthSpec, generate

__version__ = "0.1.0"
