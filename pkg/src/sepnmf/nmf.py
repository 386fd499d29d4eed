"""Missing-value aware NMF by masked multiplicative updates.

``X ~ W H^T`` with ``W`` (n x c) and ``H`` (f x c) non-negative, minimizing
the squared residual over observed cells only.  Optional sparseness
targets are enforced by projecting every column of ``H`` (or ``W``) onto
the requested Hoyer level after each update.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidConfig, InvalidInput, RankTooLarge, ZeroNorm
from .masked import MaskedMatrix, masked_residual_sq_norm, masked_sq_norm
from .sparsity import project_sparsity

logger = logging.getLogger(__name__)

EPS = 1e-12
CONVERGENCE_WINDOW = 10
INITS = ("auto", "random", "svd")


@dataclass(frozen=True)
class SolverConfig:
    rank: int
    max_iter: int = 2000
    tol: float = 1e-6
    seed: int = 0
    sparsity_h: float = 0.0
    sparsity_w: float = 0.0
    init: str = "auto"  # "random", "svd", or "auto" (random for NMF, svd for the tensor model)
    sparsity_ramp: int = 0

    def validate(self, n_rows: int | None = None, n_cols: int | None = None) -> None:
        if int(self.rank) != self.rank or self.rank < 1:
            raise InvalidConfig(f"rank must be a positive integer, got {self.rank}")
        if self.max_iter < 1:
            raise InvalidConfig("max_iter must be >= 1")
        if not self.tol > 0:
            raise InvalidConfig("tol must be > 0")
        for name in ("sparsity_h", "sparsity_w"):
            s = getattr(self, name)
            if not 0.0 <= s < 1.0:
                raise InvalidConfig(f"{name} must lie in [0, 1), got {s}")
        if self.init not in INITS:
            raise InvalidConfig(f"unknown init {self.init!r}")
        if n_rows is not None and n_cols is not None and self.rank > min(n_rows, n_cols):
            raise RankTooLarge(
                f"rank {self.rank} exceeds min(n_rows, n_cols) = {min(n_rows, n_cols)}"
            )


@dataclass(frozen=True, eq=False)
class NmfModel:
    W: np.ndarray
    H: np.ndarray

    @property
    def rank(self) -> int:
        return self.W.shape[1]

    def reconstruct(self) -> np.ndarray:
        return self.W @ self.H.T


@dataclass
class FitReport:
    rel_sq_error: float
    iterations: int
    converged: bool
    error_trace: list = field(default_factory=list)
    dead_components: list = field(default_factory=list)
    # filled by the separative fits: error measured on the original scores
    original_rel_sq_error: float | None = None

    def to_dict(self) -> dict:
        d = {
            "rel_sq_error": self.rel_sq_error,
            "iterations": self.iterations,
            "converged": self.converged,
            "dead_components": list(self.dead_components),
            "error_trace": [float(e) for e in self.error_trace],
        }
        if self.original_rel_sq_error is not None:
            d["original_rel_sq_error"] = self.original_rel_sq_error
        return d


def as_masked(x) -> MaskedMatrix:
    if isinstance(x, MaskedMatrix):
        return x
    return MaskedMatrix(np.asarray(x, dtype=float))


def init_factors(x: MaskedMatrix, config: SolverConfig) -> NmfModel:
    """Strictly positive starting factors.

    ``random`` (and ``auto``) draws ``W`` and ``H`` uniformly in ``(eps, scale]`` with the
    scale chosen so that the mean of ``W H^T`` matches the mean observed
    value; ``svd`` is NNDSVD on the column-mean filled matrix.
    """
    x = as_masked(x)
    n, f = x.shape
    c = int(config.rank)
    observed = x.values[x.mask]
    mean = float(observed.mean()) if observed.size else 0.0
    if mean <= 0.0:
        return NmfModel(np.full((n, c), EPS), np.full((f, c), EPS))
    if config.init == "svd":
        return _nndsvd(x, c)
    rng = np.random.default_rng(config.seed)
    scale = 2.0 * np.sqrt(mean / c)
    W = np.maximum((1.0 - rng.random((n, c))) * scale, EPS)
    H = np.maximum((1.0 - rng.random((f, c))) * scale, EPS)
    return NmfModel(W, H)


def _nndsvd(x: MaskedMatrix, c: int) -> NmfModel:
    counts = x.mask.sum(axis=0)
    col_mean = np.divide(x.filled(0.0).sum(axis=0), counts, out=np.zeros(x.n_cols), where=counts > 0)
    a = np.where(x.mask, x.values, col_mean[None, :])
    U, S, Vt = np.linalg.svd(a, full_matrices=False)
    W = np.zeros((x.n_rows, c))
    H = np.zeros((x.n_cols, c))
    W[:, 0] = np.sqrt(S[0]) * np.abs(U[:, 0])
    H[:, 0] = np.sqrt(S[0]) * np.abs(Vt[0])
    for j in range(1, c):
        u, v = U[:, j], Vt[j]
        up, un = np.maximum(u, 0), np.maximum(-u, 0)
        vp, vn = np.maximum(v, 0), np.maximum(-v, 0)
        nup, nun = np.linalg.norm(up), np.linalg.norm(un)
        nvp, nvn = np.linalg.norm(vp), np.linalg.norm(vn)
        if nup * nvp >= nun * nvn:
            uu, vv, sigma = up / max(nup, EPS), vp / max(nvp, EPS), nup * nvp
        else:
            uu, vv, sigma = un / max(nun, EPS), vn / max(nvn, EPS), nun * nvn
        scale = np.sqrt(S[j] * sigma)
        W[:, j] = scale * uu
        H[:, j] = scale * vv
    return NmfModel(np.maximum(W, EPS), np.maximum(H, EPS))


def relative_sq_error(x, model: NmfModel) -> float:
    x = as_masked(x)
    norm = masked_sq_norm(x)
    if norm == 0.0:
        raise ZeroNorm("data has no nonzero observed entry")
    return masked_residual_sq_norm(x, model.reconstruct()) / norm


def project_columns(A: np.ndarray, target: float) -> None:
    """Replace every nonzero column of ``A`` (in place) by its sparse projection."""
    if target <= 0.0 or A.shape[0] < 2:
        return
    for k in range(A.shape[1]):
        if np.any(A[:, k] > 0.0):
            A[:, k] = project_sparsity(A[:, k], target)


def normalize_columns(A: np.ndarray, B: np.ndarray) -> None:
    """Scale columns of ``A`` to unit L2 norm, pushing the scale into ``B``."""
    norms = np.linalg.norm(A, axis=0)
    ok = norms > 0
    A[:, ok] /= norms[ok]
    B[:, ok] *= norms[ok]


def ramped(target: float, it: int, ramp: int) -> float:
    """Sparseness level applied at iteration ``it`` (1-based)."""
    if target <= 0.0 or ramp <= 0 or it >= ramp:
        return target
    return target * it / ramp


def has_converged(trace: list, tol: float) -> bool:
    if trace[-1] == 0.0:
        return True
    if len(trace) <= CONVERGENCE_WINDOW:
        return False
    ref = trace[-1 - CONVERGENCE_WINDOW]
    return abs(ref - trace[-1]) <= tol * ref


class _MaskedData:
    """Zero-filled data plus mask, with a fast path for complete data."""

    def __init__(self, x: MaskedMatrix):
        self.X = x.filled(0.0)
        self.full = x.fully_observed
        self.M = None if self.full else x.mask.astype(float)

    def residual(self, approx: np.ndarray) -> np.ndarray:
        r = self.X - approx
        if self.M is not None:
            r *= self.M
        return r

    def update_left(self, A: np.ndarray, B: np.ndarray) -> None:
        """One multiplicative step on ``A`` for ``X ~ A B^T``."""
        num = self.X @ B
        if self.full:
            den = A @ (B.T @ B)
        else:
            den = (self.M * (A @ B.T)) @ B
        A *= num / np.maximum(den, EPS)

    def update_right(self, A: np.ndarray, B: np.ndarray) -> None:
        """One multiplicative step on ``B`` for ``X ~ A B^T``."""
        num = self.X.T @ A
        if self.full:
            den = B @ (A.T @ A)
        else:
            den = (self.M * (A @ B.T)).T @ A
        B *= num / np.maximum(den, EPS)


def _reseed(data: _MaskedData, W: np.ndarray, H: np.ndarray, k: int) -> None:
    """Restart component ``k`` on the row with the largest residual.

    The new component only adds the positive part of that row's residual,
    so the objective cannot increase.
    """
    W[:, k] = 0.0
    H[:, k] = 0.0
    r = data.residual(W @ H.T)
    i = int(np.argmax(np.sum(r * r, axis=1)))
    h = np.maximum(r[i], 0.0)
    if not np.any(h > 0):
        W[:, k] = EPS
        H[:, k] = EPS
        return
    W[:, k] = EPS
    W[i, k] = 1.0
    H[:, k] = h


def fit_nmf(x, config: SolverConfig, init: NmfModel | None = None) -> tuple[NmfModel, FitReport]:
    """Fit ``X ~ W H^T`` on the observed entries of ``x``.

    Each iteration updates ``W`` then ``H`` multiplicatively, projects their
    columns onto the sparseness targets when those are positive, and records
    the relative squared error.  Iteration stops once the error moved by less
    than ``tol`` (relative) over the last 10 iterations.
    """
    x = as_masked(x)
    n, f = x.shape
    config.validate(n, f)
    c = int(config.rank)
    norm = masked_sq_norm(x)
    if norm == 0.0:
        model = NmfModel(np.zeros((n, c)), np.zeros((f, c)))
        return model, FitReport(0.0, 0, True, [0.0])

    start = init if init is not None else init_factors(x, config)
    W = np.array(start.W, dtype=float)
    H = np.array(start.H, dtype=float)
    data = _MaskedData(x)

    trace: list[float] = []
    reseeded: set[int] = set()
    dead: list[int] = []
    converged = False
    it = 0
    for it in range(1, config.max_iter + 1):
        data.update_left(W, H)
        project_columns(W, ramped(config.sparsity_w, it, config.sparsity_ramp))
        data.update_right(W, H)
        project_columns(H, ramped(config.sparsity_h, it, config.sparsity_ramp))
        normalize_columns(H, W)

        r = data.residual(W @ H.T)
        trace.append(float(np.sum(r * r)) / norm)
        if it >= config.sparsity_ramp and has_converged(trace, config.tol):
            converged = True
            break

        for k in np.flatnonzero(np.all(W <= EPS, axis=0)):
            if k in dead:
                continue
            if k in reseeded:
                dead.append(int(k))
                continue
            logger.debug("reseeding dead component %d at iteration %d", k, it)
            reseeded.add(int(k))
            _reseed(data, W, H, int(k))

    report = FitReport(trace[-1], it, converged, trace, sorted(dead))
    return NmfModel(W, H), report
