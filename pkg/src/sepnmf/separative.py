"""Median separation, PosNegNMF and the 2-slice tensor factorization (S2NMF).

A score matrix is split around its column medians into two non-negative
deviation matrices, ``X = X_plus - X_minus + baseline``.  PosNegNMF factors
the concatenation ``[X_plus | X_minus]`` with a single NMF.  S2NMF stacks
the two deviation matrices as slices of an ``n x f x 2`` tensor and fits
the CP model ``X_s ~ W diag(Q[s]) H^T`` with ``W`` and ``H`` shared by
both slices; the sign of ``Q[0, k] - Q[1, k]`` tells whether component
``k`` describes scores above or below the median.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadSliceCount, ShapeMismatch
from .masked import (
    MaskedMatrix,
    Tensor3,
    column_medians,
    masked_residual_sq_norm,
    masked_sq_norm,
)
from .nmf import (
    EPS,
    FitReport,
    SolverConfig,
    _nndsvd,
    as_masked,
    fit_nmf,
    has_converged,
    normalize_columns,
    project_columns,
    ramped,
)

PLUS, MINUS = 0, 1
DIRECTION_DEADBAND = 1e-9


@dataclass(frozen=True, eq=False)
class Separation:
    x_plus: MaskedMatrix
    x_minus: MaskedMatrix
    baseline: np.ndarray

    def tensor(self) -> Tensor3:
        return Tensor3.stack([self.x_plus, self.x_minus])

    def concatenated(self) -> MaskedMatrix:
        cols = [(c, "+") for c in self.x_plus.col_ids] + [(c, "-") for c in self.x_minus.col_ids]
        return MaskedMatrix(
            np.hstack([self.x_plus.values, self.x_minus.values]),
            np.hstack([self.x_plus.mask, self.x_minus.mask]),
            self.x_plus.row_ids,
            cols,
        )


@dataclass(frozen=True, eq=False)
class PosNegModel:
    W: np.ndarray
    H_plus: np.ndarray
    H_minus: np.ndarray

    @property
    def rank(self) -> int:
        return self.W.shape[1]

    @property
    def H(self) -> np.ndarray:
        """Combined non-negative loadings used for column clustering."""
        return self.H_plus + self.H_minus

    def reconstruct_signed(self) -> np.ndarray:
        return self.W @ (self.H_plus - self.H_minus).T


@dataclass(frozen=True, eq=False)
class SnmfModel:
    W: np.ndarray
    H: np.ndarray
    Q: np.ndarray  # 2 x c, row 0 = plus slice, row 1 = minus slice
    directions: np.ndarray | None = None
    baseline: np.ndarray | None = None

    @property
    def rank(self) -> int:
        return self.W.shape[1]

    def slice_approx(self, s: int) -> np.ndarray:
        return (self.W * self.Q[s]) @ self.H.T


def separate(x) -> Separation:
    x = as_masked(x)
    baseline = column_medians(x)
    v = x.filled(0.0)
    plus = np.where(x.mask, np.maximum(0.0, v - baseline), 0.0)
    minus = np.where(x.mask, np.maximum(0.0, baseline - v), 0.0)
    return Separation(
        MaskedMatrix(plus, x.mask, x.row_ids, x.col_ids),
        MaskedMatrix(minus, x.mask, x.row_ids, x.col_ids),
        baseline,
    )


def directions_from_q(Q: np.ndarray) -> np.ndarray:
    diff = Q[PLUS] - Q[MINUS]
    band = DIRECTION_DEADBAND * float(np.max(Q)) if Q.size else 0.0
    d = np.sign(diff).astype(int)
    d[np.abs(diff) <= band] = 0
    return d


def fit_posneg_nmf(x, config: SolverConfig) -> tuple[PosNegModel, FitReport]:
    """NMF of ``[X_plus | X_minus]``; the loadings split into ``H_plus``/``H_minus``."""
    x = as_masked(x)
    sep = separate(x)
    model, report = fit_nmf(sep.concatenated(), config)
    f = x.n_cols
    pn = PosNegModel(model.W, model.H[:f], model.H[f:])
    norm = masked_sq_norm(x)
    if norm > 0:
        approx = pn.reconstruct_signed() + sep.baseline
        report.original_rel_sq_error = masked_residual_sq_norm(x, approx) / norm
    return pn, report


def _init_tensor_factors(t: Tensor3, config: SolverConfig):
    n, f, _ = t.shape
    c = int(config.rank)
    observed = t.values[t.mask]
    mean = float(observed.mean()) if observed.size else 0.0
    Q = np.ones((2, c))
    if mean <= 0.0:
        return np.full((n, c), EPS), np.full((f, c), EPS), Q
    # the deviation slices are block sparse, where an SVD start avoids
    # duplicated components far more reliably than a random one
    if config.init in ("svd", "auto"):
        summed = MaskedMatrix(t.filled(0.0).sum(axis=2), t.mask.any(axis=2))
        start = _nndsvd(summed, c)
        scale = np.sqrt(0.5)
        return start.W * scale, start.H * scale, Q
    rng = np.random.default_rng(config.seed)
    scale = 2.0 * np.sqrt(mean / c)
    W = np.maximum((1.0 - rng.random((n, c))) * scale, EPS)
    H = np.maximum((1.0 - rng.random((f, c))) * scale, EPS)
    return W, H, Q


def fit_ntf2(t: Tensor3, config: SolverConfig) -> tuple[SnmfModel, FitReport]:
    """Masked multiplicative updates for the 2-slice CP model.

    One sweep updates ``W``, then ``H`` (followed by the sparseness
    projection), then ``Q``; afterwards ``H`` and ``Q`` columns are scaled
    to unit norm with the scale moved into ``W``.  Slice terms are always
    accumulated as ``term(plus) + term(minus)`` so that swapping the slices
    swaps the rows of ``Q`` and nothing else.
    """
    if t.n_slices != 2:
        raise BadSliceCount(f"expected 2 slices, got {t.n_slices}")
    n, f, _ = t.shape
    config.validate(n, f)
    c = int(config.rank)
    norm = masked_sq_norm(t)
    if norm == 0.0:
        model = SnmfModel(np.zeros((n, c)), np.zeros((f, c)), np.zeros((2, c)))
        return model, FitReport(0.0, 0, True, [0.0])

    W, H, Q = _init_tensor_factors(t, config)
    X = [t.filled(0.0)[:, :, s] for s in (PLUS, MINUS)]
    full = bool(t.mask.all())
    M = None if full else [t.mask[:, :, s].astype(float) for s in (PLUS, MINUS)]

    def approx(s):
        return (W * Q[s]) @ H.T

    def weighted(s):
        a = approx(s)
        return a if full else M[s] * a

    trace: list[float] = []
    converged = False
    it = 0
    for it in range(1, config.max_iter + 1):
        # W
        Hq = [H * Q[s] for s in (PLUS, MINUS)]
        num = X[PLUS] @ Hq[PLUS] + X[MINUS] @ Hq[MINUS]
        if full:
            den = W @ (Hq[PLUS].T @ Hq[PLUS]) + W @ (Hq[MINUS].T @ Hq[MINUS])
        else:
            den = weighted(PLUS) @ Hq[PLUS] + weighted(MINUS) @ Hq[MINUS]
        W *= num / np.maximum(den, EPS)
        project_columns(W, ramped(config.sparsity_w, it, config.sparsity_ramp))

        # H
        Wq = [W * Q[s] for s in (PLUS, MINUS)]
        num = X[PLUS].T @ Wq[PLUS] + X[MINUS].T @ Wq[MINUS]
        if full:
            den = H @ (Wq[PLUS].T @ Wq[PLUS]) + H @ (Wq[MINUS].T @ Wq[MINUS])
        else:
            den = weighted(PLUS).T @ Wq[PLUS] + weighted(MINUS).T @ Wq[MINUS]
        H *= num / np.maximum(den, EPS)
        project_columns(H, ramped(config.sparsity_h, it, config.sparsity_ramp))

        # Q, one row per slice
        if full:
            gram = (W.T @ W) * (H.T @ H)
        for s in (PLUS, MINUS):
            num = np.einsum("ik,ij,jk->k", W, X[s], H)
            if full:
                den = gram @ Q[s]
            else:
                den = np.einsum("ik,ij,jk->k", W, weighted(s), H)
            Q[s] *= num / np.maximum(den, EPS)

        normalize_columns(H, W)
        normalize_columns(Q, W)

        err = 0.0
        for s in (PLUS, MINUS):
            r = X[s] - approx(s)
            if not full:
                r *= M[s]
            err += float(np.sum(r * r))
        trace.append(err / norm)
        if it >= config.sparsity_ramp and has_converged(trace, config.tol):
            converged = True
            break

    dead = [int(k) for k in np.flatnonzero(np.all(W <= EPS, axis=0))]
    return SnmfModel(W, H, Q), FitReport(trace[-1], it, converged, trace, dead)


def fit_snmf(x, config: SolverConfig) -> tuple[SnmfModel, FitReport]:
    """Separate around column medians, then fit the 2-slice model.

    The headline error is relative to the stacked deviation tensor; the
    error on the reconstructed original scores is reported alongside.
    """
    x = as_masked(x)
    sep = separate(x)
    model, report = fit_ntf2(sep.tensor(), config)
    model = SnmfModel(model.W, model.H, model.Q, directions_from_q(model.Q), sep.baseline)
    norm = masked_sq_norm(x)
    if norm > 0:
        report.original_rel_sq_error = (
            masked_residual_sq_norm(x, reconstruct_original(model, sep.baseline)) / norm
        )
    return model, report


def reconstruct_original(model: SnmfModel, baseline=None) -> np.ndarray:
    """``W diag(Q_plus - Q_minus) H^T + baseline``; may contain negative entries."""
    if baseline is None:
        baseline = model.baseline
    baseline = np.asarray(baseline, dtype=float)
    if baseline.shape != (model.H.shape[0],) or model.Q.shape != (2, model.W.shape[1]):
        raise ShapeMismatch("baseline / factor shapes are inconsistent")
    return (model.W * (model.Q[PLUS] - model.Q[MINUS])) @ model.H.T + baseline[None, :]
