"""Non-negative matrices and 3-way tensors with explicit missing-entry masks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import EmptyColumn, InvalidInput, MissingLabel, ShapeMismatch


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class MaskedMatrix:
    """Non-negative matrix whose missing cells are flagged by ``mask == False``.

    Values at missing positions are kept as given but never read by any
    computation in this package; use :meth:`filled` to get a dense copy.
    """

    values: np.ndarray
    mask: np.ndarray
    row_ids: tuple
    col_ids: tuple

    def __init__(self, values, mask=None, row_ids=None, col_ids=None):
        values = np.asarray(values, dtype=float)
        if values.ndim != 2:
            raise ShapeMismatch(f"expected a 2-d array, got shape {values.shape}")
        if mask is None:
            mask = np.isfinite(values)
        else:
            mask = np.asarray(mask, dtype=bool)
            if mask.shape != values.shape:
                raise ShapeMismatch(f"mask shape {mask.shape} != values shape {values.shape}")
            mask = mask & np.isfinite(values)
        observed = values[mask]
        if observed.size and observed.min() < 0:
            i, j = np.argwhere(mask & (np.where(mask, values, 0.0) < 0))[0]
            raise InvalidInput(f"negative observed value {values[i, j]!r} at ({i}, {j})")
        n, f = values.shape
        row_ids = tuple(range(n)) if row_ids is None else tuple(row_ids)
        col_ids = tuple(range(f)) if col_ids is None else tuple(col_ids)
        if len(row_ids) != n or len(col_ids) != f:
            raise ShapeMismatch("identifier lists do not match the matrix shape")
        if len(set(row_ids)) != n:
            raise InvalidInput("row identifiers are not unique")
        if len(set(col_ids)) != f:
            raise InvalidInput("column identifiers are not unique")
        object.__setattr__(self, "values", _frozen(values, float))
        object.__setattr__(self, "mask", _frozen(mask, bool))
        object.__setattr__(self, "row_ids", row_ids)
        object.__setattr__(self, "col_ids", col_ids)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]

    @property
    def fully_observed(self) -> bool:
        return bool(self.mask.all())

    def filled(self, fill_value: float = 0.0) -> np.ndarray:
        return np.where(self.mask, self.values, fill_value)

    def take_columns(self, idx) -> "MaskedMatrix":
        idx = np.asarray(idx, dtype=int)
        return MaskedMatrix(
            self.values[:, idx],
            self.mask[:, idx],
            self.row_ids,
            [self.col_ids[j] for j in idx],
        )

    def take_rows(self, idx) -> "MaskedMatrix":
        idx = np.asarray(idx, dtype=int)
        return MaskedMatrix(
            self.values[idx],
            self.mask[idx],
            [self.row_ids[i] for i in idx],
            self.col_ids,
        )


@dataclass(frozen=True, eq=False)
class Tensor3:
    """``n_rows x n_cols x n_slices`` non-negative tensor with a mask."""

    values: np.ndarray
    mask: np.ndarray

    def __init__(self, values, mask=None):
        values = np.asarray(values, dtype=float)
        if values.ndim != 3:
            raise ShapeMismatch(f"expected a 3-d array, got shape {values.shape}")
        if mask is None:
            mask = np.isfinite(values)
        else:
            mask = np.asarray(mask, dtype=bool)
            if mask.shape != values.shape:
                raise ShapeMismatch(f"mask shape {mask.shape} != values shape {values.shape}")
            mask = mask & np.isfinite(values)
        observed = values[mask]
        if observed.size and observed.min() < 0:
            raise InvalidInput("tensor has negative observed entries")
        object.__setattr__(self, "values", _frozen(values, float))
        object.__setattr__(self, "mask", _frozen(mask, bool))

    @classmethod
    def stack(cls, slices: Sequence[MaskedMatrix]) -> "Tensor3":
        shapes = {s.shape for s in slices}
        if len(shapes) != 1:
            raise ShapeMismatch(f"slices have different shapes: {sorted(shapes)}")
        values = np.stack([s.values for s in slices], axis=2)
        mask = np.stack([s.mask for s in slices], axis=2)
        return cls(values, mask)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.values.shape

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]

    @property
    def n_slices(self) -> int:
        return self.values.shape[2]

    def filled(self, fill_value: float = 0.0) -> np.ndarray:
        return np.where(self.mask, self.values, fill_value)


def masked_sq_norm(m) -> float:
    """Sum of squares over the observed entries of a matrix or tensor."""
    return float(np.sum(np.square(m.filled(0.0))))


def masked_residual_sq_norm(x, approx) -> float:
    approx = np.asarray(approx, dtype=float)
    if approx.shape != x.shape:
        raise ShapeMismatch(f"approximation shape {approx.shape} != data shape {x.shape}")
    r = np.where(x.mask, x.values - approx, 0.0)
    return float(np.sum(r * r))


def column_medians(m: MaskedMatrix) -> np.ndarray:
    """Median of the observed values in each column.

    Even counts use the midpoint of the two central order statistics.
    """
    out = np.empty(m.n_cols)
    for j in range(m.n_cols):
        col = m.values[m.mask[:, j], j]
        if col.size == 0:
            raise EmptyColumn(m.col_ids[j])
        out[j] = np.median(col)
    return out


def fill_rate_by_column(m: MaskedMatrix) -> np.ndarray:
    if m.n_rows == 0:
        return np.zeros(m.n_cols)
    return m.mask.sum(axis=0) / m.n_rows


@dataclass(frozen=True)
class GroupFillRates:
    groups: list
    sizes: np.ndarray
    rates: np.ndarray  # groups x columns
    averages: np.ndarray  # per-group mean over columns


def fill_rate_by_group(m: MaskedMatrix, groups) -> GroupFillRates:
    """Fill rate of every column within every row group.

    ``groups`` is either a sequence aligned with the rows or a mapping
    from row id to label.  Groups are returned in sorted label order.
    """
    labels = _row_labels(m, groups)
    uniq = sorted(set(labels), key=str)
    index = {g: k for k, g in enumerate(uniq)}
    codes = np.array([index[g] for g in labels], dtype=int)
    sizes = np.bincount(codes, minlength=len(uniq))
    counts = np.zeros((len(uniq), m.n_cols))
    np.add.at(counts, codes, m.mask.astype(float))
    rates = counts / sizes[:, None]
    averages = rates.mean(axis=1) if m.n_cols else np.zeros(len(uniq))
    return GroupFillRates(uniq, sizes, rates, averages)


def _row_labels(m: MaskedMatrix, groups) -> list:
    if isinstance(groups, dict):
        labels = []
        for rid in m.row_ids:
            if rid not in groups or groups[rid] is None:
                raise MissingLabel(rid)
            labels.append(groups[rid])
        return labels
    labels = list(groups)
    if len(labels) != m.n_rows:
        raise ShapeMismatch(f"{len(labels)} labels for {m.n_rows} rows")
    for rid, g in zip(m.row_ids, labels):
        if g is None or (isinstance(g, str) and g == ""):
            raise MissingLabel(rid)
    return labels
