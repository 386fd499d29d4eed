"""CSV datasets with missing cells, and fill-rate profiling."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DuplicateId, NegativeValue, ParseError
from .masked import MaskedMatrix, fill_rate_by_column, fill_rate_by_group

DEFAULT_MISSING = ("", "NA")


@dataclass(frozen=True, eq=False)
class Dataset:
    matrix: MaskedMatrix
    row_groups: list | None = None
    feature_prefixes: list | None = None

    def __post_init__(self):
        if self.row_groups is not None and len(self.row_groups) != self.matrix.n_rows:
            raise ValueError("row_groups length does not match the number of rows")
        if self.feature_prefixes is not None and len(self.feature_prefixes) != self.matrix.n_cols:
            raise ValueError("feature_prefixes length does not match the number of columns")


def load_csv(
    path,
    group_col: str | None = "group",
    missing_tokens=DEFAULT_MISSING,
    non_numeric_as_missing: bool = False,
    prefix_sep: str | None = None,
) -> Dataset:
    """Read a comma-separated score file.

    The first column holds row ids, ``group_col`` (when present) the row
    group labels; every other column is numeric.  Cells matching
    ``missing_tokens`` or holding non-finite numbers are missing.  Line and
    column numbers in errors are 1-based.
    """
    missing = set(missing_tokens)
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or not rows[0]:
        raise ParseError(1, 1, None)
    header = [h.strip() for h in rows[0]]
    if len(header) < 2:
        raise ParseError(1, 2, None)
    gpos = header.index(group_col) if group_col and group_col in header[1:] else None
    feat_pos = [j for j in range(1, len(header)) if j != gpos]
    col_ids = [header[j] for j in feat_pos]
    if len(set(col_ids)) != len(col_ids):
        raise DuplicateId("duplicate column names in header")

    row_ids, groups, values = [], [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or (len(row) == 1 and row[0].strip() == ""):
            continue
        if len(row) != len(header):
            raise ParseError(lineno, min(len(row), len(header)) + 1, None)
        row_ids.append(row[0].strip())
        if gpos is not None:
            g = row[gpos].strip()
            groups.append(g if g else None)
        vals = []
        for j in feat_pos:
            tok = row[j].strip()
            if tok in missing:
                vals.append(math.nan)
                continue
            try:
                v = float(tok)
            except ValueError:
                if non_numeric_as_missing:
                    vals.append(math.nan)
                    continue
                raise ParseError(lineno, j + 1, tok) from None
            if v < 0:
                raise NegativeValue(lineno, j + 1, v)
            vals.append(v)
        values.append(vals)

    if len(set(row_ids)) != len(row_ids):
        seen, dup = set(), None
        for r in row_ids:
            if r in seen:
                dup = r
                break
            seen.add(r)
        raise DuplicateId(f"duplicate row id {dup!r}")

    arr = np.array(values, dtype=float).reshape(len(row_ids), len(col_ids))
    matrix = MaskedMatrix(arr, np.isfinite(arr), row_ids, col_ids)
    prefixes = None
    if prefix_sep:
        prefixes = [c.split(prefix_sep)[0] + prefix_sep if prefix_sep in c else c for c in col_ids]
    return Dataset(matrix, groups if gpos is not None else None, prefixes)


def format_float(v: float) -> str:
    """Shortest representation that parses back to the same double."""
    return repr(float(v))


def save_csv(d: Dataset, path, group_col: str = "group") -> None:
    m = d.matrix
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        head = ["id"] + ([group_col] if d.row_groups is not None else []) + [str(c) for c in m.col_ids]
        w.writerow(head)
        for i, rid in enumerate(m.row_ids):
            cells = [str(rid)]
            if d.row_groups is not None:
                g = d.row_groups[i]
                cells.append("" if g is None else str(g))
            cells += [format_float(m.values[i, j]) if m.mask[i, j] else "" for j in range(m.n_cols)]
            w.writerow(cells)


@dataclass
class FillProfile:
    by_feature: list  # (col_id, rate), decreasing rate
    by_group: list | None  # (group, mean rate), decreasing rate
    grid_groups: list | None
    grid_features: list
    grid: np.ndarray | None  # groups x features, both in decreasing-rate order
    global_rate: float


def profile(d: Dataset) -> FillProfile:
    m = d.matrix
    rates = fill_rate_by_column(m)
    fo = np.argsort(-rates, kind="stable")
    by_feature = [(m.col_ids[j], float(rates[j])) for j in fo]
    total = m.mask.size
    global_rate = float(m.mask.sum() / total) if total else 0.0
    if d.row_groups is None:
        return FillProfile(by_feature, None, None, [m.col_ids[j] for j in fo], None, global_rate)
    gr = fill_rate_by_group(m, d.row_groups)
    go = np.argsort(-gr.averages, kind="stable")
    by_group = [(gr.groups[g], float(gr.averages[g])) for g in go]
    grid = gr.rates[np.ix_(go, fo)]
    return FillProfile(
        by_feature,
        by_group,
        [gr.groups[g] for g in go],
        [m.col_ids[j] for j in fo],
        grid,
        global_rate,
    )
