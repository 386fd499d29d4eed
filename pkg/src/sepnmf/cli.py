"""Command-line front end: profile, fit, compare, pca, synth.

Every option defaults to ``None`` at parse time so that the effective value
can be resolved as: command-line flag, then ``--config`` file, then the
command's built-in default.  Exit codes: 0 ok, 2 input/parse, 3 I/O,
4 solver.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .clustering import (
    DEFAULT_BINS,
    assign_clusters,
    clustering_entropy,
    incidence,
    reorder_for_heatmap,
    top_features,
)
from .errors import InputError, InvalidConfig, SolverError
from .ingest import Dataset, format_float, load_csv, profile, save_csv
from .masked import MaskedMatrix
from .nmf import SolverConfig, fit_nmf
from .pca import components_needed, fit_pca, mean_impute, signed_coefficient_profile
from .pipeline import run_comparison
from .separative import fit_posneg_nmf, fit_snmf
from .synth import SynthSpec, generate

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_INPUT, EXIT_IO, EXIT_SOLVER = 0, 2, 3, 4
PCA_THRESHOLDS = (0.8, 0.9, 0.95)

_SOLVER_DEFAULTS = {
    "rank": 6,
    "seed": 0,
    "max_iter": 2000,
    "tol": 1e-6,
    "sparsity_h": 0.0,
    "init": "auto",
    "sparsity_ramp": 0,
}

DEFAULTS = {
    "common": {"format": "json", "group_col": "group", "bins": DEFAULT_BINS},
    "profile": {},
    "fit": {**_SOLVER_DEFAULTS, "variant": "nmf", "impute": "none", "top_k": 10},
    # the benchmark setting: sparse first pass with an SVD start and a ramped target
    "compare": {**_SOLVER_DEFAULTS, "sparsity_h": 0.9, "init": "svd", "sparsity_ramp": 100, "impute": "mean"},
    "pca": {"impute": "mean", "standardize": False},
    "synth": {
        "rows": 500,
        "cols": 77,
        "rank": 6,
        "noise_level": 2.0,
        "missing_rate": 0.0,
        "one_sided": False,
        "noise_features": 20,
        "seed": 0,
        "baseline_level": 50.0,
        "deviation_scale": 35.0,
        "groups": 11,
    },
}


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------- arguments


def _bool(s: str) -> bool:
    v = str(s).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {s!r}")


def _common(p: argparse.ArgumentParser, solver: bool = False, needs_input: bool = True) -> None:
    if needs_input:
        p.add_argument("--input", help="input CSV (first column row ids)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--config", help="flat key=value file; flags override it")
    p.add_argument("--format", choices=("json", "csv"), default=None, help="summary report format")
    p.add_argument("--group-col", default=None, help="name of the row group column")
    p.add_argument("--bins", type=int, default=None, help="histogram bins for entropies")
    p.add_argument("--seed", type=int, default=None)
    if solver:
        p.add_argument("--rank", type=int, default=None)
        p.add_argument("--sparsity-h", type=float, default=None)
        p.add_argument("--max-iter", type=int, default=None)
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--init", choices=("auto", "random", "svd"), default=None)
        p.add_argument("--sparsity-ramp", type=int, default=None)
        p.add_argument("--impute", choices=("none", "mean"), default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sepnmf", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("profile", help="fill-rate profiling")
    _common(p)

    p = sub.add_parser("fit", help="fit one factorization and write its analytics")
    _common(p, solver=True)
    p.add_argument("--variant", choices=("nmf", "posneg", "snmf"), default=None)
    p.add_argument("--top-k", type=int, default=None)

    p = sub.add_parser("compare", help="full / sparse / restricted NMF and S2NMF table")
    _common(p, solver=True)

    p = sub.add_parser("pca", help="PCA baseline")
    _common(p)
    p.add_argument("--impute", choices=("none", "mean"), default=None)
    p.add_argument("--standardize", type=_bool, nargs="?", const=True, default=None)

    p = sub.add_parser("synth", help="generate a planted synthetic dataset")
    _common(p, needs_input=False)
    p.add_argument("--rows", type=int, default=None)
    p.add_argument("--cols", type=int, default=None)
    p.add_argument("--rank", type=int, default=None)
    p.add_argument("--noise-level", type=float, default=None)
    p.add_argument("--missing-rate", type=float, default=None)
    p.add_argument("--one-sided", type=_bool, nargs="?", const=True, default=None)
    p.add_argument("--noise-features", type=int, default=None)
    p.add_argument("--baseline-level", type=float, default=None)
    p.add_argument("--deviation-scale", type=float, default=None)
    p.add_argument("--groups", type=int, default=None)
    return parser


def read_config_file(path) -> dict:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise CliError(EXIT_INPUT, f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def resolve(parser: argparse.ArgumentParser, args: argparse.Namespace) -> dict:
    """Merge flags, config file and defaults into one plain dict."""
    sub = parser._subparsers._group_actions[0].choices[args.command]
    actions = {a.dest: a for a in sub._actions if a.dest != "help"}
    values = {**DEFAULTS["common"], **DEFAULTS[args.command]}

    if args.config:
        for key, raw in read_config_file(args.config).items():
            a = actions.get(key)
            if a is None or key in ("config", "out"):
                raise CliError(EXIT_INPUT, f"unknown config key {key!r} for {args.command}")
            try:
                v = a.type(raw) if a.type is not None else raw
            except (TypeError, ValueError, argparse.ArgumentTypeError) as e:
                raise CliError(EXIT_INPUT, f"bad value for {key!r}: {e}") from None
            if a.choices is not None and v not in a.choices:
                raise CliError(EXIT_INPUT, f"{key!r} must be one of {list(a.choices)}")
            values[key] = v

    for key, v in vars(args).items():
        if v is not None:
            values[key] = v
    return values


def solver_config(v: dict) -> SolverConfig:
    return SolverConfig(
        rank=v["rank"],
        max_iter=v["max_iter"],
        tol=v["tol"],
        seed=v["seed"],
        sparsity_h=v["sparsity_h"],
        init=v["init"],
        sparsity_ramp=v["sparsity_ramp"],
    )


# ------------------------------------------------------------------ writers


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format_float(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_cell(c) for c in r])


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def write_json(path: Path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_plain(obj), fh, indent=2, allow_nan=False)
        fh.write("\n")


def write_report(out: Path, name: str, report: dict, fmt: str) -> None:
    """Summary report as ``name.json``, or as ``name.csv`` (key,value) when
    ``fmt`` is csv.  In csv form, list values go to ``name_<key>.csv``."""
    if fmt == "json":
        write_json(out / f"{name}.json", report)
        return
    scalars = []
    for key, v in report.items():
        v = _plain(v)
        if isinstance(v, list) and all(not isinstance(e, (list, dict)) for e in v):
            write_csv(out / f"{name}_{key}.csv", ["index", key], enumerate(v))
        elif isinstance(v, (list, dict)):
            scalars.append((key, json.dumps(v)))
        else:
            scalars.append((key, "" if v is None else v))
    write_csv(out / f"{name}.csv", ["key", "value"], scalars)


def write_matrix(path: Path, ids, values: np.ndarray, prefix: str = "c") -> None:
    header = ["id"] + [f"{prefix}{k}" for k in range(values.shape[1])]
    write_csv(path, header, ([rid, *row] for rid, row in zip(ids, values)))


# ----------------------------------------------------------------- commands


def _load(v: dict) -> Dataset:
    if not v.get("input"):
        raise CliError(EXIT_INPUT, "--input is required")
    return load_csv(v["input"], group_col=v["group_col"])


def _imputed(m: MaskedMatrix, how: str) -> MaskedMatrix:
    if how == "mean":
        return MaskedMatrix(mean_impute(m), None, m.row_ids, m.col_ids)
    return m


def cmd_profile(v: dict, out: Path) -> None:
    d = _load(v)
    p = profile(d)
    write_csv(out / "fill_rates_by_feature.csv", ["feature", "fill_rate"], p.by_feature)
    summary = {
        "rows": d.matrix.n_rows,
        "features": d.matrix.n_cols,
        "global_fill_rate": p.global_rate,
        "groups": None if p.by_group is None else len(p.by_group),
    }
    if p.by_group is None:
        summary["note"] = f"no group column {v['group_col']!r}; by-group rates omitted"
        write_csv(out / "grid.csv", ["group", *p.grid_features], [["all", *[r for _, r in p.by_feature]]])
    else:
        write_csv(out / "fill_rates_by_group.csv", ["group", "fill_rate"], p.by_group)
        write_csv(
            out / "grid.csv",
            ["group", *p.grid_features],
            ([g, *row] for g, row in zip(p.grid_groups, p.grid)),
        )
    write_report(out, "summary", summary, v["format"])


def cmd_fit(v: dict, out: Path) -> None:
    d = _load(v)
    config = solver_config(v)
    config.validate(*d.matrix.shape)
    x = _imputed(d.matrix, v["impute"])
    variant = v["variant"]
    if variant == "nmf":
        model, report = fit_nmf(x, config)
    elif variant == "posneg":
        model, report = fit_posneg_nmf(x, config)
    else:
        model, report = fit_snmf(x, config)

    rows, cols = list(x.row_ids), list(x.col_ids)
    c = config.rank
    write_matrix(out / "W.csv", rows, model.W)
    write_matrix(out / "H.csv", cols, model.H)
    if variant == "posneg":
        write_matrix(out / "H_plus.csv", cols, model.H_plus)
        write_matrix(out / "H_minus.csv", cols, model.H_minus)
    if variant == "snmf":
        write_matrix(out / "Q.csv", ["plus", "minus"], model.Q)
        write_csv(out / "directions.csv", ["component", "direction"], enumerate(model.directions))

    rep = {"variant": variant, **report.to_dict(), "config": vars_of(config)}
    write_report(out, "fit_report", rep, v["format"])

    sorted_h = -np.sort(-model.H, axis=0)
    write_csv(
        out / "sorted_loadings.csv",
        ["position", *[f"c{k}" for k in range(c)]],
        ([i, *row] for i, row in enumerate(sorted_h)),
    )

    a = assign_clusters(model)
    write_csv(
        out / "clusters.csv",
        ["axis", "id", "cluster", "leverage"],
        [("row", rows[i], a.row_cluster[i], a.row_leverage[i].max()) for i in range(len(rows))]
        + [("col", cols[j], a.col_cluster[j], a.col_leverage[j].max()) for j in range(len(cols))],
    )
    ro, co = reorder_for_heatmap(x, a)
    write_csv(
        out / "heatmap_order.csv",
        ["axis", "position", "id", "cluster"],
        [("row", p, rows[i], a.row_cluster[i]) for p, i in enumerate(ro)]
        + [("col", p, cols[j], a.col_cluster[j]) for p, j in enumerate(co)],
    )
    write_report(out, "entropy", clustering_entropy(x, a, v["bins"]).to_dict(), v["format"])
    if d.row_groups is not None:
        inc = incidence(d.row_groups, a)
        write_csv(
            out / "incidence.csv",
            ["group", *[f"c{k}" for k in range(c)]],
            ([g, *row] for g, row in zip(inc.group_labels, inc.proportions)),
        )
    tops = top_features(model, v["top_k"], cols)
    write_json(
        out / "top_features.json",
        {f"c{k}": [{"feature": f, "loading": w} for f, w in t] for k, t in enumerate(tops)},
    )


def vars_of(config: SolverConfig) -> dict:
    return {k: getattr(config, k) for k in config.__dataclass_fields__}


def cmd_compare(v: dict, out: Path) -> None:
    d = _load(v)
    config = solver_config(v)
    config.validate(*d.matrix.shape)
    if not config.sparsity_h > 0:
        raise InvalidConfig("compare needs --sparsity-h > 0")
    rep = run_comparison(d.matrix, config, impute=v["impute"] == "mean", bins=v["bins"])
    write_csv(
        out / "comparison.csv",
        ["model", "dimension", "features", "h_sparsity", "rel_error"],
        ((r.model, r.dimension, r.features, r.h_sparsity, r.rel_error) for r in rep.rows),
    )
    write_csv(
        out / "entropy_delta.csv",
        ["model", "entropy_delta"],
        ((r.model, r.entropy_delta) for r in rep.rows if r.entropy_delta is not None),
    )


def cmd_pca(v: dict, out: Path) -> None:
    d = _load(v)
    m = d.matrix
    if v["impute"] == "none" and not m.fully_observed:
        raise CliError(EXIT_INPUT, "data has missing cells; use --impute mean")
    model = fit_pca(m, standardize=v["standardize"])
    write_csv(
        out / "explained_variance.csv",
        ["rank", "explained_variance", "ratio", "cumulative"],
        zip(
            range(1, len(model.explained_variance) + 1),
            model.explained_variance,
            model.explained_variance_ratio,
            model.cumulative_ratio,
        ),
    )
    k = len(model.explained_variance)
    prof = signed_coefficient_profile(model, k)
    sorted_cols = np.column_stack([p[0] for p in prof])
    write_csv(
        out / "components_sorted.csv",
        ["position", *[f"pc{j + 1}" for j in range(k)]],
        ([i, *row] for i, row in enumerate(sorted_cols)),
    )
    rep = {
        "thresholds": {format_float(t): components_needed(model, t) for t in PCA_THRESHOLDS},
        "significant_coefficients": [p[1] for p in prof],
        "standardized": bool(v["standardize"]),
    }
    write_report(out, "threshold_components", rep, v["format"])


def cmd_synth(v: dict, out: Path) -> None:
    spec = SynthSpec(
        n_rows=v["rows"],
        n_cols=v["cols"],
        rank=v["rank"],
        noise_level=v["noise_level"],
        missing_rate=v["missing_rate"],
        two_sided=not v["one_sided"],
        noise_features=v["noise_features"],
        seed=v["seed"],
        baseline_level=v["baseline_level"],
        deviation_scale=v["deviation_scale"],
        n_groups=v["groups"],
    )
    d, truth = generate(spec)
    save_csv(d, out / "data.csv", group_col=v["group_col"])
    write_csv(out / "groups.csv", ["id", "group"], zip(d.matrix.row_ids, d.row_groups))
    gt = out / "ground_truth"
    gt.mkdir(exist_ok=True)
    write_matrix(gt / "W.csv", d.matrix.row_ids, truth.W)
    write_matrix(gt / "H.csv", d.matrix.col_ids, truth.H)
    write_csv(gt / "directions.csv", ["component", "direction"], enumerate(truth.directions))
    write_csv(
        gt / "relevance.csv",
        ["feature", "relevant", "cluster"],
        zip(d.matrix.col_ids, truth.relevance, truth.col_cluster),
    )
    write_csv(gt / "row_clusters.csv", ["id", "cluster"], zip(d.matrix.row_ids, truth.row_cluster))


COMMANDS = {
    "profile": cmd_profile,
    "fit": cmd_fit,
    "compare": cmd_compare,
    "pca": cmd_pca,
    "synth": cmd_synth,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(message)s")
    try:
        v = resolve(parser, args)
        out = Path(v["out"])
        out.mkdir(parents=True, exist_ok=True)
        COMMANDS[args.command](v, out)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code
    except InputError as e:
        print(f"input error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INPUT
    except SolverError as e:
        print(f"solver error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
