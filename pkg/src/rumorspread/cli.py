"""Command-line entry point: ``rumorspread <stage> ...``.

Exit codes: 0 ok, 2 invalid parameters, 3 fit failure, 4 missing input,
5 schema violation.
"""
from __future__ import annotations

import argparse
import csv
import datetime as dt
import logging
import math
import sys
import warnings
from pathlib import Path
from typing import Sequence

from . import schemas
from ._io import atomic_path, dump_json
from .corpus import (FitConfig, filter_and_label, keyword_counts, load_corpus,
                     read_records, write_keyword_csv, write_records)
from .errors import (FeatureError, FitError, InvalidParams, MissingSeries, NoDecayWarning,
                     ParseError, SchemaViolation)
from .features import (CORRELATION_FEATURES, SEMANTIC_NAMES, build_features,
                       minmax_normalize, model_features, read_feature_csv, write_feature_csv)
from .influence import extract_window, fit_exponential, intensity_bounds, read_series_csv
from .regression import (Dataset, TreeParams, correlation_report, cross_validate,
                         fit_cart, fit_linear, importance_report)
from .spread import ModelParams, simulate, write_trajectory_csv

log = logging.getLogger("rumorspread")

EXIT_OK, EXIT_PARAMS, EXIT_FIT, EXIT_MISSING, EXIT_SCHEMA = 0, 2, 3, 4, 5


class CLIError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _require(*paths: Path) -> None:
    for p in paths:
        if not Path(p).exists():
            raise CLIError(EXIT_MISSING, f"missing input: {p}")


# --- simulate ----------------------------------------------------------------

def cmd_simulate(args: argparse.Namespace) -> int:
    try:
        params = ModelParams(alpha=args.alpha, beta=args.beta, delta=args.delta,
                             epsilon=args.epsilon, theta=args.theta, k_avg=args.k,
                             i0=args.i0, n_population=args.n)
        traj = simulate(params, dt=args.dt, horizon=args.horizon,
                        stop_below=None if args.full_horizon else args.stop_below)
    except InvalidParams as exc:
        raise CLIError(EXIT_PARAMS, f"invalid parameters: {exc}") from None
    if args.out:
        with atomic_path(args.out) as tmp:
            write_trajectory_csv(traj, tmp)
    s, i, r1, r2 = traj.final.as_tuple()
    print(f"steps: {len(traj) - 1}  t_end: {traj.times[-1]:g}")
    print(f"final: S={s:.6f} I={i:.6g} R1={r1:.6f} R2={r2:.6g}")
    print(f"informed fraction 1-S: {traj.informed_fraction:.6f}")
    return EXIT_OK


# --- fit ---------------------------------------------------------------------

def cmd_fit(args: argparse.Namespace) -> int:
    _require(args.series)
    try:
        outbreak = dt.date.fromisoformat(args.outbreak)
    except ValueError:
        raise CLIError(EXIT_PARAMS, f"bad --outbreak date {args.outbreak!r}") from None
    try:
        series = read_series_csv(args.series)
    except ParseError as exc:
        raise CLIError(EXIT_SCHEMA, str(exc)) from None
    try:
        window = extract_window(series, outbreak, args.window)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", NoDecayWarning)
            fit = fit_exponential(window)
    except FitError as exc:
        raise CLIError(EXIT_FIT, f"fit failed [{exc.reason}]: {exc}") from None
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    if args.out:
        dump_json(fit.to_dict(), args.out, schemas.FIT_RESULT, "fit result")
    peak = math.exp(fit.b)
    n = fit.window_days - fit.day0_shift - 1
    print(f"a = {fit.a:.6g}")
    print(f"b = {fit.b:.6g}")
    print(f"c = {fit.c:.6g}")
    print(f"status: {fit.status}  iterations: {fit.iterations}  rmse: {fit.rmse:.3g}"
          f"  day0_shift: {fit.day0_shift}")
    print(f"total intensity over {n + 1} days: {fit.total_intensity(n):.6g}")
    lo, hi = intensity_bounds(peak)
    print(f"infinite-horizon bounds: {lo / peak:.2f}–{hi / peak:.2f} x peak "
          f"({lo:.6g} .. {hi:.6g})")
    return EXIT_OK


# --- label / featurize -------------------------------------------------------

def _load(manifest: Path, records: Path | None = None):
    _require(manifest)
    if records is not None:
        _require(records)
    try:
        return load_corpus(manifest, records)
    except FileNotFoundError as exc:
        raise CLIError(EXIT_MISSING, str(exc)) from None
    except MissingSeries as exc:
        raise CLIError(EXIT_MISSING, str(exc)) from None
    except (ParseError, SchemaViolation) as exc:
        raise CLIError(EXIT_SCHEMA, str(exc)) from None


def cmd_label(args: argparse.Namespace) -> int:
    corpus = _load(args.manifest)
    config = FitConfig(window=args.window, rmse_ceiling=args.rmse_ceiling,
                       allowlist=corpus.allowlist)
    labeled, report = filter_and_label(corpus.records, corpus.series, config, jobs=args.jobs)
    dump_json(report.to_dict(config), args.report, schemas.FILTER_REPORT, "filter report")
    for rec in labeled:
        schemas.validate(rec.to_dict(), schemas.RUMOR_RECORD, f"record {rec.id}")
    write_records(labeled, args.out)
    if args.keywords:
        write_keyword_csv(keyword_counts(corpus.records), args.keywords)
    print(f"accepted {report.accepted} of {report.total} rumors")
    for rid, reason in sorted(report.rejections.items()):
        print(f"  rejected {rid}: {reason}")
    return EXIT_OK


def cmd_featurize(args: argparse.Namespace) -> int:
    corpus = _load(args.manifest, args.labeled)
    vectors = []
    for rec in corpus.records:
        s = corpus.series
        try:
            vectors.append(build_features(rec, s.get(rec.fundamental_entity),
                                          s.get(rec.top1_entity), s.get(rec.top2_entity),
                                          corpus.sentiment))
        except FeatureError as exc:
            raise CLIError(EXIT_SCHEMA, str(exc)) from None
    with atomic_path(args.out) as tmp:
        write_feature_csv(vectors, tmp)
        read_feature_csv(tmp)  # shape check before the file goes live
    flagged = [v.id for v in vectors if v.zero_traffic]
    print(f"wrote {len(vectors)} feature rows to {args.out}")
    if flagged:
        print(f"zero-traffic days replaced by 1 for: {', '.join(flagged)}")
    return EXIT_OK


# --- train / report ----------------------------------------------------------

def _table(path: Path):
    _require(path)
    try:
        table = read_feature_csv(path)
    except ParseError as exc:
        raise CLIError(EXIT_SCHEMA, str(exc)) from None
    if table.labels is None:
        raise CLIError(EXIT_SCHEMA, f"{path} has no label columns; run 'label' first")
    return table


def _feature_set(table, extra_ner: bool, semantic: bool) -> tuple[str, ...]:
    use_semantic = semantic and all(n in table.names for n in SEMANTIC_NAMES)
    names = model_features(include_extra_ner=extra_ner, semantic=use_semantic)
    missing = [n for n in names if n not in table.names]
    if missing:
        raise CLIError(EXIT_SCHEMA, f"feature table lacks columns {missing}")
    return names


def _tree_params(args: argparse.Namespace) -> TreeParams:
    return TreeParams(max_depth=args.max_depth, min_samples_leaf=args.min_samples_leaf,
                      ccp_alpha=args.ccp_alpha)


def _fit_all(kind: str, data: Dataset, tree_params: TreeParams):
    X, ranges = minmax_normalize(data.X)
    norm = data.with_X(X)
    model = fit_linear(norm) if kind == "linear" else fit_cart(norm, tree_params)
    return model, ranges


def _cv_dict(cv, target: str, names) -> dict:
    d = cv.to_dict()
    d["target"] = target
    d["feature_names"] = list(names)
    return d


def cmd_train(args: argparse.Namespace) -> int:
    table = _table(args.features)
    names = _feature_set(table, args.extra_ner, args.semantic)
    data = Dataset(names, table.columns(names), table.target(args.target))
    tree_params = _tree_params(args)
    try:
        cv = cross_validate(data, args.model, k=args.k, seed=args.seed, tree_params=tree_params)
    except ValueError as exc:
        raise CLIError(EXIT_PARAMS, str(exc)) from None
    model, ranges = _fit_all(args.model, data, tree_params)
    out = Path(args.out_dir)
    stem = f"{args.model}_{args.target}"
    model_doc = {**model.to_dict(), "target": args.target, "normalization": ranges.to_dict()}
    cv_doc = _cv_dict(cv, args.target, names)
    schemas.validate(model_doc, schemas.MODEL, "model")
    schemas.validate(cv_doc, schemas.CV_RESULT, "cv result")
    dump_json(model_doc, out / f"model_{stem}.json")
    dump_json(cv_doc, out / f"cv_{stem}.json")
    print(f"{args.model} on {args.target}: mean MSE {cv.mean_mse:.4g} "
          f"(sd {cv.std_mse:.3g}, k={args.k}, seed={args.seed})")
    return EXIT_OK


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    def fmt(v):
        if v is None:
            return ""
        if isinstance(v, float):
            return repr(v)
        return str(v)

    with atomic_path(path) as tmp:
        with open(tmp, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for row in rows:
                w.writerow([fmt(v) for v in row])


def cmd_report(args: argparse.Namespace) -> int:
    table = _table(args.features)
    names = _feature_set(table, args.extra_ner, semantic=False)
    tree_params = _tree_params(args)
    out = Path(args.out_dir)

    cv = {}
    for target in ("a", "b"):
        data = Dataset(names, table.columns(names), table.target(target))
        for kind in ("linear", "cart"):
            res = cross_validate(data, kind, k=args.k, seed=args.seed, tree_params=tree_params)
            cv[f"{kind}_{target}"] = _cv_dict(res, target, names)

    data_a = Dataset(names, table.columns(names), table.target("a"))
    data_b = Dataset(names, table.columns(names), table.target("b"))
    linear_a, _ = _fit_all("linear", data_a, tree_params)
    tree_b, _ = _fit_all("cart", data_b, tree_params)
    table1 = importance_report(linear_a, tree_b, names)

    labels = {p: table.target(p) for p in "abc"}
    corr_feats = [f for f in CORRELATION_FEATURES if f in table.names]
    table2 = correlation_report(table.X, table.names, labels, corr_feats)

    semantic = None
    if all(n in table.names for n in SEMANTIC_NAMES):
        sem_names = names + SEMANTIC_NAMES
        data_sem = Dataset(sem_names, table.columns(sem_names), table.target("b"))
        tree_sem, _ = _fit_all("cart", data_sem, tree_params)
        imp = dict(zip(sem_names, tree_sem.feature_importances()))
        rows3 = correlation_report(table.X, table.names, {p: labels[p] for p in "ab"},
                                   list(SEMANTIC_NAMES) + ["RA"])
        semantic = {
            "importance_target": "b",
            "note": "importance comes from the tree fitted on b; the same column is "
                    "sometimes labelled 'importance of c'",
            "rows": [{**r.to_dict(), "importance": float(imp[r.feature])} for r in rows3],
        }
        _write_csv(out / "table3.csv", ["feature", "r_a", "r_b", "importance_b"],
                   [(r["feature"], r["r_a"], r["r_b"], r["importance"])
                    for r in semantic["rows"]])

    doc = {
        "seed": args.seed,
        "weights": {r.feature: r.weight for r in table1},
        "importances": {r.feature: r.importance for r in table1},
        "cv": cv,
        "correlations": [r.to_dict() for r in table2],
        "semantic": semantic,
    }
    schemas.validate(doc, schemas.REPORT, "report")
    _write_csv(out / "table1.csv", ["feature", "weight_a", "importance_b"],
               [(r.feature, r.weight, r.importance) for r in table1])
    _write_csv(out / "table2.csv", ["feature", "r_a", "r_b", "r_c", "notes"],
               [(r.feature, r.r["a"], r.r["b"], r.r["c"], "; ".join(r.notes)) for r in table2])
    _write_csv(out / "cv.csv", ["run", "mean_mse", "std_mse", *[f"fold_{i}" for i in range(args.k)]],
               [(key, v["mean_mse"], v["std_mse"], *v["fold_mse"]) for key, v in cv.items()])
    dump_json(doc, out / "report.json")
    for key, v in cv.items():
        print(f"{key}: mean MSE {v['mean_mse']:.4g}")
    return EXIT_OK


def cmd_keywords(args: argparse.Namespace) -> int:
    _require(args.rumors)
    try:
        records = read_records(args.rumors)
    except ParseError as exc:
        raise CLIError(EXIT_SCHEMA, str(exc)) from None
    write_keyword_csv(keyword_counts(records), args.out)
    return EXIT_OK


# --- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    p = argparse.ArgumentParser(prog="rumorspread", description=__doc__, formatter_class=fmt)
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", required=True)

    d = ModelParams()
    s = sub.add_parser("simulate", formatter_class=fmt,
                       help="integrate the four-state mean-field model")
    s.add_argument("--alpha", type=float, default=d.alpha, help="susceptible -> removed on contact")
    s.add_argument("--beta", type=float, default=d.beta, help="susceptible -> infected on contact")
    s.add_argument("--delta", type=float, default=d.delta, help="infected -> removed on refuter contact")
    s.add_argument("--epsilon", type=float, default=d.epsilon, help="forgetting rate")
    s.add_argument("--theta", type=float, default=d.theta, help="infected -> refuted on refuter contact")
    s.add_argument("--k", type=float, default=d.k_avg, help="average network degree")
    s.add_argument("--i0", type=float, default=d.i0, help="initial infected density")
    s.add_argument("--n", type=int, default=d.n_population, help="population size (labeling only)")
    s.add_argument("--dt", type=float, default=0.01, help="RK4 step")
    s.add_argument("--horizon", type=float, default=100.0, help="integration length")
    s.add_argument("--stop-below", type=float, default=1e-8,
                   help="stop early once I + R2 drops below this")
    s.add_argument("--full-horizon", action="store_true", help="disable the early stop")
    s.add_argument("--out", type=Path, default=None, help="trajectory CSV to write")
    s.set_defaults(func=cmd_simulate)

    f = sub.add_parser("fit", formatter_class=fmt,
                       help="fit peak/attenuation/bias to a search series")
    f.add_argument("--series", type=Path, required=True, help="date,frequency CSV")
    f.add_argument("--outbreak", required=True, help="outbreak day (YYYY-MM-DD)")
    f.add_argument("--window", type=int, default=7, help="days fitted from the outbreak")
    f.add_argument("--out", type=Path, default=None, help="FitResult JSON to write")
    f.set_defaults(func=cmd_fit)

    lb = sub.add_parser("label", formatter_class=fmt,
                        help="fit every rumor and keep the usable ones")
    lb.add_argument("--manifest", type=Path, required=True, help="corpus manifest JSON")
    lb.add_argument("--out", type=Path, required=True, help="labeled rumors JSON-lines")
    lb.add_argument("--report", type=Path, required=True, help="filter report JSON")
    lb.add_argument("--keywords", type=Path, default=None, help="keyword,count CSV to write")
    lb.add_argument("--window", type=int, default=7, help="fit window in days")
    lb.add_argument("--rmse-ceiling", type=float, default=0.35, help="max log-space RMSE")
    lb.add_argument("--jobs", type=int, default=1, help="worker processes")
    lb.set_defaults(func=cmd_label)

    fz = sub.add_parser("featurize", formatter_class=fmt, help="build the feature matrix")
    fz.add_argument("--manifest", type=Path, required=True, help="corpus manifest JSON")
    fz.add_argument("--labeled", type=Path, required=True, help="output of 'label'")
    fz.add_argument("--out", type=Path, required=True, help="feature matrix CSV")
    fz.set_defaults(func=cmd_featurize)

    def model_flags(q: argparse.ArgumentParser) -> None:
        q.add_argument("--features", type=Path, required=True, help="output of 'featurize'")
        q.add_argument("--k", type=int, default=5, help="cross-validation folds")
        q.add_argument("--seed", type=int, default=0, help="fold shuffle seed")
        q.add_argument("--out-dir", type=Path, required=True, help="output directory")
        q.add_argument("--max-depth", type=int, default=4, help="tree depth limit")
        q.add_argument("--min-samples-leaf", type=int, default=5, help="tree leaf size")
        q.add_argument("--ccp-alpha", type=float, default=0.0, help="cost-complexity pruning")
        q.add_argument("--extra-ner", action="store_true", help="also use NZ/N/V flags")

    tr = sub.add_parser("train", formatter_class=fmt, help="cross-validate and fit one model")
    model_flags(tr)
    tr.add_argument("--model", choices=("linear", "cart"), default="linear", help="model kind")
    tr.add_argument("--target", choices=("a", "b", "c"), default="a", help="label to predict")
    tr.add_argument("--semantic", action="store_true", help="add the three semantic columns")
    tr.set_defaults(func=cmd_train)

    rp = sub.add_parser("report", formatter_class=fmt,
                        help="weight/importance, correlation and CV tables")
    model_flags(rp)
    rp.set_defaults(func=cmd_report)

    kw = sub.add_parser("keywords", formatter_class=fmt, help="keyword,count CSV for a corpus")
    kw.add_argument("--rumors", type=Path, required=True, help="rumor JSON-lines file")
    kw.add_argument("--out", type=Path, required=True, help="CSV to write")
    kw.set_defaults(func=cmd_keywords)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CLIError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except SchemaViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA


if __name__ == "__main__":
    sys.exit(main())
