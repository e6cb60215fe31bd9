"""Command-line front end.

Subcommands: train, predict, cv, grid, compare, bench. Reports are JSON
Lines: one self-labeled record per line (``"record": "fold" | "summary" |
"cell" | "best" | ...``) with floats at full precision. Timing lives only
in ``train_seconds`` / ``test_seconds`` fields.

Exit codes: 0 success, 2 usage/config error, 3 I/O or input-data error,
4 numeric failure, 5 invalid model file.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import statistics
import sys
import time

import numpy as np

from . import persist
from .config import ConfigError, build_experiment, read_config
from .data import load_csv
from .harness import best_cell, cross_validate, grid_search, time_method
from .methods import METHOD_IDS, is_shallow
from .stats import friedman, nemenyi_cd, rank_matrix, significance_pairs

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_NUMERIC = 4
EXIT_MODEL = 5

TIMING_FIELDS = ("train_seconds", "test_seconds")


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _record(kind, **fields):
    return json.dumps({"record": kind, **fields}, sort_keys=True)


def strip_timing(report_text):
    """Report lines with timing fields removed, for determinism comparisons."""
    out = []
    for line in report_text.splitlines():
        rec = json.loads(line)
        for f in TIMING_FIELDS:
            rec.pop(f, None)
        out.append(json.dumps(rec, sort_keys=True))
    return "\n".join(out)


def read_report(path):
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def _emit(lines, out_path):
    text = "\n".join(lines) + "\n"
    if out_path:
        persist.atomic_write_text(out_path, text)
    else:
        sys.stdout.write(text)
    return text


def _experiment(args):
    overrides = {
        "method": getattr(args, "method", None),
        "seed": getattr(args, "seed", None),
        "cv.k": getattr(args, "k", None),
        "ensemble.combine": getattr(args, "combine", None),
    }
    try:
        entries = read_config(args.config)
    except OSError as exc:
        raise CliError(f"cannot read config: {exc}", EXIT_IO) from None
    return build_experiment(entries, overrides)


def _load_dataset(exp, index=0):
    if not exp.dataset_paths:
        raise CliError("config has no dataset.path", EXIT_USAGE)
    try:
        ds = load_csv(exp.dataset_paths[index], exp.label_column, exp.has_header,
                      name=exp.dataset_name)
    except (OSError, ValueError) as exc:
        raise CliError(f"cannot load dataset: {exc}", EXIT_IO) from None
    return ds


def cmd_train(args):
    exp = _experiment(args)
    ds = _load_dataset(exp)
    spec = exp.method_spec()
    out = args.out or exp.output
    if not out:
        raise CliError("train needs --out or output.path", EXIT_USAGE)
    t0 = time.perf_counter()
    model = spec.fit(ds)
    seconds = time.perf_counter() - t0
    try:
        persist.save(out, model, spec.method, ds.class_names)
    except OSError as exc:
        raise CliError(f"cannot write model: {exc}", EXIT_IO) from None
    shapes = _beta_shapes(model)
    print(f"method={spec.method} dataset={ds.name} samples={ds.n_samples} "
          f"features={ds.n_features} classes={ds.class_count} beta_shapes={shapes} "
          f"train_accuracy={model_train_accuracy(model):.6f} train_seconds={seconds:.4f}")
    return EXIT_OK


def _beta_shapes(model):
    if hasattr(model, "members"):
        return [list(m.beta.shape) for m in model.members]
    if hasattr(model, "betas"):
        return [list(b.shape) for b in model.betas]
    return [list(model.beta.shape)]


def model_train_accuracy(model):
    if hasattr(model, "members"):
        return float(np.mean([m.train_accuracy for m in model.members]))
    return model.train_accuracy


def cmd_predict(args):
    try:
        model, header = persist.load(args.model)
    except OSError as exc:
        raise CliError(f"cannot read model: {exc}", EXIT_IO) from None
    except persist.ModelFormatError as exc:
        raise CliError(f"invalid model file: {exc}", EXIT_MODEL) from None
    exp = _experiment(args)
    ds = _load_dataset(exp)
    names = header["class_names"]
    if ds.n_features != model.n_features:
        raise CliError(f"dataset has {ds.n_features} features, model expects {model.n_features}",
                       EXIT_IO)
    if args.combine and hasattr(model, "member_scores"):
        labels = model.predict(ds.features, args.combine)
    else:
        labels = model.predict(ds.features)
    lines = [_record("prediction", row=i, label=int(l), name=names[l] if names else str(l))
             for i, l in enumerate(labels)]
    if names:
        truth = [names.index(ds.class_names[y]) if ds.class_names[y] in names else -1
                 for y in ds.labels]
        acc = float(np.mean(np.asarray(truth) == labels))
        lines.append(_record("summary", method=header["method"], dataset=ds.name,
                             samples=ds.n_samples, accuracy=acc))
    _emit(lines, args.out)
    return EXIT_OK


def _summary_record(report, k):
    return _record(
        "summary", method=report.method, dataset=report.dataset, k=k, seed=report.seed,
        mean_accuracy=report.mean_accuracy, std_accuracy=report.std_accuracy,
        fold_accuracies=list(report.fold_accuracies),
        train_seconds=report.train_seconds, test_seconds=report.test_seconds,
        config=report.chosen_config,
    )


def cmd_cv(args):
    exp = _experiment(args)
    ds = _load_dataset(exp)
    report = cross_validate(exp.method_spec(), ds, exp.k, exp.seed)
    lines = [_record("fold", method=report.method, dataset=report.dataset, fold=i, accuracy=a)
             for i, a in enumerate(report.fold_accuracies)]
    lines.append(_summary_record(report, exp.k))
    _emit(lines, args.out or exp.output)
    return EXIT_OK


def cmd_grid(args):
    exp = _experiment(args)
    ds = _load_dataset(exp)
    spec = exp.method_spec()
    try:
        best, cells = grid_search(spec, ds, exp.grid, exp.k, exp.seed)
    except RuntimeError as exc:
        raise CliError(str(exc), EXIT_NUMERIC) from None
    lines = []
    for c in cells:
        lines.append(_record(
            "cell", method=spec.method, dataset=ds.name, C_exponent=c.C_exponent,
            layers=c.n_layers, hidden=c.n_hidden, mean_accuracy=c.report.mean_accuracy,
            std_accuracy=c.report.std_accuracy, fold_accuracies=list(c.report.fold_accuracies),
            train_seconds=c.report.train_seconds, test_seconds=c.report.test_seconds,
        ))
    top = best_cell(cells)
    lines.append(_record("best", method=spec.method, dataset=ds.name, C_exponent=top.C_exponent,
                         layers=top.n_layers, hidden=top.n_hidden, cells=len(cells),
                         grid_size=exp.grid.size(is_shallow(spec.method))))
    lines.append(_summary_record(
        dataclasses.replace(top.report, chosen_config=best.config.to_dict()), exp.k))
    _emit(lines, args.out or exp.output)
    return EXIT_OK


def build_comparison(summaries, alpha=0.05):
    """Assemble the dataset x method accuracy matrix and run the rank tests.

    ``summaries`` is an iterable of ``(method, dataset, mean_accuracy)``.
    """
    table = {}
    for method, dataset, acc in summaries:
        if dataset in table.get(method, {}):
            raise CliError(f"duplicate result for {method} on {dataset}", EXIT_USAGE)
        table.setdefault(method, {})[dataset] = float(acc)
    methods = list(table)
    if len(methods) < 2:
        raise CliError("compare needs at least two methods", EXIT_USAGE)
    datasets = sorted(table[methods[0]])
    for m in methods:
        if sorted(table[m]) != datasets:
            raise CliError(f"method {m} covers datasets {sorted(table[m])}, expected {datasets}",
                           EXIT_USAGE)
    if len(datasets) < 2:
        raise CliError("compare needs at least two datasets", EXIT_USAGE)
    acc = np.array([[table[m][d] for m in methods] for d in datasets])
    ranks = rank_matrix(acc)
    fr = friedman(ranks.ranks)
    lines = [
        _record("ranks", methods=methods, datasets=datasets, avg_ranks=list(ranks.avg_ranks),
                ranks=ranks.ranks.tolist()),
        _record("friedman", chi_squared=fr.chi_squared,
                f_statistic=fr.f_statistic if fr.f_defined else None,
                f_defined=fr.f_defined, df1=fr.df1, df2=fr.df2, M=fr.M, m=fr.m),
    ]
    try:
        nem = nemenyi_cd(len(methods), len(datasets), alpha)
    except ValueError as exc:
        lines.append(_record("nemenyi", error=str(exc)))
        return lines
    lines.append(_record("nemenyi", alpha=nem.alpha, q_alpha=nem.q_alpha,
                         critical_difference=nem.critical_difference))
    for (a, b), diff, sig in significance_pairs(ranks.avg_ranks, nem.critical_difference, methods):
        lines.append(_record("pair", a=a, b=b, rank_diff=diff, significant=bool(sig)))
    return lines


def cmd_compare(args):
    summaries = []
    for path in args.reports:
        try:
            records = read_report(path)
        except OSError as exc:
            raise CliError(f"cannot read report: {exc}", EXIT_IO) from None
        except json.JSONDecodeError as exc:
            raise CliError(f"{path}: malformed report: {exc}", EXIT_IO) from None
        found = [r for r in records if r.get("record") == "summary"]
        if not found:
            raise CliError(f"{path}: no summary record", EXIT_IO)
        summaries.extend((r["method"], r["dataset"], r["mean_accuracy"]) for r in found)
    _emit(build_comparison(summaries, args.alpha), args.out)
    return EXIT_OK


def cmd_bench(args):
    exp = _experiment(args)
    ds = _load_dataset(exp)
    spec = exp.method_spec()
    layers = (1,) if is_shallow(spec.method) else exp.grid.L_values
    lines = []
    for L in layers:
        s = spec.with_config(n_layers=L, layer_lambdas=None)
        runs = [time_method(s, ds) for _ in range(max(1, exp.bench_repeats))]
        lines.append(_record(
            "timing", method=spec.method, dataset=ds.name, layers=L, hidden=s.config.n_hidden,
            repeats=len(runs), train_seconds=statistics.median(r[0] for r in runs),
            test_seconds=statistics.median(r[1] for r in runs),
        ))
    _emit(lines, args.out or exp.output)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise CliError(f"{self.prog}: {message}", EXIT_USAGE)


def build_parser():
    p = _Parser(prog="randlink", description="Randomized RVFL networks: train, evaluate, compare.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, out_help="output file (default: stdout)"):
        sp.add_argument("--config", required=True, help="experiment config file")
        sp.add_argument("--out", help=out_help)
        sp.add_argument("--seed", type=int, help="override the experiment seed")
        sp.add_argument("--method", choices=METHOD_IDS, help="override the method id")
        sp.add_argument("--k", type=int, help="override the fold count")
        sp.add_argument("--combine", choices=("vote", "average"), help="ensemble combine rule")

    common(sub.add_parser("train", help="train on the full dataset and save a model"), "model file")
    sp = sub.add_parser("predict", help="predict a dataset with a saved model")
    common(sp)
    sp.add_argument("--model", required=True, help="model file written by train")
    common(sub.add_parser("cv", help="k-fold cross-validation report"))
    common(sub.add_parser("grid", help="grid search over C, L and N"))
    common(sub.add_parser("bench", help="train/test timing over grid.layers"))
    sp = sub.add_parser("compare", help="Friedman / Nemenyi comparison of cv reports")
    sp.add_argument("reports", nargs="+", help="report files with summary records")
    sp.add_argument("--alpha", type=float, default=0.05)
    sp.add_argument("--out")
    return p


COMMANDS = {
    "train": cmd_train, "predict": cmd_predict, "cv": cmd_cv,
    "grid": cmd_grid, "compare": cmd_compare, "bench": cmd_bench,
}


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except persist.ModelFormatError as exc:
        print(f"invalid model file: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
