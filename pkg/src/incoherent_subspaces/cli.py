"""Command line entry point: ``synth``, ``train``, ``classify``, ``evaluate``, ``diagnose``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
Machine-readable output goes to stdout, diagnostics to stderr.
"""

import argparse
import logging
import sys
import warnings

import numpy as np

from .classifier import classify, evaluate
from .core import NormPair, coherence_report, norm_tag_name
from .data_io import (DataError, SyntheticSpec, generate_synthetic, load_csv,
                      read_csv_rows, read_model, save_csv, write_model)
from .trainer import STEP_POLICIES, TrainConfig, TrainingError, fit, grassmann_bound

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser():
    parser = _Parser(prog="incoherent-subspaces", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="learn a feature bank from a CSV dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--p", required=True, choices=["1", "2", "inf"])
    p.add_argument("--s", required=True, type=int)
    p.add_argument("--mu-fraction", required=True, type=float)
    p.add_argument("--outer-iters", type=int, default=10)
    p.add_argument("--inner-tol", type=float, default=1e-4)
    p.add_argument("--inner-max-iters", type=int, default=500)
    p.add_argument("--step-policy", choices=STEP_POLICIES, default="auto")
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--out", required=True)

    p = sub.add_parser("classify", help="label every row of a CSV dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("evaluate", help="misclassification count on a labelled CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)

    p = sub.add_parser("synth", help="write a planted-subspace train/test pair")
    p.add_argument("--classes", required=True, type=int)
    p.add_argument("--dim", required=True, type=int)
    p.add_argument("--per-class", required=True, type=int)
    p.add_argument("--s", required=True, type=int)
    p.add_argument("--coeff", required=True, choices=["sparse", "flat", "gaussian"])
    p.add_argument("--noise", required=True, type=float)
    p.add_argument("--coherence", required=True, type=float)
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--out-train", required=True)
    p.add_argument("--out-test", required=True)
    p.add_argument("--out-planted", help="optionally write the planted bank as a model file")

    p = sub.add_parser("diagnose", help="coherence report of a model")
    p.add_argument("--model", required=True)
    p.add_argument("--qp", default="2,2",
                   choices=["2,2", "1,inf", "inf,inf", "inf,1", "1,1"])
    return parser


def _train(args, out):
    data = load_csv(args.data)
    if args.s > data.dim:
        raise UsageError(f"--s {args.s} must not exceed the signal dimension d={data.dim}")
    try:
        cfg = TrainConfig(p=args.p, s=args.s, mu_fraction=args.mu_fraction,
                          outer_iters=args.outer_iters, inner_tol=args.inner_tol,
                          inner_max_iters=args.inner_max_iters,
                          step_policy=args.step_policy, seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        bank, report, _ = fit(data, cfg)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    write_model(bank, args.out)
    out.write("\n".join(report.summary_lines()) + "\n")


def _classify(args, out):
    bank = read_model(args.model)
    _, X = read_csv_rows(args.data)
    if X.shape[1] != bank.dim:
        raise DataError(f"data dimension {X.shape[1]} does not match model dimension {bank.dim}")
    preds = classify(bank, X.T)
    with open(args.out, "w") as fh:
        fh.write("row_index,predicted_label,margin\n")
        for i, pr in enumerate(preds):
            fh.write(f"{i},{pr.label},{pr.margin!r}\n")
    out.write(f"classified={len(preds)}\n")


def _evaluate(args, out):
    bank = read_model(args.model)
    data = load_csv(args.data)
    if data.dim != bank.dim:
        raise DataError(f"data dimension {data.dim} does not match model dimension {bank.dim}")
    summary = evaluate(bank, data)
    out.write("\n".join(summary.lines()) + "\n")


def _synth(args, out):
    try:
        spec = SyntheticSpec(args.classes, args.dim, args.per_class, args.s, args.coeff,
                             args.noise, args.coherence, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.per_class < 2:
        raise UsageError("--per-class must be at least 2 to form a test split")
    train, test, planted = generate_synthetic(spec)
    save_csv(train, args.out_train)
    save_csv(test, args.out_test)
    if args.out_planted:
        write_model(planted, args.out_planted)
    out.write(f"train={train.n_signals} test={test.n_signals} "
              f"classes={train.n_classes} dim={train.dim}\n")


def _diagnose(args, out):
    bank = read_model(args.model)
    qp = NormPair.parse(args.qp)
    report = coherence_report(bank, qp)
    C, d, s = bank.n_classes, bank.dim, bank.rank
    out.write(f"classes={C} dim={d} s={s} p={norm_tag_name(bank.pnorm)} qp={qp}\n")
    out.write("coherence," + ",".join(bank.labels) + "\n")
    for lab, row in zip(bank.labels, report):
        out.write(lab + "," + ",".join(f"{v:.12g}" for v in row) + "\n")
    off = report[~np.eye(C, dtype=bool)]
    out.write(f"max_offdiag={off.max() if off.size else 0.0:.12g}\n")
    bound = grassmann_bound(s, d, C) if C >= 2 else 0.0
    out.write(f"grassmann_bound={bound:.12g}\n")


_COMMANDS = {"train": _train, "classify": _classify, "evaluate": _evaluate,
             "synth": _synth, "diagnose": _diagnose}


def run(argv=None, out=None):
    """Run the CLI and return the exit code instead of exiting."""
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        _COMMANDS[args.command](args, out)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError, UnicodeDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (TrainingError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


def main():
    logging.basicConfig(level=logging.WARNING, stream=sys.stderr)
    sys.exit(run())


if __name__ == "__main__":
    main()
