"""Command-line entry point.

Exit codes: 0 success, 1 usage or validation error, 2 runtime failure.
"""
from __future__ import annotations

import argparse
import os
import sys

from .errors import ConfigError, QmlBenchError

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="override every seed in the config")

    parser = _Parser(prog="qmlbench", description="Quantum vs classical ML benchmark", parents=[common])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    bench = sub.add_parser("bench", help="run the benchmark")
    bench_sub = bench.add_subparsers(dest="action", parser_class=_Parser)
    for action, text in (("run", "every configured model x fraction"),
                         ("sweep", "training-fraction sweep")):
        p = bench_sub.add_parser(action, help=text, parents=[common])
        p.add_argument("--config", required=True)

    attack = sub.add_parser("attack", help="FGSM and noise robustness of one model", parents=[common])
    attack.add_argument("--config", required=True)
    attack.add_argument("--model", required=True, choices=["svm", "mlp", "qsvm", "vqc", "qcnn"])

    kernel = sub.add_parser("kernel", help="quantum Gram-matrix export")
    kernel_sub = kernel.add_subparsers(dest="action", parser_class=_Parser)
    dump = kernel_sub.add_parser("dump", help="write the quantum Gram matrix as CSV", parents=[common])
    dump.add_argument("--config", required=True)
    dump.add_argument("--out", default=None, help="CSV path (default: <output_dir>/kernel.csv)")

    rank = sub.add_parser("rank-features", help="rank columns by label correlation", parents=[common])
    rank.add_argument("--data", default=None, help="CSV file (default: $QMLBENCH_DATA)")
    rank.add_argument("--schema", default=None, help="schema descriptor (default: bundled)")
    return parser


def _cmd_bench(args) -> int:
    from .bench import emit_report, run_benchmark, sweep_fractions
    from .config import load_config

    cfg = load_config(args.config, args.seed)
    report = run_benchmark(cfg) if args.action == "run" else sweep_fractions(cfg)
    paths = emit_report(report, cfg.output_dir, cfg.formats, stem="report" if args.action == "run" else "sweep")
    for r in report.rows:
        acc = "failed: " + r.error if r.error else f"acc={r.test_accuracy:.4f} train_cpu={r.train_cpu_seconds:.3f}s"
        print(f"{r.model:5s} frac={r.train_fraction:.2f} {acc}")
    for fmt, path in paths.items():
        print(f"wrote {fmt}: {path}")
    return EXIT_OK


def _cmd_attack(args) -> int:
    from .attacks import noise_degradation, robustness_sweep
    from .bench import attack_csv, attack_json, fit_model, load_bench_data, prepare
    from .config import QUANTUM_MODELS, load_config
    from .dataio import split, subsample

    cfg = load_config(args.config, args.seed)
    ds = load_bench_data(cfg)
    train_ds, test_ds = split(ds, cfg.attack.train_fraction, cfg.seed, cfg.data.stratified)
    quantum = args.model in QUANTUM_MODELS
    if quantum:
        train_ds = subsample(train_ds, cfg.qml_train_cap, cfg.seed)
    test_ds = subsample(test_ds, cfg.attack.max_samples, cfg.seed)
    prep = prepare(train_ds, test_ds, cfg.n_features if (quantum or cfg.reduce_classical) else None)
    model = fit_model(args.model, prep.X_train, prep.y_train, cfg, cfg.seed)
    reports = robustness_sweep(model, prep.X_test, prep.y_test, cfg.attack.epsilons, cfg.seed, args.model)
    if args.model in ("vqc", "qcnn"):
        reports += noise_degradation(model, prep.X_test, prep.y_test, cfg.attack.noise_levels,
                                     cfg.attack.shots, cfg.seed, args.model)
    os.makedirs(cfg.output_dir, exist_ok=True)
    stem = os.path.join(cfg.output_dir, f"attack_{args.model}")
    with open(stem + ".json", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(attack_json(reports))
    with open(stem + ".csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(attack_csv(reports))
    for r in reports:
        print(f"{r.attack:5s} strength={r.strength:.4g} clean={r.clean_accuracy:.4f} "
              f"attacked={r.attacked_accuracy:.4f}")
    print(f"wrote {stem}.json and {stem}.csv")
    return EXIT_OK


def _cmd_kernel(args) -> int:
    from .bench import feature_map_for, load_bench_data, prepare
    from .config import load_config
    from .dataio import subsample
    from .qkernel import kernel_matrix, write_kernel_csv

    cfg = load_config(args.config, args.seed)
    ds = subsample(load_bench_data(cfg), cfg.kernel.max_rows, cfg.seed)
    prep = prepare(ds, ds, cfg.n_features)
    K = kernel_matrix(prep.X_train, feature_map_for(cfg, prep.X_train.shape[1]), cfg.qsvm.cache_states)
    out = args.out or os.path.join(cfg.output_dir, "kernel.csv")
    write_kernel_csv(K, out)
    print(f"wrote {K.m}x{K.m} quantum Gram matrix to {out}")
    return EXIT_OK


def _cmd_rank(args) -> int:
    from .bench import DATA_ENV
    from .dataio import load_dataset, load_schema
    from .encoding import rank_features

    path = args.data or os.environ.get(DATA_ENV)
    if not path:
        raise UsageError(f"rank-features needs --data or ${DATA_ENV}")
    if not os.path.exists(path):
        raise FileNotFoundError(f"dataset file not found: {path}")
    schema = load_schema(args.schema)
    ds = load_dataset(path, schema)
    for j, score in rank_features(ds.features, ds.labels):
        print(f"{ds.feature_names[j]}\t{score:.6f}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(argv)
        args.seed = getattr(args, "seed", None)
        if args.command is None or (args.command in ("bench", "kernel") and args.action is None):
            raise UsageError(parser.format_usage().rstrip())
        handler = {"bench": _cmd_bench, "attack": _cmd_attack, "kernel": _cmd_kernel,
                   "rank-features": _cmd_rank}[args.command]
        return handler(args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print("invalid config:", file=sys.stderr)
        for problem in exc.problems:
            print(f"  - {problem}", file=sys.stderr)
        return EXIT_USAGE
    except (QmlBenchError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
