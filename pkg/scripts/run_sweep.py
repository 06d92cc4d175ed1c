"""Training-fraction sweep with a short accuracy table at the end.

    python3 scripts/run_sweep.py configs/alzheimers_sweep.toml [--seed N]
"""
import argparse
from collections import defaultdict

from qmlbench.bench import emit_report, sweep_fractions
from qmlbench.config import load_config


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("config")
    ap.add_argument("--seed", type=int, default=None)
    args = ap.parse_args()

    cfg = load_config(args.config, args.seed)
    report = sweep_fractions(cfg)
    paths = emit_report(report, cfg.output_dir, cfg.formats, stem="sweep")

    table = defaultdict(dict)
    for r in report.rows:
        table[r.model][r.train_fraction] = r.test_accuracy
    fracs = sorted({r.train_fraction for r in report.rows})
    print("model  " + " ".join(f"{f:6.1f}" for f in fracs))
    for model, accs in table.items():
        cells = (f"{accs[f]:6.3f}" if accs.get(f) is not None else "   n/a" for f in fracs)
        print(f"{model:6s} " + " ".join(cells))
    print("reports:", ", ".join(str(p) for p in paths.values()))


if __name__ == "__main__":
    main()
