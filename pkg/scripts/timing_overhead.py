"""QSVM vs RBF-SVM training CPU time as the qubit count grows.

Blobs data, 200 training rows, n_features = d for each d in --qubits.
Prints one line per width with both times and their ratio.
"""
import argparse

from qmlbench.bench import run_benchmark
from qmlbench.config import config_from_dict
from qmlbench.simcore import statevector_bytes


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--qubits", type=int, nargs="+", default=[2, 4, 6, 8, 10])
    ap.add_argument("--rows", type=int, default=200, help="training rows")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--cache-states", action="store_true", help="simulate each state once instead of per entry")
    args = ap.parse_args()

    print(f"{'qubits':>6} {'sv bytes':>9} {'svm s':>8} {'qsvm s':>8} {'ratio':>8}")
    for n in args.qubits:
        cfg = config_from_dict({
            "seed": args.seed, "models": ["svm", "qsvm"], "fractions": [0.5], "n_features": n,
            "qml_train_cap": args.rows,
            "qsvm": {"cache_states": args.cache_states},
            "data": {"synthetic": "blobs", "synthetic_m": 2 * args.rows, "synthetic_d": n},
        })
        rows = {r.model: r for r in run_benchmark(cfg).rows}
        c, q = rows["svm"].train_cpu_seconds, rows["qsvm"].train_cpu_seconds
        print(f"{n:6d} {statevector_bytes(n):9d} {c:8.4f} {q:8.3f} {q / max(c, 1e-6):8.0f}")


if __name__ == "__main__":
    main()
