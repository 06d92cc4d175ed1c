"""FGSM accuracy curves for every model family on one dataset.

No direction is asserted; the table is there to be read. Noise
degradation is added for the variational models.
"""
import argparse

import numpy as np

from qmlbench.attacks import noise_degradation, robustness_sweep
from qmlbench.bench import fit_model, load_bench_data, prepare
from qmlbench.config import QUANTUM_MODELS, load_config
from qmlbench.dataio import split, subsample


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("config")
    ap.add_argument("--models", nargs="+", default=["svm", "mlp", "qsvm", "vqc", "qcnn"])
    ap.add_argument("--seed", type=int, default=None)
    args = ap.parse_args()

    cfg = load_config(args.config, args.seed)
    ds = load_bench_data(cfg)
    train_ds, test_ds = split(ds, cfg.attack.train_fraction, cfg.seed, cfg.data.stratified)
    test_ds = subsample(test_ds, cfg.attack.max_samples, cfg.seed)
    eps = cfg.attack.epsilons
    print("model  " + " ".join(f"{e / np.pi:5.2f}pi" for e in eps))
    for name in args.models:
        quantum = name in QUANTUM_MODELS
        tr = subsample(train_ds, cfg.qml_train_cap, cfg.seed) if quantum else train_ds
        # every model sees the same reduced columns so the budgets are comparable
        prep = prepare(tr, test_ds, cfg.n_features)
        model = fit_model(name, prep.X_train, prep.y_train, cfg, cfg.seed)
        reps = robustness_sweep(model, prep.X_test, prep.y_test, eps, cfg.seed, name)
        print(f"{name:6s} " + " ".join(f"{r.attacked_accuracy:7.3f}" for r in reps))
        if name in ("vqc", "qcnn"):
            noisy = noise_degradation(model, prep.X_test, prep.y_test, cfg.attack.noise_levels,
                                      cfg.attack.shots, cfg.seed, name)
            print("       noise " + " ".join(f"p={r.strength:g}:{r.attacked_accuracy:.3f}" for r in noisy))


if __name__ == "__main__":
    main()
