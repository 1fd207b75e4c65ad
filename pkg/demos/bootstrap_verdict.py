"""Estimate the analogy parameters from data and decide whether a
transformer with step size gamma preserves class membership."""
import numpy as np

from analogy_ot import (
    AnalogyParameters,
    bootstrap_wasserstein,
    check_analogy,
    class_geometry,
    estimate_delta,
    estimate_epsilon,
    estimate_eta,
)
from analogy_ot.data import generate_class_blobs

SEED = 7


def main():
    rng = np.random.default_rng(SEED)
    source = rng.normal(size=(400, 2))
    target = rng.normal(size=(400, 2)) + [0.05, 0.0]

    # Resample both domains B times and look at the spread of W1.
    boot = bootstrap_wasserstein(source, target, p=1, B=300, seed=SEED, estimator="sliced", n_proj=300)
    eps = estimate_epsilon(boot, alpha=0.05)
    eta = estimate_eta(boot, alpha=0.05)
    print(f"bootstrap mean {boot.mean:.4f}  sd {boot.sd:.4f}  (observed {boot.observed:.4f})")
    print(f"epsilon {eps:.4f}  eta {eta:.4f}")

    # Class separation comes from a labelled sample.
    classes = generate_class_blobs(
        [{"n": 80, "mean": [0.0, 0.0], "scale": 0.3}, {"n": 80, "mean": [4.0, 0.0], "scale": 0.3}], seed=SEED
    )
    delta = estimate_delta(class_geometry(classes))
    print(f"delta {delta.value:.4f}  separable={delta.separable}")

    for gamma in (0.01, 0.1, 0.5):
        v = check_analogy(AnalogyParameters(eps, eta, gamma, 0.0, delta.value))
        print(f"gamma {gamma:<5} -> {v.status:<12} threshold {v.threshold:.4f}  margin {v.margin:+.4f}")


if __name__ == "__main__":
    main()
