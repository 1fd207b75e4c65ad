"""Run the sample-level Hoare checks against a small translation and then
against one that moves states too far."""
import numpy as np

from analogy_ot import ThresholdPredicate, check_c1, check_u4, check_u5, effective_region
from analogy_ot import transformers as tf
from analogy_ot.analogy import distances_to

EPS, DELTA, GAMMA = 0.5, 2.0, 0.05


def main():
    rng = np.random.default_rng(1)
    X = rng.uniform(-1.4, 1.4, size=(400, 2))
    s0 = np.zeros(2)

    # F holds left of x = 5; L is the eps-ball around s0.
    F = ThresholdPredicate(lambda Z: 5.0 - Z[:, 0], "F")
    L = ThresholdPredicate(lambda Z: EPS - distances_to(Z, s0), "L")

    print(effective_region(EPS, DELTA, GAMMA))
    for name, T in [("small step", tf.translation([0.03, 0.04])), ("large step", tf.translation([0.9, 1.2]))]:
        print(f"\n{name}")
        for report in (check_c1(X, T, GAMMA), check_u4(X, T, s0, EPS, GAMMA, F, L), check_u5(X, T, s0, EPS, GAMMA, F, L)):
            state = "holds" if report.holds else f"FAILS, {len(report.counterexamples)} counterexamples"
            print(f"  {report.triple_id}: {state} on {report.total} states")


if __name__ == "__main__":
    main()
