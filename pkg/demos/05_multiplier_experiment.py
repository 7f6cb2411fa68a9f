"""
Multiplier-only collision experiment
====================================

Four products per repetition: mult1 = a*b, mult2 = c*d, mult3 = a*e and
mult4 = f*g. K1 pairs the two products sharing operand a; K2 to K4 pair
products without a shared operand. Under the model K1 does not stand out:
over 30 seeds the AUC of K1 against K2..K4 averaged about 0.53, and p < 0.05
turned up about as often as chance predicts. Single runs like the one below
can still land on a small p.
"""

from hccalab.hcca import collision_csv, mult_collision_experiments
from hccalab.leakage import LeakageModel

results = mult_collision_experiments(LeakageModel(samples_per_cycle=10), repetitions=20, rng=5)
for res in results:
    sep = res.separation()
    print(f"{res.bit_length}-bit: mean K1 {sep.mean_common:+.3f}, mean K2..K4 {sep.mean_different:+.3f},"
          f" AUC {sep.auc:.2f}, Welch p {sep.p:.2f}")

print(collision_csv(results).splitlines()[0])
print(collision_csv(results).splitlines()[1])
