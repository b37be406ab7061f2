"""False discovery rate as a function of the acceptance level.

On a 16-segment staircase signal, raising alpha admits weaker evidence
and drags in more false positives; the FDR of the MAP detections grows
with it. A desk-scale version of the benchmark (the acceptance suite
runs the full one).
"""

from bernoulli_detector.evaluate import fdr_experiment
from bernoulli_detector.simulate import multi_step_spec

spec = multi_step_spec(snr_db=5.0)
print(f"signal: n={spec.n}, {len(spec.boundaries) + 1} segments, "
      f"sigma={spec.sigma:.3f}")

points = fdr_experiment(
    spec,
    alphas=(0.001, 0.01, 0.05, 0.1),
    replicates=10,
    iterations=400,
    tolerances=(0, 5),
    seed=1,
)

print(f"{'alpha':>8} {'tolerance':>10} {'FDR':>8} {'std':>8}")
for p in points:
    print(f"{p.alpha:>8} {p.tolerance:>10} {p.fdr_mean:>8.3f} {p.fdr_std:>8.3f}")
print("(10 replicates per cell; expect the FDR to climb with alpha)")
