"""Rank tests keep their precision under heavy-tailed noise.

The same single-step benchmark is run twice: once with Gaussian noise and
once with Student-t(3) noise at the same SNR. The rank-based detector is
insensitive to the outliers; the total-variation baseline (quadratic
loss) fits spurious segments around them and its precision collapses.

20 replicates per cell keep this quick; the acceptance suite runs 200.
"""

import numpy as np

from bernoulli_detector.baseline_tv import extract_change_points, tv_denoise
from bernoulli_detector.evaluate import match_with_tolerance
from bernoulli_detector.gibbs_uni import UniSamplerConfig, run_pseudo
from bernoulli_detector.simulate import gen_piecewise, single_step_spec

N_REPS = 20
TOLERANCE = 5

results = {}
for noise in ("gaussian", "student"):
    spec = single_step_spec(5.0, noise=noise)
    counts = {"bd": [0, 0, 0], "tv": [0, 0, 0]}  # tp, fp, fn
    for rep in range(N_REPS):
        root = np.random.SeedSequence(entropy=404, spawn_key=(noise == "student", rep))
        data_ss, chain_ss = root.spawn(2)
        x = gen_piecewise(spec, data_ss)
        detections = {
            "bd": sorted(
                run_pseudo(
                    x, UniSamplerConfig(alpha=0.01, iterations=800, seed=chain_ss)
                ).best.indicator.change_points
            ),
            "tv": sorted(extract_change_points(tv_denoise(x, 22.3), 1e-10)),
        }
        for method, detected in detections.items():
            m = match_with_tolerance([49], detected, TOLERANCE)
            counts[method][0] += m.tp
            counts[method][1] += m.fp
            counts[method][2] += m.fn
    results[noise] = counts

print(f"single step at SNR 5 dB, tolerance +-{TOLERANCE}, {N_REPS} replicates:")
print(f"{'noise':>10} {'method':>8} {'recall':>8} {'precision':>10}")
for noise, counts in results.items():
    for method, (tp, fp, fn) in counts.items():
        rec = tp / (tp + fn) if tp + fn else 1.0
        prec = tp / (tp + fp) if tp + fp else 1.0
        print(f"{noise:>10} {method:>8} {rec:>8.2f} {prec:>10.2f}")
print("the rank-based detector holds its precision on t(3) noise; the")
print("quadratic-loss baseline reports outliers as extra change-points")
