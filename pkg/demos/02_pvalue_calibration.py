"""How the acceptance level calibrates the p-value model.

The detector models a p-value as uniform when nothing changed and as
Beta(gamma, 1) when something did; gamma is pinned by requiring both
densities to agree exactly at the acceptance level alpha. This script
tabulates gamma across alpha, shows the two densities crossing at alpha,
and demonstrates the single-change-point decision rule that follows: with
even prior odds, "change" wins exactly when p < alpha.
"""

import math
import pathlib

import numpy as np

from bernoulli_detector.calibration import solve_gamma, log_density_p
from bernoulli_detector.gibbs_uni import map_single_cp, mmse_single_cp

print("alpha -> gamma (root of gamma * alpha**(gamma-1) = 1):")
for alpha in (0.001, 0.01, 0.05, 0.1, 0.2, 0.3):
    print(f"  alpha={alpha:<6} gamma={solve_gamma(alpha):.5f}")

alpha = 0.01
gamma = solve_gamma(alpha)
print(f"\nwith alpha={alpha} (gamma={gamma:.5f}):")
for p in (1e-6, 1e-3, alpha, 0.05, 0.5):
    decision = map_single_cp(p, 0.5, gamma)
    posterior = mmse_single_cp(p, 0.5, gamma)
    print(f"  p={p:<8} change density={math.exp(log_density_p(p, 1, gamma)):9.3f}  "
          f"P(change)={posterior:.4f}  decision={'change' if decision else 'no change'}")
print("the posterior crosses 1/2 exactly at p = alpha")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out = pathlib.Path(__file__).resolve().parent / "demo_output"
    out.mkdir(exist_ok=True)
    grid = np.linspace(1e-4, 1.0, 2000)
    density = [math.exp(log_density_p(p, 1, gamma)) for p in grid]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(grid, density, label="density given a change")
    ax.axhline(1.0, color="0.4", ls=":", label="density given no change")
    ax.axvline(alpha, color="tab:red", ls="--", label=f"alpha = {alpha}")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("p-value")
    ax.set_ylabel("density")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out / "pvalue_calibration.png", dpi=120)
    print(f"figure written to {out / 'pvalue_calibration.png'}")
except ImportError:
    print("matplotlib not installed; skipping the figure")
