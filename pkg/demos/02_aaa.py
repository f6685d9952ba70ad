"""AAA on the same target: fast, near-optimal, and occasionally wild.

Run:  python3 demos/02_aaa.py
"""
import numpy as np

from ratnet import aaa_fit, mse, sample_function

samples = sample_function("sqrt_abs_shift")
span = np.ptp(samples.values)

print(" m   type      uniform error   mse           real poles in [-1,1]")
for m in [2, 3, 4, 5, 6, 11, 16, 21, 22]:
    r, rep = aaa_fit(samples, m)
    poles = rep.extras["real_poles"]
    flag = "  <- unstable" if rep.extras["unstable"] else ""
    print(f"{m:2d}   ({m - 1},{m - 1})".ljust(14)
          + f"{rep.error:.4e}      {mse(r, samples):.3e}     {len(poles)}{flag}")

# the greedy trace is not monotone: a step that creates a spurious pole
# between samples can make the error jump before later steps repair it
_, rep = aaa_fit(samples, 21)
print("\nmax residual after each support point (m = 21):")
print("  " + " ".join(f"{e:.1e}" for e in rep.history))

# a blow-up case: the pole sits between two grid points
r, rep = aaa_fit(samples, 4)
print(f"\nm = 4: error {rep.error:.1f} ({rep.error / span:.0f} x range of f), "
      f"real poles {np.round(rep.extras['real_poles'], 4)}")
