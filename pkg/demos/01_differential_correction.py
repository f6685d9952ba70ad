"""Best uniform rational approximation of sqrt(|x - 0.25|) on [-1, 1].

Walks through differential correction at a few degrees, shows how fast the
error settles, then cross-checks one degree with the bisection method.
Run:  python3 demos/01_differential_correction.py
"""
import numpy as np

from ratnet import DegreeSpec, bisect_fit, fit, sample_function

samples = sample_function("sqrt_abs_shift")
print(f"{len(samples)} samples, range of f = {np.ptp(samples.values):.4f}")

# error per degree, with the LP count and the conditioning of the last LP
print("\n degree   error          LPs   cond(A)")
for n, m in [(1, 1), (2, 2), (3, 3), (4, 3), (4, 4), (5, 5)]:
    r, rep = fit(samples, DegreeSpec.univariate(n, m))
    print(f" ({n},{m})    {rep.error:.10f}  {rep.iterations:3d}   {rep.condition:.2e}")

# the iteration converges fast once it is close: look at one history
_, rep = fit(samples, DegreeSpec.univariate(4, 4))
print("\nerror after each differential correction step at (4,4):")
for k, e in enumerate(rep.history):
    print(f"  {k:2d}  {e:.12f}")

# bisection solves a different LP family, so agreement is a real check
r_b, rep_b = bisect_fit(samples, DegreeSpec.univariate(4, 4))
print(f"\nbisection (4,4): {rep_b.error:.10f} after {rep_b.iterations} feasibility tests")
print(f"difference: {abs(rep_b.error - rep.error):.2e}")

# where does the error live? near the cusp at 0.25
r, _ = fit(samples, DegreeSpec.univariate(4, 4))
res = samples.values - r(samples.x)
worst = np.argsort(-np.abs(res))[:5]
print("\nlargest residuals:", ", ".join(f"x={samples.x[i]:+.3f}" for i in sorted(worst)))
