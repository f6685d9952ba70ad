"""Bivariate rational fits by bisection, with and without a denominator cap.

The target is a soliton-shaped field u(x, t) on a 512 x 201 grid; fits use
every 10th or 20th grid point per axis and are then checked on the whole grid.
Run:  python3 demos/03_bivariate_bisection.py   (takes a couple of minutes)
"""
import numpy as np

from ratnet import BisectOptions, DegreeSpec, bisect_fit, grid_function
from ratnet.bisection import condition_estimate
from ratnet.data import subsample_every_k, to_sample_set

grid = grid_function("kdv_like")
whole = to_sample_set(grid)
print(f"whole grid {grid.shape}, {len(whole)} points")

for k in (20, 10):
    train = to_sample_set(subsample_every_k(grid, k))
    print(f"\nevery {k}th point: {len(train)} training points")
    print(" degree   U      train error   whole-grid error   q range on samples     cond proxy")
    for n in (2, 5):
        spec = DegreeSpec.uniform(n, n)
        for U in (None, 100.0):
            r, rep = bisect_fit(train, spec, BisectOptions(den_upper=U))
            full = np.max(np.abs(whole.values - r(whole.points)))
            cond = condition_estimate(train, spec, rep.extras["z_hi"])
            print(f" ({n},{n})   {str(U):6s} {rep.error:.4e}    {full:.4e}         "
                  f"[{rep.extras['den_min']:.3g}, {rep.extras['den_max']:.3g}]".ljust(84)
                  + f"{cond:.1f}")

# without a cap the denominator is free to grow; the cap trades a slightly
# larger error for a bounded dynamic range of q
