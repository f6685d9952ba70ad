"""Small networks with ReLU and rational activations, trained on the uniform loss.

A 1-10-1 network with a learnable (3,2) rational activation has 38 parameters
and computes a rational of type (21,20) in x; compare it with the best rational
of that type found directly.
Run:  python3 demos/04_rational_networks.py   (about a minute)
"""
import numpy as np

from ratnet import DegreeSpec, fit, sample_function
from ratnet.nn import ActivationSpec, TrainConfig, init_params, relu_rational_coeffs, train

samples = sample_function("sqrt_abs_shift")

a, b, e_relu = relu_rational_coeffs()
print(f"rational stand-in for ReLU: max deviation {e_relu:.6f} on [-1, 1]")
print("  num", np.round(a, 5), " den", np.round(b, 5))

runs = [("relu", "standard"), ("rat-fixed", "standard"), ("rat-learn", "standard"), ("rat-learn", "split")]
print("\n activation   mode       final     min      (epoch)")
finals = {}
for kind, mode in runs:
    reps = [train(init_params(10, ActivationSpec(kind), seed), samples,
                  TrainConfig(epochs=200, mode=mode, seed=seed)) for seed in (1, 2, 3)]
    finals[kind, mode] = [r.final_loss for r in reps]
    for seed, r in zip((1, 2, 3), reps):
        print(f" {kind:11s}  {mode:9s}  {r.final_loss:.4f}   {r.min_loss:.4f}   ({r.min_loss_epoch})"
              + ("   seed 1" if seed == 1 else ""))

_, rep = fit(samples, DegreeSpec.univariate(21, 20))
print(f"\nbest rational of type (21,20), found directly: {rep.error:.2e}")
print(f"best network median over three seeds:          "
      f"{min(np.median(v) for v in finals.values()):.2e}")
