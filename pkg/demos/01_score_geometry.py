#!/usr/bin/env python3
"""Score geometry of a scalable classifier.

Trains a linear SVDD (a minimal enclosing ball) on two Gaussian blobs and
walks through the quantity everything else in this library is built on:
rho_bar(x), the unique scale value that puts x exactly on the decision
boundary. For the ball, rho_bar(x) = R^2 - ||x - c||^2, so the candidate-
label score s(x, y) = -y * rho_bar(x) literally measures how much radius
must be added or removed for x to sit on the sphere.
"""

import numpy as np

from confsafe import (
    GaussianSpec, TrainConfig, LinearKernel,
    gen_two_gaussians, train_svdd, score,
)

print(__doc__)

spec = GaussianSpec(mean_safe=(-1.0, -1.0), mean_unsafe=(1.0, 1.0),
                    cov_scale_safe=0.5, cov_scale_unsafe=0.5,
                    outlier_prob=0.0, seed=12)
data = gen_two_gaussians(600, spec)
model = train_svdd(data, TrainConfig("svdd", LinearKernel(), C=0.02,
                                     tolerance=1e-7, seed=12))

print(f"ball radius^2: {model.radius_sq:.3f}, "
      f"support points: {model.support_points.shape[0]}")
acc = float(np.mean(model.classify(data.X) == data.y))
print(f"training accuracy at rho = 0: {acc:.3f}\n")

print("probe points (label +1 is the 'safe' blob around [-1, -1]):")
print(f"{'x':>14} {'rho_bar':>9} {'s(x,+1)':>9} {'s(x,-1)':>9}  reading")
for probe in ([-1.0, -1.0], [-0.2, -0.2], [1.0, 1.0], [3.0, 3.0]):
    rb = model.rho_bar(probe)
    s_plus = score(model, probe, 1)
    s_minus = score(model, probe, -1)
    where = "inside the ball" if rb > 0 else "outside the ball"
    print(f"{str(probe):>14} {rb:9.3f} {s_plus:9.3f} {s_minus:9.3f}  {where}")

print("\nthe sign of rho_bar recovers the classification, and |rho_bar|")
print("is the margin in scale units; points on the sphere score exactly 0.\n")

# a small character raster of the plane: '+' safe, '.' unsafe, 'o' near
# the boundary (|rho_bar| < 0.15)
ys = np.linspace(2.5, -2.5, 21)
xs = np.linspace(-3.0, 3.0, 41)
for yv in ys:
    row = ""
    for xv in xs:
        rb = model.rho_bar([xv, yv])
        row += "o" if abs(rb) < 0.15 else ("+" if rb > 0 else ".")
    print(row)
print("\n'+' = classified safe at rho = 0, 'o' = decision boundary band")
