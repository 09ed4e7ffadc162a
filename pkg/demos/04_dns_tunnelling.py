#!/usr/bin/env python3
"""Covert-channel detection on simulated DNS traffic statistics.

Each sample aggregates one monitoring window of (query size, answer
size, delay) triples into 12 moment features. Tunnel windows mix in a
fraction of anomalous packets proportional to an intensity knob, so the
task difficulty is adjustable: intensity 0 is pure noise, intensity 10
is nearly separable. A linear SVM plus conformal calibration then gives
set-valued detections whose error is capped at any chosen epsilon.
"""

import numpy as np

from confsafe import (
    DnsSurrogateSpec, SplitSpec, TrainConfig, LinearKernel,
    gen_dns_surrogate, split, train_model, calibrate, sweep,
)

print(__doc__)

print("difficulty knob (2000 windows each, linear SVM):")
print(f"{'intensity':>9} {'C':>6} {'accuracy':>9}")
for intensity, C in ((0.0, 0.01), (1.0, 0.1), (3.0, 0.1), (10.0, 1.0)):
    data = gen_dns_surrogate(DnsSurrogateSpec(
        n_windows=2000, tunnel_fraction=0.5, packets_per_window=100,
        intensity=intensity, seed=44))
    train, _, test = split(data, SplitSpec(0.4, 0.1, 0.5, seed=4))
    model = train_model(train, TrainConfig("svm", LinearKernel(), C=C,
                                           tolerance=1e-3, max_iterations=400_000,
                                           seed=44))
    acc = float(np.mean(model.classify(test.X) == test.y))
    print(f"{intensity:9.1f} {C:6.2f} {acc:9.3f}")

print("\ncalibrated sweep at intensity 3 (the interesting middle ground):")
data = gen_dns_surrogate(DnsSurrogateSpec(
    n_windows=6000, tunnel_fraction=0.5, packets_per_window=100,
    intensity=3.0, seed=44))
train, calib, test = split(data, SplitSpec(0.25, 0.25, 0.5, seed=4))
model = train_model(train, TrainConfig("svm", LinearKernel(), C=0.1,
                                       tolerance=1e-3, max_iterations=400_000,
                                       seed=44))
profile = calibrate(model, calib)
print(f"{'eps':>5} {'err':>7} {'err-':>7} {'err+':>7} {'double':>7} "
      f"{'empty':>7} {'fp in region':>13}")
for r in sweep(model, profile, [0.05, 0.1, 0.2, 0.3, 0.4, 0.5], test):
    print(f"{r.epsilon:5.2f} {r.err:7.3f} {r.err_minus:7.3f} {r.err_plus:7.3f} "
          f"{r.double_rate:7.3f} {r.empty_rate:7.3f} {r.csr_error_coverage:13.3f}")

print("\nerr tracks epsilon from below at every level while the last column,")
print("the rate of missed intrusions flagged safe... actually of benign")
print("windows inside the detection region, stays under-linear in epsilon.")
