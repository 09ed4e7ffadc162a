"""Labeled datasets: synthetic generators, splits and CSV persistence.

Label convention everywhere: +1 is the target ("safe" / "tunnel") class,
-1 the complement. All randomness flows through numpy's PCG64 generator
seeded explicitly, so every generated dataset is reproducible bit for bit.
"""

import csv
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .exceptions import InputError


@dataclass(frozen=True)
class Dataset:
    """Feature matrix X (n, d) with labels y (n,) in {-1, +1}."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=int)
        if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] == 0:
            raise InputError("X must be a nonempty (n, d) array")
        if not np.all(np.isfinite(X)):
            raise InputError("features contain non-finite values")
        if y.shape != (X.shape[0],):
            raise InputError("y must be a label per row of X")
        if not np.all(np.isin(y, (-1, 1))):
            raise InputError("labels must be -1 or +1")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    def __len__(self):
        return self.X.shape[0]

    @property
    def dim(self):
        return self.X.shape[1]

    def subset(self, indices):
        return Dataset(self.X[indices], self.y[indices])


@dataclass(frozen=True)
class GaussianSpec:
    """Two isotropic Gaussian classes in the plane.

    Covariances are cov_scale * I. With probability outlier_prob a sample
    keeps its label but draws its features from the other class's
    distribution, which is what creates the visible class overlap.
    """

    mean_safe: tuple = (-1.0, -1.0)
    mean_unsafe: tuple = (1.0, 1.0)
    cov_scale_safe: float = 0.5
    cov_scale_unsafe: float = 0.5
    outlier_prob: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if len(self.mean_safe) != 2 or len(self.mean_unsafe) != 2:
            raise InputError("class means must be 2-D")
        if not (self.cov_scale_safe > 0 and self.cov_scale_unsafe > 0):
            raise InputError("covariance scales must be > 0")
        if not 0.0 <= self.outlier_prob < 1.0:
            raise InputError("outlier_prob must lie in [0, 1)")


def gen_two_gaussians(n, spec):
    """Draw n samples, half per class (odd n gives the extra one to +1).

    Rows are emitted +1 block first, then -1; use split() to shuffle.
    """
    if n < 2:
        raise InputError("need n >= 2 samples")
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    n_plus = n // 2 + n % 2
    n_minus = n // 2
    means = {1: np.asarray(spec.mean_safe, dtype=float),
             -1: np.asarray(spec.mean_unsafe, dtype=float)}
    scales = {1: spec.cov_scale_safe, -1: spec.cov_scale_unsafe}
    blocks = []
    for label, count in ((1, n_plus), (-1, n_minus)):
        swap = rng.random(count) < spec.outlier_prob
        noise = rng.standard_normal((count, 2))
        own = means[label] + math.sqrt(scales[label]) * noise
        other = means[-label] + math.sqrt(scales[-label]) * noise
        blocks.append(np.where(swap[:, None], other, own))
    X = np.vstack(blocks)
    y = np.concatenate([np.ones(n_plus, dtype=int), -np.ones(n_minus, dtype=int)])
    return Dataset(X, y)


# Baseline DNS traffic: log-normal query/answer sizes (in kB, which keeps
# the moment features on comparable scales), exponential gaps in seconds.
_Q_BASE = (-2.9, 0.6)    # log-normal (mu, sigma) of query size, ~55 B median
_A_BASE = (-2.3, 0.8)    # log-normal (mu, sigma) of answer size, ~100 B median
_DT_BASE_SCALE = 0.05    # exponential mean of query->answer delay (s)
# Covert-channel packets: larger shifted sizes, near-constant delay.
_Q_TUNNEL = (-1.6, 0.25)
_A_TUNNEL = (-1.3, 0.3)
_DT_TUNNEL_MEAN = 0.01
_DT_TUNNEL_JITTER = 0.001
# Fraction of anomalous packets per tunnel window = 0.05 * intensity.
_INTENSITY_TO_FRACTION = 0.05

DNS_FEATURE_NAMES = (
    "m_A", "m_Q", "m_Dt", "v_A", "v_Q", "v_Dt",
    "s_A", "s_Q", "s_Dt", "k_A", "k_Q", "k_Dt",
)


@dataclass(frozen=True)
class DnsSurrogateSpec:
    """Synthetic stand-in for query/answer flow monitoring.

    Each window aggregates packets_per_window (query size, answer size,
    delay) triples into their first four sample moments, 12 features
    total. Tunnel windows (+1) mix in a fraction 0.05 * intensity of
    anomalous packets; intensity 0 makes both classes identical in law.
    """

    n_windows: int
    tunnel_fraction: float = 0.5
    packets_per_window: int = 100
    intensity: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_windows < 2:
            raise InputError("need at least 2 windows")
        if not 0.0 < self.tunnel_fraction < 1.0:
            raise InputError("tunnel_fraction must lie in (0, 1)")
        if self.packets_per_window < 8:
            raise InputError("need packets_per_window >= 8 for stable moments")
        if self.intensity < 0:
            raise InputError("intensity must be >= 0")
        n_tunnel = int(round(self.tunnel_fraction * self.n_windows))
        if not 1 <= n_tunnel <= self.n_windows - 1:
            raise InputError("tunnel_fraction leaves one class empty")


def gen_dns_surrogate(spec):
    """Simulate windows of DNS traffic and return their moment features.

    Tunnel windows come first (label +1), baseline windows after (-1).
    """
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    n_tunnel = int(round(spec.tunnel_fraction * spec.n_windows))
    n_plain = spec.n_windows - n_tunnel
    frac = min(1.0, _INTENSITY_TO_FRACTION * spec.intensity)
    rows = []
    for window in range(spec.n_windows):
        p = spec.packets_per_window
        q = rng.lognormal(*_Q_BASE, size=p)
        a = rng.lognormal(*_A_BASE, size=p)
        dt = rng.exponential(_DT_BASE_SCALE, size=p)
        if window < n_tunnel and frac > 0.0:
            anomalous = rng.random(p) < frac
            k = int(anomalous.sum())
            if k:
                q[anomalous] = rng.lognormal(*_Q_TUNNEL, size=k)
                a[anomalous] = rng.lognormal(*_A_TUNNEL, size=k)
                dt[anomalous] = np.maximum(
                    _DT_TUNNEL_MEAN + _DT_TUNNEL_JITTER * rng.standard_normal(k), 1e-6
                )
        feats = []
        for series in (a, q, dt):
            feats.append(sample_moments(series))
        # interleave: means of (a, q, dt), then variances, skews, kurtoses
        rows.append([feats[j][m] for m in range(4) for j in range(3)])
    X = np.asarray(rows)
    y = np.concatenate([np.ones(n_tunnel, dtype=int), -np.ones(n_plain, dtype=int)])
    return Dataset(X, y)


def sample_moments(values):
    """(mean, variance, skewness, kurtosis) with 1/n normalizers.

    Kurtosis is raw (not excess). A zero-variance input returns
    skewness = kurtosis = 0 by convention.
    """
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or v.size < 2:
        raise InputError("sample_moments needs a 1-D sequence of length >= 2")
    if not np.all(np.isfinite(v)):
        raise InputError("sample_moments input contains non-finite values")
    mean = float(v.mean())
    dev = v - mean
    var = float(np.mean(dev * dev))
    if var == 0.0:
        return (mean, 0.0, 0.0, 0.0)
    z = dev / math.sqrt(var)  # standardized: higher moments cannot underflow
    skew = float(np.mean(z ** 3))
    kurt = float(np.mean(z ** 4))
    return (mean, var, skew, kurt)


@dataclass(frozen=True)
class SplitSpec:
    """Shuffle-then-cut proportions for train / calibration / test."""

    train_fraction: float
    calib_fraction: float
    test_fraction: float
    seed: int = 0

    def __post_init__(self):
        for f in (self.train_fraction, self.calib_fraction, self.test_fraction):
            if not 0.0 < f < 1.0:
                raise InputError("split fractions must lie in (0, 1)")
        total = self.train_fraction + self.calib_fraction + self.test_fraction
        if abs(total - 1.0) > 1e-12:
            raise InputError(f"split fractions must sum to 1, got {total}")


def split(data, spec):
    """Uniform shuffle under the seed, then contiguous cuts.

    Train and calibration sizes are floors of the fractions (read at
    decimal precision, so 0.3 of 10 is 3); the remainder is the test set.
    """
    n = len(data)
    perm = np.random.Generator(np.random.PCG64(spec.seed)).permutation(n)
    n_train = int(Fraction(str(spec.train_fraction)) * n)
    n_calib = int(Fraction(str(spec.calib_fraction)) * n)
    n_test = n - n_train - n_calib
    if min(n_train, n_calib, n_test) < 1:
        raise InputError(f"split of {n} samples leaves an empty part "
                         f"({n_train}/{n_calib}/{n_test})")
    return (
        data.subset(perm[:n_train]),
        data.subset(perm[n_train:n_train + n_calib]),
        data.subset(perm[n_train + n_calib:]),
    )


def save_csv(data, path):
    """Write `f1,...,fd,label` rows; floats in shortest round-trip form."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f"f{j + 1}" for j in range(data.dim)] + ["label"])
        for row, label in zip(data.X, data.y):
            writer.writerow([repr(float(v)) for v in row] + [str(int(label))])


def load_csv(path):
    """Read a dataset written by save_csv, validating every row.

    Rejects wrong headers, ragged rows, non-finite features and any label
    other than the literal strings "-1" / "1", naming the offending line.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InputError(f"{path}: empty file") from None
        if len(header) < 2 or header[-1] != "label" or \
                header[:-1] != [f"f{j + 1}" for j in range(len(header) - 1)]:
            raise InputError(f"{path}:1: header must be f1,...,fd,label")
        dim = len(header) - 1
        features, labels = [], []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != dim + 1:
                raise InputError(f"{path}:{lineno}: expected {dim + 1} columns, got {len(row)}")
            if row[-1] not in ("-1", "1"):
                raise InputError(f"{path}:{lineno}: label must be -1 or 1, got {row[-1]!r}")
            try:
                values = [float(v) for v in row[:-1]]
            except ValueError:
                raise InputError(f"{path}:{lineno}: malformed feature value") from None
            if not all(math.isfinite(v) for v in values):
                raise InputError(f"{path}:{lineno}: non-finite feature value")
            features.append(values)
            labels.append(int(row[-1]))
    if not features:
        raise InputError(f"{path}: no data rows")
    return Dataset(np.asarray(features), np.asarray(labels, dtype=int))
