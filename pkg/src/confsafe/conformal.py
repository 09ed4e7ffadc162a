"""Conformal calibration of scalable classifiers.

The score of a candidate label is s(x, y_hat) = -y_hat * rho_bar(x):
large scores mean poor agreement between the point and the label. With
scores of n_c held-out calibration pairs (true labels), the
ceil((n_c+1)(1-eps))-th smallest score s_eps turns any scalable model
into set-valued predictions

    C_eps(x) = {y_hat : s(x, y_hat) <= s_eps}

whose marginal coverage is at least 1 - eps over exchangeable data. Two
input-space regions follow:

  * the conformal safety region, the x whose conformal set is exactly
    {+1}: rho_bar(x) >= -s_eps and rho_bar(x) > s_eps;
  * the scaled safe set {x : f(x, |s_eps|) < 0}, i.e. rho_bar(x) >
    |s_eps|, always contained in the former and equal to it whenever
    s_eps <= 0 (off the tie set rho_bar = -s_eps).

When ceil((n_c+1)(1-eps)) exceeds n_c the quantile is +inf; every
conformal set is then {-1, +1} and both regions are empty. This is
encoded by ordinary float infinities, so all membership rules below hold
verbatim.
"""

import json
import math
import os
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .datasets import Dataset
from .exceptions import InputError


@dataclass(frozen=True)
class CalibrationProfile:
    """Ascending calibration scores with quantile lookup."""

    sorted_scores: np.ndarray

    def __post_init__(self):
        scores = np.asarray(self.sorted_scores, dtype=float)
        if scores.ndim != 1 or scores.size == 0:
            raise InputError("a calibration profile needs at least one score")
        if not np.all(np.isfinite(scores)):
            raise InputError("calibration scores must be finite")
        if np.any(np.diff(scores) < 0):
            raise InputError("calibration scores must be sorted ascending")
        object.__setattr__(self, "sorted_scores", scores)

    @property
    def n_c(self):
        return int(self.sorted_scores.size)

    def to_dict(self):
        return {"n_c": self.n_c, "sorted_scores": self.sorted_scores.tolist()}

    def save(self, path):
        tmp = f"{path}.tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, sort_keys=True, indent=1)
            fh.write("\n")
        os.replace(tmp, path)


def profile_from_dict(doc):
    try:
        scores = doc["sorted_scores"]
        n_c = doc["n_c"]
    except (TypeError, KeyError):
        raise InputError("profile document needs 'sorted_scores' and 'n_c'") from None
    profile = CalibrationProfile(np.asarray(scores, dtype=float))
    if profile.n_c != n_c:
        raise InputError(f"profile n_c={n_c} does not match {profile.n_c} scores")
    return profile


def load_profile(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read profile {path}: {exc}") from exc
    return profile_from_dict(doc)


def score(model, x, y_hat):
    """s(x, y_hat) = -y_hat * rho_bar(x); batched when x has rows."""
    if y_hat not in (-1, 1):
        raise InputError(f"candidate label must be -1 or +1, got {y_hat!r}")
    return -float(y_hat) * model.rho_bar(x)


def calibrate(model, calib):
    """Profile of scores s(x_i, y_i) at the true calibration labels."""
    if not isinstance(calib, Dataset) or len(calib) == 0:
        raise InputError("calibration data must be a nonempty Dataset")
    scores = -calib.y.astype(float) * model.rho_bar(calib.X)
    return CalibrationProfile(np.sort(scores))


def _check_epsilon(epsilon):
    if not 0.0 < epsilon < 1.0:
        raise InputError(f"epsilon must lie in (0, 1), got {epsilon}")


def quantile(profile, epsilon):
    """The ceil((n_c+1)(1-eps))/n_c calibration quantile.

    Returns +inf when the rank exceeds n_c. The rank is computed in exact
    rational arithmetic so borderline products never round across an
    integer.
    """
    _check_epsilon(epsilon)
    n_c = profile.n_c
    rank = math.ceil((n_c + 1) * (1 - Fraction(epsilon)))
    if rank > n_c:
        return math.inf
    return float(profile.sorted_scores[rank - 1])


def rho_eps(profile, epsilon):
    """Conformal scaling |s_eps| (+inf stays +inf: empty safe set)."""
    return abs(quantile(profile, epsilon))


@dataclass(frozen=True)
class ConformalSet:
    """One of {}, {-1}, {+1}, {-1, +1}."""

    contains_plus: bool
    contains_minus: bool

    def labels(self):
        out = []
        if self.contains_minus:
            out.append(-1)
        if self.contains_plus:
            out.append(1)
        return tuple(out)

    def __contains__(self, label):
        return (label == 1 and self.contains_plus) or \
               (label == -1 and self.contains_minus)


def membership(rho_bar, s_eps):
    """(contains_plus, contains_minus) arrays for rho_bar values.

    contains_plus:  s(x, +1) <= s_eps  <=>  rho_bar >= -s_eps
    contains_minus: s(x, -1) <= s_eps  <=>  rho_bar <= s_eps
    """
    rho_bar = np.asarray(rho_bar, dtype=float)
    return rho_bar >= -s_eps, rho_bar <= s_eps


def conformal_set(model, profile, epsilon, x):
    """Set of candidate labels whose score is within the quantile."""
    s_eps = quantile(profile, epsilon)
    plus, minus = membership(model.rho_bar(x), s_eps)
    if plus.ndim == 0:
        return ConformalSet(bool(plus), bool(minus))
    return [ConformalSet(bool(p), bool(m)) for p, m in zip(plus, minus)]


def sigma_membership(rho_bar, s_eps):
    """Conformal safety region: the conformal set is exactly {+1}."""
    rho_bar = np.asarray(rho_bar, dtype=float)
    return (rho_bar >= -s_eps) & (rho_bar > s_eps)


def safe_membership(rho_bar, s_eps):
    """Scaled safe set {x : f(x, |s_eps|) < 0}, i.e. rho_bar > |s_eps|."""
    rho_bar = np.asarray(rho_bar, dtype=float)
    return rho_bar > abs(s_eps)


def in_sigma(model, profile, epsilon, x):
    """Is x in the conformal safety region of level epsilon?"""
    s_eps = quantile(profile, epsilon)
    out = sigma_membership(model.rho_bar(x), s_eps)
    return bool(out) if out.ndim == 0 else out


def in_safe_region(model, profile, epsilon, x):
    """Is x in the scaled safe set S at level epsilon?

    Evaluated through the root identity f(x, rho_eps) < 0 <=>
    rho_bar(x) > rho_eps, which keeps every region query consistent with
    the same rho_bar values.
    """
    s_eps = quantile(profile, epsilon)
    out = safe_membership(model.rho_bar(x), s_eps)
    return bool(out) if out.ndim == 0 else out
