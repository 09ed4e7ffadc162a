"""Scalable classifier models.

A scalable classifier owns a predictor f(x, rho) that is continuous and
strictly increasing in the scalar scale parameter rho, and classifies

    +1  if f(x, rho) < 0,
    -1  otherwise.

Raising rho shrinks the +1 region; for every x there is a unique root
rho_bar(x) with f(x, rho_bar(x)) = 0, the signed distance to the decision
boundary in scale units. Three variants are implemented, all in dual
(kernel expansion) form:

    SVM   f(x, rho) = w.phi(x) - b + rho
    SVDD  f(x, rho) = ||phi(x) - w||^2 - R^2 + rho
    LR    f(x, rho) = 1/2 - 1/(1 + exp((w.phi(x) - b) + rho))

with w.phi(x) = sum_i dual_weights[i] * k(x_i, x) over the stored support
points. Models are immutable after construction and every operation is a
pure function, safe for concurrent use.
"""

import json
import os

import numpy as np

from .exceptions import InputError
from .kernels import cross_matrix, kernel_from_dict

# exponent clamp for the logistic predictor: avoids overflow in exp while
# leaving the sign of f unchanged
_SIGMOID_CLAMP = 500.0


def _sigmoid(z):
    z = np.clip(z, -_SIGMOID_CLAMP, _SIGMOID_CLAMP)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


class ScalableModel:
    """Base class: kernel expansion plus the scalable-classifier surface."""

    variant = None

    def __init__(self, kernel, support_points, dual_weights, metadata=None):
        support_points = np.asarray(support_points, dtype=float)
        if support_points.ndim == 1:
            support_points = support_points[None, :]
        dual_weights = np.asarray(dual_weights, dtype=float)
        if support_points.ndim != 2 or support_points.shape[0] == 0:
            raise InputError("support_points must be a nonempty (n, d) array")
        if dual_weights.shape != (support_points.shape[0],):
            raise InputError("dual_weights must match support_points one to one")
        if not (np.all(np.isfinite(support_points)) and np.all(np.isfinite(dual_weights))):
            raise InputError("model parameters must be finite")
        self.kernel = kernel
        self.support_points = support_points
        self.dual_weights = dual_weights
        self.metadata = dict(metadata or {})

    @property
    def dim(self):
        return self.support_points.shape[1]

    def _as_batch(self, x):
        X = np.asarray(x, dtype=float)
        single = X.ndim == 1
        if single:
            X = X[None, :]
        if X.ndim != 2 or X.shape[1] != self.dim:
            raise InputError(f"expected points of dimension {self.dim}")
        if not np.all(np.isfinite(X)):
            raise InputError("input points contain non-finite coordinates")
        return X, single

    def _wphi(self, X):
        """w.phi(x) for each row of X."""
        return cross_matrix(self.kernel, X, self.support_points) @ self.dual_weights

    def _scale_free(self, X):
        """The rho-free part of the predictor, f(x, 0) for SVM/SVDD."""
        raise NotImplementedError

    def _rho_bar(self, X):
        raise NotImplementedError

    def predictor(self, x, rho):
        """f(x, rho); accepts a single vector or a batch of rows."""
        X, single = self._as_batch(x)
        out = self._predict_from_base(self._scale_free(X), rho)
        return float(out[0]) if single else out

    def _predict_from_base(self, base, rho):
        return base + rho

    def classify(self, x, rho=0.0):
        """+1 where f(x, rho) < 0, else -1 (boundary counts as -1)."""
        X, single = self._as_batch(x)
        labels = np.where(self._predict_from_base(self._scale_free(X), rho) < 0, 1, -1)
        return int(labels[0]) if single else labels

    def in_level_set(self, x, rho):
        """Strict membership in S(rho) = {x : f(x, rho) < 0}."""
        X, single = self._as_batch(x)
        inside = self._predict_from_base(self._scale_free(X), rho) < 0
        return bool(inside[0]) if single else inside

    def rho_bar(self, x):
        """The unique root of f(x, .) in closed form."""
        X, single = self._as_batch(x)
        out = self._rho_bar(X)
        return float(out[0]) if single else out

    def to_dict(self):
        doc = {
            "variant": self.variant,
            "kernel": self.kernel.to_dict(),
            "support_points": self.support_points.tolist(),
            "dual_weights": self.dual_weights.tolist(),
            "metadata": self.metadata,
        }
        doc.update(self._extra_fields())
        return doc

    def _extra_fields(self):
        return {}

    def save(self, path):
        tmp = f"{path}.tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, sort_keys=True, indent=1)
            fh.write("\n")
        os.replace(tmp, path)

    def __repr__(self):
        return (f"{type(self).__name__}(kernel={self.kernel!r}, "
                f"n_support={self.support_points.shape[0]})")


class SVMModel(ScalableModel):
    """f(x, rho) = w.phi(x) - b + rho."""

    variant = "svm"

    def __init__(self, kernel, support_points, dual_weights, bias, metadata=None):
        super().__init__(kernel, support_points, dual_weights, metadata)
        self.bias = float(bias)

    def _scale_free(self, X):
        return self._wphi(X) - self.bias

    def _rho_bar(self, X):
        return self.bias - self._wphi(X)

    def _extra_fields(self):
        return {"bias": self.bias}


class LRModel(ScalableModel):
    """f(x, rho) = 1/2 - 1/(1 + exp((w.phi(x) - b) + rho)).

    Shares the SVM's margin w.phi(x) - b, squashed through a sigmoid; the
    root rho_bar is therefore the same as the SVM's.
    """

    variant = "lr"

    def __init__(self, kernel, support_points, dual_weights, bias, metadata=None):
        super().__init__(kernel, support_points, dual_weights, metadata)
        self.bias = float(bias)

    def _scale_free(self, X):
        return self._wphi(X) - self.bias

    def _predict_from_base(self, base, rho):
        return 0.5 - _sigmoid(-(base + rho))

    def _rho_bar(self, X):
        return self.bias - self._wphi(X)

    def _extra_fields(self):
        return {"bias": self.bias}


class SVDDModel(ScalableModel):
    """f(x, rho) = ||phi(x) - w||^2 - R^2 + rho.

    center_norm_sq caches ||w||^2 = sum_ij w_i w_j k(x_i, x_j) so that the
    squared distance is k(x,x) - 2 w.phi(x) + center_norm_sq.
    """

    variant = "svdd"

    def __init__(self, kernel, support_points, dual_weights, center_norm_sq,
                 radius_sq, metadata=None):
        super().__init__(kernel, support_points, dual_weights, metadata)
        if radius_sq < 0:
            raise InputError(f"radius_sq must be >= 0, got {radius_sq}")
        total = float(np.sum(self.dual_weights))
        if abs(total - 1.0) > 1e-8:
            raise InputError(f"SVDD dual weights must sum to 1, got {total}")
        self.center_norm_sq = float(center_norm_sq)
        self.radius_sq = float(radius_sq)

    def dist_sq(self, X):
        diag = self.kernel.diag(X)
        return diag - 2.0 * self._wphi(X) + self.center_norm_sq

    def _scale_free(self, X):
        return self.dist_sq(X) - self.radius_sq

    def _rho_bar(self, X):
        return self.radius_sq - self.dist_sq(X)

    def _extra_fields(self):
        return {"center_norm_sq": self.center_norm_sq, "radius_sq": self.radius_sq}


_VARIANTS = {"svm": SVMModel, "lr": LRModel, "svdd": SVDDModel}


def model_from_dict(doc):
    try:
        variant = doc["variant"]
    except (TypeError, KeyError):
        raise InputError("model document must carry a 'variant' field") from None
    if variant not in _VARIANTS:
        raise InputError(f"unknown model variant {variant!r}")
    kernel = kernel_from_dict(doc["kernel"])
    common = (kernel, doc["support_points"], doc["dual_weights"])
    metadata = doc.get("metadata", {})
    if variant == "svdd":
        return SVDDModel(*common, doc["center_norm_sq"], doc["radius_sq"], metadata)
    cls = _VARIANTS[variant]
    return cls(*common, doc["bias"], metadata)


def load_model(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read model {path}: {exc}") from exc
    return model_from_dict(doc)


def rho_bar_bisection(model, x, tol=1e-12, max_expand=200):
    """Root of f(x, .) by bracket expansion then bisection.

    Fallback for predictor variants without a closed form; the built-in
    variants use their closed forms and this routine only serves as an
    independent cross-check.
    """
    X, single = model._as_batch(x)
    lo = np.full(X.shape[0], -1.0)
    hi = np.full(X.shape[0], 1.0)
    base = model._scale_free(X)
    for _ in range(max_expand):
        need_lo = model._predict_from_base(base, lo) >= 0
        need_hi = model._predict_from_base(base, hi) <= 0
        if not (need_lo.any() or need_hi.any()):
            break
        lo[need_lo] *= 2.0
        hi[need_hi] *= 2.0
    else:
        raise InputError("could not bracket the predictor root")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        below = model._predict_from_base(base, mid) < 0
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= tol * np.maximum(1.0, np.abs(mid))):
            break
    out = 0.5 * (lo + hi)
    return float(out[0]) if single else out
