"""Kernel functions standing in for the feature map.

Every classifier in this package touches feature space only through inner
products, so a kernel object carries the feature map implicitly. Three
families are provided: linear, polynomial and Gaussian (RBF). Each kernel
evaluates single pairs, cross matrices and Gram matrices, and serializes
into the model JSON document.
"""

import numpy as np

from .exceptions import InputError


def _as_matrix(X, name="points"):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] == 0:
        raise InputError(f"{name} must be a nonempty 2-D array of feature rows")
    if not np.all(np.isfinite(X)):
        raise InputError(f"{name} contain non-finite coordinates")
    return X


class LinearKernel:
    """k(u, v) = <u, v>."""

    variant = "linear"

    def cross(self, X, Y):
        return X @ Y.T

    def diag(self, X):
        return np.einsum("ij,ij->i", X, X)

    def to_dict(self):
        return {"variant": "linear"}

    def __repr__(self):
        return "LinearKernel()"

    def __eq__(self, other):
        return isinstance(other, LinearKernel)


class PolynomialKernel:
    """k(u, v) = (scale * <u, v> + offset) ** degree.

    Defaults scale=1, offset=1 give the usual inhomogeneous polynomial
    kernel; degree=3 is the cubic kernel.
    """

    variant = "polynomial"

    def __init__(self, degree=3, scale=1.0, offset=1.0):
        if int(degree) != degree or degree < 1:
            raise InputError(f"polynomial degree must be a positive integer, got {degree}")
        if not scale > 0:
            raise InputError(f"polynomial scale must be > 0, got {scale}")
        if offset < 0:
            raise InputError(f"polynomial offset must be >= 0, got {offset}")
        self.degree = int(degree)
        self.scale = float(scale)
        self.offset = float(offset)

    def cross(self, X, Y):
        return (self.scale * (X @ Y.T) + self.offset) ** self.degree

    def diag(self, X):
        return (self.scale * np.einsum("ij,ij->i", X, X) + self.offset) ** self.degree

    def to_dict(self):
        return {
            "variant": "polynomial",
            "degree": self.degree,
            "scale": self.scale,
            "offset": self.offset,
        }

    def __repr__(self):
        return f"PolynomialKernel(degree={self.degree}, scale={self.scale}, offset={self.offset})"

    def __eq__(self, other):
        return (
            isinstance(other, PolynomialKernel)
            and (self.degree, self.scale, self.offset) == (other.degree, other.scale, other.offset)
        )


class GaussianKernel:
    """k(u, v) = exp(-gamma * ||u - v||^2)."""

    variant = "gaussian"

    def __init__(self, gamma=1.0):
        if not gamma > 0:
            raise InputError(f"gaussian gamma must be > 0, got {gamma}")
        self.gamma = float(gamma)

    def cross(self, X, Y):
        # squared distances via the expansion; clip rounding noise so that
        # k stays within (0, 1]
        sq = self.diag_sq(X)[:, None] + self.diag_sq(Y)[None, :] - 2.0 * (X @ Y.T)
        np.maximum(sq, 0.0, out=sq)
        return np.exp(-self.gamma * sq)

    @staticmethod
    def diag_sq(X):
        return np.einsum("ij,ij->i", X, X)

    def diag(self, X):
        return np.ones(X.shape[0])

    def to_dict(self):
        return {"variant": "gaussian", "gamma": self.gamma}

    def __repr__(self):
        return f"GaussianKernel(gamma={self.gamma})"

    def __eq__(self, other):
        return isinstance(other, GaussianKernel) and self.gamma == other.gamma


def kernel_from_dict(doc):
    """Rebuild a kernel from its serialized form."""
    try:
        variant = doc["variant"]
    except (TypeError, KeyError):
        raise InputError("kernel document must carry a 'variant' field") from None
    if variant == "linear":
        return LinearKernel()
    if variant == "polynomial":
        return PolynomialKernel(
            degree=doc.get("degree", 3),
            scale=doc.get("scale", 1.0),
            offset=doc.get("offset", 1.0),
        )
    if variant == "gaussian":
        return GaussianKernel(gamma=doc.get("gamma", 1.0))
    raise InputError(f"unknown kernel variant {variant!r}")


def default_gamma(dim):
    """Default RBF width: gamma = 1/d."""
    if dim < 1:
        raise InputError("dimension must be >= 1")
    return 1.0 / float(dim)


def median_heuristic_gamma(X, max_points=2000, seed=0):
    """gamma = 1 / median of pairwise squared distances.

    Subsamples to `max_points` rows (seeded) before forming the O(n^2)
    distance set.
    """
    X = _as_matrix(X)
    if X.shape[0] > max_points:
        rng = np.random.Generator(np.random.PCG64(seed))
        X = X[rng.choice(X.shape[0], size=max_points, replace=False)]
    sq = GaussianKernel.diag_sq(X)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
    d2 = d2[np.triu_indices(X.shape[0], k=1)]
    d2 = d2[d2 > 0]
    if d2.size == 0:
        raise InputError("median heuristic needs at least two distinct points")
    return 1.0 / float(np.median(d2))


def kernel_eval(kernel, u, v):
    """Evaluate k(u, v) for a single pair of feature vectors."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.ndim != 1 or v.ndim != 1:
        raise InputError("kernel_eval expects 1-D feature vectors")
    if u.shape != v.shape:
        raise InputError(f"dimension mismatch: {u.shape[0]} vs {v.shape[0]}")
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
        raise InputError("feature vectors contain non-finite coordinates")
    if isinstance(kernel, GaussianKernel):
        # direct squared distance: exactly symmetric under (u, v) swap
        diff = u - v
        return float(np.exp(-kernel.gamma * np.dot(diff, diff)))
    if isinstance(kernel, PolynomialKernel):
        return float((kernel.scale * np.dot(u, v) + kernel.offset) ** kernel.degree)
    return float(np.dot(u, v))


def cross_matrix(kernel, X, Y, chunk_entries=4_000_000):
    """Kernel matrix between the rows of X and the rows of Y.

    Computed in row chunks so that large evaluation sets do not allocate
    one huge intermediate.
    """
    X = _as_matrix(X)
    Y = _as_matrix(Y)
    if X.shape[1] != Y.shape[1]:
        raise InputError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    n, m = X.shape[0], Y.shape[0]
    rows_per_chunk = max(1, chunk_entries // m)
    if rows_per_chunk >= n:
        return kernel.cross(X, Y)
    out = np.empty((n, m))
    for start in range(0, n, rows_per_chunk):
        stop = min(start + rows_per_chunk, n)
        out[start:stop] = kernel.cross(X[start:stop], Y)
    return out


def gram_matrix(kernel, points):
    """Symmetric Gram matrix G[i][j] = k(x_i, x_j)."""
    X = _as_matrix(points)
    G = kernel.cross(X, X)
    # BLAS products are not guaranteed bitwise symmetric; enforce it
    G = 0.5 * (G + G.T)
    if isinstance(kernel, GaussianKernel):
        np.fill_diagonal(G, 1.0)
    return G
