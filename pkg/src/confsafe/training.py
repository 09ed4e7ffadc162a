"""Solvers producing the three scalable classifier variants.

All three work on a precomputed Gram matrix, run single-threaded and use
no randomness, so training is deterministic for a given dataset and
configuration (the seed is recorded in the model metadata for
provenance). The sign convention is fixed after solving: class +1 must
satisfy f(x, 0) < 0, so the SVM/LR decision functions are negated
relative to the usual "positive class on the positive side" orientation.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .datasets import Dataset
from .exceptions import ConvergenceError, InputError
from .kernels import LinearKernel, gram_matrix
from .models import LRModel, SVDDModel, SVMModel, _sigmoid


@dataclass(frozen=True)
class TrainConfig:
    classifier_kind: str
    kernel: object = field(default_factory=LinearKernel)
    C: float = 1.0
    tolerance: float = 1e-6
    max_iterations: int = 100_000
    learning_rate: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.classifier_kind not in ("svm", "svdd", "lr"):
            raise InputError(f"unknown classifier kind {self.classifier_kind!r}")
        if not self.C > 0:
            raise InputError(f"C must be > 0, got {self.C}")
        if not self.tolerance > 0:
            raise InputError(f"tolerance must be > 0, got {self.tolerance}")
        if self.max_iterations < 1:
            raise InputError("max_iterations must be >= 1")
        if not self.learning_rate > 0:
            raise InputError(f"learning_rate must be > 0, got {self.learning_rate}")
        if not 0 <= self.seed < 2 ** 64:
            raise InputError("seed must be a 64-bit unsigned integer")

    def to_metadata(self):
        return {
            "classifier_kind": self.classifier_kind,
            "kernel": self.kernel.to_dict(),
            "C": self.C,
            "tolerance": self.tolerance,
            "max_iterations": self.max_iterations,
            "learning_rate": self.learning_rate,
            "seed": self.seed,
        }


def train_model(data, cfg):
    """Dispatch to the trainer named by cfg.classifier_kind."""
    if cfg.classifier_kind == "svm":
        return train_svm(data, cfg)
    if cfg.classifier_kind == "svdd":
        return train_svdd(data, cfg)
    return train_lr(data, cfg)


def _require_dataset(data):
    if not isinstance(data, Dataset):
        raise InputError("training data must be a Dataset")
    return data


# ---------------------------------------------------------------------------
# SVM: SMO-style pairwise coordinate ascent on the soft-margin dual
# ---------------------------------------------------------------------------

def train_svm(data, cfg):
    """Soft-margin kernel SVM via maximal-violating-pair SMO.

    Solves max sum(a) - 1/2 a'Qa with 0 <= a <= C, y'a = 0 (Q = yy'K),
    stopping when the maximal KKT pair violation drops to cfg.tolerance.
    The returned model is flipped into the scalable orientation, so the
    +1 class sits where f(x, 0) < 0.
    """
    data = _require_dataset(data)
    y = data.y.astype(float)
    if len(data) < 2 or not (np.any(y > 0) and np.any(y < 0)):
        raise InputError("SVM training needs samples from both classes")
    n = len(data)
    C = cfg.C
    K = gram_matrix(cfg.kernel, data.X)
    alpha = np.zeros(n)
    G = -np.ones(n)  # gradient of 1/2 a'Qa - sum(a)
    snap = 1e-12 * max(1.0, C)

    gap = math.inf
    iterations = 0
    for iterations in range(1, cfg.max_iterations + 1):
        minus_yG = -y * G  # equals y_i - (decision without bias)
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        if not (up.any() and low.any()):
            gap = 0.0
            break
        i = int(np.argmax(np.where(up, minus_yG, -np.inf)))
        j = int(np.argmin(np.where(low, minus_yG, np.inf)))
        gap = minus_yG[i] - minus_yG[j]
        if gap <= cfg.tolerance:
            break
        quad = max(K[i, i] + K[j, j] - 2.0 * K[i, j], 1e-12)
        cap_i = C - alpha[i] if y[i] > 0 else alpha[i]
        cap_j = alpha[j] if y[j] > 0 else C - alpha[j]
        t = min(gap / quad, cap_i, cap_j)
        alpha[i] += y[i] * t
        alpha[j] -= y[j] * t
        # keep the box exact so support-vector bookkeeping stays clean
        for k in (i, j):
            if alpha[k] < snap:
                alpha[k] = 0.0
            elif alpha[k] > C - snap:
                alpha[k] = C
        G += t * y * (K[:, i] - K[:, j])
    model = _finish_svm(data, cfg, alpha, G, y, gap, iterations)
    if gap > cfg.tolerance:
        raise ConvergenceError(
            f"SMO stopped after {iterations} iterations with KKT violation {gap:.3e}",
            diagnostic=gap, model=model,
        )
    return model


def _finish_svm(data, cfg, alpha, G, y, gap, iterations):
    minus_yG = -y * G
    free = (alpha > 0) & (alpha < cfg.C)
    if free.any():
        bias = float(np.mean(minus_yG[free]))
    else:
        up = ((y > 0) & (alpha < cfg.C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < cfg.C))
        hi = np.max(minus_yG[up]) if up.any() else -np.inf
        lo = np.min(minus_yG[low]) if low.any() else np.inf
        if not (np.isfinite(hi) and np.isfinite(lo)):
            bias = float(hi if np.isfinite(hi) else lo)
        else:
            bias = float(0.5 * (hi + lo))
    sv = alpha > 0
    metadata = {
        "config": cfg.to_metadata(),
        "alpha": alpha.tolist(),
        "iterations": iterations,
        "kkt_gap": float(gap) if math.isfinite(gap) else None,
    }
    # scalable orientation: negate (w, b) of the standard decision
    # g(x) = sum a_i y_i k(x_i, x) + bias, so that +1 <=> f(x, 0) < 0
    return SVMModel(
        cfg.kernel,
        data.X[sv],
        -(alpha[sv] * y[sv]),
        bias,
        metadata,
    )


def kkt_violation(model, data, cfg):
    """Max KKT complementarity violation of an SMO-trained model.

    Requires the same data (in the same order) and config used for
    training; the full dual vector is read back from the model metadata.
    """
    if getattr(model, "variant", None) != "svm":
        raise InputError("kkt_violation applies to SVM models only")
    data = _require_dataset(data)
    alpha = np.asarray(model.metadata.get("alpha", ()), dtype=float)
    if alpha.shape != (len(data),):
        raise InputError("model metadata carries no dual vector for this dataset")
    y = data.y.astype(float)
    # stored weights are -(alpha * y), so the unbiased decision is -w.phi
    decision = -(model._wphi(data.X)) + model.bias
    margins = y * decision
    at_zero = alpha <= 0
    at_C = alpha >= cfg.C
    viol = np.abs(margins - 1.0)
    viol[at_zero] = np.maximum(0.0, 1.0 - margins[at_zero])
    viol[at_C] = np.maximum(0.0, margins[at_C] - 1.0)
    return float(np.max(viol))


# ---------------------------------------------------------------------------
# SVDD: projected gradient ascent on the (two-class) minimal-ball dual
# ---------------------------------------------------------------------------

def _project_sum_one(v, lo, hi):
    """Euclidean projection onto {t : sum(t) = 1, lo <= t <= hi}."""
    lam_lo = float(np.min(v - hi)) - 1.0
    lam_hi = float(np.max(v - lo)) + 1.0
    for _ in range(200):
        lam = 0.5 * (lam_lo + lam_hi)
        total = float(np.sum(np.clip(v - lam, lo, hi)))
        if total > 1.0:
            lam_lo = lam
        else:
            lam_hi = lam
        if lam_hi - lam_lo <= 1e-15 * (1.0 + abs(lam)):
            break
    return np.clip(v - 0.5 * (lam_lo + lam_hi), lo, hi)


def _power_lambda_max(K, iterations=60):
    v = np.full(K.shape[0], 1.0 / math.sqrt(K.shape[0]))
    lam = 0.0
    for _ in range(iterations):
        w = K @ v
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            return 0.0
        v = w / norm
        lam = float(v @ (K @ v))
    return lam


def _svdd_duality_gap(cfg, targets, kdiag, theta, k_theta, lo, hi):
    """Primal minus dual objective at the feasible pair implied by theta."""
    center_norm_sq = float(theta @ k_theta)
    dist_sq = kdiag - 2.0 * k_theta + center_norm_sq
    margin = 1e-7 * cfg.C
    on_boundary = (theta != 0.0) & (theta > lo + margin) & (theta < hi - margin)
    if not on_boundary.any():
        on_boundary = theta != 0.0
    radius_sq = max(0.0, float(np.mean(dist_sq[on_boundary])))
    xi = np.where(targets, np.maximum(0.0, dist_sq - radius_sq),
                  np.maximum(0.0, radius_sq - dist_sq))
    primal = radius_sq + cfg.C * float(np.sum(xi))
    dual = float(theta @ kdiag) - center_norm_sq
    return primal - dual, radius_sq, center_norm_sq, dist_sq


def train_svdd(data, cfg):
    """Minimal enclosing ball of the +1 class, repelling -1 samples.

    Maximizes the ball dual W(t) = sum_i t_i K_ii - t'Kt over sum(t) = 1
    with t_i in [0, C] for +1 points and [-C, 0] for -1 points (the
    signed coefficients of the two-class formulation; without negatives
    it reduces to the one-class ball). Projected gradient ascent with a
    Barzilai-Borwein trial step and an exact line search along each
    projected direction; converged when the duality-gap estimate drops
    to cfg.tolerance.
    """
    data = _require_dataset(data)
    targets = data.y == 1
    n_t = int(targets.sum())
    if n_t == 0:
        raise InputError("SVDD training needs at least one +1 sample")
    if cfg.C * n_t < 1.0:
        raise InputError(f"C={cfg.C} too small: need C * n_targets >= 1 "
                         f"for a feasible dual")
    C = cfg.C
    lo = np.where(targets, 0.0, -C)
    hi = np.where(targets, C, 0.0)
    K = gram_matrix(cfg.kernel, data.X)
    kdiag = np.diag(K).copy()
    theta = np.where(targets, 1.0 / n_t, 0.0)

    lam_max = _power_lambda_max(K)
    step = 1.0 / (2.0 * lam_max) if lam_max > 0 else 1.0
    k_theta = K @ theta
    gap = math.inf
    iterations = 0
    for iterations in range(1, cfg.max_iterations + 1):
        gap, _, _, _ = _svdd_duality_gap(cfg, targets, kdiag, theta, k_theta, lo, hi)
        if gap <= cfg.tolerance:
            break
        grad = kdiag - 2.0 * k_theta
        direction = _project_sum_one(theta + step * grad, lo, hi) - theta
        ascent = float(grad @ direction)
        if ascent <= 0.0:
            break  # projection is stationary: no feasible ascent left
        k_dir = K @ direction
        curvature = float(direction @ k_dir)
        t = 1.0 if curvature <= 0 else min(1.0, ascent / (2.0 * curvature))
        theta = theta + t * direction
        k_theta = k_theta + t * k_dir
        if curvature > 0:
            # Barzilai-Borwein spectral step for the next projection
            step = min(max(float(direction @ direction) / (2.0 * curvature),
                           1e-12), 1e12)

    model = _finish_svdd(data, cfg, K, kdiag, theta, k_theta, gap, iterations)
    if gap > cfg.tolerance:
        raise ConvergenceError(
            f"SVDD stopped after {iterations} iterations with duality gap {gap:.3e}",
            diagnostic=gap, model=model,
        )
    return model


def _finish_svdd(data, cfg, K, kdiag, theta, k_theta, gap, iterations):
    targets = data.y == 1
    lo = np.where(targets, 0.0, -cfg.C)
    hi = np.where(targets, cfg.C, 0.0)
    gap, radius_sq, center_norm_sq, _ = _svdd_duality_gap(
        cfg, targets, kdiag, theta, k_theta, lo, hi)
    # the projection clips non-support coordinates to exactly 0, so the
    # kept weights still sum to 1 exactly
    sv = theta != 0.0
    metadata = {
        "config": cfg.to_metadata(),
        "theta": theta.tolist(),
        "iterations": iterations,
        "duality_gap": gap,
    }
    return SVDDModel(cfg.kernel, data.X[sv], theta[sv], center_norm_sq,
                     radius_sq, metadata)


# ---------------------------------------------------------------------------
# LR: gradient descent with backtracking on the kernelized logistic loss
# ---------------------------------------------------------------------------

def _lr_loss(g, y, quad, C, n):
    return float(np.mean(np.logaddexp(0.0, -y * g))) + quad / (2.0 * C * n)


def train_lr(data, cfg):
    """Kernel logistic regression in dual form.

    Minimizes the mean logistic loss of the margin g_i = b - (K beta)_i
    plus the ridge penalty beta'K beta / (2 C n), by steepest descent
    with an Armijo backtracking line search (Barzilai-Borwein initial
    step). Converged when the gradient norm over (beta, b) reaches
    cfg.tolerance; the accepted iterates decrease the loss monotonically.
    """
    data = _require_dataset(data)
    y = data.y.astype(float)
    if not (np.any(y > 0) and np.any(y < 0)):
        raise InputError("LR training needs samples from both classes")
    n = len(data)
    C = cfg.C
    K = gram_matrix(cfg.kernel, data.X)
    beta = np.zeros(n)
    b = 0.0
    m_vec = np.zeros(n)      # K beta
    quad = 0.0               # beta' K beta
    loss = _lr_loss(b - m_vec, y, quad, C, n)
    step = cfg.learning_rate
    prev_d = prev_gd = None

    gnorm = math.inf
    iterations = 0
    for iterations in range(1, cfg.max_iterations + 1):
        g = b - m_vec
        sig = _sigmoid(-y * g)
        grad_beta = (K @ (y * sig + beta / C)) / n
        grad_b = float(-np.mean(y * sig))
        gnorm = math.sqrt(float(grad_beta @ grad_beta) + grad_b * grad_b)
        if gnorm <= cfg.tolerance:
            break

        d_beta, d_b = -grad_beta, -grad_b
        if prev_d is not None:
            dd = float(prev_d @ prev_d) + prev_db * prev_db
            dg = float(prev_d @ (grad_beta - prev_gd)) + prev_db * (grad_b - prev_gdb)
            if dg > 0:
                step = min(max(dd / dg, 1e-12), 1e12)
        K_d = K @ d_beta
        d_m = float(d_beta @ m_vec)
        d_Kd = float(d_beta @ K_d)
        accepted = False
        for _ in range(60):
            trial_g = (b + step * d_b) - (m_vec + step * K_d)
            trial_quad = quad + 2.0 * step * d_m + step * step * d_Kd
            trial_loss = _lr_loss(trial_g, y, trial_quad, C, n)
            if trial_loss <= loss - 1e-4 * step * gnorm * gnorm:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break  # line search stalled at float resolution
        prev_d, prev_db = step * d_beta, step * d_b
        prev_gd, prev_gdb = grad_beta, grad_b
        beta = beta + step * d_beta
        b = b + step * d_b
        m_vec = m_vec + step * K_d
        quad = trial_quad
        loss = trial_loss
        if iterations % 100 == 0:  # refresh incremental caches
            m_vec = K @ beta
            quad = float(beta @ m_vec)
            loss = _lr_loss(b - m_vec, y, quad, C, n)

    metadata = {
        "config": cfg.to_metadata(),
        "iterations": iterations,
        "grad_norm": gnorm,
        "loss": loss,
    }
    model = LRModel(cfg.kernel, data.X, beta, b, metadata)
    if gnorm > cfg.tolerance:
        raise ConvergenceError(
            f"LR stopped after {iterations} iterations with gradient norm {gnorm:.3e}",
            diagnostic=gnorm, model=model,
        )
    return model


def lr_loss_and_gradient(data, cfg, beta, b):
    """Loss and gradient of the LR objective at (beta, b).

    Exposed so the gradient can be validated against finite differences.
    """
    data = _require_dataset(data)
    y = data.y.astype(float)
    n = len(data)
    beta = np.asarray(beta, dtype=float)
    K = gram_matrix(cfg.kernel, data.X)
    m_vec = K @ beta
    quad = float(beta @ m_vec)
    g = b - m_vec
    loss = _lr_loss(g, y, quad, cfg.C, n)
    sig = _sigmoid(-y * g)
    grad_beta = (K @ (y * sig + beta / cfg.C)) / n
    grad_b = float(-np.mean(y * sig))
    return loss, grad_beta, grad_b
