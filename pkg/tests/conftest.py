import numpy as np
import pytest

from confsafe import (
    GaussianKernel,
    GaussianSpec,
    LinearKernel,
    LRModel,
    PolynomialKernel,
    SVDDModel,
    SVMModel,
    TrainConfig,
    gen_two_gaussians,
    train_lr,
    train_svdd,
    train_svm,
)


def gauss_data(n, seed, outlier_prob=0.1):
    spec = GaussianSpec(cov_scale_safe=1.0, cov_scale_unsafe=1.0,
                        outlier_prob=outlier_prob, seed=seed)
    return gen_two_gaussians(n, spec)


@pytest.fixture(scope="session")
def small_splits():
    return gauss_data(240, 5), gauss_data(400, 6), gauss_data(800, 7)


@pytest.fixture(scope="session")
def trained_models(small_splits):
    train, _, _ = small_splits
    svm = train_svm(train, TrainConfig("svm", GaussianKernel(0.5), C=1.0,
                                       tolerance=1e-4, seed=1))
    svdd = train_svdd(train, TrainConfig("svdd", GaussianKernel(0.5), C=0.05,
                                         tolerance=1e-5, seed=1))
    lr = train_lr(train, TrainConfig("lr", PolynomialKernel(3, 0.5, 1.0), C=1.0,
                                     tolerance=5e-3, max_iterations=20000, seed=1))
    return {"svm": svm, "svdd": svdd, "lr": lr}


@pytest.fixture(scope="session")
def hand_models():
    """Fixed models built directly from parameters (no training)."""
    rng = np.random.Generator(np.random.PCG64(3))
    pts = rng.normal(size=(6, 2))
    weights = rng.normal(size=6) * 0.7
    svm = SVMModel(GaussianKernel(0.8), pts, weights, 0.2)
    lr = LRModel(LinearKernel(), pts, weights, -0.4)
    w = np.abs(rng.normal(size=4))
    w /= w.sum()
    centers = rng.normal(size=(4, 2))
    gram = np.exp(-0.8 * ((centers[:, None, :] - centers[None, :, :]) ** 2).sum(-1))
    svdd = SVDDModel(GaussianKernel(0.8), centers, w, float(w @ gram @ w), 0.6)
    return {"svm": svm, "svdd": svdd, "lr": lr}
