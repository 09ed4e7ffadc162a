"""End-to-end acceptance suite.

Each test prints one `[acceptance] criterion N: PASS/FAIL` line (run with
-s to see them). The synthetic benchmark is the overlapping two-Gaussian
setup (means +/-[1,1], unit covariance scale, 10% feature-swap outliers)
with 3000 training, 5000 calibration and 10000 test samples, evaluated
for an SVM (Gaussian kernel), an SVDD (Gaussian kernel) and a cubic-
kernel logistic regression across epsilon in {0.05,...,0.5}. Seeds are
fixed so the whole suite is reproducible.
"""

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from confsafe import (
    CalibrationProfile,
    Dataset,
    DnsSurrogateSpec,
    GaussianKernel,
    GaussianSpec,
    LinearKernel,
    PolynomialKernel,
    SplitSpec,
    TrainConfig,
    calibrate,
    gen_dns_surrogate,
    gen_two_gaussians,
    gram_matrix,
    quantile,
    split,
    sweep,
    train_lr,
    train_model,
    train_svdd,
    train_svm,
)
from confsafe.cli import main as cli_main
from confsafe.conformal import membership, safe_membership, sigma_membership
from confsafe.training import lr_loss_and_gradient
from tests.test_training import TWO_POINTS, XOR, svm_dual_grid_oracle, svm_dual_objective

EPSILONS = (0.05, 0.1, 0.2, 0.3, 0.4, 0.5)
N_TEST = 10_000
SEED = 200


def report(num, ok, detail=""):
    print(f"\n[acceptance] criterion {num}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, f"criterion {num} failed: {detail}"


def slack(eps, n):
    return 3.0 * math.sqrt(eps * (1.0 - eps) / n)


@pytest.fixture(scope="module")
def exp2_sets():
    def gen(n, seed):
        return gen_two_gaussians(n, GaussianSpec(
            mean_safe=(-1.0, -1.0), mean_unsafe=(1.0, 1.0),
            cov_scale_safe=1.0, cov_scale_unsafe=1.0,
            outlier_prob=0.1, seed=seed))
    return gen(3000, SEED), gen(5000, SEED + 1), gen(10_000, SEED + 2)


@pytest.fixture(scope="module")
def exp2_models(exp2_sets):
    train, _, _ = exp2_sets
    return {
        "svm": train_svm(train, TrainConfig(
            "svm", GaussianKernel(0.5), C=1.0, tolerance=1e-3, seed=SEED)),
        "svdd": train_svdd(train, TrainConfig(
            "svdd", GaussianKernel(0.5), C=0.005, tolerance=1e-5, seed=SEED)),
        "lr": train_lr(train, TrainConfig(
            "lr", PolynomialKernel(3, 0.5, 1.0), C=1.0, tolerance=1e-4,
            max_iterations=5000, seed=SEED)),
    }


@pytest.fixture(scope="module")
def exp2_profiles(exp2_models, exp2_sets):
    _, calib, _ = exp2_sets
    return {name: calibrate(m, calib) for name, m in exp2_models.items()}


@pytest.fixture(scope="module")
def exp2_reports(exp2_models, exp2_profiles, exp2_sets):
    _, _, test = exp2_sets
    return {name: sweep(m, exp2_profiles[name], list(EPSILONS), test)
            for name, m in exp2_models.items()}


@pytest.fixture(scope="module")
def rho_caches(exp2_models, exp2_sets):
    _, _, test = exp2_sets
    centers = np.arange(200) + 0.5
    g1 = -4.0 + centers * 8.0 / 200.0
    grid = np.column_stack([m.ravel() for m in np.meshgrid(g1, g1, indexing="ij")])
    return {name: (m.rho_bar(test.X), m.rho_bar(grid))
            for name, m in exp2_models.items()}


def test_criterion_01_marginal_coverage(exp2_reports):
    worst = math.inf
    for name, reports in exp2_reports.items():
        for r in reports:
            margin = r.epsilon + slack(r.epsilon, N_TEST) - r.err
            worst = min(worst, margin)
    report(1, worst >= 0.0,
           f"err <= eps + 3*sqrt(eps(1-eps)/n) for 3 classifiers x 6 epsilons; "
           f"worst margin {worst:+.4f}")


def test_criterion_02_error_coverage_bound(exp2_reports):
    worst = math.inf
    under_linear = True
    for name, reports in exp2_reports.items():
        for r in reports:
            worst = min(worst, r.epsilon + slack(r.epsilon, N_TEST) - r.csr_error_coverage)
            under_linear &= r.csr_error_coverage <= r.err
    report(2, worst >= 0.0 and under_linear,
           f"false-positive mass bounded (worst margin {worst:+.4f}) "
           f"and below err everywhere: {under_linear}")


def test_criterion_03_region_inclusion(exp2_profiles, rho_caches):
    violations = 0
    tie_violations = 0
    for name, profile in exp2_profiles.items():
        for eps in EPSILONS:
            s_eps = quantile(profile, eps)
            for rho in rho_caches[name]:
                safe = safe_membership(rho, s_eps)
                sigma = sigma_membership(rho, s_eps)
                violations += int(np.sum(safe & ~sigma))
                if s_eps <= 0:
                    ties = rho == -s_eps
                    tie_violations += int(np.sum((sigma ^ safe) & ~ties))
    report(3, violations == 0 and tie_violations == 0,
           f"safe-set containment violations {violations}, "
           f"equality violations off ties {tie_violations} "
           f"(10000 test points + 200x200 grid, all classifiers and epsilons)")


def test_criterion_04_efficiency_trends(exp2_reports):
    trend_slack = 2.0 / math.sqrt(N_TEST)
    ok = True
    for reports in exp2_reports.values():
        doubles = [r.double_rate for r in reports]
        empties = [r.empty_rate for r in reports]
        ok &= all(b <= a + trend_slack for a, b in zip(doubles, doubles[1:]))
        ok &= all(b >= a - trend_slack for a, b in zip(empties, empties[1:]))
    report(4, ok, f"double non-increasing, empty non-decreasing (slack {trend_slack})")


def test_criterion_05_csr_shrinkage(exp2_reports):
    ok = True
    for reports in exp2_reports.values():
        for a, b in itertools.combinations(reports, 2):  # a.epsilon < b.epsilon
            if math.isfinite(a.s_eps) and a.s_eps >= 0 and \
                    math.isfinite(b.s_eps) and b.s_eps >= 0:
                ok &= a.csr_mass <= b.csr_mass
    report(5, ok, "csr_mass monotone over epsilon pairs with nonnegative quantiles")


def test_criterion_06_quantile_oracle():
    rng = np.random.default_rng(606)
    bad = 0
    saw_infinite = False
    for _ in range(1000):
        n_c = int(rng.integers(1, 250))
        scores = np.sort(rng.normal(size=n_c))
        eps = float(rng.uniform(1e-6, 1 - 1e-6))
        target = (n_c + 1) * (1 - Fraction(eps))
        k = 1
        while k < target:
            k += 1
        expected = math.inf if k > n_c else scores[k - 1]
        got = quantile(CalibrationProfile(scores), eps)
        saw_infinite |= math.isinf(expected)
        bad += int(got != expected)
    report(6, bad == 0 and saw_infinite,
           f"{bad} mismatches vs sort-then-index oracle in 1000 cases "
           f"(infinite branch exercised: {saw_infinite})")


def test_criterion_07_solver_correctness():
    # (a) SVM duals against refined-grid maximization
    cfg2 = TrainConfig("svm", LinearKernel(), C=10.0, tolerance=1e-6)
    m2 = train_svm(TWO_POINTS, cfg2)
    _, oracle2 = svm_dual_grid_oracle(TWO_POINTS, cfg2.kernel, cfg2.C)
    gap2 = abs(svm_dual_objective(TWO_POINTS, cfg2.kernel,
                                  np.asarray(m2.metadata["alpha"])) - oracle2)
    cfgx = TrainConfig("svm", GaussianKernel(1.0), C=10.0, tolerance=1e-6)
    mx = train_svm(XOR, cfgx)
    _, oraclex = svm_dual_grid_oracle(XOR, cfgx.kernel, cfgx.C)
    gapx = abs(svm_dual_objective(XOR, cfgx.kernel,
                                  np.asarray(mx.metadata["alpha"])) - oraclex)
    ok_a = gap2 <= 1e-3 and gapx <= 1e-3

    # (b) SVDD analytic minimal balls
    ball2 = train_svdd(Dataset([[1.0, 0.0], [-1.0, 0.0]], [1, 1]),
                       TrainConfig("svdd", LinearKernel(), C=10.0, tolerance=1e-8))
    sq = train_svdd(Dataset([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]],
                            [1, 1, 1, 1]),
                    TrainConfig("svdd", LinearKernel(), C=10.0, tolerance=1e-8))
    center_err2 = float(ball2.dist_sq(np.array([[0.0, 0.0]]))[0])
    center_err4 = float(sq.dist_sq(np.array([[0.5, 0.5]]))[0])
    ok_b = (abs(ball2.radius_sq - 1.0) <= 1e-4 and center_err2 <= 1e-4
            and abs(sq.radius_sq - 0.5) <= 1e-4 and center_err4 <= 1e-4)

    # (c) LR gradient against central finite differences
    rng = np.random.default_rng(77)
    data = Dataset(rng.normal(size=(8, 2)), np.array([1, 1, -1, 1, -1, -1, 1, -1]))
    cfg = TrainConfig("lr", GaussianKernel(0.7), C=2.0)
    h = 1e-6
    worst_rel = 0.0
    for _ in range(20):
        beta = rng.normal(scale=0.8, size=8)
        b = float(rng.normal())
        _, grad_beta, grad_b = lr_loss_and_gradient(data, cfg, beta, b)
        numeric = np.empty(9)
        for k in range(8):
            e = np.zeros(8)
            e[k] = h
            up, _, _ = lr_loss_and_gradient(data, cfg, beta + e, b)
            dn, _, _ = lr_loss_and_gradient(data, cfg, beta - e, b)
            numeric[k] = (up - dn) / (2 * h)
        up, _, _ = lr_loss_and_gradient(data, cfg, beta, b + h)
        dn, _, _ = lr_loss_and_gradient(data, cfg, beta, b - h)
        numeric[8] = (up - dn) / (2 * h)
        analytic = np.append(grad_beta, grad_b)
        worst_rel = max(worst_rel, float(
            np.linalg.norm(numeric - analytic) / np.linalg.norm(analytic)))
    ok_c = worst_rel <= 1e-5

    report(7, ok_a and ok_b and ok_c,
           f"svm dual gaps ({gap2:.2e}, {gapx:.2e}) <= 1e-3; "
           f"svdd balls within 1e-4; lr gradient rel err {worst_rel:.2e} <= 1e-5")


def test_criterion_08_scalable_axioms(exp2_models):
    rng = np.random.default_rng(808)
    X = rng.normal(scale=2.0, size=(1000, 2))
    worst_root = 0.0
    monotone = True
    nested = True
    for model in exp2_models.values():
        roots = model.rho_bar(X)
        residuals = np.abs(np.array(
            [model.predictor(x, r) for x, r in zip(X, roots)]))
        worst_root = max(worst_root, float(residuals.max()))
        for x, root in zip(X[:10], roots[:10]):
            for rho in root + rng.uniform(-2.0, 2.0, size=10):
                monotone &= model.predictor(x, rho + 0.1) > model.predictor(x, rho)
        grid = np.quantile(roots, [0.1, 0.3, 0.5, 0.7, 0.9])
        members = [model.in_level_set(X, rho) for rho in grid]
        for smaller, bigger in zip(members[1:], members):
            nested &= bool(np.all(~smaller | bigger))
    report(8, worst_root <= 1e-9 and monotone and nested,
           f"max |f(x, rho_bar)| = {worst_root:.2e}; strict monotonicity {monotone}; "
           f"nested level sets {nested}")


def test_criterion_09_dns_surrogate():
    def pipeline(intensity, C):
        data = gen_dns_surrogate(DnsSurrogateSpec(
            n_windows=10_000, tunnel_fraction=0.5, packets_per_window=100,
            intensity=intensity, seed=9))
        train, calib, test = split(data, SplitSpec(0.25, 0.25, 0.5, seed=11))
        model = train_model(train, TrainConfig(
            "svm", LinearKernel(), C=C, tolerance=1e-3,
            max_iterations=400_000, seed=1))
        acc = float(np.mean(model.classify(test.X) == test.y))
        return model, calib, test, acc

    _, _, _, acc0 = pipeline(0.0, C=0.01)
    ok_null = 0.45 <= acc0 <= 0.55
    _, _, _, acc10 = pipeline(10.0, C=1.0)
    ok_strong = acc10 >= 0.9

    model, calib, test, acc3 = pipeline(3.0, C=0.1)
    profile = calibrate(model, calib)
    reports = sweep(model, profile, list(EPSILONS), test)
    n = len(test)
    worst = math.inf
    under = True
    for r in reports:
        bound = r.epsilon + slack(r.epsilon, n)
        worst = min(worst, bound - r.err, bound - r.csr_error_coverage)
        under &= r.csr_error_coverage <= r.err
    report(9, ok_null and ok_strong and worst >= 0.0 and under,
           f"accuracy {acc0:.3f} at intensity 0 (want [0.45, 0.55]), "
           f"{acc10:.3f} at intensity 10 (want >= 0.9); sweep at intensity 3 "
           f"(acc {acc3:.3f}) bound margin {worst:+.4f}")


def test_criterion_10_cli_determinism(tmp_path):
    def run(*argv):
        assert cli_main([str(a) for a in argv]) == 0

    data, calib, test = (tmp_path / n for n in ("d.csv", "c.csv", "t.csv"))
    run("generate", "two-gaussians", "--n", 300, "--outlier-prob", 0.1,
        "--seed", 1, "--out", data)
    run("generate", "two-gaussians", "--n", 200, "--outlier-prob", 0.1,
        "--seed", 2, "--out", calib)
    run("generate", "two-gaussians", "--n", 200, "--outlier-prob", 0.1,
        "--seed", 3, "--out", test)
    model, profile = tmp_path / "m.json", tmp_path / "p.json"
    run("train", "--kind", "svm", "--kernel", "gaussian", "--gamma", 0.5,
        "--tolerance", 1e-4, "--seed", 4, "--out", model, data)
    run("calibrate", model, calib, "--out", profile)
    rep, swp, grid = tmp_path / "r.csv", tmp_path / "s.csv", tmp_path / "g.csv"
    run("evaluate", model, profile, test, "--epsilon", 0.2, "--out", rep,
        "--json-out", tmp_path / "r.json")
    run("sweep", model, profile, test, "--eps-grid", "0.05,0.1,0.2,0.5", "--out", swp)
    run("region", model, profile, "--epsilon", 0.1, "--bounds=-4,4,-4,4",
        "--resolution", 50, "--out", grid)

    artifacts = [data, calib, test, model, profile, rep, swp, grid,
                 tmp_path / "r.json"]
    before = {p: p.read_bytes() for p in artifacts}
    for primary in (data, calib, test, model, profile, rep, swp, grid):
        run("rerun", primary.with_name(primary.name + ".manifest.json"))
    identical = all(p.read_bytes() == before[p] for p in artifacts)
    report(10, identical,
           f"{len(artifacts)} artifacts byte-identical after rerun from manifests")
