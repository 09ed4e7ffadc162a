import csv
import io
import json
import math

import numpy as np
import pytest

from confsafe import (
    CalibrationProfile,
    Dataset,
    InputError,
    LinearKernel,
    SVDDModel,
    SVMModel,
    calibrate,
    conformal_set,
    evaluate,
    grid_to_csv,
    region_grid,
    reports_to_csv,
    reports_to_json,
    sweep,
)
from confsafe.evaluation import GRID_CSV_HEADER, REPORT_CSV_HEADER
from tests.conftest import gauss_data


@pytest.fixture
def svm_w10():
    return SVMModel(LinearKernel(), [[1.0, 0.0]], [1.0], 0.0)


# rho_bar values (0.7, 0.2, -0.4) with labels (+1, -1, -1)
THREE = Dataset([[-0.7, 0.0], [-0.2, 0.0], [0.4, 0.0]], [1, -1, -1])


def test_evaluate_infinite_quantile(svm_w10):
    prof = CalibrationProfile(np.array([1.0]))  # eps 0.1 -> rank 2 > 1 -> +inf
    r = evaluate(svm_w10, prof, 0.1, THREE)
    assert r.err == 0.0
    assert r.double_rate == 1.0
    assert r.empty_rate == 0.0
    assert r.csr_mass == 0.0
    assert math.isinf(r.s_eps)


def test_evaluate_hand_case_positive_quantile(svm_w10):
    prof = CalibrationProfile(np.array([0.5]))  # quantile 0.5 at eps 0.6
    r = evaluate(svm_w10, prof, 0.6, THREE)
    # conformal sets: {+1}, {-1,+1}, {-1,+1}
    assert r.err == 0.0
    assert r.single_plus_rate == pytest.approx(1 / 3)
    assert r.double_rate == pytest.approx(2 / 3)
    assert r.empty_rate == 0.0
    # S membership (true, false, false), no y=-1 point inside
    assert r.csr_mass == pytest.approx(1 / 3)
    assert r.csr_error_coverage == 0.0


def test_evaluate_hand_case_negative_quantile(svm_w10):
    prof = CalibrationProfile(np.array([-0.1]))  # quantile -0.1 at eps 0.6
    r = evaluate(svm_w10, prof, 0.6, THREE)
    # sets by the score rule: {+1} (0.7), {+1} (0.2: -0.2 <= -0.1), {-1} (-0.4)
    assert r.err == pytest.approx(1 / 3)  # middle true -1 not covered
    assert r.empty_rate == 0.0
    assert r.single_plus_rate == pytest.approx(2 / 3)
    assert r.single_minus_rate == pytest.approx(1 / 3)
    assert r.err_minus == pytest.approx(1 / 2)
    assert r.err_plus == 0.0
    # rho_eps = 0.1: S = (0.7, 0.2) > 0.1 -> includes the y=-1 middle point
    assert r.csr_mass == pytest.approx(2 / 3)
    assert r.csr_error_coverage == pytest.approx(1 / 3)
    assert r.csr_error_coverage <= r.err


def test_rate_identities_and_order_independence(hand_models, small_splits):
    _, calib, test = small_splits
    for model in hand_models.values():
        prof = calibrate(model, calib)
        for eps in (0.05, 0.3, 0.8):
            r = evaluate(model, prof, eps, test)
            assert r.empty_rate + r.double_rate + r.single_rate == pytest.approx(1.0, abs=1e-12)
            assert r.single_rate == pytest.approx(r.single_minus_rate + r.single_plus_rate,
                                                  abs=1e-12)
            assert r.csr_error_coverage <= r.csr_mass
            perm = np.random.default_rng(0).permutation(len(test))
            assert evaluate(model, prof, eps, test.subset(perm)) == r


def test_err_plus_coverage_is_one(hand_models, small_splits):
    _, calib, test = small_splits
    model = hand_models["svm"]
    prof = calibrate(model, calib)
    r = evaluate(model, prof, 0.2, test)
    covered = sum(
        int(y in conformal_set(model, prof, 0.2, x))
        for x, y in zip(test.X, test.y)
    )
    assert r.err + covered / len(test) == 1.0


def test_sweep_monotone_trends(hand_models, small_splits):
    _, calib, test = small_splits
    grid = [0.05, 0.1, 0.2, 0.3, 0.4, 0.5]
    slack = 2 / math.sqrt(len(test))
    for model in hand_models.values():
        prof = calibrate(model, calib)
        reports = sweep(model, prof, grid, test)
        errs = [r.err for r in reports]
        doubles = [r.double_rate for r in reports]
        empties = [r.empty_rate for r in reports]
        assert all(b >= a - slack for a, b in zip(errs, errs[1:]))
        assert all(b <= a + slack for a, b in zip(doubles, doubles[1:]))
        assert all(b >= a - slack for a, b in zip(empties, empties[1:]))
        for r in reports:
            bound = r.epsilon + 3 * math.sqrt(r.epsilon * (1 - r.epsilon) / r.n_test)
            assert r.err <= bound
            assert r.csr_error_coverage <= bound


def test_sweep_validates_grid(hand_models, small_splits):
    _, calib, test = small_splits
    prof = calibrate(hand_models["svm"], calib)
    with pytest.raises(InputError):
        sweep(hand_models["svm"], prof, [], test)
    with pytest.raises(InputError):
        sweep(hand_models["svm"], prof, [0.2, 0.1], test)


def test_evaluate_rejects_empty_test(hand_models, small_splits):
    _, calib, _ = small_splits
    prof = calibrate(hand_models["svm"], calib)
    with pytest.raises(InputError):
        evaluate(hand_models["svm"], prof, 0.1, None)


def test_region_grid_all_double_at_infinite_quantile(svm_w10):
    prof = CalibrationProfile(np.array([1.0]))
    grid = region_grid(svm_w10, prof, 0.1, ((-2, 2), (-2, 2)), 10)
    assert np.all(grid.category == "double")
    assert not np.any(grid.in_safe_region)


def test_region_grid_inclusion_and_geometry():
    ball = SVDDModel(LinearKernel(), [[0.0, 0.0]], [1.0], 0.0, 1.0)
    prof = CalibrationProfile(np.array([0.0]))  # quantile 0 at eps 0.6
    grid = region_grid(ball, prof, 0.6, ((-2, 2), (-2, 2)), 40)
    assert not np.any(grid.in_safe_region & ~grid.in_sigma)
    inside = grid.x1 ** 2 + grid.x2 ** 2 < 1.0
    assert np.array_equal(grid.in_safe_region, inside)


def test_region_grid_rejects_bad_input(svm_w10, hand_models):
    prof = CalibrationProfile(np.array([0.0]))
    with pytest.raises(InputError):
        region_grid(SVMModel(LinearKernel(), [[1.0]], [1.0], 0.0), prof, 0.5,
                    ((-1, 1), (-1, 1)), 5)
    with pytest.raises(InputError):
        region_grid(svm_w10, prof, 0.5, ((1, -1), (-1, 1)), 5)
    with pytest.raises(InputError):
        region_grid(svm_w10, prof, 0.5, ((-1, 1), (-1, 1)), 0)


def test_reports_csv_and_json(svm_w10):
    prof = CalibrationProfile(np.array([0.5]))
    inf_prof = CalibrationProfile(np.array([1.0]))
    reports = [evaluate(svm_w10, prof, 0.6, THREE),
               evaluate(svm_w10, inf_prof, 0.1, THREE)]
    text = reports_to_csv(reports)
    rows = list(csv.reader(io.StringIO(text)))
    assert tuple(rows[0]) == REPORT_CSV_HEADER
    assert len(rows) == 3
    assert rows[2][2] == "inf"
    assert float(rows[1][3]) == reports[0].err
    docs = json.loads(reports_to_json(reports))
    assert docs[0]["epsilon"] == 0.6
    assert docs[1]["s_eps"] == "inf"


def test_grid_csv_header(svm_w10):
    prof = CalibrationProfile(np.array([0.0]))
    grid = region_grid(svm_w10, prof, 0.6, ((-1, 1), (-1, 1)), 3)
    rows = list(csv.reader(io.StringIO(grid_to_csv(grid))))
    assert tuple(rows[0]) == GRID_CSV_HEADER
    assert len(rows) == 10
    assert set(r[3] for r in rows[1:]) <= {"true", "false"}
