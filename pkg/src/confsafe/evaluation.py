"""Accuracy and efficiency metrics for calibrated models.

evaluate() scores one (model, epsilon) pair on a test set; sweep() reuses
a single pass of rho_bar values across an epsilon grid; region_grid()
rasterizes the conformal categories of a 2-D model for plotting or
export. Reports emit as CSV rows under a fixed header and as JSON (the
+inf quantile serializes as the string "inf").
"""

import csv
import io
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .conformal import membership, quantile, safe_membership, sigma_membership
from .datasets import Dataset
from .exceptions import InputError

REPORT_CSV_HEADER = (
    "epsilon", "n_test", "s_eps", "err", "err_minus", "err_plus",
    "empty_rate", "double_rate", "single_rate", "single_minus_rate",
    "single_plus_rate", "csr_error_coverage", "csr_mass",
)

GRID_CSV_HEADER = ("x1", "x2", "category", "in_sigma", "in_safe_region")


@dataclass(frozen=True)
class CoverageReport:
    """Metrics of one (model, epsilon) pair on one test set.

    Error rates count test points whose true label is missing from the
    conformal set; err_minus / err_plus condition on the true class while
    every other rate is a fraction of the whole test set. In particular
    csr_error_coverage estimates the joint probability of drawing a -1
    label inside the safe set, the quantity bounded by epsilon.
    """

    epsilon: float
    n_test: int
    s_eps: float
    err: float
    err_minus: float
    err_plus: float
    empty_rate: float
    double_rate: float
    single_rate: float
    single_minus_rate: float
    single_plus_rate: float
    csr_error_coverage: float
    csr_mass: float


def evaluate(model, profile, epsilon, test):
    """Coverage and efficiency of the conformal sets at one epsilon."""
    test = _require_test(test)
    rho_bar = model.rho_bar(test.X)
    return _evaluate_scores(rho_bar, test.y, profile, epsilon)


def sweep(model, profile, epsilon_grid, test):
    """One report per epsilon, over a single pass of rho_bar values."""
    grid = [float(e) for e in epsilon_grid]
    if not grid:
        raise InputError("epsilon grid must be nonempty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise InputError("epsilon grid must be strictly ascending")
    test = _require_test(test)
    rho_bar = model.rho_bar(test.X)
    return [_evaluate_scores(rho_bar, test.y, profile, e) for e in grid]


def _require_test(test):
    if not isinstance(test, Dataset) or len(test) == 0:
        raise InputError("test data must be a nonempty Dataset")
    return test


def _evaluate_scores(rho_bar, y, profile, epsilon):
    s_eps = quantile(profile, epsilon)
    n = y.size
    plus, minus = membership(rho_bar, s_eps)
    is_plus = y == 1
    covered = np.where(is_plus, plus, minus)

    err = _rate(~covered, n)
    n_minus = int((~is_plus).sum())
    n_plus = int(is_plus.sum())
    err_minus = _rate(~covered & ~is_plus, n_minus)
    err_plus = _rate(~covered & is_plus, n_plus)

    empty = ~plus & ~minus
    double = plus & minus
    single_plus = plus & ~minus
    single_minus = minus & ~plus

    safe = safe_membership(rho_bar, s_eps)
    return CoverageReport(
        epsilon=float(epsilon),
        n_test=n,
        s_eps=s_eps,
        err=err,
        err_minus=err_minus,
        err_plus=err_plus,
        empty_rate=_rate(empty, n),
        double_rate=_rate(double, n),
        single_rate=_rate(single_plus | single_minus, n),
        single_minus_rate=_rate(single_minus, n),
        single_plus_rate=_rate(single_plus, n),
        csr_error_coverage=_rate(safe & ~is_plus, n),
        csr_mass=_rate(safe, n),
    )


def _rate(mask, denom):
    if denom == 0:
        return 0.0
    return float(np.count_nonzero(mask)) / denom


@dataclass(frozen=True)
class RegionGrid:
    """Flattened raster of conformal categories over a 2-D box."""

    x1: np.ndarray
    x2: np.ndarray
    category: np.ndarray       # "plus" | "minus" | "double" | "empty"
    in_sigma: np.ndarray
    in_safe_region: np.ndarray


def region_grid(model, profile, epsilon, bounds, resolution):
    """Conformal category of every cell center of a resolution^2 raster.

    bounds is ((x1_min, x1_max), (x2_min, x2_max)); cells are squares and
    the category comes from the conformal set at the cell center.
    """
    if model.dim != 2:
        raise InputError("region grids need a 2-dimensional model")
    if resolution < 1:
        raise InputError("resolution must be >= 1")
    (x1_lo, x1_hi), (x2_lo, x2_hi) = bounds
    if not (x1_hi > x1_lo and x2_hi > x2_lo):
        raise InputError("bounds must span a nonempty box")
    centers1 = x1_lo + (np.arange(resolution) + 0.5) * (x1_hi - x1_lo) / resolution
    centers2 = x2_lo + (np.arange(resolution) + 0.5) * (x2_hi - x2_lo) / resolution
    g1, g2 = np.meshgrid(centers1, centers2, indexing="ij")
    points = np.column_stack([g1.ravel(), g2.ravel()])

    s_eps = quantile(profile, epsilon)
    rho_bar = model.rho_bar(points)
    plus, minus = membership(rho_bar, s_eps)
    category = np.full(points.shape[0], "empty", dtype="U6")
    category[plus & minus] = "double"
    category[plus & ~minus] = "plus"
    category[minus & ~plus] = "minus"
    return RegionGrid(
        x1=points[:, 0],
        x2=points[:, 1],
        category=category,
        in_sigma=sigma_membership(rho_bar, s_eps),
        in_safe_region=safe_membership(rho_bar, s_eps),
    )


def _cell(value):
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return str(value)


def reports_to_csv(reports):
    """Fixed-header CSV, one row per report."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_CSV_HEADER)
    for report in reports:
        doc = asdict(report)
        writer.writerow([_cell(doc[name]) for name in REPORT_CSV_HEADER])
    return buf.getvalue()


def reports_to_json(reports):
    """JSON array of report objects; non-finite quantiles become "inf"."""
    docs = []
    for report in reports:
        doc = asdict(report)
        if math.isinf(doc["s_eps"]):
            doc["s_eps"] = "inf" if doc["s_eps"] > 0 else "-inf"
        docs.append(doc)
    return json.dumps(docs, sort_keys=True, indent=1) + "\n"


def grid_to_csv(grid):
    """CSV of a RegionGrid under the fixed x1,x2,... header."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(GRID_CSV_HEADER)
    for x1, x2, cat, sig, safe in zip(
            grid.x1, grid.x2, grid.category, grid.in_sigma, grid.in_safe_region):
        writer.writerow([repr(float(x1)), repr(float(x2)), cat,
                         "true" if sig else "false",
                         "true" if safe else "false"])
    return buf.getvalue()
