import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from covercount import census as cen
from covercount.census import (Prediction, checkpoints_linear,
                               fit_growth, geodesics_by_homology,
                               holonomy_equidistribution, orbit_by_homology,
                               vector_orbit)
from covercount.errors import InsufficientData, ValidationError


@pytest.fixture(scope="module")
def orbit_b(group_b, delta_b, surface_b):
    cps = checkpoints_linear(4.0, 10.0, 8)
    pred = Prediction(delta=delta_b, sigma=surface_b.sigma, d=1)
    return cps, orbit_by_homology(group_b, pred, 10.0, cps)


@pytest.fixture(scope="module")
def geo_b(group_b, delta_b, surface_b):
    cps = checkpoints_linear(6.0, 12.0, 8)
    pred = Prediction(delta=delta_b, sigma=surface_b.sigma, d=1)
    return cps, geodesics_by_homology(group_b, pred, 12.0, cps)


# -- fit_growth ------------------------------------------------------------------

def test_fit_growth_exact_exponential():
    T = np.linspace(2.0, 10.0, 9)
    fit = fit_growth(T, 3.7 * np.exp(2.0 * T))
    assert abs(fit.exponent - 2.0) < 1e-6
    assert abs(fit.log_power) < 1e-6
    assert abs(fit.constant - 3.7) < 1e-5


def test_fit_growth_log_power_with_known_exponent():
    T = np.linspace(3.0, 12.0, 10)
    fit = fit_growth(T, np.exp(T) / np.sqrt(T), fix_exponent=1.0)
    assert abs(fit.log_power + 0.5) < 0.05


def test_fit_growth_constant_series():
    fit = fit_growth(np.linspace(1, 5, 6), np.full(6, 4.0), fix_log_power=0.0)
    assert abs(fit.exponent) < 1e-9


def test_fit_growth_insufficient():
    with pytest.raises(InsufficientData):
        fit_growth([1, 2, 3], [1, 2, 3])
    with pytest.raises(InsufficientData):
        fit_growth(np.arange(1, 7), np.zeros(6))


def test_prediction_validates():
    with pytest.raises(ValidationError):
        Prediction(delta=-1.0, sigma=1.0, d=1)


# -- orbit census ------------------------------------------------------------------

def test_orbit_counts_monotone_and_symmetric(orbit_b):
    cps, rep = orbit_b
    allc = rep.meta["all_classes"]
    for key, arr in allc.items():
        assert np.all(np.diff(arr) >= 0)
        assert np.array_equal(arr, allc[tuple(-x for x in key)])


def test_orbit_identity_at_small_T(group_b, delta_b):
    cps = checkpoints_linear(0.5, 1.0, 5)
    pred = Prediction(delta=delta_b, sigma=1.0, d=1)
    rep = orbit_by_homology(group_b, pred, 1.0, cps, classes=[(0,)])
    assert rep.counts[(0,)][0] == 1  # the identity word
    assert rep.totals[-1] == 1


def test_orbit_marginal_consistency(orbit_b):
    cps, rep = orbit_b
    total_by_class = sum(rep.meta["all_classes"].values())
    assert np.array_equal(total_by_class, rep.totals)


def test_orbit_ratios_positive_where_predicted(orbit_b):
    _, rep = orbit_b
    for key, ratios in rep.ratios.items():
        preds = rep.predictions[key]
        assert np.all(ratios[preds > 0] >= 0)


def test_orbit_requires_positive_d(group_b, delta_b):
    import covercount.schottky as sk
    group0 = sk.SchottkyGroup(group_b.generators,
                              [group_b.disks[sk.sym_index(-(i + 1))] for i in range(group_b.g)],
                              [group_b.disks[sk.sym_index(i + 1)] for i in range(group_b.g)],
                              [], group_b.model)
    with pytest.raises(ValidationError):
        orbit_by_homology(group0, Prediction(delta_b, 1.0, 0), 8.0,
                          checkpoints_linear(4.0, 8.0, 6))


# -- geodesic census ------------------------------------------------------------------

def test_geodesic_class_symmetry(geo_b):
    _, rep = geo_b
    for key, arr in rep.counts.items():
        assert np.array_equal(arr, rep.counts[tuple(-x for x in key)])


def test_geodesic_absolute_prediction_formula(geo_b, delta_b, surface_b):
    cps, rep = geo_b
    L = cps[-1]
    coef = math.sqrt(2.0 * math.pi * surface_b.sigma)
    expected = math.exp(delta_b * L) / (coef * delta_b * L ** 1.5)
    assert_allclose(rep.predictions[(0,)][-1], expected, rtol=1e-12)


def test_geodesic_reproducible(group_b, delta_b, surface_b):
    cps = checkpoints_linear(6.0, 10.0, 5)
    pred = Prediction(delta=delta_b, sigma=surface_b.sigma, d=1)
    r1 = geodesics_by_homology(group_b, pred, 10.0, cps)
    r2 = geodesics_by_homology(group_b, pred, 10.0, cps)
    for key in r1.counts:
        assert np.array_equal(r1.counts[key], r2.counts[key])
    assert np.array_equal(r1.totals, r2.totals)


# -- holonomy census ------------------------------------------------------------------

def test_holonomy_p0_ratio_is_one(group_d0):
    cps = checkpoints_linear(6.0, 10.0, 5)
    rep = holonomy_equidistribution(group_d0, 10.0, [0, 1, -1], cps)
    assert_allclose(rep.ratios[0], np.ones(len(cps)), atol=1e-12)
    # p and -p give conjugate sums, equal moduli
    assert_allclose(rep.ratios[1], rep.ratios[-1], atol=1e-12)


def test_holonomy_requires_h3(group_b):
    with pytest.raises(ValidationError):
        holonomy_equidistribution(group_b, 8.0, [1], checkpoints_linear(4, 8, 5))


# -- vector census ------------------------------------------------------------------

def test_vector_below_norm_is_empty(group_b, delta_b):
    pred = Prediction(delta=delta_b, sigma=1.0, d=1)
    cps = np.array([0.3, 0.5, 0.9])
    rep = vector_orbit(group_b, pred, [1.0, 0.0, 1.0], 0.9, cps, disp_pad=2.0)
    assert np.array_equal(rep.counts["vectors"], np.zeros(3, dtype=int))


def test_vector_counts_norm_equivalence(group_b, delta_b):
    pred = Prediction(delta=delta_b, sigma=1.0, d=1)
    cps = np.exp(np.linspace(5.0, 10.0, 8))
    r_euc = vector_orbit(group_b, pred, [1.0, 0.0, 1.0], float(cps[-1]), cps)
    r_sup = vector_orbit(group_b, pred, [1.0, 0.0, 1.0], float(cps[-1]), cps, norm="sup")
    tail = slice(3, None)
    ratio = r_sup.counts["vectors"][tail] / r_euc.counts["vectors"][tail]
    lo, hi = 3.0 ** -delta_b, 3.0 ** delta_b
    assert np.all(ratio >= lo - 1e-12) and np.all(ratio <= hi + 1e-12)


def test_vector_counts_deduplicated(group_b, delta_b):
    pred = Prediction(delta=delta_b, sigma=1.0, d=1)
    cps = np.exp(np.linspace(5.0, 9.0, 6))
    rep = vector_orbit(group_b, pred, [1.0, 0.0, 1.0], float(cps[-1]), cps)
    assert rep.meta["stabilizer_hits"] == 0


def test_vector_requires_h2(group_d0, delta_b):
    pred = Prediction(delta=delta_b, sigma=1.0, d=0)
    with pytest.raises(ValidationError):
        vector_orbit(group_d0, pred, [1.0, 0.0, 1.0], 100.0, [10.0, 100.0])


# -- report plumbing ------------------------------------------------------------------

def test_census_table_rows(orbit_b):
    _, rep = orbit_b
    rows = rep.table_rows()
    assert rows
    assert set(rows[0]) == {"checkpoint", "class", "count", "predicted", "ratio"}


def test_checkpoints_validation():
    with pytest.raises(ValidationError):
        checkpoints_linear(5.0, 4.0, 6)
