"""Segmentation metrics against definitional oracles."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp
from scipy import ndimage

from fundusquant import segmetrics as sm
from fundusquant.errors import AllUndefined, ShapeMismatch
from oracles import (
    dsc_oracle,
    hd95_oracle,
    jac_oracle,
    max_directed_hausdorff,
    pixel_counts,
    precision_oracle,
)

masks_32 = hnp.arrays(dtype=bool, shape=(32, 32))


def random_pair(rng, shape=(32, 32), density=0.5):
    return rng.random(shape) < density, rng.random(shape) < density


# ------------------------------------------------------------- count metrics


def test_overlap_counts_match_pixel_loop():
    rng = np.random.default_rng(11)
    for _ in range(20):
        pred, gt = random_pair(rng)
        assert sm.overlap_counts(pred, gt) == pixel_counts(pred, gt)


def test_dsc_jac_precision_match_oracles():
    rng = np.random.default_rng(3)
    for _ in range(50):
        pred, gt = random_pair(rng, density=rng.uniform(0.05, 0.95))
        assert sm.dsc(pred, gt).value == dsc_oracle(pred, gt)
        assert sm.jaccard(pred, gt).value == jac_oracle(pred, gt)
        p = sm.precision(pred, gt)
        o = precision_oracle(pred, gt)
        if o is None:
            assert not p.ok and p.reason == "NoPositives"
        else:
            assert p.value == o


def test_both_empty_conventions():
    z = np.zeros((8, 8), dtype=bool)
    assert sm.dsc(z, z).value == 1.0
    assert sm.jaccard(z, z).value == 1.0
    assert sm.hd95(z, z).value == 0.0
    p = sm.precision(z, z)
    assert not p.ok and p.reason == "NoPositives"
    c = sm.cldice(z, z)
    assert not c.ok and c.reason == "EmptySkeleton"


def test_one_empty_side():
    z = np.zeros((8, 8), dtype=bool)
    m = z.copy()
    m[3:5, 3:5] = True
    assert sm.dsc(m, z).value == 0.0
    assert sm.jaccard(z, m).value == 0.0
    for a, b in ((m, z), (z, m)):
        h = sm.hd95(a, b)
        assert not h.ok and h.reason == "EmptyMask"
    assert sm.precision(z, m).reason == "NoPositives"
    assert sm.precision(m, z).value == 0.0


def test_identical_masks_are_perfect():
    rng = np.random.default_rng(5)
    m = ndimage.binary_dilation(rng.random((32, 32)) > 0.93, iterations=2)
    assert sm.dsc(m, m).value == 1.0
    assert sm.jaccard(m, m).value == 1.0
    assert sm.hd95(m, m).value == 0.0
    assert sm.cldice(m, m).value == 1.0


def test_shape_mismatch_raises():
    with pytest.raises(ShapeMismatch):
        sm.dsc(np.zeros((4, 4), bool), np.zeros((5, 4), bool))


@given(pred=masks_32, gt=masks_32)
@settings(max_examples=60, deadline=None)
def test_jaccard_dsc_identity(pred, gt):
    d = sm.dsc(pred, gt).value
    j = sm.jaccard(pred, gt).value
    assert abs(j - d / (2.0 - d)) < 1e-12


@given(pred=masks_32, gt=masks_32)
@settings(max_examples=40, deadline=None)
def test_symmetry_dsc_jac(pred, gt):
    assert sm.dsc(pred, gt).value == sm.dsc(gt, pred).value
    assert sm.jaccard(pred, gt).value == sm.jaccard(gt, pred).value


@given(pred=masks_32, gt=masks_32)
@settings(max_examples=40, deadline=None)
def test_values_in_unit_interval(pred, gt):
    for name in ("dsc", "jac", "precision", "cldice"):
        r = sm.compute_metric(name, pred, gt)
        if r.ok:
            assert 0.0 <= r.value <= 1.0
    h = sm.hd95(pred, gt)
    if h.ok:
        assert h.value >= 0.0


# --------------------------------------------------------------------- hd95


def test_hd95_matches_exhaustive_oracle():
    rng = np.random.default_rng(17)
    for _ in range(25):
        pred = ndimage.binary_dilation(rng.random((32, 32)) > 0.97, iterations=2)
        gt = ndimage.binary_dilation(rng.random((32, 32)) > 0.97, iterations=2)
        got = sm.hd95(pred, gt)
        want = hd95_oracle(pred, gt)
        if want is None:
            assert not got.ok
        else:
            assert abs(got.value - want) < 1e-9


def test_hd95_symmetry_and_bound():
    rng = np.random.default_rng(23)
    for _ in range(10):
        pred = ndimage.binary_dilation(rng.random((32, 32)) > 0.96, iterations=1)
        gt = ndimage.binary_dilation(rng.random((32, 32)) > 0.96, iterations=1)
        if not (pred.any() and gt.any()):
            continue
        a = sm.hd95(pred, gt).value
        b = sm.hd95(gt, pred).value
        assert abs(a - b) < 1e-12
        assert a <= max_directed_hausdorff(pred, gt) + 1e-12


def test_hd95_known_translation():
    # two horizontal segments one row apart: every boundary point is 1 away
    a = np.zeros((16, 16), bool)
    b = np.zeros((16, 16), bool)
    a[4, 2:14] = True
    b[5, 2:14] = True
    assert abs(sm.hd95(a, b).value - 1.0) < 1e-12


def test_hd95_scale_factor():
    a = np.zeros((16, 16), bool)
    b = np.zeros((16, 16), bool)
    a[4, 2:14] = True
    b[6, 2:14] = True
    base = sm.hd95(a, b).value
    assert abs(sm.hd95(a, b, scale=3.5).value - 3.5 * base) < 1e-12


# ------------------------------------------------------------------- cldice


def test_cldice_identical_elongated_structure():
    m = np.zeros((48, 48), bool)
    m[10:14, 4:44] = True
    m[4:44, 30:33] = True
    assert sm.cldice(m, m).value == 1.0


def test_cldice_dilated_line_still_one():
    # thicker prediction whose centerline stays inside the reference
    gt = np.zeros((32, 32), bool)
    gt[15:17, 4:28] = True
    pred = ndimage.binary_dilation(gt, iterations=2)
    r = sm.cldice(pred, gt)
    # pred skeleton lies inside gt only if thickening is symmetric; tsens is 1
    assert r.ok
    assert r.value > 0.9


def test_cldice_half_coverage():
    gt = np.zeros((20, 64), bool)
    gt[9:11, 2:62] = True
    pred = np.zeros_like(gt)
    pred[9:11, 2:32] = True  # half the length
    r = sm.cldice(pred, gt)
    assert r.ok
    assert abs(r.value - 2.0 / 3.0) < 0.05


def test_cldice_disjoint_is_zero():
    pred = np.zeros((32, 32), bool)
    gt = np.zeros((32, 32), bool)
    pred[4:6, 2:30] = True
    gt[20:22, 2:30] = True
    assert sm.cldice(pred, gt).value == 0.0


# -------------------------------------------------------------- aggregation


def test_aggregate_macro_mean_skips_undefined():
    rs = [
        sm.MetricResult("dsc", 0.5),
        sm.MetricResult("dsc", None, "undefined", "EmptyMask"),
        sm.MetricResult("dsc", 1.0),
    ]
    agg = sm.aggregate(rs)
    assert agg.mean == pytest.approx(0.75)
    assert agg.n_ok == 2
    assert agg.n_undefined == 1


def test_aggregate_all_undefined_raises():
    rs = [sm.MetricResult("dsc", None, "undefined", "EmptyMask")] * 3
    with pytest.raises(AllUndefined):
        sm.aggregate(rs)


def test_aggregate_empty_raises():
    with pytest.raises(ValueError):
        sm.aggregate([])


def test_micro_average_pools_counts():
    rng = np.random.default_rng(31)
    pairs = [random_pair(rng) for _ in range(4)]
    tp = sum(pixel_counts(p, g)[0] for p, g in pairs)
    fp = sum(pixel_counts(p, g)[1] for p, g in pairs)
    fn = sum(pixel_counts(p, g)[2] for p, g in pairs)
    assert sm.micro_average("dsc", pairs).value == pytest.approx(2 * tp / (2 * tp + fp + fn))
    assert sm.micro_average("jac", pairs).value == pytest.approx(tp / (tp + fp + fn))
    assert sm.micro_average("precision", pairs).value == pytest.approx(tp / (tp + fp))


def test_micro_average_hd95_unsupported():
    rng = np.random.default_rng(37)
    with pytest.raises(ValueError):
        sm.micro_average("hd95", [random_pair(rng)])


def test_compute_metric_unknown_name():
    z = np.zeros((4, 4), bool)
    with pytest.raises(ValueError):
        sm.compute_metric("f1", z, z)


@given(base=masks_32)
@settings(max_examples=30, deadline=None)
def test_precision_perfect_on_subsets(base):
    """A prediction that is a subset of the truth has precision 1."""
    if not base.any():
        return
    pred = base.copy()
    pred[np.nonzero(base)[0][0], np.nonzero(base)[1][0]] = True
    sub = base & pred
    r = sm.precision(sub, base)
    if r.ok:
        assert r.value == 1.0
