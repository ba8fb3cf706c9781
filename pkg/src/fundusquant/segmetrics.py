"""Segmentation quality metrics: DSC, JAC, precision, HD95, clDice.

Empty-mask conventions: perfect agreement on absence scores 1.0 for DSC/JAC
and 0.0 for HD95; a one-sided absence is undefined rather than 0 or
infinity so aggregation can exclude and count it.
"""

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import AllUndefined
from .raster import as_mask, boundary_pixels, check_same_shape, skeletonize


@dataclass(frozen=True)
class MetricResult:
    name: str
    value: float | None
    status: str = "ok"          # ok | undefined
    reason: str | None = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def _ok(name: str, value: float) -> MetricResult:
    return MetricResult(name, float(value))


def _undefined(name: str, reason: str) -> MetricResult:
    return MetricResult(name, None, "undefined", reason)


def overlap_counts(pred: np.ndarray, gt: np.ndarray) -> tuple[int, int, int]:
    """(TP, FP, FN) pixel counts; the micro-averaging substrate."""
    pred = as_mask(pred)
    gt = as_mask(gt)
    check_same_shape(pred, gt)
    tp = int((pred & gt).sum())
    return tp, int(pred.sum()) - tp, int(gt.sum()) - tp


def dsc(pred: np.ndarray, gt: np.ndarray) -> MetricResult:
    tp, fp, fn = overlap_counts(pred, gt)
    denom = 2 * tp + fp + fn
    if denom == 0:
        return _ok("dsc", 1.0)
    return _ok("dsc", 2.0 * tp / denom)


def jaccard(pred: np.ndarray, gt: np.ndarray) -> MetricResult:
    tp, fp, fn = overlap_counts(pred, gt)
    denom = tp + fp + fn
    if denom == 0:
        return _ok("jac", 1.0)
    return _ok("jac", tp / denom)


def precision(pred: np.ndarray, gt: np.ndarray) -> MetricResult:
    tp, fp, _ = overlap_counts(pred, gt)
    if tp + fp == 0:
        return _undefined("precision", "NoPositives")
    return _ok("precision", tp / (tp + fp))


def hd95(pred: np.ndarray, gt: np.ndarray, *, scale: float = 1.0) -> MetricResult:
    """95th percentile of pooled symmetric boundary distances.

    ``scale`` converts pixels to physical units when the manifest provides
    a micrometer-per-pixel factor.
    """
    pred = as_mask(pred)
    gt = as_mask(gt)
    check_same_shape(pred, gt)
    p_any = bool(pred.any())
    g_any = bool(gt.any())
    if not p_any and not g_any:
        return _ok("hd95", 0.0)
    if not p_any or not g_any:
        return _undefined("hd95", "EmptyMask")
    bp = boundary_pixels(pred).astype(np.float64)
    bg = boundary_pixels(gt).astype(np.float64)
    d_pg = cKDTree(bg).query(bp, k=1)[0]
    d_gp = cKDTree(bp).query(bg, k=1)[0]
    pooled = np.concatenate([d_pg, d_gp])
    return _ok("hd95", float(np.percentile(pooled, 95.0)) * scale)


def cldice(pred: np.ndarray, gt: np.ndarray) -> MetricResult:
    """Centerline Dice: harmonic mean of topology precision and sensitivity."""
    pred = as_mask(pred)
    gt = as_mask(gt)
    check_same_shape(pred, gt)
    sp = skeletonize(pred)
    sg = skeletonize(gt)
    n_sp = int(sp.sum())
    n_sg = int(sg.sum())
    if n_sp == 0 or n_sg == 0:
        return _undefined("cldice", "EmptySkeleton")
    tprec = float((sp & gt).sum()) / n_sp
    tsens = float((sg & pred).sum()) / n_sg
    if tprec == 0.0 and tsens == 0.0:
        return _ok("cldice", 0.0)
    return _ok("cldice", 2.0 * tprec * tsens / (tprec + tsens))


METRICS = {
    "dsc": dsc,
    "jac": jaccard,
    "precision": precision,
    "hd95": hd95,
    "cldice": cldice,
}


def compute_metric(name: str, pred: np.ndarray, gt: np.ndarray, **kwargs) -> MetricResult:
    if name not in METRICS:
        raise ValueError(f"unknown metric {name!r}; choose from {sorted(METRICS)}")
    return METRICS[name](pred, gt, **kwargs)


@dataclass(frozen=True)
class AggregateResult:
    name: str
    mean: float
    n_ok: int
    n_undefined: int


def aggregate(results: list[MetricResult]) -> AggregateResult:
    """Macro mean over defined values; undefined entries excluded and counted."""
    if not results:
        raise ValueError("nothing to aggregate")
    name = results[0].name
    vals = [r.value for r in results if r.ok]
    n_undef = sum(1 for r in results if not r.ok)
    if not vals:
        raise AllUndefined(f"all {len(results)} {name} results undefined")
    return AggregateResult(name, float(np.mean(vals)), len(vals), n_undef)


def micro_average(name: str, pairs: list[tuple[np.ndarray, np.ndarray]]) -> MetricResult:
    """Pool pixel counts (or skeleton counts for clDice) across pairs.

    HD95 has no meaningful pooled-count form; callers fall back to the
    macro mean for it.
    """
    if name in ("dsc", "jac", "precision"):
        tp = fp = fn = 0
        for pred, gt in pairs:
            a, b, c = overlap_counts(pred, gt)
            tp, fp, fn = tp + a, fp + b, fn + c
        if name == "dsc":
            denom = 2 * tp + fp + fn
            return _ok(name, 1.0) if denom == 0 else _ok(name, 2.0 * tp / denom)
        if name == "jac":
            denom = tp + fp + fn
            return _ok(name, 1.0) if denom == 0 else _ok(name, tp / denom)
        if tp + fp == 0:
            return _undefined(name, "NoPositives")
        return _ok(name, tp / (tp + fp))
    if name == "cldice":
        sp_in_gt = sp_total = sg_in_pred = sg_total = 0
        for pred, gt in pairs:
            pred = as_mask(pred)
            gt = as_mask(gt)
            check_same_shape(pred, gt)
            sp = skeletonize(pred)
            sg = skeletonize(gt)
            sp_total += int(sp.sum())
            sg_total += int(sg.sum())
            sp_in_gt += int((sp & gt).sum())
            sg_in_pred += int((sg & pred).sum())
        if sp_total == 0 or sg_total == 0:
            return _undefined(name, "EmptySkeleton")
        tprec = sp_in_gt / sp_total
        tsens = sg_in_pred / sg_total
        if tprec == 0.0 and tsens == 0.0:
            return _ok(name, 0.0)
        return _ok(name, 2.0 * tprec * tsens / (tprec + tsens))
    raise ValueError(f"metric {name!r} has no micro-averaged form")
