"""Score predicted masks against references.

Takes the phantom's true vessel masks as ground truth, fabricates two
imperfect "model predictions" from them (one eroded, one shifted), and walks
through the five segmentation-quality metrics: DSC, Jaccard, precision,
HD95 and centerline Dice. Ends with macro vs micro aggregation over a small
batch, which is what the evaluation harness does dataset-wide.

Run:  python3 demos/02_score_a_segmentation.py
"""

import numpy as np
from scipy import ndimage

from fundusquant import METRICS, aggregate, cldice, dsc, hd95, jaccard, micro_average, precision
from fundusquant.synth import fundus_phantom

phantom = fundus_phantom(512, with_lesions=False, seed=11)
gt_artery = phantom["masks"]["Artery"]
gt_vein = phantom["masks"]["Vein"]

# Prediction A: slightly eroded arteries (misses thin tails, no false alarms).
pred_a = ndimage.binary_erosion(gt_artery, iterations=1)
# Prediction B: veins shifted 3 px right (systematic registration error).
pred_b = np.zeros_like(gt_vein)
pred_b[:, 3:] = gt_vein[:, :-3]

print("prediction A = eroded arteries, prediction B = veins shifted 3 px\n")
for label, pred, gt in [("A", pred_a, gt_artery), ("B", pred_b, gt_vein)]:
    print(f"prediction {label}")
    for name, fn in METRICS.items():
        r = fn(pred, gt)
        shown = f"{r.value:.4f}" if r.ok else f"undefined ({r.reason})"
        print(f"  {name:9s} {shown}")
    print()

# Erosion removes only true pixels, so precision stays perfect while DSC
# drops; the shift instead trades equal misses for equal false alarms.
assert precision(pred_a, gt_artery).value == 1.0

# Jaccard is not an independent number: jac = dsc / (2 - dsc), always.
d = dsc(pred_b, gt_vein).value
j = jaccard(pred_b, gt_vein).value
print(f"identity check: jac {j:.12f} == dsc/(2-dsc) {d / (2 - d):.12f}")

# HD95 reads boundary geometry that count metrics cannot see: a 3 px shift
# bounds the boundary distances by 3 even though ~40% of pixels mismatch.
print(f"HD95 of the 3 px shift: {hd95(pred_b, gt_vein).value:.3f} px")

# clDice only cares about centerlines. Thickness errors are forgiven as long
# as the skeleton stays inside the other mask, so dilating the arteries keeps
# topology sensitivity at 1 while DSC already dropped to ~0.8.
fat = ndimage.binary_dilation(gt_artery, iterations=1)
print(f"dilated arteries: dsc {dsc(fat, gt_artery).value:.4f}, "
      f"cldice {cldice(fat, gt_artery).value:.4f}\n")

# Aggregation across a batch. Macro = mean of per-image values; micro = pool
# the pixel counts first (hd95 has no count form and keeps the macro mean).
pairs = [(pred_a, gt_artery), (pred_b, gt_vein)]
per_image = [dsc(p, g) for p, g in pairs]
macro = aggregate(per_image)
micro = micro_average("dsc", pairs)
print(f"dsc macro mean over {macro.n_ok} images: {macro.mean:.4f}")
print(f"dsc micro (pooled counts):           {micro.value:.4f}")
print("micro != macro because image B has far more vessel pixels than A's misses")
