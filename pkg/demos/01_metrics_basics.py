"""Walk-through of the verification metrics on a tiny score set.

The decision rule is accept iff score >= threshold. FAR counts impostor
pairs at or above the threshold, FRR counts genuine pairs below it, and
every operating point sits at a distinct observed score (plus sentinels).
"""

from fusebench import eer, evaluate_scores, frr_at_far, roc

genuine = [0.92, 0.85, 0.71, 0.66, 0.60]
impostor = [0.65, 0.41, 0.33, 0.20, 0.12, 0.05]

curve = roc(genuine, impostor)
print("operating points (threshold, FAR, FRR):")
for t, fa, fr in zip(curve.thresholds, curve.far, curve.frr):
    print(f"  {t:>8.2f}  {fa:.3f}  {fr:.3f}")

value, threshold = eer(curve)
print(f"\nEER = {100 * value:.3f}% at threshold {threshold:.3f}")

for target in (0.1, 0.001):
    point = frr_at_far(curve, target)
    print(f"FRR@FAR{100 * target:g}% = {100 * point.frr:.3f}% "
          f"(threshold {point.threshold:.3f}, achieved FAR {100 * point.far:.3f}%)")

report = evaluate_scores(genuine, impostor)
print("\nfull report as JSON-ready dict:")
print(report.to_dict())
