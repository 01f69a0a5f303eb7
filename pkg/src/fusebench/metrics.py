"""Verification error metrics: FAR/FRR curves, EER, FRR at FAR targets.

Decision rule (used everywhere): accept iff score >= threshold. Hence

    FAR(t) = |{impostor scores >= t}| / impostor_n
    FRR(t) = |{genuine  scores <  t}| / genuine_n

All rates are exact integer counts divided once at the end, so reported
values are reconstructible from the counts. Operating points sit at every
distinct observed score, plus -inf/+inf sentinels where (FAR, FRR) is
(1, 0) and (0, 1) respectively.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ProtocolError

DEFAULT_FAR_TARGETS = (0.001, 0.0001)


@dataclass(frozen=True)
class RocCurve:
    thresholds: np.ndarray  # strictly increasing, sentinels included
    far: np.ndarray         # non-increasing
    frr: np.ndarray         # non-decreasing
    genuine_n: int
    impostor_n: int


@dataclass(frozen=True)
class OperatingPoint:
    threshold: float
    far: float
    frr: float


@dataclass(frozen=True)
class MetricsReport:
    eer: float
    eer_threshold: float
    frr_at_far: dict[float, OperatingPoint]
    curve: RocCurve
    excluded_pairs: int = 0

    def to_dict(self) -> dict:
        return {
            "schema": "fusebench/1",
            "eer": self.eer,
            "eer_threshold": self.eer_threshold,
            "frr_at_far": {
                repr(t): {"frr": p.frr, "far": p.far, "threshold": p.threshold}
                for t, p in sorted(self.frr_at_far.items(), reverse=True)
            },
            "counts": {
                "genuine": self.curve.genuine_n,
                "impostor": self.curve.impostor_n,
                "excluded": self.excluded_pairs,
            },
        }


def roc(genuine, impostor) -> RocCurve:
    """Operating points at every distinct observed score plus sentinels."""
    gen = np.asarray(genuine, dtype=np.float64)
    imp = np.asarray(impostor, dtype=np.float64)
    if gen.size == 0 or imp.size == 0:
        raise ProtocolError("roc needs non-empty genuine and impostor score lists")
    if not (np.all(np.isfinite(gen)) and np.all(np.isfinite(imp))):
        raise ProtocolError("roc scores must be finite")

    thresholds = np.unique(np.concatenate([gen, imp]))
    gen_sorted = np.sort(gen)
    imp_sorted = np.sort(imp)
    # counts via sorted-array rank lookups; integer exact
    frr_counts = np.searchsorted(gen_sorted, thresholds, side="left")
    far_counts = imp.size - np.searchsorted(imp_sorted, thresholds, side="left")

    thresholds = np.concatenate([[-np.inf], thresholds, [np.inf]])
    far = np.concatenate([[imp.size], far_counts, [0]]) / imp.size
    frr = np.concatenate([[0], frr_counts, [gen.size]]) / gen.size
    return RocCurve(thresholds=thresholds, far=far, frr=frr,
                    genuine_n=int(gen.size), impostor_n=int(imp.size))


def eer(curve: RocCurve) -> tuple[float, float]:
    """Equal error rate and its threshold.

    If an operating point has FAR == FRR exactly, the lowest such threshold
    wins. Otherwise the crossing of FAR - FRR between the two adjacent
    operating points is found by linear interpolation.
    """
    d = curve.far - curve.frr  # non-increasing, +1 at -inf, -1 at +inf
    equal = np.nonzero(d == 0.0)[0]
    if equal.size:
        i = equal[0]
        return float(curve.far[i]), float(curve.thresholds[i])
    # first index where d goes negative; sign change happens just before it
    j = int(np.argmax(d < 0.0))
    i = j - 1
    da, db = d[i], d[j]
    alpha = da / (da - db)
    value = float(curve.far[i] + alpha * (curve.far[j] - curve.far[i]))
    ta, tb = curve.thresholds[i], curve.thresholds[j]
    if not np.isfinite(ta):
        thr = float(tb)
    elif not np.isfinite(tb):
        thr = float(ta)
    else:
        thr = float(ta + alpha * (tb - ta))
    return value, thr


def frr_at_far(curve: RocCurve, target: float) -> OperatingPoint:
    """FRR at the smallest threshold whose FAR does not exceed the target.

    Conservative rule: the achieved FAR may undershoot the target on finite
    data but never exceeds it. Both achieved rates are reported.
    """
    if not (0.0 < target < 1.0):
        raise ProtocolError(f"FAR target must lie in (0, 1), got {target}")
    ok = np.nonzero(curve.far <= target)[0]
    i = ok[0]  # far is non-increasing; sentinel far=0 guarantees a hit
    return OperatingPoint(threshold=float(curve.thresholds[i]),
                          far=float(curve.far[i]), frr=float(curve.frr[i]))


def evaluate_scores(genuine, impostor, far_targets=DEFAULT_FAR_TARGETS,
                    excluded_pairs: int = 0) -> MetricsReport:
    """Full report for one score distribution pair."""
    curve = roc(genuine, impostor)
    e, t = eer(curve)
    return MetricsReport(
        eer=e,
        eer_threshold=t,
        frr_at_far={target: frr_at_far(curve, target) for target in far_targets},
        curve=curve,
        excluded_pairs=excluded_pairs,
    )


def export_curve_csv(curve: RocCurve) -> str:
    """DET/ROC export: threshold,far,frr with 9 significant digits."""
    lines = ["threshold,far,frr"]
    for t, fa, fr in zip(curve.thresholds, curve.far, curve.frr):
        lines.append(f"{t:.9g},{fa:.9g},{fr:.9g}")
    return "\n".join(lines) + "\n"
