"""Score-level fusion: simplex-constrained weighted sums, exhaustive weight
sweeps, and an untrained feature-concatenation baseline.

The fused score of a pair is the weighted sum of its per-trait scores over
traits with positive weight; weights are nonnegative and sum to 1. A pair
missing a score for any positively-weighted trait is excluded from that
evaluation and tallied, never imputed.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ConfigError, ProtocolError
from .matching import ScoreTable
from .metrics import DEFAULT_FAR_TARGETS, MetricsReport, evaluate_scores
from .model import CANONICAL_TRAITS, Trait

CRITERIA = ("eer", "frr_far_0.1", "frr_far_0.01")
_CRITERION_TARGET = {"frr_far_0.1": 0.001, "frr_far_0.01": 0.0001}


@dataclass(frozen=True)
class FusionWeights:
    """Nonnegative weights over the five traits summing to 1."""

    weights: dict[Trait, float]

    def __post_init__(self):
        w = {t: float(self.weights.get(t, 0.0)) for t in CANONICAL_TRAITS}
        for t, v in w.items():
            if v < 0.0 or not np.isfinite(v):
                raise ConfigError(f"weight for {t.value} is {v}, must be >= 0")
        if abs(sum(w.values()) - 1.0) > 1e-9:
            raise ConfigError(f"weights sum to {sum(w.values())}, expected 1")
        object.__setattr__(self, "weights", w)

    @classmethod
    def one_hot(cls, trait: Trait) -> "FusionWeights":
        return cls({trait: 1.0})

    def as_array(self) -> np.ndarray:
        return np.array([self.weights[t] for t in CANONICAL_TRAITS])

    def active(self) -> tuple[Trait, ...]:
        return tuple(t for t in CANONICAL_TRAITS if self.weights[t] > 0.0)

    def key(self) -> tuple[float, ...]:
        """Lexicographic tie-break key in canonical trait order."""
        return tuple(self.weights[t] for t in CANONICAL_TRAITS)


def fuse_pair(scores: dict[Trait, float], weights: FusionWeights) -> float:
    """Weighted sum over positively-weighted traits; NaN if any is absent."""
    total = 0.0
    for t in CANONICAL_TRAITS:
        lam = weights.weights[t]
        if lam > 0.0:
            s = scores.get(t, np.nan)
            if np.isnan(s):
                return np.nan
            total += lam * s
    return total


def fuse_tables(tables: dict[Trait, ScoreTable], weights: FusionWeights):
    """Fused score vector over aligned tables.

    Returns (scores, genuine_mask, excluded) where excluded counts pairs
    dropped because a positively-weighted trait's score was absent.
    """
    active = weights.active()
    if not active:
        raise ConfigError("no trait has positive weight")
    ref = tables[active[0]]
    for t in active:
        if t not in tables:
            raise ProtocolError(f"no score table for weighted trait {t.value}")
        if tables[t].pairs != ref.pairs:
            raise ProtocolError(f"score table for {t.value} is not aligned with "
                                f"{active[0].value}")
    fused = np.zeros(len(ref.pairs))
    for t in active:
        fused = fused + weights.weights[t] * tables[t].scores
    excluded = int(np.isnan(fused).sum())
    return fused, ref.genuine_mask, excluded


def evaluate_fused(tables, weights, far_targets=DEFAULT_FAR_TARGETS) -> MetricsReport:
    fused, genuine, excluded = fuse_tables(tables, weights)
    present = ~np.isnan(fused)
    return evaluate_scores(fused[present & genuine], fused[present & ~genuine],
                           far_targets=far_targets, excluded_pairs=excluded)


def enumerate_simplex(step: float, active_traits) -> list[FusionWeights]:
    """All grid weight vectors over the active traits summing to 1.

    Entries lie in {0, step, 2*step, ..., 1}; inactive traits are fixed at
    0. Output is in ascending lexicographic order of the full canonical
    weight vector.
    """
    frac = Fraction(step).limit_denominator(10**6)
    if frac <= 0 or 1 / frac != int(1 / frac):
        raise ConfigError(f"1/step must be a positive integer, got step={step}")
    k = int(1 / frac)
    active = [t for t in CANONICAL_TRAITS if t in set(active_traits)]
    if not active:
        raise ConfigError("active trait set is empty")

    out = []

    def rec(i, remaining, parts):
        if i == len(active) - 1:
            out.append(parts + [remaining])
            return
        for units in range(remaining + 1):
            rec(i + 1, remaining - units, parts + [units])

    rec(0, k, [])
    return [FusionWeights({t: units / k for t, units in zip(active, parts)})
            for parts in out]


@dataclass(frozen=True)
class SweepResult:
    entries: list[tuple[FusionWeights, MetricsReport]]  # enumeration order
    selected: FusionWeights
    criterion: str


def criterion_value(report: MetricsReport, criterion: str) -> float:
    if criterion == "eer":
        return report.eer
    try:
        return report.frr_at_far[_CRITERION_TARGET[criterion]].frr
    except KeyError:
        raise ConfigError(f"unknown criterion {criterion!r}; "
                          f"expected one of {CRITERIA}") from None


def sweep(val_tables: dict[Trait, ScoreTable], step: float = 0.1,
          criterion: str = "eer", active_traits=None,
          far_targets=DEFAULT_FAR_TARGETS) -> SweepResult:
    """Evaluate every grid weight vector on validation tables and select
    the minimizer of the criterion; ties go to the lexicographically
    smallest weight vector in canonical trait order."""
    if criterion not in CRITERIA:
        raise ConfigError(f"unknown criterion {criterion!r}; expected one of {CRITERIA}")
    if active_traits is None:
        active_traits = tuple(val_tables)
    candidates = enumerate_simplex(step, active_traits)
    entries = []
    best = None
    for weights in candidates:
        report = evaluate_fused(val_tables, weights, far_targets=far_targets)
        entries.append((weights, report))
        value = criterion_value(report, criterion)
        cand = (value, weights.key())
        if best is None or cand < best[0]:
            best = (cand, weights)
    return SweepResult(entries=entries, selected=best[1], criterion=criterion)


def concat_fuse(features: dict[Trait, np.ndarray]) -> np.ndarray:
    """Feature-level baseline: unit-normalize each trait vector, concatenate
    in canonical order, unit-normalize the result. Untrained stand-in for a
    learned projection; documented as such."""
    if not features:
        raise ConfigError("concat_fuse needs at least one trait")
    parts = []
    for t in CANONICAL_TRAITS:
        if t in features:
            v = np.asarray(features[t], dtype=np.float64)
            parts.append(v / np.linalg.norm(v))
    cat = np.concatenate(parts)
    return cat / np.linalg.norm(cat)
