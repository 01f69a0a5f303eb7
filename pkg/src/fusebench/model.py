"""Domain types and the subject-disjoint evaluation protocol.

Traits, sample keys, feature records, and deterministic genuine/impostor
pair enumeration. Everything here is immutable after construction and all
operations are pure, so the protocol a run produces depends only on the key
set, never on ingest order or parallelism.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, IngestError


class Trait(enum.Enum):
    """The five biometric traits, in canonical order.

    The member order below is the canonical ordering used for weight
    vectors, file columns and report layout everywhere in the engine.
    """

    FACE = "face"
    PERIOCULAR = "periocular"
    IRIS = "iris"
    NOSE = "nose"
    EYEBROW = "eyebrow"

    @classmethod
    def canonical(cls) -> tuple["Trait", ...]:
        return tuple(cls)

    @classmethod
    def from_name(cls, name: str) -> "Trait":
        try:
            return cls(name.lower())
        except ValueError:
            raise ConfigError(f"unknown trait {name!r}") from None


CANONICAL_TRAITS = Trait.canonical()


@dataclass(frozen=True, order=True)
class SampleKey:
    """Identifies one sample: (subject_id, sample_id), unique per dataset."""

    subject_id: str
    sample_id: str

    def __str__(self) -> str:
        return f"{self.subject_id}/{self.sample_id}"


def _check_vector(vec: np.ndarray, what: str) -> np.ndarray:
    vec = np.asarray(vec, dtype=np.float64)
    if vec.ndim != 1 or vec.size < 1:
        raise IngestError(f"{what}: expected a 1-D vector, got shape {vec.shape}")
    if not np.all(np.isfinite(vec)):
        raise IngestError(f"{what}: non-finite entries")
    if not np.any(vec != 0.0):
        raise IngestError(f"{what}: zero vector rejected at ingest")
    return vec


@dataclass(frozen=True)
class FeatureRecord:
    """A labeled feature vector for one (subject, sample, trait)."""

    key: SampleKey
    trait: Trait
    vector: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "vector", _check_vector(self.vector, str(self.key)))
        self.vector.setflags(write=False)


@dataclass(frozen=True)
class IrisRecord:
    """Iris template: 4 angular-subimage vectors plus their mask ratios."""

    key: SampleKey
    subvectors: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]
    mask_ratios: tuple[float, float, float, float]

    def __post_init__(self):
        if len(self.subvectors) != 4 or len(self.mask_ratios) != 4:
            raise IngestError(f"{self.key}: iris record needs 4 subvectors and 4 mask ratios")
        subs = []
        for i, sub in enumerate(self.subvectors):
            subs.append(_check_vector(sub, f"{self.key} sub{i}"))
            subs[-1].setflags(write=False)
        dims = {s.shape[0] for s in subs}
        if len(dims) != 1:
            raise IngestError(f"{self.key}: iris subvector dimensions differ: {sorted(dims)}")
        object.__setattr__(self, "subvectors", tuple(subs))
        ratios = tuple(float(r) for r in self.mask_ratios)
        for r in ratios:
            if not (0.0 <= r <= 1.0) or not np.isfinite(r):
                raise IngestError(f"{self.key}: mask ratio {r} outside [0, 1]")
        object.__setattr__(self, "mask_ratios", ratios)


SPLITS = ("train", "val", "test")


@dataclass(frozen=True)
class SubjectRange:
    """Inclusive lexicographic subject-id interval mapped to one split."""

    lo: str
    hi: str
    split: str

    def __post_init__(self):
        if self.split not in SPLITS:
            raise ConfigError(f"unknown split {self.split!r}")
        if self.lo > self.hi:
            raise ConfigError(f"range {self.lo}..{self.hi} is inverted")

    def contains(self, subject_id: str) -> bool:
        return self.lo <= subject_id <= self.hi


@dataclass(frozen=True)
class EvalProtocol:
    """Subject-disjoint splits plus deterministic pair enumeration.

    Pair lists are canonicalized (lexicographically smaller key first),
    duplicate-free, and sorted, so two runs over the same key set produce
    bitwise-identical protocols.
    """

    assignment: dict[str, str]  # subject_id -> split name
    pairs: dict[str, list[tuple[SampleKey, SampleKey, bool]]] = field(default_factory=dict)

    def subjects(self, split: str) -> list[str]:
        return sorted(s for s, sp in self.assignment.items() if sp == split)


def split_by_subject(keys, ranges) -> dict[str, str]:
    """Assign each subject to a split via inclusive ID ranges.

    Every subject must fall in exactly one range; an uncovered subject is an
    ingest error (named in the message), overlapping ranges a config error.
    """
    ranges = list(ranges)
    subjects = sorted({k.subject_id for k in keys})
    assignment: dict[str, str] = {}
    for sub in subjects:
        hits = [r for r in ranges if r.contains(sub)]
        if not hits:
            raise IngestError(f"subject {sub!r} not covered by any split range")
        if len(hits) > 1:
            spans = ", ".join(f"{r.lo}..{r.hi}" for r in hits)
            raise ConfigError(f"subject {sub!r} matches overlapping ranges: {spans}")
        assignment[sub] = hits[0].split
    return assignment


def enumerate_pairs(keys) -> list[tuple[SampleKey, SampleKey, bool]]:
    """All C(n,2) unordered pairs over a split, flagged genuine/impostor.

    Genuine iff both keys share subject_id (sample_ids always differ because
    keys are unique). The output order is lexicographic on (key_a, key_b)
    with the smaller key first, independent of input order.
    """
    uniq = sorted(set(keys))
    out = []
    for i, a in enumerate(uniq):
        for b in uniq[i + 1:]:
            out.append((a, b, a.subject_id == b.subject_id))
    return out


def build_protocol(keys, ranges) -> EvalProtocol:
    """Full protocol: split assignment plus per-split pair lists."""
    keys = list(keys)
    if len(set(keys)) != len(keys):
        dupes = sorted({k for k in keys if keys.count(k) > 1})
        raise IngestError(f"duplicate sample keys: {dupes[:5]}")
    assignment = split_by_subject(keys, ranges)
    pairs = {}
    for split in SPLITS:
        split_keys = [k for k in keys if assignment[k.subject_id] == split]
        pairs[split] = enumerate_pairs(split_keys)
    return EvalProtocol(assignment=assignment, pairs=pairs)
