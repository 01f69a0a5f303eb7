"""Per-trait match scores: cosine similarity, mask-weighted iris
aggregation, and all-pairs score tables aligned to a protocol's pair order.

Absent scores (missing trait, fully occluded iris pair) are carried as NaN
in memory and as an empty field in CSV; they are never imputed.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DataIntegrityError, IngestError, ProtocolError
from .model import IrisRecord, SampleKey, Trait

ABSENT = np.nan


def is_absent(score) -> np.ndarray:
    return np.isnan(score)


def cosine(u, v) -> float:
    """Cosine similarity, clamped to [-1, 1].

    Symmetric bitwise (elementwise product shares one summation order) and
    accumulated in double precision.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape or u.ndim != 1:
        raise IngestError(f"cosine: dimension mismatch {u.shape} vs {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise IngestError("cosine: zero-norm vector")
    if np.array_equal(u, v):  # identical templates score 1.0 exactly
        return 1.0
    val = float(np.dot(u, v) / (nu * nv))
    if not (-1.0 - 1e-9 <= val <= 1.0 + 1e-9):  # numerically impossible, guards NaN
        raise IngestError(f"cosine: value {val} outside [-1, 1] tolerance")
    return min(1.0, max(-1.0, val))


def iris_score(a: IrisRecord, b: IrisRecord) -> float:
    """Mask-weighted mean of the four subimage cosines.

    Weight of subimage i is the product of both templates' mask ratios, so
    occlusion on either side down-weights it; at full visibility this is a
    plain average. A fully occluded pair (all weights zero) yields ABSENT.
    """
    w = np.array(a.mask_ratios) * np.array(b.mask_ratios)
    total = float(w.sum())
    if total == 0.0:
        return ABSENT
    s = np.array([cosine(sa, sb) for sa, sb in zip(a.subvectors, b.subvectors)])
    return float(np.dot(w, s) / total)


@dataclass(frozen=True)
class ScoreTable:
    """Scores for an ordered pair list; row order mirrors the protocol."""

    trait: Trait
    pairs: tuple[tuple[SampleKey, SampleKey, bool], ...]
    scores: np.ndarray  # float64, NaN = absent

    def __post_init__(self):
        if len(self.pairs) != self.scores.shape[0]:
            raise ProtocolError("score table rows do not match pair list")
        self.scores.setflags(write=False)

    @property
    def genuine_mask(self) -> np.ndarray:
        return np.array([g for _, _, g in self.pairs], dtype=bool)

    def present_scores(self) -> tuple[np.ndarray, np.ndarray, int]:
        """(genuine, impostor) score arrays with absent rows dropped, plus
        the count of dropped rows."""
        present = ~np.isnan(self.scores)
        gmask = self.genuine_mask
        return (self.scores[present & gmask],
                self.scores[present & ~gmask],
                int((~present).sum()))


def _unit_rows(mat: np.ndarray) -> np.ndarray:
    return mat / np.linalg.norm(mat, axis=1, keepdims=True)


def score_table(trait, records, pairs, missing=frozenset(), threads: int = 1) -> ScoreTable:
    """All-pairs score table in protocol order.

    records: mapping SampleKey -> FeatureRecord or IrisRecord. Keys
    referenced by a pair but absent from the mapping must appear in
    `missing`, else a data-integrity error is raised; their rows become
    ABSENT. Row computation is chunked over `threads` workers writing
    disjoint slices, so output is identical for any thread count.
    """
    pairs = tuple(pairs)
    for a, b, _ in pairs:
        for k in (a, b):
            if k not in records and k not in missing:
                raise DataIntegrityError(f"sample {k} referenced by a pair is neither "
                                         "ingested nor flagged missing")

    scores = np.full(len(pairs), ABSENT, dtype=np.float64)
    resolvable = [i for i, (a, b, _) in enumerate(pairs)
                  if a in records and b in records]
    if not resolvable:
        return ScoreTable(trait=trait, pairs=pairs, scores=scores)

    iris = isinstance(next(iter(records.values())), IrisRecord)
    keys = sorted(records)
    index = {k: i for i, k in enumerate(keys)}
    ia = np.array([index[pairs[i][0]] for i in resolvable])
    ib = np.array([index[pairs[i][1]] for i in resolvable])

    if iris:
        subs = [_unit_rows(np.stack([records[k].subvectors[j] for k in keys]))
                for j in range(4)]
        ratios = np.array([records[k].mask_ratios for k in keys])

        def compute(sl):
            s = np.stack([np.einsum("ij,ij->i", m[ia[sl]], m[ib[sl]]) for m in subs],
                         axis=1)
            np.clip(s, -1.0, 1.0, out=s)
            for j, m in enumerate(subs):  # identical subvectors score 1.0 exactly
                same = np.all(m[ia[sl]] == m[ib[sl]], axis=1)
                s[same, j] = 1.0
            w = ratios[ia[sl]] * ratios[ib[sl]]
            tot = w.sum(axis=1)
            out = np.full(s.shape[0], ABSENT)
            ok = tot > 0.0
            out[ok] = (w[ok] * s[ok]).sum(axis=1) / tot[ok]
            return out
    else:
        mat = _unit_rows(np.stack([records[k].vector for k in keys]))

        def compute(sl):
            s = np.einsum("ij,ij->i", mat[ia[sl]], mat[ib[sl]])
            s = np.clip(s, -1.0, 1.0)
            same = np.all(mat[ia[sl]] == mat[ib[sl]], axis=1)
            s[same] = 1.0
            return s

    threads = max(1, int(threads))
    n = len(resolvable)
    chunk = -(-n // threads)
    slices = [slice(lo, min(lo + chunk, n)) for lo in range(0, n, chunk)]
    resolvable = np.array(resolvable)
    if threads == 1:
        for sl in slices:
            scores[resolvable[sl]] = compute(sl)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for sl, vals in zip(slices, pool.map(compute, slices)):
                scores[resolvable[sl]] = vals
    return ScoreTable(trait=trait, pairs=pairs, scores=scores)


SCORE_CSV_HEADER = "trait,subject_a,sample_a,subject_b,sample_b,genuine,score"


def score_table_to_csv(table: ScoreTable) -> str:
    """Bit-exact CSV form: 9 significant digits, absent = empty field."""
    lines = [SCORE_CSV_HEADER]
    for (a, b, genuine), score in zip(table.pairs, table.scores):
        cell = "" if np.isnan(score) else f"{score:.9g}"
        lines.append(f"{table.trait.value},{a.subject_id},{a.sample_id},"
                     f"{b.subject_id},{b.sample_id},{int(genuine)},{cell}")
    return "\n".join(lines) + "\n"


def score_table_from_csv(text: str) -> ScoreTable:
    lines = text.splitlines()
    if not lines or lines[0] != SCORE_CSV_HEADER:
        raise IngestError("score CSV: bad or missing header")
    traits = set()
    pairs = []
    scores = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 7:
            raise IngestError(f"score CSV line {lineno}: expected 7 fields")
        traits.add(parts[0])
        pairs.append((SampleKey(parts[1], parts[2]), SampleKey(parts[3], parts[4]),
                      parts[5] == "1"))
        scores.append(ABSENT if parts[6] == "" else float(parts[6]))
    if len(traits) > 1:
        raise IngestError(f"score CSV mixes traits: {sorted(traits)}")
    trait = Trait.from_name(traits.pop()) if traits else Trait.FACE
    return ScoreTable(trait=trait, pairs=tuple(pairs),
                      scores=np.array(scores, dtype=np.float64))
