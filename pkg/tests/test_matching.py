import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fusebench.errors import DataIntegrityError, IngestError
from fusebench.matching import (cosine, iris_score, score_table,
                                score_table_from_csv, score_table_to_csv)
from fusebench.model import (FeatureRecord, IrisRecord, SampleKey, Trait,
                             enumerate_pairs)
from oracles import cosine_highprec, naive_iris_score


def test_cosine_identity():
    v = np.array([0.3, -1.2, 4.0])
    assert cosine(v, v) == 1.0


def test_cosine_orthogonal():
    assert cosine([1.0, 0.0], [0.0, 1.0]) == 0.0


def test_cosine_against_high_precision_oracle():
    u, v = [1.0, 2.0, 3.0], [4.0, 5.0, 6.0]
    assert cosine(u, v) == pytest.approx(cosine_highprec(u, v), abs=1e-12)


def test_cosine_errors():
    with pytest.raises(IngestError):
        cosine([1.0, 2.0], [1.0, 2.0, 3.0])
    with pytest.raises(IngestError):
        cosine([0.0, 0.0], [1.0, 0.0])


vectors = st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=8).filter(
    lambda v: any(abs(x) > 1e-6 for x in v))


@given(vectors, vectors)
@settings(max_examples=100)
def test_cosine_symmetric_bitwise(u, v):
    if len(u) != len(v):
        u, v = u[:min(len(u), len(v))], v[:min(len(u), len(v))]
        if not (any(abs(x) > 1e-6 for x in u) and any(abs(x) > 1e-6 for x in v)):
            return
    assert cosine(u, v) == cosine(v, u)
    assert -1.0 <= cosine(u, v) <= 1.0


@pytest.mark.parametrize("alpha", [1e-6, 1.0, 1e6])
def test_cosine_scale_invariant(alpha):
    rng = np.random.default_rng(11)
    u = rng.normal(size=16)
    v = rng.normal(size=16)
    assert cosine(alpha * u, v) == pytest.approx(cosine(u, v), abs=1e-12)


def _iris(key, subs, ratios):
    return IrisRecord(key=SampleKey(*key), subvectors=tuple(subs),
                      mask_ratios=tuple(ratios))


def _subs_with_cosines(targets):
    """4 pairs of 2-D unit vectors whose cosines equal `targets`."""
    a = [np.array([1.0, 0.0]) for _ in targets]
    b = [np.array([t, np.sqrt(1.0 - t * t)]) for t in targets]
    return a, b


def test_iris_score_uniform_masks_is_plain_mean():
    targets = [0.9, 0.1, -0.4, 0.5]
    sa, sb = _subs_with_cosines(targets)
    a = _iris(("S1", "a"), sa, (1, 1, 1, 1))
    b = _iris(("S1", "b"), sb, (1, 1, 1, 1))
    assert iris_score(a, b) == pytest.approx(np.mean(targets), abs=1e-15)


def test_iris_score_indicator_masks():
    targets = [0.9, 0.1, -0.4, 0.5]
    sa, sb = _subs_with_cosines(targets)
    a = _iris(("S1", "a"), sa, (1, 1, 0, 0))
    b = _iris(("S1", "b"), sb, (1, 1, 0, 0))
    assert iris_score(a, b) == pytest.approx(np.mean(targets[:2]), abs=1e-15)


def test_iris_score_defining_formula():
    # sub-scores (0.8, 0.6, 0.4, 0.2) with weights (0.9, 0.5, 0.1, 0)
    sa, sb = _subs_with_cosines([0.8, 0.6, 0.4, 0.2])
    a = _iris(("S1", "a"), sa, (0.9, 0.5, 0.1, 0.0))
    b = _iris(("S1", "b"), sb, (1.0, 1.0, 1.0, 1.0))
    expected = (0.72 + 0.30 + 0.04) / 1.5
    assert iris_score(a, b) == pytest.approx(expected, abs=1e-12)


def test_iris_score_fully_occluded_is_absent():
    sa, sb = _subs_with_cosines([0.8, 0.6, 0.4, 0.2])
    a = _iris(("S1", "a"), sa, (0, 0, 0, 0))
    b = _iris(("S1", "b"), sb, (1, 1, 1, 1))
    assert np.isnan(iris_score(a, b))


@given(st.integers(0, 10_000))
@settings(max_examples=50, deadline=None)
def test_iris_score_convex_combination(seed):
    rng = np.random.default_rng(seed)
    sa = [rng.normal(size=6) for _ in range(4)]
    sb = [rng.normal(size=6) for _ in range(4)]
    ra = rng.uniform(0, 1, 4)
    rb = rng.uniform(0, 1, 4)
    a = _iris(("S1", "a"), sa, ra)
    b = _iris(("S1", "b"), sb, rb)
    subs = [cosine(x, y) for x, y in zip(sa, sb)]
    score = iris_score(a, b)
    assert min(subs) - 1e-12 <= score <= max(subs) + 1e-12
    expected = naive_iris_score(sa, sb, ra, rb)
    assert score == pytest.approx(expected, abs=1e-12)


def _feature_dataset(rng, n_subjects=3, m=2, dim=8):
    records = {}
    for s in range(n_subjects):
        for i in range(m):
            key = SampleKey(f"S{s}", f"i{i}")
            records[key] = FeatureRecord(key=key, trait=Trait.NOSE,
                                         vector=rng.normal(size=dim))
    return records


def test_score_table_identical_vectors_score_one():
    vec = np.array([0.5, 0.25, -1.0])
    keys = [SampleKey("S1", "a"), SampleKey("S1", "b")]
    records = {k: FeatureRecord(key=k, trait=Trait.FACE, vector=vec) for k in keys}
    table = score_table(Trait.FACE, records, enumerate_pairs(keys))
    assert table.scores[0] == 1.0


def test_score_table_matches_naive_double_loop():
    rng = np.random.default_rng(5)
    records = _feature_dataset(rng)
    pairs = enumerate_pairs(records)
    table = score_table(Trait.NOSE, records, pairs)
    assert len(pairs) == 15
    for (a, b, _), got in zip(pairs, table.scores):
        want = cosine_highprec(records[a].vector, records[b].vector)
        assert got == pytest.approx(want, abs=1e-12)


@pytest.mark.parametrize("threads", [2, 3, 8])
def test_score_table_thread_count_invariant(threads):
    rng = np.random.default_rng(9)
    records = _feature_dataset(rng, n_subjects=6, m=3)
    pairs = enumerate_pairs(records)
    one = score_table(Trait.NOSE, records, pairs, threads=1)
    many = score_table(Trait.NOSE, records, pairs, threads=threads)
    assert np.array_equal(one.scores, many.scores)


def test_score_table_iris_threads_and_occlusion():
    rng = np.random.default_rng(13)
    records = {}
    for s in range(4):
        for i in range(2):
            key = SampleKey(f"S{s}", f"i{i}")
            ratios = (0, 0, 0, 0) if (s, i) == (0, 0) else tuple(rng.uniform(0.2, 1, 4))
            records[key] = IrisRecord(
                key=key, subvectors=tuple(rng.normal(size=5) for _ in range(4)),
                mask_ratios=ratios)
    pairs = enumerate_pairs(records)
    one = score_table(Trait.IRIS, records, pairs, threads=1)
    four = score_table(Trait.IRIS, records, pairs, threads=4)
    assert np.array_equal(one.scores, four.scores, equal_nan=True)
    # pairs touching the fully occluded sample are absent
    occluded = SampleKey("S0", "i0")
    for (a, b, _), s in zip(pairs, one.scores):
        assert np.isnan(s) == (occluded in (a, b))
    for (a, b, _), s in zip(pairs, one.scores):
        if not np.isnan(s):
            want = naive_iris_score(records[a].subvectors, records[b].subvectors,
                                    records[a].mask_ratios, records[b].mask_ratios)
            assert s == pytest.approx(want, abs=1e-12)


def test_score_table_missing_flagged_vs_unflagged():
    rng = np.random.default_rng(1)
    records = _feature_dataset(rng, n_subjects=2, m=2)
    ghost = SampleKey("S9", "i0")
    pairs = enumerate_pairs(list(records) + [ghost])
    with pytest.raises(DataIntegrityError):
        score_table(Trait.NOSE, records, pairs)
    table = score_table(Trait.NOSE, records, pairs, missing={ghost})
    for (a, b, _), s in zip(pairs, table.scores):
        assert np.isnan(s) == (ghost in (a, b))


def test_score_csv_round_trip_bit_exact():
    rng = np.random.default_rng(2)
    records = _feature_dataset(rng, n_subjects=2, m=3)
    pairs = enumerate_pairs(records)
    table = score_table(Trait.NOSE, records, pairs)
    text = score_table_to_csv(table)
    back = score_table_from_csv(text)
    assert back.pairs == table.pairs
    assert score_table_to_csv(back) == text  # stable at 9 significant digits


def test_score_csv_rejects_bad_header():
    with pytest.raises(IngestError):
        score_table_from_csv("nope\n")
