import numpy as np
import pytest
from scipy.special import ndtr

from fusebench.errors import ConfigError
from fusebench.matching import cosine, score_table
from fusebench.metrics import eer, roc
from fusebench.model import Trait, enumerate_pairs
from fusebench.synthdata import (EmbeddingModel, ScoreModel, gen_embeddings,
                                 gen_scores)
from oracles import cosine_highprec, fast_eer

T = Trait


def test_scores_deterministic_by_seed():
    model = ScoreModel(mu_genuine=0.6, mu_impostor=0.0, sigma=0.15)
    a = gen_scores(model, 50, 80, seed=123)
    b = gen_scores(model, 50, 80, seed=123)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
    c = gen_scores(model, 50, 80, seed=124)
    assert not np.array_equal(a[0], c[0])


def test_trait_streams_independent():
    model = ScoreModel(mu_genuine=0.6, mu_impostor=0.0, sigma=0.15)
    g0, _ = gen_scores(model, 40, 40, seed=9, trait_index=0)
    g0_again, _ = gen_scores(model, 40, 40, seed=9, trait_index=0)
    g1, _ = gen_scores(model, 40, 40, seed=9, trait_index=1)
    assert np.array_equal(g0, g0_again)
    assert not np.array_equal(g0, g1)


def test_sigma_validation_and_counts():
    with pytest.raises(ConfigError):
        ScoreModel(mu_genuine=1.0, mu_impostor=0.0, sigma=0.0)
    model = ScoreModel(mu_genuine=1.0, mu_impostor=0.0, sigma=0.1)
    with pytest.raises(ConfigError):
        gen_scores(model, 0, 10, seed=1)


def test_tiny_sigma_separates_perfectly():
    model = ScoreModel(mu_genuine=1.0, mu_impostor=0.0, sigma=1e-9)
    g, i = gen_scores(model, 200, 200, seed=5)
    value, _ = eer(roc(g, i))
    assert value == 0.0


def test_equal_means_give_half():
    model = ScoreModel(mu_genuine=0.3, mu_impostor=0.3, sigma=0.2)
    n = 4000
    g, i = gen_scores(model, n, n, seed=6)
    value, _ = eer(roc(g, i))
    assert abs(value - 0.5) <= 3 / np.sqrt(n)


def test_analytic_eer_closed_form():
    model = ScoreModel(mu_genuine=0.6, mu_impostor=0.0, sigma=0.15)
    assert model.analytic_eer() == pytest.approx(float(ndtr(-2.0)), abs=1e-15)
    g, i = gen_scores(model, 20_000, 20_000, seed=7)
    value, _ = eer(roc(g, i))
    assert abs(value - model.analytic_eer()) < 0.005


def _model(**kw):
    base = dict(dim=12, subjects=6, samples_per_subject=3,
                noise_sigma={T.FACE: 0.3, T.IRIS: 0.4, T.NOSE: 0.2}, seed=42)
    base.update(kw)
    return EmbeddingModel(**base)


def test_embeddings_deterministic():
    a = gen_embeddings(_model())
    b = gen_embeddings(_model())
    for t in a:
        for ra, rb in zip(a[t], b[t]):
            assert ra.key == rb.key
            if t is T.IRIS:
                assert all(np.array_equal(x, y)
                           for x, y in zip(ra.subvectors, rb.subvectors))
                assert ra.mask_ratios == rb.mask_ratios
            else:
                assert np.array_equal(ra.vector, rb.vector)


def test_embeddings_traits_do_not_perturb_each_other():
    full = gen_embeddings(_model())
    without_iris = gen_embeddings(_model(
        noise_sigma={T.FACE: 0.3, T.NOSE: 0.2}))
    for ra, rb in zip(full[T.FACE], without_iris[T.FACE]):
        assert np.array_equal(ra.vector, rb.vector)


def test_zero_noise_gives_identical_samples_and_zero_eer():
    data = gen_embeddings(_model(noise_sigma={T.NOSE: 0.0}))
    records = {r.key: r for r in data[T.NOSE]}
    pairs = enumerate_pairs(records)
    table = score_table(T.NOSE, records, pairs)
    genuine = table.scores[table.genuine_mask]
    assert np.all(genuine == 1.0)
    value, _ = eer(roc(genuine, table.scores[~table.genuine_mask]))
    assert value == 0.0


def test_antipodal_centroids_geometry():
    # constructed directly: two subjects at antipodal centroids, small noise
    rng = np.random.default_rng(3)
    c = rng.normal(size=8)
    c /= np.linalg.norm(c)
    samples = {}
    for name, centroid in (("A", c), ("B", -c)):
        for i in range(3):
            v = centroid + 0.01 * rng.normal(size=8)
            samples[(name, i)] = v / np.linalg.norm(v)
    for i in range(3):
        for j in range(3):
            assert cosine(samples[("A", i)], samples[("B", j)]) < -0.99
            if i != j:
                assert cosine(samples[("A", i)], samples[("A", j)]) > 0.99


def test_mask_ratios_in_configured_range():
    data = gen_embeddings(_model(noise_sigma={T.IRIS: 0.3}))
    for rec in data[T.IRIS]:
        for r in rec.mask_ratios:
            assert 0.3 <= r <= 1.0


def test_quality_ordering_lower_noise_never_worse():
    eers = []
    for sigma in (0.6, 0.3, 0.15):
        data = gen_embeddings(_model(subjects=10, samples_per_subject=4,
                                     noise_sigma={T.NOSE: sigma}, seed=77))
        records = {r.key: r for r in data[T.NOSE]}
        table = score_table(T.NOSE, records, enumerate_pairs(records))
        g = table.scores[table.genuine_mask]
        i = table.scores[~table.genuine_mask]
        eers.append(eer(roc(g, i))[0])
    assert eers[0] >= eers[1] >= eers[2]


def test_fixture_pipeline_matches_naive_reference():
    data = gen_embeddings(_model(subjects=5, samples_per_subject=3,
                                 noise_sigma={T.NOSE: 0.5}, seed=11))
    records = {r.key: r for r in data[T.NOSE]}
    pairs = enumerate_pairs(records)
    table = score_table(T.NOSE, records, pairs)
    scores = [cosine_highprec(records[a].vector, records[b].vector)
              for a, b, _ in pairs]
    genuine = [s for s, (_, _, g) in zip(scores, pairs) if g]
    impostor = [s for s, (_, _, g) in zip(scores, pairs) if not g]
    value, _ = eer(roc(table.scores[table.genuine_mask],
                       table.scores[~table.genuine_mask]))
    want, _ = fast_eer(genuine, impostor)
    assert value == pytest.approx(want, abs=1e-12)


def test_model_validation():
    with pytest.raises(ConfigError):
        EmbeddingModel(dim=1, subjects=2, samples_per_subject=2,
                       noise_sigma={}, seed=0)
    with pytest.raises(ConfigError):
        EmbeddingModel(dim=4, subjects=2, samples_per_subject=2,
                       noise_sigma={T.FACE: -0.1}, seed=0)
