"""Seeded synthetic data: Gaussian score models with a closed-form EER and
subject-centroid embedding models.

All randomness flows from a master seed through named per-trait streams, so
changing one trait's parameters never perturbs another trait's draws, and
every dataset is byte-identical across runs and thread counts.

Normal variates use the inverse-CDF transform on 53-bit uniforms (u =
k / 2^53 with k drawn from [1, 2^53)), so fixtures are portable bit-exactly
across implementations of the same recipe.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import ConfigError
from .model import CANONICAL_TRAITS, FeatureRecord, IrisRecord, SampleKey, Trait

_U53 = float(2**53)

# stream kind codes for seed splitting
_KIND_GENUINE = 0
_KIND_IMPOSTOR = 1
_KIND_CENTROID = 2
_KIND_NOISE = 3
_KIND_MASK = 4


def stream(master_seed: int, trait_index: int, kind: int) -> np.random.Generator:
    """Independent generator for (seed, trait, purpose)."""
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence([master_seed, trait_index, kind])))


def _uniform(gen: np.random.Generator, size) -> np.ndarray:
    """Uniforms on the open interval (0, 1), 53-bit resolution."""
    return gen.integers(1, 2**53, size=size) / _U53


def _normal(gen: np.random.Generator, size) -> np.ndarray:
    return ndtri(_uniform(gen, size))


@dataclass(frozen=True)
class ScoreModel:
    """Equal-variance two-Gaussian score model for one trait."""

    mu_genuine: float
    mu_impostor: float
    sigma: float

    def __post_init__(self):
        if self.sigma <= 0.0:
            raise ConfigError(f"sigma must be > 0, got {self.sigma}")

    def analytic_eer(self) -> float:
        """Equal-variance Gaussians cross at the midpoint threshold, where
        FAR = FRR = Phi(-(mu_g - mu_i) / (2 sigma))."""
        return float(ndtr(-(self.mu_genuine - self.mu_impostor) / (2.0 * self.sigma)))


def gen_scores(model: ScoreModel, genuine_n: int, impostor_n: int, seed: int,
               trait_index: int = 0):
    """Reproducible genuine/impostor score draws for one trait."""
    if genuine_n < 1 or impostor_n < 1:
        raise ConfigError("score counts must be >= 1")
    g = model.mu_genuine + model.sigma * _normal(
        stream(seed, trait_index, _KIND_GENUINE), genuine_n)
    i = model.mu_impostor + model.sigma * _normal(
        stream(seed, trait_index, _KIND_IMPOSTOR), impostor_n)
    return g, i


@dataclass(frozen=True)
class EmbeddingModel:
    """Subject-centroid embedding model over all five traits."""

    dim: int
    subjects: int
    samples_per_subject: int
    noise_sigma: dict[Trait, float]  # within-subject noise per trait
    seed: int
    first_subject: int = 4000
    mask_ratio_range: tuple[float, float] = (0.3, 1.0)

    def __post_init__(self):
        if self.dim < 2:
            raise ConfigError("embedding dim must be >= 2")
        if self.subjects < 1 or self.samples_per_subject < 1:
            raise ConfigError("subjects and samples_per_subject must be >= 1")
        for t, s in self.noise_sigma.items():
            if s < 0.0:
                raise ConfigError(f"noise sigma for {t.value} must be >= 0")


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def _keys(model: EmbeddingModel):
    return [SampleKey(f"S{model.first_subject + s}", f"img{j:02d}")
            for s in range(model.subjects)
            for j in range(model.samples_per_subject)]


def gen_embeddings(model: EmbeddingModel):
    """Per-trait feature datasets (iris as 4-subvector records).

    Subject centroids are uniform on the unit sphere (normalized isotropic
    Gaussians); samples are centroid + isotropic noise, re-normalized.
    Returns a dict Trait -> list of records, canonical trait order.
    """
    out = {}
    keys = _keys(model)
    for ti, trait in enumerate(CANONICAL_TRAITS):
        sigma = model.noise_sigma.get(trait)
        if sigma is None:
            continue
        cgen = stream(model.seed, ti, _KIND_CENTROID)
        ngen = stream(model.seed, ti, _KIND_NOISE)
        nsub = 4 if trait is Trait.IRIS else 1
        centroids = _unit(_normal(cgen, (model.subjects, nsub, model.dim)))
        records = []
        k = 0
        if trait is Trait.IRIS:
            mgen = stream(model.seed, ti, _KIND_MASK)
            lo, hi = model.mask_ratio_range
        for s in range(model.subjects):
            for _ in range(model.samples_per_subject):
                vecs = _unit(centroids[s] + sigma * _normal(ngen, (nsub, model.dim)))
                if trait is Trait.IRIS:
                    ratios = tuple(lo + (hi - lo) * _uniform(mgen, 4))
                    records.append(IrisRecord(key=keys[k], subvectors=tuple(vecs),
                                              mask_ratios=ratios))
                else:
                    records.append(FeatureRecord(key=keys[k], trait=trait,
                                                 vector=vecs[0]))
                k += 1
        out[trait] = records
    return out
