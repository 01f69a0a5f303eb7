"""Acceptance gate: one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines as they complete.
"""

import json
import math
import re
import shutil
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.special import ndtr

from fusebench.fusion import FusionWeights, enumerate_simplex, evaluate_fused, sweep
from fusebench.geometry import (FaceKeypoints, IrisCircles, normalize_rotation,
                                rubber_sheet)
from fusebench.matching import ScoreTable, score_table, score_table_from_csv
from fusebench.metrics import eer, evaluate_scores, frr_at_far, roc
from fusebench.model import (CANONICAL_TRAITS, IrisRecord, SampleKey, Trait,
                             enumerate_pairs)
from fusebench.synthdata import ScoreModel, gen_scores
from oracles import _scan_eer, fast_operating_points, naive_iris_score, naive_simplex

GOLDEN = Path(__file__).parent / "goldens" / "run"
FIXTURES = Path(__file__).parent / "fixtures"


def ok(name):
    print(f"ACCEPTANCE PASS: {name}")


def test_metric_oracle_equivalence():
    start = time.perf_counter()
    rng = np.random.default_rng(20260823)
    for _ in range(200):
        n_gen = int(rng.integers(50, 2001))
        n_imp = int(rng.integers(50, 2001))
        gen = rng.normal(0.4, 0.3, n_gen)
        imp = rng.normal(0.0, 0.3, n_imp)
        if rng.random() < 0.2:  # force ties
            gen = np.round(gen, 2)
            imp = np.round(imp, 2)
        curve = roc(gen, imp)
        e, t = eer(curve)
        thresholds, far, frr = fast_operating_points(gen, imp)
        e_o, t_o = _scan_eer(thresholds, far, frr)
        assert abs(e - e_o) <= 1e-12
        assert abs(t - t_o) <= 1e-12
        for target in (0.01, 0.001, 0.0001):
            point = frr_at_far(curve, target)
            hit = next(i for i in range(len(thresholds)) if far[i] <= target)
            assert abs(point.frr - frr[hit]) <= 1e-12
            assert point.far == far[hit]
            assert point.threshold == thresholds[hit]
    elapsed = time.perf_counter() - start
    assert elapsed < 30.0, f"oracle equivalence took {elapsed:.1f}s"
    ok(f"metric oracle equivalence (200 sets, {elapsed:.1f}s)")


def test_gaussian_eer_closed_form():
    start = time.perf_counter()
    model = ScoreModel(mu_genuine=0.6, mu_impostor=0.0, sigma=0.15)  # (d/2s) = 2
    g, i = gen_scores(model, 100_000, 100_000, seed=20260823)
    value, _ = eer(roc(g, i))
    expected = float(ndtr(-2.0))
    assert abs(value - expected) <= 0.003, f"{value} vs {expected}"
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0, f"gaussian closed form took {elapsed:.1f}s"
    ok(f"gaussian EER closed form (|{value:.5f} - {expected:.5f}| <= 0.3pp, "
       f"{elapsed:.1f}s)")


def _fixture_tables(split):
    tables = {}
    for trait in CANONICAL_TRAITS:
        path = GOLDEN / f"scores_{trait.value}_{split}.csv"
        tables[trait] = score_table_from_csv(path.read_text())
    return tables


def test_fusion_identity_one_hot_bitwise():
    tables = _fixture_tables("test")
    for trait, table in tables.items():
        g, i, dropped = table.present_scores()
        single = evaluate_scores(g, i, excluded_pairs=dropped)
        fused = evaluate_fused(tables, FusionWeights.one_hot(trait))
        assert fused.eer == single.eer
        assert fused.eer_threshold == single.eer_threshold
        assert fused.frr_at_far == single.frr_at_far
        assert np.array_equal(fused.curve.thresholds, single.curve.thresholds)
        assert np.array_equal(fused.curve.far, single.curve.far)
        assert np.array_equal(fused.curve.frr, single.curve.frr)
    ok("fusion identity: one-hot == single trait, bit for bit, all 5 traits")


def test_sweep_exhaustiveness_counts():
    assert len(enumerate_simplex(0.1, CANONICAL_TRAITS)) == 1001
    for n_active in (2, 3, 4):
        for offset in range(5 - n_active + 1):
            active = CANONICAL_TRAITS[offset:offset + n_active]
            got = len(enumerate_simplex(0.1, active))
            closed = math.comb(10 + n_active - 1, n_active - 1)
            assert got == closed == len(naive_simplex(10, n_active))
    ok("sweep exhaustiveness: 1001 at step 0.1 over 5 traits; "
       "pair/triple/quadruple counts match closed form and brute force")


def test_fusion_gain_on_independent_traits():
    cfg = json.loads((FIXTURES / "fixture_scores.json").read_text())
    sc = cfg["scores"]
    traits = [Trait.from_name(t) for t in sorted(sc["models"])]
    singles = {}
    tables = {}
    for trait in traits:
        params = sc["models"][trait.value]
        model = ScoreModel(mu_genuine=params["mu_genuine"],
                           mu_impostor=params["mu_impostor"],
                           sigma=params["sigma"])
        g, i = gen_scores(model, sc["genuine_n"], sc["impostor_n"], cfg["seed"],
                          trait_index=CANONICAL_TRAITS.index(trait))
        singles[trait], _ = eer(roc(g, i))
        pairs = tuple(
            [(SampleKey(f"G{k}", "a"), SampleKey(f"G{k}", "b"), True)
             for k in range(len(g))]
            + [(SampleKey(f"X{k}", "a"), SampleKey(f"Y{k}", "a"), False)
               for k in range(len(i))])
        tables[trait] = ScoreTable(trait=trait, pairs=pairs,
                                   scores=np.concatenate([g, i]))
    for e in singles.values():
        assert 0.05 < e < 0.30  # each trait EER ~10% by construction
    result = sweep(tables, step=0.1, criterion="eer")
    best = min(r.eer for _, r in result.entries)
    assert all(best < e for e in singles.values())
    ok(f"fusion gain: swept fused EER {100 * best:.3f}% < single EERs "
       + ", ".join(f"{100 * e:.3f}%" for e in singles.values()))


def test_geometry_round_trip_and_rubber_sheet():
    rng = np.random.default_rng(5)
    img = rng.uniform(size=(200, 200))
    original = FaceKeypoints(left_eye=(80.0, 100.0), right_eye=(120.0, 100.0),
                             nose_center=(100.0, 130.0),
                             left_eyebrow_center=(80.0, 80.0))
    cx = cy = 100.0
    for deg in (-20, -5, 5, 20, 45):
        theta = math.radians(deg)
        c, s = math.cos(theta), math.sin(theta)
        pts = original.as_array() - (cx, cy)
        rotated = FaceKeypoints.from_array(
            np.column_stack([c * pts[:, 0] - s * pts[:, 1],
                             s * pts[:, 0] + c * pts[:, 1]]) + (cx, cy))
        _, recovered = normalize_rotation(img, rotated)
        err = np.max(np.abs(recovered.as_array() - original.as_array()))
        assert err < 1.0, f"{deg} deg: keypoint error {err}"

    h = w = 256
    yy, xx = np.mgrid[0:h, 0:w]
    dmax = math.hypot(128.0, 128.0)
    gradient = np.hypot(xx - 128.0, yy - 128.0) / dmax
    circles = IrisCircles(pupil_center=(128.0, 128.0), pupil_radius=20.0,
                          iris_center=(128.0, 128.0), iris_radius=60.0)
    norm = rubber_sheet(gradient, circles, out_size=(64, 512))
    rho = np.arange(64) / 63.0
    expected = (20.0 + rho * 40.0) / dmax
    err = np.abs(norm.rect - expected[:, None]).max()
    assert err < 0.01, f"rubber sheet error {err}"
    ok(f"geometry round trip (<1 px) and rubber sheet (max err {err:.5f} < 0.01)")


def test_iris_aggregation_against_brute_force():
    rng = np.random.default_rng(99)
    records = {}
    for n in range(1000):
        key = SampleKey(f"S{n:04d}", "a")
        ratios = (0.0, 0.0, 0.0, 0.0) if n < 5 else tuple(rng.uniform(0, 1, 4))
        records[key] = IrisRecord(
            key=key, subvectors=tuple(rng.normal(size=6) for _ in range(4)),
            mask_ratios=ratios)
    keys = sorted(records)
    pairs = [(keys[2 * i], keys[2 * i + 1], False) for i in range(500)]
    table = score_table(Trait.IRIS, records, pairs)
    absent = 0
    for (a, b, _), got in zip(pairs, table.scores):
        want = naive_iris_score(records[a].subvectors, records[b].subvectors,
                                records[a].mask_ratios, records[b].mask_ratios)
        if want is None:
            absent += 1
            assert np.isnan(got)
        else:
            assert abs(got - want) <= 1e-12
    assert absent >= 2  # the fully occluded records pair up front
    from fusebench.fusion import fuse_tables
    _, _, excluded = fuse_tables({Trait.IRIS: table},
                                 FusionWeights.one_hot(Trait.IRIS))
    assert excluded == absent  # tallied, never imputed
    ok(f"iris aggregation: 500 pairs match brute force to 1e-12; "
       f"{absent} fully-occluded pairs tallied as absent")


def test_protocol_counts_grids():
    for n in range(1, 11):
        for m in range(1, 7):
            keys = [SampleKey(f"S{s:02d}", f"i{j}") for s in range(n)
                    for j in range(m)]
            pairs = enumerate_pairs(keys)
            genuine = sum(1 for _, _, g in pairs if g)
            assert genuine == n * math.comb(m, 2)
            assert len(pairs) - genuine == math.comb(n * m, 2) - n * math.comb(m, 2)
    ok("protocol counts: all (n, m) grids up to (10, 6) match closed forms")


def _run(args, cwd):
    proc = subprocess.run([sys.executable, "-m", "fusebench.cli"] + args,
                          cwd=cwd, capture_output=True, text=True)
    assert proc.returncode == 0, f"{args}: {proc.stderr}"
    return proc


def test_cli_determinism_across_runs_and_threads(tmp_path):
    outputs = {}
    for label, threads in (("run1", "1"), ("run2", "1"), ("run8", "8")):
        d = tmp_path / label
        d.mkdir()
        for f in GOLDEN.glob("features_*.ff"):
            shutil.copy(f, d / f.name)
        shutil.copy(GOLDEN / "run_config.json", d / "run_config.json")
        _run(["score", "--config", "run_config.json", "--out", ".",
              "--threads", threads], cwd=d)
        _run(["sweep", "--config", "run_config.json", "--out", "."], cwd=d)
        _run(["evaluate", "--config", "run_config.json", "--out", "."], cwd=d)
        _run(["report", "--out", "."], cwd=d)
        outputs[label] = {p.name: p.read_bytes() for p in d.iterdir()
                          if p.suffix in (".csv", ".json", ".txt")}
    assert outputs["run1"] == outputs["run2"]
    assert outputs["run1"] == outputs["run8"]
    ok("determinism: score+sweep+evaluate+report byte-identical across reruns "
       "and threads 1 vs 8")


def test_report_format_matches_frozen_golden(tmp_path):
    for name in ("sweep_val.csv", "selection.json", "fused_test.json"):
        shutil.copy(GOLDEN / name, tmp_path / name)
    for f in GOLDEN.glob("single_*_test.json"):
        shutil.copy(f, tmp_path / f.name)
    _run(["report", "--out", "."], cwd=tmp_path)
    assert (tmp_path / "report.txt").read_bytes() == \
        (GOLDEN / "report.txt").read_bytes()
    text = (GOLDEN / "report.txt").read_text()
    assert "---" in text  # excluded-trait columns
    assert re.search(r"\b\d+\.\d{3}\b", text)  # 3-decimal percentages
    fusion_section = text.split("Score-level fusion")[1]
    sizes = []
    for line in fusion_section.splitlines():
        cells = line.split()
        if len(cells) >= 8 and all(c == "---" or _is_num(c) for c in cells[:5]):
            sizes.append(sum(1 for c in cells[:5] if c != "---"))
    assert sizes == sorted(sizes)  # grouped singles, pairs, ... quintuple
    assert set(sizes) == {1, 2, 3, 4, 5}
    ok("report format: '---' columns, 3-decimal percentages, "
       "rows grouped by combination size; golden frozen")


def _is_num(cell):
    try:
        float(cell)
        return True
    except ValueError:
        return False
