#!/usr/bin/env python3
"""Regenerate the frozen golden files under tests/goldens/run/.

Score CSVs are produced by an independent brute-force oracle (high-precision
cosine per pair, naive double loop), NOT by the engine; the engine's own
outputs must then match them byte for byte. Sweep/report artifacts are
produced by the CLI once and frozen as regression anchors.

Run from the repository root:  python3 tools/make_goldens.py
"""

import json
import shutil
import subprocess
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

from oracles import cosine_highprec, naive_iris_score  # noqa: E402

from fusebench.featfile import read_features  # noqa: E402
from fusebench.model import (SPLITS, IrisRecord, SubjectRange,  # noqa: E402
                             Trait, build_protocol)

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "tests" / "fixtures"
GOLDEN = ROOT / "tests" / "goldens" / "run"


def oracle_score_csv(trait, records, pairs):
    lines = ["trait,subject_a,sample_a,subject_b,sample_b,genuine,score"]
    by_key = {r.key: r for r in records}
    for a, b, genuine in pairs:
        ra, rb = by_key[a], by_key[b]
        if isinstance(ra, IrisRecord):
            val = naive_iris_score(ra.subvectors, rb.subvectors,
                                   ra.mask_ratios, rb.mask_ratios)
        else:
            val = cosine_highprec(ra.vector, rb.vector)
        cell = "" if val is None else f"{min(1.0, max(-1.0, val)):.9g}"
        lines.append(f"{trait.value},{a.subject_id},{a.sample_id},"
                     f"{b.subject_id},{b.sample_id},{int(genuine)},{cell}")
    return "\n".join(lines) + "\n"


def main():
    if GOLDEN.exists():
        shutil.rmtree(GOLDEN)
    GOLDEN.mkdir(parents=True)
    shutil.copy(FIXTURES / "run_config.json", GOLDEN / "run_config.json")

    run = [sys.executable, "-m", "fusebench.cli"]
    subprocess.run(run + ["synth", "--config",
                          str(FIXTURES / "fixture_embedding.json"),
                          "--out", str(GOLDEN)], check=True)

    cfg = json.loads((FIXTURES / "run_config.json").read_text())
    ranges = [SubjectRange(*e["range"].split(".."), e["split"])
              for e in cfg["splits"]]
    datasets = {}
    all_keys = set()
    for name, fname in cfg["features"].items():
        trait, records = read_features(GOLDEN / fname)
        datasets[trait] = records
        all_keys.update(r.key for r in records)
    protocol = build_protocol(sorted(all_keys), ranges)
    for trait, records in datasets.items():
        for split in SPLITS:
            text = oracle_score_csv(trait, records, protocol.pairs[split])
            (GOLDEN / f"scores_{trait.value}_{split}.csv").write_text(text)

    subprocess.run(run + ["evaluate", "--config", "run_config.json",
                          "--out", "."], check=True, cwd=GOLDEN)
    subprocess.run(run + ["report", "--out", "."], check=True, cwd=GOLDEN)
    print(f"goldens written to {GOLDEN}")


if __name__ == "__main__":
    main()
