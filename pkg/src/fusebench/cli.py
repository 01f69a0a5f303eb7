"""Command-line surface: score, sweep, evaluate, report, synth, geometry.

All commands are deterministic given (config, input files); randomness
flows only from the config seed. Exit codes: 0 success, 1 success with
warnings (e.g. excluded pairs), 2 input/config error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import featfile, geometry, matching, metrics, reporting, synthdata
from .errors import ConfigError, FusebenchError, IngestError
from .fusion import CRITERIA, FusionWeights, evaluate_fused, sweep
from .matching import ScoreTable, score_table, score_table_from_csv, score_table_to_csv
from .model import CANONICAL_TRAITS, SPLITS, SubjectRange, Trait, build_protocol

SCHEMA = "fusebench/1"


def _load_json(path, what="file"):
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"{what} not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None


def _check_schema(doc, path):
    if doc.get("schema", SCHEMA) != SCHEMA:
        raise ConfigError(f"{path}: schema {doc.get('schema')!r} != {SCHEMA!r}")


def _parse_ranges(entries):
    ranges = []
    for ent in entries:
        try:
            lo, hi = ent["range"].split("..")
        except (KeyError, ValueError):
            raise ConfigError(f"bad split range entry: {ent!r} "
                              "(expected {{'range': 'A..B', 'split': ...}})") from None
        ranges.append(SubjectRange(lo=lo, hi=hi, split=ent["split"]))
    return ranges


def _resolve_threads(args) -> int:
    spec = args.threads or os.environ.get("FUSEBENCH_THREADS") or "1"
    if spec == "auto":
        return os.cpu_count() or 1
    try:
        n = int(spec)
    except ValueError:
        raise ConfigError(f"--threads must be an integer or 'auto', got {spec!r}") from None
    if n < 1:
        raise ConfigError("--threads must be >= 1")
    return n


def _load_config(args):
    cfg = _load_json(args.config, "config")
    _check_schema(cfg, args.config)
    return cfg


def _out_dir(args, cfg) -> Path:
    out = Path(args.out or cfg.get("out_dir", "out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_datasets(cfg):
    """Feature files per trait -> (records_by_trait, protocol, missing_by_trait)."""
    paths = cfg.get("features")
    if not paths:
        raise ConfigError("config has no 'features' section")
    datasets = {}
    for name, path in paths.items():
        trait = Trait.from_name(name)
        file_trait, records = featfile.read_features(path)
        if file_trait is not trait:
            raise IngestError(f"{path}: header trait {file_trait.value!r} but config "
                              f"lists it under {trait.value!r}")
        datasets[trait] = {r.key: r for r in records}
    all_keys = sorted({k for recs in datasets.values() for k in recs})
    ranges = _parse_ranges(cfg.get("splits", []))
    protocol = build_protocol(all_keys, ranges)
    missing = {t: frozenset(k for k in all_keys if k not in recs)
               for t, recs in datasets.items()}
    return datasets, protocol, missing


def _score_path(out: Path, trait: Trait, split: str) -> Path:
    return out / f"scores_{trait.value}_{split}.csv"


def cmd_score(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args, cfg)
    threads = _resolve_threads(args)
    datasets, protocol, missing = _load_datasets(cfg)
    warned = False
    for trait in CANONICAL_TRAITS:
        if trait not in datasets:
            continue
        for split in SPLITS:
            table = score_table(trait, datasets[trait], protocol.pairs[split],
                                missing=missing[trait], threads=threads)
            _score_path(out, trait, split).write_text(score_table_to_csv(table))
            absent = int(np.isnan(table.scores).sum())
            if absent:
                warned = True
                print(f"warning: {trait.value}/{split}: {absent} absent scores",
                      file=sys.stderr)
    return 1 if warned else 0


def _load_tables(out: Path, split: str, traits) -> dict[Trait, ScoreTable]:
    tables = {}
    for trait in traits:
        path = _score_path(out, trait, split)
        if not path.exists():
            raise ConfigError(f"missing score file: {path} (run 'score' first)")
        tables[trait] = score_table_from_csv(path.read_text())
    return tables


def _sweep_params(args, cfg):
    sw = cfg.get("sweep", {})
    step = args.step if args.step is not None else float(sw.get("step", 0.1))
    criterion = args.criterion or sw.get("criterion", "eer")
    active = [Trait.from_name(t) for t in sw.get("active_traits", [])] or None
    far_targets = tuple(cfg.get("far_targets", metrics.DEFAULT_FAR_TARGETS))
    for t in far_targets:
        if not (0.0 < t < 1.0):
            raise ConfigError(f"FAR target {t} outside (0, 1)")
    return step, criterion, active, far_targets


def _traits_in(cfg, out: Path, split: str):
    if cfg.get("features"):
        return [Trait.from_name(t) for t in cfg["features"]]
    found = [t for t in CANONICAL_TRAITS if _score_path(out, t, split).exists()]
    if not found:
        raise ConfigError(f"no score files for split {split!r} under {out}")
    return found


def _run_sweep(args, cfg, out: Path):
    step, criterion, active, far_targets = _sweep_params(args, cfg)
    tables = _load_tables(out, "val", _traits_in(cfg, out, "val"))
    if active is None:
        active = sorted(tables, key=CANONICAL_TRAITS.index)
    result = sweep(tables, step=step, criterion=criterion, active_traits=active,
                   far_targets=far_targets)
    (out / "sweep_val.csv").write_text(reporting.sweep_to_csv(result, step, active))
    selection = {
        "schema": SCHEMA,
        "criterion": criterion,
        "step": step,
        "active_traits": [t.value for t in active],
        "weights": {t.value: w for t, w in result.selected.weights.items()},
    }
    (out / "selection.json").write_text(json.dumps(selection, indent=2) + "\n")
    return result, far_targets, step


def cmd_sweep(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args, cfg)
    _run_sweep(args, cfg, out)
    return 0


def cmd_evaluate(args) -> int:
    """Sweep on validation, apply the selected weights to test, report both."""
    cfg = _load_config(args)
    out = _out_dir(args, cfg)
    traits = _traits_in(cfg, out, "test")

    if cfg.get("weights"):  # forced weights skip the sweep
        selected = FusionWeights({Trait.from_name(t): w
                                  for t, w in cfg["weights"].items()})
        _, _, _, far_targets = _sweep_params(args, cfg)
        step = args.step if args.step is not None else 0.1
    else:
        result, far_targets, step = _run_sweep(args, cfg, out)
        selected = result.selected

    test_tables = _load_tables(out, "test", traits)
    warned = False
    for trait in traits:
        g, i, dropped = test_tables[trait].present_scores()
        report = metrics.evaluate_scores(g, i, far_targets=far_targets,
                                         excluded_pairs=dropped)
        (out / f"single_{trait.value}_test.json").write_text(
            json.dumps(report.to_dict(), indent=2) + "\n")
        (out / f"roc_{trait.value}_test.csv").write_text(
            metrics.export_curve_csv(report.curve))
        warned = warned or dropped > 0

    fused = evaluate_fused(test_tables, selected, far_targets=far_targets)
    doc = fused.to_dict()
    doc["weights"] = {t.value: w for t, w in selected.weights.items()}
    (out / "fused_test.json").write_text(json.dumps(doc, indent=2) + "\n")
    print(f"selected weights: " +
          " ".join(f"{t.value}={selected.weights[t]:g}" for t in CANONICAL_TRAITS))
    print("test: " + reporting.summary_line(fused))
    warned = warned or fused.excluded_pairs > 0
    if warned:
        print("warning: some pairs were excluded from evaluation", file=sys.stderr)
    return 1 if warned else 0


def cmd_report(args) -> int:
    out = Path(args.out or "out")
    singles = {}
    for trait in CANONICAL_TRAITS:
        path = out / f"single_{trait.value}_test.json"
        if path.exists():
            doc = _load_json(path, "metrics")
            _check_schema(doc, path)
            singles[trait] = doc
    sweep_path = out / "sweep_val.csv"
    rows = reporting.parse_sweep_csv(sweep_path.read_text()) if sweep_path.exists() else []
    fused = None
    fused_path = out / "fused_test.json"
    if fused_path.exists():
        fused = _load_json(fused_path, "metrics")
        _check_schema(fused, fused_path)
    if not singles and not rows:
        raise ConfigError(f"no metrics artifacts found under {out}")
    step = 0.1
    sel_path = out / "selection.json"
    if sel_path.exists():
        sel = _load_json(sel_path, "selection")
        _check_schema(sel, sel_path)
        step = float(sel.get("step", 0.1))
    text = reporting.render_report(singles, rows, fused_test=fused, step=step)
    (out / "report.txt").write_text(text)
    if rows:
        (out / "report_fusion.csv").write_text(
            _fusion_rows_csv(rows, step))
    print(text, end="")
    return 0


def _fusion_rows_csv(rows, step):
    lines = [reporting.SWEEP_CSV_HEADER]
    dec = reporting._weight_decimals(step)
    for weights, eer_pct, frr1, frr2 in rows:
        cells = ["---" if w is None else f"{w:.{dec}f}" for w in weights]
        cells += [f"{eer_pct:.3f}", f"{frr1:.3f}", f"{frr2:.3f}"]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def cmd_synth(args) -> int:
    """Generate synthetic fixture datasets from a fixture config."""
    cfg = _load_config(args)
    out = _out_dir(args, cfg)
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))

    if "embedding" in cfg:
        emb = cfg["embedding"]
        model = synthdata.EmbeddingModel(
            dim=int(emb["dim"]),
            subjects=int(emb["subjects"]),
            samples_per_subject=int(emb["samples_per_subject"]),
            noise_sigma={Trait.from_name(t): float(s)
                         for t, s in emb["noise_sigma"].items()},
            seed=seed,
            first_subject=int(emb.get("first_subject", 4000)),
        )
        datasets = synthdata.gen_embeddings(model)
        for trait, records in datasets.items():
            featfile.write_features(out / f"features_{trait.value}.ff", trait, records)
    if "scores" in cfg:
        sc = cfg["scores"]
        genuine_n = int(sc["genuine_n"])
        impostor_n = int(sc["impostor_n"])
        for ti, (name, params) in enumerate(sorted(sc["models"].items())):
            trait = Trait.from_name(name)
            model = synthdata.ScoreModel(mu_genuine=float(params["mu_genuine"]),
                                         mu_impostor=float(params["mu_impostor"]),
                                         sigma=float(params["sigma"]))
            g, i = synthdata.gen_scores(model, genuine_n, impostor_n, seed,
                                        trait_index=CANONICAL_TRAITS.index(trait))
            table = _scores_as_table(trait, g, i)
            (out / f"scores_{trait.value}_val.csv").write_text(score_table_to_csv(table))
    if "embedding" not in cfg and "scores" not in cfg:
        raise ConfigError("fixture config needs an 'embedding' or 'scores' section")
    return 0


def _scores_as_table(trait, genuine, impostor) -> ScoreTable:
    """Wrap raw score draws in a pair-addressed table with synthetic keys."""
    from .model import SampleKey
    pairs = []
    for i in range(len(genuine)):
        pairs.append((SampleKey(f"G{i:06d}", "a"), SampleKey(f"G{i:06d}", "b"), True))
    for i in range(len(impostor)):
        pairs.append((SampleKey(f"X{i:06d}", "a"), SampleKey(f"Y{i:06d}", "a"), False))
    scores = np.concatenate([genuine, impostor])
    return ScoreTable(trait=trait, pairs=tuple(pairs), scores=scores)


def _parse_point(text, what):
    try:
        x, y = text.split(",")
        return float(x), float(y)
    except ValueError:
        raise ConfigError(f"{what}: expected 'x,y', got {text!r}") from None


def _load_keypoints(path) -> geometry.FaceKeypoints:
    doc = _load_json(path, "keypoints")
    try:
        return geometry.FaceKeypoints(
            left_eye=tuple(doc["left_eye"]),
            right_eye=tuple(doc["right_eye"]),
            nose_center=tuple(doc["nose_center"]),
            left_eyebrow_center=tuple(doc["left_eyebrow_center"]))
    except KeyError as exc:
        raise ConfigError(f"{path}: missing keypoint {exc}") from None


def cmd_geometry(args) -> int:
    if args.op == "normalize":
        img = geometry.read_pgm(args.image)
        kp = _load_keypoints(args.keypoints)
        norm, new_kp = geometry.normalize_rotation(img, kp)
        geometry.write_pgm(args.out_image, norm)
        if args.out_keypoints:
            doc = {"left_eye": list(new_kp.left_eye),
                   "right_eye": list(new_kp.right_eye),
                   "nose_center": list(new_kp.nose_center),
                   "left_eyebrow_center": list(new_kp.left_eyebrow_center)}
            Path(args.out_keypoints).write_text(json.dumps(doc, indent=2) + "\n")
    elif args.op == "crop":
        img = geometry.read_pgm(args.image)
        if args.trait:
            kp = _load_keypoints(args.keypoints)
            spec = geometry.trait_crop_spec(args.trait, kp)
        else:
            if not (args.center and args.size):
                raise ConfigError("crop needs --trait or both --center and --size")
            w, h = (int(v) for v in args.size.split("x"))
            spec = geometry.CropSpec(center=_parse_point(args.center, "--center"),
                                     width=w, height=h)
        window, clipped = geometry.crop(img, spec)
        geometry.write_pgm(args.out_image, window)
        print(f"clipped_fraction {clipped:.9g}")
    elif args.op == "iris":
        img = geometry.read_pgm(args.image)
        doc = _load_json(args.circles, "iris circles")
        occ = geometry.read_pgm(doc["occlusion_mask"]) if doc.get("occlusion_mask") else None
        circles = geometry.IrisCircles(
            pupil_center=tuple(doc["pupil_center"]),
            pupil_radius=float(doc["pupil_radius"]),
            iris_center=tuple(doc["iris_center"]),
            iris_radius=float(doc["iris_radius"]),
            occlusion_mask=occ)
        hn, wn = (int(v) for v in args.size.split("x"))
        norm = geometry.rubber_sheet(img, circles, out_size=(hn, wn))
        geometry.write_pgm(args.out_rect, norm.rect)
        geometry.write_pgm(args.out_mask, norm.mask)
        if args.subimages_prefix:
            subrects, ratios = geometry.split_subimages(norm)
            for i, sub in enumerate(subrects):
                geometry.write_pgm(f"{args.subimages_prefix}_sub{i}.pgm", sub)
            Path(f"{args.subimages_prefix}_ratios.json").write_text(
                json.dumps({"mask_ratios": list(ratios)}) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fusebench",
        description="Multibiometric score-fusion and verification-metrics engine")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", help="output directory")
        p.add_argument("--threads", help="worker threads: integer or 'auto' "
                                         "(env FUSEBENCH_THREADS as fallback)")

    for name, fn, needs_cfg in [("score", cmd_score, True),
                                ("sweep", cmd_sweep, True),
                                ("evaluate", cmd_evaluate, True),
                                ("synth", cmd_synth, True)]:
        p = sub.add_parser(name)
        p.add_argument("--config", required=needs_cfg)
        common(p)
        p.add_argument("--step", type=float, help="sweep grid step (e.g. 0.1)")
        p.add_argument("--criterion", choices=CRITERIA)
        p.add_argument("--seed", type=int)
        p.set_defaults(fn=fn)

    p = sub.add_parser("report")
    common(p)
    p.set_defaults(fn=cmd_report)

    p = sub.add_parser("geometry")
    p.add_argument("--op", required=True, choices=["normalize", "crop", "iris"])
    p.add_argument("--image", required=True)
    p.add_argument("--keypoints")
    p.add_argument("--out-image")
    p.add_argument("--out-keypoints")
    p.add_argument("--trait", choices=["periocular", "nose", "eyebrow"])
    p.add_argument("--center")
    p.add_argument("--size", default="64x512")
    p.add_argument("--circles")
    p.add_argument("--out-rect")
    p.add_argument("--out-mask")
    p.add_argument("--subimages-prefix")
    common(p)
    p.set_defaults(fn=cmd_geometry)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except FusebenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
