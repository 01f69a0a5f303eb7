"""Rendering of sweep CSVs and human-readable result tables.

The fusion table mirrors the conventional layout for score-fusion results:
one column per trait holding its weight or "---" when the trait is not in
the combination, then EER and FRR@FAR columns as percentages with three
decimal places, with rows grouped by combination size (singles, pairs,
triples, quadruples, quintuple).
"""

from __future__ import annotations

import math

from .errors import IngestError
from .fusion import SweepResult
from .metrics import MetricsReport
from .model import CANONICAL_TRAITS, Trait

SCHEMA = "fusebench/1"

SWEEP_CSV_HEADER = ",".join([t.value for t in CANONICAL_TRAITS]
                            + ["eer_pct", "frr_at_far0.1_pct", "frr_at_far0.01_pct"])


def _pct(x: float) -> str:
    return f"{100.0 * x:.3f}"


def _weight_decimals(step: float) -> int:
    return max(1, -math.floor(math.log10(step) + 1e-9))


def _report_pcts(report_dict: dict) -> tuple[str, str, str]:
    frr = report_dict["frr_at_far"]
    return (_pct(report_dict["eer"]),
            _pct(frr["0.001"]["frr"]),
            _pct(frr["0.0001"]["frr"]))


def sweep_to_csv(result: SweepResult, step: float, active_traits) -> str:
    """One data row per enumerated weight vector, in enumeration order.

    Inactive traits render as "---"; active traits show their weight, so a
    zero weight inside the active set stays distinguishable from exclusion.
    """
    active = set(active_traits)
    dec = _weight_decimals(step)
    lines = [SWEEP_CSV_HEADER]
    for weights, report in result.entries:
        cells = []
        for t in CANONICAL_TRAITS:
            cells.append(f"{weights.weights[t]:.{dec}f}" if t in active else "---")
        cells += _report_pcts(report.to_dict())
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def parse_sweep_csv(text: str):
    """Rows of (weights-or-None per canonical trait, eer, frr0.1, frr0.01),
    percentages as floats."""
    lines = text.splitlines()
    if not lines or lines[0] != SWEEP_CSV_HEADER:
        raise IngestError("sweep CSV: bad or missing header")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 8:
            raise IngestError(f"sweep CSV line {lineno}: expected 8 fields")
        weights = tuple(None if p == "---" else float(p) for p in parts[:5])
        rows.append((weights, float(parts[5]), float(parts[6]), float(parts[7])))
    return rows


def _render_table(headers, rows, groups=None) -> str:
    """Plain-text aligned table; groups = row-index cut points for rules."""
    widths = [len(h) for h in headers]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    rule = "-" * (sum(widths) + 2 * (len(headers) - 1))
    out = [rule, "  ".join(h.ljust(w) for h, w in zip(headers, widths)), rule]
    cuts = set(groups or [])
    for i, row in enumerate(rows):
        if i in cuts and i > 0:
            out.append(rule)
        out.append("  ".join(c.rjust(w) if j else c.ljust(w)
                             for j, (c, w) in enumerate(zip(row, widths))))
    out.append(rule)
    return "\n".join(out) + "\n"


def render_single_table(reports: dict[Trait, dict]) -> str:
    """Per-trait verification results, canonical trait order."""
    headers = ["Trait", "EER [%]", "FRR@FAR0.1% [%]", "FRR@FAR0.01% [%]"]
    rows = []
    for t in CANONICAL_TRAITS:
        if t in reports:
            rows.append((t.value, *_report_pcts(reports[t])))
    return _render_table(headers, rows)


def render_fusion_table(sweep_rows, step: float = 0.1) -> str:
    """Best weight vector per trait combination, grouped by size.

    A row's combination is the set of traits with positive weight; within
    each combination the minimum-EER row wins; sections are ordered by
    combination size then lexicographically in canonical trait order.
    """
    dec = _weight_decimals(step)
    best = {}
    for weights, eer_pct, frr1, frr2 in sweep_rows:
        combo = tuple(w is not None and w > 0.0 for w in weights)
        if not any(combo):
            continue
        entry = (eer_pct, weights, frr1, frr2)
        if combo not in best or entry < best[combo]:
            best[combo] = entry
    ordered = sorted(best, key=lambda c: (sum(c), tuple(not x for x in c)))
    headers = [t.value for t in CANONICAL_TRAITS] + \
        ["EER [%]", "FRR@FAR0.1% [%]", "FRR@FAR0.01% [%]"]
    rows, cuts, size_seen = [], [], None
    for combo in ordered:
        eer_pct, weights, frr1, frr2 = best[combo]
        if size_seen is not None and sum(combo) != size_seen:
            cuts.append(len(rows))
        size_seen = sum(combo)
        cells = [f"{w:.{dec}f}" if active else "---"
                 for w, active in zip(weights, combo)]
        rows.append((*cells, f"{eer_pct:.3f}", f"{frr1:.3f}", f"{frr2:.3f}"))
    return _render_table(headers, rows, groups=cuts)


def render_report(single_reports: dict[Trait, dict], sweep_rows,
                  fused_test: dict | None = None, step: float = 0.1) -> str:
    out = [f"# fusebench report ({SCHEMA})", "", "## Single biometric traits", "",
           render_single_table(single_reports)]
    if sweep_rows:
        out += ["## Score-level fusion (validation sweep)", "",
                render_fusion_table(sweep_rows, step=step)]
    if fused_test is not None:
        e, f1, f2 = _report_pcts(fused_test)
        out += ["## Selected weights on test", "",
                f"EER {e} %  FRR@FAR0.1% {f1} %  FRR@FAR0.01% {f2} %", ""]
    return "\n".join(out)


def summary_line(report: MetricsReport) -> str:
    d = report.to_dict()
    e, f1, f2 = _report_pcts(d)
    return f"EER {e} %  FRR@FAR0.1% {f1} %  FRR@FAR0.01% {f2} %"
