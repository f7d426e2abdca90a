"""Text and JSON reports for reduction plans and synthesis runs."""

from __future__ import annotations

import json
from importlib import resources
from typing import Sequence

from .synthesis import ReductionPlan, SynthesisResult

SCHEMA_VERSION = 1
NO_SYNTHESIS = "no synthesis necessary"


def load_schema() -> dict:
    return json.loads(resources.files("decsynth").joinpath("report.schema.json").read_text("utf-8"))


def report_data(plan: ReductionPlan, results: Sequence[SynthesisResult],
                deterministic: bool = False) -> dict:
    total = len(plan.graph.names)
    in_partials = sum(len(p.plants) for p in plan.partial_problems)
    partials = []
    for k, p in enumerate(plan.partial_problems):
        row = {"label": f"S{k + 1}", "plants": list(p.plant_names),
               "requirements": [r.id for r in p.requirements]}
        if k < len(results):
            res = results[k]
            row.update(label=res.label,
                       uncontrolled_size=res.uncontrolled_size,
                       closed_loop_size=res.closed_loop_size,
                       controlled_size=res.controlled_size,
                       pruned=res.pruned,
                       removed_transitions=[list(t) for t in res.removed_transitions],
                       iterations=res.iterations,
                       duration_ms=0.0 if deterministic else round(res.duration_ms, 3))
        partials.append(row)
    return {
        "schema_version": SCHEMA_VERSION,
        "verdict": plan.verdict.value,
        "plants": total,
        "plants_needing_synthesis": in_partials,
        "reduction_percent": round(100.0 * (total - in_partials) / total, 1) if total else 0.0,
        "residual": sorted(plan.residual, key=plan.graph.names.index),
        "cnms": [str(v) for v in plan.cnms.violations],
        "rcnms": [str(v) for v in plan.rcnms.violations],
        "partials": partials,
        "diagnostics": list(plan.diagnostics) + list(plan.cnms.notes),
    }


def _table(rows: list[tuple[str, ...]]) -> list[str]:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    out = []
    for n, r in enumerate(rows):
        out.append("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
        if n == 0:
            out.append("  ".join("-" * w for w in widths))
    return out


def emit_report(plan: ReductionPlan, results: Sequence[SynthesisResult], format: str = "text",
                deterministic: bool = False) -> str:
    """Render ``plan`` and its synthesis ``results``; durations become 0 when deterministic."""
    data = report_data(plan, results, deterministic)
    if format == "json":
        return json.dumps(data, indent=2, sort_keys=True) + "\n"
    if format != "text":
        raise ValueError(f"unknown report format {format!r}")

    lines = [f"verdict: {data['verdict']}"]
    header = ("model", "plants", "uncontrolled", "controlled", "duration_ms")
    if plan.skips_synthesis:
        rows = [header, (NO_SYNTHESIS, str(data["plants"]), "-", "-", "-")]
    else:
        rows = [header]
        for row in data["partials"]:
            if "controlled_size" in row:
                rows.append((row["label"], str(len(row["plants"])), str(row["uncontrolled_size"]),
                             str(row["controlled_size"]), f"{row['duration_ms']:.3f}"))
            else:
                rows.append((row["label"], str(len(row["plants"])), "-", "-", "-"))
    lines += _table(rows)
    if not plan.skips_synthesis:
        lines.append("")
        for row in data["partials"]:
            lines.append(f"{row['label']}: {', '.join(row['plants'])}")
            if "pruned" in row:
                if row["pruned"]:
                    removed = ", ".join(f"{e} at {s}" for s, e in row["removed_transitions"])
                    lines.append(f"  pruned: {removed or 'states removed'}")
                else:
                    lines.append("  no pruning required")
    lines.append("")
    lines.append(f"residual: {', '.join(data['residual']) or '(none)'}")
    lines.append(f"plants needing synthesis: {data['plants_needing_synthesis']} of {data['plants']} "
                 f"(a reduction of {data['reduction_percent']:g}% of the plant models)")
    for d in data["diagnostics"]:
        lines.append(f"note: {d}")
    return "\n".join(lines) + "\n"


def format_property_report(title: str, report) -> str:
    lines = [f"{title}: {'satisfied' if report.satisfied else 'violated'}"]
    lines += [f"  {v}" for v in report.violations]
    return "\n".join(lines)
