"""Plain-text metrics reports: per-trial and batch aggregates."""
from __future__ import annotations

from .metrics import format_stats_table


def trial_report(result) -> str:
    """Human-readable summary mirroring the usual table layout
    (mean, SD, median, min, max by difficulty and SA level)."""
    doc = result.to_dict() if hasattr(result, "to_dict") else result
    sections = [
        f"trial report  model={doc['model']}  policy={doc['policy']}  seed={doc['seed']}",
        "",
    ]

    by_diff: dict[str, list[dict]] = {}
    for comp in doc["components"]:
        by_diff.setdefault(comp["difficulty"], []).extend(comp["decisions"])

    def decision_rows(field, scale=1.0):
        rows = {}
        alldecs = []
        for diff, decs in sorted(by_diff.items()):
            vals = [d[field] * scale for d in decs]
            rows[diff] = vals
            alldecs.extend(vals)
        rows = {"overall": alldecs, **rows}
        return rows

    sections.append(format_stats_table("Decision time (minutes)", _decision_times(by_diff)))
    sections.append("")
    sections.append(format_stats_table("Selected target value", decision_rows("selected_value")))
    sections.append("")

    success_rows = {}
    alldecs = [d for decs in by_diff.values() for d in decs]
    success_rows["overall"] = [_success_pct(alldecs)] if alldecs else []
    for diff, decs in sorted(by_diff.items()):
        success_rows[diff] = [_success_pct(decs)] if decs else []
    sections.append(format_stats_table("Selection success rate (%)", success_rows))
    sections.append("")

    sa_rows: dict[str, list[float]] = {}
    for comp in doc["components"]:
        for level, value in comp["sa_scores"].items():
            if value is not None:
                sa_rows.setdefault(level, []).append(value)
    sections.append(format_stats_table("SA probe accuracy (%)", sa_rows))
    sections.append("")

    clutter_rows: dict[str, list[float]] = {}
    for comp in doc["components"]:
        clutter_rows[comp["difficulty"]] = [v for _, v in comp["clutter_series"]]
    sections.append(format_stats_table("Global clutter (%)", clutter_rows))
    sections.append("")

    inter_lines = ["Interactions", "------------"]
    for comp in doc["components"]:
        inter_lines.append(f"[{comp['difficulty']}] " + "  ".join(
            f"{k}={v:.1f}" if isinstance(v, float) else f"{k}={v}"
            for k, v in sorted(comp["interactions"].items())))
    sections.append("\n".join(inter_lines))
    return "\n".join(sections) + "\n"


def _decision_times(by_diff: dict) -> dict[str, list[float]]:
    rows: dict[str, list[float]] = {"overall": []}
    for diff, decs in sorted(by_diff.items()):
        vals = [(d["end"] - d["start"]) / 60.0 for d in decs]
        rows[diff] = vals
        rows["overall"].extend(vals)
    return rows


def _success_pct(decs: list[dict]) -> float:
    ok = sum(1 for d in decs
             if d["established"] and d["selected_value"] == d["ground_truth_best_value"])
    return 100.0 * ok / len(decs)


def batch_report(results: list) -> str:
    """Aggregate tables over many trial results (dicts or TrialResults)."""
    docs = [r.to_dict() if hasattr(r, "to_dict") else r for r in results]
    times: dict[str, list[float]] = {"overall": []}
    values: dict[str, list[float]] = {"overall": []}
    success: dict[str, list[float]] = {"overall": []}
    for doc in docs:
        for comp in doc["components"]:
            diff = comp["difficulty"]
            decs = comp["decisions"]
            if not decs:
                continue
            t = [(d["end"] - d["start"]) / 60.0 for d in decs]
            v = [d["selected_value"] for d in decs]
            times.setdefault(diff, []).extend(t)
            times["overall"].extend(t)
            values.setdefault(diff, []).extend(v)
            values["overall"].extend(v)
            success.setdefault(diff, []).append(_success_pct(decs))
            success["overall"].append(_success_pct(decs))
    head = f"batch report over {len(docs)} trials"
    return "\n".join([
        head, "=" * len(head), "",
        format_stats_table("Decision time (minutes)", times), "",
        format_stats_table("Selected target value", values), "",
        format_stats_table("Selection success rate (% per trial)", success),
    ]) + "\n"
