"""Fixed-width text rendering of an analysis report."""
from __future__ import annotations

from typing import Optional

from . import METRIC_LABELS, METRIC_NAMES


def _num(v: Optional[float], fmt: str = ".3f") -> str:
    if v is None:
        return "n/a"
    return format(v, fmt)


def _p(v: Optional[float]) -> str:
    if v is None:
        return "n/a"
    return "<0.001" if v < 0.001 else f"{v:.3f}"


def _ordered(rows: list[dict]) -> list[dict]:
    rank = {m: i for i, m in enumerate(METRIC_NAMES)}
    return sorted(rows, key=lambda r: (rank.get(r["metric"], len(rank)), r["metric"]))


def _table(title: str, header: list[str], rows: list[list[str]]) -> str:
    widths = [len(h) for h in header]
    for row in rows:
        widths = [max(w, len(c)) for w, c in zip(widths, row)]

    def line(cells):
        first = cells[0].ljust(widths[0])
        rest = [c.rjust(w) for c, w in zip(cells[1:], widths[1:])]
        return "  ".join([first] + rest).rstrip()

    rule = "-" * len(line(header))
    out = [title, rule, line(header), rule]
    out += [line(r) for r in rows]
    out.append(rule)
    return "\n".join(out) + "\n"


def comparison_table(rows: list[dict], title: str = "Popular vs niche comparison") -> str:
    header = ["Metric", "Popular", "Niche", "U", "p", "delta", "95% CI", "Effect", "Sig."]
    body = []
    for r in _ordered(rows):
        body.append([
            METRIC_LABELS.get(r["metric"], r["metric"]),
            f"{_num(r['popular_mean'])} ({_num(r['popular_sd'])})",
            f"{_num(r['niche_mean'])} ({_num(r['niche_sd'])})",
            _num(r["U"], ".1f"),
            _p(r["p_value"]),
            _num(r["cliffs_delta"]),
            f"[{_num(r['delta_ci_low'])}, {_num(r['delta_ci_high'])}]",
            r["effect_label"],
            "*" if r.get("significant_bonferroni") else "",
        ])
    return _table(title, header, body)


def correlation_table(rows: list[dict]) -> str:
    header = ["Metric", "r(ln size)", "p", "n"]
    body = [[METRIC_LABELS.get(r["metric"], r["metric"]), _num(r["r"]), _p(r["p"]), str(r["n"])]
            for r in _ordered(rows)]
    return _table("Correlation with log network size", header, body)


def regression_table(rows: list[dict]) -> str:
    header = ["Metric", "b_simple", "p", "b_control", "p", "b_size", "p", "adjR2", "Classification"]
    body = []
    for r in _ordered(rows):
        body.append([
            METRIC_LABELS.get(r["metric"], r["metric"]),
            _num(r["beta_simple"]), _p(r["p_simple"]),
            _num(r["beta_control"]), _p(r["p_control"]),
            _num(r["beta_size"]), _p(r["p_size"]),
            _num(r["adj_r2_control"]),
            r["classification"],
        ])
    return _table("Size-controlled regression", header, body)


def sensitivity_table(sens: dict) -> str:
    cutoffs = sens.get("cutoffs", [])
    header = ["Metric"] + [f"d@{c:.2f}" for c in cutoffs] + ["Consistent"]
    body = []
    for r in _ordered(sens.get("consistency", [])):
        cells = [f"{_num(d)}{'*' if s else ''}" for d, s in zip(r["deltas"], r["significant"])]
        body.append([METRIC_LABELS.get(r["metric"], r["metric"])] + cells + ["yes" if r["consistent"] else "no"])
    return _table("Cutoff sensitivity", header, body)


def render_report(report: dict) -> str:
    """Plain-text tables for whatever sections the report carries."""
    parts = []
    settings = report.get("settings")
    if settings:
        parts.append("cutoff={cutoff} alpha={alpha} bootstrap={bootstrap} seed={seed}\n".format(**settings))
    groups = report.get("groups")
    if groups:
        parts.append(f"topics={groups['n_topics']} popular={groups['popular']} niche={groups['niche']}\n")
    parts.append(comparison_table(report.get("comparisons", [])))
    if "size_correlations" in report:
        parts.append(correlation_table(report["size_correlations"]))
    if "regressions" in report:
        parts.append(regression_table(report["regressions"]))
    if "sensitivity" in report:
        parts.append(sensitivity_table(report["sensitivity"]))
    skipped = report.get("skipped") or []
    if skipped:
        lines = ["Skipped"]
        for item in skipped:
            label = METRIC_LABELS.get(item.get("metric"), item.get("metric") or "all metrics")
            lines.append(f"  {item['section']}: {label}: {item['reason']}")
        parts.append("\n".join(lines) + "\n")
    return "\n".join(parts)
