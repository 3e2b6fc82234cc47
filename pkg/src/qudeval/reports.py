"""Deterministic text rendering for the machine-readable reports.

Same input bytes, same output bytes: all floats are fixed-precision, all
columns are computed from the data, nothing depends on locale or dict
iteration order beyond what the JSON already fixes.
"""

from __future__ import annotations

from typing import Sequence


def _table(headers: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    widths = [len(h) for h in headers]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    def line(cells: Sequence[str]) -> str:
        return "  ".join(cell.ljust(widths[i]) for i, cell in enumerate(cells)).rstrip()
    out = [line(headers), line(["-" * w for w in widths])]
    out.extend(line(row) for row in rows)
    return "\n".join(out)


def _pct(value) -> str:
    return "-" if value is None else f"{value:.1f}"


def render_report(report: dict) -> str:
    """Dispatch on the report's ``kind`` field."""
    kind = report.get("kind")
    if kind == "distributions":
        return render_distributions(report)
    if kind == "dupstats":
        return render_dupstats(report)
    if kind == "agreement":
        return render_agreement(report)
    if kind == "assessment":
        return render_assessment(report)
    if kind == "correlation":
        return render_correlation(report)
    if kind == "significance":
        return render_significance(report)
    raise ValueError(f"unknown report kind {kind!r}")


def render_distributions(report: dict) -> str:
    headers = [
        "system", "n", "lang:pass", "lang:fail",
        "comp:direct", "comp:unfocused", "comp:not_answered",
        "givn:no_new", "givn:answer_leak", "givn:hallucination",
        "relv:fully", "relv:partially", "relv:not_grounded",
    ]
    rows = []
    for system, row in report["rows"].items():
        rows.append([
            system,
            str(row["n"]),
            _pct(row["lang"]["pass"]), _pct(row["lang"]["fail"]),
            _pct(row["comp"]["direct"]), _pct(row["comp"]["unfocused"]), _pct(row["comp"]["not_answered"]),
            _pct(row["givn"]["no_new"]), _pct(row["givn"]["answer_leak"]), _pct(row["givn"]["hallucination"]),
            _pct(row["relv"]["fully"]), _pct(row["relv"]["partially"]), _pct(row["relv"]["not_grounded"]),
        ])
    return _table(headers, rows)


def render_dupstats(report: dict) -> str:
    headers = ["system", "n", "duplicates", "duplicate_pct", "avg_token_length"]
    rows = [
        [system, str(row["n"]), str(row["duplicates"]), f"{row['duplicate_pct']:.1f}", f"{row['avg_token_length']:.2f}"]
        for system, row in report["rows"].items()
    ]
    return _table(headers, rows)


def render_agreement(report: dict) -> str:
    headers = ["criterion", "alpha", "level", "unanimity", "pairwise_f1", "items"]
    rows = []
    body = report["report"]
    for criterion in ("lang", "comp", "givn", "relv"):
        rows.append([
            criterion,
            f"{body['alpha'][criterion]:.3f}",
            body["alpha_level"][criterion],
            f"{body['unanimity'][criterion]:.3f}",
            f"{body['pairwise_f1'][criterion]:.3f}",
            str(body["items"][criterion]),
        ])
    return _table(headers, rows)


def render_assessment(report: dict) -> str:
    labels = report["label_order"]
    headers = ["metric", "criterion"] + [f"f1:{l}" for l in labels] + ["macro_f1", "n"]
    rows = []
    for entry in report["rows"]:
        rows.append(
            [entry["metric"], entry["criterion"]]
            + [f"{entry['per_class_f1'][l]:.3f}" for l in labels]
            + [f"{entry['macro_f1']:.3f}", str(entry["n"])]
        )
    return _table(headers, rows)


def render_correlation(report: dict) -> str:
    headers = ["metric", "spearman_rho", "pairs"]
    rows = [
        [metric, f"{row['rho']:.3f}", str(row["n"])]
        for metric, row in report["rows"].items()
    ]
    return _table(headers, rows)


def render_significance(report: dict) -> str:
    headers = ["criterion", "system_a", "system_b", "statistic", "df", "p"]
    rows = [
        [
            row["criterion"], row["system_a"], row["system_b"],
            f"{row['statistic']:.2f}", str(row["df"]), row["p_bracket"],
        ]
        for row in report["rows"]
    ]
    return _table(headers, rows)
