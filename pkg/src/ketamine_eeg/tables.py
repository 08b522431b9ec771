"""Aligned plain-text renderings of the study tables."""
from __future__ import annotations

import math


def _ms(m, s, digits=3):
    if m is None or (isinstance(m, float) and math.isnan(m)):
        return "-"
    return f"{m:.{digits}f} ± {s:.{digits}f}"


def _align(rows: list[list[str]]) -> str:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows)


def _p_cell(r, alpha):
    if r["status"] != "ok":
        return f"n/a ({r['status']})"
    p = r["p"]
    if p >= alpha:
        return "N"
    mark = "" if r["reject_primary"] else "a"
    if r["reject_secondary"]:
        mark += "+"
    return f"{p:.3g}{mark}"


def render_comparisons(results: list[dict], title: str, report: dict) -> str:
    alpha = report["alpha"]
    out = [title, "=" * len(title)]
    families = []
    for r in results:
        if r["family"] not in families:
            families.append(r["family"])
    for fam in families:
        rows_f = [r for r in results if r["family"] == fam]
        g1, g2 = rows_f[0]["groups"]
        n1, n2 = rows_f[0]["n1"], rows_f[0]["n2"]
        out.append("")
        out.append(f"[{fam}]")
        rows = [["feature", f"{g1} (n={n1})", f"{g2} (n={n2})", "stat", "p"]]
        for r in rows_f:
            m, s = r["mean"] or [None, None], r["sd"] or [None, None]
            stat = "-" if r["statistic"] is None else f"{r['statistic']:g}"
            rows.append([r["feature"], _ms(m[0], s[0]), _ms(m[1], s[1]), stat, _p_cell(r, alpha)])
        out.append(_align(rows))
    out.append("")
    out.append(f"N: p >= {alpha}. Unmarked p: significant after Hochberg adjustment at {alpha}. "
               f"a: p < {alpha} but not significant after adjustment. "
               f"+: significant after adjustment at {report['secondary']} as well.")
    return "\n".join(out) + "\n"


def render_prediction_grid(summary: dict) -> str:
    title = "Prediction grid: accuracy (mean ± SD, %) by classifier and EEG feature set"
    out = [title, "=" * len(title), ""]
    for panel, fsets in summary["grid"].items():
        out.append(f"[{panel}]")
        kinds = list(next(iter(fsets.values()))) if fsets else []
        rows = [["classifier"] + list(fsets)]
        for k in kinds:
            cells = []
            for fs in fsets:
                v = fsets[fs][k]
                cells.append("error" if v is None else _ms(v["accuracy"]["mean"],
                                                           v["accuracy"]["sd"], 1))
            rows.append([k] + cells)
        out.append(_align(rows))
        out.append("")
    if "best" in summary:
        b = summary["best"]
        out.append(f"Best cell: {b['kind']} on {b['feature_set']} ({b['panel']})")
        rows = [["metric", "mean ± SD", "folds used", "folds excluded"]]
        for name, v in b["metrics"].items():
            rows.append([name, _ms(v["mean"], v["sd"], 1), str(v["n"]), str(v["excluded"])])
        out.append(_align(rows))
    for e in summary.get("errors", []):
        out.append(f"error: {e['panel']} / {e['feature_set']} / {e['kind']}: {e['error']}")
    return "\n".join(out) + "\n"


def render_cohort_summary(summary: dict, timepoint: str) -> str:
    title = "Cohort summary: HDRS-17 and response by trial arm"
    rows = [["group", "n", "responders", "baseline", timepoint, "reduction (%)"]]
    for g, s in summary.items():
        red = _ms(None if s.reduction_mean is None else 100 * s.reduction_mean,
                  100 * s.reduction_sd if s.reduction_sd == s.reduction_sd else 0.0, 1)
        flag = " (n=1)" if s.single_subject else ""
        rows.append([g, f"{s.n}{flag}", f"{s.responders} ({100 * s.responders / s.n:.0f}%)",
                     _ms(s.baseline_mean, s.baseline_sd, 1), _ms(s.at_mean, s.at_sd, 1), red])
    return "\n".join([title, "=" * len(title), _align(rows)]) + "\n"
