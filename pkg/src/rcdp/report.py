"""Plot and summary emission for campaign result directories.

Reads ``replications.csv`` / ``summary.csv`` (as written by the experiment
runner) and produces deterministic artifacts: three SVG charts and a
markdown mirror of the summary table. SVGs are assembled by hand — the
charts are verification aids, so layout is kept plain and every number
annotated in text form for cross-checking against the CSVs.
"""

from __future__ import annotations

import csv
import math
import os

import numpy as np

__all__ = ["ReportError", "load_results", "write_report"]


class ReportError(Exception):
    """Raised for missing files or columns in a results directory."""


_REPLICATION_REQUIRED = ("scenario", "replication", "policy", "cost",
                         "weight_used", "n_disamb", "success",
                         "benchmark_cost")
_SUMMARY_REQUIRED = ("scenario", "policy", "n_reps", "mean_cost", "sd_cost",
                     "rms_vs_benchmark", "p25", "p75", "relative_efficiency",
                     "satisfaction_rate")


def _read_csv(path, required):
    if not os.path.exists(path):
        raise ReportError(f"missing results file: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ReportError(f"empty results file: {path}") from None
        for col in required:
            if col not in header:
                raise ReportError(
                    f"column {col!r} missing from {os.path.basename(path)} "
                    f"(found: {', '.join(header)})")
        idx = {c: header.index(c) for c in header}
        rows = [{c: row[i] for c, i in idx.items()} for row in reader]
    return rows


def load_results(results_dir):
    """Load and type the two result tables, raising ReportError on gaps."""
    reps = _read_csv(os.path.join(results_dir, "replications.csv"),
                     _REPLICATION_REQUIRED)
    summ = _read_csv(os.path.join(results_dir, "summary.csv"),
                     _SUMMARY_REQUIRED)
    for r in reps:
        for col in ("cost", "weight_used", "benchmark_cost"):
            r[col] = float(r[col])
        r["n_disamb"] = int(float(r["n_disamb"]))
        r["success"] = r["success"] in ("1", "True", "true")
    for s in summ:
        for col in ("mean_cost", "sd_cost", "rms_vs_benchmark", "p25", "p75",
                    "relative_efficiency", "satisfaction_rate"):
            s[col] = float(s[col])
        s["n_reps"] = int(s["n_reps"])
    return reps, summ


# ---------------------------------------------------------------------------
# SVG assembly
# ---------------------------------------------------------------------------


class _Canvas:
    """Minimal SVG string builder with a fixed margin/plot-area layout."""

    MARGIN_LEFT = 70.0
    MARGIN_RIGHT = 20.0
    MARGIN_TOP = 40.0
    MARGIN_BOTTOM = 90.0

    def __init__(self, width, height, title):
        self.width = width
        self.height = height
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:g}" '
            f'height="{height:g}" viewBox="0 0 {width:g} {height:g}">',
            f'<rect x="0" y="0" width="{width:g}" height="{height:g}" '
            f'fill="white"/>',
        ]
        self.text(width / 2.0, 20.0, title, size=14, anchor="middle")

    @property
    def plot_w(self):
        return self.width - self.MARGIN_LEFT - self.MARGIN_RIGHT

    @property
    def plot_h(self):
        return self.height - self.MARGIN_TOP - self.MARGIN_BOTTOM

    def line(self, x1, y1, x2, y2, color="#444", width=1.0):
        self.parts.append(
            f'<line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" '
            f'y2="{y2:.2f}" stroke="{color}" stroke-width="{width:g}"/>')

    def rect(self, x, y, w, h, fill, stroke="#333"):
        self.parts.append(
            f'<rect x="{x:.2f}" y="{y:.2f}" width="{w:.2f}" '
            f'height="{h:.2f}" fill="{fill}" stroke="{stroke}"/>')

    def circle(self, x, y, r, fill):
        self.parts.append(
            f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{r:g}" fill="{fill}"/>')

    def text(self, x, y, s, size=10, anchor="start", rotate=None,
             color="#111"):
        transform = (f' transform="rotate({rotate:g} {x:.2f} {y:.2f})"'
                     if rotate is not None else "")
        self.parts.append(
            f'<text x="{x:.2f}" y="{y:.2f}" font-size="{size:g}" '
            f'font-family="monospace" fill="{color}" '
            f'text-anchor="{anchor}"{transform}>{_esc(s)}</text>')

    def save(self, path):
        self.parts.append("</svg>")
        with open(path, "w") as fh:
            fh.write("\n".join(self.parts) + "\n")


def _esc(s):
    return (str(s).replace("&", "&amp;").replace("<", "&lt;")
            .replace(">", "&gt;"))


_PALETTE = ("#4878d0", "#ee854a", "#6acc64", "#d65f5f", "#956cb4",
            "#8c613c", "#dc7ec0", "#797979", "#d5bb67", "#82c6e2")


def _ordered(values):
    out = []
    for v in values:
        if v not in out:
            out.append(v)
    return out


def _y_scale(canvas, lo, hi):
    if hi <= lo:
        hi = lo + 1.0
    pad = 0.05 * (hi - lo)
    lo -= pad
    hi += pad

    def to_y(v):
        frac = (v - lo) / (hi - lo)
        return canvas.MARGIN_TOP + (1.0 - frac) * canvas.plot_h

    return lo, hi, to_y


def _draw_axes(canvas, lo, hi, to_y, ylabel):
    left = canvas.MARGIN_LEFT
    bottom = canvas.MARGIN_TOP + canvas.plot_h
    canvas.line(left, canvas.MARGIN_TOP, left, bottom)
    canvas.line(left, bottom, left + canvas.plot_w, bottom)
    for k in range(5):
        v = lo + (hi - lo) * k / 4.0
        y = to_y(v)
        canvas.line(left - 4, y, left, y)
        canvas.text(left - 8, y + 3, f"{v:.1f}", anchor="end", size=9)
    canvas.text(16.0, canvas.MARGIN_TOP + canvas.plot_h / 2.0, ylabel,
                size=11, anchor="middle", rotate=-90.0)


def _legend(canvas, policies):
    x = canvas.MARGIN_LEFT
    y = canvas.height - 14.0
    for i, pol in enumerate(policies):
        color = _PALETTE[i % len(_PALETTE)]
        canvas.rect(x, y - 8, 9, 9, fill=color)
        canvas.text(x + 13, y, pol, size=9)
        x += 13 + 7.0 * len(pol) + 18


def _group_positions(canvas, scenarios, policies):
    """x position per (scenario, policy), scenarios as labelled groups."""
    n_s, n_p = len(scenarios), len(policies)
    group_w = canvas.plot_w / max(n_s, 1)
    step = group_w / (n_p + 1)
    pos = {}
    bottom = canvas.MARGIN_TOP + canvas.plot_h
    for i, scen in enumerate(scenarios):
        x0 = canvas.MARGIN_LEFT + i * group_w
        for j, pol in enumerate(policies):
            pos[(scen, pol)] = x0 + (j + 1) * step
        canvas.text(x0 + group_w / 2.0, bottom + 16.0, scen, size=9,
                    anchor="end", rotate=-45.0)
    return pos


def render_mean_costs(summary, path):
    """Mean realized cost per scenario/policy with 95% CI whiskers; the
    half-width (1.96*sd/sqrt(reps)) is annotated next to each marker."""
    scenarios = _ordered(s["scenario"] for s in summary)
    policies = _ordered(s["policy"] for s in summary)
    canvas = _Canvas(max(640, 170 * len(scenarios)), 420,
                     "mean traversal cost (95% CI)")
    halves = {}
    los, his = [], []
    for s in summary:
        half = (1.96 * s["sd_cost"] / math.sqrt(s["n_reps"])
                if s["n_reps"] > 0 else 0.0)
        halves[(s["scenario"], s["policy"])] = half
        los.append(s["mean_cost"] - half)
        his.append(s["mean_cost"] + half)
    lo, hi, to_y = _y_scale(canvas, min(los), max(his))
    _draw_axes(canvas, lo, hi, to_y, "cost")
    pos = _group_positions(canvas, scenarios, policies)
    for s in summary:
        key = (s["scenario"], s["policy"])
        x = pos[key]
        half = halves[key]
        color = _PALETTE[policies.index(s["policy"]) % len(_PALETTE)]
        canvas.line(x, to_y(s["mean_cost"] - half),
                    x, to_y(s["mean_cost"] + half), color=color, width=1.5)
        canvas.circle(x, to_y(s["mean_cost"]), 3.0, fill=color)
        canvas.text(x + 4, to_y(s["mean_cost"]) - 4,
                    f"{s['mean_cost']:.2f}±{half:.2f}", size=7)
    _legend(canvas, policies)
    canvas.save(path)


def render_error_bars(summary, path):
    """Root-mean-square deviation from the paired benchmark, as bars."""
    scenarios = _ordered(s["scenario"] for s in summary)
    policies = _ordered(s["policy"] for s in summary)
    canvas = _Canvas(max(640, 170 * len(scenarios)), 420,
                     "RMS deviation from benchmark")
    values = [s["rms_vs_benchmark"] for s in summary]
    lo, hi, to_y = _y_scale(canvas, 0.0, max(values) if values else 1.0)
    _draw_axes(canvas, lo, hi, to_y, "rms error")
    pos = _group_positions(canvas, scenarios, policies)
    bottom = to_y(0.0)
    n_p = len(policies)
    bar_w = max(4.0, canvas.plot_w / max(len(scenarios), 1) / (n_p + 1) - 4)
    for s in summary:
        x = pos[(s["scenario"], s["policy"])]
        color = _PALETTE[policies.index(s["policy"]) % len(_PALETTE)]
        y = to_y(s["rms_vs_benchmark"])
        canvas.rect(x - bar_w / 2.0, y, bar_w, bottom - y, fill=color)
        canvas.text(x, y - 3, f"{s['rms_vs_benchmark']:.2f}", size=7,
                    anchor="middle")
    _legend(canvas, policies)
    canvas.save(path)


def render_cost_boxes(replications, summary, path):
    """Per scenario/policy cost spread: box edges are the summary table's
    25th/75th percentiles (so the chart can be audited against the CSV),
    whiskers the replication extremes, the center line the median."""
    scenarios = _ordered(s["scenario"] for s in summary)
    policies = _ordered(s["policy"] for s in summary)
    canvas = _Canvas(max(640, 170 * len(scenarios)), 420,
                     "cost quartiles and relative efficiency")
    samples = {}
    for r in replications:
        samples.setdefault((r["scenario"], r["policy"]), []).append(r["cost"])
    all_costs = [c for v in samples.values() for c in v]
    lo, hi, to_y = _y_scale(canvas, min(all_costs), max(all_costs))
    _draw_axes(canvas, lo, hi, to_y, "cost")
    pos = _group_positions(canvas, scenarios, policies)
    n_p = len(policies)
    box_w = max(6.0, canvas.plot_w / max(len(scenarios), 1) / (n_p + 1) - 4)
    for s in summary:
        key = (s["scenario"], s["policy"])
        if key not in samples:
            continue
        x = pos[key]
        color = _PALETTE[policies.index(s["policy"]) % len(_PALETTE)]
        vals = np.array(samples[key])
        med = float(np.percentile(vals, 50, method="linear"))
        y25, y75 = to_y(s["p25"]), to_y(s["p75"])
        canvas.line(x, to_y(float(vals.min())), x, to_y(float(vals.max())),
                    color="#777")
        canvas.rect(x - box_w / 2.0, y75, box_w, max(y25 - y75, 0.5),
                    fill="none", stroke=color)
        canvas.line(x - box_w / 2.0, to_y(med), x + box_w / 2.0, to_y(med),
                    color=color, width=1.5)
        canvas.text(x, y75 - 3, f"eff={s['relative_efficiency']:.3f}",
                    size=7, anchor="middle")
    _legend(canvas, policies)
    canvas.save(path)


def render_markdown(summary, path):
    """summary.csv mirrored as a GFM table."""
    cols = ("scenario", "policy", "n_reps", "mean_cost", "sd_cost",
            "rms_vs_benchmark", "p25", "p75", "relative_efficiency",
            "satisfaction_rate")
    lines = ["# Campaign summary", ""]
    lines.append("| " + " | ".join(cols) + " |")
    lines.append("|" + "|".join("---" for _ in cols) + "|")
    for s in summary:
        cells = []
        for c in cols:
            v = s[c]
            cells.append(f"{v:.4f}" if isinstance(v, float) else str(v))
        lines.append("| " + " | ".join(cells) + " |")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_report(results_dir, out_dir=None):
    """Emit all report artifacts for one results directory; returns the
    mapping of artifact name to written path."""
    out_dir = results_dir if out_dir is None else out_dir
    os.makedirs(out_dir, exist_ok=True)
    replications, summary = load_results(results_dir)
    if not summary:
        raise ReportError(f"no summary rows in {results_dir}")
    paths = {
        "mean_costs": os.path.join(out_dir, "mean_costs.svg"),
        "error_bars": os.path.join(out_dir, "error_bars.svg"),
        "cost_boxes": os.path.join(out_dir, "cost_boxes.svg"),
        "summary_md": os.path.join(out_dir, "summary.md"),
    }
    render_mean_costs(summary, paths["mean_costs"])
    render_error_bars(summary, paths["error_bars"])
    render_cost_boxes(replications, summary, paths["cost_boxes"])
    render_markdown(summary, paths["summary_md"])
    return paths
