"""Rendering of benchmark results: CSV tables and small SVG charts.

Everything here is a pure function from result records to text, with all
numbers formatted through fixed format strings, so rendering the same results
twice yields byte-identical artifacts.  The charts are deliberately plain:
a bar chart of mean C-index with standard-error whiskers, and a line chart
of period-stratified improvement.
"""

from __future__ import annotations

import csv
import io

from .errors import ValidationError

SVG_W, SVG_H = 640, 400


def comparison_csv(rows: list) -> str:
    """Tabulate per-model scores; one line per model, folds spelled out."""
    if not rows:
        raise ValidationError("no rows to tabulate")
    k = len(rows[0]["scores"])
    header = ["label", "model", "mean_c_index", "stderr"] + [
        f"fold_{i + 1}" for i in range(k)
    ]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        if len(row["scores"]) != k:
            raise ValidationError("rows disagree on fold count")
        writer.writerow(
            [row["label"], row["model"], f"{row['mean']:.6f}", f"{row['stderr']:.6f}"]
            + ["" if s is None else f"{s:.6f}" for s in row["scores"]]
        )
    return buf.getvalue()


def period_csv(report: dict) -> str:
    """Tabulate a period-stratified improvement report (dict form)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["threshold", "n_records", "mean_diff", "stderr"])
    for tau, n, mean, se in zip(
        report["thresholds"], report["n_records"], report["means"], report["stderrs"]
    ):
        writer.writerow([f"{tau:.6f}", n, f"{mean:.6f}", f"{se:.6f}"])
    return buf.getvalue()


def _axis(lo: float, hi: float):
    """Padded range plus five tick values."""
    if hi <= lo:
        hi = lo + 1.0
    pad = 0.08 * (hi - lo)
    lo, hi = lo - pad, hi + pad
    ticks = [lo + i * (hi - lo) / 4 for i in range(5)]
    return lo, hi, ticks


def _svg_open(title: str) -> list:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_W}" height="{SVG_H}" '
        f'viewBox="0 0 {SVG_W} {SVG_H}" font-family="sans-serif">',
        f'<rect width="{SVG_W}" height="{SVG_H}" fill="white"/>',
        f'<text x="{SVG_W / 2:.1f}" y="24" font-size="16" text-anchor="middle">{title}</text>',
    ]


def render_bar_chart(rows: list, title: str = "C-index by model") -> str:
    """Bar chart of mean C-index per model with stderr whiskers."""
    if not rows:
        raise ValidationError("no rows to chart")
    left, right, top, bottom = 70, 20, 40, 80
    plot_w = SVG_W - left - right
    plot_h = SVG_H - top - bottom
    lo = min(r["mean"] - r["stderr"] for r in rows)
    hi = max(r["mean"] + r["stderr"] for r in rows)
    lo, hi, ticks = _axis(min(lo, 0.5), hi)

    def y(v):
        return top + plot_h * (hi - v) / (hi - lo)

    parts = _svg_open(title)
    for t in ticks:
        parts.append(
            f'<line x1="{left}" y1="{y(t):.2f}" x2="{SVG_W - right}" y2="{y(t):.2f}" '
            f'stroke="#dddddd" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{left - 8}" y="{y(t) + 4:.2f}" font-size="11" '
            f'text-anchor="end">{t:.2f}</text>'
        )
    slot = plot_w / len(rows)
    bar_w = slot * 0.6
    for i, row in enumerate(rows):
        cx = left + slot * (i + 0.5)
        x0 = cx - bar_w / 2
        parts.append(
            f'<rect x="{x0:.2f}" y="{y(row["mean"]):.2f}" width="{bar_w:.2f}" '
            f'height="{y(lo) - y(row["mean"]):.2f}" fill="#4878a8"/>'
        )
        se = row["stderr"]
        if se > 0:
            y_hi, y_lo = y(row["mean"] + se), y(row["mean"] - se)
            parts.append(
                f'<line x1="{cx:.2f}" y1="{y_hi:.2f}" x2="{cx:.2f}" y2="{y_lo:.2f}" '
                f'stroke="black" stroke-width="1.5"/>'
            )
            for yy in (y_hi, y_lo):
                parts.append(
                    f'<line x1="{cx - 6:.2f}" y1="{yy:.2f}" x2="{cx + 6:.2f}" y2="{yy:.2f}" '
                    f'stroke="black" stroke-width="1.5"/>'
                )
        parts.append(
            f'<text x="{cx:.2f}" y="{y(row["mean"]) - 6:.2f}" font-size="11" '
            f'text-anchor="middle">{row["mean"]:.4f}</text>'
        )
        parts.append(
            f'<text x="{cx:.2f}" y="{top + plot_h + 16}" font-size="11" '
            f'text-anchor="middle" transform="rotate(-25 {cx:.2f} {top + plot_h + 16})">'
            f'{row["label"]}</text>'
        )
    parts.append(
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + plot_h}" stroke="black"/>'
    )
    parts.append(
        f'<line x1="{left}" y1="{top + plot_h}" x2="{SVG_W - right}" '
        f'y2="{top + plot_h}" stroke="black"/>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_period_chart(report: dict, title: str = "Improvement by observation period") -> str:
    """Line chart of mean C-index difference against period threshold."""
    thresholds = report["thresholds"]
    means = report["means"]
    stderrs = report["stderrs"]
    if not thresholds:
        raise ValidationError("report has no period buckets to chart")
    left, right, top, bottom = 70, 20, 40, 60
    plot_w = SVG_W - left - right
    plot_h = SVG_H - top - bottom
    lo = min(m - s for m, s in zip(means, stderrs))
    hi = max(m + s for m, s in zip(means, stderrs))
    lo, hi, ticks = _axis(min(lo, 0.0), max(hi, 0.0))
    x_lo, x_hi = min(thresholds), max(thresholds)
    span = (x_hi - x_lo) or 1.0

    def x(v):
        return left + plot_w * (v - x_lo) / span

    def y(v):
        return top + plot_h * (hi - v) / (hi - lo)

    parts = _svg_open(title)
    for t in ticks:
        parts.append(
            f'<line x1="{left}" y1="{y(t):.2f}" x2="{SVG_W - right}" y2="{y(t):.2f}" '
            f'stroke="#dddddd" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{left - 8}" y="{y(t) + 4:.2f}" font-size="11" '
            f'text-anchor="end">{t:.3f}</text>'
        )
    parts.append(
        f'<line x1="{left}" y1="{y(0):.2f}" x2="{SVG_W - right}" y2="{y(0):.2f}" '
        f'stroke="#888888" stroke-width="1" stroke-dasharray="4 3"/>'
    )
    points = " ".join(f"{x(t):.2f},{y(m):.2f}" for t, m in zip(thresholds, means))
    parts.append(
        f'<polyline points="{points}" fill="none" stroke="#b04030" stroke-width="2"/>'
    )
    for t, m, s in zip(thresholds, means, stderrs):
        if s > 0:
            parts.append(
                f'<line x1="{x(t):.2f}" y1="{y(m + s):.2f}" x2="{x(t):.2f}" '
                f'y2="{y(m - s):.2f}" stroke="#b04030" stroke-width="1"/>'
            )
        parts.append(
            f'<circle cx="{x(t):.2f}" cy="{y(m):.2f}" r="3.5" fill="#b04030"/>'
        )
        parts.append(
            f'<text x="{x(t):.2f}" y="{top + plot_h + 16}" font-size="11" '
            f'text-anchor="middle">{t:g}</text>'
        )
    parts.append(
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + plot_h}" stroke="black"/>'
    )
    parts.append(
        f'<line x1="{left}" y1="{top + plot_h}" x2="{SVG_W - right}" '
        f'y2="{top + plot_h}" stroke="black"/>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
