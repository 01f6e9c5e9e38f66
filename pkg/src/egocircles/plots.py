"""Dependency-free SVG charts built from the pipeline's CSV tables.

Every number written into an SVG is rounded to 6 significant digits so the
files diff cleanly.
"""

from __future__ import annotations

import csv
import math
from html import escape
from pathlib import Path
from typing import Optional, Sequence

W, H = 640, 400
PAD_L, PAD_R, PAD_T, PAD_B = 70, 20, 40, 50
PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f")


def num(x: float) -> str:
    return f"{float(x):.6g}"


def _doc(title: str, body: list[str]) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
            f'viewBox="0 0 {W} {H}">')
    parts = [head, f'<rect width="{W}" height="{H}" fill="white"/>',
             f'<text x="{W / 2}" y="22" text-anchor="middle" font-size="15">{escape(title)}</text>',
             *body, "</svg>"]
    return "\n".join(parts) + "\n"


def placeholder(title: str, notice: str = "no data") -> str:
    return _doc(title, [f'<text x="{W / 2}" y="{H / 2}" text-anchor="middle" font-size="13" '
                        f'fill="#888">{escape(notice)}</text>'])


class _Axes:
    def __init__(self, xlo, xhi, ylo, yhi):
        if xhi <= xlo:
            xlo, xhi = xlo - 0.5, xhi + 0.5
        if yhi <= ylo:
            ylo, yhi = ylo - 0.5, yhi + 0.5
        self.xlo, self.xhi, self.ylo, self.yhi = xlo, xhi, ylo, yhi

    def x(self, v):
        return PAD_L + (v - self.xlo) / (self.xhi - self.xlo) * (W - PAD_L - PAD_R)

    def y(self, v):
        return H - PAD_B - (v - self.ylo) / (self.yhi - self.ylo) * (H - PAD_T - PAD_B)

    def frame(self, xlabel, ylabel) -> list[str]:
        x0, x1, y0, y1 = PAD_L, W - PAD_R, H - PAD_B, PAD_T
        out = [f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>',
               f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>',
               f'<text x="{(x0 + x1) / 2}" y="{H - 12}" text-anchor="middle" font-size="12">{escape(xlabel)}</text>',
               f'<text x="16" y="{(y0 + y1) / 2}" text-anchor="middle" font-size="12" '
               f'transform="rotate(-90 16 {(y0 + y1) / 2})">{escape(ylabel)}</text>']
        for v in _ticks(self.ylo, self.yhi):
            out.append(f'<text x="{x0 - 6}" y="{num(self.y(v) + 4)}" text-anchor="end" '
                       f'font-size="10">{num(v)}</text>')
        return out


def _ticks(lo, hi, n=5):
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def _span(values: Sequence[float], zero=True):
    vals = [v for v in values if v is not None and math.isfinite(v)]
    if not vals:
        return 0.0, 1.0
    lo, hi = min(vals), max(vals)
    if zero:
        lo, hi = min(lo, 0.0), max(hi, 0.0)
    return lo, hi


def bar_chart(title: str, labels: Sequence[str], values: Sequence[float],
              errors: Optional[Sequence[Optional[float]]] = None, ylabel: str = "") -> str:
    if not values:
        return placeholder(title)
    errors = errors or [None] * len(values)
    tops = [v + (e or 0) for v, e in zip(values, errors)]
    ax = _Axes(0, len(values), *_span(list(values) + tops))
    body = ax.frame("", ylabel)
    slot = (W - PAD_L - PAD_R) / len(values)
    for i, (lab, v, e) in enumerate(zip(labels, values, errors)):
        x = PAD_L + i * slot + slot * 0.15
        y0, y1 = ax.y(0), ax.y(v)
        body.append(f'<rect x="{num(x)}" y="{num(min(y0, y1))}" width="{num(slot * 0.7)}" '
                    f'height="{num(abs(y0 - y1))}" fill="{PALETTE[0]}"/>')
        cx = x + slot * 0.35
        if e:
            body.append(f'<line x1="{num(cx)}" y1="{num(ax.y(v - e))}" x2="{num(cx)}" '
                        f'y2="{num(ax.y(v + e))}" stroke="black"/>')
        body.append(f'<text x="{num(cx)}" y="{H - PAD_B + 14}" text-anchor="middle" '
                    f'font-size="10">{escape(str(lab))}</text>')
    return _doc(title, body)


def line_chart(title: str, xs: Sequence[float], series: dict, xlabel: str = "", ylabel: str = "") -> str:
    """``series`` maps a name to (ys, errs or None)."""
    if not xs or not series:
        return placeholder(title)
    ys_all = []
    for ys, errs in series.values():
        errs = errs or [None] * len(ys)
        ys_all += [y + s * (e or 0) for y, e in zip(ys, errs) for s in (-1, 1)]
    ax = _Axes(min(xs), max(xs), *_span(ys_all, zero=False))
    body = ax.frame(xlabel, ylabel)
    for v in xs:
        body.append(f'<text x="{num(ax.x(v))}" y="{H - PAD_B + 14}" text-anchor="middle" '
                    f'font-size="10">{num(v)}</text>')
    for k, (name, (ys, errs)) in enumerate(series.items()):
        color = PALETTE[k % len(PALETTE)]
        pts = " ".join(f"{num(ax.x(x))},{num(ax.y(y))}" for x, y in zip(xs, ys))
        body.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="2"/>')
        for i, (x, y) in enumerate(zip(xs, ys)):
            body.append(f'<circle cx="{num(ax.x(x))}" cy="{num(ax.y(y))}" r="3" fill="{color}"/>')
            e = errs[i] if errs else None
            if e:
                body.append(f'<line x1="{num(ax.x(x))}" y1="{num(ax.y(y - e))}" x2="{num(ax.x(x))}" '
                            f'y2="{num(ax.y(y + e))}" stroke="{color}"/>')
        body.append(f'<text x="{W - PAD_R - 4}" y="{PAD_T + 14 * (k + 1)}" text-anchor="end" '
                    f'font-size="11" fill="{color}">{escape(str(name))}</text>')
    return _doc(title, body)


def scatter(title: str, points: Sequence[tuple], xlabel: str = "", ylabel: str = "",
            identity: bool = False, labels: Optional[Sequence[str]] = None,
            colors: Optional[Sequence[int]] = None) -> str:
    if not points:
        return placeholder(title)
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    if identity:
        lo, hi = _span(xs + ys, zero=False)
        ax = _Axes(lo, hi, lo, hi)
    else:
        ax = _Axes(*_span(xs, zero=False), *_span(ys, zero=False))
    body = ax.frame(xlabel, ylabel)
    if identity:
        body.append(f'<line x1="{num(ax.x(ax.xlo))}" y1="{num(ax.y(ax.xlo))}" x2="{num(ax.x(ax.xhi))}" '
                    f'y2="{num(ax.y(ax.xhi))}" stroke="#999" stroke-dasharray="4 3" class="identity"/>')
    for i, (x, y) in enumerate(points):
        color = PALETTE[(colors[i] if colors else 0) % len(PALETTE)]
        body.append(f'<circle cx="{num(ax.x(x))}" cy="{num(ax.y(y))}" r="4" fill="{color}"/>')
        if labels:
            body.append(f'<text x="{num(ax.x(x) + 6)}" y="{num(ax.y(y) - 4)}" font-size="9">'
                        f'{escape(str(labels[i]))}</text>')
    return _doc(title, body)


def tau_scatter_points(rows: Sequence[dict]) -> list[tuple[int, float, float]]:
    """(ring, journalist tau, non-journalist tau) for rings where both
    categories are reported."""
    by_ring: dict = {}
    for r in rows:
        if str(r["reported"]).lower() != "true":
            continue
        by_ring.setdefault(int(r["ring"]), {})[r["category"]] = float(r["tau"])
    return [(ring, c["journalist"], c["non-journalist"])
            for ring, c in sorted(by_ring.items()) if len(c) == 2]


# --- report -----------------------------------------------------------------

def _rows(path: Path) -> list[dict]:
    if not path.exists():
        return []
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def _f(text) -> Optional[float]:
    return float(text) if text not in ("", None) else None


def emit_plots(out) -> list[str]:
    """Render every chart the available tables support into ``out/plots``."""
    out = Path(out)
    pdir = out / "plots"
    pdir.mkdir(exist_ok=True)
    charts: dict[str, str] = {}

    summary = _rows(out / "circles_summary.csv")
    if summary:
        taus = {}
        for r in summary:
            taus[int(r["tau"])] = int(r["n_egos"])
        tau = max(taus, key=lambda t: (taus[t], -t))
        rows = [r for r in summary if int(r["tau"]) == tau]
        charts["circle_sizes.svg"] = bar_chart(
            f"Circle sizes, tau = {tau} ({taus[tau]} egos)", [r["circle"] for r in rows],
            [float(r["size_mean"]) for r in rows], [_f(r["size_ci"]) for r in rows], "alters")
    else:
        charts["circle_sizes.svg"] = placeholder("Circle sizes", "no circles extracted")

    tags = [r for r in _rows(out / "hashtags.csv") if r["ring"] != "all"]
    charts["hashtags.svg"] = bar_chart("Hashtag-activated ties per ring", [r["ring"] for r in tags],
                                       [float(r["pct_activated"]) for r in tags],
                                       [_f(r["pct_ci"]) for r in tags], "% of ties")

    dyn = _rows(out / "dynamics_summary.csv")
    steps = sorted({r["step"] for r in dyn})
    for metric in ("jaccard", "jump"):
        if not steps:
            charts[f"{metric}.svg"] = placeholder(f"{metric.title()} index per ring")
            continue
        series = {}
        for step in steps:
            rows = [r for r in dyn if r["step"] == step]
            series[f"step {step}"] = ([float(r[f"{metric}_mean"]) for r in rows],
                                      [_f(r[f"{metric}_ci"]) for r in rows])
        xs = [int(r["ring"]) for r in dyn if r["step"] == steps[0]]
        charts[f"{metric}.svg"] = line_chart(f"{metric.title()} index per ring", xs, series, "ring", metric)

    prof = [r for r in _rows(out / "type_profiles.csv") if r["pc1"]]
    charts["profiles_pca.svg"] = scatter(
        "Tweet-type profiles (PCA)", [(float(r["pc1"]), float(r["pc2"])) for r in prof], "PC1", "PC2",
        labels=[r["group"] for r in prof], colors=[int(r["cluster"]) for r in prof])

    pts = tau_scatter_points(_rows(out / "assortativity.csv"))
    charts["assortativity.svg"] = scatter(
        "Popularity correlation per ring", [(j, n) for _, j, n in pts],
        "tau, journalist alters", "tau, non-journalist alters", identity=True,
        labels=[f"R{ring}" for ring, _, _ in pts])

    stat = _rows(out / "stationarity.csv")
    charts["stationarity.svg"] = line_chart(
        "Mean-normalised weekly activity", [int(r["week"]) for r in stat],
        {"mean": ([float(r["mean_normalized"]) for r in stat], None)} if stat else {}, "week", "")

    written = []
    for name in sorted(charts):
        (pdir / name).write_text(charts[name], encoding="utf-8")
        written.append(f"plots/{name}")
    return written
