"""Curve sampling with CSV and self-contained SVG output (no plotting
library). The SVG overlays the bonding curve and each allocative curve, with
a dashed guide at every asymptote ``a + (1 - tau)/tau``."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from html import escape

from .curves import AllocativeParams, LinearBondingCurve, allocative_sup, price_allocative
from .errors import InvalidParams
from .numeric import NEAREST, Dec, div_round

COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
WIDTH, HEIGHT, MARGIN = 640, 420, 56


@dataclass(frozen=True)
class PlotSpec:
    k: Dec
    S: Dec
    samples: int = 201
    a: Dec | None = None
    taus: tuple[Dec, ...] = ()

    def __post_init__(self) -> None:
        if self.S.raw <= 0:
            raise InvalidParams("S must be positive")
        if self.samples < 2:
            raise InvalidParams("samples must be at least 2")
        if self.taus and self.a is None:
            raise InvalidParams("allocative curves need an assessment a")
        LinearBondingCurve(self.k)
        for tau in self.taus:
            AllocativeParams(self.a, tau)


@dataclass(frozen=True)
class Samples:
    s: list[Dec]
    p: list[Dec]
    q: dict[Dec, list[Dec]]
    sup: dict[Dec, Dec]


def sample(spec: PlotSpec) -> Samples:
    curve = LinearBondingCurve(spec.k)
    n = spec.samples - 1
    s = [Dec(div_round(spec.S.raw * i, n, NEAREST)) for i in range(spec.samples)]
    p = [curve(x) for x in s]
    q, sup = {}, {}
    for tau in spec.taus:
        params = AllocativeParams(spec.a, tau)
        q[tau] = [price_allocative(curve, params, x) for x in s]
        sup[tau] = allocative_sup(params)
    return Samples(s, p, q, sup)


def to_csv(samples: Samples) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    taus = list(samples.q)
    writer.writerow(["s", "p"] + [f"q_tau={tau}" for tau in taus])
    for i, s in enumerate(samples.s):
        writer.writerow([str(s), str(samples.p[i])] + [str(samples.q[t][i]) for t in taus])
    return buf.getvalue()


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def to_svg(samples: Samples, title: str = "") -> str:
    x_max = float(samples.s[-1])
    ys = [float(v) for v in samples.p]
    for tau, values in samples.q.items():
        ys += [float(v) for v in values] + [float(samples.sup[tau])]
    y_max = max(ys) * 1.05 or 1.0
    plot_w, plot_h = WIDTH - 2 * MARGIN, HEIGHT - 2 * MARGIN

    def px(x: float) -> float:
        return MARGIN + plot_w * x / x_max

    def py(y: float) -> float:
        return HEIGHT - MARGIN - plot_h * y / y_max

    def polyline(values: list[Dec], color: str, dash: str = "") -> str:
        pts = " ".join(f"{_fmt(px(float(s)))},{_fmt(py(float(v)))}" for s, v in zip(samples.s, values))
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        return f'<polyline fill="none" stroke="{color}" stroke-width="2"{extra} points="{pts}"/>'

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<text x="{WIDTH / 2}" y="{HEIGHT - 16}" text-anchor="middle">supply s (0 to {_fmt(x_max)})</text>',
        f'<text x="16" y="{HEIGHT / 2}" transform="rotate(-90 16 {HEIGHT / 2})" '
        f'text-anchor="middle">price (0 to {_fmt(y_max)})</text>',
    ]
    if title:
        out.append(f'<text x="{WIDTH / 2}" y="24" text-anchor="middle" font-size="14">{escape(title)}</text>')
    out.append(polyline(samples.p, "black"))
    legend = [("p(s)", "black")]
    for i, (tau, values) in enumerate(samples.q.items()):
        color = COLORS[i % len(COLORS)]
        y = _fmt(py(float(samples.sup[tau])))
        out.append(f'<line x1="{MARGIN}" y1="{y}" x2="{WIDTH - MARGIN}" y2="{y}" stroke="{color}" '
                   f'stroke-width="1" stroke-dasharray="6 4"/>')
        out.append(polyline(values, color))
        legend.append((f"q, tau={tau.compact()}", color))
    for i, (label, color) in enumerate(legend):
        y = MARGIN + 16 * i
        out.append(f'<line x1="{MARGIN + 10}" y1="{y}" x2="{MARGIN + 30}" y2="{y}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{MARGIN + 36}" y="{y + 4}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
