"""Profile emitters: CSV rows and a step-plot SVG."""
from __future__ import annotations

import math
from typing import Sequence
from xml.sax.saxutils import escape

from .riskengine import RiskProfile

WIDTH, HEIGHT = 800, 400
LEFT, RIGHT, TOP, BOTTOM = 60, 20, 30, 50
COLORS = ("#000000", "#1f4fd1", "#c0392b", "#138a36", "#8e44ad", "#d68910")


def profile_csv(profile: RiskProfile) -> str:
    lines = ["tick,risk"]
    lines += [f"{t},{r:.6f}" for t, r in profile.samples]
    return "\n".join(lines) + "\n"


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def render_profile_svg(
    profiles: Sequence[RiskProfile], labels: Sequence[str] | None = None, title: str = "Risk profiles"
) -> str:
    """Step plot of each profile with a dashed line at its average risk.

    Sample ``t`` is drawn as a flat segment over ``[t-1, t]`` so the shaded
    area under each curve equals the rectangle-sum total risk.
    """
    if not profiles:
        raise ValueError("at least one profile is required")
    if labels is None:
        labels = [f"profile {i + 1}" for i in range(len(profiles))]
    if len(labels) != len(profiles):
        raise ValueError("one label per profile is required")

    x_max = max(max(len(p), 1) for p in profiles)
    y_max = max(1, math.ceil(max(p.max_risk for p in profiles)))
    plot_w = WIDTH - LEFT - RIGHT
    plot_h = HEIGHT - TOP - BOTTOM

    def sx(t: float) -> str:
        return _fmt(LEFT + plot_w * t / x_max)

    def sy(r: float) -> str:
        return _fmt(TOP + plot_h * (1 - r / y_max))

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
        f'<text x="{WIDTH // 2}" y="18" text-anchor="middle" font-family="sans-serif" font-size="14">{escape(title)}</text>',
        '<g id="axes" stroke="#444444" stroke-width="1">',
        f'<line x1="{sx(0)}" y1="{sy(0)}" x2="{sx(x_max)}" y2="{sy(0)}"/>',
        f'<line x1="{sx(0)}" y1="{sy(y_max)}" x2="{sx(0)}" y2="{sy(0)}"/>',
        "</g>",
        '<g id="ticks" font-family="sans-serif" font-size="11" fill="#444444">',
    ]
    x_step = max(1, math.ceil(x_max / 20))
    for t in range(0, x_max + 1, x_step):
        out.append(f'<line x1="{sx(t)}" y1="{sy(0)}" x2="{sx(t)}" y2="{_fmt(float(sy(0)) + 4)}" stroke="#444444"/>')
        out.append(f'<text x="{sx(t)}" y="{_fmt(float(sy(0)) + 16)}" text-anchor="middle">{t}</text>')
    y_step = max(1, math.ceil(y_max / 10))
    for r in range(0, y_max + 1, y_step):
        out.append(f'<line x1="{LEFT - 4}" y1="{sy(r)}" x2="{LEFT}" y2="{sy(r)}" stroke="#444444"/>')
        out.append(f'<text x="{LEFT - 8}" y="{_fmt(float(sy(r)) + 4)}" text-anchor="end">{r}</text>')
    out.append(f'<text x="{_fmt(LEFT + plot_w / 2)}" y="{HEIGHT - 12}" text-anchor="middle">time (ticks)</text>')
    out.append("</g>")

    for i, (profile, label) in enumerate(zip(profiles, labels)):
        color = COLORS[i % len(COLORS)]
        points = []
        for t, r in profile.samples:
            points.append(f"{sx(t - 1)},{sy(r)}")
            points.append(f"{sx(t)},{sy(r)}")
        if not points:
            points = [f"{sx(0)},{sy(0)}", f"{sx(x_max)},{sy(0)}"]
        phi = len(profile)
        avg = math.fsum(profile.values) / phi if phi else 0.0
        out.append(f'<g id="profile-{i + 1}" fill="none" stroke="{color}">')
        out.append(f'<polyline stroke-width="2" points="{" ".join(points)}"/>')
        out.append(
            f'<line class="average" x1="{sx(0)}" y1="{sy(avg)}" x2="{sx(max(phi, 1))}" y2="{sy(avg)}" '
            f'stroke-width="1" stroke-dasharray="6,4"/>'
        )
        out.append("</g>")
        out.append(
            f'<text x="{WIDTH - RIGHT - 4}" y="{TOP + 14 * (i + 1)}" text-anchor="end" font-family="sans-serif" '
            f'font-size="11" fill="{color}">{escape(label)} (avg {avg:.3f})</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
