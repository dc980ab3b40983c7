"""SVG rendering of instances and plans: depot, zone-colored order nodes,
window annotations, one polyline per route."""

from __future__ import annotations

import math

from .model import Instance, Plan

ROUTE_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                "#ff7f0e", "#8c564b", "#e377c2", "#17becf")
ZONE_COLORS = {1: "#c9a26a", 2: "#9fd49b", 3: "#8fb8de"}
ZONE_FALLBACK = "#cfcfcf"


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def render_svg(instance: Instance, plan: Plan) -> bytes:
    """Deterministic SVG 1.1 picture of the instance and its routes."""
    if instance.coords is None:
        raise ValueError("instance has no coordinates to render")
    coords = instance.coords
    xs = [c[0] for c in coords]
    ys = [c[1] for c in coords]
    pad = 14.0
    min_x, max_x = min(xs) - pad, max(xs) + pad
    min_y, max_y = min(ys) - pad, max(ys) + pad

    def at(node: int) -> tuple[float, float]:
        x, y = coords[node]
        return x, max_y + min_y - y  # flip so north is up

    node_of = {o.id: o.node for o in instance.orders}
    width = max_x - min_x
    height = max_y - min_y
    out = [
        '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'viewBox="{_fmt(min_x)} {_fmt(min_y)} {_fmt(width)} {_fmt(height)}" '
        'width="720" height="720">',
        f'<rect x="{_fmt(min_x)}" y="{_fmt(min_y)}" width="{_fmt(width)}" '
        f'height="{_fmt(height)}" fill="#ffffff"/>',
        f'<title>{instance.name}</title>',
    ]

    for idx, route in enumerate(plan.routes):
        color = ROUTE_COLORS[idx % len(ROUTE_COLORS)]
        pts = [at(0)] + [at(node_of[oid]) for oid in route.sequence] + [at(0)]
        points = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in pts)
        out.append(f'<polyline points="{points}" fill="none" stroke="{color}" '
                   'stroke-width="1.2" stroke-opacity="0.85"/>')

    unserved = set(plan.unserved)
    for order in instance.orders:
        x, y = at(order.node)
        fill = ZONE_COLORS.get(order.ot, ZONE_FALLBACK)
        stroke = "#555555" if order.id not in unserved else "#cc0000"
        out.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="3.2" '
                   f'fill="{fill}" stroke="{stroke}" stroke-width="0.8"/>')
        out.append(f'<text x="{_fmt(x + 4)}" y="{_fmt(y - 2)}" '
                   f'font-size="4.5" fill="#333333">{order.id}</text>')
        if order.lt > 0 or math.isfinite(order.ut):
            ut = "inf" if math.isinf(order.ut) else f"{order.ut:g}"
            out.append(f'<text x="{_fmt(x + 4)}" y="{_fmt(y + 4)}" '
                       f'font-size="3.5" fill="#777777">[{order.lt:g},{ut}]</text>')

    dx, dy = at(0)
    out.append(f'<rect x="{_fmt(dx - 3.5)}" y="{_fmt(dy - 3.5)}" width="7.00" height="7.00" '
               'fill="#b22222" stroke="#000000" stroke-width="0.8"/>')
    out.append(f'<text x="{_fmt(dx + 5)}" y="{_fmt(dy + 1)}" font-size="5" '
               'fill="#000000">depot</text>')
    out.append("</svg>")
    return ("\n".join(out) + "\n").encode("utf-8")
