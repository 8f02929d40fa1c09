"""2-D SVG renders: labeled points, zero contours, hull outlines.

Contours come from marching squares on a fixed 256x256 grid so that
identical inputs produce byte-identical files (golden-file friendly).
"""

from __future__ import annotations

import numpy as np

GRID = 256
_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]

# edge endpoints as corner-index pairs; corners are
# 0=(x0,y0) 1=(x1,y0) 2=(x1,y1) 3=(x0,y1)
_EDGE_CORNERS = {0: (0, 1), 1: (1, 2), 2: (2, 3), 3: (3, 0)}

_SEGMENTS = {
    0: [],
    1: [(3, 0)],
    2: [(0, 1)],
    3: [(3, 1)],
    4: [(1, 2)],
    6: [(0, 2)],
    7: [(2, 3)],
    8: [(2, 3)],
    9: [(0, 2)],
    11: [(1, 2)],
    12: [(3, 1)],
    13: [(0, 1)],
    14: [(3, 0)],
    15: [],
}


def marching_squares(values, xs, ys, level=0.0):
    """Line segments of the `level` contour of values[i, j] = f(xs[i], ys[j]).

    Saddle cells (cases 5 and 10) are split by the cell-center average.
    """
    values = np.asarray(values, dtype=float)
    nx, ny = values.shape
    segments = []
    for i in range(nx - 1):
        for j in range(ny - 1):
            c = (
                values[i, j],
                values[i + 1, j],
                values[i + 1, j + 1],
                values[i, j + 1],
            )
            pts = (
                (xs[i], ys[j]),
                (xs[i + 1], ys[j]),
                (xs[i + 1], ys[j + 1]),
                (xs[i], ys[j + 1]),
            )
            idx = sum(1 << k for k in range(4) if c[k] > level)
            if idx in (0, 15):
                continue
            if idx == 5:
                center = 0.25 * sum(c)
                pairs = [(0, 1), (2, 3)] if center > level else [(3, 0), (1, 2)]
            elif idx == 10:
                center = 0.25 * sum(c)
                pairs = [(3, 0), (1, 2)] if center > level else [(0, 1), (2, 3)]
            else:
                pairs = _SEGMENTS[idx]
            for ea, eb in pairs:
                segments.append((
                    _edge_point(ea, c, pts, level),
                    _edge_point(eb, c, pts, level),
                ))
    return segments


def _edge_point(edge, c, pts, level):
    a, b = _EDGE_CORNERS[edge]
    va, vb = c[a], c[b]
    t = 0.5 if va == vb else (level - va) / (vb - va)
    t = min(1.0, max(0.0, t))
    pa, pb = pts[a], pts[b]
    return (pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1]))


def convex_hull_2d(points):
    """Hull vertices in counterclockwise order (Andrew's monotone chain)."""
    pts = sorted({(float(p[0]), float(p[1])) for p in points})
    if len(pts) <= 2:
        return [np.array(p) for p in pts]

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return [np.array(p) for p in lower[:-1] + upper[:-1]]


def render_svg(path, points=None, labels=None, surface=None, hull_outline=False,
               extra_points=None, size=640, margin=48):
    """Write a standalone SVG of a 2-D scene.

    points/labels: dataset scatter colored by class. surface: zero
    contour traced on the fixed grid over the scene bounds (the surface
    domain when no points are given). extra_points: query markers.
    """
    pieces = []
    if points is not None:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[1] != 2:
            raise ValueError("render requires 2-D")
        pieces.append(points)
    if extra_points is not None:
        extra_points = np.atleast_2d(np.asarray(extra_points, dtype=float))
        if extra_points.shape[1] != 2:
            raise ValueError("render requires 2-D")
        pieces.append(extra_points)
    if surface is not None and surface.dim != 2:
        raise ValueError("render requires 2-D")
    if pieces:
        allpts = np.vstack(pieces)
        lo = allpts.min(axis=0)
        hi = allpts.max(axis=0)
        span = np.maximum(hi - lo, 1e-9)
        lo = lo - 0.1 * span
        hi = hi + 0.1 * span
    elif surface is not None:
        lo = np.array([surface.domain.lower] * 2)
        hi = np.array([surface.domain.upper] * 2)
    else:
        raise ValueError("nothing to render")

    def to_svg(p):
        sx = margin + (p[0] - lo[0]) / (hi[0] - lo[0]) * (size - 2 * margin)
        sy = size - margin - (p[1] - lo[1]) / (hi[1] - lo[1]) * (size - 2 * margin)
        return sx, sy

    def fmt(v):
        return format(v, ".4f")

    body = []
    body.append(
        f'<rect x="0" y="0" width="{size}" height="{size}" fill="#ffffff"/>'
    )

    if surface is not None:
        xs = np.linspace(lo[0], hi[0], GRID)
        ys = np.linspace(lo[1], hi[1], GRID)
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        grid_pts = np.column_stack([gx.ravel(), gy.ravel()])
        vals = surface.evaluate_many(grid_pts).reshape(GRID, GRID)
        segs = marching_squares(vals, xs, ys)
        if segs:
            d = " ".join(
                f"M {fmt(to_svg(a)[0])} {fmt(to_svg(a)[1])} "
                f"L {fmt(to_svg(b)[0])} {fmt(to_svg(b)[1])}"
                for a, b in segs
            )
            body.append(
                f'<path d="{d}" stroke="#111111" stroke-width="1.5" fill="none"/>'
            )

    if hull_outline and points is not None and len(points) >= 3:
        verts = convex_hull_2d(points)
        pts_attr = " ".join(f"{fmt(to_svg(v)[0])},{fmt(to_svg(v)[1])}" for v in verts)
        body.append(
            f'<polygon points="{pts_attr}" stroke="#555555" stroke-width="1" '
            f'stroke-dasharray="6,4" fill="none"/>'
        )

    if points is not None:
        if labels is None:
            labels = np.zeros(len(points), dtype=int)
        for p, lab in zip(points, labels):
            sx, sy = to_svg(p)
            color = _PALETTE[int(lab) % len(_PALETTE)]
            body.append(
                f'<circle cx="{fmt(sx)}" cy="{fmt(sy)}" r="3" fill="{color}"/>'
            )

    if extra_points is not None:
        for p in extra_points:
            sx, sy = to_svg(p)
            body.append(
                f'<circle cx="{fmt(sx)}" cy="{fmt(sy)}" r="4" fill="none" '
                f'stroke="#000000" stroke-width="1.5"/>'
            )

    svg = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">\n'
        + "\n".join(body)
        + "\n</svg>\n"
    )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(svg)
