"""Dependency-free SVG rendering for sweep results."""
from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

# viridis, 256 entries, packed as RRGGBB hex
_VIRIDIS_HEX = (
    "44015444025645045745055946075a46085c460a5d460b5e"
    "470d60470e61471063471164471365481467481668481769"
    "48186a481a6c481b6d481c6e481d6f481f70482071482173"
    "482374482475482576482677482878482979472a7a472c7a"
    "472d7b472e7c472f7d46307e46327e46337f463480453581"
    "453781453882443983443a83443b84433d84433e85423f85"
    "4240864241864142874144874045884046883f47883f4889"
    "3e49893e4a893e4c8a3d4d8a3d4e8a3c4f8a3c508b3b518b"
    "3b528b3a538b3a548c39558c39568c38588c38598c375a8c"
    "375b8d365c8d365d8d355e8d355f8d34608d34618d33628d"
    "33638d32648e32658e31668e31678e31688e30698e306a8e"
    "2f6b8e2f6c8e2e6d8e2e6e8e2e6f8e2d708e2d718e2c718e"
    "2c728e2c738e2b748e2b758e2a768e2a778e2a788e29798e"
    "297a8e297b8e287c8e287d8e277e8e277f8e27808e26818e"
    "26828e26828e25838e25848e25858e24868e24878e23888e"
    "23898e238a8d228b8d228c8d228d8d218e8d218f8d21908d"
    "21918c20928c20928c20938c1f948c1f958b1f968b1f978b"
    "1f988b1f998a1f9a8a1e9b8a1e9c891e9d891f9e891f9f88"
    "1fa0881fa1881fa1871fa28720a38620a48621a58521a685"
    "22a78522a88423a98324aa8325ab8225ac8226ad8127ad81"
    "28ae8029af7f2ab07f2cb17e2db27d2eb37c2fb47c31b57b"
    "32b67a34b67935b77937b87838b9773aba763bbb753dbc74"
    "3fbc7340bd7242be7144bf7046c06f48c16e4ac16d4cc26c"
    "4ec36b50c46a52c56954c56856c66758c7655ac8645cc863"
    "5ec96260ca6063cb5f65cb5e67cc5c69cd5b6ccd5a6ece58"
    "70cf5773d05675d05477d1537ad1517cd2507fd34e81d34d"
    "84d44b86d54989d5488bd6468ed64590d74393d74195d840"
    "98d83e9bd93c9dd93ba0da39a2da37a5db36a8db34aadc32"
    "addc30b0dd2fb2dd2db5de2bb8de29bade28bddf26c0df25"
    "c2df23c5e021c8e020cae11fcde11dd0e11cd2e21bd5e21a"
    "d8e219dae319dde318dfe318e2e418e5e419e7e419eae51a"
    "ece51befe51cf1e51df4e61ef6e620f8e621fbe723fde725"
)
VIRIDIS = tuple("#" + _VIRIDIS_HEX[i : i + 6] for i in range(0, len(_VIRIDIS_HEX), 6))

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")


def colour(value: float, vmin: float, vmax: float) -> str:
    if not np.isfinite(value):
        return "#ffffff"
    t = 0.5 if vmax <= vmin else (value - vmin) / (vmax - vmin)
    return VIRIDIS[int(np.clip(round(t * 255), 0, 255))]


def _fmt(v: float) -> str:
    return f"{v:.6g}"


class _Canvas:
    def __init__(self, width=640, height=480, left=80, right=110, top=40, bottom=60):
        self.w, self.h = width, height
        self.x0, self.x1 = left, width - right
        self.y0, self.y1 = top, height - bottom
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
            f'<rect width="{width}" height="{height}" fill="white"/>',
        ]

    def sx(self, x, lo, hi):
        return self.x0 + (self.x1 - self.x0) * (0.5 if hi == lo else (x - lo) / (hi - lo))

    def sy(self, y, lo, hi):
        return self.y1 - (self.y1 - self.y0) * (0.5 if hi == lo else (y - lo) / (hi - lo))

    def add(self, s):
        self.parts.append(s)

    def text(self, x, y, s, anchor="middle", rotate=None):
        tr = f' transform="rotate({rotate} {_fmt(x)} {_fmt(y)})"' if rotate is not None else ""
        self.add(f'<text x="{_fmt(x)}" y="{_fmt(y)}" text-anchor="{anchor}"{tr}>{escape(s)}</text>')

    def axes(self, xlim, ylim, xlabel, ylabel, title=""):
        self.add(
            f'<rect x="{self.x0}" y="{self.y0}" width="{self.x1 - self.x0}" height="{self.y1 - self.y0}" '
            'fill="none" stroke="black"/>'
        )
        for v in np.linspace(*xlim, 5):
            x = self.sx(v, *xlim)
            self.add(f'<line x1="{_fmt(x)}" y1="{self.y1}" x2="{_fmt(x)}" y2="{self.y1 + 5}" stroke="black"/>')
            self.text(x, self.y1 + 18, _fmt(v))
        for v in np.linspace(*ylim, 5):
            y = self.sy(v, *ylim)
            self.add(f'<line x1="{self.x0 - 5}" y1="{_fmt(y)}" x2="{self.x0}" y2="{_fmt(y)}" stroke="black"/>')
            self.text(self.x0 - 8, y + 4, _fmt(v), anchor="end")
        self.text((self.x0 + self.x1) / 2, self.h - 15, xlabel)
        self.text(20, (self.y0 + self.y1) / 2, ylabel, rotate=-90)
        if title:
            self.text((self.x0 + self.x1) / 2, 22, title)

    def render(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def heatmap(x, y, z, xlabel, ylabel, title="", zlabel="") -> str:
    """Cell plot of ``z[iy, ix]`` on the grid ``x`` (columns) by ``y`` (rows)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    c = _Canvas()
    xlim = (x.min(), x.max()) if x.size > 1 else (x[0] - 0.5, x[0] + 0.5)
    ylim = (y.min(), y.max()) if y.size > 1 else (y[0] - 0.5, y[0] + 0.5)
    finite = z[np.isfinite(z)]
    vmin, vmax = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 1.0)
    cw = (c.x1 - c.x0) / max(x.size, 1)
    ch = (c.y1 - c.y0) / max(y.size, 1)
    for iy in range(y.size):
        for ix in range(x.size):
            px = c.x0 + ix * cw
            py = c.y1 - (iy + 1) * ch
            c.add(
                f'<rect x="{_fmt(px)}" y="{_fmt(py)}" width="{_fmt(cw + 0.3)}" height="{_fmt(ch + 0.3)}" '
                f'fill="{colour(z[iy, ix], vmin, vmax)}"/>'
            )
    # half-cell padding so tick labels sit on cell centres
    if x.size > 1:
        dx = (xlim[1] - xlim[0]) / (x.size - 1) / 2
        xlim = (xlim[0] - dx, xlim[1] + dx)
    if y.size > 1:
        dy = (ylim[1] - ylim[0]) / (y.size - 1) / 2
        ylim = (ylim[0] - dy, ylim[1] + dy)
    c.axes(xlim, ylim, xlabel, ylabel, title)
    # colour bar
    bx, bw = c.x1 + 20, 16
    for k in range(64):
        yy = c.y1 - (k + 1) * (c.y1 - c.y0) / 64
        c.add(
            f'<rect x="{bx}" y="{_fmt(yy)}" width="{bw}" height="{_fmt((c.y1 - c.y0) / 64 + 0.3)}" '
            f'fill="{VIRIDIS[round(k * 255 / 63)]}"/>'
        )
    c.text(bx + bw + 4, c.y1, _fmt(vmin), anchor="start")
    c.text(bx + bw + 4, c.y0 + 10, _fmt(vmax), anchor="start")
    if zlabel:
        c.text(bx + bw / 2, c.y0 - 8, zlabel)
    return c.render()


def line_plot(series, xlabel, ylabel, title="", bars=None) -> str:
    """Polyline plot.

    ``series`` is a list of ``(label, x, y)``; ``bars`` an optional
    ``(edges, heights)`` histogram drawn underneath.
    """
    xs = [np.asarray(s[1], dtype=float) for s in series]
    ys = [np.asarray(s[2], dtype=float) for s in series]
    allx = np.concatenate(xs + ([np.asarray(bars[0], dtype=float)] if bars else []))
    ally = np.concatenate(ys + ([np.asarray(bars[1], dtype=float)] if bars else []))
    allx = allx[np.isfinite(allx)]
    ally = ally[np.isfinite(ally)]
    xlim = (float(allx.min()), float(allx.max())) if allx.size else (0.0, 1.0)
    ylim = (float(min(ally.min(), 0.0)), float(ally.max())) if ally.size else (0.0, 1.0)
    if ylim[1] <= ylim[0]:
        ylim = (ylim[0] - 0.5, ylim[0] + 0.5)
    c = _Canvas(right=40)
    if bars is not None:
        edges, heights = (np.asarray(b, dtype=float) for b in bars)
        for a, b, h in zip(edges[:-1], edges[1:], heights):
            xa, xb = c.sx(a, *xlim), c.sx(b, *xlim)
            ya, yb = c.sy(h, *ylim), c.sy(0.0, *ylim)
            c.add(
                f'<rect x="{_fmt(xa)}" y="{_fmt(ya)}" width="{_fmt(xb - xa)}" height="{_fmt(yb - ya)}" '
                'fill="#c7d7e8" stroke="#7f9fbf"/>'
            )
    c.axes(xlim, ylim, xlabel, ylabel, title)
    for k, ((label, _, _), x, y) in enumerate(zip(series, xs, ys)):
        col = _PALETTE[k % len(_PALETTE)]
        ok = np.isfinite(x) & np.isfinite(y)
        pts = " ".join(f"{_fmt(c.sx(a, *xlim))},{_fmt(c.sy(b, *ylim))}" for a, b in zip(x[ok], y[ok]))
        c.add(f'<polyline points="{pts}" fill="none" stroke="{col}" stroke-width="1.5"/>')
        ly = c.y0 + 16 + 16 * k
        c.add(f'<line x1="{c.x1 - 130}" y1="{ly - 4}" x2="{c.x1 - 110}" y2="{ly - 4}" stroke="{col}" stroke-width="2"/>')
        c.text(c.x1 - 105, ly, label, anchor="start")
    return c.render()
