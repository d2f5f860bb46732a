"""Minimal hand-rolled SVG emission for diagrams, curves and grids."""

from __future__ import annotations

import math


class SvgCanvas:
    """Fixed-viewport canvas mapping a complex-plane window to pixels."""

    def __init__(self, xmin, xmax, ymin, ymax, width=640):
        self.xmin, self.xmax, self.ymin, self.ymax = xmin, xmax, ymin, ymax
        self.w = width
        self.h = max(1, int(round(width * (ymax - ymin) / (xmax - xmin))))
        self.parts = []

    def _map(self, z):
        x = (z.real - self.xmin) / (self.xmax - self.xmin) * self.w
        y = self.h - (z.imag - self.ymin) / (self.ymax - self.ymin) * self.h
        return x, y

    def polyline(self, points, color="#1f5fbf", width=1.0, dash=None):
        if len(points) < 2:
            return
        coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in map(self._map, points))
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        self.parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="{width}"'
            f'{dash_attr} points="{coords}"/>')

    def circle(self, z, r=3.0, color="#c03020", fill=True):
        x, y = self._map(z)
        f = color if fill else "none"
        self.parts.append(
            f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{r}" fill="{f}" stroke="{color}"/>')

    def cross(self, z, r=3.0, color="#222222"):
        x, y = self._map(z)
        self.parts.append(
            f'<path stroke="{color}" stroke-width="1" d="M {x - r:.2f} {y - r:.2f} '
            f'L {x + r:.2f} {y + r:.2f} M {x - r:.2f} {y + r:.2f} '
            f'L {x + r:.2f} {y - r:.2f}"/>')

    def text(self, z, s, size=11, color="#333333"):
        x, y = self._map(z)
        self.parts.append(
            f'<text x="{x:.2f}" y="{y:.2f}" font-size="{size}" fill="{color}">{s}</text>')

    def heat_cell(self, z0, z1, level):
        """Shaded axis-aligned cell; level in [0, 1] maps white to blue."""
        x0, y0 = self._map(z0)
        x1, y1 = self._map(z1)
        v = max(0.0, min(1.0, level))
        r, g, b = int(255 * (1 - v)), int(255 * (1 - 0.6 * v)), 255
        self.parts.append(
            f'<rect x="{min(x0, x1):.2f}" y="{min(y0, y1):.2f}" '
            f'width="{abs(x1 - x0):.2f}" height="{abs(y1 - y0):.2f}" '
            f'fill="rgb({r},{g},{b})" stroke="none"/>')

    def render(self) -> str:
        body = "\n".join(self.parts)
        return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.w}" '
                f'height="{self.h}" viewBox="0 0 {self.w} {self.h}">\n'
                f'<rect width="100%" height="100%" fill="white"/>\n{body}\n</svg>\n')


def diagram_svg(diagram, extra_points=()) -> str:
    xmin, xmax, ymin, ymax = diagram.box
    cv = SvgCanvas(xmin, xmax, ymin, ymax)
    for ln in diagram.lines:
        cv.polyline(list(ln.points))
    for z in diagram.turning_points.locations:
        cv.circle(z, 3.0, "#c03020")
    for z in (-1.0, 1.0):
        cv.cross(complex(z), 4.0)
    for z in extra_points:
        cv.cross(complex(z), 3.0, "#208040")
    cv.text(complex(xmin + 0.05 * (xmax - xmin), ymax - 0.07 * (ymax - ymin)),
            f"E = {diagram.energy:.6g}")
    return cv.render()


def curves_svg(curves, eigenvalues=(), window=None) -> str:
    pts = [z for c in curves for z in c.energies()]
    pts += [complex(e) for e in eigenvalues]
    if window is None:
        xs = [z.real for z in pts]
        ys = [z.imag for z in pts]
        mx = 0.05 * (max(xs) - min(xs) + 1e-9)
        my = 0.1 * (max(ys) - min(ys) + 1e-9) + 0.05
        window = (min(xs) - mx, max(xs) + mx, min(ys) - my, max(ys) + my)
    cv = SvgCanvas(*window)
    for c in curves:
        cv.polyline(list(c.energies()))
    for e in eigenvalues:
        cv.cross(complex(e), 3.0, "#c03020")
    return cv.render()


def pseudogrid_svg(g, symbol_boundary=None, curves=()) -> str:
    re, im = g.nodes()
    cv = SvgCanvas(g.rect[0], g.rect[1], g.rect[2], g.rect[3])
    # log levels: deep blue at 1e-8, white at 1e-1
    for j in range(g.ny - 1):
        for i in range(g.nx - 1):
            v = g.values[j, i]
            lv = (math.log10(max(v, 1e-12)) - (-1.0)) / (-8.0 - (-1.0))
            cv.heat_cell(complex(re[i], im[j]), complex(re[i + 1], im[j + 1]), lv)
    if symbol_boundary is not None:
        cv.polyline(symbol_boundary, "#208040", 1.5, dash="4,3")
    for c in curves:
        cv.polyline(list(c.energies()), "#c03020", 1.2)
    return cv.render()
