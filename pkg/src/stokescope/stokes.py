"""Stokes-line diagrams and progressive-path membership tests.

A Stokes line through a turning point is a level set of the real part of
z(x), the action measured from that point; the lines are integral curves
of the field i * conj(sqrt(V - E)).  The diagram tracer integrates the
unit-normalized field from each simple turning point, the region machinery
classifies connectivity of the complement, and progressive_path decides
whether a strictly Re-z-monotone route exists across the interval (the
spectral exclusion test).
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import RK45

from .contour import (BranchedPath, DegenerateConfiguration, TurningPointSet,
                      _nearest_sqrt, _poly_f, action, turning_points)
from .potential import Potential


class OnBoundary(ValueError):
    """Query point lies on (or too close to) a traced Stokes line."""


class AtTurningPoint(ValueError):
    """Field evaluation requested at a turning point."""


def stokes_field(p: Potential, E: complex, x: complex, branch: complex,
                 shift: float = 0.0, normalized: bool = False) -> complex:
    """The line field i * conj(branch) at x; branch must square to V+i*shift-E."""
    f = _poly_f(p, E, shift)
    fx = f(complex(x))
    if abs(fx) < 1e-12:
        raise AtTurningPoint(f"at turning point: |V(x)-E| = {abs(fx):.2e} at x = {x}")
    if abs(branch * branch - fx) > 1e-9 * max(abs(fx), 1e-30):
        raise ValueError("branch value does not square to V + i*shift - E at x")
    s = 1j * np.conj(branch)
    return s / abs(s) if normalized else s


@dataclass
class StokesLine:
    source: complex
    direction_index: int
    points: np.ndarray  # complex polyline, starting at the source
    termination: str    # box | turning_point | max_length
    re_drift: float     # max |Re z| observed along the trace

    def arc_length(self) -> float:
        return float(np.sum(np.abs(np.diff(self.points))))


@dataclass
class StokesDiagram:
    energy: complex
    shift: float
    turning_points: TurningPointSet
    lines: list[StokesLine]
    box: tuple[float, float, float, float]  # xmin, xmax, ymin, ymax

    def to_json(self) -> dict:
        return {
            "energy": [self.energy.real, self.energy.imag],
            "shift": self.shift,
            "turning_points": [[z.real, z.imag] for z in self.turning_points.locations],
            "box": list(self.box),
            "lines": [
                {
                    "source": [ln.source.real, ln.source.imag],
                    "direction_index": ln.direction_index,
                    "termination": ln.termination,
                    "points": [[w.real, w.imag] for w in ln.points],
                }
                for ln in self.lines
            ],
        }


def _inside(box, z) -> bool:
    return box[0] <= z.real <= box[1] and box[2] <= z.imag <= box[3]


def _clip_to_box(box, a, b):
    """Last point of [a, b] inside the box, by bisection on the segment."""
    lo, hi = 0.0, 1.0
    for _ in range(60):
        m = 0.5 * (lo + hi)
        if _inside(box, a + m * (b - a)):
            lo = m
        else:
            hi = m
    return a + lo * (b - a)


def trace_diagram(p: Potential, E: complex, box=(-4.0, 4.0, -4.0, 4.0),
                  shift: float = 0.0, *, max_step_frac: float = 1e-3,
                  rtol: float = 1e-9, tp_radius: float = 1e-5,
                  arc_factor: float = 10.0) -> StokesDiagram:
    """Trace the three Stokes lines from every simple turning point.

    Integration uses an adaptive 4/5 Runge-Kutta pair on the unit field
    with arc-length steps bounded by max_step_frac * diam(box); the
    accumulated Re z is projected back to zero after every step so drift
    cannot build up along long lines.
    """
    tps = turning_points(p, E, shift)
    if not tps.all_simple():
        raise DegenerateConfiguration("degenerate configuration: multiple turning point")
    if tps.min_separation() < 1e-4:
        raise DegenerateConfiguration("degenerate configuration: turning points closer than 1e-4")

    f = _poly_f(p, E, shift)
    der = [(k + 1) * c for k, c in enumerate(p.coeffs[1:])]

    def dV(z):
        acc = 0j
        for c in reversed(der):
            acc = acc * z + c
        return acc

    diam = math.hypot(box[1] - box[0], box[3] - box[2])
    max_step = max_step_frac * diam
    max_arc = arc_factor * diam
    lines = []
    for alpha in tps.locations:
        c = dV(alpha)
        base = (math.pi - np.angle(c)) / 3.0
        others = [z for z in tps.locations if z != alpha]
        for m in range(3):
            theta = base + 2.0 * math.pi * m / 3.0
            ln = _trace_one(f, alpha, theta, box, max_step, max_arc, rtol,
                            tp_radius, tps.locations, m)
            lines.append(ln)
    return StokesDiagram(complex(E), shift, tps, lines, tuple(box))


def _trace_one(f, alpha, theta, box, max_step, max_arc, rtol, tp_radius,
               tp_locs, dir_index) -> StokesLine:
    r0 = min(1e-4, max_step / 4.0)
    x0 = alpha + r0 * np.exp(1j * theta)
    w = complex(np.sqrt(f(x0)))
    d = 1j * np.conj(w)
    sigma = 1.0 if (d * np.exp(-1j * theta)).real > 0 else -1.0

    state = {"w": w}

    def rhs(t, y):
        x = y[0] + 1j * y[1]
        wloc = _nearest_sqrt(f(x), state["w"])
        dd = sigma * 1j * np.conj(wloc)
        dd /= abs(dd)
        return [dd.real, dd.imag]

    pts = [alpha, x0]
    z_acc = 0j
    drift = 0.0
    termination = "max_length"
    solver = RK45(rhs, 0.0, [x0.real, x0.imag], t_bound=max_arc,
                  max_step=max_step, rtol=rtol, atol=1e-12)
    x_prev, w_prev = x0, w
    while solver.status == "running":
        solver.step()
        x_new = solver.y[0] + 1j * solver.y[1]
        w_mid = _nearest_sqrt(f(0.5 * (x_prev + x_new)), w_prev)
        w_new = _nearest_sqrt(f(x_new), w_mid)
        z_acc += (x_new - x_prev) * (w_prev + 4.0 * w_mid + w_new) / 6.0
        # project Re z back to the level set
        err = z_acc.real
        if abs(err) > 1e-14:
            corr = -err * np.conj(w_new) / abs(w_new) ** 2
            x_new = x_new + corr
            z_acc += w_new * corr
            solver.y[0], solver.y[1] = x_new.real, x_new.imag
            w_new = _nearest_sqrt(f(x_new), w_new)
        drift = max(drift, abs(z_acc.real))
        if not _inside(box, x_new):
            pts.append(_clip_to_box(box, x_prev, x_new))
            termination = "box"
            break
        hit = None
        if solver.t > 10 * r0:
            for z in tp_locs:
                if abs(x_new - z) < tp_radius:
                    hit = z
                    break
        pts.append(x_new)
        if hit is not None:
            termination = "turning_point"
            break
        x_prev, w_prev = x_new, w_new
        state["w"] = w_new
    return StokesLine(alpha, dir_index, np.array(pts), termination, drift)


# -- region connectivity -------------------------------------------------


def _segments_of(diagram: StokesDiagram) -> np.ndarray:
    segs = []
    for ln in diagram.lines:
        P = ln.points
        if len(P) >= 2:
            segs.append(np.column_stack([P[:-1], P[1:]]))
    if not segs:
        return np.empty((0, 2), dtype=complex)
    return np.vstack(segs)


def _min_distance_to_lines(segs: np.ndarray, z: complex) -> float:
    if len(segs) == 0:
        return math.inf
    a, b = segs[:, 0], segs[:, 1]
    d = b - a
    L2 = np.abs(d) ** 2
    t = ((z - a).real * d.real + (z - a).imag * d.imag) / np.where(L2 > 0, L2, 1.0)
    t = np.clip(t, 0.0, 1.0)
    return float(np.min(np.abs(z - (a + t * d))))


class _RegionGrid:
    """Raster walls from the traced polylines plus BFS connectivity."""

    def __init__(self, diagram: StokesDiagram, resolution: int = 256):
        xmin, xmax, ymin, ymax = diagram.box
        pad = 1e-9
        self.x0, self.y0 = xmin - pad, ymin - pad
        self.nx = self.ny = resolution
        self.dx = (xmax - xmin + 2 * pad) / self.nx
        self.dy = (ymax - ymin + 2 * pad) / self.ny
        self.wall = np.zeros((self.nx, self.ny), dtype=bool)
        for ln in diagram.lines:
            self._mark(ln.points)

    def _cell(self, z: complex):
        i = int((z.real - self.x0) / self.dx)
        j = int((z.imag - self.y0) / self.dy)
        return min(max(i, 0), self.nx - 1), min(max(j, 0), self.ny - 1)

    def _mark(self, points: np.ndarray):
        step = 0.45 * min(self.dx, self.dy)
        for a, b in zip(points[:-1], points[1:]):
            L = abs(b - a)
            n = max(1, int(L / step) + 1)
            for t in np.linspace(0.0, 1.0, n + 1):
                i, j = self._cell(a + t * (b - a))
                self.wall[i, j] = True

    def connected(self, z_from: complex, z_to: complex) -> bool:
        s, t = self._cell(z_from), self._cell(z_to)
        if self.wall[s] or self.wall[t]:
            return False
        seen = np.zeros_like(self.wall)
        seen[s] = True
        q = deque([s])
        while q:
            i, j = q.popleft()
            if (i, j) == t:
                return True
            for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                ii, jj = i + di, j + dj
                if 0 <= ii < self.nx and 0 <= jj < self.ny \
                        and not seen[ii, jj] and not self.wall[ii, jj]:
                    seen[ii, jj] = True
                    q.append((ii, jj))
        return False

    def path(self, z_from: complex, z_to: complex):
        """Cell-center polyline joining the two points, or None."""
        s, t = self._cell(z_from), self._cell(z_to)
        if self.wall[s] or self.wall[t]:
            return None
        prev = {s: None}
        q = deque([s])
        while q:
            cur = q.popleft()
            if cur == t:
                break
            i, j = cur
            for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                nxt = (i + di, j + dj)
                if 0 <= nxt[0] < self.nx and 0 <= nxt[1] < self.ny \
                        and nxt not in prev and not self.wall[nxt]:
                    prev[nxt] = cur
                    q.append(nxt)
        if t not in prev:
            return None
        cells = []
        cur = t
        while cur is not None:
            cells.append(cur)
            cur = prev[cur]
        cells.reverse()
        pts = [z_from]
        for i, j in cells[1:-1]:
            pts.append(complex(self.x0 + (i + 0.5) * self.dx,
                               self.y0 + (j + 0.5) * self.dy))
        pts.append(z_to)
        # drop consecutive duplicates
        out = [pts[0]]
        for z in pts[1:]:
            if abs(z - out[-1]) > 1e-12:
                out.append(z)
        return out if len(out) >= 2 else None


def same_region(diagram: StokesDiagram, points, resolution: int = 256) -> bool:
    """True when all points are joinable without crossing a traced line."""
    pts = [complex(z) for z in points]
    if len(pts) <= 1:
        return True
    segs = _segments_of(diagram)
    for z in pts:
        if _min_distance_to_lines(segs, z) < 1e-6:
            raise OnBoundary(f"point {z} lies on a traced Stokes line")
    grid = _RegionGrid(diagram, resolution)
    return all(grid.connected(pts[0], z) for z in pts[1:])


# -- progressive paths ---------------------------------------------------


@dataclass
class MembershipVerdict:
    in_T: bool | None           # None encodes a boundary/undecidable verdict
    verdict: str                # "in" | "out" | "boundary"
    conditions: list = field(default_factory=list)   # (name, complex value)
    witness: list | None = None  # strictly Re-z-monotone route when found
    sides: list = field(default_factory=list)        # per-piece verdicts when delta > 0


def _route_monotone(f, x_from: complex, x_to: complex, tp_locs,
                    step: float = 1e-3, tilt: float = 0.25,
                    max_steps: int = 60000):
    """Strictly Re-z-increasing walk from x_from toward x_to, or None.

    Heads straight for the target whenever that direction increases Re z;
    otherwise slides along the level line (tilted up by `tilt`) in the
    sense that approaches the target, veering around turning points.
    Returns the polyline on success; a stall or cap is a failure.
    """
    f0 = f(x_from)
    if abs(f0) < 1e-12:
        return None
    for seed_sign in (1.0, -1.0):
        w = seed_sign * complex(np.sqrt(f0))
        x = x_from
        pts = [x]
        best = abs(x_to - x)
        since_best = 0
        ok = False
        for _ in range(max_steps):
            rem = x_to - x
            dist = abs(rem)
            if dist <= step:
                if (w * rem).real > 0:
                    pts.append(x_to)
                    ok = True
                    break
                # creep around until the final hop is admissible
            d_t = rem / dist
            rate = (w * d_t).real
            if rate > 0.3 * abs(w):
                d = d_t
            else:
                g = np.conj(w) / abs(w)
                s = 1j * g
                if (s * np.conj(d_t)).real < 0:
                    s = -s
                d = s + tilt * g
                d /= abs(d)
            x_new = x + step * d
            # veer away from turning points rather than stepping into them
            guard = 0
            while any(abs(x_new - z) < 3 * step for z in tp_locs) and guard < 8:
                g = np.conj(w) / abs(w)
                d = d + 0.5 * g
                d /= abs(d)
                x_new = x + step * d
                guard += 1
            w_new = _nearest_sqrt(f(x_new), w)
            if (0.5 * (w + w_new) * (x_new - x)).real <= 0:
                break  # cannot certify strict increase; treat as stall
            x, w = x_new, w_new
            pts.append(x)
            if abs(x) > 50.0:
                break
            if dist < best - 1e-12:
                best = dist
                since_best = 0
            else:
                since_best += 1
                if since_best > 4000:
                    break
        if ok:
            return pts
    return None


def _is_rotated_quadratic(p: Potential) -> bool:
    return p.degree == 2 and abs(p.coeffs[0]) == 0 and abs(p.coeffs[1]) == 0 \
        and not p.jumps


def _auto_box(points, margin: float = 1.5):
    xs = [z.real for z in points]
    ys = [z.imag for z in points]
    return (min(xs) - margin, max(xs) + margin, min(ys) - margin, max(ys) + margin)


def _decide_side(p: Potential, E: complex, shift: float, x_from: float,
                 x_to: float, tol: float, trace_kwargs) -> MembershipVerdict:
    tps = turning_points(p, E, shift)
    label = f"[{x_from:g},{x_to:g}]" + (f" shift {shift:+g}" if shift else "")
    box = _auto_box(list(tps.locations) + [x_from, x_to])
    diagram = trace_diagram(p, E, box, shift, **trace_kwargs)
    conditions = []

    segs = _segments_of(diagram)
    on_line = min(_min_distance_to_lines(segs, complex(x_from)),
                  _min_distance_to_lines(segs, complex(x_to))) < 1e-6
    if on_line:
        return MembershipVerdict(None, "boundary", conditions)

    grid = _RegionGrid(diagram, 256)
    if grid.connected(complex(x_from), complex(x_to)):
        # endpoints share a region: membership reduces to Re S != 0
        route = BranchedPath((complex(x_from), complex(x_to)), None, shift)
        S = action(p, E, route, abs_tol=1e-12)
        conditions.append((f"Re S_{label}", S))
        if abs(S.real) <= tol:
            return MembershipVerdict(False, "out", conditions)
        return MembershipVerdict(True, "in", conditions,
                                 witness=[complex(x_from), complex(x_to)])

    f = _poly_f(p, E, shift)
    witness = _route_monotone(f, complex(x_from), complex(x_to), tps.locations)
    if witness is not None:
        return MembershipVerdict(True, "in", conditions, witness=witness)

    if _is_rotated_quadratic(p) and (x_from, x_to) == (-1.0, 1.0):
        return _quadratic_table(p, E, shift, tps, conditions, tol)
    return MembershipVerdict(None, "boundary", conditions)


def _quadratic_table(p, E, shift, tps, conditions, tol):
    """Exclusion conditions for the pure quadratic family on (-1, 1).

    Sign conventions are anchored to the principal branch at the healthy
    path end and were fixed against the traced geometry: on the ray of
    separatrix energies Re S_{a-,a+} = 0, the no-path side has
    Re S_{a+,1} > 0; on the arc Re S_{a+,1} = 0 running from the
    degenerate energy to the triple junction, Re S_{a-,a+} > 0.
    """
    am, ap = sorted(tps.locations, key=lambda z: z.real)
    S_mp = action(p, E, BranchedPath((am, ap), None, shift), abs_tol=1e-12)
    S_p1 = action(p, E, BranchedPath((ap, 1.0), None, shift), abs_tol=1e-12)
    conditions.append(("Re S_{a-,a+}", S_mp))
    conditions.append(("Re S_{a+,1}", S_p1))
    if abs(S_mp.real) <= tol:
        if abs(S_p1.real) <= tol:
            return MembershipVerdict(None, "boundary", conditions)
        out = S_p1.real > 0
        return MembershipVerdict(not out, "out" if out else "in", conditions)
    if abs(S_p1.real) <= tol:
        if abs(S_mp.real) <= tol:
            return MembershipVerdict(None, "boundary", conditions)
        out = S_mp.real > 0
        return MembershipVerdict(not out, "out" if out else "in", conditions)
    # no witness was found yet no exclusion condition holds: report boundary
    return MembershipVerdict(None, "boundary", conditions)


def progressive_path(p: Potential, E: complex, delta: float = 0.0,
                     beta: float | None = None, tol: float = 1e-9,
                     fast: bool = False) -> MembershipVerdict:
    """Decide whether a progressive path crosses the interval at energy E.

    For delta = 0 the route runs from -1 to 1 for the unperturbed
    potential; for delta > 0 the two pieces [-1, beta] (shift -delta) and
    [beta, 1] (shift +delta) are decided independently and combined, which
    is the perturbed membership test.  fast=True loosens the diagram trace
    for batch scans.
    """
    if E == 0:
        raise ValueError("membership test requires E != 0")
    trace_kwargs = dict(max_step_frac=5e-3, rtol=1e-6) if fast else {}
    if delta == 0.0:
        return _decide_side(p, E, 0.0, -1.0, 1.0, tol, trace_kwargs)
    if beta is None:
        raise ValueError("delta > 0 requires beta")
    left = _decide_side(p, E, -delta, -1.0, beta, tol, trace_kwargs)
    right = _decide_side(p, E, +delta, beta, 1.0, tol, trace_kwargs)
    conditions = left.conditions + right.conditions
    sides = [left, right]
    if left.in_T is None or right.in_T is None:
        return MembershipVerdict(None, "boundary", conditions, sides=sides)
    in_T = left.in_T and right.in_T
    witness = None
    if in_T and left.witness and right.witness:
        witness = left.witness + right.witness[1:]
    return MembershipVerdict(in_T, "in" if in_T else "out", conditions,
                             witness=witness, sides=sides)
