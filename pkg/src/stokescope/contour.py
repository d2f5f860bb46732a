"""Complex contour machinery: turning points, branch continuation, actions.

All integrals here are of the square root of f(t) = V(t) + i*shift - E
along polylines, with the branch fixed by a seed value and continued so
that consecutive samples never flip sheet.  Only the polynomial part of
the potential is evaluated on contours; a piecewise shift is carried
explicitly by the path (one analytic piece per contour).
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .potential import Potential


class BranchPointCollision(ValueError):
    """Path passes too close to a turning point."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""


class DegenerateConfiguration(ValueError):
    """Turning-point structure unsuitable for the requested operation."""


# 15-point Kronrod nodes/weights with the embedded 7-point Gauss rule
# (QUADPACK values, symmetric about 0).
_XK = np.array([
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0, 0.207784955007898, 0.405845151377397,
    0.586087235467691, 0.741531185599394, 0.864864423359769,
    0.949107912342759, 0.991455371120813,
])
_WK = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728, 0.204432940075298,
    0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529,
])
_WG = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469, 0.381830050505119, 0.279705391489277,
    0.129484966168870,
])
_GAUSS_IDX = np.arange(1, 15, 2)


@dataclass(frozen=True)
class BranchedPath:
    """Polyline with a square-root branch seed and a fixed piece shift.

    branch_seed is the value of (V(start) + i*shift - E)**0.5 selecting
    the sheet; None means the principal root at the first point where the
    integrand does not vanish.
    """

    vertices: tuple[complex, ...]
    branch_seed: complex | None = None
    shift: float = 0.0

    def __post_init__(self):
        verts = tuple(complex(v) for v in self.vertices)
        if len(verts) < 2:
            raise ValueError("path needs at least two vertices")
        if any(a == b for a, b in zip(verts, verts[1:])):
            raise ValueError("consecutive path vertices must be distinct")
        object.__setattr__(self, "vertices", verts)


def straight_path(x0: complex, x1: complex, shift: float = 0.0,
                  seed: complex | None = None) -> BranchedPath:
    return BranchedPath((complex(x0), complex(x1)), seed, shift)


@dataclass(frozen=True)
class TurningPointSet:
    """Roots of V + i*shift - E with multiplicities."""

    points: tuple[tuple[complex, int], ...]

    @property
    def locations(self) -> tuple[complex, ...]:
        return tuple(z for z, _ in self.points)

    @property
    def orders(self) -> tuple[int, ...]:
        return tuple(k for _, k in self.points)

    def all_simple(self) -> bool:
        return all(k == 1 for k in self.orders)

    def nearest(self, z: complex) -> complex:
        return min(self.locations, key=lambda a: abs(a - z))

    def min_separation(self) -> float:
        locs = self.locations
        if len(locs) < 2:
            return math.inf
        return min(abs(a - b) for i, a in enumerate(locs) for b in locs[i + 1:])


def turning_points(p: Potential, E: complex, shift: float = 0.0) -> TurningPointSet:
    """All roots of V(x) + i*shift - E, via companion matrix plus Newton polish.

    Multiple roots are detected by clustering within 1e-7 * (1+|E|)**0.5.
    """
    if p.degree == 0:
        raise DegenerateConfiguration("no turning points definable for a constant potential")
    coeffs = list(p.coeffs)
    coeffs[0] = coeffs[0] + 1j * shift - E
    dcoeffs = [(k + 1) * c for k, c in enumerate(coeffs[1:])]

    def f(z):
        acc = 0j
        for c in reversed(coeffs):
            acc = acc * z + c
        return acc

    def df(z):
        acc = 0j
        for c in reversed(dcoeffs):
            acc = acc * z + c
        return acc

    roots = np.roots(list(reversed(coeffs)))
    polished = []
    for r in roots:
        z = complex(r)
        for _ in range(4):
            d = df(z)
            if abs(d) < 1e-14 * (1 + abs(z)):
                break
            step = f(z) / d
            if abs(step) > 0.5 * (1 + abs(z)):
                break
            z -= step
        polished.append(z)

    tol = 1e-7 * math.sqrt(1 + abs(E))
    clusters: list[list[complex]] = []
    for z in sorted(polished, key=lambda w: (w.real, w.imag)):
        for cl in clusters:
            if abs(z - cl[0]) <= tol * max(1.0, abs(cl[0])):
                cl.append(z)
                break
        else:
            clusters.append([z])
    pts = tuple((complex(np.mean(cl)), len(cl)) for cl in clusters)
    return TurningPointSet(pts)


# -- branch continuation ----------------------------------------------


def _poly_f(p: Potential, E: complex, shift: float):
    """Vectorized integrand base f(t) = V_poly(t) + i*shift - E."""
    coeffs = list(p.coeffs)
    coeffs[0] = coeffs[0] + 1j * shift - E
    rev = np.array(list(reversed(coeffs)), dtype=complex)

    def f(t):
        return np.polyval(rev, t)

    return f


def _nearest_sqrt(fval, ref):
    """Square root of fval on the sheet closest to ref."""
    w = np.sqrt(fval)
    if isinstance(w, np.ndarray):
        flip = np.abs(w - ref) > np.abs(w + ref)
        w = np.where(flip, -w, w)
    elif abs(w - ref) > abs(w + ref):
        w = -w
    return w


def _point_segment_distance(z: complex, a: complex, b: complex) -> float:
    d = b - a
    L2 = abs(d) ** 2
    if L2 == 0:
        return abs(z - a)
    t = ((z - a).real * d.real + (z - a).imag * d.imag) / L2
    t = min(1.0, max(0.0, t))
    return abs(z - (a + t * d))


def path_clearance(vertices, points) -> float:
    """Minimum distance from any of `points` to the polyline."""
    best = math.inf
    for z in points:
        for a, b in zip(vertices, vertices[1:]):
            best = min(best, _point_segment_distance(z, a, b))
    return best


def _refine_segment(f, a: complex, b: complex, wa: complex, max_depth: int = 48):
    """Sample the branch on [a, b] densely enough that no sheet flip occurs.

    Returns (ts, points, values) with ts in [0, 1]; values[0] continues wa.
    """
    out_t = [0.0]
    out_w = [wa]
    seg = b - a
    _descend(f, a, seg, 0.0, 1.0, wa, 0, out_t, out_w, max_depth)
    ts = np.array(out_t)
    pts = a + ts * seg
    return ts, pts, np.array(out_w)


def _descend(f, a, seg, t0, t1, w0, depth, out_t, out_w, max_depth):
    z1 = a + t1 * seg
    w1 = _nearest_sqrt(f(z1), w0)
    if abs(w1 - w0) < abs(w0) or abs(w1 - w0) < 1e-15:
        out_t.append(t1)
        out_w.append(w1)
        return
    if depth >= max_depth:
        raise BranchPointCollision(
            "branch point collision: cannot separate sheets near "
            f"{a + 0.5 * (t0 + t1) * seg:.6g}")
    tm = 0.5 * (t0 + t1)
    _descend(f, a, seg, t0, tm, w0, depth + 1, out_t, out_w, max_depth)
    _descend(f, a, seg, tm, t1, out_w[-1], depth + 1, out_t, out_w, max_depth)


def continue_branch(path: BranchedPath, p: Potential, E: complex,
                    clearance: float = 1e-6):
    """Continuously continued branch values along the path.

    Returns (points, values) as matching complex arrays.  Raises
    BranchPointCollision when the path passes within `clearance` of a
    turning point.
    """
    f = _poly_f(p, E, path.shift)
    if p.degree >= 1:
        tps = turning_points(p, E, path.shift)
        if path_clearance(path.vertices, tps.locations) < clearance:
            raise BranchPointCollision("branch point collision along path")
    start = path.vertices[0]
    f0 = f(start)
    seed = path.branch_seed
    if seed is None:
        seed = complex(np.sqrt(f0))
    else:
        seed = complex(seed)
        if abs(seed * seed - f0) > 1e-12 * max(abs(f0), abs(seed) ** 2, 1e-300):
            raise ValueError("branch seed does not square to the integrand at the start")
    all_pts = [start]
    all_ws = [seed]
    w = seed
    for a, b in zip(path.vertices, path.vertices[1:]):
        _, pts, ws = _refine_segment(f, a, b, w)
        all_pts.extend(pts[1:])
        all_ws.extend(ws[1:])
        w = ws[-1]
    return np.array(all_pts), np.array(all_ws)


# -- action integrals --------------------------------------------------


def _gk_cell(f, za, zb, wa, wb):
    """Gauss-Kronrod 15 on one cell with sign matching to the chord of w."""
    mid = 0.5 * (za + zb)
    half = 0.5 * (zb - za)
    zs = mid + half * _XK
    ref = wa + (wb - wa) * 0.5 * (_XK + 1.0)
    ws = _nearest_sqrt(f(zs), ref)
    k15 = half * np.sum(_WK * ws)
    g7 = half * np.sum(_WG * ws[_GAUSS_IDX])
    return k15, abs(k15 - g7)


def _adaptive_action(f, pts, ws, abs_tol, max_subdivisions):
    """Adaptive GK15 over the no-flip skeleton (pts, ws)."""
    cells = []
    total = 0j
    for i in range(len(pts) - 1):
        val, err = _gk_cell(f, pts[i], pts[i + 1], ws[i], ws[i + 1])
        cells.append((-err, i, pts[i], pts[i + 1], ws[i], ws[i + 1], val))
    heapq.heapify(cells)
    n_splits = 0
    counter = len(cells)
    while cells and sum(-c[0] for c in cells) > abs_tol:
        if n_splits >= max_subdivisions:
            achieved = sum(-c[0] for c in cells)
            raise QuadratureError(
                f"quadrature stalled at absolute error {achieved:.3e} "
                f"(requested {abs_tol:.1e})")
        negerr, _, za, zb, wa, wb, _ = heapq.heappop(cells)
        zm = 0.5 * (za + zb)
        wm = _nearest_sqrt(f(zm), 0.5 * (wa + wb))
        for (u0, u1, v0, v1) in ((za, zm, wa, wm), (zm, zb, wm, wb)):
            val, err = _gk_cell(f, u0, u1, v0, v1)
            counter += 1
            heapq.heappush(cells, (-err, counter, u0, u1, v0, v1, val))
        n_splits += 1
    total = sum(c[6] for c in cells)
    return complex(total)


def _sqrt_end_integral(f, z_end, z_in, w_in, abs_tol, max_subdivisions,
                       toward_end: bool):
    """Integral over a segment with a simple turning point at z_end.

    Substituting x = z_end + (z_in - z_end) * s**2 removes the square-root
    endpoint singularity; the branch is anchored at the healthy end z_in
    where the continued value w_in is known.  toward_end gives the sign
    convention: True integrates z_in -> z_end, False the reverse.
    """
    seg = z_in - z_end

    def g(s):
        s = np.asarray(s, dtype=float)
        x = z_end + seg * s * s
        ref = w_in * s  # w vanishes linearly in s at the turning point
        w = _nearest_sqrt(f(x), np.where(np.abs(ref) > 0, ref, w_in))
        return w * 2.0 * s * seg

    # plain adaptive GK on s in [0, 1] of the smooth transformed integrand
    cells = []
    counter = 0

    def cell(a, b):
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        ss = mid + half * _XK
        vals = g(ss)
        k15 = half * np.sum(_WK * vals)
        g7 = half * np.sum(_WG * vals[_GAUSS_IDX])
        return k15, abs(k15 - g7)

    for a, b in ((0.0, 0.5), (0.5, 1.0)):
        val, err = cell(a, b)
        counter += 1
        cells.append((-err, counter, a, b, val))
    heapq.heapify(cells)
    n_splits = 0
    while sum(-c[0] for c in cells) > abs_tol:
        if n_splits >= max_subdivisions:
            achieved = sum(-c[0] for c in cells)
            raise QuadratureError(
                f"quadrature stalled at absolute error {achieved:.3e} "
                f"(requested {abs_tol:.1e})")
        _, _, a, b, _ = heapq.heappop(cells)
        m = 0.5 * (a + b)
        for u0, u1 in ((a, m), (m, b)):
            val, err = cell(u0, u1)
            counter += 1
            heapq.heappush(cells, (-err, counter, u0, u1, val))
        n_splits += 1
    total = sum(c[4] for c in cells)
    # g integrates from the turning point outward (s: 0 -> 1)
    return -complex(total) if toward_end else complex(total)


def action(p: Potential, E: complex, path: BranchedPath, *,
           abs_tol: float = 1e-11, max_subdivisions: int = 2 ** 14) -> complex:
    """Integral of the continued branch of (V + i*shift - E)**0.5 along path.

    Simple turning points sitting exactly at the first or last vertex are
    handled by a quadratic substitution on the terminal segment; interior
    collisions raise BranchPointCollision.
    """
    f = _poly_f(p, E, path.shift)
    verts = list(path.vertices)
    scale = 1.0 + abs(E)
    tp_at_start = abs(f(verts[0])) <= 1e-8 * scale
    tp_at_end = abs(f(verts[-1])) <= 1e-8 * scale

    if tp_at_start and tp_at_end and len(verts) == 2:
        verts = [verts[0], 0.5 * (verts[0] + verts[1]), verts[1]]

    # clearance against turning points that are not path endpoints
    if p.degree >= 1:
        tps = turning_points(p, E, path.shift)
        interior = [z for z in tps.locations
                    if not (tp_at_start and abs(z - verts[0]) < 1e-6)
                    and not (tp_at_end and abs(z - verts[-1]) < 1e-6)]
        if interior and path_clearance(verts, interior) < 1e-6:
            raise BranchPointCollision("branch point collision along path")

    total = 0j
    # anchor the branch at the first healthy vertex
    if tp_at_start:
        anchor_idx = 1
    else:
        anchor_idx = 0
    w = path.branch_seed
    if w is None:
        w = complex(np.sqrt(f(verts[anchor_idx])))
    elif tp_at_start:
        raise ValueError("explicit seed is not supported when the path starts "
                         "at a turning point; seed the first healthy vertex")

    if tp_at_start:
        total += _sqrt_end_integral(f, verts[0], verts[1], w, abs_tol,
                                    max_subdivisions, toward_end=False)
        start_seg = 1
    else:
        start_seg = 0

    last_seg = len(verts) - 2
    for i in range(start_seg, last_seg + 1):
        a, b = verts[i], verts[i + 1]
        if i == last_seg and tp_at_end:
            total += _sqrt_end_integral(f, b, a, w, abs_tol,
                                        max_subdivisions, toward_end=True)
            break
        _, pts, wss = _refine_segment(f, a, b, w)
        total += _adaptive_action(f, pts, wss, abs_tol, max_subdivisions)
        w = wss[-1]
    return total


def action_between(p: Potential, E: complex, x0: complex, x1: complex,
                   shift: float = 0.0, seed: complex | None = None,
                   abs_tol: float = 1e-11) -> complex:
    """Action along the straight segment from x0 to x1."""
    return action(p, E, straight_path(x0, x1, shift, seed), abs_tol=abs_tol)
