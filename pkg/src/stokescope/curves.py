"""Limit-spectrum curves: solution sets of Re S_{x0,x1}(a + i b) = 0.

At large real energy each endpoint pair carries a unique curve b(a)
approaching Im(Y(x1) - Y(x0))/(x1 - x0) + shift; the pure quadratic
potential additionally owns a finite Y-shaped piece assembled from the
separatrix ray, the arc joining the degenerate energy i to the triple
junction, and the infinite curve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .contour import BranchedPath, action, turning_points
from .potential import Potential, primitive


class CurveError(RuntimeError):
    """Root bracketing or continuation failure."""


Endpoint = float | str  # a real abscissa or "alpha-" / "alpha+"


def _resolve_endpoints(p: Potential, E: complex, x0: Endpoint, x1: Endpoint,
                       shift: float, prev=None):
    """Concrete endpoints, re-solving the moving turning points per energy."""
    out = []
    tps = None
    for i, x in enumerate((x0, x1)):
        if isinstance(x, str):
            if tps is None:
                tps = sorted(turning_points(p, E, shift).locations,
                             key=lambda z: z.real)
            z = tps[0] if x == "alpha-" else tps[-1]
            if prev is not None and prev[i] is not None:
                cands = turning_points(p, E, shift).locations
                z = min(cands, key=lambda c: abs(c - prev[i]))
            out.append(complex(z))
        else:
            out.append(complex(x))
    return out


def re_action(p: Potential, E: complex, x0: Endpoint, x1: Endpoint,
              shift: float = 0.0, prev=None, abs_tol: float = 1e-12,
              seed_ref: complex | None = None) -> complex:
    """S_{x0,x1}(E) on the straight route, principal branch at the anchor.

    seed_ref, when given, pins the sheet: the start seed is the principal
    root or its negative, whichever is closer to seed_ref.  Scans over E
    need this to stay on one sheet as the principal root crosses its cut.
    """
    a, b = _resolve_endpoints(p, E, x0, x1, shift, prev)
    seed = None
    if seed_ref is not None:
        fa = p.poly(a) + 1j * shift - E
        if abs(fa) > 1e-8 * (1 + abs(E)):
            s = complex(np.sqrt(fa))
            seed = s if abs(s - seed_ref) <= abs(s + seed_ref) else -s
    return action(p, E, BranchedPath((a, b), seed, shift), abs_tol=abs_tol)


def min_large_a(p: Potential, shift: float = 0.0) -> float:
    """Below 3*(1 + max|V|) the curve solve refuses to run: uniqueness is
    an asymptotic statement and small-a roots may be spurious or multiple."""
    return 3.0 * (1.0 + p.max_abs_on_interval() + abs(shift))


def curve_point(p: Potential, x0: Endpoint, x1: Endpoint, shift: float,
                a: float, b_seed: float, tol: float = 1e-9,
                enforce_threshold: bool = True) -> float:
    """Solve Re S_{x0,x1}(a + i b) = 0 for b near b_seed.

    Newton with a central-difference derivative, safeguarded by bisection
    on [b_seed - 1, b_seed + 1]; raises CurveError when no sign change
    brackets a root or (with enforce_threshold) when a is below the
    large-energy threshold.
    """
    if enforce_threshold and a < min_large_a(p, shift):
        raise CurveError(
            f"a = {a:g} below the large-energy threshold {min_large_a(p, shift):g}; "
            "pass enforce_threshold=False only with uniqueness checked")

    # pin the integrand's sheet across the whole b-bracket: the principal
    # root at the anchor can flip sheet as b varies, which would negate
    # Re S discontinuously and break the sign-change bracketing
    ref_seed = [None]

    def f(b):
        E = a + 1j * b
        pts = _resolve_endpoints(p, E, x0, x1, shift)
        seed = None
        fa = p.poly(pts[0]) + 1j * shift - E
        if abs(fa) > 1e-8 * (1 + abs(E)):
            s = complex(np.sqrt(fa))
            if ref_seed[0] is None:
                ref_seed[0] = s
            seed = s if abs(s - ref_seed[0]) <= abs(s + ref_seed[0]) else -s
        path = BranchedPath((pts[0], pts[1]), seed, shift)
        return action(p, E, path, abs_tol=1e-12).real

    lo, hi = b_seed - 1.0, b_seed + 1.0
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise CurveError(f"no curve point / bracket exhausted at a = {a:g}")
    b = min(max(b_seed, lo), hi)
    fb = f(b)
    for _ in range(80):
        if abs(fb) <= tol:
            return b
        db = 1e-6 * (1.0 + abs(b))
        fp = (f(b + db) - f(b - db)) / (2 * db)
        b_new = b - fb / fp if fp != 0 else math.nan
        if not (lo < b_new < hi) or not math.isfinite(b_new):
            b_new = 0.5 * (lo + hi)  # bisection safeguard
        fb_new = f(b_new)
        # keep the bracket tight
        if flo * fb_new <= 0:
            hi, fhi = b_new, fb_new
        else:
            lo, flo = b_new, fb_new
        b, fb = b_new, fb_new
    if abs(fb) <= tol:
        return b
    raise CurveError(f"curve solve stalled at a = {a:g}, residual {abs(fb):.2e}")


def asymptote(p: Potential, x0: float, x1: float, shift: float = 0.0) -> float:
    """Large-a height of the curve: Im(Y(x1) - Y(x0))/(x1 - x0) + shift.

    The sign of the shift term follows the piece potential V + i*shift
    directly; it was validated against curve_point at a = 1e3 (the
    handful of displayed formulas in the source material disagree among
    themselves on this sign).
    """
    if x0 == x1:
        raise ValueError("endpoints must differ")
    Y = primitive(Potential(p.coeffs))  # polynomial part only
    return float((Y(float(x1)) - Y(float(x0))).imag / (x1 - x0) + shift)


@dataclass
class SpectralCurve:
    x0: Endpoint
    x1: Endpoint
    shift: float
    samples: np.ndarray          # shape (n, 2): columns a, b with a ascending
    asymptote: float | None = None

    def energies(self) -> np.ndarray:
        return self.samples[:, 0] + 1j * self.samples[:, 1]

    def b_at(self, a: float) -> float:
        return float(np.interp(a, self.samples[:, 0], self.samples[:, 1]))

    def distance(self, z: complex) -> float:
        E = self.energies()
        if len(E) == 1:
            return abs(z - E[0])
        a, b = E[:-1], E[1:]
        d = b - a
        L2 = np.abs(d) ** 2
        t = ((z - a).real * d.real + (z - a).imag * d.imag) / np.where(L2 > 0, L2, 1.0)
        t = np.clip(t, 0.0, 1.0)
        return float(np.min(np.abs(z - (a + t * d))))

    def to_csv_rows(self):
        return [(float(a), float(b)) for a, b in self.samples]


def trace_curve(p: Potential, x0: Endpoint, x1: Endpoint, shift: float,
                a_min: float, a_max: float, step: float,
                b_seed: float | None = None, tol: float = 1e-9,
                enforce_threshold: bool = True) -> SpectralCurve:
    """Graph-form continuation of b(a) over [a_min, a_max].

    Predictor is the previous height, corrector is curve_point; the step
    halves on corrector failure down to step/64.
    """
    b_inf = None
    if not isinstance(x0, str) and not isinstance(x1, str):
        b_inf = asymptote(p, float(x0), float(x1), shift)
    if b_seed is None:
        if b_inf is None:
            raise ValueError("b_seed required for moving endpoints")
        b_seed = b_inf
    samples = []
    a = a_min
    b = curve_point(p, x0, x1, shift, a, b_seed, tol, enforce_threshold)
    samples.append((a, b))
    cur_step = step
    while a < a_max - 1e-12:
        a_next = min(a + cur_step, a_max)
        try:
            b_next = curve_point(p, x0, x1, shift, a_next, b, tol, enforce_threshold)
        except CurveError:
            if cur_step <= step / 64:
                raise
            cur_step *= 0.5
            continue
        a, b = a_next, b_next
        samples.append((a, b))
        cur_step = min(step, cur_step * 2)
    return SpectralCurve(x0, x1, shift, np.array(samples), b_inf)


# -- the quadratic Y-shape ------------------------------------------------


@dataclass
class YShape:
    ray: SpectralCurve       # between the two moving turning points
    arc: SpectralCurve       # moving turning point to the right endpoint
    infinite: SpectralCurve  # the interval curve, junction outward
    lambda0: float
    junction: complex

    def curves(self):
        return [self.ray, self.arc, self.infinite]

    def distance(self, z: complex) -> float:
        return min(c.distance(z) for c in self.curves())

    def to_json(self) -> dict:
        def dump(c: SpectralCurve, name):
            return {"name": name, "x0": str(c.x0), "x1": str(c.x1),
                    "shift": c.shift,
                    "samples": [[a, b] for a, b in c.to_csv_rows()],
                    "asymptote": c.asymptote}
        return {
            "lambda0": self.lambda0,
            "junction": [self.junction.real, self.junction.imag],
            "curves": [dump(self.ray, "ray"), dump(self.arc, "arc"),
                       dump(self.infinite, "infinite")],
        }


def _require_quadratic(p: Potential):
    if not (p.degree == 2 and p.coeffs[0] == 0 and p.coeffs[1] == 0 and not p.jumps):
        raise ValueError("the Y-shape construction is specific to V = c*x^2")


def junction_lambda0(p: Potential | None = None, tol: float = 1e-10,
                     lam_max: float = 20.0) -> float:
    """Radius of the triple junction on the diagonal ray, by bisection.

    The scalar function is Re S from the right moving turning point to 1
    at E = lam * e^{i pi/4}; a missing sign change on (0, lam_max] would
    contradict the three-curve picture and is surfaced loudly.
    """
    p = p if p is not None else Potential((0, 0, 1j))
    _require_quadratic(p)
    phase = np.exp(1j * np.pi / 4)

    def g(lam):
        return re_action(p, lam * phase, "alpha+", 1.0).real

    lams = np.linspace(0.05, lam_max, 120)
    vals = [g(l) for l in lams]
    bracket = None
    for l0, l1, v0, v1 in zip(lams, lams[1:], vals, vals[1:]):
        if v0 == 0.0:
            return float(l0)
        if v0 * v1 < 0:
            bracket = (l0, l1, v0, v1)
            break
    if bracket is None:
        raise CurveError(
            "no sign change of Re S_{alpha+,1} on the diagonal ray: "
            "junction not found (this contradicts the expected geometry)")
    a, b, fa, fb = bracket
    while b - a > tol:
        m = 0.5 * (a + b)
        fm = g(m)
        if fa * fm <= 0:
            b, fb = m, fm
        else:
            a, fa = m, fm
    return float(0.5 * (a + b))


def _terminate_at_junction(F, G, E_prev, E_next, tol=1e-9):
    """Point on the F=0 curve between E_prev and E_next where G crosses zero.

    Walks the chord, re-correcting onto F=0 transversally at each trial.
    """
    t_hat = (E_next - E_prev) / abs(E_next - E_prev)
    n_hat = 1j * t_hat

    def on_curve(t):
        E = E_prev + t * (E_next - E_prev)
        return _correct_transverse(F, E, n_hat, abs(E_next - E_prev), tol)

    lo, hi = 0.0, 1.0
    Elo = on_curve(lo)
    glo = G(Elo)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        Em = on_curve(mid)
        gm = G(Em)
        if abs(gm) <= tol:
            return Em
        if glo * gm <= 0:
            hi = mid
        else:
            lo, glo, Elo = mid, gm, Em
    return on_curve(0.5 * (lo + hi))


def _correct_transverse(F, E0, n_hat, scale, tol, max_iter=40):
    """Secant solve of F(E0 + s*n_hat) = 0 in the transverse parameter s."""
    s0, s1 = 0.0, 0.05 * scale
    f0 = F(E0)
    if abs(f0) <= tol:
        return E0
    f1 = F(E0 + s1 * n_hat)
    for _ in range(max_iter):
        if abs(f1) <= tol:
            return E0 + s1 * n_hat
        if f1 == f0:
            break
        s2 = s1 - f1 * (s1 - s0) / (f1 - f0)
        if not math.isfinite(s2) or abs(s2) > 10 * scale:
            break
        s0, f0, s1 = s1, f1, s2
        f1 = F(E0 + s1 * n_hat)
    raise CurveError(f"transverse correction failed near E = {E0:.6g}")


def trace_arc_to_junction(p: Potential, junction: complex, step: float = 0.02,
                          tol: float = 1e-9) -> SpectralCurve:
    """The finite curve from the degenerate energy i*c-scale to the junction.

    Pseudo-arclength continuation of Re S_{alpha+, 1} = 0 starting at the
    energy where the moving turning point coincides with the endpoint 1
    (E = i for V = i x^2); terminates where Re S between the two turning
    points changes sign, which is the junction.
    """
    _require_quadratic(p)
    E_start = p.coeffs[2] * 1.0  # V(1): turning point alpha+ equals 1 there
    prev_alpha = [None, None]

    def F(E):
        S = re_action(p, E, "alpha+", 1.0, prev=(prev_alpha[0], None))
        return S.real

    def G(E):
        return re_action(p, E, "alpha-", "alpha+").real

    # probe a small circle for the exit direction, preferring the one
    # aimed at the junction
    r0 = 2e-3
    angles = np.linspace(0, 2 * math.pi, 181)[:-1]
    vals = np.array([F(E_start + r0 * np.exp(1j * t)) for t in angles])
    roots = []
    for t0, t1, v0, v1 in zip(angles, np.roll(angles, -1),
                              vals, np.roll(vals, -1)):
        if t1 < t0:
            t1 += 2 * math.pi
        if v0 == 0.0:
            roots.append(t0)
        elif v0 * v1 < 0:
            a, b, fa = t0, t1, v0
            for _ in range(50):
                m = 0.5 * (a + b)
                fm = F(E_start + r0 * np.exp(1j * m))
                if fa * fm <= 0:
                    b = m
                else:
                    a, fa = m, fm
            roots.append(0.5 * (a + b))
    if not roots:
        raise CurveError("no curve exits the degenerate energy")
    aim = np.angle(junction - E_start)
    theta = min(roots, key=lambda t: abs((t - aim + math.pi) % (2 * math.pi) - math.pi))
    E1 = E_start + r0 * np.exp(1j * theta)

    pts = [E_start, E1]
    ds = step
    while True:
        t_hat = (pts[-1] - pts[-2]) / abs(pts[-1] - pts[-2])
        rem = abs(pts[-1] - junction)
        if rem < max(1e-4, 0.5 * step / 64):
            break
        ds_eff = min(ds, max(rem * 0.5, 1e-4))
        E_pred = pts[-1] + ds_eff * t_hat
        try:
            E_new = _correct_transverse(F, E_pred, 1j * t_hat, ds_eff, tol)
        except CurveError:
            if ds <= step / 64:
                raise
            ds *= 0.5
            continue
        if G(E_new) * G(pts[-1]) < 0:
            pts.append(_terminate_at_junction(
                lambda E: F(E), G, pts[-1], E_new, tol))
            break
        pts.append(E_new)
        ds = min(step, ds * 2)
        if len(pts) > 100000:
            raise CurveError("arc continuation did not terminate")
    arr = np.array([(E.real, E.imag) for E in pts])
    return SpectralCurve("alpha+", 1.0, 0.0, arr, None)


def trace_infinite_from_junction(p: Potential, junction: complex,
                                 a_max: float = 25.0, step: float = 0.25,
                                 tol: float = 1e-9) -> SpectralCurve:
    """The interval curve from the junction out to a_max, graph form.

    Runs the guarded continuation above the large-energy threshold and an
    unguarded descent (uniqueness verified by the junction termination)
    below it, stitching the two at the threshold.
    """
    _require_quadratic(p)
    b_inf = asymptote(p, -1.0, 1.0, 0.0)
    a_hi = max(min_large_a(p), junction.real + 0.5)
    upper = trace_curve(p, -1.0, 1.0, 0.0, a_hi, a_max, step, b_inf, tol)

    def G(E):
        return re_action(p, E, "alpha-", "alpha+").real

    samples = []
    a, b = upper.samples[0]
    g_prev = G(a + 1j * b)
    fine = 0.02
    while True:
        a_next = a - fine
        b_next = curve_point(p, -1.0, 1.0, 0.0, a_next, b, tol,
                             enforce_threshold=False)
        g_next = G(a_next + 1j * b_next)
        if g_prev * g_next < 0:
            E_j = _terminate_at_junction(
                lambda E: re_action(p, E, -1.0, 1.0).real, G,
                a + 1j * b, a_next + 1j * b_next, tol)
            samples.append((E_j.real, E_j.imag))
            break
        a, b, g_prev = a_next, b_next, g_next
        samples.append((a, b))
        if a < junction.real - 1.0:
            raise CurveError("descent missed the junction")
    samples.reverse()
    all_samples = np.vstack([np.array(samples), upper.samples])
    return SpectralCurve(-1.0, 1.0, 0.0, all_samples, b_inf)


def y_shape(p: Potential | None = None, lam_step: float = 0.02,
            a_max: float = 25.0, step: float = 0.25) -> YShape:
    """Assemble the three-curve set for the quadratic potential."""
    p = p if p is not None else Potential((0, 0, 1j))
    _require_quadratic(p)
    lam0 = junction_lambda0(p)
    phase = np.exp(1j * math.pi / 4)
    junction = lam0 * phase

    lams = np.arange(0.0, lam0, lam_step)
    lams = np.append(lams, lam0)
    ray_samples = np.array([(l * phase.real, l * phase.imag) for l in lams])
    ray = SpectralCurve("alpha-", "alpha+", 0.0, ray_samples, None)

    arc = trace_arc_to_junction(p, junction, step=lam_step)
    infinite = trace_infinite_from_junction(p, junction, a_max=a_max, step=step)
    return YShape(ray, arc, infinite, lam0, junction)
