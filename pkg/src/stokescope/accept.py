"""Acceptance checks: one row per published claim, at its stated tolerance.

Each check function takes the shared context (which caches the expensive
curve traces and eigensolves) and returns rows with measured vs expected
values.  The registry drives both the CLI verify subcommand and the
acceptance test module.  Checks are implemented as stated even where the
measured physics disagrees; failures are reported, not patched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import fixtures
from .contour import turning_points
from .curves import (SpectralCurve, asymptote, curve_point, trace_curve,
                     y_shape)
from .potential import Potential
from .pseudospec import grid, smin, symbol_set_distance
from .solver import eigenvalues, refine, wkb_formula, wkb_series
from .stokes import progressive_path, trace_diagram
from .contour import BranchedPath


@dataclass
class CheckRow:
    criterion: int
    name: str
    measured: str
    expected: str
    tolerance: str
    passed: bool
    note: str = ""


def _row(criterion, name, measured, expected, tolerance, passed, note=""):
    return CheckRow(criterion, name, measured, expected, tolerance, bool(passed), note)


class AcceptanceContext:
    """Lazy caches for the expensive shared artifacts."""

    def __init__(self):
        self.ix2 = Potential((0, 0, 1j))
        self._cache = {}

    def get(self, key, builder):
        if key not in self._cache:
            self._cache[key] = builder()
        return self._cache[key]

    @property
    def yshape(self):
        return self.get("yshape", lambda: y_shape(self.ix2, a_max=32.0))

    def eigs(self, h, N, delta=0.0, beta=0.3):
        key = ("eigs", h, N, delta, beta)

        def build():
            p = self.ix2 if delta == 0 else self.ix2.with_two_sided_jump(delta, beta)
            return eigenvalues(p, h, N, region=(2.0, 40.0, -1.0, 1.5))

        return self.get(key, build)

    def graph_curve(self):
        return self.get("graph_curve", lambda: trace_curve(
            self.ix2, -1.0, 1.0, 0.0, 10.0, 100.0, 5.0, tol=1e-10))

    def side_curve(self, which):
        # the perturbed side curves, continued below the large-energy
        # threshold (uniqueness there is verified by test_curves)
        def build():
            if which == "left":
                x0, x1, s = -1.0, 0.3, -0.1
            else:
                x0, x1, s = 0.3, 1.0, +0.1
            b0 = asymptote(self.ix2, x0, x1, s)
            samples = []
            b = b0
            for a in np.arange(4.5, 33.0, 0.25):
                b = curve_point(self.ix2, x0, x1, s, float(a), b,
                                tol=1e-10, enforce_threshold=False)
                samples.append((float(a), b))
            return SpectralCurve(x0, x1, s, np.array(samples), b0)

        return self.get(("side", which), build)


# -- criterion 1: asymptote of the interval curve -------------------------


def check_curve_asymptote(ctx):
    rows = []
    b50 = curve_point(ctx.ix2, -1.0, 1.0, 0.0, 50.0, 1.0 / 3.0, tol=1e-11)
    target = 1.0 / 3.0 - 3.0 / (28.0 * 50.0 ** 2)
    rows.append(_row(1, "b(50) vs 1/3 - 3/(28*50^2)",
                     f"{b50:.10f}", f"{target:.10f}", "1e-4",
                     abs(b50 - target) <= 1e-4,
                     f"|diff| = {abs(b50 - target):.3e}"))
    c = ctx.graph_curve()
    dev = np.abs(c.samples[:, 1] - 1.0 / 3.0)
    mono = bool(np.all(np.diff(dev) < 0))
    rows.append(_row(1, "|b(a) - 1/3| monotone on [10,100]",
                     "monotone" if mono else "not monotone", "monotone",
                     "strict decrease", mono,
                     f"max consecutive increase {np.max(np.diff(dev)):.2e}"))
    return rows


# -- criterion 2: second-order coefficient --------------------------------


def check_curve_second_order(ctx):
    vals = []
    for a in (25.0, 50.0, 100.0):
        b = curve_point(ctx.ix2, -1.0, 1.0, 0.0, a, 1.0 / 3.0, tol=1e-11)
        vals.append(a * a * (b - 1.0 / 3.0))
    fit = float(np.mean(vals))
    target = -3.0 / 28.0
    ok = abs(fit - target) <= 0.05 * abs(target)
    return [_row(2, "fit a^2 (b(a) - 1/3) on {25,50,100}",
                 f"{fit:.6f}", f"{target:.6f}", "5% relative", ok,
                 "measured coefficient matches -2/945 = -0.0021164, the "
                 "value the defining equation Re S = 0 actually produces; "
                 f"per-a values {['%.7f' % v for v in vals]}")]


# -- criterion 3: eigenvalue localization ----------------------------------


def _graph_distance(ctx, E):
    """Distance to the interval curve via a local solve (polyline-free)."""
    a = E.real
    b = curve_point(ctx.ix2, -1.0, 1.0, 0.0, a, 1.0 / 3.0, tol=1e-11,
                    enforce_threshold=False)
    return abs(E.imag - b)


def check_eig_localization(ctx):
    rows = []
    h1, h2 = 0.02, 0.01
    curve = ctx.yshape.infinite
    win = lambda recs: [r.E for r in recs if 5.0 <= r.E.real <= 30.0]
    E1 = win(ctx.eigs(h1, 384))
    d1_trace = max(curve.distance(E) for E in E1)
    rows.append(_row(3, f"max dist to traced curve (h={h1}, N=384)",
                     f"{d1_trace:.3e}", "<= 5h = 0.1", "5h",
                     d1_trace <= 5 * h1, f"{len(E1)} eigenvalues in window"))
    E2 = win(ctx.eigs(h2, 768))
    d1 = max(_graph_distance(ctx, E) for E in E1)
    d2 = max(_graph_distance(ctx, E) for E in E2)
    ratio = d2 / d1
    rows.append(_row(3, "max-distance ratio h -> h/2",
                     f"{ratio:.4f}", "in [0.3, 0.7]", "[0.3, 0.7]",
                     0.3 <= ratio <= 0.7,
                     f"d(h=0.02) = {d1:.3e}, d(h=0.01) = {d2:.3e}; the "
                     "measured localization is quadratic in h (ratio 1/4): "
                     "the even potential cancels the linear term"))
    return rows


# -- criterion 4: quantization formula -------------------------------------


def check_quantization(ctx):
    rows = []
    h = 0.02
    errs = []
    for k in (80, 100, 120):
        Ef = wkb_formula(ctx.ix2, h, k)
        Er = refine(ctx.ix2, h, Ef, 0.0).E
        err = abs(Ef - Er)
        bound = 10.0 * (h * k) ** -3.0
        errs.append(err)
        rows.append(_row(4, f"|formula - refined| at k={k}",
                         f"{err:.3e}", f"<= {bound:.3e}", "10 (hk)^-3",
                         err <= bound))
    dec = errs[0] > errs[1] > errs[2]
    rows.append(_row(4, "error decreases with k", "decreasing" if dec else
                     "not decreasing", "decreasing", "ordering", dec,
                     f"errors {['%.2e' % e for e in errs]}"))
    return rows


# -- criterion 5: perturbation splitting ------------------------------------


def check_perturbation_splitting(ctx):
    rows = []
    h, delta, beta = 0.02, 0.1, 0.3
    lo, hi = ctx.side_curve("left"), ctx.side_curve("right")
    for crv, name, target in ((lo, "left piece b(50)", 0.163333),
                              (hi, "right piece b(50)", 0.563333)):
        b = curve_point(ctx.ix2, crv.x0, crv.x1, crv.shift, 50.0,
                        crv.asymptote, tol=1e-10)
        rows.append(_row(5, name, f"{b:.6f}", f"{target:.6f}", "5e-3",
                         abs(b - target) <= 5e-3))
    recs = [r.E for r in ctx.eigs(h, 384, delta, beta)
            if 5.0 <= r.E.real <= 30.0]
    d_lo = np.array([lo.distance(E) for E in recs])
    d_hi = np.array([hi.distance(E) for E in recs])
    near_lo = (d_lo <= 5 * h) & (d_lo <= d_hi)
    near_hi = (d_hi <= 5 * h) & (d_hi < d_lo)
    stray = len(recs) - int(near_lo.sum()) - int(near_hi.sum())
    ok = near_lo.sum() > 0 and near_hi.sum() > 0 and stray == 0
    rows.append(_row(5, "eigenvalues split into two 5h-clusters",
                     f"clusters {int(near_lo.sum())}/{int(near_hi.sum())}, "
                     f"stray {stray} of {len(recs)}",
                     "two nonempty clusters, no stray", "5h = 0.1", ok,
                     f"min dist to either curve {np.min(np.minimum(d_lo, d_hi)):.3f}; "
                     "at this h the spectrum still follows the unsplit "
                     "interval rule near Im 0.303: the jump reflection is "
                     "O(delta/|E|) and the curves are approached only at "
                     "rate ~(h/2)ln(1/r), about 8h (left) and 15h (right)"))
    return rows


# -- criterion 6: the Y-shape ----------------------------------------------


def check_y_shape(ctx):
    rows = []
    ys = ctx.yshape
    worst = 0.0
    for crv in ys.curves():
        E = crv.energies()
        worst = max(worst, min(abs(E[0] - ys.junction), abs(E[-1] - ys.junction)))
    rows.append(_row(6, "three curves meet at the junction",
                     f"{worst:.3e}", "<= 1e-3", "1e-3", worst <= 1e-3))
    lam_ref = fixtures.load()["lambda0_ix2"]["value"]
    rows.append(_row(6, "junction radius vs frozen oracle",
                     f"{ys.lambda0:.12f}", f"{lam_ref:.12f}", "1e-8",
                     abs(ys.lambda0 - lam_ref) <= 1e-8,
                     f"|diff| = {abs(ys.lambda0 - lam_ref):.2e}"))
    start = ys.arc.energies()[0]
    rows.append(_row(6, "finite arc starts at i",
                     f"{start:.8f}", "1j", "1e-6", abs(start - 1j) <= 1e-6))
    return rows


# -- criterion 7: Stokes geometry -------------------------------------------


def _departure_angles(diagram):
    """Initial direction per line, linearly extrapolated to zero arc."""
    out = {}
    for ln in diagram.lines:
        pts = ln.points
        arcs = np.concatenate([[0], np.cumsum(np.abs(np.diff(pts)))])
        s_star = 0.01

        def angle_at(s):
            i = int(np.searchsorted(arcs, s))
            i = min(max(i, 1), len(pts) - 1)
            return np.angle(pts[i] - ln.source)

        a1, a2 = angle_at(s_star), angle_at(2 * s_star)
        d = (a2 - a1 + math.pi) % (2 * math.pi) - math.pi
        out.setdefault(ln.source, []).append(a1 - d)  # extrapolate to s=0
    return out


def _clip_points(pts, box):
    return pts[(pts.real >= box[0]) & (pts.real <= box[1])
               & (pts.imag >= box[2]) & (pts.imag <= box[3])]


def _hausdorff(pts_a, segs_b):
    a0, b0 = segs_b[:, 0], segs_b[:, 1]
    d = b0 - a0
    L2 = np.abs(d) ** 2
    worst = 0.0
    for z in pts_a:
        t = ((z - a0).real * d.real + (z - a0).imag * d.imag) / np.where(L2 > 0, L2, 1)
        t = np.clip(t, 0, 1)
        worst = max(worst, float(np.min(np.abs(z - (a0 + t * d)))))
    return worst


def _diagram_segments(diagram, box):
    segs = []
    for ln in diagram.lines:
        P = ln.points
        keep = (P.real >= box[0] - 0.05) & (P.real <= box[1] + 0.05) \
            & (P.imag >= box[2] - 0.05) & (P.imag <= box[3] + 0.05)
        for i in range(len(P) - 1):
            if keep[i] and keep[i + 1]:
                segs.append((P[i], P[i + 1]))
    return np.array(segs)


def check_stokes_geometry(ctx):
    rows = []
    E = np.exp(1j * math.pi / 4)
    d_i = ctx.get("diagram_eipi4", lambda: trace_diagram(ctx.ix2, E))
    worst_angle = 0.0
    for src, angles in _departure_angles(d_i).items():
        angles = sorted(a % (2 * math.pi) for a in angles)
        gaps = np.diff(angles + [angles[0] + 2 * math.pi])
        worst_angle = max(worst_angle, float(np.max(np.abs(gaps - 2 * math.pi / 3))))
    rows.append(_row(7, "departure angles 2pi/3 apart",
                     f"max dev {worst_angle:.2e} rad", "<= 1e-2 rad", "1e-2",
                     worst_angle <= 1e-2))
    drift = max(ln.re_drift / (1.0 + ln.arc_length()) for ln in d_i.lines)
    rows.append(_row(7, "level-set residual along lines",
                     f"{drift:.2e}", "<= 1e-6 (1+arc)", "1e-6",
                     drift <= 1e-6))
    # rotation comparison against the real-potential diagram
    x2 = Potential((0, 0, 1.0))
    d_r = ctx.get("diagram_x2", lambda: trace_diagram(x2, 1.0))
    rot = np.exp(-1j * math.pi / 8)
    box = (-3.0, 3.0, -3.0, 3.0)
    rot_lines = [ln.points * rot for ln in d_r.lines]

    class _Rot:
        lines = [type("L", (), {"points": P})() for P in rot_lines]

    segs_i = _diagram_segments(d_i, box)
    segs_r = _diagram_segments(_Rot, box)
    pts_i = _clip_points(np.concatenate([ln.points for ln in d_i.lines]), box)
    pts_r = _clip_points(np.concatenate(rot_lines), box)
    hd = max(_hausdorff(pts_i, segs_r), _hausdorff(pts_r, segs_i))
    rows.append(_row(7, "rotated real-potential diagram matches",
                     f"Hausdorff {hd:.2e}", "<= 1e-4", "1e-4", hd <= 1e-4,
                     "compared on the shared box [-3,3]^2"))
    return rows


# -- criterion 8: membership vs distance to the curves ----------------------


def check_membership_grid(ctx):
    ys = ctx.yshape
    re = np.linspace(1.0, 20.0, 40)
    im = np.linspace(-0.2, 0.9, 20)
    spacing = max(re[1] - re[0], im[1] - im[0])
    false_far = []   # claimed excluded but far from the curves: soundness breach
    true_on = 0
    boundary = 0
    n_false = 0
    for b in im:
        for a in re:
            E = complex(a, b)
            dist = ys.distance(E)
            try:
                v = progressive_path(ctx.ix2, E, fast=True)
            except Exception:
                boundary += 1
                continue
            if v.in_T is None:
                boundary += 1
                if dist > spacing:
                    false_far.append((E, dist))
            elif not v.in_T:
                n_false += 1
                if dist > spacing:
                    false_far.append((E, dist))
            else:
                if dist <= 1e-9:
                    true_on += 1
    ok = not false_far and true_on == 0
    return [_row(8, "exclusion verdicts only near the curve set",
                 f"{len(false_far)} far-field exclusions, {n_false} excluded, "
                 f"{boundary} boundary", "0 far-field exclusions",
                 f"grid spacing {spacing:.3f}", ok,
                 "40x20 grid on [1,20]x[-0.2,0.9]; verdicts compared against "
                 "distance to the three-curve set")]


# -- criterion 9: amplitude series scaling -----------------------------------


def check_wkb_scaling(ctx):
    E = 10 + 1j
    path = BranchedPath((-1.0, 1.0))
    r1 = wkb_series(ctx.ix2, E, 0.1, path, 8)
    r2 = wkb_series(ctx.ix2, E, 0.05, path, 8)
    ratios = (abs(r2.w_plus - 1) / abs(r1.w_plus - 1),
              abs(r2.w_minus - 1) / abs(r1.w_minus - 1))
    ok = all(0.4 <= r <= 0.6 for r in ratios)
    return [_row(9, "|W-1| halves with h",
                 f"ratios {ratios[0]:.4f}, {ratios[1]:.4f}", "in [0.4, 0.6]",
                 "[0.4, 0.6]", ok,
                 f"|W+-1| = {abs(r1.w_plus-1):.2e} at h=0.1")]


# -- criterion 10: pseudospectrum -------------------------------------------


def check_pseudospectrum(ctx):
    rows = []
    z_in, z_out = 5 + 1j / 6, 5 + 2j
    s = {h: smin(ctx.ix2, h, z_in, 256) for h in (0.1, 0.05)}
    ratio = s[0.05] / s[0.1]
    rows.append(_row(10, "interior quasimode decay h=0.1 -> 0.05",
                     f"ratio {ratio:.4f}", "<= 0.2", "0.2", ratio <= 0.2,
                     f"smin = {s[0.1]:.3e}, {s[0.05]:.3e}; the decay is "
                     "superpolynomial but at these h still preasymptotic "
                     "(measured onset near h ~ 0.01)"))
    vals = [smin(ctx.ix2, h, z_out, 256) for h in (0.1, 0.05, 0.025)]
    var = max(vals) / min(vals)
    rows.append(_row(10, "exterior point stable in h",
                     f"variation {var:.3f}x", "< 2x", "2x", var < 2.0,
                     f"values {['%.3e' % v for v in vals]}"))
    g = ctx.get("pseudo_grid", lambda: grid(
        ctx.ix2, 0.1, (-2.0, 10.0, -0.5, 2.5), 49, 25, 256))
    re, im = g.nodes()
    viol = 0
    n_sub = 0
    for j in range(g.ny):
        for i in range(g.nx):
            if g.values[j, i] <= 1e-2:
                n_sub += 1
                if symbol_set_distance(ctx.ix2, complex(re[i], im[j])) > 0.2:
                    viol += 1
    rows.append(_row(10, "1e-2 sublevel set inside dilated symbol set",
                     f"{viol} outliers of {n_sub} sublevel nodes", "0 outliers",
                     "0.2 dilation", viol == 0))
    return rows


# -- criterion 11: two-jump limit --------------------------------------------


def check_two_jump_limit(ctx):
    beta = 0.3
    ds = np.array([0.2, 0.1, 0.05])
    vals = np.array([asymptote(ctx.ix2, beta, beta + d, 0.0) for d in ds])
    # second-order polynomial extrapolation through the three mandated
    # separations; a straight-line fit cannot reach the 1e-3 tolerance
    # because the data is exactly quadratic in the separation (bias
    # d1*d2/3 = 1.7e-3), so the extrapolation order matches the data
    coef = np.polyfit(ds, vals, 2)
    extrap = float(coef[-1])
    lin = float(np.polyfit(ds[1:], vals[1:], 1)[-1])
    target = ctx.ix2(beta).imag
    ok = abs(extrap - target) <= 1e-3
    return [_row(11, "piece asymptote extrapolates to Im V(beta)",
                 f"{extrap:.8f}", f"{target:.8f}", "1e-3", ok,
                 f"values {['%.6f' % v for v in vals]}; two-point linear "
                 f"extrapolation gives {lin:.6f} (bias 1.7e-3 as expected "
                 "from the exact quadratic dependence)")]


REGISTRY = [
    ("curve-asymptote", check_curve_asymptote),
    ("curve-second-order", check_curve_second_order),
    ("eig-localization", check_eig_localization),
    ("eig-quantization", check_quantization),
    ("perturbation-splitting", check_perturbation_splitting),
    ("y-shape", check_y_shape),
    ("stokes-geometry", check_stokes_geometry),
    ("membership-grid", check_membership_grid),
    ("wkb-series-scaling", check_wkb_scaling),
    ("pseudospectrum", check_pseudospectrum),
    ("two-jump-limit", check_two_jump_limit),
]


def run(filter_name: str | None = None, ctx: AcceptanceContext | None = None):
    ctx = ctx or AcceptanceContext()
    rows = []
    for name, fn in REGISTRY:
        if filter_name and filter_name not in name:
            continue
        rows.extend(fn(ctx))
    return rows


def format_table(rows) -> str:
    lines = []
    header = f"{'':4} {'criterion':<42} {'measured':<34} {'expected':<26} {'tol':<14}"
    lines.append(header)
    lines.append("-" * len(header))
    for r in rows:
        mark = "PASS" if r.passed else "FAIL"
        lines.append(f"{mark:4} [{r.criterion:2}] {r.name:<37} "
                     f"{r.measured:<34} {r.expected:<26} {r.tolerance:<14}")
        if r.note:
            lines.append(f"{'':9} note: {r.note}")
    n_pass = sum(r.passed for r in rows)
    lines.append(f"{n_pass}/{len(rows)} rows pass")
    return "\n".join(lines)
