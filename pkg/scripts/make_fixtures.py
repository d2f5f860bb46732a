#!/usr/bin/env python3
"""Regenerate the frozen oracle fixtures.

The quadrature here is deliberately independent of the package's adaptive
Gauss-Kronrod machinery: plain composite fixed-order Gauss-Legendre panels
evaluated in mpmath arithmetic, with explicit branch tracking, plus a
bisection for the junction radius.  Run from the repository root:

    python3 scripts/make_fixtures.py
"""

import json
import pathlib
import sys

import mpmath as mp
import numpy as np
from numpy.polynomial.legendre import leggauss

mp.mp.dps = 35

NODES, WEIGHTS = leggauss(8)


def composite(f, n_panels):
    """Composite 8-point Gauss-Legendre of f over [0, 1] in mpf arithmetic."""
    total = mp.mpc(0)
    width = mp.mpf(1) / n_panels
    for k in range(n_panels):
        mid = (mp.mpf(k) + mp.mpf("0.5")) * width
        for x, w in zip(NODES, WEIGHTS):
            t = mid + mp.mpf(x) * width / 2
            total += mp.mpf(w) * f(t)
    return total * width / 2


def action_straight_ix2(E, n_panels=10000):
    """S along [-1, 1] for V = i x^2, branch matching the principal root
    at the left endpoint.  Since Re(E - V) > 0 on the path for the E used,
    i*sqrt(E - V) with the principal root is the continuous branch."""
    E = mp.mpc(E)

    def f(s):
        t = -1 + 2 * s
        return 2 * mp.mpc(0, 1) * mp.sqrt(E - mp.mpc(0, 1) * t * t)

    start = mp.sqrt(mp.mpc(0, 1) - E)  # principal root of V(-1) - E
    alt = mp.mpc(0, 1) * mp.sqrt(E - mp.mpc(0, 1))
    assert mp.fabs(start - alt) < mp.fabs(start + alt), "branch mismatch at -1"
    return composite(f, n_panels)


def action_tp_to_one_ix2(lam, n_panels=1500):
    """S from the right turning point to 1 at E = lam*exp(i pi/4), V = i x^2.

    Quadratic substitution regularizes the square-root endpoint; the branch
    is anchored to the principal root at t = 1 and tracked by sign
    continuity along the path.
    """
    lam = mp.mpf(lam)
    E = lam * mp.exp(mp.mpc(0, mp.pi / 4))
    alpha = mp.sqrt(-mp.mpc(0, 1) * E)  # principal; the right turning point
    seg = mp.mpc(1) - alpha

    state = {"ref": None}

    def f(s):
        # s runs 1 -> 0 in panel order below; t = alpha + s^2 * seg
        t = alpha + s * s * seg
        val = mp.sqrt(mp.mpc(0, 1) * t * t - E)
        ref = state["ref"]
        if ref is not None and mp.fabs(val - ref) > mp.fabs(val + ref):
            val = -val
        if ref is None:
            anchor = mp.sqrt(mp.mpc(0, 1) - E)  # principal at t = 1
            if mp.fabs(val - anchor) > mp.fabs(val + anchor):
                val = -val
        state["ref"] = val
        return val * 2 * s * seg

    # integrate from s = 1 down to 0 so the branch anchor comes first
    total = mp.mpc(0)
    width = mp.mpf(1) / n_panels
    for k in range(n_panels - 1, -1, -1):
        mid = (mp.mpf(k) + mp.mpf("0.5")) * width
        panel = mp.mpc(0)
        for x, w in zip(NODES, WEIGHTS):
            t = mid + mp.mpf(x) * width / 2
            panel += mp.mpf(w) * f(t)
        total += panel * width / 2
    return total  # integral over s in [0,1] equals S_{alpha,1}


def bisect_lambda0(tol=mp.mpf("1e-12")):
    g = lambda lam: mp.re(action_tp_to_one_ix2(lam))
    a, b = mp.mpf("0.3"), mp.mpf("0.6")
    fa, fb = g(a), g(b)
    assert fa * fb < 0, "no bracket for the junction radius"
    while b - a > tol:
        m = (a + b) / 2
        fm = g(m)
        if fa * fm <= 0:
            b, fb = m, fm
        else:
            a, fa = m, fm
    return (a + b) / 2


def main():
    out = {}

    E = mp.mpc(10, mp.mpf(1) / 3)
    S = action_straight_ix2(E)
    S_check = action_straight_ix2(E, n_panels=20000)
    assert mp.fabs(S - S_check) < mp.mpf("1e-20"), mp.nstr(mp.fabs(S - S_check))
    out["action_ix2_E_10_i3"] = {
        "potential": {"coeffs": [[0, 0], [0, 0], [0, 1]], "jumps": []},
        "E": [10.0, float(mp.mpf(1) / 3)],
        "path": [[-1.0, 0.0], [1.0, 0.0]],
        "branch": "principal at start",
        "value": [float(mp.re(S)), float(mp.im(S))],
        "method": "composite 8-point Gauss-Legendre, 10000 panels, 35 dps",
    }

    lam0 = bisect_lambda0()
    resid = mp.re(action_tp_to_one_ix2(lam0, n_panels=4000))
    out["lambda0_ix2"] = {
        "value": float(lam0),
        "residual_at_value": float(resid),
        "method": "bisection at 1e-12 on Re S(turning point -> 1) along the "
                  "diagonal ray; composite Gauss-Legendre in mpmath",
    }
    junction = lam0 * mp.exp(mp.mpc(0, mp.pi / 4))
    S11 = action_straight_ix2(junction, n_panels=4000)
    out["junction_interval_residual"] = float(mp.re(S11))

    dest = pathlib.Path(__file__).resolve().parents[1] / "src" / "stokescope" / \
        "fixtures" / "oracles.json"
    dest.parent.mkdir(parents=True, exist_ok=True)
    dest.write_text(json.dumps(out, indent=2) + "\n")
    print(f"wrote {dest}")
    print("action:", mp.nstr(S, 20))
    print("lambda0:", mp.nstr(lam0, 18), " residual:", mp.nstr(resid, 5))
    print("Re S_{-1,1}(junction):", mp.nstr(mp.re(S11), 5))


if __name__ == "__main__":
    sys.exit(main())
