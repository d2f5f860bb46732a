"""Dirichlet eigenvalues of -h^2 u'' + V u on [-1, 1].

Four routes are provided and cross-validated: a dense Chebyshev
collocation matrix, a renormalized shooting determinant (the Wronskian
matching condition at an interior point), the explicit three-term
quantization formula, and the quantization condition solved on the
action integral.  A Volterra-type series computes the subexponential
amplitude corrections along progressive paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .contour import BranchedPath, action
from .potential import Potential, primitive


class ShootingError(RuntimeError):
    """Shooting integration failed (step underflow or overflow)."""


class RefineError(RuntimeError):
    """Secant refinement left the basin or failed to converge."""


class NonProgressivePath(ValueError):
    """Path violates strict monotonicity of Re z."""


@dataclass(frozen=True)
class EigenvalueRecord:
    E: complex
    h: float
    method: str  # matrix | shooting | wkb_formula | wkb_quantization
    k: int | None = None
    residual: float = 0.0


@dataclass(frozen=True)
class WkbSeriesResult:
    w_plus: complex
    w_minus: complex
    order: int
    last_term: float
    converged: bool


# -- Chebyshev collocation ----------------------------------------------


def cheb_matrix(N: int):
    """Gauss-Lobatto nodes (descending) and differentiation matrix."""
    if N == 0:
        return np.array([1.0]), np.zeros((1, 1))
    x = np.cos(np.pi * np.arange(N + 1) / N)
    c = np.hstack([2.0, np.ones(N - 1), 2.0]) * (-1) ** np.arange(N + 1)
    X = np.tile(x, (N + 1, 1)).T
    dX = X - X.T
    D = np.outer(c, 1.0 / c) / (dX + np.eye(N + 1))
    D -= np.diag(D.sum(axis=1))
    return x, D


def _second_derivative(a: float, b: float, M: int):
    """Nodes (descending, from b to a) and D^2 for the interval [a, b]."""
    s, D = cheb_matrix(M)
    scale = 2.0 / (b - a)
    x = a + (s + 1.0) / scale
    D = D * scale
    return x, D, D @ D


def discretize(p: Potential, h: float, N: int) -> np.ndarray:
    """(N-1)x(N-1) collocation matrix of -h^2 d^2/dx^2 + V with Dirichlet rows removed.

    Jump potentials are discretized piecewise: one Chebyshev domain per
    smooth piece with u and u' matched at each jump location and the
    interface values condensed out.  A single discontinuous diagonal
    would lose spectral accuracy, which the eigenvalue filter then
    mistakes for noise.
    """
    if N < 16:
        raise ValueError("need N >= 16")
    if h <= 0:
        raise ValueError("need h > 0")
    if not p.jumps:
        x, D = cheb_matrix(N)
        D2 = (D @ D)[1:-1, 1:-1]
        V = np.array([p(complex(t)) for t in x[1:-1]])
        return -h * h * D2 + np.diag(V)
    return _discretize_pieces(p, h, N)


def _discretize_pieces(p: Potential, h: float, N: int) -> np.ndarray:
    edges = [-1.0] + [b for b, _ in p.jumps] + [1.0]
    npieces = len(edges) - 1
    # piece resolutions proportional to length; interface condensation
    # leaves N-1 unknowns, the same count as the single-domain operator
    budget = N + npieces - 1
    sizes = [max(8, int(round(budget * (b - a) / 2.0))) for a, b in zip(edges, edges[1:])]
    sizes[-1] = max(8, budget - sum(sizes[:-1]))

    doms = []
    for (a, b), M in zip(zip(edges, edges[1:]), sizes):
        x, D, D2 = _second_derivative(a, b, M)
        mid = 0.5 * (a + b)
        V = np.array([p.poly(complex(t)) + 1j * p.piece_shift(mid) for t in x])
        doms.append({"x": x, "D": D, "D2": D2, "V": V, "M": M})

    # unknown layout: all piece interiors first, then the interface values
    # (per-piece nodes are descending: index 0 right edge, index M left edge)
    sizes_int = [d["M"] - 1 for d in doms]
    n_int = sum(sizes_int)
    n_iface = npieces - 1
    n = n_int + n_iface
    offs = np.concatenate([[0], np.cumsum(sizes_int)])[:-1]
    iface_idx = [n_int + i for i in range(n_iface)]

    A = np.zeros((n, n), dtype=complex)
    for i, d in enumerate(doms):
        M = d["M"]
        left_val = None if i == 0 else iface_idx[i - 1]
        right_val = None if i == npieces - 1 else iface_idx[i]
        base = offs[i]
        for j in range(1, M):
            row = -h * h * d["D2"][j, :]
            r = base + (j - 1)
            if right_val is not None:
                A[r, right_val] += row[0]
            A[r, base:base + M - 1] += row[1:M]
            if left_val is not None:
                A[r, left_val] += row[M]
            A[r, r] += d["V"][j]

    # derivative continuity u'_left = u'_right at every interface:
    # C u = 0 with u = (interiors, interfaces); solve the small interface
    # block and substitute back (static condensation)
    C = np.zeros((n_iface, n), dtype=complex)
    for i in range(n_iface):
        dl, dr = doms[i], doms[i + 1]
        Ml, Mr = dl["M"], dr["M"]
        # left-piece derivative at its right edge (local node 0)
        C[i, offs[i]:offs[i] + Ml - 1] += dl["D"][0, 1:Ml]
        C[i, iface_idx[i]] += dl["D"][0, 0]
        if i > 0:
            C[i, iface_idx[i - 1]] += dl["D"][0, Ml]
        # minus right-piece derivative at its left edge (local node Mr)
        C[i, offs[i + 1]:offs[i + 1] + Mr - 1] -= dr["D"][Mr, 1:Mr]
        C[i, iface_idx[i]] -= dr["D"][Mr, Mr]
        if i + 1 < n_iface:
            C[i, iface_idx[i + 1]] -= dr["D"][Mr, 0]

    C_int = C[:, :n_int]
    C_ifc = C[:, n_int:]
    G = -np.linalg.solve(C_ifc, C_int)  # u_ifc = G @ u_int
    A_ii = A[:n_int, :n_int]
    A_if = A[:n_int, n_int:]
    return A_ii + A_if @ G


def eigs_of(matrix: np.ndarray) -> np.ndarray:
    """All eigenvalues of a dense complex matrix (LAPACK QR iteration)."""
    return np.linalg.eigvals(matrix)


def eigenvalues(p: Potential, h: float, N: int = 256, region=None) -> list[EigenvalueRecord]:
    """Filtered collocation eigenvalues.

    Every eigenvalue at resolution N is kept only if its nearest match at
    resolution 3N/2 moved by less than 1e-6*(1+|E|); that removes the
    pseudospectral ghosts a non-normal discretization produces.  region,
    when given, is (re_min, re_max, im_min, im_max).
    """
    e1 = eigs_of(discretize(p, h, N))
    e2 = eigs_of(discretize(p, h, (3 * N) // 2))
    out = []
    for E in e1:
        d = float(np.min(np.abs(e2 - E)))
        if d >= 1e-6 * (1 + abs(E)):
            continue
        if region is not None:
            a, b, c, dd = region
            if not (a <= E.real <= b and c <= E.imag <= dd):
                continue
        out.append(EigenvalueRecord(complex(E), h, "matrix", None, d))
    out.sort(key=lambda r: (r.E.real, r.E.imag))
    return out


# -- shooting -----------------------------------------------------------


@dataclass(frozen=True)
class ShootingDet:
    """Scale-free Wronskian with the factored-out magnitude.

    value is the Wronskian of the two normalized endpoint-shot solutions
    (u, h u') at the matching point; it vanishes exactly at eigenvalues
    and its magnitude is O(1) otherwise.  log_scale restores the raw
    Wronskian as value * exp(log_scale).
    """

    value: complex
    log_scale: float


def _integrate_piece(p: Potential, h: float, E: complex, x0: float, x1: float,
                     y: np.ndarray, rtol: float):
    """March (u, u') across one smooth piece, renormalizing between legs."""
    shift = p.piece_shift(0.5 * (x0 + x1))
    coeffs = list(p.coeffs)
    coeffs[0] = coeffs[0] + 1j * shift - E
    rev = np.array(list(reversed(coeffs)))
    h2 = h * h

    def rhs(x, yy):
        u = yy[0] + 1j * yy[1]
        v = yy[2] + 1j * yy[3]
        dv = (np.polyval(rev, x) / h2) * u
        return (yy[2], yy[3], dv.real, dv.imag)

    # ~5 units of possible exponential growth per leg keeps magnitudes tame
    est = math.sqrt(abs(E) + p.max_abs_on_interval()) / h
    nseg = max(4, int(abs(x1 - x0) * est / 40.0) + 1)
    sigma = 0.0
    for a, b in zip(np.linspace(x0, x1, nseg + 1), np.linspace(x0, x1, nseg + 1)[1:]):
        sol = solve_ivp(rhs, (a, b), y, method="DOP853", rtol=rtol, atol=rtol)
        if not sol.success:
            raise ShootingError(f"integration failed near x = {sol.t[-1]:.6g}: {sol.message}")
        y = sol.y[:, -1]
        m = max(abs(y[0] + 1j * y[1]), abs(h * (y[2] + 1j * y[3])))
        if not np.isfinite(m) or m == 0.0:
            raise ShootingError(f"state degenerated near x = {b:.6g}")
        if m > 1e8 or m < 1e-8:
            y = y / m
            sigma += math.log(m)
    return y, sigma


def shooting_det(p: Potential, h: float, E: complex,
                 match_point: float | None = None, rtol: float = 1e-12) -> ShootingDet:
    """Renormalized Wronskian of the two Dirichlet-shot solutions at the match point.

    Integrates u'' = (V - E) u / h^2 from both endpoints with (u, u') =
    (0, 1), splitting at every jump of V so each smooth piece is marched
    separately; zero of the returned value is equivalent to E being an
    eigenvalue.
    """
    if match_point is None:
        match_point = p.jumps[0][0] if p.jumps else 0.0
    if not -1.0 < match_point < 1.0:
        raise ValueError("match point must lie inside (-1, 1)")

    def run(x_from: float, x_to: float):
        y = np.array([0.0, 0.0, 1.0, 0.0])
        sigma = 0.0
        cuts = [b for b, _ in p.jumps if min(x_from, x_to) < b < max(x_from, x_to)]
        cuts.sort(reverse=x_from > x_to)
        pts = [x_from] + cuts + [x_to]
        for a, b in zip(pts, pts[1:]):
            y, ds = _integrate_piece(p, h, E, a, b, y, rtol)
            sigma += ds
        return y, sigma

    yl, sl = run(-1.0, match_point)
    yr, sr = run(1.0, match_point)
    a = np.array([yl[0] + 1j * yl[1], h * (yl[2] + 1j * yl[3])])
    b = np.array([yr[0] + 1j * yr[1], h * (yr[2] + 1j * yr[3])])
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ShootingError("shot solution vanished identically")
    w = (a[0] * b[1] - a[1] * b[0]) / (na * nb)
    return ShootingDet(complex(w), sl + sr + math.log(na) + math.log(nb) - math.log(h))


def refine(p: Potential, h: float, E0: complex, match_point: float | None = None,
           tol: float = 1e-10, max_iter: int = 60) -> EigenvalueRecord:
    """Complex secant iteration on the shooting determinant from seed E0."""
    d0 = shooting_det(p, h, E0, match_point).value
    E1 = E0 * (1 + 1e-6) + 1e-9
    d1 = shooting_det(p, h, E1, match_point).value
    history = [abs(d0), abs(d1)]
    for it in range(max_iter):
        if abs(d1) <= tol:
            return EigenvalueRecord(E1, h, "shooting", None, abs(d1))
        denom = d1 - d0
        if denom == 0:
            raise RefineError("secant stalled (flat determinant)")
        E2 = E1 - d1 * (E1 - E0) / denom
        if not np.isfinite(E2.real) or not np.isfinite(E2.imag) \
                or abs(E2 - E1) > 0.5 * (1 + abs(E1)):
            raise RefineError(f"secant diverged from seed {E0:.6g}")
        d2 = shooting_det(p, h, E2, match_point).value
        history.append(abs(d2))
        if it == 2 and not (history[3] < history[0] or history[3] < tol * 1e3):
            raise RefineError(
                f"seed {E0:.6g} outside basin: |det| not decreasing over first iterates")
        E0, d0, E1, d1 = E1, d1, E2, d2
    if abs(d1) <= tol:
        return EigenvalueRecord(E1, h, "shooting", None, abs(d1))
    raise RefineError(f"no convergence after {max_iter} iterations; |det| = {abs(d1):.3e}")


# -- WKB formulas -------------------------------------------------------


def wkb_formula(p: Potential, h: float, k: int) -> complex:
    """Three-term eigenvalue formula for index k (valid once h*k >= 1)."""
    if h * k < 1.0:
        raise ValueError("formula applies in the regime h*k >= 1")
    Y = primitive(p)
    dY = Y(1.0) - Y(-1.0)
    return (math.pi * h * k / 2.0) ** 2 + dY / 2.0 + dY ** 2 / (2.0 * h * k * math.pi) ** 2


def wkb_quantization(p: Potential, h: float, k: int, E_seed: complex,
                     tol: float = 1e-10, with_corrections: bool = False,
                     max_iter: int = 40) -> complex:
    """Solve S_{-1,1}(E) = i h k pi by complex Newton iteration.

    with_corrections subtracts the series terms (h/2)(ln W+ - ln W-)
    when the series converges; the leading-order condition is the default.
    """
    target = 1j * h * k * math.pi
    # anchor the sheet once: iterates may cross the principal root's cut
    # (real eigenvalues sit exactly on it), and the root must match the
    # sign of +i h k pi
    ref = complex(np.sqrt(p.poly(-1.0) - complex(E_seed)))

    def S_of(E):
        fa = p.poly(-1.0) - E
        seed = None
        if abs(fa) > 1e-8 * (1 + abs(E)):
            s = complex(np.sqrt(fa))
            seed = s if abs(s - ref) <= abs(s + ref) else -s
        return action(p, E, BranchedPath((-1.0, 1.0), seed))

    sign = 1.0 if S_of(complex(E_seed)).imag >= 0 else -1.0

    def F(E):
        val = sign * S_of(E) - target
        if with_corrections:
            res = wkb_series(p, E, h, BranchedPath((-1.0, 1.0)), 6)
            if res.converged and abs(res.w_plus - 1) < 0.5 and abs(res.w_minus - 1) < 0.5:
                val -= 0.5 * h * (np.log(res.w_plus) - np.log(res.w_minus))
        return val

    E = complex(E_seed)
    for _ in range(max_iter):
        f = F(E)
        if abs(f) <= tol:
            return E
        dE = 1e-6 * (1 + abs(E))
        fp = (F(E + dE) - F(E - dE)) / (2 * dE)
        if fp == 0:
            raise RefineError("Newton stalled on quantization condition")
        step = f / fp
        if abs(step) > 0.5 * (1 + abs(E)):
            raise RefineError("Newton step diverged on quantization condition")
        E = E - step
    f = F(E)
    if abs(f) <= tol:
        return E
    raise RefineError(f"quantization Newton did not converge; |F| = {abs(f):.3e}")


# -- Volterra amplitude series ------------------------------------------


def _kernel_coeffs(gamma):
    """(c_a, c_b) with the integral of e^{g(t-1)}(a + b t) dt = a c_a + b c_b."""
    if abs(gamma) < 1e-4:
        ca = 1.0 - gamma / 2.0 + gamma ** 2 / 6.0 - gamma ** 3 / 24.0
        cb = 0.5 - gamma / 6.0 + gamma ** 2 / 24.0
        return ca, cb
    em = np.exp(-gamma)
    return (1.0 - em) / gamma, ((gamma - 1.0) + em) / gamma ** 2


def _sample_path(p: Potential, E: complex, path: BranchedPath, m: int):
    """Path samples, branch values and cumulative z at resolution m per unit length."""
    verts = path.vertices
    lengths = [abs(b - a) for a, b in zip(verts, verts[1:])]
    total = sum(lengths)
    xs = []
    for (a, b), L in zip(zip(verts, verts[1:]), lengths):
        n = max(8, int(math.ceil(m * L / total)))
        seg = np.linspace(0, 1, n + 1)[(0 if not xs else 1):]
        xs.extend(a + t * (b - a) for t in seg)
    xs = np.array(xs)

    coeffs = list(p.coeffs)
    coeffs[0] = coeffs[0] + 1j * path.shift - E
    rev = np.array(list(reversed(coeffs)))
    f = np.polyval(rev, xs)
    w = np.sqrt(f)
    if path.branch_seed is not None:
        if abs(path.branch_seed ** 2 - f[0]) > 1e-12 * max(abs(f[0]), abs(path.branch_seed) ** 2):
            raise ValueError("branch seed does not square to the integrand at the start")
        if abs(w[0] - path.branch_seed) > abs(w[0] + path.branch_seed):
            w = -w
    for i in range(1, len(w)):
        if abs(w[i] - w[i - 1]) > abs(w[i] + w[i - 1]):
            w[i] = -w[i]
        if abs(w[i] - w[i - 1]) >= abs(w[i - 1]):
            raise NonProgressivePath(
                "sampling too coarse or sheet flip along path; refine failed")
    # cumulative z by Simpson on each cell (midpoint resampled)
    mids = 0.5 * (xs[:-1] + xs[1:])
    fm = np.polyval(rev, mids)
    wm = np.sqrt(fm)
    ref = 0.5 * (w[:-1] + w[1:])
    flip = np.abs(wm - ref) > np.abs(wm + ref)
    wm = np.where(flip, -wm, wm)
    dz = (xs[1:] - xs[:-1]) * (w[:-1] + 4 * wm + w[1:]) / 6.0
    z = np.concatenate([[0j], np.cumsum(dz)])
    return xs, w, z


def wkb_series(p: Potential, E: complex, h: float, path: BranchedPath,
               order: int, samples: int = 256) -> WkbSeriesResult:
    """Amplitude corrections W+/W- along a progressive path.

    W+ is normalized to 1 at the path start and returned at the end; W-
    the other way around.  Odd terms apply the exponential-kernel integral
    operator (with the kernel oriented so its real exponent stays <= 0),
    even terms the plain one; each uses a segment-wise linear model of the
    integrand, which is exact for the kernel factor.  The sampling is
    doubled until the endpoint values stabilize.
    """
    prev = None
    m = samples
    for _ in range(5):
        res = _wkb_series_fixed(p, E, h, path, order, m)
        if prev is not None and abs(res.w_plus - prev.w_plus) <= 1e-9 * max(1.0, abs(res.w_plus)) \
                and abs(res.w_minus - prev.w_minus) <= 1e-9 * max(1.0, abs(res.w_minus)):
            return res
        prev = res
        m *= 2
    return prev


def _wkb_series_fixed(p, E, h, path, order, m):
    xs, w, z = _sample_path(p, E, path, m)
    dRe = np.diff(z.real)
    if np.all(dRe < 0):
        # same projected path on the other sheet makes Re z increase
        w = -w
        z = -z
        dRe = -dRe
    if np.any(dRe <= 0):
        raise NonProgressivePath("Re z is not strictly monotone along the path")
    vp = np.polyval(np.array(list(reversed([(k + 1) * c for k, c in enumerate(p.coeffs[1:])]))), xs) \
        if p.degree >= 1 else np.zeros_like(xs)
    H = -0.25 * vp / w ** 3
    n = len(xs)
    dz = np.diff(z)

    def apply_I(term, plus: bool):
        out = np.empty(n, dtype=complex)
        f = H * term
        if plus:
            acc = 0j
            out[0] = 0
            for k in range(1, n):
                gamma = 2.0 * dz[k - 1] / h
                ca, cb = _kernel_coeffs(gamma)
                seg = dz[k - 1] * (f[k - 1] * ca + (f[k] - f[k - 1]) * cb)
                acc = acc * np.exp(-gamma) + seg
                out[k] = acc
        else:
            acc = 0j
            out[-1] = 0
            for k in range(n - 2, -1, -1):
                gamma = 2.0 * dz[k] / h
                ca, cb = _kernel_coeffs(gamma)
                # reversed orientation: same closed form on the flipped cell
                seg = -dz[k] * (f[k + 1] * ca + (f[k] - f[k + 1]) * cb)
                acc = acc * np.exp(-gamma) + seg
                out[k] = acc
        return -out

    def apply_J(term, plus: bool):
        f = H * term
        seg = 0.5 * (f[:-1] + f[1:]) * dz
        if plus:
            out = np.concatenate([[0j], np.cumsum(seg)])
        else:
            out = np.concatenate([np.cumsum(seg[::-1])[::-1], [0j]]) * (-1.0)
        return -out

    def series(plus: bool):
        term = np.ones(n, dtype=complex)
        total = term.copy()
        last = 1.0
        for nn in range(1, order + 1):
            term = apply_I(term, plus) if nn % 2 == 1 else apply_J(term, plus)
            total += term
            last = abs(term[-1] if plus else term[0])
        return total, last

    tot_p, last_p = series(True)
    tot_m, last_m = series(False)
    w_plus = complex(tot_p[-1])
    w_minus = complex(tot_m[0])
    last = max(last_p, last_m)
    converged = last < 1e-3 * max(abs(w_plus), abs(w_minus))
    return WkbSeriesResult(w_plus, w_minus, order, last, converged)
