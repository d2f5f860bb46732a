"""Polynomial complex potentials on [-1, 1] with imaginary Heaviside jumps.

A potential is a polynomial with complex coefficients plus an ordered list
of jumps (beta_j, s_j): crossing x = beta_j from the left adds i*s_j to the
value, so the piece between consecutive jump locations carries the running
sum of the steps to its left.  The flagship perturbed operator (the one
with -i*delta below beta and +i*delta above) is built by
``with_two_sided_jump``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class PotentialError(ValueError):
    """Invalid potential data (jump ordering, degenerate degree, ...)."""


def _trim(coeffs) -> tuple[complex, ...]:
    c = [complex(v) for v in coeffs]
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    if not c:
        c = [0j]
    return tuple(c)


@dataclass(frozen=True)
class Potential:
    """Complex polynomial plus ordered imaginary jumps.

    coeffs are ascending-degree complex coefficients.  jumps is a tuple of
    (location, step) pairs; the step s adds i*s to the value for Re x
    strictly greater than the location, so at a jump location the left
    piece's value is returned.  For complex x the piece is selected by
    Re x: off the real axis each analytic piece is the plain polynomial
    plus its fixed shift.
    """

    coeffs: tuple[complex, ...]
    jumps: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _trim(self.coeffs))
        jumps = tuple((float(b), float(s)) for b, s in self.jumps)
        object.__setattr__(self, "jumps", jumps)
        locs = [b for b, _ in jumps]
        if any(not -1.0 < b < 1.0 for b in locs):
            raise PotentialError("jump locations must lie strictly inside (-1, 1)")
        if any(b2 <= b1 for b1, b2 in zip(locs, locs[1:])):
            raise PotentialError("jump locations must be strictly increasing")

    # -- basic queries -------------------------------------------------

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return self.degree == 0 and self.coeffs[0] == 0

    def piece_shift(self, x) -> float:
        """Running jump sum (the real s with value shift i*s) at Re x."""
        r = x.real if isinstance(x, complex) else float(x)
        return sum(s for b, s in self.jumps if b < r)

    def poly(self, x: complex) -> complex:
        """Polynomial part only, by Horner."""
        acc = 0j
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __call__(self, x: complex) -> complex:
        return self.poly(x) + 1j * self.piece_shift(x)

    def max_abs_on_interval(self, lo: float = -1.0, hi: float = 1.0, n: int = 2049) -> float:
        xs = np.linspace(lo, hi, n)
        vals = np.polyval(list(reversed(self.coeffs)), xs)
        shifts = np.array([self.piece_shift(float(x)) for x in xs])
        return float(np.max(np.abs(vals + 1j * shifts)))

    # -- construction helpers ------------------------------------------

    def with_two_sided_jump(self, delta: float, beta: float) -> "Potential":
        """Perturbation subtracting i*delta below beta and adding it above.

        Realized as constant term minus i*delta plus a single Heaviside
        step of 2*delta at beta; requires a jump-free base polynomial.
        """
        if self.jumps:
            raise PotentialError("base potential already carries jumps")
        if delta == 0:
            return self
        coeffs = list(self.coeffs)
        coeffs[0] = coeffs[0] - 1j * delta
        return Potential(tuple(coeffs), ((beta, 2.0 * delta),))

    def shifted(self, s: float) -> "Potential":
        """Potential plus the constant i*s (the per-piece contour shift)."""
        if s == 0:
            return self
        coeffs = list(self.coeffs)
        coeffs[0] = coeffs[0] + 1j * s
        return Potential(tuple(coeffs), self.jumps)

    # -- JSON descriptor ------------------------------------------------

    def to_json(self) -> dict:
        return {
            "coeffs": [[c.real, c.imag] for c in self.coeffs],
            "jumps": [{"beta": b, "shift_im": s} for b, s in self.jumps],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Potential":
        coeffs = [complex(re, im) for re, im in data.get("coeffs", [[0, 0]])]
        jumps = tuple((j["beta"], j["shift_im"]) for j in data.get("jumps", []))
        return cls(tuple(coeffs), jumps)


@dataclass(frozen=True)
class Primitive:
    """Antiderivative Y of a Potential with Y(0) = 0.

    The polynomial part is integrated coefficientwise; each jump
    contributes i*s*(x - beta) beyond its location, with a constant
    subtracted so Y(0) = 0 while staying continuous at every jump.
    The source coefficients are retained so differentiation reproduces
    the original potential exactly.
    """

    coeffs: tuple[complex, ...]
    jumps: tuple[tuple[float, float], ...]
    source_coeffs: tuple[complex, ...] = field(repr=False)

    def poly(self, x: complex) -> complex:
        acc = 0j
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __call__(self, x: complex) -> complex:
        val = self.poly(x)
        r = x.real if isinstance(x, complex) else float(x)
        for b, s in self.jumps:
            ramp = (x - b) if r > b else 0.0
            ramp0 = (0.0 - b) if 0.0 > b else 0.0
            val += 1j * s * (ramp - ramp0)
        return val


def primitive(p: Potential) -> Primitive:
    """Coefficientwise antiderivative normalized to vanish at 0."""
    coeffs = (0j,) + tuple(c / (k + 1) for k, c in enumerate(p.coeffs))
    return Primitive(coeffs, p.jumps, p.coeffs)


def derivative(p) -> Potential:
    """Coefficientwise derivative; jumps are discarded.

    Accepts a Potential or a Primitive.  Differentiating a Primitive
    returns its source coefficients verbatim, so primitive/derivative
    round-trips are exact in coefficient arithmetic.
    """
    if isinstance(p, Primitive):
        return Potential(p.source_coeffs)
    coeffs = tuple((k + 1) * c for k, c in enumerate(p.coeffs[1:]))
    return Potential(coeffs if coeffs else (0j,))
