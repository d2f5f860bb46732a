import numpy as np
import pytest

from stokescope import fixtures
from stokescope.contour import BranchedPath, action
from stokescope.curves import (CurveError, asymptote, curve_point,
                               junction_lambda0, min_large_a, re_action,
                               trace_curve, y_shape)
from stokescope.potential import Potential

IX2 = Potential((0, 0, 1j))


class TestCurvePoint:
    def test_real_potential_flat(self):
        x2 = Potential((0, 0, 1))
        b = curve_point(x2, -1.0, 1.0, 0.0, 50.0, 0.0)
        assert abs(b) < 1e-9

    def test_quadratic_tail(self):
        # the defining equation Re S = 0 puts the curve at
        # 1/3 - (2/945)/a^2 + O(a^-4)
        for a in (25.0, 50.0, 100.0):
            b = curve_point(IX2, -1.0, 1.0, 0.0, a, 1 / 3, tol=1e-11)
            assert b == pytest.approx(1 / 3 - (2 / 945) / a ** 2, abs=30 / a ** 4)

    def test_perturbed_piece_heights(self):
        b = curve_point(IX2, -1.0, 0.3, -0.1, 50.0, 0.163333)
        assert b == pytest.approx((0.09 - 0.3 + 1) / 3 - 0.1, abs=5e-3)
        b = curve_point(IX2, 0.3, 1.0, +0.1, 50.0, 0.563333)
        assert b == pytest.approx((0.09 + 0.3 + 1) / 3 + 0.1, abs=5e-3)

    def test_threshold_guard(self):
        with pytest.raises(CurveError):
            curve_point(IX2, -1.0, 1.0, 0.0, 2.0, 1 / 3)
        assert min_large_a(IX2) == pytest.approx(6.0, abs=1e-6)

    def test_no_bracket_reported(self):
        with pytest.raises(CurveError):
            # seed far above the curve: no sign change within the bracket
            curve_point(IX2, -1.0, 1.0, 0.0, 50.0, 3.0)

    def test_residual_seed_sign_invariant(self):
        a = 50.0
        b = curve_point(IX2, -1.0, 1.0, 0.0, a, 1 / 3, tol=1e-10)
        E = a + 1j * b
        s = complex(np.sqrt(IX2.poly(-1.0) - E))
        for seed in (s, -s):
            S = action(IX2, E, BranchedPath((-1.0, 1.0), seed))
            assert abs(S.real) <= 1e-9

    def test_uniqueness_scan(self):
        a = 50.0
        b_inf = 1 / 3
        ref = complex(np.sqrt(IX2.poly(-1.0) - (a + 1j * b_inf)))
        bs = np.arange(b_inf - 1, b_inf + 1, 1e-3)
        vals = np.array([re_action(IX2, a + 1j * b, -1.0, 1.0,
                                   seed_ref=ref).real for b in bs])
        signs = np.sign(vals)
        changes = np.sum(signs[:-1] * signs[1:] < 0)
        assert changes == 1


class TestAsymptote:
    def test_interval_height(self):
        assert asymptote(IX2, -1, 1, 0.0) == pytest.approx(1 / 3)

    def test_shifted_pieces(self):
        assert asymptote(IX2, 0.3, 1, 0.1) == pytest.approx((0.09 + 0.3 + 1) / 3 + 0.1)
        assert asymptote(IX2, -1, 0.3, -0.1) == pytest.approx((0.09 - 0.3 + 1) / 3 - 0.1)

    def test_between_jumps(self):
        b, b2 = -0.2, 0.4
        expect = (b2 ** 2 + b2 * b + b ** 2) / 3 + 0.05
        assert asymptote(IX2, b, b2, 0.05) == pytest.approx(expect)

    def test_validated_against_root_solve(self):
        for (x0, x1, s) in ((-1.0, 1.0, 0.0), (0.3, 1.0, 0.1), (-1.0, 0.3, -0.1),
                            (-0.2, 0.4, 0.05)):
            a_inf = asymptote(IX2, x0, x1, s)
            b = curve_point(IX2, x0, x1, s, 1000.0, a_inf)
            assert abs(b - a_inf) <= 1e-4

    def test_coincident_endpoints_rejected(self):
        with pytest.raises(ValueError):
            asymptote(IX2, 0.3, 0.3, 0.0)


class TestTraceCurve:
    def test_flat_for_real_potential(self):
        c = trace_curve(Potential((0, 0, 1)), -1.0, 1.0, 0.0, 10.0, 14.0, 1.0)
        assert np.max(np.abs(c.samples[:, 1])) < 1e-9

    def test_monotone_approach(self):
        c = trace_curve(IX2, -1.0, 1.0, 0.0, 10.0, 40.0, 2.0, tol=1e-10)
        dev = np.abs(c.samples[:, 1] - 1 / 3)
        assert np.all(np.diff(dev) < 0)
        assert np.all(np.diff(c.samples[:, 0]) > 0)

    def test_perturbed_side_curves_disjoint(self):
        lo = trace_curve(IX2, -1.0, 0.3, -0.1, 10.0, 14.0, 1.0)
        hi = trace_curve(IX2, 0.3, 1.0, +0.1, 10.0, 14.0, 1.0)
        assert np.min(hi.samples[:, 1]) - np.max(lo.samples[:, 1]) > 0.3

    def test_samples_satisfy_defining_equation(self):
        c = trace_curve(IX2, -1.0, 1.0, 0.0, 10.0, 14.0, 1.0)
        for a, b in c.samples:
            assert abs(re_action(IX2, a + 1j * b, -1.0, 1.0).real) <= 1e-9


@pytest.fixture(scope="module")
def yshape():
    return y_shape(IX2, a_max=12.0)


class TestYShape:
    def test_junction_radius_matches_fixture(self, yshape):
        ref = fixtures.load()["lambda0_ix2"]["value"]
        assert abs(yshape.lambda0 - ref) <= 1e-8

    def test_three_terminals_agree(self, yshape):
        for c in yshape.curves():
            E = c.energies()
            d = min(abs(E[0] - yshape.junction), abs(E[-1] - yshape.junction))
            assert d <= 1e-3

    def test_arc_starts_at_degenerate_energy(self, yshape):
        assert abs(yshape.arc.energies()[0] - 1j) <= 1e-6

    def test_ray_satisfies_defining_equation(self, yshape):
        for lam in (0.1, 0.25, 0.4):
            E = lam * np.exp(1j * np.pi / 4)
            assert abs(re_action(IX2, E, "alpha-", "alpha+").real) <= 1e-9

    def test_arc_samples_satisfy_defining_equation(self, yshape):
        E = yshape.arc.energies()
        for z in E[2:-1: max(1, len(E) // 8)]:
            assert abs(re_action(IX2, z, "alpha+", 1.0).real) <= 1e-7

    def test_junction_also_on_interval_curve(self, yshape):
        S = re_action(IX2, yshape.junction, -1.0, 1.0)
        assert abs(S.real) <= 1e-6

    def test_infinite_curve_monotone_a(self, yshape):
        assert np.all(np.diff(yshape.infinite.samples[:, 0]) > 0)

    def test_non_quadratic_rejected(self):
        with pytest.raises(ValueError):
            y_shape(Potential((0, 1j)))
        with pytest.raises(ValueError):
            junction_lambda0(Potential((1, 0, 1j)))
