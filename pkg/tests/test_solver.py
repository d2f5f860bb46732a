import numpy as np
import pytest

from stokescope.contour import BranchedPath
from stokescope.curves import curve_point
from stokescope.potential import Potential
from stokescope.solver import (NonProgressivePath, RefineError, discretize,
                               eigenvalues, eigs_of, refine, shooting_det,
                               wkb_formula, wkb_quantization, wkb_series)

IX2 = Potential((0, 0, 1j))
ZERO = Potential((0,))


class TestDiscretize:
    def test_laplacian_spectrum(self):
        e = np.sort(eigs_of(discretize(ZERO, 1.0, 64)).real)
        ks = np.arange(1, 11)
        assert np.max(np.abs(e[:10] - (ks * np.pi / 2) ** 2)) < 1e-10

    def test_constant_shift_commutes(self):
        c = 2 + 0.5j
        e = eigs_of(discretize(Potential((c,)), 1.0, 64))
        target = (np.pi / 2) ** 2 + c
        assert np.min(np.abs(e - target)) < 1e-10

    def test_shape(self):
        assert discretize(IX2, 0.1, 48).shape == (47, 47)
        pj = IX2.with_two_sided_jump(0.1, 0.3)
        assert discretize(pj, 0.1, 48).shape == (47, 47)

    def test_small_n_rejected(self):
        with pytest.raises(ValueError):
            discretize(IX2, 0.1, 8)


class TestEigenvalues:
    def test_real_potential_real_spectrum(self):
        recs = eigenvalues(Potential((0, 0, 1.0)), 0.1, 96,
                           region=(0, 40, -1, 1))
        assert len(recs) > 5
        assert max(abs(r.E.imag) for r in recs) <= 1e-8

    def test_filter_keeps_converged_modes_only(self):
        recs = eigenvalues(IX2, 0.05, 128, region=(2, 12, -1, 1))
        assert len(recs) >= 5
        for r in recs:
            assert r.residual < 1e-6 * (1 + abs(r.E))
            assert abs(r.E.imag - 1 / 3) < 0.05


class TestShooting:
    def test_zero_potential_eigenvalue(self):
        d = shooting_det(ZERO, 1.0, (np.pi / 2) ** 2, 0.0)
        assert abs(d.value) <= 1e-9

    def test_zero_potential_regular_point(self):
        d = shooting_det(ZERO, 1.0, 1.0, 0.0)
        assert abs(d.value) >= 1e-2

    def test_matrix_eigenvalue_is_shooting_zero(self):
        recs = eigenvalues(IX2, 0.05, 160, region=(4, 8, 0, 1))
        E = recs[0].E
        assert abs(shooting_det(IX2, 0.05, E, 0.0).value) <= 1e-6

    def test_jump_case_cross_validation(self):
        pj = IX2.with_two_sided_jump(0.1, 0.3)
        recs = eigenvalues(pj, 0.05, 160, region=(4, 8, 0, 1))
        assert recs, "no filtered eigenvalues in the window"
        assert abs(shooting_det(pj, 0.05, recs[0].E).value) <= 1e-6

    def test_match_point_validation(self):
        with pytest.raises(ValueError):
            shooting_det(ZERO, 1.0, 1.0, 1.5)


class TestRefine:
    def test_converges_from_nearby_seed(self):
        r = refine(ZERO, 1.0, (np.pi / 2) ** 2 + 1e-3, 0.0)
        assert abs(r.E - (np.pi / 2) ** 2) <= 1e-10
        assert r.residual <= 1e-10

    def test_far_seed_rejected(self):
        # deep in the upper half plane there is nothing to converge to
        with pytest.raises(RefineError):
            refine(ZERO, 1.0, 5.0 + 40.0j, 0.0)

    def test_matrix_crosscheck_both_directions(self):
        # every filtered matrix eigenvalue in a small window is reproduced
        # by shooting refinement, and every quantization-seeded shooting
        # root lands on a matrix eigenvalue
        h, N = 0.05, 192
        window = (5.0, 8.0)
        recs = [r.E for r in eigenvalues(IX2, h, N)
                if window[0] <= r.E.real <= window[1]]
        assert recs
        for E in recs:
            r = refine(IX2, h, E, 0.0)
            assert abs(r.E - E) <= 1e-6
        ks = range(int(2 * np.sqrt(window[0]) / (np.pi * h)) - 1,
                   int(2 * np.sqrt(window[1]) / (np.pi * h)) + 2)
        for k in ks:
            Ef = wkb_formula(IX2, h, k)
            if not window[0] <= Ef.real <= window[1]:
                continue
            root = refine(IX2, h, Ef, 0.0).E
            assert min(abs(root - E) for E in recs) <= 1e-6


class TestWkbFormula:
    def test_zero_potential_exact(self):
        assert wkb_formula(ZERO, 0.05, 40) == pytest.approx((np.pi * 0.05 * 40 / 2) ** 2)

    def test_quadratic_arithmetic(self):
        h, k = 0.02, 100
        expect = (np.pi * h * k / 2) ** 2 + 1j / 3 - 4 / (9 * (2 * np.pi * h * k) ** 2)
        assert wkb_formula(IX2, h, k) == pytest.approx(expect)

    def test_agrees_with_refinement(self):
        h, k = 0.05, 40  # hk = 2
        Ef = wkb_formula(IX2, h, k)
        Er = refine(IX2, h, Ef, 0.0).E
        assert abs(Ef - Er) <= 10 * (h * k) ** -3

    def test_regime_guard(self):
        with pytest.raises(ValueError):
            wkb_formula(IX2, 0.01, 10)


class TestWkbQuantization:
    def test_zero_potential_exact(self):
        E = wkb_quantization(ZERO, 0.05, 40, (np.pi * 0.05 * 40 / 2) ** 2 + 0.01j)
        assert E == pytest.approx((np.pi * 0.05 * 40 / 2) ** 2, abs=1e-9)

    def test_lands_on_curve(self):
        h, k = 0.05, 40
        E = wkb_quantization(IX2, h, k, wkb_formula(IX2, h, k))
        from stokescope.curves import re_action
        assert abs(re_action(IX2, E, -1.0, 1.0).real) <= 1e-9

    def test_matches_refinement(self):
        h, k = 0.05, 40
        E = wkb_quantization(IX2, h, k, wkb_formula(IX2, h, k))
        Er = refine(IX2, h, E, 0.0).E
        assert abs(E - Er) <= 10 * (h * k) ** -3


class TestWkbSeries:
    PATH = BranchedPath((-1.0, 1.0))

    def test_order_zero_is_one(self):
        r = wkb_series(IX2, 10 + 1j, 1.0, self.PATH, 0)
        assert r.w_plus == 1 and r.w_minus == 1

    def test_constant_potential_is_one(self):
        r = wkb_series(Potential((0.3 + 0.2j,)), 10 + 1j, 0.05, self.PATH, 6)
        assert r.w_plus == 1 and r.w_minus == 1 and r.converged

    def test_linear_scaling_in_h(self):
        r1 = wkb_series(IX2, 10 + 1j, 0.1, self.PATH, 8)
        r2 = wkb_series(IX2, 10 + 1j, 0.05, self.PATH, 8)
        for a, b in ((r1.w_plus, r2.w_plus), (r1.w_minus, r2.w_minus)):
            ratio = abs(b - 1) / abs(a - 1)
            assert 0.4 <= ratio <= 0.6

    def test_non_progressive_rejected(self):
        # a path doubling back cannot have monotone Re z
        path = BranchedPath((-1.0, 0.5, -0.5, 1.0))
        with pytest.raises(NonProgressivePath):
            wkb_series(IX2, 10 + 1j, 0.1, path, 4)


def test_localization_improves_at_least_linearly():
    # distances to the curve shrink by at least the h-ratio (measured:
    # quadratically, since the even potential cancels the linear term)
    def maxdist(h, N):
        recs = [r.E for r in eigenvalues(IX2, h, N) if 5 <= r.E.real <= 10]
        out = []
        for E in recs:
            b = curve_point(IX2, -1.0, 1.0, 0.0, E.real, 1 / 3, tol=1e-11,
                            enforce_threshold=False)
            out.append(abs(E.imag - b))
        return max(out)

    d1 = maxdist(0.1, 128)
    d2 = maxdist(0.05, 160)
    assert d2 / d1 <= 0.55
