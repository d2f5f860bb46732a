import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stokescope import fixtures
from stokescope.contour import (BranchPointCollision, BranchedPath,
                                DegenerateConfiguration, action,
                                action_between, continue_branch,
                                straight_path, turning_points)
from stokescope.potential import Potential, primitive

IX2 = Potential((0, 0, 1j))


class TestTurningPoints:
    def test_pair_at_unit_energy(self):
        tp = turning_points(IX2, 1j)
        assert sorted(tp.orders) == [1, 1]
        locs = sorted(tp.locations, key=lambda z: z.real)
        assert locs[0] == pytest.approx(-1, abs=1e-12)
        assert locs[1] == pytest.approx(1, abs=1e-12)

    def test_double_root_at_zero_energy(self):
        tp = turning_points(IX2, 0.0)
        assert tp.points == ((0j, 2),)

    def test_generic_energy_square_root_pair(self):
        E = 3.7 - 1.2j
        expect = np.sqrt(-1j * E)
        locs = sorted(turning_points(IX2, E).locations, key=lambda z: z.real)
        assert locs[1] == pytest.approx(expect, abs=1e-10)
        assert locs[0] == pytest.approx(-expect, abs=1e-10)

    def test_constant_potential_rejected(self):
        with pytest.raises(DegenerateConfiguration):
            turning_points(Potential((2,)), 1.0)

    def test_residuals_small(self):
        E = 17 + 0.4j
        for z in turning_points(IX2, E).locations:
            assert abs(IX2(z) - E) <= 1e-10 * (1 + abs(E))


class TestContinueBranch:
    def test_constant_integrand(self):
        path = straight_path(-1, 1, seed=1.0)
        pts, ws = continue_branch(path, Potential((0,)), -1.0)
        assert np.allclose(ws, 1.0)

    def test_single_loop_monodromy(self):
        # square loop around the turning point at +1 only (E = i)
        verts = (1.5, 1 + 0.5j, 0.5 + 0j, 1 - 0.5j, 1.5)
        pts, ws = continue_branch(BranchedPath(verts), IX2, 1j)
        assert ws[-1] == pytest.approx(-ws[0], rel=1e-9)

    def test_double_loop_trivial_monodromy(self):
        verts = (2.0, 2j, -2.0, -2j, 2.0)
        pts, ws = continue_branch(BranchedPath(verts), IX2, 1j)
        assert ws[-1] == pytest.approx(ws[0], rel=1e-9)

    def test_collision_detected(self):
        with pytest.raises(BranchPointCollision):
            continue_branch(straight_path(-2, 2), IX2, 1j)  # through +-1

    def test_bad_seed_rejected(self):
        with pytest.raises(ValueError):
            continue_branch(straight_path(-1, 1, seed=123.0), IX2, -1.0)


class TestAction:
    def test_flat_integrand(self):
        assert action(Potential((0,)), -1.0, straight_path(-1, 1, seed=1.0)) \
            == pytest.approx(2.0, abs=1e-12)

    def test_evenness_with_matched_seeds(self):
        # the determination with w odd around the pair makes S_{0,x} even,
        # so the reflected path needs the opposite seed
        E = 10 + 1j / 3
        s = complex(np.sqrt(-E))
        s1 = action(IX2, E, straight_path(0, 0.7 + 0.3j, seed=s))
        s2 = action(IX2, E, straight_path(0, -0.7 - 0.3j, seed=-s))
        assert s1 == pytest.approx(s2, abs=1e-10)

    def test_symmetric_interval_doubles_half(self):
        # continuation through 0 gives S_{-x,x} = 2 S_{0,x}
        E = 10 + 1j / 3
        x = 0.8
        full = action(IX2, E, straight_path(-x, x))
        _, ws = continue_branch(straight_path(-x, 0.0), IX2, E)
        half = action(IX2, E, straight_path(0.0, x, seed=ws[-1]))
        assert full == pytest.approx(2 * half, abs=1e-9)

    def test_frozen_oracle_value(self):
        ref = fixtures.load()["action_ix2_E_10_i3"]
        E = complex(*ref["E"])
        S = action_between(IX2, E, -1.0, 1.0)
        assert S.real == pytest.approx(ref["value"][0], abs=1e-10)
        assert S.imag == pytest.approx(ref["value"][1], abs=1e-10)

    def test_seed_antisymmetry(self):
        E = 5 - 2j
        s = complex(np.sqrt(IX2.poly(-1) - E))
        a1 = action(IX2, E, straight_path(-1, 1, seed=s))
        a2 = action(IX2, E, straight_path(-1, 1, seed=-s))
        assert a1 == pytest.approx(-a2, rel=1e-13)

    @given(st.floats(0.05, 0.95))
    @settings(max_examples=15, deadline=None)
    def test_subdivision_invariance(self, t):
        E = 4 + 0.7j
        direct = action(IX2, E, straight_path(-1, 1))
        mid = -1 + 2 * t
        split = action(IX2, E, BranchedPath((-1.0, mid, 1.0)))
        assert direct == pytest.approx(split, abs=1e-10)

    def test_large_energy_expansion(self):
        E = 1000 + 1j / 3
        S = action_between(IX2, E, -1, 1)
        Y = primitive(IX2)
        approx = 2j * np.sqrt(E) - 1j * (Y(1.0) - Y(-1.0)) / (2 * np.sqrt(E))
        # next omitted term is |int V^2| / (8 |E|^(3/2)) ~ 1.6e-6
        assert abs(S - approx) <= 10 * abs(E) ** -1.5
        assert abs(S - approx) / abs(S) <= 10 * abs(E) ** -2

    def test_turning_point_endpoint_integrals(self):
        # both-endpoint turning points (the separatrix segment) match the
        # closed form of the rotated real-oscillator action: i*pi*lam/2
        lam = 0.3
        E = lam * np.exp(1j * np.pi / 4)
        ap = np.sqrt(-1j * E)
        S = action_between(IX2, E, -ap, ap)
        assert abs(S.real) < 1e-10
        assert abs(S.imag) == pytest.approx(np.pi * lam / 2, abs=1e-9)

    def test_nonconvergence_reported(self):
        from stokescope.contour import QuadratureError
        with pytest.raises((QuadratureError, BranchPointCollision)):
            # forcing an absurd tolerance with a nearby turning point
            action(IX2, 1j, straight_path(-1 + 2e-6, 1 - 2e-6),
                   abs_tol=1e-16, max_subdivisions=4)
