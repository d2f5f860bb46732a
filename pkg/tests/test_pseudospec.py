import numpy as np
import pytest

from stokescope.curves import asymptote
from stokescope.potential import Potential
from stokescope.pseudospec import (grid, in_symbol_set, smin,
                                   symbol_set_distance)

IX2 = Potential((0, 0, 1j))


class TestSymbolSet:
    def test_interior_point(self):
        assert in_symbol_set(IX2, 4 + 0.5j) is True

    def test_above_the_band(self):
        assert in_symbol_set(IX2, 4 + 2j) is False

    def test_needs_negative_momentum(self):
        assert in_symbol_set(IX2, -1.0 + 0j) is False

    def test_boundary_band_edges(self):
        assert in_symbol_set(IX2, 3 + 0.999j) is True
        assert in_symbol_set(IX2, 3 + 0j) is True

    def test_sampled_route_with_jumps(self):
        pj = IX2.with_two_sided_jump(0.1, 0.3)
        assert in_symbol_set(pj, 4 + 0.5j) is True
        assert in_symbol_set(pj, 4 + 2j) is False

    def test_distance_zero_inside(self):
        assert symbol_set_distance(IX2, 4 + 0.5j) <= 1e-3
        assert symbol_set_distance(IX2, 5 + 2j) == pytest.approx(1.0, abs=1e-6)


class TestSmin:
    def test_far_left_point_bounded_below(self):
        for h in (0.1, 0.05):
            assert smin(IX2, h, -10.0 + 0j, 128) >= 5.0

    def test_methods_agree(self):
        z = 5 + 1j / 6
        a = smin(IX2, 0.1, z, 128)
        b = smin(IX2, 0.1, z, 128, method="inverse")
        assert a == pytest.approx(b, rel=1e-6)

    def test_conjugate_symmetry_for_real_potential(self):
        x2 = Potential((0, 0, 1.0))
        z = 3 + 0.7j
        a = smin(x2, 0.1, z, 96)
        b = smin(x2, 0.1, np.conj(z), 96)
        assert a == pytest.approx(b, rel=1e-10)


class TestGrid:
    def test_degenerate_single_node(self):
        g = grid(IX2, 0.1, (5.0, 5.0, 1 / 6, 1 / 6), 1, 1, 96)
        assert g.values.shape == (1, 1)
        assert g.values[0, 0] == pytest.approx(smin(IX2, 0.1, 5 + 1j / 6, 96),
                                               rel=1e-3)

    def test_neighbors_lipschitz(self):
        g = grid(IX2, 0.1, (2.0, 6.0, -0.2, 1.0), 9, 7, 96)
        re, im = g.nodes()
        dx, dy = re[1] - re[0], im[1] - im[0]
        assert np.max(np.abs(np.diff(g.values, axis=1))) <= dx + 1e-8
        assert np.max(np.abs(np.diff(g.values, axis=0))) <= dy + 1e-8

    def test_matches_direct_svd(self):
        g = grid(IX2, 0.1, (3.0, 7.0, 0.0, 1.0), 5, 3, 96)
        re, im = g.nodes()
        z = complex(re[2], im[1])
        assert g.values[1, 2] == pytest.approx(smin(IX2, 0.1, z, 96), rel=1e-3)

    def test_resolution_validation(self):
        with pytest.raises(ValueError):
            grid(IX2, 0.1, (0, 1, 0, 1), 0, 3, 64)


def test_piece_asymptote_tends_to_local_imaginary_part():
    # two-jump pieces: the asymptote between nearby jump locations
    # approaches Im V at the left location linearly in the separation
    beta = 0.3
    target = IX2(beta).imag
    errs = [abs(asymptote(IX2, beta, beta + d, 0.0) - target)
            for d in (0.2, 0.1, 0.05)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[1] / errs[0] == pytest.approx(0.5, abs=0.1)
