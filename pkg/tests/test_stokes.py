import math

import numpy as np
import pytest

from stokescope.contour import _poly_f, _nearest_sqrt, turning_points
from stokescope.curves import curve_point
from stokescope.potential import Potential
from stokescope.stokes import (AtTurningPoint, OnBoundary, progressive_path,
                               same_region, stokes_field, trace_diagram)

IX2 = Potential((0, 0, 1j))


class TestField:
    def test_flat_case(self):
        assert stokes_field(Potential((0,)), -1.0, 0.3, 1.0) == 1j

    def test_quadratic_at_one(self):
        # V=ix^2, E=0 at x=1: branch e^{i pi/4}, field i*conj = e^{i pi/4}
        b = np.exp(1j * np.pi / 4)
        s = stokes_field(IX2, 0.0, 1.0, b)
        assert s == pytest.approx(np.exp(1j * np.pi / 4))

    def test_tangent_to_level_sets(self):
        for x in (0.3 + 0.1j, -0.7, 1.2 - 0.4j):
            w = complex(np.sqrt(IX2(x) - (2 + 0.5j)))
            s = stokes_field(IX2, 2 + 0.5j, x, w)
            assert abs((w * s).real) < 1e-12

    def test_turning_point_rejected(self):
        with pytest.raises(AtTurningPoint):
            stokes_field(IX2, 1j, 1.0, 0.0)


class TestTraceDiagram:
    def test_three_departures_per_point(self):
        d = trace_diagram(IX2, np.exp(1j * np.pi / 4))
        assert len(d.lines) == 6
        by_src = {}
        for ln in d.lines:
            by_src.setdefault(ln.source, []).append(ln)
        assert all(len(v) == 3 for v in by_src.values())

    def test_level_residual_small(self):
        d = trace_diagram(IX2, np.exp(1j * np.pi / 4))
        for ln in d.lines:
            assert ln.re_drift <= 1e-6 * (1 + ln.arc_length())

    def test_endpoint_turning_points_still_trace(self):
        d = trace_diagram(IX2, 1j)  # turning points exactly at -1 and 1
        assert len(d.lines) == 6
        for ln in d.lines:
            assert ln.re_drift <= 1e-6 * (1 + ln.arc_length())

    def test_reflection_symmetry(self):
        # even potential: the diagram is symmetric under x -> -x
        d = trace_diagram(IX2, 2 + 0.3j)
        pts = np.concatenate([ln.points for ln in d.lines])
        segs = []
        for ln in d.lines:
            P = -ln.points  # reflected
            segs.append(np.column_stack([P[:-1], P[1:]]))
        segs = np.vstack(segs)
        a, b = segs[:, 0], segs[:, 1]
        dseg = b - a
        L2 = np.abs(dseg) ** 2
        worst = 0.0
        for z in pts[:: max(1, len(pts) // 400)]:
            t = ((z - a).real * dseg.real + (z - a).imag * dseg.imag) / L2
            t = np.clip(t, 0, 1)
            worst = max(worst, float(np.min(np.abs(z - (a + t * dseg)))))
        assert worst <= 1e-5

    def test_degenerate_configuration_reported(self):
        from stokescope.contour import DegenerateConfiguration
        with pytest.raises(DegenerateConfiguration):
            trace_diagram(IX2, 0.0)  # double turning point at the origin


class TestSameRegion:
    def test_interval_connected_at_large_energy(self):
        d = trace_diagram(IX2, 50 + 1j / 3, box=(-9, 9, -9, 9),
                          max_step_frac=5e-3, rtol=1e-6)
        assert same_region(d, [-1.0, 1.0]) is True

    def test_interval_split_on_separatrix_ray(self):
        d = trace_diagram(IX2, 0.1 * np.exp(1j * np.pi / 4))
        assert same_region(d, [-1.0, 1.0]) is False

    def test_single_point(self):
        d = trace_diagram(IX2, 2 + 0.3j)
        assert same_region(d, [0.5]) is True

    def test_point_on_line_rejected(self):
        d = trace_diagram(IX2, 2 + 0.3j)
        probe = d.lines[0].points[len(d.lines[0].points) // 2]
        with pytest.raises(OnBoundary):
            same_region(d, [probe, 0.99 * probe + 1])


class TestMembership:
    def test_negative_real_energy_admits_route(self):
        v = progressive_path(IX2, -1.0)
        assert v.in_T is True

    def test_on_curve_excluded(self):
        b = curve_point(IX2, -1.0, 1.0, 0.0, 10.0, 1 / 3, tol=1e-11)
        v = progressive_path(IX2, 10 + 1j * b)
        assert v.in_T is False

    def test_on_ray_excluded_inside_junction(self):
        E = 0.5 * 0.4577991228 * np.exp(1j * np.pi / 4)
        v = progressive_path(IX2, E)
        assert v.in_T is False

    def test_beyond_junction_admitted(self):
        E = 1.5 * 0.4577991228 * np.exp(1j * np.pi / 4)
        v = progressive_path(IX2, E)
        assert v.in_T is True

    def test_verdict_stable_under_tiny_perturbations(self):
        for E in (10 + 0.2j, 7 + 0.45j):
            base = progressive_path(IX2, E, fast=True).in_T
            for dE in (1e-8, -1e-8, 1e-8j):
                assert progressive_path(IX2, E + dE, fast=True).in_T == base

    def test_witness_strictly_monotone(self):
        v = progressive_path(IX2, 5 + 0.1j)
        assert v.in_T and v.witness is not None
        f = _poly_f(IX2, 5 + 0.1j, 0.0)
        w = complex(np.sqrt(f(v.witness[0])))
        # orient the sheet so the first step increases Re z
        step0 = (w * (v.witness[1] - v.witness[0])).real
        if step0 < 0:
            w = -w
        for a, b in zip(v.witness, v.witness[1:]):
            w_b = _nearest_sqrt(f(b), w)
            gain = (0.5 * (w + w_b) * (b - a)).real
            assert gain > 0
            w = w_b

    def test_perturbed_membership_left_curve(self):
        b50 = curve_point(IX2, -1.0, 0.3, -0.1, 50.0, 0.163333, tol=1e-11)
        v = progressive_path(IX2, 50 + 1j * b50, delta=0.1, beta=0.3)
        assert v.in_T is False
        assert len(v.sides) == 2
        v2 = progressive_path(IX2, 50 + 1j * (b50 + 0.05), delta=0.1, beta=0.3)
        assert v2.in_T is True

    def test_zero_energy_rejected(self):
        with pytest.raises(ValueError):
            progressive_path(IX2, 0.0)

    def test_delta_requires_beta(self):
        with pytest.raises(ValueError):
            progressive_path(IX2, 5 + 0.1j, delta=0.1)


def test_diagram_json_shape():
    d = trace_diagram(IX2, 2 + 0.3j, max_step_frac=5e-3, rtol=1e-6)
    js = d.to_json()
    assert set(js) >= {"energy", "turning_points", "lines", "box"}
    ln = js["lines"][0]
    assert set(ln) >= {"source", "direction_index", "points"}
    assert all(len(pt) == 2 for pt in ln["points"][:5])
