"""Semiclassical spectra, Stokes geometry and pseudospectra on [-1, 1]."""

from .contour import BranchedPath, TurningPointSet, action, continue_branch, turning_points
from .curves import SpectralCurve, YShape, asymptote, curve_point, junction_lambda0, trace_curve, y_shape
from .potential import Potential, Primitive, derivative, primitive
from .pseudospec import PseudoGrid, grid, in_symbol_set, smin
from .solver import (EigenvalueRecord, WkbSeriesResult, discretize, eigenvalues,
                     refine, shooting_det, wkb_formula, wkb_quantization, wkb_series)
from .stokes import (MembershipVerdict, StokesDiagram, progressive_path,
                     same_region, stokes_field, trace_diagram)

__version__ = "0.1.0"
