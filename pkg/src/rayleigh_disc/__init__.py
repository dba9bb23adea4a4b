"""Global dynamics of the generalized Rayleigh oscillator on the Poincare disc."""

from .compactification import ChartId, ChartSystem, chart_system, infinite_equilibria
from .flow import first_return, integrate
from .lienardcheck import build_lienard_data, check_hypotheses
from .limitcycle import LimitCycleRecord, averaging_amplitude, find_cycle, return_map, uniqueness_scan
from .localanalysis import EquilibriumReport, classify_equilibrium, classify_origin_finite
from .poly import Poly
from .portrait import PortraitModel, build_portrait, render_svg, topological_class
from .vectorfield import PlanarPolySystem, RayleighParams, build_system, lienard_form, rayleigh_system

__version__ = "0.1.0"

__all__ = [
    "ChartId",
    "ChartSystem",
    "EquilibriumReport",
    "LimitCycleRecord",
    "PlanarPolySystem",
    "Poly",
    "PortraitModel",
    "RayleighParams",
    "averaging_amplitude",
    "build_lienard_data",
    "build_portrait",
    "build_system",
    "chart_system",
    "check_hypotheses",
    "classify_equilibrium",
    "classify_origin_finite",
    "find_cycle",
    "first_return",
    "infinite_equilibria",
    "integrate",
    "lienard_form",
    "rayleigh_system",
    "render_svg",
    "return_map",
    "topological_class",
    "uniqueness_scan",
]
