"""Ground states of strongly indefinite periodic Schrodinger systems on a torus supercell."""

__version__ = "0.1.0"

from .grid import TorusGrid, VectorField, make_grid
from .spectral import PeriodicPotential, SpectralSplit, assemble_and_split, bloch_bands, gap_center_shift
from .nonlinearity import Combination, GrossPitaevskii, PowerSum, RadialW, check_assumptions
from .functional import EnergyContext, energy, gradient, nehari_residuals
from .solver import SolverConfig, inner_maximize, minimize_sphere, refine_translation
from .decay import fit_decay, smoothness_proxy

__all__ = [
    "TorusGrid", "VectorField", "make_grid",
    "PeriodicPotential", "SpectralSplit", "assemble_and_split", "bloch_bands", "gap_center_shift",
    "Combination", "GrossPitaevskii", "PowerSum", "RadialW", "check_assumptions",
    "EnergyContext", "energy", "gradient", "nehari_residuals",
    "SolverConfig", "inner_maximize", "minimize_sphere", "refine_translation",
    "fit_decay", "smoothness_proxy",
]
