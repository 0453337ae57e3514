"""Numerical laboratory for f-bar names, Rokhlin towers and smooth special flows over T^2."""

from .boxes import Box, parse_box
from .diagnostics import check_mixing_criterion, correlation
from .errors import (
    CapExceededError,
    FbarLabError,
    InvalidInputError,
    InvalidRoofError,
    NearResonanceError,
    NoFeasibleEtaError,
    NumericFailure,
    PreconditionError,
    PreconditionFailed,
)
from .flow import SpecialFlow, TimeOneMap, invariant_measure, return_count, time_one_normalized
from .maps import IdentityMap, ProductMap, TorusMap, Translation
from .roof import PlateauPoly, RoofFunction, assemble_roof, build_P_mu_n, phi0, select_eta
from .rotation import GrowthModel, RotationSpec, build_rotation, check_growth, surrogate_rotation
from .symbolic import CubePartition, Word, estimate_property_P, fbar, hamming, p_name, p_names
from .towers import (
    RokhlinTower,
    build_paper_towers,
    lb_schedule,
    monochromaticity,
    precision,
    product_tower,
    verify_disjointness,
)
from .trigpoly import TrigPoly, birkhoff_bound, birkhoff_sum, norm_bound, solve_cohomological

__version__ = "0.1.0"

__all__ = [
    "Box",
    "CapExceededError",
    "CubePartition",
    "FbarLabError",
    "GrowthModel",
    "IdentityMap",
    "InvalidInputError",
    "InvalidRoofError",
    "NearResonanceError",
    "NoFeasibleEtaError",
    "NumericFailure",
    "PlateauPoly",
    "PreconditionError",
    "PreconditionFailed",
    "ProductMap",
    "RokhlinTower",
    "RoofFunction",
    "RotationSpec",
    "SpecialFlow",
    "TimeOneMap",
    "TorusMap",
    "Translation",
    "TrigPoly",
    "Word",
    "assemble_roof",
    "birkhoff_bound",
    "birkhoff_sum",
    "build_P_mu_n",
    "build_paper_towers",
    "build_rotation",
    "check_growth",
    "check_mixing_criterion",
    "correlation",
    "estimate_property_P",
    "fbar",
    "hamming",
    "invariant_measure",
    "lb_schedule",
    "monochromaticity",
    "norm_bound",
    "p_name",
    "p_names",
    "parse_box",
    "phi0",
    "precision",
    "product_tower",
    "return_count",
    "select_eta",
    "solve_cohomological",
    "surrogate_rotation",
    "time_one_normalized",
    "verify_disjointness",
]
