"""Chern-Weil and Chern-Simons forms, mapping-cone cohomology and cochain models of differential characters."""

from .bundle import BundleAtlas, chern_weil_form, cs_one_connection, cs_two_connections
from .ccs import CCSPackage, build_ccs, build_cheeger_simons, ccs_contract, trivial_package
from .characters import CochainCharacter, RelativeCochainCharacter, from_curvature
from .complexes import ChainComplex, ChainMap, MappingCone, cohomology, smith_normal_form, transgression_T
from .geometry import FormField, SmoothMap, integrate
from .lie_core import InvariantPolynomial, standard_polynomial
from .report import Check, Report

__version__ = "0.1.0"

__all__ = [
    "BundleAtlas", "CCSPackage", "ChainComplex", "ChainMap", "Check", "CochainCharacter", "FormField",
    "InvariantPolynomial", "MappingCone", "RelativeCochainCharacter", "Report", "SmoothMap", "build_ccs",
    "build_cheeger_simons", "ccs_contract", "chern_weil_form", "cohomology", "cs_one_connection",
    "cs_two_connections", "from_curvature", "integrate", "smith_normal_form", "standard_polynomial",
    "transgression_T", "trivial_package",
]
