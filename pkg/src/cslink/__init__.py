"""Linking numbers of (2l+1)-cycles in R^(4l+3) and exact abelian Chern-Simons phases."""

from .backends import active_backend, available_backends
from .csinvariant import (ChargeVector, ExpectationValue, HomologyVector, Level,
                          LinkingMatrix, ManifoldDescriptor, RationalPhase,
                          expectation_value, link_from_geometry, nilpotency_invariance_check,
                          nilpotency_reduce, selection_rule, validate_level)
from .cycles import (ChartDomain, Dimensions, ParamCycle, from_json, orthogonal_hyperplane,
                     reverse_orientation, round_sphere, transform, unit_circle_xy,
                     vertical_line_z)
from .errors import (CslinkError, DegenerateCrossingError, FramingInstabilityError,
                     InputError, QuantizationError, SingularityError)
from .kernel import (KernelConstants, gauss_integrand, normalization, propagator_constant,
                     propagator_integrand, radial_integral_check, solid_angle_element,
                     sphere_surface)
from .linking import (Framing, LinkingResult, field_theory_linking, gauss_linking,
                      intersection_oracle_3d, pushoff, self_linking, zodiacus_boundary_scan)
from .quadrature import IntegralEstimate, QuadratureSpec, integrate_product, min_pair_distance

__version__ = "0.1.0"

__all__ = [
    "ChartDomain", "ChargeVector", "CslinkError", "DegenerateCrossingError", "Dimensions",
    "ExpectationValue", "Framing", "FramingInstabilityError", "HomologyVector",
    "InputError", "IntegralEstimate", "KernelConstants", "Level", "LinkingMatrix",
    "LinkingResult", "ManifoldDescriptor", "ParamCycle", "QuadratureSpec",
    "QuantizationError", "RationalPhase", "SingularityError", "active_backend",
    "available_backends", "expectation_value", "field_theory_linking", "from_json",
    "gauss_integrand", "gauss_linking", "integrate_product", "intersection_oracle_3d",
    "link_from_geometry", "min_pair_distance", "nilpotency_invariance_check",
    "nilpotency_reduce", "normalization", "orthogonal_hyperplane", "propagator_constant",
    "propagator_integrand", "pushoff", "radial_integral_check", "reverse_orientation",
    "round_sphere", "selection_rule", "self_linking", "solid_angle_element",
    "sphere_surface", "transform", "unit_circle_xy", "validate_level", "vertical_line_z",
    "zodiacus_boundary_scan",
]
