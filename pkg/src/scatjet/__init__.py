"""Scattering data on asymptotically hyperbolic boundaries: forward models,
exceptional sets, model integrals, and the staged inverse recovery."""

from .boundary_jets import (
    BoundaryPatch,
    ComplexEnergy,
    IndicialField,
    PerturbationData,
    density_ratio_coefficient,
    indicial_root,
    indicial_root_at,
    perturbation_coefficients,
)
from .dataset import SymbolDataset
from .errors import ScatjetError
from .forward_scattering import (
    ProbeSet,
    blowup_coordinates,
    default_probe_set,
    gamma_prefactor,
    principal_symbol,
    radial_derivative_kernel,
    singularity_coefficient,
)
from .hyperbolic_model import (
    HalfSpaceGrid,
    green_residual_check,
    green_residual_convergence,
    hyperbolic_laplacian_apply,
    normal_operator_apply,
)
from .inversion import (
    InversionConfig,
    RecoveryReport,
    first_order_recovery,
    layer_strip_driver,
    metric_boundary_recovery,
    recover_sigma_from_symbol,
    two_energy_recovery,
)
from .model_quadrature import (
    ModelIntegralValue,
    QuadratureSpec,
    green_kernel,
    i_full_integral,
    j_converges,
    j_integral,
    t_limit_integral,
)
from .spectral_sets import ExceptionalSet, exceptional_set, is_admissible, zero_scan
from .synthetic import forward_dataset, make_synthetic_pair

__version__ = "0.1.0"

__all__ = [
    "BoundaryPatch",
    "ComplexEnergy",
    "ExceptionalSet",
    "HalfSpaceGrid",
    "IndicialField",
    "InversionConfig",
    "ModelIntegralValue",
    "PerturbationData",
    "ProbeSet",
    "QuadratureSpec",
    "RecoveryReport",
    "ScatjetError",
    "SymbolDataset",
    "blowup_coordinates",
    "default_probe_set",
    "density_ratio_coefficient",
    "exceptional_set",
    "first_order_recovery",
    "forward_dataset",
    "gamma_prefactor",
    "green_kernel",
    "green_residual_check",
    "green_residual_convergence",
    "hyperbolic_laplacian_apply",
    "i_full_integral",
    "indicial_root",
    "indicial_root_at",
    "is_admissible",
    "j_converges",
    "j_integral",
    "layer_strip_driver",
    "make_synthetic_pair",
    "metric_boundary_recovery",
    "normal_operator_apply",
    "perturbation_coefficients",
    "principal_symbol",
    "radial_derivative_kernel",
    "recover_sigma_from_symbol",
    "singularity_coefficient",
    "t_limit_integral",
    "two_energy_recovery",
    "zero_scan",
]
