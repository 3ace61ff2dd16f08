"""Model core: parameters, spectral densities, kernels and induced fields."""

from .bath import (
    BathCorrelation,
    DiscretizationScheme,
    discretize_bath,
    kernel_for,
    memory_kernel,
    mode_kernel,
    reorganization_field,
    spectral_density,
)
from .field import (
    decompose_field_continuum,
    induced_field_from_sz,
    integrated_dynamic_field,
    mode_fields,
)
from .params import Cutoff, Mode, ModelParams, ModeSet, Preparation, TimeGrid
from .series import FieldTrajectory, SpinTrajectory

__all__ = [
    "BathCorrelation",
    "Cutoff",
    "DiscretizationScheme",
    "FieldTrajectory",
    "Mode",
    "ModelParams",
    "ModeSet",
    "Preparation",
    "SpinTrajectory",
    "TimeGrid",
    "decompose_field_continuum",
    "discretize_bath",
    "induced_field_from_sz",
    "integrated_dynamic_field",
    "kernel_for",
    "memory_kernel",
    "mode_fields",
    "mode_kernel",
    "reorganization_field",
    "spectral_density",
]
