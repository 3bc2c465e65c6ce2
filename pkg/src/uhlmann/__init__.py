"""Uhlmann holonomies and phases for a spin-orbit coupled atom in a rotating field."""

from .atom import ModelParams, eigenstate, reference_state
from .errors import (DegenerateSpectrumError, IntegratorError, InvalidInputError,
                     NumericalConsistencyError)
from .paths import PathSegment, PathSpec, figure_eight, orange_slice, sample, solid_angle
from .transport import (HolonomyResult, TransportProblem, holonomy, holonomy_via_potential,
                        mixed_state_geometric_phase, wilson_phase)

__version__ = "0.1.0"

__all__ = [
    "ModelParams", "eigenstate", "reference_state",
    "DegenerateSpectrumError", "IntegratorError", "InvalidInputError", "NumericalConsistencyError",
    "PathSegment", "PathSpec", "figure_eight", "orange_slice", "sample", "solid_angle",
    "HolonomyResult", "TransportProblem", "holonomy", "holonomy_via_potential",
    "mixed_state_geometric_phase", "wilson_phase",
]
