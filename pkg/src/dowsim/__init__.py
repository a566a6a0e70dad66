"""Wavefield simulator with energy-threshold deformation and Born-sampled collapse."""

__version__ = "0.1.0"

from .collapse import (BornSampler, CollapseOperator, CollapsePolicy, Criterion, Shape, apply_collapse,
                       born_sample, check_collapse, collapse_threshold, field_threshold, indicator_integral)
from .deformation import DeformationParams, Mode, apply_deformation, deform_sequence, deform_width
from .errors import ConfigError, DowsimError
from .events import InteractionEvent
from .evolution import (BarrierPotential, EvolutionConfig, FreePotential, HarmonicPotential, Propagator,
                        SampledPotential, evolve, step)
from .trajectory import LogEntry, Outcome, TrajectoryResult, run_ensemble, run_trajectory
from .wavefield import (NATURAL, SI_ELECTRON, GridSpec, UnitSystem, Wavefield, gaussian_packet,
                        localization_width, mean_position, momentum_spread, norm, normalize, position_spread)

__all__ = [
    "BornSampler", "CollapseOperator", "CollapsePolicy", "Criterion", "Shape", "apply_collapse",
    "born_sample", "check_collapse", "collapse_threshold", "field_threshold", "indicator_integral",
    "DeformationParams", "Mode", "apply_deformation", "deform_sequence", "deform_width",
    "ConfigError", "DowsimError", "InteractionEvent",
    "BarrierPotential", "EvolutionConfig", "FreePotential", "HarmonicPotential", "Propagator",
    "SampledPotential", "evolve", "step",
    "LogEntry", "Outcome", "TrajectoryResult", "run_ensemble", "run_trajectory",
    "NATURAL", "SI_ELECTRON", "GridSpec", "UnitSystem", "Wavefield", "gaussian_packet",
    "localization_width", "mean_position", "momentum_spread", "norm", "normalize", "position_spread",
]
