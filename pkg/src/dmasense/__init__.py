"""Computational direction-of-arrival and polarization estimation with a
1-bit dynamic metasurface antenna behind a single receive chain.

The package models the configuration-to-radiation-pattern map with multiport
network theory, optimizes binary configuration sequences against
effective-rank surrogate objectives, and evaluates single- and dual-source
grid-search estimators under controlled noise.
"""

from .errors import (
    DegenerateMeasurementError,
    DmaSenseError,
    InvalidConfigurationError,
    InvalidInputError,
    NoSignalError,
    SecondSourceUndetectableError,
    SingularModelError,
)
from .estimation import (
    ChannelSet,
    DualEstimate,
    SingleEstimate,
    build_dictionary,
    estimate_dual,
    estimate_single,
    fit_polarization,
    pol_error,
    projection_score,
)
from .grid import (
    SphericalGrid,
    angular_separation,
    build_grid,
    optimization_subset,
    unit_vector,
    valid_source_directions,
)
from .harness import ExperimentConfig, config_from_dict, load_config
from .mnt import (
    MntModel,
    compute_channel,
    compute_channel_rows,
    diversity_map,
    enumerate_configs,
    load_vector,
    random_configs,
    synthesize_model,
)
from .modelio import load_model, save_model
from .optimization import (
    OBJECTIVE_KINDS,
    OptimizationResult,
    OptimizerConfig,
    SensingMatrix,
    build_sensing_matrix,
    effective_rank,
    greedy_optimize,
    normalize_columns,
    normalize_direction_blocks,
    objective,
    random_sequence_stats,
)
from .sensing import (
    MeasurementSet,
    NoiseSpec,
    SourceSpec,
    noise_power,
    noiseless_signal,
    noiseless_vector,
    random_polarization_states,
    reference_power,
    synthesize_measurements,
)

__version__ = "0.1.0"
