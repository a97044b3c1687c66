"""Superdirective array beamforming: closed-form optimum, range-constrained GA,
and spherical-wave cross-checks of directivity."""

from .beamform import (BeamVector, SolveReport, directivity_quotient, mrt_beamformer, optimal_beamformer,
                       project_to_range, traditional_beamformer)
from .config import GASettings, ScenarioConfig, load_config
from .errors import ConfigError, FieldFormatError, NumericalError
from .fieldmodel import (AngularGrid, ArrayFieldMatrix, ArrayGeometry, ElementFieldSet, ElementModel,
                         build_field_matrix, distort, linear_array, load_field_set, make_angular_grid,
                         save_field_set, synth_element_fields)
from .ga import GAConfig, GARunReport, QuantizationSpec, decode, encode, exhaustive_search, run_ga

__version__ = "0.1.0"
