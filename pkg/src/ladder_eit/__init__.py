"""Ladder-type EIT spectra of multi-isotope atomic beams: synthesis, calibration, fitting, isotope shifts."""

__version__ = "0.1.0"

from .analysis import (IsotopeShiftResult, PeakDescriptor, ScalingContext, attribute_peaks,
                       eit_peak_position, extract_isotope_shift, find_peaks, hyperfine_window_width,
                       isotope_probe_shift, isotope_shifts_from_peaks)
from .calibration import (CalibrationModel, CalibrationResult, apply_calibration, fit_calibration,
                          satabs_model)
from .catalog import (IsotopeCatalog, IsotopeSpec, LineComponent, builtin_strontium_catalog,
                      catalog_from_dict, catalog_to_dict, dumps_catalog, load_catalog)
from .errors import (CatalogError, CatalogValidationError, FitError, IntegrationError,
                     RankDeficiencyError)
from .fitting import FitProblem, FitResult, finite_difference_jacobian, least_squares
from .lineshape import (BeamGeometry, GaussianDistribution, Geometry, LadderParams,
                        LorentzianDistribution, MultiIsotopeSystem, VelocityDistribution,
                        amplitude_for_peak_absorption, difference_spectrum, gaussian_from_beam,
                        integrated_susceptibility, optical_depth, susceptibility_at_velocity,
                        synthesize_spectrum, velocity_density)
from .modelfit import PARAMETER_NAMES, EITModel, fit_eit_spectrum
from .spectrum import Spectrum, parse_grid, read_spectrum_csv, write_spectrum_csv


__all__ = [
    "BeamGeometry",
    "CalibrationModel",
    "CalibrationResult",
    "CatalogError",
    "CatalogValidationError",
    "EITModel",
    "FitError",
    "FitProblem",
    "FitResult",
    "GaussianDistribution",
    "Geometry",
    "IntegrationError",
    "IsotopeCatalog",
    "IsotopeShiftResult",
    "IsotopeSpec",
    "LadderParams",
    "LineComponent",
    "LorentzianDistribution",
    "MultiIsotopeSystem",
    "PARAMETER_NAMES",
    "PeakDescriptor",
    "RankDeficiencyError",
    "ScalingContext",
    "Spectrum",
    "VelocityDistribution",
    "amplitude_for_peak_absorption",
    "apply_calibration",
    "attribute_peaks",
    "builtin_strontium_catalog",
    "catalog_from_dict",
    "catalog_to_dict",
    "difference_spectrum",
    "dumps_catalog",
    "eit_peak_position",
    "extract_isotope_shift",
    "find_peaks",
    "finite_difference_jacobian",
    "fit_calibration",
    "fit_eit_spectrum",
    "gaussian_from_beam",
    "hyperfine_window_width",
    "integrated_susceptibility",
    "isotope_probe_shift",
    "isotope_shifts_from_peaks",
    "least_squares",
    "load_catalog",
    "optical_depth",
    "parse_grid",
    "read_spectrum_csv",
    "satabs_model",
    "susceptibility_at_velocity",
    "synthesize_spectrum",
    "velocity_density",
    "write_spectrum_csv",
]
