"""Thermal ghost imaging in the orbital-angular-momentum basis.

Laguerre-Gaussian mode rasters, Gaussian-Schell spiral spectra, two-beam
correlation states (separability and geometric discord), and the resulting
ghost-image synthesis, plus a CLI that emits CSV/PGM/OAMF artifacts.
"""

from .field_grid import (
    BeamSpec,
    ComplexField,
    GridSpec,
    ModeClippedWarning,
    ModeIndex,
    default_grid,
    inner_product,
    intensity_and_phase,
    iter_lg_rasters,
    lg_amplitude,
    read_field,
    sample_lg,
    write_field,
)
from .quantum_correlations import (
    SeparabilityCertificate,
    ThermalState,
    assemble_density,
    brute_force_discord,
    discord_curve,
    discord_limit,
    geometric_discord_full_lattice,
    geometric_discord_pure,
    geometric_discord_thermal,
    mode_basis,
    robustness,
    robustness_full_lattice,
    separability_decomposition,
)
from .spiral_imaging import (
    GhostImageResult,
    ModeCoefficients,
    clover_object,
    image_spectrum,
    load_object,
    object_spectrum,
    read_pgm,
    render_background,
    render_pure_image,
    render_total,
    write_pgm16,
)
from .thermal_source import (
    CsdTensor,
    SourceGeometry,
    SpiralSpectrum,
    build_spectrum,
    csd_mode_decompose,
    csd_value,
    flat_spectrum,
    full_lattice_sums,
    oracle_grid,
    schmidt_number,
    source_geometry,
    spectrum_amplitude,
)
from .verify import CheckResult, SUITES, run_suite

__version__ = "0.1.0"

__all__ = [
    "BeamSpec",
    "CheckResult",
    "ComplexField",
    "CsdTensor",
    "GhostImageResult",
    "GridSpec",
    "ModeClippedWarning",
    "ModeCoefficients",
    "ModeIndex",
    "SUITES",
    "SeparabilityCertificate",
    "SourceGeometry",
    "SpiralSpectrum",
    "ThermalState",
    "__version__",
    "assemble_density",
    "brute_force_discord",
    "build_spectrum",
    "clover_object",
    "csd_mode_decompose",
    "csd_value",
    "default_grid",
    "discord_curve",
    "discord_limit",
    "flat_spectrum",
    "full_lattice_sums",
    "geometric_discord_full_lattice",
    "geometric_discord_pure",
    "geometric_discord_thermal",
    "image_spectrum",
    "inner_product",
    "intensity_and_phase",
    "iter_lg_rasters",
    "lg_amplitude",
    "load_object",
    "mode_basis",
    "object_spectrum",
    "oracle_grid",
    "read_field",
    "read_pgm",
    "render_background",
    "render_pure_image",
    "render_total",
    "robustness",
    "robustness_full_lattice",
    "run_suite",
    "sample_lg",
    "schmidt_number",
    "separability_decomposition",
    "source_geometry",
    "spectrum_amplitude",
    "write_field",
    "write_pgm16",
]
