"""Single-excitation XY spin-chain dynamics at desk scale.

A confining on-site field turns an end site of an open XY chain into a
dynamical quantum memory: the stored excitation collapses and revives
("breathes") at predictable times with near-unit fidelity.  This package
builds the one-magnon Hamiltonian for a family of field profiles, evolves
amplitudes exactly or under five defect/noise models, extracts revival
structure and parameter sweeps, and converts the dimensionless model to
optical-lattice laboratory units.
"""
from .model import (
    CLEAN,
    BandedHamiltonian,
    ChainSpec,
    FieldProfile,
    NoiseStream,
    PerturbationCase,
    PerturbationSample,
    build_field,
    build_hamiltonian,
    sample_perturbation,
    vacuum_energy,
)
from .propagator import (
    AmplitudeVector,
    ConvergenceError,
    PhaseUndefinedError,
    Spectrum,
    default_time_step,
    diagonalize,
    evolve_piecewise,
    evolve_static,
    piecewise_site_series,
    relative_phase,
    site_amplitude_series,
    site_fidelity,
    superposition_fidelity,
    time_grid,
)
from .disorder import EnsembleSpec, ensemble_average_fidelity
from .analysis import (
    FidelityCurve,
    SweepTable,
    drop_site,
    fidelity_trace,
    fidelity_values,
    max_in_window,
    revival_times,
    semiclassical_drop_site,
    semiclassical_regime,
    sweep,
)
from . import units

__version__ = "0.1.0"

__all__ = [
    "AmplitudeVector",
    "BandedHamiltonian",
    "ChainSpec",
    "CLEAN",
    "ConvergenceError",
    "EnsembleSpec",
    "FidelityCurve",
    "FieldProfile",
    "NoiseStream",
    "PerturbationCase",
    "PerturbationSample",
    "PhaseUndefinedError",
    "Spectrum",
    "SweepTable",
    "build_field",
    "build_hamiltonian",
    "default_time_step",
    "diagonalize",
    "drop_site",
    "ensemble_average_fidelity",
    "evolve_piecewise",
    "evolve_static",
    "fidelity_trace",
    "fidelity_values",
    "max_in_window",
    "piecewise_site_series",
    "relative_phase",
    "revival_times",
    "sample_perturbation",
    "semiclassical_drop_site",
    "semiclassical_regime",
    "site_amplitude_series",
    "site_fidelity",
    "superposition_fidelity",
    "sweep",
    "time_grid",
    "units",
    "vacuum_energy",
]
