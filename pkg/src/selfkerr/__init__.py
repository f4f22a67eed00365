"""Scattering and gate fidelity of a mirror-folded cross-Kerr photonic chain.

A chiral waveguide threads N cross-Kerr sites and is retroreflected, so every
photon traverses the chain twice.  The package provides the closed-form one-
and two-photon scattering amplitudes of this medium (`selfkerr.kernel`),
Gaussian wavepacket transport and conditional-phase gate fidelity
(`selfkerr.transport`), bandwidth optimization and scaling fits
(`selfkerr.optfit`), and an independent time-domain simulation that validates
the closed forms from the cascaded equations of motion (`selfkerr.oracle`).
"""

from .kernel import (
    INFINITE,
    ChainParams,
    continuum_kernel,
    gamma_shift,
    ideal_phase,
    is_infinite_chi,
    kernel_cross_kerr,
    kernel_infinite_chi,
    kernel_n_closed,
    kernel_n_sum,
    kernel_one_site,
    kernel_single_cavity_reference,
    kernel_two_site,
    phase_factor,
    single_photon_transmission,
)
from .optfit import (
    FidelitySweepRecord,
    PowerLawFit,
    cascade_length,
    fit_power_law,
    optimize_bandwidth,
    sweep_sites,
)
from .oracle import (
    ChainEquations,
    NumericSMatrixSample,
    SimConfig,
    TwoPhotonSimResult,
    build_chain_equations,
    compare_to_analytic,
    numeric_single_photon,
    numeric_two_photon,
    windowed_analytic_kernel,
)
from .transport import (
    FrequencyGrid,
    GaussianPacket,
    OverlapResult,
    SingleOutput,
    TwoPhotonAmplitude,
    avg_gate_fidelity,
    default_grid,
    overlap,
    packet_fidelity,
    propagate_single,
    propagate_two,
    sample_input,
    two_photon_norm,
)

__version__ = "0.1.0"

__all__ = [
    "INFINITE",
    "ChainParams",
    "ChainEquations",
    "FidelitySweepRecord",
    "FrequencyGrid",
    "GaussianPacket",
    "NumericSMatrixSample",
    "OverlapResult",
    "PowerLawFit",
    "SimConfig",
    "SingleOutput",
    "TwoPhotonAmplitude",
    "TwoPhotonSimResult",
    "avg_gate_fidelity",
    "build_chain_equations",
    "cascade_length",
    "compare_to_analytic",
    "continuum_kernel",
    "default_grid",
    "fit_power_law",
    "gamma_shift",
    "ideal_phase",
    "is_infinite_chi",
    "kernel_cross_kerr",
    "kernel_infinite_chi",
    "kernel_n_closed",
    "kernel_n_sum",
    "kernel_one_site",
    "kernel_single_cavity_reference",
    "kernel_two_site",
    "numeric_single_photon",
    "numeric_two_photon",
    "optimize_bandwidth",
    "overlap",
    "packet_fidelity",
    "phase_factor",
    "propagate_single",
    "propagate_two",
    "sample_input",
    "single_photon_transmission",
    "sweep_sites",
    "two_photon_norm",
    "windowed_analytic_kernel",
    "__version__",
]
