"""scanres: forward models and parameter extraction for a scanning
superconducting-resonator microscope."""

__version__ = "0.1.0"

from .quantities import CONSTANTS, PhysicalConstants, Power, Temperature, dbm_to_watts, watts_to_dbm
from .response import (
    ComplexTrace,
    NoiseSpec,
    ResonatorParams,
    average_photon_number,
    linear_grid,
    s11_model,
    synthesize_trace,
    total_q,
)
from .fitting import FitConfig, FitResult, circle_fit, estimate_delay, fit_s11, initial_guess, phase_slope_at_resonance
from .loss import (
    CompositeLossParams,
    QpParams,
    SweepFitResult,
    TlsParams,
    fit_power_sweep,
    fit_temperature_sweep,
    qi_power_model,
    qi_temperature_model,
    qp_frequency_shift,
    qp_loss,
    tls_frequency_shift,
    tls_loss,
)
from .special import bessel_k0, re_digamma_half_plus_imag
from .tipsample import (
    FAR_REFERENCE_DISTANCE,
    CalibrationResult,
    MaterialMap,
    ScanImage,
    TipModel,
    calibrate_distance,
    cap_model,
    coupling_capacitance,
    delta_cap,
    dielectric_response,
    distance_from_shift,
    edge_resolution,
    simulate_scan,
    tip_kernel,
)
from .sensitivity import (
    NoiseSpectrum,
    PhaseTimeSeries,
    capacitance_noise,
    capacitance_noise_chain,
    frequency_noise,
    phase_psd,
    sensitivity_vs_bandwidth,
)
from .transmon import (
    CoherenceTrace,
    DecayFitResult,
    QubitResonatorParams,
    TransmonParams,
    coupling_vs_distance,
    dispersive_shift,
    fit_decay,
    g_ref_for_t1,
    gamma1_vs_distance,
    invert_spectrum,
    purcell_rate,
    simulate_decay,
    transition_frequencies,
    transmon_levels,
    two_tone_spectrum,
)
