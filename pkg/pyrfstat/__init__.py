from .pyrfstat import Readout, rfs_plot_style, PhotonCurve
from .errors import *
from .units import (
    HBAR,
    H_PLANCK,
    NO_DEPHASING,
    ClickStream,
    CorrelationCurve,
    DriveParams,
    EmitterParams,
    GridSpec,
    InterferometerParams,
    IRFParams,
    Spectrum,
    coherence_fidelity,
    energy_to_frequency,
    fourier_compose,
    frequency_to_energy,
    linewidth_to_t2,
    rabi_energy_to_frequency,
    rabi_frequency_to_energy,
    solve_t2_star,
    t2_to_linewidth,
)
from .systems.analyticalsystems import (
    CavityParams,
    MollowParams,
    VisibilityCurve,
    broaden_spectrum,
    g2_curve,
    g2_driven,
    hom_curves,
    mollow_spectrum,
    purcell_lifetime,
    solve_purcell_two_point,
    visibility,
)
from .systems.trajectorysystems import TrajectoryConfig, simulate_clicks, simulate_mz, split_stream
from .instrument import Histogram, convolve_irf, correlate_clicks, mix_background, normalize_histogram
from .fitting import FitResult, fit_g2, fit_hom, fit_mollow, fit_purcell, fit_power_calibration
