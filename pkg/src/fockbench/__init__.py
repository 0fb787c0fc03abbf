"""Simulation of a driven Kerr bosonic mode in the photon-number basis.

Frequencies are angular, in rad/us; times are in us.  ``mhz``/``khz``/``hz``
convert from f = omega/2pi.
"""

from .analysis import (
    cosine_similarity,
    fit_gauss_cos,
    fit_gaussian,
    fit_two_gaussians,
    fringe_scaling,
    fringe_visibility,
    metrology_gain_db,
    peak_position,
)
from .analytic import GaussianBeam, focal_time, free_prop_center_width, lens_width, min_width, newton_focus
from .calibration import camera_model, fit_camera, fit_k6, number_splitting_spectrum, spectrometer_detuning
from .dynamics import (
    BandedHamiltonian,
    Method,
    PropagatorConfig,
    build_hamiltonian,
    evolve,
    evolve_mcwf,
    kspace_propagate,
)
from .elements import (
    Displace,
    KerrWait,
    Measure,
    MeasureKind,
    PhaseProfile,
    Prism,
    Pump,
    design_lens,
    ideal_image,
    imaging_plan,
    run_elements,
)
from .errors import (
    ConvergenceError,
    DimensionMismatch,
    DomainError,
    DuplicateLabel,
    FitDiverged,
    FockBenchError,
    ParseError,
    PeakNotFound,
    SingularFit,
    TruncationError,
    UnknownUnit,
)
from .hilbert import (
    DEVICE,
    QubitLevel,
    StateVector,
    SystemParams,
    coherent_state,
    dg_state,
    fidelity,
    fock_state,
    gaussian_state,
    hz,
    khz,
    mhz,
    moments,
    to_mhz,
)
from .states import SlingshotSpec, displace, slingshot_prepare, truncation_residual, wigner
