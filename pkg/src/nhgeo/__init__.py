"""Complex geometric phases and exceptional points of non-Hermitian systems."""
from .core import (
    BiorthogonalEigensystem,
    ComplexAngles,
    ComplexVec3,
    DegeneracyClass,
    DegeneracyKind,
    TwoLevelHamiltonian,
    classify_degeneracy,
    complex_radius,
    eigensystem,
    spherical_angles,
)
from .errors import *  # noqa: F401,F403
from .ising import (
    IsingParams,
    ModeSpectrum,
    QptDiagnosis,
    QptOrder,
    bogoliubov_angle,
    exceptional_point,
    ground_energy,
    ground_phase_finite,
    magnetization_from_phase,
    mode_hamiltonian,
    mode_spectrum,
    overall_phase_closed,
    overall_phase_closed_array,
    overall_phase_derivative,
    overall_phase_finite,
    overall_phase_thermo,
)
from .phase import (
    LoopPath,
    Method,
    PhaseResult,
    circle_loop,
    curvature_fd,
    curvature_flux,
    effective_two_level,
    ground_phase_sum,
    monopole_phase,
    phase_limits_im,
    phase_limits_re,
    phase_split,
    point_loop,
    spherical_cap,
    theta_loop,
    two_level_map,
    wilson_loop_phase,
)
from .specfun import EllipticResult, carlson_rd, carlson_rf, complete_e, complete_k

__version__ = "0.1.0"
