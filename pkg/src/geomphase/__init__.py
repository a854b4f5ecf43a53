"""Geometric phases of cyclic quantum evolutions with imperfect initial
states: exact spin-half results, a general numeric pipeline, Bloch-sphere
geometry, and reproducible experiment runners."""

from .bloch import (
    BlochPath,
    Closure,
    SolidAngleReport,
    corrected_solid_angle,
    count_self_crossings,
    gp_from_solid_angle,
    solid_angle,
    states_to_bloch,
    to_bloch,
)
from .errors import (
    AntipodalEndpoints,
    DimensionMismatch,
    GapTooSmall,
    GeomPhaseError,
    GridTooCoarse,
    InvalidAmplitudes,
    InvalidGamma,
    NonFinite,
    NonHermitianInput,
    OrthogonalNeighbors,
    StepTooLarge,
    TooCoarse,
)
from .experiments import (
    ExperimentConfig,
    SweepRow,
    SweepSpec,
    run_fig1,
    run_fig2,
    run_fig3,
    run_verify,
)
from .hamiltonian import (
    EigenFrame,
    HamiltonianFamily,
    SpinHalfParams,
    ValidationReport,
    berry_phase,
    fix_gauge,
    hermiticity_defect,
    random_analytic_family,
    smooth_eigenframe,
    spin_half_eigensystem,
    spin_half_hamiltonian,
    validate_family,
    write_family_file,
)
from .phase import (
    EnergyProfile,
    PhaseMethod,
    PhaseReport,
    approx_gp_imperfect,
    approx_gp_perfect,
    exact_gp_imperfect,
    exact_gp_perfect,
    gamma_limit,
    geometric_phase_continuous,
    geometric_phase_pancharatnam,
    key_formula_prediction,
    oscillatory_remainder,
    wrap_phase,
    wrap_signed,
)
from .propagator import (
    GammaScaling,
    ImperfectionSpec,
    SampledPath,
    adiabatic_reference_state,
    choose_steps,
    exact_imperfect_state,
    exact_perfect_state,
    exact_spin_half_propagator,
    integrate_schrodinger,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
