"""Angular-recoil chiral rotation of a movable WGM backscatterer."""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    DerivedObservables,
    DriveParams,
    FieldState,
    FixedPhase,
    FrequencyOffset,
    MechParams,
    NormalFormCoeffs,
    OpticalParams,
    PhaseAveraged,
    SinglePumpSuperposition,
    SystemParams,
    cubic_coeff,
    gamma_opt,
    instantaneous_torque,
    make_params,
    n_threshold,
    normal_form,
    omega_star_normal_form,
    optimal_detuning,
    photon_number_n0,
    tau_rec,
)
