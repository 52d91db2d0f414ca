//! Norm bookkeeping and the a-priori inequalities checked against recorded trajectories.

mod absorbing;
mod calibration;
mod gronwall;
mod inequalities;
mod ledger;

pub use absorbing::{
    absorbing_radii, calibrate_c_omega, calibrate_c_tilde, normality_check, smallness_gate,
    unit_window_integrals, AbsorbingConstants, AbsorbingRadii, Antiderivative,
};
pub use calibration::{Calibration, CalibrationStore, CALIBRATION_MAGIC, SAFETY_FACTOR};
pub use gronwall::{
    calibrate_gronwall, calibrate_strong, calibrate_weak_energy, gronwall_weak, strong_energy,
    time_derivative, weak_energy_residual, GronwallWeak, StrongEnergy, Q, Q_N, THETA,
};
pub use inequalities::{
    brezis_gallouet_ratio, pair_truncation, stokes_regularity, stokes_regularity_ratio,
    tail_energy, StokesRegularity,
};
pub use ledger::{EnergyLedger, LedgerRow, Recorder};
