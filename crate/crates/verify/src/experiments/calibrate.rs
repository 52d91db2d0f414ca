use mhd_core::dynamics::RunOptions;
use mhd_core::estimates::{
    calibrate_c_omega, calibrate_c_tilde, calibrate_gronwall, calibrate_strong,
    calibrate_weak_energy, CalibrationStore,
};
use mhd_core::spectral::{build_laplacian_basis, build_stokes_basis, poincare_constants};

use crate::error::Result;
use crate::scenarios::scenario;

/// Names of the persisted constants.
pub mod keys {
    pub const WEAK: &str = "weak_energy";
    pub const GRONWALL: &str = "gronwall_weak";
    pub const STRONG: &str = "strong_energy";
    pub const C_TILDE: &str = "c_tilde";
    pub const C_OMEGA: &str = "c_omega";
    /// Measured Poincaré rate, stored for reference only.
    pub const C_P: &str = "c_p";
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrateParams {
    pub nx: usize,
    pub dt: f64,
    pub horizon: f64,
    /// Scenario that fixes the energy-inequality constants.
    pub reference: String,
    /// Scenario that fixes the absorbing-set constants.
    pub absorbing_reference: String,
    pub absorbing_horizon: f64,
}

impl Default for CalibrateParams {
    fn default() -> Self {
        Self {
            nx: 32,
            dt: 2e-3,
            horizon: 0.5,
            reference: "steady_boundary".into(),
            absorbing_reference: "periodic_small".into(),
            absorbing_horizon: 2.0,
        }
    }
}

/// Measures every checker constant on its reference run and freezes it with the safety
/// factor applied.
pub fn calibrate(p: &CalibrateParams) -> Result<CalibrationStore> {
    let mut store = CalibrationStore::default();
    let reference =
        scenario(&p.reference, p.nx, p.dt, p.horizon)?.run(None, &RunOptions::default())?;
    let l = &reference.ledger;
    let weak = store.freeze(keys::WEAK, calibrate_weak_energy(l), &p.reference);
    store.freeze(keys::GRONWALL, calibrate_gronwall(l), &p.reference);
    store.freeze(keys::STRONG, calibrate_strong(l), &p.reference);

    let sc = scenario(&p.absorbing_reference, p.nx, p.dt, p.absorbing_horizon)?;
    let g = sc.cfg.grid()?;
    let c_p = poincare_constants(&build_stokes_basis(g, 1)?, &build_laplacian_basis(g, 1)?)?.c_p;
    store.set(keys::C_P, c_p, "eigenvalues");
    let out = sc.run(None, &RunOptions::default())?;
    store.freeze(
        keys::C_TILDE,
        calibrate_c_tilde(&out.ledger, c_p, weak),
        &p.absorbing_reference,
    );
    store.freeze(
        keys::C_OMEGA,
        calibrate_c_omega(&out.ledger),
        &p.absorbing_reference,
    );
    Ok(store)
}
