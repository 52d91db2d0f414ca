//! Experiment drivers. Each takes its parameter block and returns a report whose
//! assertions carry the measured value, the tolerance and the margin.

mod calibrate;
mod convergence;
mod dynamics;
mod spectra;

use std::time::Instant;

use mhd_core::estimates::CalibrationStore;

use crate::error::{Result, VerifyError};
use crate::report::ExperimentReport;

pub use calibrate::{calibrate, CalibrateParams};
pub use convergence::{
    energy_law, heat_decay, identity_suite, mms_convergence, EnergyParams, HeatParams,
    IdentityParams, MmsParams,
};
pub use dynamics::{
    absorbing, continuous_dependence, determinism, gronwall_suite, picard_study, AbsorbingParams,
    DependenceParams, DeterminismParams, GronwallParams, PicardParams,
};
pub use spectra::{
    brezis_gallouet, eigen_regularity, tail_compactness, BrezisGallouetParams, EigenParams,
    TailParams,
};

pub const EXPERIMENT_IDS: [&str; 12] = [
    "identities",
    "mms",
    "energy_law",
    "heat_decay",
    "gronwall",
    "continuous_dependence",
    "picard",
    "absorbing",
    "tail",
    "eigen",
    "brezis_gallouet",
    "determinism",
];

/// Parameters of every experiment, each with working defaults.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentParams {
    pub identities: IdentityParams,
    pub mms: MmsParams,
    pub energy_law: EnergyParams,
    pub heat_decay: HeatParams,
    pub gronwall: GronwallParams,
    pub dependence: DependenceParams,
    pub picard: PicardParams,
    pub absorbing: AbsorbingParams,
    pub tail: TailParams,
    pub eigen: EigenParams,
    pub brezis_gallouet: BrezisGallouetParams,
    pub determinism: DeterminismParams,
    pub calibrate: CalibrateParams,
}

/// Runs one experiment by id. Experiments that check calibrated inequalities read their
/// constants from `store`.
pub fn run_experiment(
    id: &str,
    p: &ExperimentParams,
    store: &CalibrationStore,
) -> Result<ExperimentReport> {
    let start = Instant::now();
    let mut report = match id {
        "identities" => identity_suite(&p.identities),
        "mms" => mms_convergence(&p.mms),
        "energy_law" => energy_law(&p.energy_law),
        "heat_decay" => heat_decay(&p.heat_decay),
        "gronwall" => gronwall_suite(&p.gronwall, store),
        "continuous_dependence" => continuous_dependence(&p.dependence),
        "picard" => picard_study(&p.picard),
        "absorbing" => absorbing(&p.absorbing, store),
        "tail" => tail_compactness(&p.tail),
        "eigen" => eigen_regularity(&p.eigen),
        "brezis_gallouet" => brezis_gallouet(&p.brezis_gallouet),
        "determinism" => determinism(&p.determinism, store),
        _ => {
            return Err(VerifyError::Unknown {
                kind: "experiment",
                id: id.to_owned(),
            })
        }
    }?;
    report.runtime = start.elapsed();
    Ok(report)
}

/// Least-squares slope of `y` against `x`.
pub fn fitted_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
