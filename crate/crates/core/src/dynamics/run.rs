use std::path::PathBuf;

use super::{save_checkpoint, Problem, SimState, StepReport, Stepper};
use crate::error::{MhdError, Result};
use crate::estimates::{EnergyLedger, Recorder};
use crate::grid::{ScalarField, VectorField};
use crate::spectral::SpectralBasis;

use super::SolverConfig;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Keep every `n`-th state (and the last) in the output; `None` keeps only the last.
    pub keep_every: Option<usize>,
    /// Write a checkpoint every `cadence` steps to `path`.
    pub checkpoint: Option<(PathBuf, usize)>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub final_state: SimState,
    pub states: Vec<SimState>,
    pub reports: Vec<StepReport>,
    pub ledger: EnergyLedger,
}

/// Steps from `t = 0` to the configured horizon.
pub fn run(
    cfg: &SolverConfig,
    problem: &Problem,
    u0: &VectorField,
    b0: &VectorField,
    basis: Option<&SpectralBasis>,
    opts: &RunOptions,
) -> Result<RunOutput> {
    let stepper = Stepper::new(cfg.clone(), basis)?;
    let (u, b) = stepper.admit(u0, b0, &problem.trace)?;
    let state = SimState {
        t: 0.0,
        u,
        b,
        p: ScalarField::zeros(stepper.grid),
    };
    drive(&stepper, problem, state, opts)
}

/// Continues from `state` (for instance a loaded checkpoint) to the configured horizon.
pub fn run_from(
    cfg: &SolverConfig,
    problem: &Problem,
    state: SimState,
    basis: Option<&SpectralBasis>,
    opts: &RunOptions,
) -> Result<RunOutput> {
    let stepper = Stepper::new(cfg.clone(), basis)?;
    stepper.grid.ensure_same(&state.u.grid)?;
    drive(&stepper, problem, state, opts)
}

fn drive(
    st: &Stepper<'_>,
    problem: &Problem,
    mut state: SimState,
    opts: &RunOptions,
) -> Result<RunOutput> {
    let dt = st.cfg.dt;
    let remaining = ((st.cfg.horizon - state.t) / dt).round();
    if remaining < 0.0 {
        return Err(MhdError::Inconsistent(format!(
            "start time {} is past the horizon {}",
            state.t, st.cfg.horizon
        )));
    }
    let steps = remaining as usize;
    let mut recorder = Recorder::new(&state.b, state.t);
    let mut ledger = EnergyLedger::default();
    ledger.push(recorder.record(&state, &problem.trace)?)?;
    let mut states = Vec::new();
    if opts.keep_every.is_some() {
        states.push(state.clone());
    }
    let mut reports = Vec::with_capacity(steps);
    for k in 1..=steps {
        let (next, rep) = st.coupled_step(&state, problem)?;
        state = next;
        reports.push(rep);
        ledger.push(recorder.record(&state, &problem.trace)?)?;
        if let Some(every) = opts.keep_every {
            if k % every.max(1) == 0 || k == steps {
                states.push(state.clone());
            }
        }
        if let Some((path, cadence)) = &opts.checkpoint {
            if *cadence > 0 && k % cadence == 0 {
                save_checkpoint(path, &state, dt, st.cfg.truncation_count())?;
            }
        }
    }
    Ok(RunOutput {
        final_state: state,
        states,
        reports,
        ledger,
    })
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use crate::lifting::BoundaryTrace;
    use crate::ops::curl_of_stream;
    use std::f64::consts::PI;

    #[test]
    fn zero_run_is_zero() {
        let g = Grid::square(8).unwrap();
        let cfg = SolverConfig::new(8, 0.01, 0.05);
        let p = Problem::unforced(BoundaryTrace::zero(g).unwrap());
        let z = VectorField::zeros(g);
        let out = run(&cfg, &p, &z, &z, None, &RunOptions::default()).unwrap();
        assert_eq!(out.ledger.len(), 6);
        assert!(out
            .ledger
            .rows
            .iter()
            .all(|r| r.values()[1..].iter().all(|v| *v == 0.0)));
    }

    #[test]
    fn restart_is_bit_identical() {
        let g = Grid::square(10).unwrap();
        let cfg = SolverConfig::new(10, 0.01, 0.08);
        let tr = BoundaryTrace::zero(g).unwrap();
        let p = Problem::unforced(tr);
        let u0 = curl_of_stream(g, |x, y| {
            2.0 * (PI * x).sin().powi(2) * (PI * y).sin().powi(2)
        });
        let b0 = curl_of_stream(g, |x, y| {
            (PI * x).sin().powi(2) * (2.0 * PI * y).sin() * (PI * y).sin()
        });
        let full = run(&cfg, &p, &u0, &b0, None, &RunOptions::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let ck = dir.path().join("half.ckpt");
        let mut half = cfg.clone();
        half.horizon = 0.04;
        let opts = RunOptions {
            keep_every: None,
            checkpoint: Some((ck.clone(), 4)),
        };
        run(&half, &p, &u0, &b0, None, &opts).unwrap();
        let (_, st) = load_checkpoint(&ck, Some((10, 10, 0.01, 0))).unwrap();
        let rest = run_from(&cfg, &p, st, None, &RunOptions::default()).unwrap();
        assert_eq!(rest.final_state, full.final_state);
    }

    #[test]
    fn incompatible_data_is_rejected_or_projected() {
        let g = Grid::square(8).unwrap();
        let mut cfg = SolverConfig::new(8, 0.01, 0.02);
        let p = Problem::unforced(BoundaryTrace::zero(g).unwrap());
        let u0 = VectorField::from_fn(g, |x, y| [x * (1.0 - x) * y, 0.0]);
        let b0 = VectorField::zeros(g);
        assert!(matches!(
            run(&cfg, &p, &u0, &b0, None, &RunOptions::default()),
            Err(MhdError::Compatibility(_))
        ));
        cfg.compatibility = crate::lifting::CompatibilityPolicy::Project;
        let out = run(&cfg, &p, &u0, &b0, None, &RunOptions::default()).unwrap();
        assert!(out.ledger.rows[0].div_u < 1e-10);
    }
}
