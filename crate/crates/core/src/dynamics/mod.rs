//! Time stepping of the lifted MHD system.
//!
//! ```text
//! ∂ₜu − Re⁻¹Δu + u·∇u − S b·∇b + ∇p = f_u,   ∇·u = 0,   u|_Γ = 0
//! ∂ₜb − Rm⁻¹Δb + u·∇b − b·∇u       = f_b,               b|_Γ = h
//! ```
//!
//! One step advances `b` by a Picard-iterated implicit Euler solve with the velocity
//! frozen, then `u` either in a truncated Stokes eigenbasis or by an exact backward Euler
//! Stokes solve. The two may be coupled once per step or iterated to a fixed point.

mod bstep;
mod checkpoint;
mod run;
mod ustep;

pub use bstep::BStepReport;
pub use checkpoint::{load_checkpoint, save_checkpoint, CheckpointHeader, CHECKPOINT_MAGIC};
pub use run::{run, run_from, RunOptions, RunOutput};
pub use ustep::UStepReport;

use std::fmt;
use std::sync::Arc;

use crate::error::{MhdError, Result};
use crate::fastsolve::{Projector, VectorHelmholtz};
use crate::grid::{Grid, ScalarField, VectorField, WallValues};
use crate::lifting::{trace_mismatch, BoundaryTrace, CompatibilityPolicy, Lifter, TraceMismatch};
use crate::ops::{divergence, gradient};
use crate::spectral::SpectralBasis;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truncation {
    /// No truncation: exact discrete Stokes solve.
    Full,
    /// Galerkin truncation to the first `n` Stokes modes.
    Modes(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coupling {
    /// One magnetic step with the old velocity, then one velocity step.
    SinglePass,
    /// Iterate `ū ↦ b(ū) ↦ u(b)` until successive velocities agree.
    FixedPoint { tol: f64, max_iter: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub nx: usize,
    pub ny: usize,
    pub dt: f64,
    pub horizon: f64,
    pub truncation: Truncation,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    pub coupling: Coupling,
    pub re: f64,
    pub rm: f64,
    pub s: f64,
    /// Clean `∇·b` when its L² norm exceeds this.
    pub div_clean_threshold: f64,
    pub compatibility: CompatibilityPolicy,
}

impl SolverConfig {
    pub fn new(n: usize, dt: f64, horizon: f64) -> Self {
        Self {
            nx: n,
            ny: n,
            dt,
            horizon,
            truncation: Truncation::Full,
            picard_tol: 1e-10,
            picard_max_iter: 50,
            coupling: Coupling::SinglePass,
            re: 1.0,
            rm: 1.0,
            s: 1.0,
            div_clean_threshold: 1e-6,
            compatibility: CompatibilityPolicy::Reject,
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.nx, self.ny)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(MhdError::Inconsistent(format!("solver config: {what}")));
        if self.dt.is_nan() || self.dt <= 0.0 {
            return bad("dt must be positive");
        }
        if self.horizon.is_nan() || self.horizon < self.dt {
            return bad("horizon must be at least dt");
        }
        if self.picard_tol.is_nan() || self.picard_tol <= 0.0 || self.picard_max_iter == 0 {
            return bad("Picard tolerance and iteration cap must be positive");
        }
        if let Coupling::FixedPoint { tol, max_iter } = self.coupling {
            if tol.is_nan() || tol <= 0.0 || max_iter == 0 {
                return bad("outer tolerance and iteration cap must be positive");
            }
        }
        if !(self.re > 0.0 && self.rm > 0.0 && self.s >= 0.0) {
            return bad("Re, Rm must be positive and S non-negative");
        }
        self.grid().map(|_| ())
    }

    /// Number of steps to reach the horizon.
    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }

    pub fn truncation_count(&self) -> u64 {
        match self.truncation {
            Truncation::Full => 0,
            Truncation::Modes(n) => n as u64,
        }
    }
}

/// Body forces `(f_u, f_b)` as functions of time.
pub type ForcingFn = Arc<dyn Fn(Grid, f64) -> (VectorField, VectorField) + Send + Sync>;

/// Boundary data and optional forcing.
#[derive(Clone)]
pub struct Problem {
    pub trace: BoundaryTrace,
    pub forcing: Option<ForcingFn>,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("trace", &self.trace)
            .field("forcing", &self.forcing.is_some())
            .finish()
    }
}

impl Problem {
    pub fn unforced(trace: BoundaryTrace) -> Self {
        Self {
            trace,
            forcing: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub u: VectorField,
    pub b: VectorField,
    pub p: ScalarField,
}

impl SimState {
    pub fn zero(grid: Grid) -> Self {
        Self {
            t: 0.0,
            u: VectorField::zeros(grid),
            b: VectorField::zeros(grid),
            p: ScalarField::zeros(grid),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub picard_iterations: usize,
    pub picard_residual: f64,
    /// Largest measured Picard contraction ratio in the step.
    pub contraction: f64,
    pub outer_iterations: usize,
    pub outer_residual: f64,
    pub dt: f64,
    pub div_b: f64,
    pub cleaned: bool,
}

/// Per-condition residuals of the initial data.
#[derive(Debug, Clone, PartialEq)]
pub struct CompatibilityReport {
    pub div_u: f64,
    pub div_b: f64,
    pub div_tolerance: f64,
    pub u_trace: TraceMismatch,
    pub b_trace: TraceMismatch,
}

impl CompatibilityReport {
    pub fn passes(&self) -> bool {
        self.div_u <= self.div_tolerance
            && self.div_b <= self.div_tolerance
            && self.u_trace.passes()
            && self.b_trace.passes()
    }
}

pub fn compatibility_check(
    u0: &VectorField,
    b0: &VectorField,
    trace: &BoundaryTrace,
) -> Result<CompatibilityReport> {
    let g = u0.grid;
    g.ensure_same(&b0.grid)?;
    let zero = BoundaryTrace::zero(trace.grid)?;
    let scale = 1.0 + u0.max_abs().max(b0.max_abs()) / g.dx.min(g.dy);
    Ok(CompatibilityReport {
        div_u: divergence(u0).max_abs(),
        div_b: divergence(b0).max_abs(),
        div_tolerance: 1e-9 * scale,
        u_trace: trace_mismatch(u0, &zero, 0.0)?,
        b_trace: trace_mismatch(b0, trace, 0.0)?,
    })
}

/// Precomputed operators for stepping on one grid.
pub struct Stepper<'a> {
    pub cfg: SolverConfig,
    pub grid: Grid,
    helm_b: VectorHelmholtz,
    helm_u: VectorHelmholtz,
    projector: Projector,
    lifter: Lifter,
    basis: Option<&'a SpectralBasis>,
}

impl<'a> Stepper<'a> {
    pub fn new(cfg: SolverConfig, basis: Option<&'a SpectralBasis>) -> Result<Self> {
        cfg.validate()?;
        let grid = cfg.grid()?;
        if let Truncation::Modes(n) = cfg.truncation {
            let b = basis.ok_or(MhdError::Capacity {
                requested: n,
                available: 0,
            })?;
            grid.ensure_same(&b.grid)?;
            if n > b.count() {
                return Err(MhdError::Capacity {
                    requested: n,
                    available: b.count(),
                });
            }
        }
        Ok(Self {
            helm_b: VectorHelmholtz::new(grid),
            helm_u: VectorHelmholtz::new(grid),
            projector: Projector::new(grid),
            lifter: Lifter::new(grid),
            grid,
            cfg,
            basis,
        })
    }

    pub fn projector(&self) -> &Projector {
        &self.projector
    }

    pub fn lifter(&self) -> &Lifter {
        &self.lifter
    }

    /// Brings initial data into an admissible state or rejects it.
    pub fn admit(
        &self,
        u0: &VectorField,
        b0: &VectorField,
        trace: &BoundaryTrace,
    ) -> Result<(VectorField, VectorField)> {
        let rep = compatibility_check(u0, b0, trace)?;
        if rep.passes() {
            return Ok((u0.clone(), b0.clone()));
        }
        match self.cfg.compatibility {
            CompatibilityPolicy::Reject => Err(MhdError::Compatibility(format!(
                "div u {:e}, div b {:e} (tolerance {:e}), u trace {:e}, b trace {:e}",
                rep.div_u,
                rep.div_b,
                rep.div_tolerance,
                rep.u_trace.total(),
                rep.b_trace.total()
            ))),
            CompatibilityPolicy::Project => {
                let mut u = u0.clone();
                u.zero_normal_walls();
                let (u, _) = self.projector.project(&u);
                let mut b = b0.clone();
                trace.walls(0.0).impose_normal(&mut b);
                let b = self.clean_divergence(&b);
                Ok((u, b))
            }
        }
    }

    /// Removes the gradient part of the interior of `b`; the trace is untouched.
    pub fn clean_divergence(&self, b: &VectorField) -> VectorField {
        let phi = self.projector.poisson(&divergence(b));
        let mut out = b.clone();
        out.axpy(-1.0, &gradient(&phi));
        out
    }

    pub fn b_step(
        &self,
        u_frozen: &VectorField,
        b_prev: &VectorField,
        walls: &WallValues,
        f_b: Option<&VectorField>,
    ) -> Result<(VectorField, BStepReport)> {
        bstep::b_step(self, u_frozen, b_prev, walls, f_b)
    }

    pub fn u_step(
        &self,
        b: &VectorField,
        b_walls: &WallValues,
        u_prev: &VectorField,
        u_bar: &VectorField,
        f_u: Option<&VectorField>,
    ) -> Result<(VectorField, ScalarField, UStepReport)> {
        ustep::u_step(self, b, b_walls, u_prev, u_bar, f_u)
    }

    /// Advances `state` by one step of size `cfg.dt`.
    pub fn coupled_step(
        &self,
        state: &SimState,
        problem: &Problem,
    ) -> Result<(SimState, StepReport)> {
        let t1 = state.t + self.cfg.dt;
        let wrap = |e: MhdError| MhdError::StepFailure {
            t: t1,
            source: Box::new(e),
        };
        let walls = problem.trace.walls(t1);
        let forcing = problem.forcing.as_ref().map(|f| f(self.grid, t1));
        let (f_u, f_b) = match &forcing {
            Some((a, b)) => (Some(a), Some(b)),
            None => (None, None),
        };
        let mut report = StepReport {
            picard_iterations: 0,
            picard_residual: 0.0,
            contraction: 0.0,
            outer_iterations: 0,
            outer_residual: 0.0,
            dt: self.cfg.dt,
            div_b: 0.0,
            cleaned: false,
        };
        let absorb = |r: &BStepReport, rep: &mut StepReport| {
            rep.picard_iterations += r.iterations;
            rep.picard_residual = r.residual;
            rep.contraction = rep.contraction.max(r.contraction);
        };
        let (u, mut b, p) = match self.cfg.coupling {
            Coupling::SinglePass => {
                let (b, br) = self.b_step(&state.u, &state.b, &walls, f_b).map_err(wrap)?;
                absorb(&br, &mut report);
                let (u, p, _) = self
                    .u_step(&b, &walls, &state.u, &state.u, f_u)
                    .map_err(wrap)?;
                report.outer_iterations = 1;
                (u, b, p)
            }
            Coupling::FixedPoint { tol, max_iter } => {
                let mut u_bar = state.u.clone();
                let mut history: Vec<f64> = Vec::new();
                let mut out = None;
                for k in 1..=max_iter {
                    let (b, br) = self.b_step(&u_bar, &state.b, &walls, f_b).map_err(wrap)?;
                    absorb(&br, &mut report);
                    let (u, p, _) = self
                        .u_step(&b, &walls, &state.u, &u_bar, f_u)
                        .map_err(wrap)?;
                    let res = u.sub(&u_bar).norm_l2();
                    report.outer_iterations = k;
                    report.outer_residual = res;
                    let converged = res <= tol * u.norm_l2().max(1.0);
                    let monotone = history.last().is_none_or(|&last| res < last);
                    history.push(res);
                    if converged {
                        out = Some((u, b, p));
                        break;
                    }
                    if monotone {
                        u_bar = u;
                    } else {
                        // damped update on a non-monotone residual
                        let d = u.sub(&u_bar);
                        u_bar.axpy(0.5, &d);
                    }
                }
                out.ok_or_else(|| wrap(MhdError::OuterDivergence { t: t1, history }))?
            }
        };
        let div_b = divergence(&b).norm_l2();
        report.div_b = div_b;
        if div_b > self.cfg.div_clean_threshold {
            b = self.clean_divergence(&b);
            report.cleaned = true;
        }
        if !(u.is_finite() && b.is_finite()) {
            return Err(wrap(MhdError::Inconsistent("non-finite state".into())));
        }
        Ok((SimState { t: t1, u, b, p }, report))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::{curl_of_stream, gradient_energy};
    use std::f64::consts::PI;

    fn smooth_state(g: Grid, a: f64, c: f64) -> (VectorField, VectorField) {
        let u = curl_of_stream(g, |x, y| {
            a * (PI * x).sin().powi(2) * (PI * y).sin().powi(2)
        });
        let b = curl_of_stream(g, |x, y| {
            c * (PI * x).sin().powi(2) * (2.0 * PI * y).sin() * (PI * y).sin()
        });
        (u, b)
    }

    #[test]
    fn zero_state_stays_zero() {
        let g = Grid::square(8).unwrap();
        let cfg = SolverConfig::new(8, 1e-2, 0.1);
        let st = Stepper::new(cfg, None).unwrap();
        let p = Problem::unforced(BoundaryTrace::zero(g).unwrap());
        let (next, rep) = st.coupled_step(&SimState::zero(g), &p).unwrap();
        assert_eq!(next.u.max_abs() + next.b.max_abs() + next.p.max_abs(), 0.0);
        assert!(rep.contraction == 0.0);
    }

    #[test]
    fn fixed_point_mode_has_exact_energy_law() {
        let g = Grid::square(16).unwrap();
        let mut cfg = SolverConfig::new(16, 1e-3, 1e-2);
        cfg.coupling = Coupling::FixedPoint {
            tol: 1e-12,
            max_iter: 50,
        };
        cfg.div_clean_threshold = f64::INFINITY;
        let st = Stepper::new(cfg, None).unwrap();
        let (u, b) = smooth_state(g, 2.0, 1.5);
        let p = Problem::unforced(BoundaryTrace::zero(g).unwrap());
        let mut s = SimState {
            t: 0.0,
            u,
            b,
            p: ScalarField::zeros(g),
        };
        let z = WallValues::zero(&g);
        for _ in 0..5 {
            let e0 = s.u.norm_l2_sq() + s.b.norm_l2_sq();
            let (n, _) = st.coupled_step(&s, &p).unwrap();
            let e1 = n.u.norm_l2_sq() + n.b.norm_l2_sq();
            let diss = 2.0 * (gradient_energy(&n.u, &z) + gradient_energy(&n.b, &z));
            let jump = n.u.sub(&s.u).norm_l2_sq() + n.b.sub(&s.b).norm_l2_sq();
            // E¹ − E⁰ + dt·2D + |Δ|² = 0
            let resid = e1 - e0 + 1e-3 * diss + jump;
            assert!(resid.abs() < 1e-9 * e0, "{resid}");
            s = n;
        }
    }

    #[test]
    fn compatibility_detects_divergence_and_trace() {
        let g = Grid::square(8).unwrap();
        let tr = BoundaryTrace::zero(g).unwrap();
        let (u, b) = smooth_state(g, 1.0, 1.0);
        assert!(compatibility_check(&u, &b, &tr).unwrap().passes());
        let bad = VectorField::from_fn(g, |x, _| [x * (1.0 - x), 0.0]);
        let rep = compatibility_check(&bad, &b, &tr).unwrap();
        assert!(!rep.passes() && rep.div_u > 0.5);
    }
}
