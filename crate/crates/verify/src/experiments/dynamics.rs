use std::f64::consts::PI;

use mhd_core::dynamics::{Problem, RunOptions, SimState, Stepper};
use mhd_core::estimates::{
    absorbing_radii, gronwall_weak, smallness_gate, unit_window_integrals, AbsorbingConstants,
    CalibrationStore, EnergyLedger, Recorder,
};
use mhd_core::lifting::{trapezoid, BoundaryTrace};
use mhd_core::ops::gradient_energy;
use mhd_core::spectral::{build_laplacian_basis, build_stokes_basis, poincare_constants};
use mhd_core::{Grid, VectorField, WallValues};

use super::calibrate::keys;
use crate::error::{Result, VerifyError};
use crate::report::{ExperimentReport, Table};
use crate::scenarios::{
    magnetic_bump, scenario, scenario_parameters, shear_field, velocity_bump, Amplitude, Scenario,
    Shear,
};

#[derive(Debug, Clone, PartialEq)]
pub struct GronwallParams {
    pub nx: usize,
    pub dt: f64,
    pub horizon: f64,
    pub scenarios: Vec<String>,
}

impl Default for GronwallParams {
    fn default() -> Self {
        Self {
            nx: 32,
            dt: 2e-3,
            horizon: 0.5,
            scenarios: [
                "decay",
                "oscillatory",
                "ramped",
                "pulsed",
                "periodic_small",
                "coupled_reference",
            ]
            .map(String::from)
            .to_vec(),
        }
    }
}

/// Integrated weak energy bound with the frozen constant, at every recorded instant.
pub fn gronwall_suite(p: &GronwallParams, store: &CalibrationStore) -> Result<ExperimentReport> {
    let c = store.require(keys::GRONWALL)?;
    let mut rep = ExperimentReport::new("gronwall", &format!("{p:?} c={c:e}"));
    let mut table = Table::new(
        "bounds",
        &["scenario", "max_lhs_over_bound", "phi_T", "psi_T", "M_T"],
    );
    for (k, id) in p.scenarios.iter().enumerate() {
        let out = scenario(id, p.nx, p.dt, p.horizon)?.run(None, &RunOptions::default())?;
        let gw = gronwall_weak(&out.ledger, c);
        let worst = gw
            .lhs
            .iter()
            .zip(&gw.bound)
            .filter(|(_, b)| **b > 0.0)
            .map(|(l, b)| l / b)
            .fold(0.0, f64::max);
        table.push(vec![
            k as f64,
            worst,
            *gw.phi.last().unwrap_or(&0.0),
            *gw.psi.last().unwrap_or(&0.0),
            gw.m_t,
        ]);
        rep.at_most(
            &format!("bound_{id}"),
            "energy plus dissipation below (e^phi phi + 1) psi",
            worst,
            1.0 + 1e-12,
        );
    }
    rep.table(table);
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DependenceParams {
    pub nx: usize,
    pub dt: f64,
    pub horizon: f64,
    pub scenario: String,
    pub eps: Vec<f64>,
    /// Allowed spread of `D(ε)/ε²` across `ε`.
    pub factor: f64,
}

impl Default for DependenceParams {
    fn default() -> Self {
        Self {
            nx: 32,
            dt: 2e-3,
            horizon: 0.25,
            scenario: "oscillatory".into(),
            eps: vec![1e-2, 1e-3, 1e-4],
            factor: 4.0,
        }
    }
}

/// `sup(‖δu‖² + ‖δb‖²) + ∫(‖∇δu‖² + ‖∇δb‖²)` between two runs kept at every step.
fn difference_norm(a: &[SimState], b: &[SimState], ta: &BoundaryTrace, tb: &BoundaryTrace) -> f64 {
    let zero = WallValues::zero(&a[0].u.grid);
    let mut sup: f64 = 0.0;
    let mut t = Vec::with_capacity(a.len());
    let mut grad = Vec::with_capacity(a.len());
    for (x, y) in a.iter().zip(b) {
        let du = x.u.sub(&y.u);
        let db = x.b.sub(&y.b);
        let mut walls = ta.walls(x.t);
        walls.axpy(-1.0, &tb.walls(x.t));
        sup = sup.max(du.norm_l2_sq() + db.norm_l2_sq());
        t.push(x.t);
        grad.push(gradient_energy(&du, &zero) + gradient_energy(&db, &walls));
    }
    sup + trapezoid(&t, &grad)
}

fn perturbed_trace(g: Grid, a: Amplitude, eps: f64) -> Result<BoundaryTrace> {
    Ok(BoundaryTrace::from_fn(g, move |x, y, t| {
        let base = Shear::Sine.value(x, y);
        let pert = Shear::Linear.value(x, y);
        let (s, e) = (a.eval(t), eps * (2.0 * PI * t).sin());
        [s * base[0] + e * pert[0], s * base[1] + e * pert[1]]
    })?)
}

/// Lipschitz dependence on initial and on boundary data.
pub fn continuous_dependence(p: &DependenceParams) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("continuous_dependence", &format!("{p:?}"));
    let base = scenario(&p.scenario, p.nx, p.dt, p.horizon)?;
    let (amp, _, _) = scenario_parameters(&p.scenario)?;
    let g = base.cfg.grid()?;
    let keep = RunOptions {
        keep_every: Some(1),
        checkpoint: None,
    };
    let reference = base.run(None, &keep)?;
    let stokes = build_stokes_basis(g, 2)?;

    for kind in ["initial", "boundary"] {
        let mut table = Table::new(kind, &["eps", "D", "D_over_eps_sq", "hbar_H12_int"]);
        let mut ds = Vec::new();
        for &eps in &p.eps {
            let mut sc = base.clone();
            if kind == "initial" {
                sc.u0.axpy(eps, &stokes.modes[0]);
                sc.b0.axpy(eps, &stokes.modes[1]);
            } else {
                sc.problem = Problem::unforced(perturbed_trace(g, amp, eps)?);
            }
            let out = sc.run(None, &keep)?;
            let d = difference_norm(
                &out.states,
                &reference.states,
                &sc.problem.trace,
                &base.problem.trace,
            );
            let h_int = if kind == "boundary" {
                let t = out.ledger.times();
                let diff = perturbed_trace(g, Amplitude::Constant(0.0), eps)?;
                let mut rec = Recorder::new(&VectorField::zeros(g), 0.0);
                let mut vals = Vec::with_capacity(t.len());
                for &s in &t {
                    let mut st = SimState::zero(g);
                    st.t = s;
                    vals.push(rec.record(&st, &diff)?.h_half_sq);
                }
                trapezoid(&t, &vals)
            } else {
                0.0
            };
            table.push(vec![eps, d, d / (eps * eps), h_int]);
            ds.push(d);
        }
        let scaled: Vec<f64> = ds.iter().zip(&p.eps).map(|(d, e)| d / (e * e)).collect();
        let hi = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = scaled.iter().copied().fold(f64::INFINITY, f64::min);
        rep.at_most(
            &format!("{kind}_quadratic_scaling"),
            "continuous dependence on the data",
            hi / lo,
            p.factor,
        );
        rep.holds(
            &format!("{kind}_monotone"),
            "continuous dependence on the data",
            ds.windows(2).all(|w| w[0] > w[1]) && ds.iter().all(|d| *d > 0.0),
        );
        if let (Some(k3), Some(k4)) = (
            p.eps.iter().position(|e| *e == 1e-3),
            p.eps.iter().position(|e| *e == 1e-4),
        ) {
            let r = ds[k3] / ds[k4];
            rep.at_least(
                &format!("{kind}_ratio_lower"),
                "continuous dependence on the data",
                r,
                25.0,
            );
            rep.at_most(
                &format!("{kind}_ratio_upper"),
                "continuous dependence on the data",
                r,
                400.0,
            );
        }
        rep.table(table);
    }
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardParams {
    pub nx: usize,
    pub dts: Vec<f64>,
    pub horizon: f64,
    pub scenario: String,
    /// Ratios must stay below one for every step at most this large.
    pub threshold_dt: f64,
    /// Allowed relative increase of the ratio when `dt` halves.
    pub slack: f64,
}

impl Default for PicardParams {
    fn default() -> Self {
        Self {
            nx: 32,
            dts: vec![4e-3, 2e-3, 1e-3],
            horizon: 0.1,
            scenario: "coupled_reference".into(),
            threshold_dt: 1e-3,
            slack: 0.05,
        }
    }
}

fn max_contraction(sc: &Scenario) -> Result<f64> {
    let out = sc.run(None, &RunOptions::default())?;
    Ok(out
        .reports
        .iter()
        .map(|r| r.contraction)
        .fold(0.0, f64::max))
}

/// Contraction ratio of the magnetic Picard iteration against the step size.
pub fn picard_study(p: &PicardParams) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("picard", &format!("{p:?}"));
    let (amp, mu, mb) = scenario_parameters(&p.scenario)?;
    let mut table = Table::new("ratios", &["dt", "max_ratio"]);
    let mut ratios = Vec::new();
    for &dt in &p.dts {
        let r = max_contraction(&scenario(&p.scenario, p.nx, dt, p.horizon)?)?;
        table.push(vec![dt, r]);
        if dt <= p.threshold_dt * (1.0 + 1e-12) {
            rep.at_most(
                &format!("below_one_dt{dt:e}"),
                "Picard map is a contraction for small steps",
                r,
                1.0,
            );
        }
        ratios.push(r);
    }
    for (k, w) in ratios.windows(2).enumerate() {
        rep.at_most(
            &format!("non_increasing_{k}"),
            "contraction improves as the step shrinks",
            w[1],
            w[0] * (1.0 + p.slack),
        );
    }
    rep.table(table);

    // coupling strength: doubling the velocity raises the ratio
    let dt = p.dts.iter().copied().fold(f64::INFINITY, f64::min);
    let base = scenario(&p.scenario, p.nx, dt, p.horizon)?;
    let strong = Scenario::shear_driven("doubled", base.cfg.clone(), amp, 2.0 * mu, mb)?;
    let (r1, r2) = (max_contraction(&base)?, max_contraction(&strong)?);
    rep.at_least(
        "stronger_velocity_raises_ratio",
        "contraction constant grows with the velocity bound",
        r2 / r1,
        1.0,
    );

    // u = 0: the magnetic step is linear and converges at once
    let st = Stepper::new(base.cfg.clone(), None)?;
    let g = st.grid;
    let (_, report) = st.b_step(
        &VectorField::zeros(g),
        &base.b0,
        &base.problem.trace.walls(dt),
        None,
    )?;
    rep.at_most(
        "decoupled_ratio",
        "linear heat step needs no iteration",
        report.contraction,
        1e-12,
    );
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AbsorbingParams {
    pub nx: usize,
    pub dt: f64,
    pub scenario: String,
    /// `E(0) = diam_factor · ρ0`.
    pub diam_factor: f64,
    /// Horizon of the trace-only pass that fixes `ρ0` before the run.
    pub probe_horizon: f64,
    /// Time simulated past `t0 + 1`.
    pub extra_time: f64,
    pub max_horizon: f64,
    /// Horizon of the homogeneous decay check.
    pub decay_horizon: f64,
}

impl Default for AbsorbingParams {
    fn default() -> Self {
        Self {
            nx: 32,
            dt: 2e-3,
            scenario: "periodic_small".into(),
            diam_factor: 100.0,
            probe_horizon: 2.0,
            extra_time: 0.25,
            max_horizon: 6.0,
            decay_horizon: 0.5,
        }
    }
}

/// Ledger of the boundary data alone, on a zero state.
fn trace_ledger(trace: &BoundaryTrace, dt: f64, horizon: f64) -> Result<EnergyLedger> {
    let g = trace.grid;
    let mut rec = Recorder::new(&VectorField::zeros(g), 0.0);
    let mut ledger = EnergyLedger::default();
    let steps = (horizon / dt).round() as usize;
    for k in 0..=steps {
        let mut st = SimState::zero(g);
        st.t = k as f64 * dt;
        ledger.push(rec.record(&st, trace)?)?;
    }
    Ok(ledger)
}

/// Entry of the trajectory into the `ρ0` ball and the window bound beyond `t0`.
pub fn absorbing(p: &AbsorbingParams, store: &CalibrationStore) -> Result<ExperimentReport> {
    let c_weak = store.require(keys::WEAK)?;
    let c_tilde = store.require(keys::C_TILDE)?;
    let c_omega = store.require(keys::C_OMEGA)?;
    let mut rep = ExperimentReport::new(
        "absorbing",
        &format!("{p:?} c={c_weak:e} c_tilde={c_tilde:e} c_omega={c_omega:e}"),
    );
    let g = Grid::square(p.nx)?;
    let pc = poincare_constants(&build_stokes_basis(g, 1)?, &build_laplacian_basis(g, 1)?)?;
    let k = AbsorbingConstants {
        c_p: pc.c_p,
        c0: c_weak,
        c1: c_weak,
        c_tilde,
        c_omega,
    };
    let (amp, mu, mb) = scenario_parameters(&p.scenario)?;
    let probe = scenario(&p.scenario, p.nx, p.dt, p.probe_horizon)?;
    let tl = trace_ledger(&probe.problem.trace, p.dt, p.probe_horizon)?;
    if !rep.holds(
        "smallness_gate",
        "boundary data small: c1 sup|h|^4 <= c_p",
        smallness_gate(&tl, k.c1, k.c_p),
    ) {
        return Ok(rep);
    }
    let rho0_probe = absorbing_radii(&tl, &k, 0.0).rho0;
    let diam = p.diam_factor * rho0_probe;

    // scale the interior bumps so that E(0) = diam
    let lift = shear_field(g, Shear::Sine).scaled(amp.eval(0.0));
    let (vb, vu) = (magnetic_bump(g).scaled(mb), velocity_bump(g).scaled(mu));
    let qa = vb.norm_l2_sq() + vu.norm_l2_sq();
    let qb = 2.0 * lift.dot(&vb);
    let qc = lift.norm_l2_sq() - diam;
    if qa <= 0.0 || qc > 0.0 {
        return Err(VerifyError::Parameter {
            name: "absorbing.diam_factor",
            reason: format!(
                "cannot reach E(0) = {diam:e} from the lift energy {:e}",
                lift.norm_l2_sq()
            ),
        });
    }
    let s = (-qb + (qb * qb - 4.0 * qa * qc).sqrt()) / (2.0 * qa);

    let t0 = absorbing_radii(&tl, &k, diam).t0;
    let horizon = ((t0 + 1.0 + p.extra_time) / p.dt).ceil() * p.dt;
    if horizon.is_nan() || horizon > p.max_horizon {
        return Err(VerifyError::Parameter {
            name: "absorbing.max_horizon",
            reason: format!("t0 + 1 = {} exceeds the allowed horizon", t0 + 1.0),
        });
    }
    let mut sc = Scenario::shear_driven(&p.scenario, probe.cfg.clone(), amp, s * mu, s * mb)?;
    sc.cfg.horizon = horizon;
    let out = sc.run(None, &RunOptions::default())?;
    let ledger = &out.ledger;
    let radii = absorbing_radii(ledger, &k, ledger.rows[0].energy());
    let mut table = Table::new(
        "radii",
        &[
            "c_p",
            "rho0",
            "rho1",
            "t0",
            "t2",
            "E0",
            "entry_time",
            "rho2_measured",
            "horizon",
        ],
    );

    let after: Vec<(f64, f64)> = ledger
        .rows
        .iter()
        .filter(|r| r.t >= radii.t0)
        .map(|r| (r.t, r.energy()))
        .collect();
    let worst = after
        .iter()
        .map(|(_, e)| e / radii.rho0)
        .fold(0.0, f64::max);
    // last instant outside the ball, then the first one after it
    let escape = ledger.rows.iter().rposition(|r| r.energy() > radii.rho0);
    let entry = match escape {
        Some(i) => ledger.rows.get(i + 1).map_or(f64::INFINITY, |r| r.t),
        None => 0.0,
    };
    let windows = unit_window_integrals(ledger, radii.t0);
    let wmax = windows.iter().map(|(_, v)| *v).fold(0.0, f64::max);
    let rho2 = ledger
        .rows
        .iter()
        .filter(|r| r.t >= radii.t2)
        .map(|r| r.grad_u_sq + r.grad_b_sq)
        .fold(0.0, f64::max);
    table.push(vec![
        k.c_p,
        radii.rho0,
        radii.rho1,
        radii.t0,
        radii.t2,
        ledger.rows[0].energy(),
        entry,
        rho2,
        horizon,
    ]);

    rep.at_most(
        "energy_in_ball_after_t0",
        "absorbing ball of radius rho0",
        worst,
        1.0,
    );
    rep.at_most(
        "entry_before_t0",
        "absorbing ball of radius rho0",
        entry,
        radii.t0,
    );
    rep.holds(
        "window_available",
        "window integrals after t0",
        !windows.is_empty(),
    );
    rep.at_most(
        "window_integrals",
        "unit-window dissipation below rho1",
        wmax / radii.rho1,
        1.0,
    );

    // homogeneous limit: exponential decay at rate c_p
    let decay =
        scenario("decay", p.nx, p.dt, p.decay_horizon)?.run(None, &RunOptions::default())?;
    let e0 = decay.ledger.rows[0].energy();
    let ratio = decay
        .ledger
        .rows
        .iter()
        .map(|r| r.energy() / (e0 * (-k.c_p * r.t).exp()))
        .fold(0.0, f64::max);
    rep.at_most(
        "homogeneous_decay",
        "zero boundary data: E(t) <= E(0) exp(-c_p t)",
        ratio,
        1.0 + 1e-12,
    );
    rep.table(table);
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeterminismParams {
    pub scenario: String,
    pub nx: usize,
    pub dt: f64,
    pub horizon: f64,
}

impl Default for DeterminismParams {
    fn default() -> Self {
        Self {
            scenario: "coupled_reference".into(),
            nx: 16,
            dt: 5e-3,
            horizon: 0.1,
        }
    }
}

/// Repeats a run and a calibrated experiment and compares the outputs bit for bit.
pub fn determinism(p: &DeterminismParams, store: &CalibrationStore) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("determinism", &format!("{p:?}"));
    let sc = scenario(&p.scenario, p.nx, p.dt, p.horizon)?;
    let a = sc.run(None, &RunOptions::default())?;
    let b = sc.run(None, &RunOptions::default())?;
    rep.holds(
        "final_state_identical",
        "runs are reproducible",
        a.final_state == b.final_state,
    );
    rep.holds(
        "ledger_identical",
        "runs are reproducible",
        a.ledger.to_csv_string()? == b.ledger.to_csv_string()?,
    );
    let gp = GronwallParams {
        nx: p.nx,
        dt: p.dt,
        horizon: p.horizon,
        scenarios: vec![p.scenario.clone()],
    };
    if store.get(keys::GRONWALL).is_some() {
        let r1 = gronwall_suite(&gp, store)?;
        let r2 = gronwall_suite(&gp, store)?;
        rep.holds(
            "experiment_identical",
            "experiments are reproducible",
            r1.assertions_csv()? == r2.assertions_csv()? && r1.tables == r2.tables,
        );
    }
    Ok(rep)
}
