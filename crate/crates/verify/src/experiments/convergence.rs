use std::f64::consts::PI;

use mhd_core::dynamics::{Coupling, RunOptions, SimState, SolverConfig, Stepper};
use mhd_core::ops::{gradient_energy, identity_residuals};
use mhd_core::spectral::build_laplacian_basis;
use mhd_core::{Grid, VectorField, WallValues};

use super::fitted_slope;
use crate::error::Result;
use crate::mms::Manufactured;
use crate::report::{ExperimentReport, Table};
use crate::scenarios::{scenario, Shear};

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityParams {
    pub resolutions: Vec<usize>,
    pub min_ratio: f64,
}

impl Default for IdentityParams {
    fn default() -> Self {
        Self {
            resolutions: vec![32, 64],
            min_ratio: 3.5,
        }
    }
}

fn identity_fields(g: Grid) -> (VectorField, VectorField) {
    let b = VectorField::from_fn(g, |x, y| {
        [
            (2.0 * PI * x).sin() * (PI * y).cos() + x * y,
            (PI * x).cos() * (3.0 * y).sin() - 0.5 * y * y,
        ]
    });
    let u = VectorField::from_fn(g, |x, y| {
        [(PI * (x + y)).sin(), (2.0 * x).exp() * (PI * y).cos() * 0.3]
    });
    (b, u)
}

/// Residuals of the three vector identities on smooth fields under mesh halving.
pub fn identity_suite(p: &IdentityParams) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("identities", &format!("{p:?}"));
    let mut table = Table::new(
        "residuals",
        &["nx", "curl_cross", "curl_curl", "curl_of_cross"],
    );
    let mut prev: Option<[f64; 3]> = None;
    for &n in &p.resolutions {
        let g = Grid::square(n)?;
        let (b, u) = identity_fields(g);
        let r = identity_residuals(&b, &u)?;
        table.push(vec![n as f64, r[0], r[1], r[2]]);
        if let Some(q) = prev {
            for (k, name) in ["curl_cross", "curl_curl", "curl_of_cross"]
                .iter()
                .enumerate()
            {
                rep.at_least(
                    &format!("{name}_reduction_nx{n}"),
                    "vector identities hold to second order",
                    q[k] / r[k],
                    p.min_ratio,
                );
            }
        }
        prev = Some(r);
    }
    rep.table(table);
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MmsParams {
    pub spatial_resolutions: Vec<usize>,
    pub spatial_dt: f64,
    pub spatial_horizon: f64,
    pub temporal_nx: usize,
    pub temporal_dts: Vec<f64>,
    pub temporal_horizon: f64,
    pub min_spatial_order: f64,
    pub min_temporal_order: f64,
}

impl Default for MmsParams {
    fn default() -> Self {
        Self {
            spatial_resolutions: vec![16, 32, 64],
            spatial_dt: 1e-2,
            spatial_horizon: 0.2,
            temporal_nx: 32,
            temporal_dts: vec![4e-3, 2e-3, 1e-3],
            temporal_horizon: 0.2,
            min_spatial_order: 1.9,
            min_temporal_order: 0.9,
        }
    }
}

/// Spatial order from the steady manufactured state, whose discrete evolution carries
/// no time error; temporal order from successive differences of the unsteady solution.
pub fn mms_convergence(p: &MmsParams) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("mms", &format!("{p:?}"));
    let steady = Manufactured::steady(Shear::Sine);
    let mut spatial = Table::new("spatial", &["nx", "dt", "err_u", "err_b"]);
    for &n in &p.spatial_resolutions {
        let sc = steady.scenario(
            "mms_steady",
            SolverConfig::new(n, p.spatial_dt, p.spatial_horizon),
        )?;
        let out = sc.run(None, &RunOptions::default())?;
        let (eu, eb) = steady.errors(&out.final_state);
        spatial.push(vec![n as f64, p.spatial_dt, eu, eb]);
    }
    let logh: Vec<f64> = p
        .spatial_resolutions
        .iter()
        .map(|&n| -(n as f64).ln())
        .collect();
    for (col, name) in [("err_u", "velocity"), ("err_b", "magnetic")] {
        let e: Vec<f64> = spatial
            .column(col)
            .unwrap()
            .iter()
            .map(|v| v.ln())
            .collect();
        rep.at_least(
            &format!("spatial_order_{name}"),
            "manufactured solution, second-order space discretization",
            fitted_slope(&logh, &e),
            p.min_spatial_order,
        );
    }
    rep.table(spatial);

    let unsteady = Manufactured::unsteady(Shear::Sine);
    let mut finals: Vec<SimState> = Vec::new();
    let mut temporal = Table::new("temporal", &["dt", "err_u", "err_b", "diff_to_next"]);
    for &dt in &p.temporal_dts {
        let sc = unsteady.scenario(
            "mms_unsteady",
            SolverConfig::new(p.temporal_nx, dt, p.temporal_horizon),
        )?;
        finals.push(sc.run(None, &RunOptions::default())?.final_state);
    }
    let diffs: Vec<f64> = finals
        .windows(2)
        .map(|w| (w[0].u.sub(&w[1].u).norm_l2_sq() + w[0].b.sub(&w[1].b).norm_l2_sq()).sqrt())
        .collect();
    for (k, (dt, st)) in p.temporal_dts.iter().zip(&finals).enumerate() {
        let (eu, eb) = unsteady.errors(st);
        temporal.push(vec![*dt, eu, eb, diffs.get(k).copied().unwrap_or(f64::NAN)]);
    }
    for (k, w) in diffs.windows(2).enumerate() {
        let ratio = p.temporal_dts[k] / p.temporal_dts[k + 1];
        rep.at_least(
            &format!("temporal_order_{k}"),
            "manufactured solution, first-order implicit time stepping",
            (w[0] / w[1]).ln() / ratio.ln(),
            p.min_temporal_order,
        );
    }
    rep.table(temporal);
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyParams {
    pub nx: usize,
    pub dts: Vec<f64>,
    pub horizon: f64,
    pub scenario: String,
    /// Tolerance on the discrete energy identity relative to `E(0)`.
    pub identity_tol: f64,
    /// Bound on `(time-integrated margin ratio) / (dt ratio)` between successive step sizes.
    pub first_order_slack: f64,
}

impl Default for EnergyParams {
    fn default() -> Self {
        Self {
            nx: 32,
            dts: vec![2e-3, 1e-3],
            horizon: 0.1,
            scenario: "decay".into(),
            identity_tol: 1e-8,
            first_order_slack: 1.2,
        }
    }
}

struct EnergyTrace {
    /// `(E^{n+1} − E^n)/dt + 2(‖∇u^{n+1}‖² + ‖∇b^{n+1}‖²)` per step.
    margins: Vec<f64>,
    identity: f64,
    energies: Vec<f64>,
}

fn energy_trace(p: &EnergyParams, dt: f64) -> Result<EnergyTrace> {
    let mut sc = scenario(&p.scenario, p.nx, dt, p.horizon)?;
    sc.cfg.coupling = Coupling::FixedPoint {
        tol: 1e-13,
        max_iter: 200,
    };
    // the divergence cleaning projection removes energy outside the identity
    sc.cfg.div_clean_threshold = f64::INFINITY;
    let st = Stepper::new(sc.cfg.clone(), None)?;
    let (u, b) = st.admit(&sc.u0, &sc.b0, &sc.problem.trace)?;
    let mut state = SimState::zero(st.grid);
    state.u = u;
    state.b = b;
    let zero = WallValues::zero(&st.grid);
    let e0 = state.u.norm_l2_sq() + state.b.norm_l2_sq();
    let mut out = EnergyTrace {
        margins: Vec::new(),
        identity: 0.0,
        energies: vec![e0],
    };
    for _ in 0..sc.cfg.steps() {
        let (next, _) = st.coupled_step(&state, &sc.problem)?;
        let e_prev = state.u.norm_l2_sq() + state.b.norm_l2_sq();
        let e = next.u.norm_l2_sq() + next.b.norm_l2_sq();
        let diss = gradient_energy(&next.u, &zero) / sc.cfg.re
            + gradient_energy(&next.b, &zero) / sc.cfg.rm;
        let jump = next.u.sub(&state.u).norm_l2_sq() + next.b.sub(&state.b).norm_l2_sq();
        out.margins.push((e - e_prev) / dt + 2.0 * diss);
        out.identity = out
            .identity
            .max((e - e_prev + 2.0 * dt * diss + jump).abs() / e0.max(f64::MIN_POSITIVE));
        out.energies.push(e);
        state = next;
    }
    Ok(out)
}

/// Homogeneous energy law under fully coupled fixed-point stepping.
pub fn energy_law(p: &EnergyParams) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("energy_law", &format!("{p:?}"));
    let mut table = Table::new(
        "margins",
        &[
            "dt",
            "max_abs_margin",
            "integrated_margin",
            "identity_residual",
            "max_energy_increment",
        ],
    );
    let mut integrated = Vec::new();
    for &dt in &p.dts {
        let tr = energy_trace(p, dt)?;
        let m = tr.margins.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let incr = tr
            .energies
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max);
        let l1: f64 = tr.margins.iter().map(|v| v.abs() * dt).sum();
        table.push(vec![dt, m, l1, tr.identity, incr]);
        rep.at_most(
            &format!("discrete_identity_dt{dt:e}"),
            "homogeneous energy identity of the implicit scheme",
            tr.identity,
            p.identity_tol,
        );
        rep.at_most(
            &format!("margin_sign_dt{dt:e}"),
            "homogeneous energy law",
            tr.margins.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            0.0,
        );
        rep.holds(
            &format!("energy_decreasing_dt{dt:e}"),
            "energy strictly decreasing without boundary data",
            incr < 0.0,
        );
        integrated.push(l1);
    }
    for (k, w) in integrated.windows(2).enumerate() {
        rep.at_most(
            &format!("margin_first_order_{k}"),
            "energy law margin is O(dt)",
            (w[1] / w[0]) / (p.dts[k + 1] / p.dts[k]),
            p.first_order_slack,
        );
    }
    rep.table(table);
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatParams {
    pub nx: usize,
    pub dt: f64,
    pub horizon: f64,
    pub rel_tol: f64,
}

impl Default for HeatParams {
    fn default() -> Self {
        Self {
            nx: 32,
            dt: 1e-4,
            horizon: 0.05,
            rel_tol: 0.01,
        }
    }
}

/// Decay of the first Laplacian eigenmode under the magnetic step with `u ≡ 0`.
pub fn heat_decay(p: &HeatParams) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("heat_decay", &format!("{p:?}"));
    let g = Grid::square(p.nx)?;
    let lap = build_laplacian_basis(g, 1)?;
    let mu1 = lap.eigenvalues[0];
    let cfg = SolverConfig::new(p.nx, p.dt, p.horizon);
    let st = Stepper::new(cfg.clone(), None)?;
    let zero_u = VectorField::zeros(g);
    let walls = WallValues::zero(&g);
    let mut b = lap.modes[0].clone();
    let mut t = vec![0.0];
    let mut logn = vec![b.norm_l2_sq().ln()];
    for k in 1..=cfg.steps() {
        b = st.b_step(&zero_u, &b, &walls, None)?.0;
        t.push(k as f64 * p.dt);
        logn.push(b.norm_l2_sq().ln());
    }
    let rate = -fitted_slope(&t, &logn);
    let mut table = Table::new("rate", &["mu1", "fitted_rate", "two_mu1"]);
    table.push(vec![mu1, rate, 2.0 * mu1]);
    rep.table(table);
    rep.at_most(
        "rate_vs_eigenvalue",
        "heat semigroup decays at twice the first Dirichlet eigenvalue",
        (rate / (2.0 * mu1) - 1.0).abs(),
        p.rel_tol,
    );
    Ok(rep)
}
