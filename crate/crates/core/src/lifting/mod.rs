//! Liftings of the magnetic boundary data and the fractional boundary norms they are
//! estimated by.
//!
//! `h_E` is the componentwise discrete harmonic extension of the trace at one instant;
//! `h_p` solves the heat equation with initial value `b₀` and the trace as Dirichlet data.

mod trace;

pub use trace::{BoundaryMode, BoundaryTrace, Envelope, TraceFn, TraceSource, PERIMETER};

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{MhdError, Result};
use crate::fastsolve::VectorHelmholtz;
use crate::grid::{Grid, VectorField, WallValues};
use crate::ops::{gradient_energy, laplacian_vector};

/// Sobolev exponents for which boundary norms are defined.
pub const SUPPORTED_EXPONENTS: [f64; 4] = [-0.5, 0.0, 0.5, 1.5];

/// Exponent and optional Fourier truncation of a boundary norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionalNormSpec {
    pub s: f64,
    /// Keep wavenumbers `|k| ≤ truncation`; `None` keeps all.
    pub truncation: Option<usize>,
}

impl FractionalNormSpec {
    pub fn new(s: f64) -> Self {
        Self {
            s,
            truncation: None,
        }
    }
}

/// `‖h‖²_{Hˢ(Γ)} = P Σₖ (1+κₖ²)ˢ |ĥₖ|²` with `κₖ = 2πk/P`, summed over both components.
///
/// With `ĥₖ` the normalized DFT coefficients, `s = 0` reproduces the trapezoid `L²(Γ)` norm.
pub fn hs_norm_sq_samples(h: &[[f64; 2]], spec: FractionalNormSpec) -> Result<f64> {
    if !SUPPORTED_EXPONENTS.contains(&spec.s) {
        return Err(MhdError::UnsupportedExponent(spec.s));
    }
    let n = h.len();
    if let Some(k) = spec.truncation {
        if k > n / 2 {
            return Err(MhdError::Trace(format!(
                "truncation {k} exceeds {} for {n} samples",
                n / 2
            )));
        }
    }
    let kmax = spec.truncation.unwrap_or(n / 2);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let mut total = 0.0;
    for c in 0..2 {
        let mut buf: Vec<Complex<f64>> = h.iter().map(|v| Complex::new(v[c], 0.0)).collect();
        fft.process(&mut buf);
        for (k, z) in buf.iter().enumerate() {
            let kk = k.min(n - k);
            if kk > kmax {
                continue;
            }
            let kappa = 2.0 * std::f64::consts::PI * kk as f64 / PERIMETER;
            let c2 = z.norm_sqr() / (n * n) as f64;
            total += (1.0 + kappa * kappa).powf(spec.s) * c2;
        }
    }
    Ok(PERIMETER * total)
}

pub fn hs_norm(trace: &BoundaryTrace, t: f64, spec: FractionalNormSpec) -> Result<f64> {
    Ok(hs_norm_sq_samples(&trace.samples(t), spec)?.sqrt())
}

/// `‖∂ₜh‖_{Hˢ(Γ)}` from finite-difference time derivatives.
pub fn hs_norm_dt(trace: &BoundaryTrace, t: f64, spec: FractionalNormSpec) -> Result<f64> {
    Ok(hs_norm_sq_samples(&trace.time_derivative(t), spec)?.sqrt())
}

/// Reusable factorization for lifts on one grid.
#[derive(Debug, Clone)]
pub struct Lifter {
    pub grid: Grid,
    helm: VectorHelmholtz,
}

impl Lifter {
    pub fn new(grid: Grid) -> Self {
        Self {
            grid,
            helm: VectorHelmholtz::new(grid),
        }
    }

    /// Discrete harmonic field with the given Dirichlet data.
    pub fn harmonic(&self, walls: &WallValues) -> Result<VectorField> {
        let g = self.grid;
        let he = self.helm.solve(&VectorField::zeros(g), 0.0, 1.0, walls);
        let mut bc = VectorField::zeros(g);
        walls.impose_normal(&mut bc);
        let scale = laplacian_vector(&bc, walls)
            .norm_l2()
            .max(f64::MIN_POSITIVE);
        let res = laplacian_vector(&he, walls).norm_l2() / scale;
        if res > 1e-10 {
            return Err(MhdError::LinearSolver {
                solver: "harmonic extension",
                iterations: 1,
                residual: res,
            });
        }
        Ok(he)
    }

    /// One implicit Euler step of `∂ₜf = Δf` with Dirichlet data `walls` at the new time.
    pub fn heat_step(&self, f: &VectorField, dt: f64, walls: &WallValues) -> VectorField {
        self.helm.solve(&f.scaled(1.0 / dt), 1.0 / dt, 1.0, walls)
    }
}

pub fn harmonic_extend(trace: &BoundaryTrace, t: f64) -> Result<VectorField> {
    Lifter::new(trace.grid).harmonic(&trace.walls(t))
}

/// Boundary mismatch of a field against the trace at one instant, in `L²(Γ)`.
///
/// Normal components are stored on the wall faces and compared directly. Tangential
/// components are not stored on the walls; they are extrapolated linearly from the first
/// two interior rows, which is accurate to `O(dx²)`, and the reported allowance is the
/// `L²(Γ)` norm of the normal second difference that bounds that error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceMismatch {
    pub normal: f64,
    pub tangential: f64,
    pub allowance: f64,
    pub h_l2: f64,
}

impl TraceMismatch {
    pub fn tolerance(&self) -> f64 {
        1e-8 * (1.0 + self.h_l2)
    }

    pub fn total(&self) -> f64 {
        self.normal.hypot(self.tangential)
    }

    pub fn passes(&self) -> bool {
        self.normal <= self.tolerance() && self.tangential <= self.tolerance() + self.allowance
    }
}

pub fn trace_mismatch(b: &VectorField, trace: &BoundaryTrace, t: f64) -> Result<TraceMismatch> {
    let g = b.grid;
    g.ensure_same(&trace.grid)?;
    let h = trace.samples(t);
    let w = trace.walls_from_samples(&h);
    let ds = g.dx;
    let mut normal = 0.0;
    for j in 0..g.ny {
        normal += (b.u_at(0, j) - w.u_left[j]).powi(2) + (b.u_at(g.nx, j) - w.u_right[j]).powi(2);
    }
    for i in 0..g.nx {
        normal += (b.v_at(i, 0) - w.v_bottom[i]).powi(2) + (b.v_at(i, g.ny) - w.v_top[i]).powi(2);
    }
    let (mut tang, mut allow) = (0.0, 0.0);
    let corner = |k: usize, n: usize| if k == 0 || k == n { 0.5 } else { 1.0 };
    for i in 0..=g.nx {
        let wt = corner(i, g.nx);
        let (a0, a1, a2) = (b.u_at(i, 0), b.u_at(i, 1), b.u_at(i, 2));
        tang += wt * (1.5 * a0 - 0.5 * a1 - w.u_bottom[i]).powi(2);
        allow += wt * (a0 - 2.0 * a1 + a2).powi(2);
        let n = g.ny - 1;
        let (a0, a1, a2) = (b.u_at(i, n), b.u_at(i, n - 1), b.u_at(i, n - 2));
        tang += wt * (1.5 * a0 - 0.5 * a1 - w.u_top[i]).powi(2);
        allow += wt * (a0 - 2.0 * a1 + a2).powi(2);
    }
    for j in 0..=g.ny {
        let wt = corner(j, g.ny);
        let (a0, a1, a2) = (b.v_at(0, j), b.v_at(1, j), b.v_at(2, j));
        tang += wt * (1.5 * a0 - 0.5 * a1 - w.v_left[j]).powi(2);
        allow += wt * (a0 - 2.0 * a1 + a2).powi(2);
        let n = g.nx - 1;
        let (a0, a1, a2) = (b.v_at(n, j), b.v_at(n - 1, j), b.v_at(n - 2, j));
        tang += wt * (1.5 * a0 - 0.5 * a1 - w.v_right[j]).powi(2);
        allow += wt * (a0 - 2.0 * a1 + a2).powi(2);
    }
    Ok(TraceMismatch {
        normal: (normal * ds).sqrt(),
        tangential: (tang * ds).sqrt(),
        allowance: (allow * ds).sqrt(),
        h_l2: trace::l2_gamma(&h, ds),
    })
}

/// Measured constants of the two harmonic-lifting bounds over a time record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiftingReport {
    /// `∫‖h_E‖²_{H¹} / ∫‖h‖²_{H^{1/2}(Γ)}`
    pub ratio: f64,
    /// `∫‖∂ₜh_E‖²_{L²} / ∫‖∂ₜh‖²_{H^{-1/2}(Γ)}`
    pub ratio_dt: f64,
}

pub fn trapezoid(t: &[f64], f: &[f64]) -> f64 {
    t.windows(2)
        .zip(f.windows(2))
        .map(|(tw, fw)| 0.5 * (tw[1] - tw[0]) * (fw[0] + fw[1]))
        .sum()
}

/// Running trapezoid integral, starting at zero.
pub fn cumulative_trapezoid(t: &[f64], f: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(t.len());
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..t.len() {
        acc += 0.5 * (t[k] - t[k - 1]) * (f[k] + f[k - 1]);
        out.push(acc);
    }
    out
}

fn ratio(num: f64, den: f64, what: &str) -> Result<f64> {
    let scale = num.abs().max(den.abs());
    if scale == 0.0 {
        return Ok(0.0);
    }
    if den <= 1e-300 || den < 1e-14 * scale && num > 1e-14 * scale {
        return Err(MhdError::Inconsistent(format!(
            "{what}: zero denominator with numerator {num:e}"
        )));
    }
    Ok(num / den)
}

pub fn lifting_estimate_check(trace: &BoundaryTrace, times: &[f64]) -> Result<LiftingReport> {
    let lifter = Lifter::new(trace.grid);
    let half = FractionalNormSpec::new(0.5);
    let minus_half = FractionalNormSpec::new(-0.5);
    let (mut n0, mut d0, mut n1, mut d1) = (vec![], vec![], vec![], vec![]);
    for &t in times {
        let h = trace.samples(t);
        let w = trace.walls_from_samples(&h);
        let he = lifter.harmonic(&w)?;
        n0.push(he.norm_l2_sq() + gradient_energy(&he, &w));
        d0.push(hs_norm_sq_samples(&h, half)?);
        let dh = trace.time_derivative(t);
        let dhe = lifter.harmonic(&trace.walls_from_samples(&dh))?;
        n1.push(dhe.norm_l2_sq());
        d1.push(hs_norm_sq_samples(&dh, minus_half)?);
    }
    let integ = |f: &[f64]| {
        if times.len() == 1 {
            f[0]
        } else {
            trapezoid(times, f)
        }
    };
    Ok(LiftingReport {
        ratio: ratio(integ(&n0), integ(&d0), "harmonic lift")?,
        ratio_dt: ratio(integ(&n1), integ(&d1), "harmonic lift time derivative")?,
    })
}

/// What to do when initial data does not match the boundary trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CompatibilityPolicy {
    #[default]
    Reject,
    /// Overwrite the wall-normal faces with the trace and continue.
    Project,
}

#[derive(Debug, Clone)]
pub struct ParabolicRun {
    pub times: Vec<f64>,
    pub states: Vec<VectorField>,
}

/// Implicit Euler heat solve `∂ₜh_p = Δh_p`, `h_p(0) = b₀`, `h_p = h` on the walls.
pub fn parabolic_lift(
    b0: &VectorField,
    trace: &BoundaryTrace,
    dt: f64,
    steps: usize,
    policy: CompatibilityPolicy,
) -> Result<ParabolicRun> {
    let mm = trace_mismatch(b0, trace, 0.0)?;
    let mut start = b0.clone();
    if !mm.passes() {
        match policy {
            CompatibilityPolicy::Reject => {
                return Err(MhdError::Compatibility(format!(
                    "initial field misses the boundary trace by {:e} in L2(Gamma)",
                    mm.total()
                )))
            }
            CompatibilityPolicy::Project => trace.walls(0.0).impose_normal(&mut start),
        }
    }
    let lifter = Lifter::new(trace.grid);
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    times.push(0.0);
    states.push(start);
    let mut t = 0.0;
    for _ in 0..steps {
        t += dt;
        let next = lifter.heat_step(states.last().unwrap(), dt, &trace.walls(t));
        times.push(t);
        states.push(next);
    }
    Ok(ParabolicRun { times, states })
}

/// Both sides of a time-integrated inequality at every recorded instant.
#[derive(Debug, Clone, PartialEq)]
pub struct InequalityReport {
    pub times: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub constant: f64,
}

impl InequalityReport {
    /// `max (lhs − rhs)`; non-positive when the inequality holds everywhere.
    pub fn margin(&self) -> f64 {
        self.lhs
            .iter()
            .zip(&self.rhs)
            .map(|(l, r)| l - r)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Time series entering the two heat-lift energy bounds.
#[derive(Debug, Clone)]
pub struct ParabolicSeries {
    pub times: Vec<f64>,
    pub l2_sq: Vec<f64>,
    pub grad_sq: Vec<f64>,
    pub lap_sq: Vec<f64>,
    pub h_half_sq: Vec<f64>,
    pub h_three_half_sq: Vec<f64>,
    pub dth_minus_half_sq: Vec<f64>,
}

pub fn parabolic_series(run: &ParabolicRun, trace: &BoundaryTrace) -> Result<ParabolicSeries> {
    let mut s = ParabolicSeries {
        times: run.times.clone(),
        l2_sq: vec![],
        grad_sq: vec![],
        lap_sq: vec![],
        h_half_sq: vec![],
        h_three_half_sq: vec![],
        dth_minus_half_sq: vec![],
    };
    for (t, f) in run.times.iter().zip(&run.states) {
        let h = trace.samples(*t);
        let w = trace.walls_from_samples(&h);
        s.l2_sq.push(f.norm_l2_sq());
        s.grad_sq.push(gradient_energy(f, &w));
        s.lap_sq.push(laplacian_vector(f, &w).norm_l2_sq());
        s.h_half_sq
            .push(hs_norm_sq_samples(&h, FractionalNormSpec::new(0.5))?);
        s.h_three_half_sq
            .push(hs_norm_sq_samples(&h, FractionalNormSpec::new(1.5))?);
        s.dth_minus_half_sq.push(hs_norm_sq_samples(
            &trace.time_derivative(*t),
            FractionalNormSpec::new(-0.5),
        )?);
    }
    Ok(s)
}

/// The `L²` bound and the `H¹` bound of the heat lift, with constants `c_l2` and `c_h1`.
pub fn parabolic_estimate_check(
    series: &ParabolicSeries,
    c_l2: f64,
    c_h1: f64,
) -> (InequalityReport, InequalityReport) {
    let t = &series.times;
    let diss = cumulative_trapezoid(t, &series.grad_sq);
    let forcing = cumulative_trapezoid(t, &series.h_half_sq);
    let l2 = InequalityReport {
        times: t.clone(),
        lhs: series.l2_sq.iter().zip(&diss).map(|(a, b)| a + b).collect(),
        rhs: forcing.iter().map(|f| series.l2_sq[0] + c_l2 * f).collect(),
        constant: c_l2,
    };
    let h2: Vec<f64> = (0..t.len())
        .map(|k| series.l2_sq[k] + series.grad_sq[k] + series.lap_sq[k])
        .collect();
    let h2_int = cumulative_trapezoid(t, &h2);
    let data: Vec<f64> = (0..t.len())
        .map(|k| series.dth_minus_half_sq[k] + series.h_three_half_sq[k])
        .collect();
    let data_int = cumulative_trapezoid(t, &data);
    let h1_0 = series.l2_sq[0] + series.grad_sq[0];
    let h1 = InequalityReport {
        times: t.clone(),
        lhs: (0..t.len())
            .map(|k| series.l2_sq[k] + series.grad_sq[k] + h2_int[k])
            .collect(),
        rhs: data_int.iter().map(|d| h1_0 + c_h1 * d).collect(),
        constant: c_h1,
    };
    (l2, h1)
}
