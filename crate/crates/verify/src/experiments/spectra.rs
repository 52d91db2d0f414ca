use std::f64::consts::PI;

use mhd_core::dynamics::{RunOptions, SolverConfig};
use mhd_core::estimates::{
    brezis_gallouet_ratio, pair_truncation, stokes_regularity_ratio, tail_energy,
};
use mhd_core::fastsolve::Projector;
use mhd_core::lifting::Lifter;
use mhd_core::spectral::{basis_inequality_check, build_laplacian_basis, build_stokes_basis};
use mhd_core::{Grid, ScalarField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, VerifyError};
use crate::mms::Manufactured;
use crate::report::{ExperimentReport, Table};
use crate::scenarios::Shear;

#[derive(Debug, Clone, PartialEq)]
pub struct TailParams {
    pub nx: usize,
    pub dt: f64,
    pub sample_time: f64,
    pub ns: Vec<usize>,
    pub min_reduction: f64,
}

impl Default for TailParams {
    fn default() -> Self {
        Self {
            nx: 32,
            dt: 1e-2,
            sample_time: 0.5,
            ns: vec![4, 8, 16, 32],
            min_reduction: 10.0,
        }
    }
}

/// Tail `H¹` energy beyond the first `n` Stokes and paired `m` Laplacian modes.
pub fn tail_compactness(p: &TailParams) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("tail", &format!("{p:?}"));
    let n_max = *p.ns.iter().max().ok_or(VerifyError::Parameter {
        name: "tail.ns",
        reason: "empty list".into(),
    })?;
    let m = Manufactured::steady(Shear::Linear);
    let sc = m.scenario("tail_steady", SolverConfig::new(p.nx, p.dt, p.sample_time))?;
    let g = sc.cfg.grid()?;
    let state = sc.run(None, &RunOptions::default())?.final_state;
    let lifter = Lifter::new(g);
    let btilde = state
        .b
        .sub(&lifter.harmonic(&sc.problem.trace.walls(state.t))?);

    let stokes = build_stokes_basis(g, n_max + 1)?;
    let lambda_top = stokes.eigenvalues[n_max];
    // enough Laplacian modes to bracket λ_{n+1}
    let mut m_count = 4 * n_max + 16;
    let laplace = loop {
        let l = build_laplacian_basis(g, m_count)?;
        if l.eigenvalues.last().is_some_and(|&mu| mu > lambda_top) || m_count >= 2 * g.n_cells() {
            break l;
        }
        m_count *= 2;
    };

    let mut table = Table::new("tail", &["n", "m", "gamma", "gamma_inv_sqrt", "tail_h1"]);
    let mut tails = Vec::new();
    for &n in &p.ns {
        let mm = pair_truncation(&stokes, n, &laplace).unwrap_or(0);
        let gamma = stokes.eigenvalues[n].min(laplace.eigenvalues[mm]);
        let tail = tail_energy(&state.u, &stokes, n, &btilde, &laplace, mm)?;
        table.push(vec![n as f64, mm as f64, gamma, gamma.powf(-0.5), tail]);
        tails.push(tail);
    }
    rep.holds(
        "strictly_decreasing",
        "tail energy decreases with the truncation",
        tails.windows(2).all(|w| w[1] < w[0]),
    );
    if let (Some(first), Some(last)) = (tails.first(), tails.last()) {
        rep.at_least(
            "reduction",
            "tail energy vanishes as n grows",
            first / last,
            p.min_reduction,
        );
    }
    rep.table(table);
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenParams {
    pub resolutions: Vec<usize>,
    pub modes: usize,
    pub samples: usize,
    pub seed: u64,
    pub max_factor: f64,
}

impl Default for EigenParams {
    fn default() -> Self {
        Self {
            resolutions: vec![32, 64],
            modes: 10,
            samples: 200,
            seed: 7,
            max_factor: 2.0,
        }
    }
}

fn spread(v: &[f64]) -> f64 {
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    if lo > 0.0 {
        hi / lo
    } else {
        f64::INFINITY
    }
}

/// Basis inequality constant and Stokes regularity ratios across resolutions.
pub fn eigen_regularity(p: &EigenParams) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("eigen", &format!("{p:?}"));
    let mut cols = vec!["nx".to_string(), "c0".to_string(), "lambda1".to_string()];
    cols.extend((1..=p.modes).map(|i| format!("ratio_{i}")));
    let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut table = Table::new("constants", &col_refs);
    let mut c0s = Vec::new();
    let mut ratios: Vec<Vec<f64>> = Vec::new();
    for &n in &p.resolutions {
        let g = Grid::square(n)?;
        let stokes = build_stokes_basis(g, p.modes + 1)?;
        let c0 = basis_inequality_check(&stokes, p.modes, p.samples, p.seed)?.c0;
        let proj = Projector::new(g);
        let r = stokes.modes[..p.modes]
            .iter()
            .map(|m| stokes_regularity_ratio(m, &proj))
            .collect::<mhd_core::Result<Vec<f64>>>()?;
        let mut row = vec![n as f64, c0, stokes.eigenvalues[0]];
        row.extend(&r);
        table.push(row);
        c0s.push(c0);
        ratios.push(r);
    }
    rep.at_most(
        "c0_stable",
        "basis inequality constant is mesh independent",
        spread(&c0s),
        p.max_factor,
    );
    let worst = (0..p.modes)
        .map(|i| spread(&ratios.iter().map(|r| r[i]).collect::<Vec<_>>()))
        .fold(0.0, f64::max);
    rep.at_most(
        "regularity_stable",
        "Stokes regularity ratio is mesh independent",
        worst,
        p.max_factor,
    );
    rep.table(table);
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BrezisGallouetParams {
    pub resolutions: Vec<usize>,
    pub fields: usize,
    /// Highest sine index per direction.
    pub bandwidth: usize,
    pub seed: u64,
    pub rel_tol: f64,
}

impl Default for BrezisGallouetParams {
    fn default() -> Self {
        Self {
            resolutions: vec![32, 64],
            fields: 200,
            bandwidth: 6,
            seed: 11,
            rel_tol: 0.1,
        }
    }
}

/// Largest Brezis–Gallouët ratio over random sine polynomials, sampled identically at
/// each resolution.
pub fn brezis_gallouet(p: &BrezisGallouetParams) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("brezis_gallouet", &format!("{p:?}"));
    let k = p.bandwidth;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let coeffs: Vec<Vec<f64>> = (0..p.fields)
        .map(|_| (0..k * k).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let mut table = Table::new("max_ratio", &["nx", "max_ratio"]);
    let mut maxima = Vec::new();
    for &n in &p.resolutions {
        let g = Grid::square(n)?;
        let mut best: f64 = 0.0;
        for c in &coeffs {
            let f = ScalarField::from_fn(g, |x, y| {
                let mut s = 0.0;
                for a in 0..k {
                    let sx = (PI * (a + 1) as f64 * x).sin();
                    for b in 0..k {
                        s += c[a * k + b] * sx * (PI * (b + 1) as f64 * y).sin();
                    }
                }
                s
            });
            best = best.max(brezis_gallouet_ratio(&f)?);
        }
        table.push(vec![n as f64, best]);
        maxima.push(best);
    }
    for w in maxima.windows(2) {
        rep.at_most(
            "max_ratio_stable",
            "Brezis-Gallouet constant is mesh independent",
            (w[1] / w[0] - 1.0).abs(),
            p.rel_tol,
        );
    }
    rep.table(table);
    Ok(rep)
}
