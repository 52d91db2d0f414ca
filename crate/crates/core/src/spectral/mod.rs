//! Discrete eigenbases of the Dirichlet Laplacian and of the Stokes operator.
//!
//! The Stokes basis spans the velocity Galerkin spaces; the Laplacian basis spans the
//! zero-trace magnetic spaces used for tail splitting. Both are orthonormal in the
//! discrete L² product of [`VectorField::dot`].

mod cache;
mod stokes;

pub use cache::{load_basis, save_basis, BASIS_MAGIC};
pub use stokes::{build_stokes_basis, build_stokes_basis_with, StokesSolver, DENSE_LIMIT};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{MhdError, Result};
use crate::fastsolve::{eigenvalue_1d, Axis, Axis1D, Projector};
use crate::grid::{Grid, ScalarField, VectorField, WallValues};
use crate::ops::{divergence, gradient_energy, laplacian_vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    Stokes,
    DirichletLaplacian,
}

impl BasisKind {
    pub fn tag(self) -> u8 {
        match self {
            BasisKind::Stokes => 1,
            BasisKind::DirichletLaplacian => 2,
        }
    }

    pub fn from_tag(t: u8) -> Option<Self> {
        match t {
            1 => Some(BasisKind::Stokes),
            2 => Some(BasisKind::DirichletLaplacian),
            _ => None,
        }
    }
}

/// Ordered eigenpairs `(λ_i, ξ_i)`, eigenvalues non-decreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralBasis {
    pub kind: BasisKind,
    pub grid: Grid,
    pub eigenvalues: Vec<f64>,
    pub modes: Vec<VectorField>,
}

/// Coefficients of a truncated projection and the reconstructed field.
#[derive(Debug, Clone)]
pub struct Projection {
    pub coefficients: Vec<f64>,
    pub field: VectorField,
}

impl SpectralBasis {
    pub fn count(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Orthogonal projection onto the first `k` modes.
    pub fn project(&self, f: &VectorField, k: usize) -> Result<Projection> {
        self.grid.ensure_same(&f.grid)?;
        if k > self.count() {
            return Err(MhdError::Capacity {
                requested: k,
                available: self.count(),
            });
        }
        let coefficients: Vec<f64> = self.modes[..k].iter().map(|m| m.dot(f)).collect();
        let field = self.reconstruct(&coefficients);
        Ok(Projection {
            coefficients,
            field,
        })
    }

    /// `Σ gᵢ ξᵢ` over the leading `coeffs.len()` modes.
    pub fn reconstruct(&self, coeffs: &[f64]) -> VectorField {
        let mut out = VectorField::zeros(self.grid);
        for (c, m) in coeffs.iter().zip(&self.modes) {
            if *c != 0.0 {
                out.axpy(*c, m);
            }
        }
        out
    }

    /// Pressure `pᵢ` paired with Stokes mode `i`: `∇pᵢ = λᵢξᵢ + Δξᵢ`, mean zero.
    pub fn pressure(&self, i: usize, projector: &Projector) -> ScalarField {
        let xi = &self.modes[i];
        let mut r = laplacian_vector(xi, &WallValues::zero(&self.grid));
        r.axpy(self.eigenvalues[i], xi);
        projector.poisson(&divergence(&r))
    }

    /// Largest `‖-Δξ - λξ‖` (Laplacian kind) or `‖P(-Δξ) - λξ‖` (Stokes kind) over all modes.
    pub fn max_residual(&self) -> f64 {
        let z = WallValues::zero(&self.grid);
        let projector = Projector::new(self.grid);
        self.modes
            .iter()
            .zip(&self.eigenvalues)
            .map(|(m, lam)| {
                let mut r = laplacian_vector(m, &z);
                r.scale(-1.0);
                if self.kind == BasisKind::Stokes {
                    r = projector.project(&r).0;
                }
                r.axpy(-lam, m);
                r.norm_l2()
            })
            .fold(0.0, f64::max)
    }
}

/// Flips a mode so its first clearly nonzero entry is positive.
pub(crate) fn fix_sign(f: &mut VectorField) {
    let m = f.max_abs();
    if let Some(first) = f.u.iter().chain(&f.v).find(|x| x.abs() > 1e-8 * m) {
        if *first < 0.0 {
            f.scale(-1.0);
        }
    }
}

/// First `m` eigenpairs of the componentwise Dirichlet Laplacian on the MAC layout.
///
/// The operator separates per component, so eigenpairs are tensor products of sampled
/// sines; ties are ordered by component, then by the x and y wavenumbers.
pub fn build_laplacian_basis(grid: Grid, m: usize) -> Result<SpectralBasis> {
    let g = grid;
    let available = VectorField::interior_len(&g);
    if m > available {
        return Err(MhdError::Capacity {
            requested: m,
            available,
        });
    }
    // (eigenvalue, component, kx, ky) with 1-based wavenumbers
    let mut cands: Vec<(f64, usize, usize, usize)> = Vec::with_capacity(available);
    for kx in 1..g.nx {
        for ky in 1..=g.ny {
            cands.push((
                eigenvalue_1d(kx, g.nx, g.dx) + eigenvalue_1d(ky, g.ny, g.dy),
                0,
                kx,
                ky,
            ));
        }
    }
    for kx in 1..=g.nx {
        for ky in 1..g.ny {
            cands.push((
                eigenvalue_1d(kx, g.nx, g.dx) + eigenvalue_1d(ky, g.ny, g.dy),
                1,
                kx,
                ky,
            ));
        }
    }
    cands.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
            .then(a.3.cmp(&b.3))
    });
    let ux = Axis1D::new(Axis::NodeDirichlet, g.nx, g.dx);
    let uy = Axis1D::new(Axis::CellDirichlet, g.ny, g.dy);
    let vx = Axis1D::new(Axis::CellDirichlet, g.nx, g.dx);
    let vy = Axis1D::new(Axis::NodeDirichlet, g.ny, g.dy);
    let scale = 1.0 / g.cell_area().sqrt();
    let mut eigenvalues = Vec::with_capacity(m);
    let mut modes = Vec::with_capacity(m);
    for &(lam, comp, kx, ky) in cands.iter().take(m) {
        let mut f = VectorField::zeros(g);
        if comp == 0 {
            for j in 0..g.ny {
                for i in 1..g.nx {
                    f.u[g.uface(i, j)] = scale * ux.q[(i - 1, kx - 1)] * uy.q[(j, ky - 1)];
                }
            }
        } else {
            for j in 1..g.ny {
                for i in 0..g.nx {
                    f.v[g.vface(i, j)] = scale * vx.q[(i, kx - 1)] * vy.q[(j - 1, ky - 1)];
                }
            }
        }
        fix_sign(&mut f);
        eigenvalues.push(lam);
        modes.push(f);
    }
    let basis = SpectralBasis {
        kind: BasisKind::DirichletLaplacian,
        grid,
        eigenvalues,
        modes,
    };
    check_residuals(&basis, 1e-8)?;
    Ok(basis)
}

pub(crate) fn check_residuals(basis: &SpectralBasis, tol: f64) -> Result<()> {
    let z = WallValues::zero(&basis.grid);
    let projector = Projector::new(basis.grid);
    let mut residuals = Vec::new();
    let mut bad = false;
    for (m, lam) in basis.modes.iter().zip(&basis.eigenvalues) {
        let mut r = laplacian_vector(m, &z);
        r.scale(-1.0);
        if basis.kind == BasisKind::Stokes {
            r = projector.project(&r).0;
        }
        r.axpy(-lam, m);
        let res = r.norm_l2();
        bad |= res > tol * lam.max(1.0);
        residuals.push(res);
    }
    if bad {
        return Err(MhdError::EigenNonConvergence { residuals });
    }
    Ok(())
}

/// Poincaré constants: `c_u = λ₁`, `c_b = μ₁`, and `c_p = ½ min(c_u, c_b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoincareConstants {
    pub c_u: f64,
    pub c_b: f64,
    pub c_p: f64,
}

pub fn poincare_constants(
    stokes: &SpectralBasis,
    lap: &SpectralBasis,
) -> Result<PoincareConstants> {
    let (Some(&c_u), Some(&c_b)) = (stokes.eigenvalues.first(), lap.eigenvalues.first()) else {
        return Err(MhdError::Capacity {
            requested: 1,
            available: 0,
        });
    };
    Ok(PoincareConstants {
        c_u,
        c_b,
        c_p: 0.5 * c_u.min(c_b),
    })
}

/// Measured constant of `‖Δu₁‖² ≤ (c₀+1) λ_{n+1} ‖∇u₁‖²` over `u₁ ∈ span{ξ₁..ξₙ}`.
#[derive(Debug, Clone)]
pub struct BasisInequalityReport {
    pub n: usize,
    pub lambda_next: f64,
    /// Smallest `c₀` for which every sampled `u₁` satisfies the inequality.
    pub c0: f64,
    /// Largest relative deviation of `‖∇u₁‖²` from `Σ gᵢ² λᵢ`.
    pub energy_identity_residual: f64,
    pub samples: usize,
}

/// Samples each single mode plus `samples` random coefficient vectors on modes `1..=n`.
pub fn basis_inequality_check(
    stokes: &SpectralBasis,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<BasisInequalityReport> {
    if n >= stokes.count() {
        return Err(MhdError::Capacity {
            requested: n + 1,
            available: stokes.count(),
        });
    }
    let z = WallValues::zero(&stokes.grid);
    let lambda_next = stokes.eigenvalues[n];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c0 = f64::NEG_INFINITY;
    let mut ident: f64 = 0.0;
    let mut count = 0;
    let mut eval = |coeffs: &[f64]| {
        let u1 = stokes.reconstruct(coeffs);
        let grad = gradient_energy(&u1, &z);
        if grad == 0.0 {
            return;
        }
        let lap = laplacian_vector(&u1, &z).norm_l2_sq();
        let spectral: f64 = coeffs
            .iter()
            .zip(&stokes.eigenvalues)
            .map(|(g, l)| g * g * l)
            .sum();
        ident = ident.max((grad - spectral).abs() / spectral);
        c0 = c0.max(lap / (lambda_next * grad) - 1.0);
        count += 1;
    };
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        eval(&e);
    }
    for _ in 0..samples {
        let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        eval(&c);
    }
    Ok(BasisInequalityReport {
        n,
        lambda_next,
        c0: if count == 0 { 0.0 } else { c0 },
        energy_identity_residual: ident,
        samples: count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn laplacian_basis_first_mode_is_product_sine() {
        let g = Grid::square(32).unwrap();
        let b = build_laplacian_basis(g, 6).unwrap();
        let mu1 = b.eigenvalues[0];
        assert!((mu1 - 2.0 * PI * PI).abs() < 0.02 * 2.0 * PI * PI);
        // two degenerate modes, one per component
        assert_eq!(b.eigenvalues[0], b.eigenvalues[1]);
        let exact = VectorField::from_fn(g, |x, y| [(PI * x).sin() * (PI * y).sin(), 0.0]);
        let c = b.modes[0].dot(&exact) / exact.norm_l2();
        assert!((c.abs() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn laplacian_basis_is_orthonormal_and_sorted() {
        let g = Grid::new(8, 10).unwrap();
        let b = build_laplacian_basis(g, 40).unwrap();
        assert!(b.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        for i in 0..b.count() {
            for j in 0..b.count() {
                let d = b.modes[i].dot(&b.modes[j]);
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((d - e).abs() < 1e-10);
            }
        }
        assert!(b.max_residual() < 1e-8);
    }

    #[test]
    fn empty_and_oversized_requests() {
        let g = Grid::square(4).unwrap();
        assert!(build_laplacian_basis(g, 0).unwrap().is_empty());
        assert!(matches!(
            build_laplacian_basis(g, 1000),
            Err(MhdError::Capacity { .. })
        ));
    }

    #[test]
    fn eigenvalues_converge_at_second_order() {
        let err = |n: usize| {
            let b = build_laplacian_basis(Grid::square(n).unwrap(), 1).unwrap();
            (b.eigenvalues[0] - 2.0 * PI * PI).abs()
        };
        let r = err(16) / err(32);
        assert!((r - 4.0).abs() < 0.1, "{r}");
    }

    #[test]
    fn projection_of_mode_is_unit_coefficient() {
        let g = Grid::square(8).unwrap();
        let b = build_laplacian_basis(g, 10).unwrap();
        let p = b.project(&b.modes[0], 4).unwrap();
        assert!((p.coefficients[0] - 1.0).abs() < 1e-12);
        assert!(p.coefficients[1..].iter().all(|c| c.abs() < 1e-12));
        assert!(b.project(&b.modes[0], 11).is_err());
    }

    #[test]
    fn full_rank_projection_reconstructs_zero_trace_field() {
        let g = Grid::square(6).unwrap();
        let n = VectorField::interior_len(&g);
        let b = build_laplacian_basis(g, n).unwrap();
        let f = VectorField::from_fn(g, |x, y| [x * (1.0 - x) * y, (x + y).sin()]);
        let mut f0 = f.clone();
        f0.zero_normal_walls();
        let p = b.project(&f0, n).unwrap();
        assert!(p.field.sub(&f0).max_abs() < 1e-12);
    }

    #[test]
    fn poincare_constant_formula() {
        let g = Grid::square(8).unwrap();
        let lap = build_laplacian_basis(g, 2).unwrap();
        let c = poincare_constants(&lap, &lap).unwrap();
        assert_eq!(c.c_p, 0.5 * c.c_u.min(c.c_b));
        let empty = build_laplacian_basis(g, 0).unwrap();
        assert!(poincare_constants(&empty, &lap).is_err());
    }
}
