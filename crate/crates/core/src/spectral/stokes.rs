//! Discrete Stokes eigenproblem in stream-function form.
//!
//! Every discretely divergence-free field with zero normal flux is `u = Cψ` for a stream
//! function `ψ` on interior vertices, `C` the vertex-to-face curl. The Stokes pairs solve
//! the generalized problem `Cᵀ(-L)Cψ = λ Mψ` with `M = CᵀC` the Dirichlet vertex
//! Laplacian, which is diagonal in the vertex sine basis.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_residuals, fix_sign, BasisKind, SpectralBasis};
use crate::error::{MhdError, Result};
use crate::fastsolve::{Axis, Axis1D, Separable};
use crate::grid::{Grid, VectorField, WallValues};
use crate::krylov::pcg;
use crate::ops::laplacian_vector;

/// Largest cell count per axis handled by the dense eigensolver under [`StokesSolver::Auto`].
pub const DENSE_LIMIT: usize = 48;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StokesSolver {
    Auto,
    Dense,
    /// Block Krylov on the inverse operator with Rayleigh-Ritz restarts.
    Krylov,
}

pub fn build_stokes_basis(grid: Grid, n: usize) -> Result<SpectralBasis> {
    build_stokes_basis_with(grid, n, StokesSolver::Auto)
}

pub fn build_stokes_basis_with(
    grid: Grid,
    n: usize,
    solver: StokesSolver,
) -> Result<SpectralBasis> {
    let op = StreamOperator::new(grid);
    let dim = op.len();
    if n > dim {
        return Err(MhdError::Capacity {
            requested: n,
            available: dim,
        });
    }
    if n == 0 {
        return Ok(SpectralBasis {
            kind: BasisKind::Stokes,
            grid,
            eigenvalues: Vec::new(),
            modes: Vec::new(),
        });
    }
    let dense = match solver {
        StokesSolver::Dense => true,
        StokesSolver::Krylov => false,
        StokesSolver::Auto => grid.nx.max(grid.ny) <= DENSE_LIMIT,
    };
    let (eigenvalues, psis) = if dense || n * 3 >= dim {
        op.dense(n)
    } else {
        op.block_krylov(n)?
    };
    let modes = psis
        .iter()
        .map(|psi| {
            let mut u = op.curl(psi);
            let nrm = u.norm_l2();
            u.scale(1.0 / nrm);
            fix_sign(&mut u);
            u
        })
        .collect();
    let basis = SpectralBasis {
        kind: BasisKind::Stokes,
        grid,
        eigenvalues,
        modes,
    };
    check_residuals(&basis, 1e-8)?;
    Ok(basis)
}

struct StreamOperator {
    grid: Grid,
    sines: Separable,
}

impl StreamOperator {
    fn new(grid: Grid) -> Self {
        let sines = Separable::new(
            Axis1D::new(Axis::NodeDirichlet, grid.nx, grid.dx),
            Axis1D::new(Axis::NodeDirichlet, grid.ny, grid.dy),
        );
        Self { grid, sines }
    }

    fn len(&self) -> usize {
        (self.grid.nx - 1) * (self.grid.ny - 1)
    }

    #[inline]
    fn node(&self, i: usize, j: usize) -> usize {
        (i - 1) + (self.grid.nx - 1) * (j - 1)
    }

    fn psi_at(&self, psi: &[f64], i: usize, j: usize) -> f64 {
        if i == 0 || j == 0 || i == self.grid.nx || j == self.grid.ny {
            0.0
        } else {
            psi[self.node(i, j)]
        }
    }

    fn curl(&self, psi: &[f64]) -> VectorField {
        let g = self.grid;
        let mut out = VectorField::zeros(g);
        for j in 0..g.ny {
            for i in 1..g.nx {
                out.u[g.uface(i, j)] = (self.psi_at(psi, i, j + 1) - self.psi_at(psi, i, j)) / g.dy;
            }
        }
        for j in 1..g.ny {
            for i in 0..g.nx {
                out.v[g.vface(i, j)] =
                    -(self.psi_at(psi, i + 1, j) - self.psi_at(psi, i, j)) / g.dx;
            }
        }
        out
    }

    /// Adjoint of [`curl`](Self::curl) in the unweighted face product: the vertex vorticity.
    fn curl_t(&self, w: &VectorField) -> Vec<f64> {
        let g = self.grid;
        let mut out = vec![0.0; self.len()];
        for j in 1..g.ny {
            for i in 1..g.nx {
                out[self.node(i, j)] = (w.u_at(i, j - 1) - w.u_at(i, j)) / g.dy
                    + (w.v_at(i, j) - w.v_at(i - 1, j)) / g.dx;
            }
        }
        out
    }

    fn apply_a(&self, psi: &[f64]) -> Vec<f64> {
        let mut l = laplacian_vector(&self.curl(psi), &WallValues::zero(&self.grid));
        l.scale(-1.0);
        self.curl_t(&l)
    }

    fn apply_m(&self, psi: &[f64]) -> Vec<f64> {
        self.sines.apply_fn(psi, |lam| lam)
    }

    /// All pairs from a dense solve in sine coordinates; returns the first `n`.
    fn dense(&self, n: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
        let dim = self.len();
        let (nxi, nyi) = self.sines.shape();
        let lam: Vec<f64> = (0..dim)
            .map(|k| self.sines.x.eig[k % nxi] + self.sines.y.eig[k / nxi])
            .collect();
        // B = Λ^{-1/2} Sᵀ A S Λ^{-1/2}
        let mut b = DMatrix::zeros(dim, dim);
        let mut unit = DMatrix::zeros(nxi, nyi);
        let mut col = vec![0.0; dim];
        for k in 0..dim {
            unit[(k % nxi, k / nxi)] = 1.0;
            self.sines.backward(&unit, &mut col);
            unit[(k % nxi, k / nxi)] = 0.0;
            let ac = self.apply_a(&col);
            let sc = self.sines.forward(&ac);
            for (r, v) in sc.as_slice().iter().enumerate() {
                b[(r, k)] = v / (lam[r] * lam[k]).sqrt();
            }
        }
        let b = (&b + b.transpose()) * 0.5;
        let eig = SymmetricEigen::new(b);
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let mut values = Vec::with_capacity(n);
        let mut vecs = Vec::with_capacity(n);
        for &k in order.iter().take(n) {
            values.push(eig.eigenvalues[k]);
            let y = eig.eigenvectors.column(k);
            let c: Vec<f64> = (0..dim).map(|r| y[r] / lam[r].sqrt()).collect();
            let cm = DMatrix::from_column_slice(nxi, nyi, &c);
            let mut psi = vec![0.0; dim];
            self.sines.backward(&cm, &mut psi);
            vecs.push(psi);
        }
        (values, vecs)
    }

    fn solve_a(&self, r: &[f64]) -> Result<Vec<f64>> {
        let mut x = vec![0.0; r.len()];
        pcg(
            |p| self.apply_a(p),
            |z| self.sines.apply_fn(z, |lam| 1.0 / (lam * lam)),
            r,
            &mut x,
            1e-13,
            5000,
        )?;
        Ok(x)
    }

    /// Block Krylov subspaces of `A⁻¹M`, three blocks deep, restarted from the Ritz vectors.
    fn block_krylov(&self, n: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let dim = self.len();
        let p = n + 4;
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
        let mut x: Vec<Vec<f64>> = (0..p)
            .map(|_| {
                let r: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
                // smooth the start vectors so the low modes dominate
                self.sines.apply_fn(&r, |lam| 1.0 / lam)
            })
            .collect();
        let mut last_res = Vec::new();
        let mut prev_worst = f64::INFINITY;
        for _ in 0..60 {
            let mut space = x.clone();
            let mut block = x;
            for _ in 0..2 {
                block = block
                    .iter()
                    .map(|v| self.solve_a(&self.apply_m(v)))
                    .collect::<Result<_>>()?;
                space.extend(block.iter().cloned());
            }
            let (basis, mbasis) = self.m_orthonormalize(space);
            let abasis: Vec<Vec<f64>> = basis.iter().map(|v| self.apply_a(v)).collect();
            let k = basis.len();
            let mut h = DMatrix::zeros(k, k);
            for i in 0..k {
                for j in 0..=i {
                    let v = dotv(&basis[i], &abasis[j]);
                    h[(i, j)] = v;
                    h[(j, i)] = v;
                }
            }
            let eig = SymmetricEigen::new(h);
            let mut order: Vec<usize> = (0..k).collect();
            order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
            let mut values = Vec::with_capacity(p);
            let mut ritz = Vec::with_capacity(p);
            last_res.clear();
            for &c in order.iter().take(p) {
                let y = eig.eigenvectors.column(c);
                let mut v = vec![0.0; dim];
                let mut av = vec![0.0; dim];
                let mut mv = vec![0.0; dim];
                for (idx, coef) in y.iter().enumerate() {
                    axpy(&mut v, *coef, &basis[idx]);
                    axpy(&mut av, *coef, &abasis[idx]);
                    axpy(&mut mv, *coef, &mbasis[idx]);
                }
                let theta = eig.eigenvalues[c];
                if values.len() < n {
                    axpy(&mut av, -theta, &mv);
                    // residual measured in the M⁻¹ norm, relative to θ
                    let rm = self.sines.apply_fn(&av, |lam| 1.0 / lam);
                    last_res.push(dotv(&av, &rm).sqrt() / theta);
                }
                values.push(theta);
                ritz.push(v);
            }
            x = ritz;
            let worst = last_res.iter().copied().fold(0.0, f64::max);
            // below 1e-10, or stalled at the round-off floor under the acceptance level
            if worst < 1e-10 || (worst < 1e-8 && worst > 0.5 * prev_worst) {
                values.truncate(n);
                x.truncate(n);
                return Ok((values, x));
            }
            prev_worst = worst;
        }
        Err(MhdError::EigenNonConvergence {
            residuals: last_res,
        })
    }

    /// Gram-Schmidt in the M product, twice, dropping nearly dependent vectors.
    fn m_orthonormalize(&self, vs: Vec<Vec<f64>>) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let mut q: Vec<Vec<f64>> = Vec::with_capacity(vs.len());
        let mut mq: Vec<Vec<f64>> = Vec::with_capacity(vs.len());
        for mut v in vs {
            let n0 = dotv(&v, &self.apply_m(&v)).sqrt();
            for _ in 0..2 {
                for (qi, mqi) in q.iter().zip(&mq) {
                    let c = dotv(&v, mqi);
                    axpy(&mut v, -c, qi);
                }
            }
            let mv = self.apply_m(&v);
            let nv = dotv(&v, &mv).sqrt();
            if nv <= 1e-10 * n0 || nv == 0.0 {
                continue;
            }
            q.push(v.iter().map(|a| a / nv).collect());
            mq.push(mv.iter().map(|a| a / nv).collect());
        }
        (q, mq)
    }
}

fn dotv(a: &[f64], b: &[f64]) -> f64 {
    DVector::from_column_slice(a).dot(&DVector::from_column_slice(b))
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fastsolve::Projector;
    use crate::ops::divergence;

    #[test]
    fn stokes_modes_are_divergence_free_orthonormal() {
        let g = Grid::square(12).unwrap();
        let b = build_stokes_basis(g, 20).unwrap();
        for (i, m) in b.modes.iter().enumerate() {
            assert!(divergence(m).max_abs() < 1e-10);
            for (j, o) in b.modes.iter().enumerate() {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((m.dot(o) - e).abs() < 1e-10);
            }
        }
        assert!(b.eigenvalues.windows(2).all(|w| w[0] <= w[1] + 1e-12));
        assert!(b.eigenvalues[0] > 0.0);
    }

    #[test]
    fn krylov_matches_dense() {
        let g = Grid::square(16).unwrap();
        let d = build_stokes_basis_with(g, 8, StokesSolver::Dense).unwrap();
        let k = build_stokes_basis_with(g, 8, StokesSolver::Krylov).unwrap();
        for (a, b) in d.eigenvalues.iter().zip(&k.eigenvalues) {
            assert!((a - b).abs() < 1e-8 * a, "{a} {b}");
        }
        // non-degenerate leading mode agrees up to the sign convention
        assert!((d.modes[0].dot(&k.modes[0]) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn first_eigenvalue_near_continuum() {
        let g = Grid::square(32).unwrap();
        let b = build_stokes_basis(g, 1).unwrap();
        // continuum value on the unit square is about 52.3447
        assert!(
            (b.eigenvalues[0] - 52.3447).abs() < 0.02 * 52.3447,
            "{}",
            b.eigenvalues[0]
        );
    }

    #[test]
    fn pressure_recovery_closes_the_eigen_equation() {
        let g = Grid::square(10).unwrap();
        let b = build_stokes_basis(g, 3).unwrap();
        let proj = Projector::new(g);
        for i in 0..3 {
            let p = b.pressure(i, &proj);
            assert!(p.mean().abs() < 1e-12);
            // Δξ + λξ - ∇p = 0 on interior faces
            let mut r = laplacian_vector(&b.modes[i], &WallValues::zero(&g));
            r.axpy(b.eigenvalues[i], &b.modes[i]);
            r.axpy(-1.0, &crate::ops::gradient(&p));
            assert!(r.norm_l2() < 1e-8 * b.eigenvalues[i]);
        }
    }
}
