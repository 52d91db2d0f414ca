//! Fast diagonalization of separable 5-point operators.
//!
//! Every constant-coefficient operator used by the solver is a Kronecker sum of 1D second
//! differences whose eigenvectors are sampled sines or cosines. Transforms are dense
//! matrix products with those orthonormal bases.

use nalgebra::DMatrix;

use crate::grid::{Grid, ScalarField, VectorField, WallValues};
use crate::ops::{divergence, gradient, laplacian_vector};

/// Closure type of a 1D three-point second difference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// Unknowns at interior nodes `1..n`, homogeneous Dirichlet at nodes `0` and `n`.
    NodeDirichlet,
    /// Unknowns at cell centres, Dirichlet through the ghost value `-f₀`.
    CellDirichlet,
    /// Unknowns at cell centres, homogeneous Neumann.
    CellNeumann,
}

/// Orthonormal eigenbasis of `-D²` along one axis.
#[derive(Debug, Clone)]
pub struct Axis1D {
    pub kind: Axis,
    /// Columns are eigenvectors.
    pub q: DMatrix<f64>,
    /// Eigenvalues of `-D²`, ascending.
    pub eig: Vec<f64>,
}

impl Axis1D {
    /// `cells` is the number of cells along the axis, `h` the spacing.
    pub fn new(kind: Axis, cells: usize, h: f64) -> Self {
        let n = match kind {
            Axis::NodeDirichlet => cells - 1,
            _ => cells,
        };
        let nf = cells as f64;
        let mut q = DMatrix::zeros(n, n);
        let mut eig = Vec::with_capacity(n);
        for col in 0..n {
            let k = match kind {
                Axis::CellNeumann => col,
                _ => col + 1,
            };
            let theta = std::f64::consts::PI * k as f64 / nf;
            let sample = |p: usize| match kind {
                Axis::NodeDirichlet => (theta * (p + 1) as f64).sin(),
                Axis::CellDirichlet => (theta * (p as f64 + 0.5)).sin(),
                Axis::CellNeumann => (theta * (p as f64 + 0.5)).cos(),
            };
            let mut norm = 0.0;
            for p in 0..n {
                let v = sample(p);
                q[(p, col)] = v;
                norm += v * v;
            }
            let norm = norm.sqrt();
            for p in 0..n {
                q[(p, col)] /= norm;
            }
            eig.push(eigenvalue_1d(k, cells, h));
        }
        Self { kind, q, eig }
    }

    pub fn len(&self) -> usize {
        self.eig.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eig.is_empty()
    }
}

/// `(4/h²) sin²(πk / 2n)`, the `k`-th eigenvalue of the 1D second difference on `n` cells.
#[inline]
pub fn eigenvalue_1d(k: usize, cells: usize, h: f64) -> f64 {
    let s = (std::f64::consts::PI * k as f64 / (2.0 * cells as f64)).sin();
    4.0 * s * s / (h * h)
}

/// Kronecker-sum operator `-(Dx² ⊕ Dy²)` with its separable eigenbasis.
#[derive(Debug, Clone)]
pub struct Separable {
    pub x: Axis1D,
    pub y: Axis1D,
}

impl Separable {
    pub fn new(x: Axis1D, y: Axis1D) -> Self {
        Self { x, y }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.x.len(), self.y.len())
    }

    /// Spectral coefficients `Qxᵀ X Qy` of a field stored x-fastest.
    pub fn forward(&self, data: &[f64]) -> DMatrix<f64> {
        let (n, m) = self.shape();
        let x = DMatrix::from_column_slice(n, m, data);
        self.x.q.tr_mul(&x) * &self.y.q
    }

    pub fn backward(&self, coeffs: &DMatrix<f64>, out: &mut [f64]) {
        let x = &self.x.q * coeffs * self.y.q.transpose();
        out.copy_from_slice(x.as_slice());
    }

    /// Applies `f(λ)` to the operator, `λ` ranging over the eigenvalues of `-Δ`.
    pub fn apply_fn(&self, data: &[f64], f: impl Fn(f64) -> f64) -> Vec<f64> {
        let mut c = self.forward(data);
        let (n, m) = self.shape();
        for j in 0..m {
            for i in 0..n {
                c[(i, j)] *= f(self.x.eig[i] + self.y.eig[j]);
            }
        }
        let mut out = vec![0.0; data.len()];
        self.backward(&c, &mut out);
        out
    }

    /// Solves `(α + β(-Δ)) x = rhs`; modes with a vanishing symbol are set to zero.
    pub fn solve_shifted(&self, rhs: &[f64], alpha: f64, beta: f64) -> Vec<f64> {
        self.apply_fn(rhs, |lam| {
            let d = alpha + beta * lam;
            if d.abs() < 1e-300 || (alpha == 0.0 && lam < 1e-12) {
                0.0
            } else {
                1.0 / d
            }
        })
    }
}

/// Implicit diffusion solves `(α - β Δ) f = r` for both components of a MAC vector field.
#[derive(Debug, Clone)]
pub struct VectorHelmholtz {
    pub grid: Grid,
    pub ucomp: Separable,
    pub vcomp: Separable,
}

impl VectorHelmholtz {
    pub fn new(grid: Grid) -> Self {
        let ucomp = Separable::new(
            Axis1D::new(Axis::NodeDirichlet, grid.nx, grid.dx),
            Axis1D::new(Axis::CellDirichlet, grid.ny, grid.dy),
        );
        let vcomp = Separable::new(
            Axis1D::new(Axis::CellDirichlet, grid.nx, grid.dx),
            Axis1D::new(Axis::NodeDirichlet, grid.ny, grid.dy),
        );
        Self { grid, ucomp, vcomp }
    }

    /// Interior-only version with homogeneous closure; `rhs` and the result are packed
    /// interior vectors (see [`VectorField::pack_interior`]).
    pub fn solve_packed(&self, rhs: &[f64], alpha: f64, beta: f64) -> Vec<f64> {
        let nu = (self.grid.nx - 1) * self.grid.ny;
        let mut out = self.ucomp.solve_shifted(&rhs[..nu], alpha, beta);
        out.extend(self.vcomp.solve_shifted(&rhs[nu..], alpha, beta));
        out
    }

    pub fn apply_fn_packed(&self, data: &[f64], f: impl Fn(f64) -> f64 + Copy) -> Vec<f64> {
        let nu = (self.grid.nx - 1) * self.grid.ny;
        let mut out = self.ucomp.apply_fn(&data[..nu], f);
        out.extend(self.vcomp.apply_fn(&data[nu..], f));
        out
    }

    /// Solves `α f - β Δf = rhs` on interior faces with Dirichlet data `walls`.
    /// Wall-normal faces of the result carry the normal wall values.
    pub fn solve(
        &self,
        rhs: &VectorField,
        alpha: f64,
        beta: f64,
        walls: &WallValues,
    ) -> VectorField {
        let g = self.grid;
        let mut bc = VectorField::zeros(g);
        walls.impose_normal(&mut bc);
        let mut r = vec![0.0; VectorField::interior_len(&g)];
        rhs.pack_interior(&mut r);
        if !walls.is_zero() {
            // move the known boundary contribution of -βΔ to the right side
            let lb = laplacian_vector(&bc, walls);
            let mut lbp = vec![0.0; r.len()];
            lb.pack_interior(&mut lbp);
            for (a, b) in r.iter_mut().zip(&lbp) {
                *a += beta * b;
            }
        }
        let x = self.solve_packed(&r, alpha, beta);
        bc.unpack_interior(&x);
        bc
    }
}

/// Discrete Leray projection and pressure Poisson solves on cell centres.
#[derive(Debug, Clone)]
pub struct Projector {
    pub grid: Grid,
    pub neumann: Separable,
}

impl Projector {
    pub fn new(grid: Grid) -> Self {
        let neumann = Separable::new(
            Axis1D::new(Axis::CellNeumann, grid.nx, grid.dx),
            Axis1D::new(Axis::CellNeumann, grid.ny, grid.dy),
        );
        Self { grid, neumann }
    }

    /// Mean-zero solution of `∇·∇φ = r` with homogeneous Neumann closure.
    pub fn poisson(&self, r: &ScalarField) -> ScalarField {
        let data = self.neumann.solve_shifted(&r.data, 0.0, -1.0);
        let mut s = ScalarField {
            grid: self.grid,
            data,
        };
        s.remove_mean();
        s
    }

    /// Splits `v = w + ∇φ` with `∇·w = 0`; returns `(w, φ)`. Wall-normal faces are untouched.
    pub fn project(&self, v: &VectorField) -> (VectorField, ScalarField) {
        let phi = self.poisson(&divergence(v));
        let mut w = v.clone();
        w.axpy(-1.0, &gradient(&phi));
        (w, phi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::ScalarWalls;
    use crate::ops::laplacian_scalar;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn axes_are_orthonormal_eigenbases() {
        for kind in [Axis::NodeDirichlet, Axis::CellDirichlet, Axis::CellNeumann] {
            let ax = Axis1D::new(kind, 9, 1.0 / 9.0);
            let gram = ax.q.tr_mul(&ax.q);
            let n = ax.len();
            assert!(
                (gram - DMatrix::<f64>::identity(n, n)).amax() < 1e-12,
                "{kind:?}"
            );
            assert!(ax.eig.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn cell_dirichlet_solve_matches_stencil() {
        let g = Grid::new(10, 7).unwrap();
        let sep = Separable::new(
            Axis1D::new(Axis::CellDirichlet, g.nx, g.dx),
            Axis1D::new(Axis::CellDirichlet, g.ny, g.dy),
        );
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut s = ScalarField::zeros(g);
        s.data
            .iter_mut()
            .for_each(|x| *x = rng.gen_range(-1.0..1.0));
        let rhs = laplacian_scalar(&s, &ScalarWalls::zero(&g));
        let back = sep.solve_shifted(&rhs.data, 0.0, -1.0);
        let err = back
            .iter()
            .zip(&s.data)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn vector_helmholtz_inverts_stencil_with_walls() {
        let g = Grid::new(8, 11).unwrap();
        let walls = WallValues::from_fn(&g, |x, y| [x + y * y, x * y - 1.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut f = VectorField::zeros(g);
        f.u.iter_mut()
            .chain(f.v.iter_mut())
            .for_each(|x| *x = rng.gen_range(-1.0..1.0));
        walls.impose_normal(&mut f);
        let (alpha, beta) = (1.0, 0.01);
        let mut rhs = f.scaled(alpha);
        rhs.axpy(-beta, &laplacian_vector(&f, &walls));
        let sol = VectorHelmholtz::new(g).solve(&rhs, alpha, beta, &walls);
        assert!(sol.sub(&f).max_abs() < 1e-11);
    }

    #[test]
    fn projection_is_divergence_free_and_idempotent() {
        let g = Grid::new(12, 10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut v = VectorField::zeros(g);
        v.u.iter_mut()
            .chain(v.v.iter_mut())
            .for_each(|x| *x = rng.gen_range(-1.0..1.0));
        v.zero_normal_walls();
        let p = Projector::new(g);
        let (w, phi) = p.project(&v);
        assert!(divergence(&w).max_abs() < 1e-11);
        assert!(phi.mean().abs() < 1e-12);
        let (w2, _) = p.project(&w);
        assert!(w2.sub(&w).max_abs() < 1e-11);
        assert!(w.norm_l2() <= v.norm_l2() + 1e-12);
    }
}
