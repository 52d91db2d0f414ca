use crate::error::{MhdError, Result};
use crate::fastsolve::Projector;
use crate::grid::{ScalarField, ScalarWalls, VectorField, WallValues};
use crate::ops::{
    gradient, gradient_energy, gradient_energy_scalar, laplacian_scalar, laplacian_vector,
};
use crate::spectral::SpectralBasis;

/// `‖g‖_∞ / (‖g‖_{H¹} (1 + ln(‖g‖²_{H²}/‖g‖²_{H¹}))^{1/2})` for a cell field vanishing on the walls.
pub fn brezis_gallouet_ratio(g: &ScalarField) -> Result<f64> {
    let walls = ScalarWalls::zero(&g.grid);
    let l2 = g.norm_l2().powi(2);
    let h1 = l2 + gradient_energy_scalar(g, &walls);
    if h1 <= 0.0 {
        return Err(MhdError::UndefinedRatio("zero H1 norm"));
    }
    let h2 = h1 + laplacian_scalar(g, &walls).norm_l2().powi(2);
    Ok(g.max_abs() / (h1.sqrt() * (1.0 + (h2 / h1).ln()).sqrt()))
}

/// Parts of the Stokes regularity estimate for one divergence-free field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StokesRegularity {
    pub h2_norm: f64,
    pub pressure_h1: f64,
    pub su_norm: f64,
}

impl StokesRegularity {
    /// `(‖u‖_{H²} + ‖P‖_{H¹/ℝ}) / ‖Su‖`.
    pub fn ratio(&self) -> f64 {
        (self.h2_norm + self.pressure_h1) / self.su_norm
    }
}

/// Splits `−Δu = Su + ∇P` with the Leray projection and measures both pieces.
pub fn stokes_regularity(u: &VectorField, projector: &Projector) -> Result<StokesRegularity> {
    let zero = WallValues::zero(&u.grid);
    let mut lu = laplacian_vector(u, &zero);
    let lap_sq = lu.norm_l2_sq();
    lu.scale(-1.0);
    let (su, phi) = projector.project(&lu);
    let su_norm = su.norm_l2();
    if su_norm <= 0.0 {
        return Err(MhdError::UndefinedRatio("zero Stokes operator norm"));
    }
    let h2 = u.norm_l2_sq() + gradient_energy(u, &zero) + lap_sq;
    let p_h1 = phi.norm_l2().powi(2) + gradient(&phi).norm_l2_sq();
    Ok(StokesRegularity {
        h2_norm: h2.sqrt(),
        pressure_h1: p_h1.sqrt(),
        su_norm,
    })
}

pub fn stokes_regularity_ratio(u: &VectorField, projector: &Projector) -> Result<f64> {
    Ok(stokes_regularity(u, projector)?.ratio())
}

/// `‖∇u₂‖² + ‖∇b₂‖²` with `u₂`, `b₂` the parts of `u`, `b` orthogonal to the first
/// `n` Stokes and `m` Laplacian modes. Both fields must vanish on the walls.
pub fn tail_energy(
    u: &VectorField,
    stokes: &SpectralBasis,
    n: usize,
    b: &VectorField,
    laplace: &SpectralBasis,
    m: usize,
) -> Result<f64> {
    let zero = WallValues::zero(&u.grid);
    let u2 = u.sub(&stokes.project(u, n)?.field);
    let b2 = b.sub(&laplace.project(b, m)?.field);
    Ok(gradient_energy(&u2, &zero) + gradient_energy(&b2, &zero))
}

/// Index `m` whose next Laplacian eigenvalue `μ_{m+1}` is closest to `λ_{n+1}`.
pub fn pair_truncation(stokes: &SpectralBasis, n: usize, laplace: &SpectralBasis) -> Option<usize> {
    let target = *stokes.eigenvalues.get(n)?;
    laplace
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - target).abs().total_cmp(&(b.1 - target).abs()))
        .map(|(k, _)| k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::spectral::build_stokes_basis;
    use std::f64::consts::PI;

    #[test]
    fn product_sine_ratio_matches_closed_form() {
        let g = Grid::square(64).unwrap();
        let f = ScalarField::from_fn(g, |x, y| (PI * x).sin() * (PI * y).sin());
        let (l2, grad, lap) = (0.25, PI * PI / 2.0, PI.powi(4));
        let h1 = l2 + grad;
        let want = 1.0 / h1.sqrt() / (1.0 + ((h1 + lap) / h1).ln()).sqrt();
        let got = brezis_gallouet_ratio(&f).unwrap();
        assert!((got / want - 1.0).abs() < 5e-3, "{got} {want}");
        let mut f3 = f.clone();
        f3.scale(3.7);
        assert!((brezis_gallouet_ratio(&f3).unwrap() - got).abs() < 1e-10 * got);
        assert!(brezis_gallouet_ratio(&ScalarField::zeros(g)).is_err());
    }

    #[test]
    fn stokes_mode_has_eigenvalue_norm() {
        let g = Grid::square(16).unwrap();
        let basis = build_stokes_basis(g, 3).unwrap();
        let pr = Projector::new(g);
        for (xi, lam) in basis.modes.iter().zip(&basis.eigenvalues) {
            let r = stokes_regularity(xi, &pr).unwrap();
            assert!((r.su_norm - lam).abs() < 1e-6 * lam);
            let r2 = stokes_regularity_ratio(&xi.scaled(-2.5), &pr).unwrap();
            assert!((r2 - r.ratio()).abs() < 1e-10 * r.ratio());
        }
    }
}
