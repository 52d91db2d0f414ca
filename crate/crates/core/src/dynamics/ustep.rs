use super::{Stepper, Truncation};
use crate::error::{MhdError, Result};
use crate::grid::{ScalarField, VectorField, WallValues};
use crate::krylov::pcg;
use crate::ops::{convect, divergence, gradient, laplacian_vector};

#[derive(Debug, Clone, PartialEq)]
pub struct UStepReport {
    /// Pressure Schur-complement iterations; zero in the truncated basis.
    pub iterations: usize,
}

/// Backward Euler velocity update with explicit nonlinearity
/// `N = ū·∇ū − S b·∇b − f_u`.
pub(super) fn u_step(
    st: &Stepper<'_>,
    b: &VectorField,
    b_walls: &WallValues,
    u_prev: &VectorField,
    u_bar: &VectorField,
    f_u: Option<&VectorField>,
) -> Result<(VectorField, ScalarField, UStepReport)> {
    let g = st.grid;
    for f in [b, u_prev, u_bar] {
        g.ensure_same(&f.grid)?;
    }
    let zero = WallValues::zero(&g);
    let (dt, nu) = (st.cfg.dt, 1.0 / st.cfg.re);
    let mut nl = convect(u_bar, u_bar, &zero);
    nl.axpy(-st.cfg.s, &convect(b, b, b_walls));
    if let Some(f) = f_u {
        nl.axpy(-1.0, f);
    }
    match st.cfg.truncation {
        Truncation::Modes(n) => {
            let basis = st.basis.ok_or(MhdError::Capacity {
                requested: n,
                available: 0,
            })?;
            let mut u = VectorField::zeros(g);
            for (xi, &lam) in basis.modes.iter().zip(&basis.eigenvalues).take(n) {
                let c = (u_prev.dot(xi) - dt * nl.dot(xi)) / (1.0 + dt * lam * nu);
                u.axpy(c, xi);
            }
            let mut r = u_prev.sub(&u).scaled(1.0 / dt);
            r.axpy(nu, &laplacian_vector(&u, &zero));
            r.axpy(-1.0, &nl);
            r.zero_normal_walls();
            let p = st.projector.poisson(&divergence(&r));
            Ok((u, p, UStepReport { iterations: 0 }))
        }
        Truncation::Full => full_stokes(st, u_prev, &nl),
    }
}

/// Uzawa iteration on the pressure Schur complement `−D H⁻¹ G` with the
/// Cahouet–Chabard preconditioner, `H = 1/dt − Re⁻¹Δ`.
fn full_stokes(
    st: &Stepper<'_>,
    u_prev: &VectorField,
    nl: &VectorField,
) -> Result<(VectorField, ScalarField, UStepReport)> {
    let g = st.grid;
    let (dt, nu) = (st.cfg.dt, 1.0 / st.cfg.re);
    let n = VectorField::interior_len(&g);
    let mut rf = u_prev.scaled(1.0 / dt);
    rf.axpy(-1.0, nl);
    let mut r = vec![0.0; n];
    rf.pack_interior(&mut r);

    let hinv = |x: &[f64]| st.helm_u.solve_packed(x, 1.0 / dt, nu);
    let to_field = |x: &[f64]| {
        let mut f = VectorField::zeros(g);
        f.unpack_interior(x);
        f
    };
    let grad_packed = |p: &[f64]| {
        let s = ScalarField {
            grid: g,
            data: p.to_vec(),
        };
        let mut out = vec![0.0; n];
        gradient(&s).pack_interior(&mut out);
        out
    };
    let schur = |p: &[f64]| {
        let mut d = divergence(&to_field(&hinv(&grad_packed(p)))).data;
        d.iter_mut().for_each(|v| *v = -*v);
        d
    };
    let precond = |q: &[f64]| {
        let phi = st.projector.poisson(&ScalarField {
            grid: g,
            data: q.to_vec(),
        });
        let mean = q.iter().sum::<f64>() / q.len() as f64;
        phi.data
            .iter()
            .zip(q)
            .map(|(f, qi)| -f / dt + nu * (qi - mean))
            .collect::<Vec<_>>()
    };
    let mut rhs = divergence(&to_field(&hinv(&r))).data;
    rhs.iter_mut().for_each(|v| *v = -*v);
    let mean = rhs.iter().sum::<f64>() / rhs.len() as f64;
    rhs.iter_mut().for_each(|v| *v -= mean);

    let mut p = vec![0.0; g.n_cells()];
    let iterations = pcg(schur, precond, &rhs, &mut p, 1e-12, 500)?;
    let gp = grad_packed(&p);
    let corrected: Vec<f64> = r.iter().zip(&gp).map(|(a, b)| a - b).collect();
    let u = to_field(&hinv(&corrected));
    let (u, phi) = st.projector.project(&u);
    let mut p = ScalarField { grid: g, data: p };
    for (a, f) in p.data.iter_mut().zip(&phi.data) {
        *a += f / dt;
    }
    p.remove_mean();
    Ok((u, p, UStepReport { iterations }))
}
