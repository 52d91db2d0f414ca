use super::Stepper;
use crate::error::{MhdError, Result};
use crate::grid::{VectorField, WallValues};
use crate::krylov::gmres;
use crate::ops::{convect, laplacian_vector};

#[derive(Debug, Clone, PartialEq)]
pub struct BStepReport {
    pub iterations: usize,
    /// Last successive-iterate difference relative to `max(1, ‖b‖)`.
    pub residual: f64,
    /// Largest ratio `‖b^{j+1} − b^j‖ / ‖b^j − b^{j−1}‖` above the round-off floor.
    pub contraction: f64,
    pub linear_iterations: usize,
}

/// Picard iteration for
/// `b/dt − Rm⁻¹Δb + ū·∇b = b_prev/dt + b^j·∇ū + f_b`, `b|_Γ = walls`.
pub(super) fn b_step(
    st: &Stepper<'_>,
    u: &VectorField,
    b_prev: &VectorField,
    walls: &WallValues,
    f_b: Option<&VectorField>,
) -> Result<(VectorField, BStepReport)> {
    let g = st.grid;
    g.ensure_same(&u.grid)?;
    g.ensure_same(&b_prev.grid)?;
    let inv_dt = 1.0 / st.cfg.dt;
    let kappa = 1.0 / st.cfg.rm;
    let zero = WallValues::zero(&g);
    let n = VectorField::interior_len(&g);

    let mut bc = VectorField::zeros(g);
    walls.impose_normal(&mut bc);
    let mut base = b_prev.scaled(inv_dt);
    if let Some(f) = f_b {
        base.axpy(1.0, f);
    }
    if !walls.is_zero() {
        base.axpy(-inv_dt, &bc);
        base.axpy(kappa, &laplacian_vector(&bc, walls));
        base.axpy(-1.0, &convect(u, &bc, walls));
    }

    let apply = |x: &[f64]| {
        let mut f = VectorField::zeros(g);
        f.unpack_interior(x);
        let mut r = f.scaled(inv_dt);
        r.axpy(-kappa, &laplacian_vector(&f, &zero));
        r.axpy(1.0, &convect(u, &f, &zero));
        let mut out = vec![0.0; n];
        r.pack_interior(&mut out);
        out
    };
    let precond = |r: &[f64]| st.helm_b.solve_packed(r, inv_dt, kappa);

    let mut b = b_prev.clone();
    walls.impose_normal(&mut b);
    let mut x = vec![0.0; n];
    b.pack_interior(&mut x);
    let mut rhs = vec![0.0; n];
    let mut diffs: Vec<f64> = Vec::new();
    let mut linear = 0;
    for j in 1..=st.cfg.picard_max_iter {
        let mut r = base.clone();
        r.axpy(1.0, &convect(&b, u, &zero));
        r.pack_interior(&mut rhs);
        linear += gmres(apply, precond, &rhs, &mut x, 1e-13, 40, 400)?;
        let mut next = bc.clone();
        next.unpack_interior(&x);
        let scale = next.norm_l2().max(1.0);
        let d = next.sub(&b).norm_l2();
        diffs.push(d);
        b = next;
        if d <= st.cfg.picard_tol * scale {
            return Ok((
                b,
                BStepReport {
                    iterations: j,
                    residual: d / scale,
                    contraction: contraction(&diffs, scale),
                    linear_iterations: linear,
                },
            ));
        }
        if !d.is_finite() {
            break;
        }
    }
    let scale = b.norm_l2().max(1.0);
    Err(MhdError::PicardDivergence {
        t: f64::NAN,
        ratio: contraction(&diffs, scale),
        iterations: diffs.len(),
    })
}

/// Ratios whose denominator sits well above the solver noise are meaningful.
fn contraction(diffs: &[f64], scale: f64) -> f64 {
    let floor = 1e-11 * scale;
    diffs
        .windows(2)
        .filter(|w| w[0] > floor)
        .map(|w| w[1] / w[0])
        .fold(0.0, f64::max)
}
