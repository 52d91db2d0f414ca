//! Discrete differential operators on the MAC grid.
//!
//! Dirichlet closure for tangential components and cell-centred scalars uses the
//! ghost value `2g - f₀`, which keeps the Laplacian symmetric on zero-trace fields.

use crate::error::Result;
use crate::grid::{Grid, ScalarField, ScalarWalls, VectorField, WallValues};

/// Cell-centred divergence from face differences.
pub fn divergence(v: &VectorField) -> ScalarField {
    let g = v.grid;
    let mut out = ScalarField::zeros(g);
    for j in 0..g.ny {
        for i in 0..g.nx {
            out.data[g.cell(i, j)] =
                (v.u_at(i + 1, j) - v.u_at(i, j)) / g.dx + (v.v_at(i, j + 1) - v.v_at(i, j)) / g.dy;
        }
    }
    out
}

/// Face-centred gradient of a cell scalar; wall faces are set to zero.
pub fn gradient(s: &ScalarField) -> VectorField {
    let g = s.grid;
    let mut out = VectorField::zeros(g);
    for j in 0..g.ny {
        for i in 1..g.nx {
            out.u[g.uface(i, j)] = (s.at(i, j) - s.at(i - 1, j)) / g.dx;
        }
    }
    for j in 1..g.ny {
        for i in 0..g.nx {
            out.v[g.vface(i, j)] = (s.at(i, j) - s.at(i, j - 1)) / g.dy;
        }
    }
    out
}

/// 5-point Laplacian of a cell scalar with Dirichlet wall values.
pub fn laplacian_scalar(s: &ScalarField, walls: &ScalarWalls) -> ScalarField {
    let g = s.grid;
    let mut out = ScalarField::zeros(g);
    let (ix2, iy2) = (1.0 / (g.dx * g.dx), 1.0 / (g.dy * g.dy));
    for j in 0..g.ny {
        for i in 0..g.nx {
            let c = s.at(i, j);
            let w = if i > 0 {
                s.at(i - 1, j)
            } else {
                2.0 * walls.left[j] - c
            };
            let e = if i + 1 < g.nx {
                s.at(i + 1, j)
            } else {
                2.0 * walls.right[j] - c
            };
            let so = if j > 0 {
                s.at(i, j - 1)
            } else {
                2.0 * walls.bottom[i] - c
            };
            let n = if j + 1 < g.ny {
                s.at(i, j + 1)
            } else {
                2.0 * walls.top[i] - c
            };
            out.data[g.cell(i, j)] = (w - 2.0 * c + e) * ix2 + (so - 2.0 * c + n) * iy2;
        }
    }
    out
}

/// Componentwise 5-point Laplacian on interior faces.
///
/// Normal neighbours come from the wall faces stored in `f`; tangential closure uses `walls`.
/// Wall faces of the result are zero.
pub fn laplacian_vector(f: &VectorField, walls: &WallValues) -> VectorField {
    let g = f.grid;
    let mut out = VectorField::zeros(g);
    let (ix2, iy2) = (1.0 / (g.dx * g.dx), 1.0 / (g.dy * g.dy));
    for j in 0..g.ny {
        for i in 1..g.nx {
            let c = f.u_at(i, j);
            let so = if j > 0 {
                f.u_at(i, j - 1)
            } else {
                2.0 * walls.u_bottom[i] - c
            };
            let n = if j + 1 < g.ny {
                f.u_at(i, j + 1)
            } else {
                2.0 * walls.u_top[i] - c
            };
            out.u[g.uface(i, j)] =
                (f.u_at(i - 1, j) - 2.0 * c + f.u_at(i + 1, j)) * ix2 + (so - 2.0 * c + n) * iy2;
        }
    }
    for j in 1..g.ny {
        for i in 0..g.nx {
            let c = f.v_at(i, j);
            let w = if i > 0 {
                f.v_at(i - 1, j)
            } else {
                2.0 * walls.v_left[j] - c
            };
            let e = if i + 1 < g.nx {
                f.v_at(i + 1, j)
            } else {
                2.0 * walls.v_right[j] - c
            };
            out.v[g.vface(i, j)] =
                (w - 2.0 * c + e) * ix2 + (f.v_at(i, j - 1) - 2.0 * c + f.v_at(i, j + 1)) * iy2;
        }
    }
    out
}

/// ‖∇f‖² consistent with [`laplacian_vector`]: equals `-⟨Δf, f⟩` when the trace vanishes.
pub fn gradient_energy(f: &VectorField, walls: &WallValues) -> f64 {
    let g = f.grid;
    let (dx, dy) = (g.dx, g.dy);
    let mut s = 0.0;
    // x-component
    for j in 0..g.ny {
        for i in 0..g.nx {
            let d = (f.u_at(i + 1, j) - f.u_at(i, j)) / dx;
            s += d * d;
        }
    }
    for i in 0..=g.nx {
        let w = if i == 0 || i == g.nx { 0.5 } else { 1.0 };
        for j in 0..g.ny.saturating_sub(1) {
            let d = (f.u_at(i, j + 1) - f.u_at(i, j)) / dy;
            s += w * d * d;
        }
        let db = f.u_at(i, 0) - walls.u_bottom[i];
        let dt = f.u_at(i, g.ny - 1) - walls.u_top[i];
        s += w * 2.0 * (db * db + dt * dt) / (dy * dy);
    }
    // y-component
    for j in 0..=g.ny {
        let w = if j == 0 || j == g.ny { 0.5 } else { 1.0 };
        for i in 0..g.nx.saturating_sub(1) {
            let d = (f.v_at(i + 1, j) - f.v_at(i, j)) / dx;
            s += w * d * d;
        }
        let dl = f.v_at(0, j) - walls.v_left[j];
        let dr = f.v_at(g.nx - 1, j) - walls.v_right[j];
        s += w * 2.0 * (dl * dl + dr * dr) / (dx * dx);
    }
    for j in 0..g.ny {
        for i in 0..g.nx {
            let d = (f.v_at(i, j + 1) - f.v_at(i, j)) / dy;
            s += d * d;
        }
    }
    s * g.cell_area()
}

/// ‖∇s‖² of a cell scalar, consistent with [`laplacian_scalar`].
pub fn gradient_energy_scalar(s: &ScalarField, walls: &ScalarWalls) -> f64 {
    let g = s.grid;
    let mut acc = 0.0;
    for j in 0..g.ny {
        for i in 0..g.nx.saturating_sub(1) {
            let d = (s.at(i + 1, j) - s.at(i, j)) / g.dx;
            acc += d * d;
        }
        let dl = s.at(0, j) - walls.left[j];
        let dr = s.at(g.nx - 1, j) - walls.right[j];
        acc += 2.0 * (dl * dl + dr * dr) / (g.dx * g.dx);
    }
    for i in 0..g.nx {
        for j in 0..g.ny.saturating_sub(1) {
            let d = (s.at(i, j + 1) - s.at(i, j)) / g.dy;
            acc += d * d;
        }
        let db = s.at(i, 0) - walls.bottom[i];
        let dt = s.at(i, g.ny - 1) - walls.top[i];
        acc += 2.0 * (db * db + dt * dt) / (g.dy * g.dy);
    }
    acc * g.cell_area()
}

/// Skew-symmetric advection `a·∇f` on interior faces.
///
/// Flux form with centred interpolation, minus `½ f ∇·a` over each control volume, so
/// `⟨convect(a, f), f⟩ = 0` whenever `a` has zero normal flux through the walls and
/// `f` has zero trace. Values of `f` on wall edges come from `f_walls`.
pub fn convect(a: &VectorField, f: &VectorField, f_walls: &WallValues) -> VectorField {
    let g = a.grid;
    let (dx, dy) = (g.dx, g.dy);
    let mut out = VectorField::zeros(g);
    for j in 0..g.ny {
        for i in 1..g.nx {
            let fp = f.u_at(i, j);
            let ae = 0.5 * (a.u_at(i, j) + a.u_at(i + 1, j));
            let aw = 0.5 * (a.u_at(i - 1, j) + a.u_at(i, j));
            let fe = 0.5 * (fp + f.u_at(i + 1, j));
            let fw = 0.5 * (f.u_at(i - 1, j) + fp);
            let bn = 0.5 * (a.v_at(i - 1, j + 1) + a.v_at(i, j + 1));
            let bs = 0.5 * (a.v_at(i - 1, j) + a.v_at(i, j));
            let fnn = if j + 1 < g.ny {
                0.5 * (fp + f.u_at(i, j + 1))
            } else {
                f_walls.u_top[i]
            };
            let fs = if j > 0 {
                0.5 * (f.u_at(i, j - 1) + fp)
            } else {
                f_walls.u_bottom[i]
            };
            let flux = (ae * fe - aw * fw) / dx + (bn * fnn - bs * fs) / dy;
            let div = (ae - aw) / dx + (bn - bs) / dy;
            out.u[g.uface(i, j)] = flux - 0.5 * fp * div;
        }
    }
    for j in 1..g.ny {
        for i in 0..g.nx {
            let fp = f.v_at(i, j);
            let bn = 0.5 * (a.v_at(i, j) + a.v_at(i, j + 1));
            let bs = 0.5 * (a.v_at(i, j - 1) + a.v_at(i, j));
            let fnn = 0.5 * (fp + f.v_at(i, j + 1));
            let fs = 0.5 * (f.v_at(i, j - 1) + fp);
            let ae = 0.5 * (a.u_at(i + 1, j - 1) + a.u_at(i + 1, j));
            let aw = 0.5 * (a.u_at(i, j - 1) + a.u_at(i, j));
            let fe = if i + 1 < g.nx {
                0.5 * (fp + f.v_at(i + 1, j))
            } else {
                f_walls.v_right[j]
            };
            let fw = if i > 0 {
                0.5 * (f.v_at(i - 1, j) + fp)
            } else {
                f_walls.v_left[j]
            };
            let flux = (ae * fe - aw * fw) / dx + (bn * fnn - bs * fs) / dy;
            let div = (ae - aw) / dx + (bn - bs) / dy;
            out.v[g.vface(i, j)] = flux - 0.5 * fp * div;
        }
    }
    out
}

/// Residual norms of the three planar vector identities used to rewrite the MHD system:
///
/// 1. `(∇×b)×b = b·∇b − ½∇|b|²`
/// 2. `∇×∇×b = ∇(∇·b) − Δb`
/// 3. `∇×(u×b) = u(∇·b) − b(∇·u) + b·∇u − u·∇b`
///
/// Each side is evaluated by an independent second-order route and the L² norm of the
/// difference is taken over cells at least two layers away from the walls, so the
/// residuals measure discretization consistency and shrink like `dx²`.
pub fn identity_residuals(b: &VectorField, u: &VectorField) -> Result<[f64; 3]> {
    let g = b.grid;
    g.ensure_same(&u.grid)?;
    let (b1, b2) = b.at_centers();
    let (u1, u2) = u.at_centers();
    let dcx =
        |s: &ScalarField, i: usize, j: usize| (s.at(i + 1, j) - s.at(i - 1, j)) / (2.0 * g.dx);
    let dcy =
        |s: &ScalarField, i: usize, j: usize| (s.at(i, j + 1) - s.at(i, j - 1)) / (2.0 * g.dy);

    // vorticity at interior nodes (i, j), 1 ≤ i < nx, 1 ≤ j < ny
    let vort = |f: &VectorField, i: usize, j: usize| {
        (f.v_at(i, j) - f.v_at(i - 1, j)) / g.dx - (f.u_at(i, j) - f.u_at(i, j - 1)) / g.dy
    };
    let omega_c = |i: usize, j: usize| {
        0.25 * (vort(b, i, j) + vort(b, i + 1, j) + vort(b, i, j + 1) + vort(b, i + 1, j + 1))
    };

    let mut bsq = ScalarField::zeros(g);
    let mut cross = ScalarField::zeros(g);
    for k in 0..bsq.data.len() {
        bsq.data[k] = b1.data[k] * b1.data[k] + b2.data[k] * b2.data[k];
        cross.data[k] = u1.data[k] * b2.data[k] - u2.data[k] * b1.data[k];
    }
    let mut divb = ScalarField::zeros(g);
    for j in 1..g.ny - 1 {
        for i in 1..g.nx - 1 {
            divb.data[g.cell(i, j)] = dcx(&b1, i, j) + dcy(&b2, i, j);
        }
    }

    let mut r = [0.0f64; 3];
    let lo = 2;
    let (hix, hiy) = (g.nx - 2, g.ny - 2);
    for j in lo..hiy {
        for i in lo..hix {
            let c = g.cell(i, j);
            let (bx, by) = (b1.data[c], b2.data[c]);
            let (ux, uy) = (u1.data[c], u2.data[c]);

            // identity 1
            let om = omega_c(i, j);
            let lhs1 = [-om * by, om * bx];
            let rhs1 = [
                bx * dcx(&b1, i, j) + by * dcy(&b1, i, j) - 0.5 * dcx(&bsq, i, j),
                bx * dcx(&b2, i, j) + by * dcy(&b2, i, j) - 0.5 * dcy(&bsq, i, j),
            ];
            r[0] += (lhs1[0] - rhs1[0]).powi(2) + (lhs1[1] - rhs1[1]).powi(2);

            // identity 2: compact curl-curl on faces averaged to the centre vs wide grad-div
            // and compact cell Laplacian
            let cc_u = |ii: usize, jj: usize| (vort(b, ii, jj + 1) - vort(b, ii, jj)) / g.dy;
            let cc_v = |ii: usize, jj: usize| -(vort(b, ii + 1, jj) - vort(b, ii, jj)) / g.dx;
            let lhs2 = [
                0.5 * (cc_u(i, j) + cc_u(i + 1, j)),
                0.5 * (cc_v(i, j) + cc_v(i, j + 1)),
            ];
            let lap = |s: &ScalarField| {
                (s.at(i - 1, j) - 2.0 * s.at(i, j) + s.at(i + 1, j)) / (g.dx * g.dx)
                    + (s.at(i, j - 1) - 2.0 * s.at(i, j) + s.at(i, j + 1)) / (g.dy * g.dy)
            };
            let rhs2 = [dcx(&divb, i, j) - lap(&b1), dcy(&divb, i, j) - lap(&b2)];
            r[1] += (lhs2[0] - rhs2[0]).powi(2) + (lhs2[1] - rhs2[1]).powi(2);

            // identity 3
            let lhs3 = [dcy(&cross, i, j), -dcx(&cross, i, j)];
            let div_b = dcx(&b1, i, j) + dcy(&b2, i, j);
            let div_u = dcx(&u1, i, j) + dcy(&u2, i, j);
            let rhs3 = [
                ux * div_b - bx * div_u + bx * dcx(&u1, i, j) + by * dcy(&u1, i, j)
                    - ux * dcx(&b1, i, j)
                    - uy * dcy(&b1, i, j),
                uy * div_b - by * div_u + bx * dcx(&u2, i, j) + by * dcy(&u2, i, j)
                    - ux * dcx(&b2, i, j)
                    - uy * dcy(&b2, i, j),
            ];
            r[2] += (lhs3[0] - rhs3[0]).powi(2) + (lhs3[1] - rhs3[1]).powi(2);
        }
    }
    let area = g.cell_area();
    Ok(r.map(|x| (x * area).sqrt()))
}

/// Builds a discretely divergence-free field `u = curl ψ` from a stream function sampled at
/// grid vertices; `psi(x, y)` should vanish on the walls for zero normal flux.
pub fn curl_of_stream(grid: Grid, psi: impl Fn(f64, f64) -> f64) -> VectorField {
    let g = grid;
    let mut out = VectorField::zeros(g);
    for j in 0..g.ny {
        for i in 0..=g.nx {
            let (x, y0, y1) = (g.xn(i), g.yn(j), g.yn(j + 1));
            out.u[g.uface(i, j)] = (psi(x, y1) - psi(x, y0)) / g.dy;
        }
    }
    for j in 0..=g.ny {
        for i in 0..g.nx {
            let (y, x0, x1) = (g.yn(j), g.xn(i), g.xn(i + 1));
            out.v[g.vface(i, j)] = -(psi(x1, y) - psi(x0, y)) / g.dx;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_stream(g: Grid, seed: u64) -> VectorField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs: Vec<f64> = (0..16).map(|_| rng.gen_range(-1.0..1.0)).collect();
        curl_of_stream(g, move |x, y| {
            let mut s = 0.0;
            for k in 0..4 {
                for l in 0..4 {
                    s += coeffs[4 * k + l]
                        * (PI * (k + 1) as f64 * x).sin()
                        * (PI * (l + 1) as f64 * y).sin();
                }
            }
            s
        })
    }

    fn random_zero_trace(g: Grid, seed: u64) -> VectorField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut f = VectorField::zeros(g);
        f.u.iter_mut()
            .chain(f.v.iter_mut())
            .for_each(|x| *x = rng.gen_range(-1.0..1.0));
        f.zero_normal_walls();
        f
    }

    #[test]
    fn divergence_of_constant_and_linear_fields() {
        let g = Grid::square(16).unwrap();
        let c = VectorField::from_fn(g, |_, _| [1.0, 1.0]);
        assert!(divergence(&c).max_abs() < 1e-14);
        let l = VectorField::from_fn(g, |x, y| [x, -y]);
        assert!(divergence(&l).max_abs() < 1e-12);
    }

    #[test]
    fn divergence_is_second_order() {
        let err = |n: usize| {
            let g = Grid::square(n).unwrap();
            let f = VectorField::from_fn(g, |x, _| [(PI * x).sin(), 0.0]);
            let exact = ScalarField::from_fn(g, |x, _| PI * (PI * x).cos());
            let d = divergence(&f);
            d.data
                .iter()
                .zip(&exact.data)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
        };
        let ratio = err(32) / err(64);
        assert!(ratio > 3.9, "ratio {ratio}");
    }

    #[test]
    fn gradient_of_linear_is_exact() {
        let g = Grid::square(8).unwrap();
        let s = ScalarField::from_fn(g, |x, _| x);
        let gr = gradient(&s);
        for j in 0..g.ny {
            for i in 1..g.nx {
                assert!((gr.u_at(i, j) - 1.0).abs() < 1e-12);
            }
        }
        assert!(gr.v.iter().all(|v| v.abs() < 1e-12));
        let c = ScalarField::from_fn(g, |_, _| 3.5);
        assert!(gradient(&c).max_abs() < 1e-12);
    }

    #[test]
    fn gradient_is_negative_adjoint_of_divergence() {
        let g = Grid::new(12, 9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut s = ScalarField::zeros(g);
        s.data
            .iter_mut()
            .for_each(|x| *x = rng.gen_range(-1.0..1.0));
        let v = random_zero_trace(g, 4);
        let lhs = gradient(&s).dot(&v);
        let rhs = -s.dot(&divergence(&v));
        assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0));
    }

    #[test]
    fn laplacian_exact_on_polynomials() {
        let g = Grid::square(10).unwrap();
        let lin = ScalarField::from_fn(g, |x, y| 2.0 * x - y + 1.0);
        let lw = ScalarWalls::from_fn(&g, |x, y| 2.0 * x - y + 1.0);
        assert!(laplacian_scalar(&lin, &lw).max_abs() < 1e-9);
        let q = ScalarField::from_fn(g, |x, _| x * x);
        let qw = ScalarWalls::from_fn(&g, |x, _| x * x);
        let lq = laplacian_scalar(&q, &qw);
        for j in 1..g.ny - 1 {
            for i in 1..g.nx - 1 {
                assert!((lq.at(i, j) - 2.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn laplacian_sine_mode_second_order() {
        let err = |n: usize| {
            let g = Grid::square(n).unwrap();
            let f = |x: f64, y: f64| (PI * x).sin() * (PI * y).sin();
            let s = ScalarField::from_fn(g, f);
            let l = laplacian_scalar(&s, &ScalarWalls::zero(&g));
            l.data
                .iter()
                .zip(&s.data)
                .fold(0.0f64, |m, (a, b)| m.max((a + 2.0 * PI * PI * b).abs()))
        };
        assert!(err(32) / err(64) > 3.9);
    }

    #[test]
    fn vector_laplacian_symmetric_negative() {
        let g = Grid::new(9, 11).unwrap();
        let z = WallValues::zero(&g);
        let f = random_zero_trace(g, 1);
        let h = random_zero_trace(g, 2);
        let a = laplacian_vector(&f, &z).dot(&h);
        let b = f.dot(&laplacian_vector(&h, &z));
        assert!((a - b).abs() < 1e-10 * a.abs().max(1.0));
        let e = laplacian_vector(&f, &z).dot(&f);
        assert!(e < 0.0);
        assert!((e + gradient_energy(&f, &z)).abs() < 1e-9 * e.abs());
    }

    #[test]
    fn convect_skew_symmetric_for_div_free_advector() {
        for seed in 0..5 {
            let g = Grid::new(16, 12).unwrap();
            let a = random_stream(g, seed);
            assert!(divergence(&a).max_abs() < 1e-10);
            let f = random_zero_trace(g, seed + 100);
            let z = WallValues::zero(&g);
            let s = convect(&a, &f, &z).dot(&f);
            assert!(s.abs() < 1e-10, "seed {seed}: {s}");
        }
    }

    #[test]
    fn convect_zero_advector_and_uniform_flow() {
        let g = Grid::square(16).unwrap();
        let f = VectorField::from_fn(g, |x, y| [x * y, x + y]);
        let w = WallValues::from_fn(&g, |x, y| [x * y, x + y]);
        assert!(convect(&VectorField::zeros(g), &f, &w).max_abs() < 1e-14);

        let err = |n: usize| {
            let g = Grid::square(n).unwrap();
            let a = VectorField::from_fn(g, |_, _| [1.0, 0.0]);
            let sol = |x: f64, _y: f64| [(PI * x).sin(), 0.0];
            let f = VectorField::from_fn(g, sol);
            let w = WallValues::from_fn(&g, sol);
            let c = convect(&a, &f, &w);
            let mut m = 0.0f64;
            for j in 0..g.ny {
                for i in 1..g.nx {
                    m = m.max((c.u_at(i, j) - PI * (PI * g.xn(i)).cos()).abs());
                }
            }
            m.max(c.v.iter().fold(0.0, |m, v| m.max(v.abs())))
        };
        assert!(err(32) / err(64) > 3.5);
    }

    #[test]
    fn identity_residuals_vanish_for_trivial_fields() {
        let g = Grid::square(16).unwrap();
        let z = VectorField::zeros(g);
        assert_eq!(identity_residuals(&z, &z).unwrap(), [0.0; 3]);
        let c = VectorField::from_fn(g, |_, _| [0.3, -1.2]);
        assert!(identity_residuals(&c, &z).unwrap()[0] < 1e-13);
    }
}
