//! Manufactured solutions with analytic forcing.
//!
//! `u* = s_u a(t) U`, `U = curl(sin²πx sin²πy)`, and `b* = s_b a(t) B` with `B` a shear
//! field. Pressure is zero, so the forcing absorbs the whole momentum residual.

use std::f64::consts::PI;
use std::sync::Arc;

use mhd_core::dynamics::{Problem, SimState, SolverConfig};
use mhd_core::ops::curl_of_stream;
use mhd_core::{Grid, VectorField};

use crate::error::Result;
use crate::scenarios::{shear_field, shear_trace, velocity_stream, Amplitude, Scenario, Shear};

/// Value and first derivatives of the velocity profile `U`.
#[derive(Debug, Clone, Copy)]
struct VelocityJet {
    u: [f64; 2],
    /// `[∂x U1, ∂y U1, ∂x U2, ∂y U2]`
    grad: [f64; 4],
    lap: [f64; 2],
}

fn velocity_jet(x: f64, y: f64) -> VelocityJet {
    let (sx, sy) = ((PI * x).sin(), (PI * y).sin());
    let (s2x, c2x) = ((2.0 * PI * x).sin(), (2.0 * PI * x).cos());
    let (s2y, c2y) = ((2.0 * PI * y).sin(), (2.0 * PI * y).cos());
    let p2 = PI * PI;
    let p3 = p2 * PI;
    VelocityJet {
        u: [PI * sx * sx * s2y, -PI * s2x * sy * sy],
        grad: [
            p2 * s2x * s2y,
            2.0 * p2 * sx * sx * c2y,
            -2.0 * p2 * c2x * sy * sy,
            -p2 * s2x * s2y,
        ],
        lap: [
            2.0 * p3 * c2x * s2y - 4.0 * p3 * sx * sx * s2y,
            4.0 * p3 * s2x * sy * sy - 2.0 * p3 * s2x * c2y,
        ],
    }
}

/// One manufactured solution of the full coupled system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Manufactured {
    pub velocity_scale: f64,
    pub magnetic_scale: f64,
    pub shear: Shear,
    pub amplitude: Amplitude,
    pub re: f64,
    pub rm: f64,
    pub s: f64,
}

impl Manufactured {
    /// Steady solution with both fields active.
    pub fn steady(shear: Shear) -> Self {
        Self {
            velocity_scale: 1.0,
            magnetic_scale: 1.0,
            shear,
            amplitude: Amplitude::Constant(1.0),
            re: 1.0,
            rm: 1.0,
            s: 1.0,
        }
    }

    /// `a(t) = 1 + ½ sin(2πt)` on both fields.
    pub fn unsteady(shear: Shear) -> Self {
        Self {
            amplitude: Amplitude::Pulsed {
                mean: 1.0,
                amplitude: 0.5,
                frequency: 1.0,
            },
            ..Self::steady(shear)
        }
    }

    pub fn velocity(&self, x: f64, y: f64, t: f64) -> [f64; 2] {
        let a = self.velocity_scale * self.amplitude.eval(t);
        let u = velocity_jet(x, y).u;
        [a * u[0], a * u[1]]
    }

    pub fn magnetic(&self, x: f64, y: f64, t: f64) -> [f64; 2] {
        let a = self.magnetic_scale * self.amplitude.eval(t);
        let b = self.shear.value(x, y);
        [a * b[0], a * b[1]]
    }

    /// `(f_u, f_b)` at a point.
    pub fn forcing_at(&self, x: f64, y: f64, t: f64) -> ([f64; 2], [f64; 2]) {
        let (a, da) = (self.amplitude.eval(t), self.amplitude.derivative(t));
        let (au, dau) = (self.velocity_scale * a, self.velocity_scale * da);
        let (ab, dab) = (self.magnetic_scale * a, self.magnetic_scale * da);
        let j = velocity_jet(x, y);
        let [u1, u2] = j.u;
        let [u1x, u1y, u2x, u2y] = j.grad;
        let py = self.shear.jet(y);
        let px = self.shear.jet(x);
        let (b1, b2) = (py[0], px[0]);
        // B1 depends on y only and B2 on x only
        let (b1y, b2x) = (py[1], px[1]);
        let lap_b = [py[2], px[2]];

        let uu = [u1 * u1x + u2 * u1y, u1 * u2x + u2 * u2y];
        let bb = [b2 * b1y, b1 * b2x];
        let ub = [u2 * b1y, u1 * b2x];
        let bu = [b1 * u1x + b2 * u1y, b1 * u2x + b2 * u2y];
        let mut fu = [0.0; 2];
        let mut fb = [0.0; 2];
        for k in 0..2 {
            fu[k] =
                dau * j.u[k] - au * j.lap[k] / self.re + au * au * uu[k] - self.s * ab * ab * bb[k];
            let bk = [b1, b2][k];
            fb[k] = dab * bk - ab * lap_b[k] / self.rm + au * ab * (ub[k] - bu[k]);
        }
        (fu, fb)
    }

    pub fn problem(&self, grid: Grid) -> Result<Problem> {
        let m = *self;
        let trace = shear_trace(
            grid,
            self.shear,
            scaled(self.amplitude, self.magnetic_scale),
        )?;
        Ok(Problem {
            trace,
            forcing: Some(Arc::new(move |g: Grid, t: f64| {
                let fu = VectorField::from_fn(g, |x, y| m.forcing_at(x, y, t).0);
                let fb = VectorField::from_fn(g, |x, y| m.forcing_at(x, y, t).1);
                (fu, fb)
            })),
        })
    }

    /// Exact state at `t` in the discrete spaces used by the solver.
    pub fn exact(&self, grid: Grid, t: f64) -> SimState {
        let a = self.amplitude.eval(t);
        let mut st = SimState::zero(grid);
        st.t = t;
        st.u = curl_of_stream(grid, velocity_stream).scaled(self.velocity_scale * a);
        st.b = shear_field(grid, self.shear).scaled(self.magnetic_scale * a);
        st
    }

    /// `(‖u − u*‖, ‖b − b*‖)` against the pointwise samples of the exact fields.
    pub fn errors(&self, state: &SimState) -> (f64, f64) {
        let g = state.u.grid;
        let t = state.t;
        let u = VectorField::from_fn(g, |x, y| self.velocity(x, y, t));
        let b = VectorField::from_fn(g, |x, y| self.magnetic(x, y, t));
        (state.u.sub(&u).norm_l2(), state.b.sub(&b).norm_l2())
    }

    pub fn scenario(&self, id: &str, cfg: SolverConfig) -> Result<Scenario> {
        let g = cfg.grid()?;
        let st = self.exact(g, 0.0);
        let mut cfg = cfg;
        cfg.re = self.re;
        cfg.rm = self.rm;
        cfg.s = self.s;
        Ok(Scenario {
            id: id.to_owned(),
            problem: self.problem(g)?,
            cfg,
            u0: st.u,
            b0: st.b,
        })
    }
}

fn scaled(a: Amplitude, k: f64) -> Amplitude {
    match a {
        Amplitude::Constant(c) => Amplitude::Constant(k * c),
        Amplitude::Sine {
            amplitude,
            frequency,
        } => Amplitude::Sine {
            amplitude: k * amplitude,
            frequency,
        },
        Amplitude::Ramp { amplitude, rate } => Amplitude::Ramp {
            amplitude: k * amplitude,
            rate,
        },
        Amplitude::Pulsed {
            mean,
            amplitude,
            frequency,
        } => Amplitude::Pulsed {
            mean: k * mean,
            amplitude: k * amplitude,
            frequency,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // central differences of the sampled exact fields
    fn fd_residual(m: &Manufactured, x: f64, y: f64, t: f64) -> ([f64; 2], [f64; 2]) {
        let h = 1e-4;
        let u = |x: f64, y: f64, t: f64| m.velocity(x, y, t);
        let b = |x: f64, y: f64, t: f64| m.magnetic(x, y, t);
        let d = |f: &dyn Fn(f64, f64, f64) -> [f64; 2], k: usize, dir: usize| {
            let (p, q) = match dir {
                0 => (f(x + h, y, t), f(x - h, y, t)),
                1 => (f(x, y + h, t), f(x, y - h, t)),
                _ => (f(x, y, t + h), f(x, y, t - h)),
            };
            (p[k] - q[k]) / (2.0 * h)
        };
        let lap = |f: &dyn Fn(f64, f64, f64) -> [f64; 2], k: usize| {
            let c = f(x, y, t)[k];
            (f(x + h, y, t)[k] + f(x - h, y, t)[k] + f(x, y + h, t)[k] + f(x, y - h, t)[k]
                - 4.0 * c)
                / (h * h)
        };
        let (uv, bv) = (u(x, y, t), b(x, y, t));
        let mut fu = [0.0; 2];
        let mut fb = [0.0; 2];
        for k in 0..2 {
            let u_grad_u = uv[0] * d(&u, k, 0) + uv[1] * d(&u, k, 1);
            let b_grad_b = bv[0] * d(&b, k, 0) + bv[1] * d(&b, k, 1);
            let u_grad_b = uv[0] * d(&b, k, 0) + uv[1] * d(&b, k, 1);
            let b_grad_u = bv[0] * d(&u, k, 0) + bv[1] * d(&u, k, 1);
            fu[k] = d(&u, k, 2) - lap(&u, k) / m.re + u_grad_u - m.s * b_grad_b;
            fb[k] = d(&b, k, 2) - lap(&b, k) / m.rm + u_grad_b - b_grad_u;
        }
        (fu, fb)
    }

    #[test]
    fn forcing_matches_finite_differences() {
        for shear in [Shear::Sine, Shear::Linear] {
            let mut m = Manufactured::unsteady(shear);
            m.velocity_scale = 0.7;
            m.magnetic_scale = 1.3;
            m.re = 2.0;
            m.s = 0.5;
            for &(x, y, t) in &[(0.3, 0.7, 0.1), (0.81, 0.22, 0.45), (0.5, 0.5, 0.0)] {
                let (fu, fb) = m.forcing_at(x, y, t);
                let (gu, gb) = fd_residual(&m, x, y, t);
                for k in 0..2 {
                    assert!(
                        (fu[k] - gu[k]).abs() < 2e-5 * (1.0 + gu[k].abs()),
                        "{shear:?} fu {fu:?} {gu:?}"
                    );
                    assert!(
                        (fb[k] - gb[k]).abs() < 2e-5 * (1.0 + gb[k].abs()),
                        "{shear:?} fb {fb:?} {gb:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn exact_state_is_admissible() {
        let m = Manufactured::steady(Shear::Sine);
        let g = Grid::square(16).unwrap();
        let sc = m.scenario("mms", SolverConfig::new(16, 1e-2, 0.1)).unwrap();
        let rep =
            mhd_core::dynamics::compatibility_check(&sc.u0, &sc.b0, &sc.problem.trace).unwrap();
        assert!(rep.passes(), "{rep:?}");
        let (eu, eb) = m.errors(&m.exact(g, 0.0));
        assert!(eu < 0.05 && eb < 0.01, "{eu} {eb}");
    }
}
