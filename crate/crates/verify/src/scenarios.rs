//! Named problem setups shared by the experiments.
//!
//! Boundary data is always the shear family `h(t) = a(t)·(p(y), p(x))` restricted to the
//! walls. It is divergence free, and its discrete interior extension `shear_field` is
//! exactly divergence free with the right normal flux, so every scenario passes the
//! compatibility check without projection.

use std::f64::consts::PI;

use mhd_core::dynamics::{run, Problem, RunOptions, RunOutput, SolverConfig};
use mhd_core::lifting::BoundaryTrace;
use mhd_core::ops::curl_of_stream;
use mhd_core::spectral::SpectralBasis;
use mhd_core::{Grid, VectorField};

use crate::error::{Result, VerifyError};

/// Spatial profile `p` of the shear field `(p(y), p(x))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shear {
    /// `p(s) = sin(πs)`
    Sine,
    /// `p(s) = s − ½`, harmonic
    Linear,
}

impl Shear {
    /// `[p, p′, p″]` at `s`.
    pub fn jet(self, s: f64) -> [f64; 3] {
        match self {
            Shear::Sine => [
                (PI * s).sin(),
                PI * (PI * s).cos(),
                -PI * PI * (PI * s).sin(),
            ],
            Shear::Linear => [s - 0.5, 1.0, 0.0],
        }
    }

    pub fn value(self, x: f64, y: f64) -> [f64; 2] {
        [self.jet(y)[0], self.jet(x)[0]]
    }
}

/// Scalar time amplitude of the boundary data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Amplitude {
    Constant(f64),
    /// `a sin(2πft)`
    Sine {
        amplitude: f64,
        frequency: f64,
    },
    /// `a (1 − e^{−rt})`
    Ramp {
        amplitude: f64,
        rate: f64,
    },
    /// `m + a sin(2πft)`
    Pulsed {
        mean: f64,
        amplitude: f64,
        frequency: f64,
    },
}

impl Amplitude {
    pub fn eval(self, t: f64) -> f64 {
        match self {
            Amplitude::Constant(c) => c,
            Amplitude::Sine {
                amplitude,
                frequency,
            } => amplitude * (2.0 * PI * frequency * t).sin(),
            Amplitude::Ramp { amplitude, rate } => amplitude * (1.0 - (-rate * t).exp()),
            Amplitude::Pulsed {
                mean,
                amplitude,
                frequency,
            } => mean + amplitude * (2.0 * PI * frequency * t).sin(),
        }
    }

    pub fn derivative(self, t: f64) -> f64 {
        match self {
            Amplitude::Constant(_) => 0.0,
            Amplitude::Sine {
                amplitude,
                frequency,
            }
            | Amplitude::Pulsed {
                amplitude,
                frequency,
                ..
            } => 2.0 * PI * frequency * amplitude * (2.0 * PI * frequency * t).cos(),
            Amplitude::Ramp { amplitude, rate } => amplitude * rate * (-rate * t).exp(),
        }
    }
}

/// Discrete field whose faces carry the edge averages of `(p(y), p(x))`: divergence free
/// cell by cell, with wall fluxes equal to the vertex averages of the trace.
pub fn shear_field(grid: Grid, shear: Shear) -> VectorField {
    let g = grid;
    let p = |s: f64| shear.jet(s)[0];
    let mut f = VectorField::zeros(g);
    for j in 0..g.ny {
        let val = 0.5 * (p(g.yn(j)) + p(g.yn(j + 1)));
        for i in 0..=g.nx {
            f.u[g.uface(i, j)] = val;
        }
    }
    for i in 0..g.nx {
        let val = 0.5 * (p(g.xn(i)) + p(g.xn(i + 1)));
        for j in 0..=g.ny {
            f.v[g.vface(i, j)] = val;
        }
    }
    f
}

pub fn shear_trace(grid: Grid, shear: Shear, a: Amplitude) -> Result<BoundaryTrace> {
    Ok(BoundaryTrace::from_fn(grid, move |x, y, t| {
        let v = shear.value(x, y);
        let s = a.eval(t);
        [s * v[0], s * v[1]]
    })?)
}

/// `ψ = sin²(πx) sin²(πy)`: its curl vanishes on the walls with its normal derivative.
pub fn velocity_stream(x: f64, y: f64) -> f64 {
    ((PI * x).sin() * (PI * y).sin()).powi(2)
}

fn magnetic_stream(x: f64, y: f64) -> f64 {
    (PI * x).sin().powi(2) * (PI * y).sin().powi(2) * (PI * (x + 2.0 * y)).cos()
}

/// Divergence-free perturbations with zero trace.
pub fn velocity_bump(grid: Grid) -> VectorField {
    curl_of_stream(grid, velocity_stream)
}

pub fn magnetic_bump(grid: Grid) -> VectorField {
    curl_of_stream(grid, magnetic_stream)
}

/// A fully specified run.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub id: String,
    pub cfg: SolverConfig,
    pub problem: Problem,
    pub u0: VectorField,
    pub b0: VectorField,
}

impl Scenario {
    pub fn run(&self, basis: Option<&SpectralBasis>, opts: &RunOptions) -> Result<RunOutput> {
        Ok(run(
            &self.cfg,
            &self.problem,
            &self.u0,
            &self.b0,
            basis,
            opts,
        )?)
    }

    /// Boundary-driven setup: `b0 = a(0)·shear + mb·bump`, `u0 = mu·bump`.
    pub fn shear_driven(
        id: &str,
        cfg: SolverConfig,
        a: Amplitude,
        mu: f64,
        mb: f64,
    ) -> Result<Self> {
        let g = cfg.grid()?;
        let trace = shear_trace(g, Shear::Sine, a)?;
        let mut b0 = shear_field(g, Shear::Sine).scaled(a.eval(0.0));
        b0.axpy(mb, &magnetic_bump(g));
        Ok(Self {
            id: id.to_owned(),
            cfg,
            problem: Problem::unforced(trace),
            u0: velocity_bump(g).scaled(mu),
            b0,
        })
    }
}

/// Registered boundary-driven scenarios.
pub const SCENARIO_IDS: [&str; 8] = [
    "zero",
    "decay",
    "oscillatory",
    "ramped",
    "pulsed",
    "periodic_small",
    "steady_boundary",
    "coupled_reference",
];

/// Boundary amplitude and perturbation sizes `(a, mu, mb)` of a registered scenario.
pub fn scenario_parameters(id: &str) -> Result<(Amplitude, f64, f64)> {
    Ok(match id {
        "zero" => (Amplitude::Constant(0.0), 0.0, 0.0),
        "decay" => (Amplitude::Constant(0.0), 1.0, 1.0),
        "oscillatory" => (
            Amplitude::Sine {
                amplitude: 1.0,
                frequency: 2.0,
            },
            0.1,
            0.1,
        ),
        "ramped" => (
            Amplitude::Ramp {
                amplitude: 1.0,
                rate: 5.0,
            },
            0.1,
            0.1,
        ),
        "pulsed" => (
            Amplitude::Pulsed {
                mean: 0.5,
                amplitude: 0.5,
                frequency: 2.0,
            },
            0.2,
            0.2,
        ),
        "periodic_small" => (
            Amplitude::Pulsed {
                mean: 0.05,
                amplitude: 0.025,
                frequency: 1.0,
            },
            1.0,
            1.0,
        ),
        "steady_boundary" => (Amplitude::Constant(0.5), 0.1, 0.1),
        "coupled_reference" => (
            Amplitude::Sine {
                amplitude: 1.0,
                frequency: 1.0,
            },
            3.0,
            2.0,
        ),
        _ => {
            return Err(VerifyError::Unknown {
                kind: "scenario",
                id: id.to_owned(),
            })
        }
    })
}

/// Looks up a registered scenario at the given resolution, step and horizon.
pub fn scenario(id: &str, nx: usize, dt: f64, horizon: f64) -> Result<Scenario> {
    let (a, mu, mb) = scenario_parameters(id)?;
    Scenario::shear_driven(id, SolverConfig::new(nx, dt, horizon), a, mu, mb)
}
