use std::f64::consts::PI;

use mhd_core::dynamics::{Coupling, Problem, SimState, SolverConfig, Stepper, Truncation};
use mhd_core::lifting::{lifting_estimate_check, BoundaryMode, BoundaryTrace, Envelope};
use mhd_core::ops::curl_of_stream;
use mhd_core::spectral::{build_laplacian_basis, build_stokes_basis};
use mhd_core::{Grid, VectorField, WallValues};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn magnetic_step_scales_the_first_eigenmode() {
    let g = Grid::square(24).unwrap();
    let dt = 1e-3;
    let lap = build_laplacian_basis(g, 1).unwrap();
    let st = Stepper::new(SolverConfig::new(24, dt, 1.0), None).unwrap();
    let b0 = &lap.modes[0];
    let (b1, _) = st
        .b_step(&VectorField::zeros(g), b0, &WallValues::zero(&g), None)
        .unwrap();
    let want = b0.scaled(1.0 / (1.0 + lap.eigenvalues[0] * dt));
    assert!(b1.sub(&want).norm_l2() < 1e-8);
}

#[test]
fn velocity_step_scales_a_single_stokes_mode() {
    let g = Grid::square(16).unwrap();
    let dt = 2e-3;
    let basis = build_stokes_basis(g, 6).unwrap();
    let mut cfg = SolverConfig::new(16, dt, 1.0);
    cfg.truncation = Truncation::Modes(6);
    let st = Stepper::new(cfg, Some(&basis)).unwrap();
    let xi = &basis.modes[0];
    let zero = VectorField::zeros(g);
    let (u1, _, _) = st
        .u_step(&zero, &WallValues::zero(&g), xi, xi, None)
        .unwrap();
    let c = u1.dot(xi);
    assert!(
        (c - 1.0 / (1.0 + basis.eigenvalues[0] * dt)).abs() < 1e-8,
        "{c}"
    );
}

fn smooth_state(g: Grid, rng: &mut ChaCha8Rng) -> (VectorField, VectorField) {
    let mut field = || {
        let c: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        curl_of_stream(g, move |x, y| {
            let s = (PI * x).sin() * (PI * y).sin();
            s * s
                * (c[0]
                    + c[1] * (PI * x).cos()
                    + c[2] * (PI * y).cos()
                    + c[3] * (2.0 * PI * x * y).sin())
        })
    };
    (field(), field())
}

#[test]
fn picard_contracts_on_random_smooth_pairs() {
    let g = Grid::square(16).unwrap();
    let mut cfg = SolverConfig::new(16, 1e-3, 1.0);
    cfg.picard_tol = 1e-12;
    let st = Stepper::new(cfg, None).unwrap();
    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (u, b) = smooth_state(g, &mut rng);
        let (_, rep) = st
            .b_step(&u.scaled(3.0), &b, &WallValues::zero(&g), None)
            .unwrap();
        assert!(rep.contraction < 1.0, "seed {seed}: {rep:?}");
    }
}

#[test]
fn coupling_modes_agree_to_second_order_per_step() {
    let g = Grid::square(16).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (u, b) = smooth_state(g, &mut rng);
    let mut s = SimState::zero(g);
    s.u = u.scaled(2.0);
    s.b = b.scaled(2.0);
    let problem = Problem::unforced(BoundaryTrace::zero(g).unwrap());
    let gap = |dt: f64| {
        let mut single = SolverConfig::new(16, dt, 1.0);
        single.div_clean_threshold = f64::INFINITY;
        let mut fixed = single.clone();
        fixed.coupling = Coupling::FixedPoint {
            tol: 1e-13,
            max_iter: 100,
        };
        let a = Stepper::new(single, None)
            .unwrap()
            .coupled_step(&s, &problem)
            .unwrap()
            .0;
        let c = Stepper::new(fixed, None)
            .unwrap()
            .coupled_step(&s, &problem)
            .unwrap()
            .0;
        (a.u.sub(&c.u).norm_l2_sq() + a.b.sub(&c.b).norm_l2_sq()).sqrt()
    };
    // the stiff part of the spectrum keeps larger steps pre-asymptotic
    let ratio = gap(5e-4) / gap(2.5e-4);
    assert!(ratio >= 3.5, "ratio {ratio}");
}

#[test]
fn lifting_constant_is_stable_across_resolutions() {
    let mode = BoundaryMode {
        amplitude: [0.3, -0.2],
        wavenumber: 2,
        phase: 0.4,
        envelope: Envelope::Constant,
    };
    let times = [0.0, 0.5, 1.0];
    let r: Vec<f64> = [32, 64]
        .iter()
        .map(|&n| {
            let tr = BoundaryTrace::from_modes(Grid::square(n).unwrap(), vec![mode]).unwrap();
            lifting_estimate_check(&tr, &times).unwrap().ratio
        })
        .collect();
    assert!(r[0].is_finite() && r[0] > 0.0);
    assert!(r[0].max(r[1]) / r[0].min(r[1]) <= 2.0, "{r:?}");
}
