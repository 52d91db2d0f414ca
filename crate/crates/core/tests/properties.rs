use std::f64::consts::PI;
use std::sync::OnceLock;

use mhd_core::dynamics::{run, Problem, RunOptions, SimState, SolverConfig, Stepper};
use mhd_core::estimates::{gronwall_weak, normality_check, EnergyLedger};
use mhd_core::lifting::{
    harmonic_extend, hs_norm_sq_samples, parabolic_lift, BoundaryMode, BoundaryTrace,
    CompatibilityPolicy, Envelope, FractionalNormSpec, SUPPORTED_EXPONENTS,
};
use mhd_core::ops::{convect, curl_of_stream, divergence, gradient, laplacian_vector};
use mhd_core::spectral::{build_laplacian_basis, SpectralBasis};
use mhd_core::{Grid, ScalarField, VectorField, WallValues};
use proptest::prelude::*;

const N: usize = 12;

fn grid() -> Grid {
    Grid::square(N).unwrap()
}

/// Sum of `sin(kπx) sin(lπy)` products, so every component vanishes on the walls.
fn zero_trace_field(g: Grid, c: &[f64]) -> VectorField {
    VectorField::from_fn(g, |x, y| {
        let mut out = [0.0; 2];
        for (n, w) in c.iter().enumerate() {
            let (k, l) = (n % 3 + 1, (n / 3) % 3 + 1);
            let s = w * (k as f64 * PI * x).sin() * (l as f64 * PI * y).sin();
            out[n / 9] += s;
        }
        out
    })
}

fn stream(c: &[f64]) -> impl Fn(f64, f64) -> f64 + '_ {
    move |x, y| {
        c.iter()
            .enumerate()
            .map(|(n, w)| {
                w * ((n % 2 + 1) as f64 * PI * x).sin() * ((n / 2 + 1) as f64 * PI * y).sin()
            })
            .sum()
    }
}

fn coeffs(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, len)
}

fn modes() -> impl Strategy<Value = Vec<BoundaryMode>> {
    prop::collection::vec(
        (-1.0f64..1.0, -1.0f64..1.0, 0usize..5, 0.0f64..6.0).prop_map(|(a, b, k, phase)| {
            BoundaryMode {
                amplitude: [a, b],
                wavenumber: k,
                phase,
                envelope: Envelope::Constant,
            }
        }),
        1..4,
    )
}

fn laplace_basis() -> &'static SpectralBasis {
    static B: OnceLock<SpectralBasis> = OnceLock::new();
    B.get_or_init(|| build_laplacian_basis(grid(), 20).unwrap())
}

fn reference_ledger() -> &'static EnergyLedger {
    static L: OnceLock<EnergyLedger> = OnceLock::new();
    L.get_or_init(|| {
        let g = grid();
        let trace = BoundaryTrace::from_modes(
            g,
            vec![BoundaryMode {
                amplitude: [0.4, -0.3],
                wavenumber: 0,
                phase: 0.0,
                envelope: Envelope::Constant,
            }],
        )
        .unwrap();
        let u0 = curl_of_stream(g, |x, y| (PI * x).sin().powi(2) * (PI * y).sin().powi(2));
        let mut b0 = VectorField::from_fn(g, |_, _| [0.4, -0.3]);
        b0.axpy(0.5, &u0);
        let cfg = SolverConfig::new(N, 5e-3, 0.1);
        run(
            &cfg,
            &Problem::unforced(trace),
            &u0,
            &b0,
            None,
            &RunOptions::default(),
        )
        .unwrap()
        .ledger
    })
}

fn scalar_dot(a: &ScalarField, b: &ScalarField) -> f64 {
    a.dot(b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn integration_by_parts(s in coeffs(9), v in coeffs(18)) {
        let g = grid();
        let f = ScalarField::from_fn(g, stream(&s[..4]));
        let mut w = zero_trace_field(g, &v);
        w.zero_normal_walls();
        let lhs = gradient(&f).dot(&w) + scalar_dot(&f, &divergence(&w));
        let scale = gradient(&f).norm_l2() * w.norm_l2() + 1e-300;
        prop_assert!(lhs.abs() <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn vector_laplacian_is_symmetric_negative(a in coeffs(18), b in coeffs(18)) {
        let g = grid();
        let z = WallValues::zero(&g);
        let (f, h) = (zero_trace_field(g, &a), zero_trace_field(g, &b));
        let lf = laplacian_vector(&f, &z);
        let lh = laplacian_vector(&h, &z);
        let scale = lf.norm_l2() * h.norm_l2() + 1e-300;
        prop_assert!((lf.dot(&h) - f.dot(&lh)).abs() <= 1e-12 * scale.max(1.0));
        prop_assert!(lf.dot(&f) <= 1e-12);
    }

    #[test]
    fn convection_is_skew(p in coeffs(4), c in coeffs(18)) {
        let g = grid();
        let a = curl_of_stream(g, stream(&p));
        let f = zero_trace_field(g, &c);
        let r = convect(&a, &f, &WallValues::zero(&g)).dot(&f);
        prop_assert!(r.abs() <= 1e-10 * (1.0 + a.norm_linf()) * f.norm_l2_sq().max(1.0));
    }

    #[test]
    fn projection_is_idempotent_and_contractive(c in coeffs(18), k in 0usize..=20) {
        let basis = laplace_basis();
        let f = zero_trace_field(grid(), &c);
        let p = basis.project(&f, k).unwrap().field;
        let pp = basis.project(&p, k).unwrap().field;
        prop_assert!(p.norm_l2() <= f.norm_l2() * (1.0 + 1e-12) + 1e-14);
        prop_assert!(pp.sub(&p).norm_l2() <= 1e-10 * (1.0 + p.norm_l2()));
    }

    #[test]
    fn harmonic_extension_is_linear(m1 in modes(), m2 in modes(), alpha in -2.0f64..2.0, beta in -2.0f64..2.0) {
        let g = grid();
        let scaled = |ms: &[BoundaryMode], s: f64| {
            ms.iter().map(|m| BoundaryMode { amplitude: [s * m.amplitude[0], s * m.amplitude[1]], ..*m }).collect::<Vec<_>>()
        };
        let mut both = scaled(&m1, alpha);
        both.extend(scaled(&m2, beta));
        let h1 = harmonic_extend(&BoundaryTrace::from_modes(g, m1).unwrap(), 0.0).unwrap();
        let h2 = harmonic_extend(&BoundaryTrace::from_modes(g, m2).unwrap(), 0.0).unwrap();
        let h = harmonic_extend(&BoundaryTrace::from_modes(g, both).unwrap(), 0.0).unwrap();
        let mut expect = h1.scaled(alpha);
        expect.axpy(beta, &h2);
        prop_assert!(h.sub(&expect).norm_linf() <= 1e-9 * (1.0 + expect.norm_linf()));
    }

    #[test]
    fn harmonic_extension_obeys_maximum_principle(ms in modes()) {
        let g = grid();
        let trace = BoundaryTrace::from_modes(g, ms).unwrap();
        let samples = trace.samples(0.0);
        let h = harmonic_extend(&trace, 0.0).unwrap();
        for (c, values) in [(0, &h.u), (1, &h.v)] {
            let lo = samples.iter().map(|s| s[c]).fold(f64::INFINITY, f64::min);
            let hi = samples.iter().map(|s| s[c]).fold(f64::NEG_INFINITY, f64::max);
            let slack = 1e-9 * (1.0 + hi.abs().max(lo.abs()));
            for &v in values.iter() {
                prop_assert!(v >= lo - slack && v <= hi + slack);
            }
        }
    }

    #[test]
    fn fractional_norm_is_monotone_in_s(h in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16..64)) {
        let h: Vec<[f64; 2]> = h.into_iter().map(|(a, b)| [a, b]).collect();
        let norms: Vec<f64> = SUPPORTED_EXPONENTS
            .iter()
            .map(|&s| hs_norm_sq_samples(&h, FractionalNormSpec::new(s)).unwrap())
            .collect();
        for w in norms.windows(2) {
            prop_assert!(w[0] <= w[1] * (1.0 + 1e-12));
        }
    }

    #[test]
    fn homogeneous_heat_lift_dissipates(c in coeffs(18), dt in 1e-3f64..5e-2) {
        let g = grid();
        let b0 = zero_trace_field(g, &c);
        let run = parabolic_lift(&b0, &BoundaryTrace::zero(g).unwrap(), dt, 8, CompatibilityPolicy::Reject).unwrap();
        for w in run.states.windows(2) {
            prop_assert!(w[1].norm_l2() <= w[0].norm_l2() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn magnetic_step_is_l2_stable(p in coeffs(4), c in coeffs(18), frac in 0.0f64..1.0, dt in 1e-3f64..2e-2) {
        let g = grid();
        let st = Stepper::new(SolverConfig::new(N, dt, 1.0), None).unwrap();
        // stretching by a frozen velocity is absorbed by diffusion while |∇u| ≤ 2π²
        let amp = frac * 0.45 / p.iter().map(|c| c.abs()).sum::<f64>().max(1e-12);
        let u = curl_of_stream(g, stream(&p)).scaled(amp);
        let b = zero_trace_field(g, &c);
        let (next, _) = st.b_step(&u, &b, &WallValues::zero(&g), None).unwrap();
        prop_assert!(next.norm_l2() <= b.norm_l2() * (1.0 + 1e-10));
    }

    #[test]
    fn homogeneous_step_dissipates_energy_and_keeps_div_free(p in coeffs(4), q in coeffs(4), amp in 0.1f64..5.0) {
        let g = grid();
        let cfg = SolverConfig::new(N, 5e-3, 1.0);
        let st = Stepper::new(cfg, None).unwrap();
        let mut s = SimState::zero(g);
        s.u = curl_of_stream(g, stream(&p)).scaled(amp);
        s.b = curl_of_stream(g, stream(&q)).scaled(amp);
        let problem = Problem::unforced(BoundaryTrace::zero(g).unwrap());
        let e0 = s.u.norm_l2_sq() + s.b.norm_l2_sq();
        let (next, _) = st.coupled_step(&s, &problem).unwrap();
        let e1 = next.u.norm_l2_sq() + next.b.norm_l2_sq();
        prop_assert!(e1 <= e0 * (1.0 + 1e-10));
        prop_assert!(divergence(&next.u).norm_l2() <= 1e-9 * (1.0 + next.u.norm_l2()));
    }

    #[test]
    fn normality_window_shrinks_with_eps(vals in prop::collection::vec(0.0f64..4.0, 8..40), e in 0.01f64..2.0) {
        let t: Vec<f64> = (0..vals.len()).map(|k| 0.25 * k as f64).collect();
        let wide = normality_check(&t, &vals, 2.0, e);
        let narrow = normality_check(&t, &vals, 2.0, 0.5 * e);
        prop_assert!(narrow <= wide);
    }

    #[test]
    fn gronwall_ingredients_are_non_decreasing(c in 0.0f64..5.0) {
        let gw = gronwall_weak(reference_ledger(), c);
        for w in gw.psi.windows(2) {
            prop_assert!(w[1] >= w[0]);
        }
        for w in gw.phi.windows(2) {
            prop_assert!(w[1] >= w[0]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn extending_the_basis_keeps_leading_eigenvalues(extra in 1usize..8) {
        let small = laplace_basis();
        let big = build_laplacian_basis(grid(), small.count() + extra).unwrap();
        for (a, b) in small.eigenvalues.iter().zip(&big.eigenvalues) {
            prop_assert!((a - b).abs() <= 1e-9 * a);
        }
    }
}
