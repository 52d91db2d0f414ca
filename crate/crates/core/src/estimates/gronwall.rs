use super::ledger::{EnergyLedger, LedgerRow};
use crate::lifting::{cumulative_trapezoid, trapezoid};

/// Interpolation exponent of Ladyzhenskaya's inequality in two dimensions.
pub const THETA: f64 = 0.5;
/// Time integrability of `u` in the weak formulation.
pub const Q: f64 = 2.0;
/// Power of `‖h‖_{H^{1/2}(Γ)}` multiplying the energy in the weak estimate.
pub const Q_N: i32 = 4;

/// Centred differences inside, one-sided at the ends.
pub fn time_derivative(t: &[f64], f: &[f64]) -> Vec<f64> {
    let n = t.len();
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|k| {
            let (a, b) = match k {
                0 => (0, 1),
                k if k == n - 1 => (n - 2, n - 1),
                k => (k - 1, k + 1),
            };
            (f[b] - f[a]) / (t[b] - t[a])
        })
        .collect()
}

fn weak_energy(r: &LedgerRow) -> f64 {
    r.u_sq + r.btilde_sq
}

fn h4(r: &LedgerRow) -> f64 {
    r.h_half_sq.powi(Q_N / 2)
}

/// Boundary data entering the weak estimate additively.
fn weak_data(r: &LedgerRow) -> f64 {
    r.h_half_sq + r.dth_sq + h4(r)
}

/// Per-instant margin `LHS − RHS` of the differential weak energy inequality
/// `d/dt(‖u‖²+‖b̃‖²) + ‖∇u‖² + ‖∇b̃‖² ≤ c‖h‖⁴(‖u‖²+‖b̃‖²) + c(‖h‖² + ‖∂ₜh‖²_{-1/2} + ‖h‖⁴)`.
pub fn weak_energy_residual(ledger: &EnergyLedger, c: f64) -> Vec<f64> {
    let t = ledger.times();
    let e = ledger.series(weak_energy);
    let de = time_derivative(&t, &e);
    ledger
        .rows
        .iter()
        .zip(&de)
        .map(|(r, d)| {
            let lhs = d + r.grad_u_sq + r.grad_btilde_sq;
            lhs - c * (h4(r) * weak_energy(r) + weak_data(r))
        })
        .collect()
}

/// Smallest `c` making every weak-energy margin non-positive where the data is nonzero.
pub fn calibrate_weak_energy(ledger: &EnergyLedger) -> f64 {
    let t = ledger.times();
    let de = time_derivative(&t, &ledger.series(weak_energy));
    ledger
        .rows
        .iter()
        .zip(&de)
        .filter_map(|(r, d)| {
            let lhs = d + r.grad_u_sq + r.grad_btilde_sq;
            let a = h4(r) * weak_energy(r) + weak_data(r);
            (a > 1e-300).then(|| lhs / a)
        })
        .fold(0.0, f64::max)
}

/// Both sides of the integrated weak bound at every recorded instant.
#[derive(Debug, Clone, PartialEq)]
pub struct GronwallWeak {
    pub constant: f64,
    pub times: Vec<f64>,
    pub psi: Vec<f64>,
    pub phi: Vec<f64>,
    /// `‖u‖² + ‖b̃‖² + ∫(‖∇u‖² + ‖∇b̃‖²)`.
    pub lhs: Vec<f64>,
    /// `(e^φ φ + 1) ψ`.
    pub bound: Vec<f64>,
    /// Continuation constant of the final instant.
    pub m_t: f64,
}

impl GronwallWeak {
    pub fn margin(&self) -> f64 {
        self.lhs
            .iter()
            .zip(&self.bound)
            .map(|(l, b)| l - b)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Holds at every instant up to rounding of the sums involved.
    pub fn holds(&self) -> bool {
        self.lhs
            .iter()
            .zip(&self.bound)
            .all(|(l, b)| *l <= b * (1.0 + 1e-12) + 1e-300)
    }
}

pub fn gronwall_weak(ledger: &EnergyLedger, c: f64) -> GronwallWeak {
    let t = ledger.times();
    let Some(first) = ledger.rows.first() else {
        return GronwallWeak {
            constant: c,
            times: vec![],
            psi: vec![],
            phi: vec![],
            lhs: vec![],
            bound: vec![],
            m_t: 0.0,
        };
    };
    let e0 = weak_energy(first);
    let data = cumulative_trapezoid(&t, &ledger.series(weak_data));
    let h4_int = cumulative_trapezoid(&t, &ledger.series(h4));
    let diss = cumulative_trapezoid(&t, &ledger.series(|r| r.grad_u_sq + r.grad_btilde_sq));
    let psi: Vec<f64> = data.iter().map(|d| e0 + c * d).collect();
    let phi: Vec<f64> = h4_int.iter().map(|d| c * d).collect();
    let bound: Vec<f64> = psi
        .iter()
        .zip(&phi)
        .map(|(p, f)| (f.exp() * f + 1.0) * p)
        .collect();
    let lhs = ledger
        .rows
        .iter()
        .zip(&diss)
        .map(|(r, d)| weak_energy(r) + d)
        .collect();
    let extra = trapezoid(&t, &ledger.series(|r| r.h_half_sq))
        + trapezoid(&t, &ledger.series(|r| r.dth_sq));
    let m_t = bound.last().copied().unwrap_or(0.0) + c * extra;
    GronwallWeak {
        constant: c,
        times: t,
        psi,
        phi,
        lhs,
        bound,
        m_t,
    }
}

/// Bisection for the smallest `c` under which the integrated bound holds, or zero if
/// it already holds with `c = 0`.
pub fn calibrate_gronwall(ledger: &EnergyLedger) -> f64 {
    minimal_constant(|c| gronwall_weak(ledger, c).margin())
}

/// Smallest `c ≥ 0` with `margin(c) ≤ 0` for a margin non-increasing in `c`.
pub(crate) fn minimal_constant(margin: impl Fn(f64) -> f64) -> f64 {
    if margin(0.0) <= 0.0 {
        return 0.0;
    }
    let mut hi = 1e-6;
    while margin(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e12 {
            return f64::INFINITY;
        }
    }
    let mut lo = 0.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if margin(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// The `H¹` energy inequality of strong solutions and its Gronwall bound.
#[derive(Debug, Clone, PartialEq)]
pub struct StrongEnergy {
    pub constant: f64,
    pub times: Vec<f64>,
    /// `K = c(‖u‖²+‖b‖²)(‖∇u‖²+‖∇b̂‖²)`.
    pub k: Vec<f64>,
    /// `exp ∫K`.
    pub phi: Vec<f64>,
    pub omega: Vec<f64>,
    /// Differential margins `LHS − RHS`.
    pub margins: Vec<f64>,
    /// `‖∇u‖² + ‖∇b̂‖² + ∫(‖Su‖² + ‖Δb̂‖²)`.
    pub lhs: Vec<f64>,
    /// `φ e^φ ω + ω`.
    pub bound: Vec<f64>,
}

impl StrongEnergy {
    pub fn margin(&self) -> f64 {
        self.lhs
            .iter()
            .zip(&self.bound)
            .map(|(l, b)| l - b)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn holds(&self) -> bool {
        self.lhs
            .iter()
            .zip(&self.bound)
            .all(|(l, b)| *l <= b * (1.0 + 1e-12) + 1e-300)
    }
}

fn h1_energy(r: &LedgerRow) -> f64 {
    r.grad_u_sq + r.grad_bhat_sq
}

fn strong_data(r: &LedgerRow) -> f64 {
    r.energy() * h4(r) + r.h_three_half_sq
}

pub fn strong_energy(ledger: &EnergyLedger, c: f64) -> StrongEnergy {
    let t = ledger.times();
    let h1 = ledger.series(h1_energy);
    let dh1 = time_derivative(&t, &h1);
    let k: Vec<f64> = ledger
        .rows
        .iter()
        .map(|r| c * r.energy() * h1_energy(r))
        .collect();
    let margins = ledger
        .rows
        .iter()
        .zip(&dh1)
        .zip(&k)
        .map(|((r, d), kk)| d + r.su_sq + r.lap_bhat_sq - kk * h1_energy(r) - c * strong_data(r))
        .collect();
    let phi: Vec<f64> = cumulative_trapezoid(&t, &k)
        .iter()
        .map(|x| x.exp())
        .collect();
    let h0 = h1.first().copied().unwrap_or(0.0);
    let omega: Vec<f64> = cumulative_trapezoid(&t, &ledger.series(strong_data))
        .iter()
        .map(|d| h0 + c * d)
        .collect();
    let bound = phi
        .iter()
        .zip(&omega)
        .map(|(p, w)| p * p.exp() * w + w)
        .collect();
    let diss = cumulative_trapezoid(&t, &ledger.series(|r| r.su_sq + r.lap_bhat_sq));
    let lhs = h1.iter().zip(&diss).map(|(a, b)| a + b).collect();
    StrongEnergy {
        constant: c,
        times: t,
        k,
        phi,
        omega,
        margins,
        lhs,
        bound,
    }
}

pub fn calibrate_strong(ledger: &EnergyLedger) -> f64 {
    minimal_constant(|c| strong_energy(ledger, c).margin())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ledger(n: usize, f: impl Fn(f64) -> LedgerRow) -> EnergyLedger {
        let mut l = EnergyLedger::default();
        for k in 0..n {
            let mut r = f(k as f64 * 0.01);
            r.t = k as f64 * 0.01;
            l.push(r).unwrap();
        }
        l
    }

    #[test]
    fn exponents_are_the_planar_ones() {
        assert_eq!((THETA, Q, Q_N), (0.5, 2.0, 4));
    }

    #[test]
    fn constant_boundary_norm_gives_linear_phi() {
        let l = ledger(101, |_| LedgerRow {
            h_half_sq: 0.3,
            ..Default::default()
        });
        let g = gronwall_weak(&l, 2.0);
        for (t, p) in g.times.iter().zip(&g.phi) {
            assert!((p - 2.0 * 0.09 * t).abs() < 1e-10);
        }
        assert_eq!(g.phi[0], 0.0);
        assert!(g.psi.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn homogeneous_decay_needs_no_constant() {
        let l = ledger(50, |t| {
            let e = (-2.0 * t).exp();
            LedgerRow {
                u_sq: e,
                btilde_sq: e,
                b_sq: e,
                grad_u_sq: e,
                grad_btilde_sq: e,
                ..Default::default()
            }
        });
        assert_eq!(calibrate_gronwall(&l), 0.0);
        assert!(gronwall_weak(&l, 0.0).holds());
        assert!(weak_energy_residual(&l, 0.0).iter().all(|m| *m < 0.0));
    }

    #[test]
    fn scaling_fields_scales_margins() {
        let base = |s: f64| {
            ledger(20, move |t| LedgerRow {
                u_sq: s * (1.0 - t),
                btilde_sq: s * 0.5,
                grad_u_sq: s * 2.0,
                grad_btilde_sq: s,
                ..Default::default()
            })
        };
        let a = weak_energy_residual(&base(1.0), 1.0);
        let b = weak_energy_residual(&base(4.0), 1.0);
        for (x, y) in a.iter().zip(&b) {
            assert!((4.0 * x - y).abs() < 1e-12 && x.signum() == y.signum());
        }
    }

    #[test]
    fn strong_k_vanishes_only_on_zero_state() {
        let l = ledger(5, |t| LedgerRow {
            u_sq: t,
            grad_u_sq: t,
            ..Default::default()
        });
        let s = strong_energy(&l, 1.0);
        assert_eq!(s.k[0], 0.0);
        assert!(s.k[1..].iter().all(|k| *k > 0.0));
        let z = strong_energy(&ledger(5, |_| LedgerRow::default()), 1.0);
        assert!(z.margins.iter().all(|m| *m <= 0.0));
    }

    #[test]
    fn minimal_constant_bisects() {
        let c = minimal_constant(|c| 3.0 - c);
        assert!((c - 3.0).abs() < 1e-9);
    }
}
