use std::path::Path;

use crate::dynamics::SimState;
use crate::error::{MhdError, Result};
use crate::fastsolve::Projector;
use crate::grid::{Grid, VectorField, WallValues};
use crate::io::write_atomic;
use crate::lifting::{hs_norm_sq_samples, BoundaryTrace, FractionalNormSpec, Lifter};
use crate::ops::{divergence, gradient_energy, laplacian_vector};

macro_rules! ledger_row {
    ($($field:ident => $col:literal),* $(,)?) => {
        /// Norms of one recorded instant. Squared quantities carry a `_sq` suffix.
        #[derive(Debug, Clone, Copy, PartialEq, Default)]
        pub struct LedgerRow {
            $(pub $field: f64,)*
        }

        impl LedgerRow {
            pub const COLUMNS: &'static [&'static str] = &[$($col),*];

            pub fn values(&self) -> Vec<f64> {
                vec![$(self.$field),*]
            }

            pub fn get(&self, column: &str) -> Option<f64> {
                match column {
                    $($col => Some(self.$field),)*
                    _ => None,
                }
            }
        }
    };
}

ledger_row! {
    t => "t",
    u_sq => "u_L2_sq",
    grad_u_sq => "grad_u_L2_sq",
    su_sq => "Su_L2_sq",
    b_sq => "b_L2_sq",
    grad_b_sq => "grad_b_L2_sq",
    btilde_sq => "btilde_L2_sq",
    grad_btilde_sq => "grad_btilde_L2_sq",
    bhat_sq => "bhat_L2_sq",
    grad_bhat_sq => "grad_bhat_L2_sq",
    bhat_h1_sq => "bhat_H1_sq",
    lap_bhat_sq => "lap_bhat_L2_sq",
    u_l4 => "u_L4",
    b_l4 => "b_L4",
    u_linf => "u_Linf",
    b_linf => "b_Linf",
    h_l2_sq => "h_L2_Gamma_sq",
    h_half_sq => "h_H12_Gamma_sq",
    h_three_half_sq => "h_H32_Gamma_sq",
    dth_sq => "dth_Hm12_Gamma_sq",
    he_sq => "hE_L2_sq",
    grad_he_sq => "grad_hE_L2_sq",
    div_u => "div_u_Linf",
    div_b => "div_b_L2",
}

impl LedgerRow {
    /// `‖u‖² + ‖b‖²`.
    pub fn energy(&self) -> f64 {
        self.u_sq + self.b_sq
    }

    pub fn is_valid(&self) -> bool {
        self.values().iter().all(|v| v.is_finite() && *v >= 0.0)
    }
}

/// Time series of ledger rows with strictly increasing instants.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnergyLedger {
    pub rows: Vec<LedgerRow>,
}

impl EnergyLedger {
    pub fn push(&mut self, row: LedgerRow) -> Result<()> {
        if let Some(last) = self.rows.last() {
            if row.t.is_nan() || row.t <= last.t {
                return Err(MhdError::Inconsistent(format!(
                    "ledger time {} does not follow {}",
                    row.t, last.t
                )));
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }

    pub fn series(&self, f: impl Fn(&LedgerRow) -> f64) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        self.rows.iter().map(|r| r.get(name)).collect()
    }

    /// Concatenates a continuation run, dropping its first row if it repeats our last instant.
    pub fn extend(&mut self, other: EnergyLedger) -> Result<()> {
        for r in other.rows {
            if self.rows.last().is_some_and(|l| l.t == r.t) {
                continue;
            }
            self.push(r)?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(LedgerRow::COLUMNS)?;
        for r in &self.rows {
            w.write_record(r.values().iter().map(|v| format!("{v:e}")))?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| MhdError::Format(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| MhdError::Format(e.to_string()))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_csv_string()?.as_bytes())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path)?;
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
        if header != LedgerRow::COLUMNS {
            return Err(MhdError::Format(format!(
                "{}: unexpected ledger header",
                path.display()
            )));
        }
        let mut out = EnergyLedger::default();
        for (k, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let v: Vec<f64> = rec
                .iter()
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| MhdError::Format(format!("{} row {}: {e}", path.display(), k + 2)))?;
            let mut row = LedgerRow::default();
            row.set_all(&v);
            out.push(row)?;
        }
        Ok(out)
    }
}

impl LedgerRow {
    fn set_all(&mut self, v: &[f64]) {
        let mut it = v.iter().copied();
        let mut next = || it.next().unwrap_or(f64::NAN);
        macro_rules! fill {
            ($($f:ident),*) => { $(self.$f = next();)* };
        }
        fill!(
            t,
            u_sq,
            grad_u_sq,
            su_sq,
            b_sq,
            grad_b_sq,
            btilde_sq,
            grad_btilde_sq,
            bhat_sq,
            grad_bhat_sq,
            bhat_h1_sq,
            lap_bhat_sq,
            u_l4,
            b_l4,
            u_linf,
            b_linf,
            h_l2_sq,
            h_half_sq,
            h_three_half_sq,
            dth_sq,
            he_sq,
            grad_he_sq,
            div_u,
            div_b
        );
    }
}

/// Computes ledger rows, carrying the heat lift `h_p` along with the run.
pub struct Recorder {
    grid: Grid,
    lifter: Lifter,
    projector: Projector,
    hp: VectorField,
    hp_t: f64,
}

impl Recorder {
    /// `b0` seeds the heat lift at time `t0`.
    pub fn new(b0: &VectorField, t0: f64) -> Self {
        let grid = b0.grid;
        Self {
            grid,
            lifter: Lifter::new(grid),
            projector: Projector::new(grid),
            hp: b0.clone(),
            hp_t: t0,
        }
    }

    pub fn heat_lift(&self) -> &VectorField {
        &self.hp
    }

    pub fn record(&mut self, state: &SimState, trace: &BoundaryTrace) -> Result<LedgerRow> {
        let g = self.grid;
        g.ensure_same(&state.u.grid)?;
        let t = state.t;
        let h = trace.samples(t);
        let walls = trace.walls_from_samples(&h);
        if t > self.hp_t {
            self.hp = self.lifter.heat_step(&self.hp, t - self.hp_t, &walls);
            self.hp_t = t;
        }
        let zero = WallValues::zero(&g);
        let he = if walls.is_zero() {
            VectorField::zeros(g)
        } else {
            self.lifter.harmonic(&walls)?
        };
        let btilde = state.b.sub(&he);
        let bhat = state.b.sub(&self.hp);
        let mut lu = laplacian_vector(&state.u, &zero);
        lu.scale(-1.0);
        let (su, _) = self.projector.project(&lu);
        let bhat_sq = bhat.norm_l2_sq();
        let grad_bhat_sq = gradient_energy(&bhat, &zero);
        Ok(LedgerRow {
            t,
            u_sq: state.u.norm_l2_sq(),
            grad_u_sq: gradient_energy(&state.u, &zero),
            su_sq: su.norm_l2_sq(),
            b_sq: state.b.norm_l2_sq(),
            grad_b_sq: gradient_energy(&state.b, &walls),
            btilde_sq: btilde.norm_l2_sq(),
            grad_btilde_sq: gradient_energy(&btilde, &zero),
            bhat_sq,
            grad_bhat_sq,
            bhat_h1_sq: bhat_sq + grad_bhat_sq,
            lap_bhat_sq: laplacian_vector(&bhat, &zero).norm_l2_sq(),
            u_l4: state.u.norm_lp(4.0),
            b_l4: state.b.norm_lp(4.0),
            u_linf: state.u.norm_linf(),
            b_linf: state.b.norm_linf(),
            h_l2_sq: hs_norm_sq_samples(&h, FractionalNormSpec::new(0.0))?,
            h_half_sq: hs_norm_sq_samples(&h, FractionalNormSpec::new(0.5))?,
            h_three_half_sq: hs_norm_sq_samples(&h, FractionalNormSpec::new(1.5))?,
            dth_sq: hs_norm_sq_samples(&trace.time_derivative(t), FractionalNormSpec::new(-0.5))?,
            he_sq: he.norm_l2_sq(),
            grad_he_sq: gradient_energy(&he, &walls),
            div_u: divergence(&state.u).max_abs(),
            div_b: divergence(&state.b).norm_l2(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::ScalarField;
    use crate::spectral::build_stokes_basis;

    #[test]
    fn zero_state_gives_zero_row() {
        let g = Grid::square(8).unwrap();
        let mut rec = Recorder::new(&VectorField::zeros(g), 0.0);
        let row = rec
            .record(&SimState::zero(g), &BoundaryTrace::zero(g).unwrap())
            .unwrap();
        assert!(row.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn stokes_mode_row() {
        let g = Grid::square(12).unwrap();
        let basis = build_stokes_basis(g, 1).unwrap();
        let st = SimState {
            t: 0.0,
            u: basis.modes[0].clone(),
            b: VectorField::zeros(g),
            p: ScalarField::zeros(g),
        };
        let mut rec = Recorder::new(&st.b, 0.0);
        let row = rec.record(&st, &BoundaryTrace::zero(g).unwrap()).unwrap();
        let lam = basis.eigenvalues[0];
        assert!((row.u_sq - 1.0).abs() < 1e-8);
        assert!((row.grad_u_sq - lam).abs() < 1e-8 * lam);
        assert!((row.su_sq - lam * lam).abs() < 1e-6 * lam * lam);
    }

    #[test]
    fn constant_field_with_constant_trace_has_no_shift() {
        let g = Grid::square(8).unwrap();
        let tr = BoundaryTrace::from_fn(g, |_, _, _| [0.3, -0.2]).unwrap();
        let b = VectorField::from_fn(g, |_, _| [0.3, -0.2]);
        let st = SimState {
            t: 0.0,
            u: VectorField::zeros(g),
            b,
            p: ScalarField::zeros(g),
        };
        let mut rec = Recorder::new(&st.b, 0.0);
        let row = rec.record(&st, &tr).unwrap();
        assert!(row.grad_btilde_sq < 1e-20 && row.btilde_sq < 1e-20);
    }

    #[test]
    fn csv_round_trip() {
        let mut l = EnergyLedger::default();
        for k in 0..3 {
            l.push(LedgerRow {
                t: k as f64 * 0.1,
                u_sq: 1.0 / (k as f64 + 3.0),
                ..Default::default()
            })
            .unwrap();
        }
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("l.csv");
        l.write_csv(&p).unwrap();
        assert_eq!(EnergyLedger::read_csv(&p).unwrap(), l);
        let bad = LedgerRow {
            t: 0.1,
            ..Default::default()
        };
        assert!(l.push(bad).is_err());
    }
}
