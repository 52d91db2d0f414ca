//! Time-dependent boundary data on the square's perimeter.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::error::{MhdError, Result};
use crate::grid::{Grid, WallValues};

/// Perimeter of the unit square.
pub const PERIMETER: f64 = 4.0;

/// Time profile multiplying a boundary mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Envelope {
    Constant,
    /// `sin(2π·frequency·t + phase)`
    Sinusoidal {
        frequency: f64,
        phase: f64,
    },
    /// `1 - exp(-rate·t)`
    Ramp {
        rate: f64,
    },
}

impl Envelope {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Envelope::Constant => 1.0,
            Envelope::Sinusoidal { frequency, phase } => {
                (2.0 * std::f64::consts::PI * frequency * t + phase).sin()
            }
            Envelope::Ramp { rate } => 1.0 - (-rate * t).exp(),
        }
    }
}

/// `amplitude · cos(2πℓs/4 + phase) · envelope(t)` in arclength `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryMode {
    pub amplitude: [f64; 2],
    pub wavenumber: usize,
    pub phase: f64,
    pub envelope: Envelope,
}

impl BoundaryMode {
    pub fn eval(&self, s: f64, t: f64) -> [f64; 2] {
        let k = 2.0 * std::f64::consts::PI * self.wavenumber as f64 / PERIMETER;
        let w = (k * s + self.phase).cos() * self.envelope.eval(t);
        [self.amplitude[0] * w, self.amplitude[1] * w]
    }
}

pub type TraceFn = Arc<dyn Fn(f64, f64, f64) -> [f64; 2] + Send + Sync>;

#[derive(Clone)]
pub enum TraceSource {
    Modes(Vec<BoundaryMode>),
    /// Values at the boundary vertices at strictly increasing instants, linear in between.
    Sampled {
        times: Vec<f64>,
        values: Vec<Vec<[f64; 2]>>,
    },
    /// Trace of a function `f(x, y, t)`.
    Function(TraceFn),
}

impl fmt::Debug for TraceSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceSource::Modes(m) => f.debug_tuple("Modes").field(m).finish(),
            TraceSource::Sampled { times, .. } => f
                .debug_struct("Sampled")
                .field("instants", &times.len())
                .finish(),
            TraceSource::Function(_) => f.write_str("Function"),
        }
    }
}

/// Boundary data `h(x, t)` sampled at the `2(nx+ny)` boundary vertices.
///
/// Vertices run counter-clockwise from the corner `(0,0)`; vertex `k` sits at arclength
/// `k·dx`. Requires `dx == dy` so the samples are uniform in arclength.
#[derive(Debug, Clone)]
pub struct BoundaryTrace {
    pub grid: Grid,
    pub source: TraceSource,
}

impl BoundaryTrace {
    fn check_grid(grid: Grid) -> Result<()> {
        if grid.nx != grid.ny {
            return Err(MhdError::Trace(format!(
                "boundary sampling needs equal spacing, got {}x{}",
                grid.nx, grid.ny
            )));
        }
        Ok(())
    }

    pub fn zero(grid: Grid) -> Result<Self> {
        Self::from_modes(grid, Vec::new())
    }

    pub fn from_modes(grid: Grid, modes: Vec<BoundaryMode>) -> Result<Self> {
        Self::check_grid(grid)?;
        Ok(Self {
            grid,
            source: TraceSource::Modes(modes),
        })
    }

    pub fn from_fn(
        grid: Grid,
        f: impl Fn(f64, f64, f64) -> [f64; 2] + Send + Sync + 'static,
    ) -> Result<Self> {
        Self::check_grid(grid)?;
        Ok(Self {
            grid,
            source: TraceSource::Function(Arc::new(f)),
        })
    }

    pub fn from_samples(grid: Grid, times: Vec<f64>, values: Vec<Vec<[f64; 2]>>) -> Result<Self> {
        Self::check_grid(grid)?;
        let n = 2 * (grid.nx + grid.ny);
        if times.is_empty() || times.len() != values.len() {
            return Err(MhdError::Trace("need one sample vector per instant".into()));
        }
        if let Some(w) = times.windows(2).position(|w| w[1] <= w[0]) {
            return Err(MhdError::Trace(format!(
                "instant {} is not after instant {}",
                w + 1,
                w
            )));
        }
        if let Some(k) = values.iter().position(|v| v.len() != n) {
            return Err(MhdError::Trace(format!(
                "instant {k} has {} samples, expected {n}",
                values[k].len()
            )));
        }
        if values.iter().flatten().flatten().any(|x| !x.is_finite()) {
            return Err(MhdError::Trace("non-finite sample".into()));
        }
        Ok(Self {
            grid,
            source: TraceSource::Sampled { times, values },
        })
    }

    /// Reads `time, arclength, h1, h2` rows with a header line.
    pub fn from_csv(grid: Grid, path: &Path) -> Result<Self> {
        let rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)?;
        Self::from_csv_reader(grid, rdr)
    }

    pub fn from_csv_reader<R: std::io::Read>(grid: Grid, mut rdr: csv::Reader<R>) -> Result<Self> {
        Self::check_grid(grid)?;
        let n = 2 * (grid.nx + grid.ny);
        let mut times: Vec<f64> = Vec::new();
        let mut values: Vec<Vec<[f64; 2]>> = Vec::new();
        for (idx, rec) in rdr.records().enumerate() {
            let rec = rec?;
            // line number in the file, header on line 1
            let row = idx + 2;
            if rec.len() != 4 {
                return Err(MhdError::Trace(format!(
                    "row {row}: expected 4 columns, found {}",
                    rec.len()
                )));
            }
            let mut x = [0.0; 4];
            for (c, slot) in x.iter_mut().enumerate() {
                *slot = rec[c].parse().map_err(|_| {
                    MhdError::Trace(format!("row {row}: cannot parse `{}`", &rec[c]))
                })?;
            }
            let [t, s, h1, h2] = x;
            match times.last() {
                Some(&last) if t == last => {}
                Some(&last) if t < last => {
                    return Err(MhdError::Trace(format!(
                        "row {row}: time {t} is not sorted (previous {last})"
                    )));
                }
                _ => {
                    if let Some(v) = values.last() {
                        if v.len() != n {
                            return Err(MhdError::Trace(format!(
                                "row {row}: previous instant has {} samples, expected {n}",
                                v.len()
                            )));
                        }
                    }
                    times.push(t);
                    values.push(Vec::with_capacity(n));
                }
            }
            let v = values.last_mut().unwrap();
            let k = v.len();
            let expect = k as f64 * grid.dx;
            if k >= n || (s - expect).abs() > 1e-9 {
                return Err(MhdError::Trace(format!(
                    "row {row}: arclength {s} does not match boundary vertex {k} at {expect}"
                )));
            }
            v.push([h1, h2]);
        }
        Self::from_samples(grid, times, values)
    }

    pub fn n_samples(&self) -> usize {
        2 * (self.grid.nx + self.grid.ny)
    }

    pub fn arclength(&self, k: usize) -> f64 {
        k as f64 * self.grid.dx
    }

    /// Grid vertex `(i, j)` of boundary sample `k`.
    pub fn vertex(&self, k: usize) -> (usize, usize) {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        if k < nx {
            (k, 0)
        } else if k < nx + ny {
            (nx, k - nx)
        } else if k < 2 * nx + ny {
            (nx - (k - nx - ny), ny)
        } else {
            (0, ny - (k - 2 * nx - ny))
        }
    }

    /// Sample index of boundary vertex `(i, j)`.
    pub fn index_of(&self, i: usize, j: usize) -> usize {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        if j == 0 {
            i
        } else if i == nx {
            nx + j
        } else if j == ny {
            nx + ny + (nx - i)
        } else {
            (2 * nx + ny + (ny - j)) % self.n_samples()
        }
    }

    pub fn position(&self, k: usize) -> (f64, f64) {
        let (i, j) = self.vertex(k);
        (self.grid.xn(i), self.grid.yn(j))
    }

    pub fn is_zero(&self) -> bool {
        matches!(&self.source, TraceSource::Modes(m) if m.is_empty())
    }

    /// Last sampled instant, or infinity for synthesized traces.
    pub fn horizon(&self) -> f64 {
        match &self.source {
            TraceSource::Sampled { times, .. } => *times.last().unwrap(),
            _ => f64::INFINITY,
        }
    }

    pub fn samples(&self, t: f64) -> Vec<[f64; 2]> {
        let n = self.n_samples();
        match &self.source {
            TraceSource::Modes(modes) => (0..n)
                .map(|k| {
                    let s = self.arclength(k);
                    modes.iter().fold([0.0; 2], |acc, m| {
                        let v = m.eval(s, t);
                        [acc[0] + v[0], acc[1] + v[1]]
                    })
                })
                .collect(),
            TraceSource::Function(f) => (0..n)
                .map(|k| {
                    let (x, y) = self.position(k);
                    f(x, y, t)
                })
                .collect(),
            TraceSource::Sampled { times, values } => {
                let last = times.len() - 1;
                if t <= times[0] {
                    return values[0].clone();
                }
                if t >= times[last] {
                    return values[last].clone();
                }
                let hi = times.partition_point(|&x| x <= t);
                let lo = hi - 1;
                let w = (t - times[lo]) / (times[hi] - times[lo]);
                values[lo]
                    .iter()
                    .zip(&values[hi])
                    .map(|(a, b)| [a[0] + w * (b[0] - a[0]), a[1] + w * (b[1] - a[1])])
                    .collect()
            }
        }
    }

    /// `∂ₜh` by centred differences; one-sided at the ends of a sampled record.
    pub fn time_derivative(&self, t: f64) -> Vec<[f64; 2]> {
        let (t0, t1) = match &self.source {
            TraceSource::Sampled { times, .. } => {
                if times.len() == 1 {
                    return vec![[0.0; 2]; self.n_samples()];
                }
                let hi = times.partition_point(|&x| x <= t).clamp(1, times.len() - 1);
                let lo = hi - 1;
                // at a sample instant with neighbours on both sides use both
                if times[lo] == t && lo > 0 {
                    (times[lo - 1], times[hi])
                } else {
                    (times[lo], times[hi])
                }
            }
            _ => {
                let d = 1e-6 * t.abs().max(1.0);
                (t - d, t + d)
            }
        };
        let a = self.samples(t0);
        let b = self.samples(t1);
        let inv = 1.0 / (t1 - t0);
        a.iter()
            .zip(&b)
            .map(|(x, y)| [(y[0] - x[0]) * inv, (y[1] - x[1]) * inv])
            .collect()
    }

    /// Dirichlet data at the positions the MAC stencils use: vertex samples for tangential
    /// components, averages of adjacent vertex samples at wall-face midpoints for normal ones.
    pub fn walls_from_samples(&self, h: &[[f64; 2]]) -> WallValues {
        let g = self.grid;
        let at = |i: usize, j: usize| h[self.index_of(i, j)];
        let mut w = WallValues::zero(&g);
        for j in 0..g.ny {
            w.u_left[j] = 0.5 * (at(0, j)[0] + at(0, j + 1)[0]);
            w.u_right[j] = 0.5 * (at(g.nx, j)[0] + at(g.nx, j + 1)[0]);
        }
        for i in 0..=g.nx {
            w.u_bottom[i] = at(i, 0)[0];
            w.u_top[i] = at(i, g.ny)[0];
        }
        for i in 0..g.nx {
            w.v_bottom[i] = 0.5 * (at(i, 0)[1] + at(i + 1, 0)[1]);
            w.v_top[i] = 0.5 * (at(i, g.ny)[1] + at(i + 1, g.ny)[1]);
        }
        for j in 0..=g.ny {
            w.v_left[j] = at(0, j)[1];
            w.v_right[j] = at(g.nx, j)[1];
        }
        w
    }

    pub fn walls(&self, t: f64) -> WallValues {
        self.walls_from_samples(&self.samples(t))
    }

    /// Trapezoid `‖h(·,t)‖_{L²(Γ)}`.
    pub fn l2_norm(&self, t: f64) -> f64 {
        l2_gamma(&self.samples(t), self.grid.dx)
    }
}

pub(crate) fn l2_gamma(h: &[[f64; 2]], ds: f64) -> f64 {
    (h.iter().map(|v| v[0] * v[0] + v[1] * v[1]).sum::<f64>() * ds).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vertex_walk_is_counter_clockwise_and_closed() {
        let g = Grid::square(4).unwrap();
        let tr = BoundaryTrace::zero(g).unwrap();
        assert_eq!(tr.n_samples(), 16);
        assert_eq!(tr.vertex(0), (0, 0));
        assert_eq!(tr.vertex(4), (4, 0));
        assert_eq!(tr.vertex(8), (4, 4));
        assert_eq!(tr.vertex(12), (0, 4));
        assert_eq!(tr.vertex(15), (0, 1));
        for k in 0..16 {
            let (i, j) = tr.vertex(k);
            assert_eq!(tr.index_of(i, j), k);
        }
    }

    #[test]
    fn rejects_unequal_spacing() {
        assert!(BoundaryTrace::zero(Grid::new(4, 8).unwrap()).is_err());
    }

    #[test]
    fn csv_unsorted_time_names_row() {
        let g = Grid::square(4).unwrap();
        let mut text = String::from("time,arclength,h1,h2\n");
        for t in [0.0, 1.0, 0.5] {
            for k in 0..16 {
                text += &format!("{t},{},0,0\n", k as f64 * 0.25);
            }
        }
        let rdr = csv::Reader::from_reader(text.as_bytes());
        let err = BoundaryTrace::from_csv_reader(g, rdr)
            .unwrap_err()
            .to_string();
        assert!(err.contains("row 34"), "{err}");
    }

    #[test]
    fn sampled_trace_interpolates_linearly() {
        let g = Grid::square(4).unwrap();
        let v0 = vec![[0.0, 1.0]; 16];
        let v1 = vec![[2.0, 1.0]; 16];
        let tr = BoundaryTrace::from_samples(g, vec![0.0, 1.0], vec![v0, v1]).unwrap();
        assert_eq!(tr.samples(0.25)[3], [0.5, 1.0]);
        assert_eq!(tr.time_derivative(0.5)[0], [2.0, 0.0]);
    }

    #[test]
    fn walls_of_linear_field_are_exact() {
        let g = Grid::square(8).unwrap();
        let f = |x: f64, y: f64| [1.0 + x - 2.0 * y, 3.0 * x * 1.0 + y];
        let tr = BoundaryTrace::from_fn(g, move |x, y, _| f(x, y)).unwrap();
        let w = tr.walls(0.0);
        let exact = WallValues::from_fn(&g, f);
        for (a, b) in [
            (&w.u_left, &exact.u_left),
            (&w.v_top, &exact.v_top),
            (&w.u_bottom, &exact.u_bottom),
        ] {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-14);
            }
        }
    }
}
