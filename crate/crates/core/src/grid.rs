//! Staggered (MAC) discretization of the unit square.
//!
//! Layout for an `nx × ny` grid with spacing `dx = 1/nx`, `dy = 1/ny`:
//! - scalars live at cell centres `((i+½)dx, (j+½)dy)`, `nx·ny` values;
//! - the x-component of a vector field lives on vertical faces `(i·dx, (j+½)dy)`,
//!   `(nx+1)·ny` values, faces `i = 0` and `i = nx` lying on the walls;
//! - the y-component lives on horizontal faces `((i+½)dx, j·dy)`, `nx·(ny+1)` values.
//!
//! All storage is column-major with the x index running fastest.

use crate::error::{MhdError, Result};

/// Uniform cell-centred grid on `[0,1]²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
}

impl Grid {
    pub fn new(nx: usize, ny: usize) -> Result<Self> {
        if nx < 4 || ny < 4 {
            return Err(MhdError::InvalidGrid { nx, ny });
        }
        Ok(Self {
            nx,
            ny,
            dx: 1.0 / nx as f64,
            dy: 1.0 / ny as f64,
        })
    }

    /// Square grid, the common case.
    pub fn square(n: usize) -> Result<Self> {
        Self::new(n, n)
    }

    #[inline]
    pub fn cell_area(&self) -> f64 {
        self.dx * self.dy
    }

    #[inline]
    pub fn n_cells(&self) -> usize {
        self.nx * self.ny
    }

    /// Number of x-component faces, `(nx+1)·ny`.
    #[inline]
    pub fn n_ufaces(&self) -> usize {
        (self.nx + 1) * self.ny
    }

    /// Number of y-component faces, `nx·(ny+1)`.
    #[inline]
    pub fn n_vfaces(&self) -> usize {
        self.nx * (self.ny + 1)
    }

    #[inline]
    pub fn xc(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dx
    }

    #[inline]
    pub fn yc(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dy
    }

    #[inline]
    pub fn xn(&self, i: usize) -> f64 {
        i as f64 * self.dx
    }

    #[inline]
    pub fn yn(&self, j: usize) -> f64 {
        j as f64 * self.dy
    }

    #[inline]
    pub fn cell(&self, i: usize, j: usize) -> usize {
        i + self.nx * j
    }

    #[inline]
    pub fn uface(&self, i: usize, j: usize) -> usize {
        i + (self.nx + 1) * j
    }

    #[inline]
    pub fn vface(&self, i: usize, j: usize) -> usize {
        i + self.nx * j
    }

    pub fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self.nx != other.nx || self.ny != other.ny {
            return Err(MhdError::GridMismatch {
                expected: (self.nx, self.ny),
                found: (other.nx, other.ny),
            });
        }
        Ok(())
    }
}

/// Cell-centred scalar field.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: Grid,
    pub data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            data: vec![0.0; grid.n_cells()],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut s = Self::zeros(grid);
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                s.data[grid.cell(i, j)] = f(grid.xc(i), grid.yc(j));
            }
        }
        s
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[self.grid.cell(i, j)]
    }

    pub fn dot(&self, other: &ScalarField) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            * self.grid.cell_area()
    }

    pub fn norm_l2(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn remove_mean(&mut self) {
        let m = self.mean();
        self.data.iter_mut().for_each(|v| *v -= m);
    }

    pub fn scale(&mut self, a: f64) {
        self.data.iter_mut().for_each(|v| *v *= a);
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Dirichlet closure for a cell-centred scalar: values at the edge midpoints of each wall.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarWalls {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    pub bottom: Vec<f64>,
    pub top: Vec<f64>,
}

impl ScalarWalls {
    pub fn zero(grid: &Grid) -> Self {
        Self {
            left: vec![0.0; grid.ny],
            right: vec![0.0; grid.ny],
            bottom: vec![0.0; grid.nx],
            top: vec![0.0; grid.nx],
        }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        Self {
            left: (0..grid.ny).map(|j| f(0.0, grid.yc(j))).collect(),
            right: (0..grid.ny).map(|j| f(1.0, grid.yc(j))).collect(),
            bottom: (0..grid.nx).map(|i| f(grid.xc(i), 0.0)).collect(),
            top: (0..grid.nx).map(|i| f(grid.xc(i), 1.0)).collect(),
        }
    }
}

/// Face-centred vector field on the MAC layout.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub grid: Grid,
    /// x-component, `(nx+1)·ny` values on vertical faces.
    pub u: Vec<f64>,
    /// y-component, `nx·(ny+1)` values on horizontal faces.
    pub v: Vec<f64>,
}

impl VectorField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            u: vec![0.0; grid.n_ufaces()],
            v: vec![0.0; grid.n_vfaces()],
        }
    }

    /// Samples `f(x, y) = [f1, f2]` at the face positions of each component.
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> [f64; 2]) -> Self {
        let mut out = Self::zeros(grid);
        for j in 0..grid.ny {
            for i in 0..=grid.nx {
                out.u[grid.uface(i, j)] = f(grid.xn(i), grid.yc(j))[0];
            }
        }
        for j in 0..=grid.ny {
            for i in 0..grid.nx {
                out.v[grid.vface(i, j)] = f(grid.xc(i), grid.yn(j))[1];
            }
        }
        out
    }

    #[inline]
    pub fn u_at(&self, i: usize, j: usize) -> f64 {
        self.u[self.grid.uface(i, j)]
    }

    #[inline]
    pub fn v_at(&self, i: usize, j: usize) -> f64 {
        self.v[self.grid.vface(i, j)]
    }

    /// Trapezoid weight of a face: wall faces carry half a cell.
    #[inline]
    fn u_weight(&self, i: usize) -> f64 {
        if i == 0 || i == self.grid.nx {
            0.5
        } else {
            1.0
        }
    }

    #[inline]
    fn v_weight(&self, j: usize) -> f64 {
        if j == 0 || j == self.grid.ny {
            0.5
        } else {
            1.0
        }
    }

    /// Discrete L² inner product.
    pub fn dot(&self, other: &VectorField) -> f64 {
        let g = &self.grid;
        let mut s = 0.0;
        for j in 0..g.ny {
            for i in 0..=g.nx {
                let k = g.uface(i, j);
                s += self.u_weight(i) * self.u[k] * other.u[k];
            }
        }
        for j in 0..=g.ny {
            let w = self.v_weight(j);
            for i in 0..g.nx {
                let k = g.vface(i, j);
                s += w * self.v[k] * other.v[k];
            }
        }
        s * g.cell_area()
    }

    pub fn norm_l2_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm_l2(&self) -> f64 {
        self.norm_l2_sq().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.u
            .iter()
            .chain(&self.v)
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scale(&mut self, a: f64) {
        self.u
            .iter_mut()
            .chain(self.v.iter_mut())
            .for_each(|v| *v *= a);
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    /// `self += a · other`
    pub fn axpy(&mut self, a: f64, other: &VectorField) {
        for (x, y) in self.u.iter_mut().zip(&other.u) {
            *x += a * y;
        }
        for (x, y) in self.v.iter_mut().zip(&other.v) {
            *x += a * y;
        }
    }

    pub fn sub(&self, other: &VectorField) -> Self {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    pub fn add(&self, other: &VectorField) -> Self {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(&self.v).all(|v| v.is_finite())
    }

    /// Sets the wall-normal faces to zero.
    pub fn zero_normal_walls(&mut self) {
        let g = self.grid;
        for j in 0..g.ny {
            self.u[g.uface(0, j)] = 0.0;
            self.u[g.uface(g.nx, j)] = 0.0;
        }
        for i in 0..g.nx {
            self.v[g.vface(i, 0)] = 0.0;
            self.v[g.vface(i, g.ny)] = 0.0;
        }
    }

    /// Number of interior (non-wall) degrees of freedom.
    pub fn interior_len(grid: &Grid) -> usize {
        (grid.nx - 1) * grid.ny + grid.nx * (grid.ny - 1)
    }

    /// Packs interior faces: x-component faces `i=1..nx-1` then y-component faces `j=1..ny-1`.
    pub fn pack_interior(&self, out: &mut [f64]) {
        let g = &self.grid;
        let mut k = 0;
        for j in 0..g.ny {
            for i in 1..g.nx {
                out[k] = self.u[g.uface(i, j)];
                k += 1;
            }
        }
        for j in 1..g.ny {
            for i in 0..g.nx {
                out[k] = self.v[g.vface(i, j)];
                k += 1;
            }
        }
    }

    /// Inverse of [`pack_interior`](Self::pack_interior); wall faces are left untouched.
    pub fn unpack_interior(&mut self, data: &[f64]) {
        let g = self.grid;
        let mut k = 0;
        for j in 0..g.ny {
            for i in 1..g.nx {
                self.u[g.uface(i, j)] = data[k];
                k += 1;
            }
        }
        for j in 1..g.ny {
            for i in 0..g.nx {
                self.v[g.vface(i, j)] = data[k];
                k += 1;
            }
        }
    }

    /// Cell-centred averages of both components.
    pub fn at_centers(&self) -> (ScalarField, ScalarField) {
        let g = self.grid;
        let mut a = ScalarField::zeros(g);
        let mut b = ScalarField::zeros(g);
        for j in 0..g.ny {
            for i in 0..g.nx {
                let c = g.cell(i, j);
                a.data[c] = 0.5 * (self.u_at(i, j) + self.u_at(i + 1, j));
                b.data[c] = 0.5 * (self.v_at(i, j) + self.v_at(i, j + 1));
            }
        }
        (a, b)
    }

    /// ‖·‖_{L^p} of the pointwise magnitude, evaluated at cell centres.
    pub fn norm_lp(&self, p: f64) -> f64 {
        let (a, b) = self.at_centers();
        let s: f64 = a
            .data
            .iter()
            .zip(&b.data)
            .map(|(x, y)| (x * x + y * y).sqrt().powf(p))
            .sum();
        (s * self.grid.cell_area()).powf(1.0 / p)
    }

    /// Max of the pointwise magnitude at cell centres.
    pub fn norm_linf(&self) -> f64 {
        let (a, b) = self.at_centers();
        a.data
            .iter()
            .zip(&b.data)
            .fold(0.0, |m, (x, y)| m.max((x * x + y * y).sqrt()))
    }
}

/// Boundary values of a vector field at the positions the MAC stencils need.
///
/// Normal components sit at the wall faces (edge midpoints), tangential components at the
/// grid vertices on each wall, corners included.
#[derive(Debug, Clone, PartialEq)]
pub struct WallValues {
    /// x-component on `x = 0`, `ny` values at `(0, (j+½)dy)`.
    pub u_left: Vec<f64>,
    pub u_right: Vec<f64>,
    /// x-component on `y = 0`, `nx+1` values at `(i·dx, 0)`.
    pub u_bottom: Vec<f64>,
    pub u_top: Vec<f64>,
    /// y-component on `y = 0`, `nx` values at `((i+½)dx, 0)`.
    pub v_bottom: Vec<f64>,
    pub v_top: Vec<f64>,
    /// y-component on `x = 0`, `ny+1` values at `(0, j·dy)`.
    pub v_left: Vec<f64>,
    pub v_right: Vec<f64>,
}

impl WallValues {
    pub fn zero(grid: &Grid) -> Self {
        Self {
            u_left: vec![0.0; grid.ny],
            u_right: vec![0.0; grid.ny],
            u_bottom: vec![0.0; grid.nx + 1],
            u_top: vec![0.0; grid.nx + 1],
            v_bottom: vec![0.0; grid.nx],
            v_top: vec![0.0; grid.nx],
            v_left: vec![0.0; grid.ny + 1],
            v_right: vec![0.0; grid.ny + 1],
        }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64) -> [f64; 2]) -> Self {
        Self {
            u_left: (0..grid.ny).map(|j| f(0.0, grid.yc(j))[0]).collect(),
            u_right: (0..grid.ny).map(|j| f(1.0, grid.yc(j))[0]).collect(),
            u_bottom: (0..=grid.nx).map(|i| f(grid.xn(i), 0.0)[0]).collect(),
            u_top: (0..=grid.nx).map(|i| f(grid.xn(i), 1.0)[0]).collect(),
            v_bottom: (0..grid.nx).map(|i| f(grid.xc(i), 0.0)[1]).collect(),
            v_top: (0..grid.nx).map(|i| f(grid.xc(i), 1.0)[1]).collect(),
            v_left: (0..=grid.ny).map(|j| f(0.0, grid.yn(j))[1]).collect(),
            v_right: (0..=grid.ny).map(|j| f(1.0, grid.yn(j))[1]).collect(),
        }
    }

    /// Writes the normal components into the wall faces of `field`.
    pub fn impose_normal(&self, field: &mut VectorField) {
        let g = field.grid;
        for j in 0..g.ny {
            field.u[g.uface(0, j)] = self.u_left[j];
            field.u[g.uface(g.nx, j)] = self.u_right[j];
        }
        for i in 0..g.nx {
            field.v[g.vface(i, 0)] = self.v_bottom[i];
            field.v[g.vface(i, g.ny)] = self.v_top[i];
        }
    }

    pub fn scale(&mut self, a: f64) {
        for w in self.all_mut() {
            w.iter_mut().for_each(|x| *x *= a);
        }
    }

    /// `self += a · other`
    pub fn axpy(&mut self, a: f64, other: &WallValues) {
        for (w, o) in self.all_mut().into_iter().zip(other.all()) {
            w.iter_mut().zip(o).for_each(|(x, y)| *x += a * y);
        }
    }

    fn all(&self) -> [&Vec<f64>; 8] {
        [
            &self.u_left,
            &self.u_right,
            &self.u_bottom,
            &self.u_top,
            &self.v_bottom,
            &self.v_top,
            &self.v_left,
            &self.v_right,
        ]
    }

    fn all_mut(&mut self) -> [&mut Vec<f64>; 8] {
        [
            &mut self.u_left,
            &mut self.u_right,
            &mut self.u_bottom,
            &mut self.u_top,
            &mut self.v_bottom,
            &mut self.v_top,
            &mut self.v_left,
            &mut self.v_right,
        ]
    }

    pub fn is_zero(&self) -> bool {
        self.all().iter().all(|w| w.iter().all(|x| *x == 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rejects_tiny_axes() {
        assert!(Grid::new(3, 8).is_err());
        let g = Grid::new(8, 4).unwrap();
        assert_eq!(g.dx * g.nx as f64, 1.0);
        assert_eq!(g.dy * g.ny as f64, 1.0);
    }

    #[test]
    fn face_counts_match_mac_layout() {
        let g = Grid::new(5, 7).unwrap();
        let f = VectorField::zeros(g);
        assert_eq!(f.u.len(), 6 * 7);
        assert_eq!(f.v.len(), 5 * 8);
        assert_eq!(ScalarField::zeros(g).data.len(), 35);
    }

    #[test]
    fn pack_unpack_interior_is_inverse() {
        let g = Grid::square(6).unwrap();
        let f = VectorField::from_fn(g, |x, y| [x * y + 1.0, x - y]);
        let mut buf = vec![0.0; VectorField::interior_len(&g)];
        f.pack_interior(&mut buf);
        let mut h = f.clone();
        h.unpack_interior(&vec![0.0; buf.len()]);
        h.unpack_interior(&buf);
        assert_eq!(f, h);
    }

    #[test]
    fn l2_of_constant_is_exact() {
        let g = Grid::square(8).unwrap();
        let f = VectorField::from_fn(g, |_, _| [3.0, 4.0]);
        assert!((f.norm_l2_sq() - 25.0).abs() < 1e-12);
    }
}
