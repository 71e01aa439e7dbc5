//! Uniform Cartesian grids with ghost layers, cell-centred fields and
//! boundary filling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ghost layers used by every field. Three layers cover the WENO5 stencil.
pub const GHOST: usize = 3;

/// Interior cells per parallel work item when a single row is split.
const CHUNK: usize = 2048;

/// A uniform 1D or 2D cell-centred grid.
///
/// In 1D the `y` axis is degenerate: `ny == 1` and no ghost rows exist.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub dim: usize,
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub x0: f64,
    pub y0: f64,
    pub ghost: usize,
}

impl Grid {
    pub fn new_1d(nx: usize, dx: f64, x0: f64) -> Result<Self> {
        let grid = Grid {
            dim: 1,
            nx,
            ny: 1,
            dx,
            dy: dx,
            x0,
            y0: 0.0,
            ghost: GHOST,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn new_2d(nx: usize, ny: usize, dx: f64, dy: f64, x0: f64, y0: f64) -> Result<Self> {
        let grid = Grid {
            dim: 2,
            nx,
            ny,
            dx,
            dy,
            x0,
            y0,
            ghost: GHOST,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim != 1 && self.dim != 2 {
            return Err(Error::param("grid.dim", "must be 1 or 2"));
        }
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::param("grid.nx", "cell counts must be at least 1"));
        }
        if self.dim == 1 && self.ny != 1 {
            return Err(Error::param("grid.ny", "a 1D grid has exactly one row"));
        }
        if !(self.dx > 0.0 && self.dx.is_finite()) || !(self.dy > 0.0 && self.dy.is_finite()) {
            return Err(Error::param(
                "grid.dx",
                "spacing must be positive and finite",
            ));
        }
        Ok(())
    }

    /// Padded row length (interior plus ghosts on both sides).
    #[inline]
    pub fn px(&self) -> usize {
        self.nx + 2 * self.ghost
    }

    /// Padded row count. 1D grids have a single row.
    #[inline]
    pub fn py(&self) -> usize {
        if self.dim == 2 {
            self.ny + 2 * self.ghost
        } else {
            1
        }
    }

    #[inline]
    fn gy(&self) -> usize {
        if self.dim == 2 {
            self.ghost
        } else {
            0
        }
    }

    pub fn padded_len(&self) -> usize {
        self.px() * self.py()
    }

    pub fn cell_count(&self) -> usize {
        self.nx * self.ny
    }

    /// Flat index of interior-relative cell `(i, j)`; ghosts have negative
    /// or out-of-range indices.
    #[inline]
    pub fn idx(&self, i: isize, j: isize) -> usize {
        let col = (i + self.ghost as isize) as usize;
        let row = (j + self.gy() as isize) as usize;
        row * self.px() + col
    }

    /// Cell-centre x coordinate of column `i` (may be a ghost column).
    #[inline]
    pub fn x(&self, i: isize) -> f64 {
        self.x0 + (i as f64 + 0.5) * self.dx
    }

    #[inline]
    pub fn y(&self, j: isize) -> f64 {
        if self.dim == 2 {
            self.y0 + (j as f64 + 0.5) * self.dy
        } else {
            self.y0
        }
    }

    /// Spacing along `axis` (0 = x, 1 = y).
    pub fn spacing(&self, axis: usize) -> f64 {
        if axis == 0 {
            self.dx
        } else {
            self.dy
        }
    }

    /// Flat-index stride between neighbours along `axis`.
    #[inline]
    pub fn stride(&self, axis: usize) -> usize {
        if axis == 0 {
            1
        } else {
            self.px()
        }
    }

    /// Domain extent `[x_lo, x_hi]` of the interior.
    pub fn x_range(&self) -> (f64, f64) {
        (self.x0, self.x0 + self.nx as f64 * self.dx)
    }

    pub fn y_range(&self) -> (f64, f64) {
        (self.y0, self.y0 + self.ny as f64 * self.dy)
    }
}

/// Scalar values on every padded cell of a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    pub grid: Grid,
    pub data: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, value: f64) -> Self {
        Field {
            grid,
            data: vec![value; grid.padded_len()],
        }
    }

    /// Field sampled from `f(x, y)` at every cell centre, ghosts included.
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut field = Field::new(grid, 0.0);
        let g = grid.ghost as isize;
        let (jlo, jhi) = if grid.dim == 2 {
            (-g, grid.ny as isize + g)
        } else {
            (0, 1)
        };
        for j in jlo..jhi {
            for i in -g..grid.nx as isize + g {
                let k = grid.idx(i, j);
                field.data[k] = f(grid.x(i), grid.y(j));
            }
        }
        field
    }

    /// Field with interior values from `values` (row-major, `nx * ny`) and
    /// zero ghosts.
    pub fn from_interior(grid: Grid, values: &[f64]) -> Result<Self> {
        if values.len() != grid.cell_count() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} interior values, got {}",
                grid.cell_count(),
                values.len()
            )));
        }
        let mut field = Field::new(grid, 0.0);
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                field.data[grid.idx(i as isize, j as isize)] = values[j * grid.nx + i];
            }
        }
        Ok(field)
    }

    #[inline]
    pub fn get(&self, i: isize, j: isize) -> f64 {
        self.data[self.grid.idx(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: isize, j: isize, v: f64) {
        let k = self.grid.idx(i, j);
        self.data[k] = v;
    }

    /// Interior values in row-major order.
    pub fn interior(&self) -> Vec<f64> {
        let g = self.grid;
        let mut out = Vec::with_capacity(g.cell_count());
        for j in 0..g.ny {
            let start = g.idx(0, j as isize);
            out.extend_from_slice(&self.data[start..start + g.nx]);
        }
        out
    }

    /// Interior row `j` as `(x coordinates, values)`.
    pub fn row(&self, j: usize) -> (Vec<f64>, Vec<f64>) {
        let g = self.grid;
        let xs = (0..g.nx).map(|i| g.x(i as isize)).collect();
        let start = g.idx(0, j as isize);
        (xs, self.data[start..start + g.nx].to_vec())
    }

    /// Interior column `i` as `(y coordinates, values)`.
    pub fn column(&self, i: usize) -> (Vec<f64>, Vec<f64>) {
        let g = self.grid;
        let ys = (0..g.ny).map(|j| g.y(j as isize)).collect();
        let vals = (0..g.ny)
            .map(|j| self.get(i as isize, j as isize))
            .collect();
        (ys, vals)
    }

    pub fn same_shape(&self, other: &Field) -> bool {
        self.grid == other.grid && self.data.len() == other.data.len()
    }

    pub fn check_shape(&self, other: &Field, what: &str) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::ShapeMismatch(format!(
                "{what}: grids differ ({}x{} vs {}x{})",
                self.grid.nx, self.grid.ny, other.grid.nx, other.grid.ny
            )))
        }
    }

    /// Fold over interior values.
    pub fn fold_interior<A>(&self, init: A, mut f: impl FnMut(A, f64) -> A) -> A {
        let g = self.grid;
        let mut acc = init;
        for j in 0..g.ny {
            let start = g.idx(0, j as isize);
            for &v in &self.data[start..start + g.nx] {
                acc = f(acc, v);
            }
        }
        acc
    }

    pub fn interior_max(&self) -> f64 {
        self.fold_interior(f64::NEG_INFINITY, f64::max)
    }

    pub fn interior_min(&self) -> f64 {
        self.fold_interior(f64::INFINITY, f64::min)
    }

    pub fn interior_abs_max(&self) -> f64 {
        self.fold_interior(0.0, |a, v| a.max(v.abs()))
    }

    /// Sum of interior values times the cell volume. Sequential, so the
    /// result does not depend on the thread count.
    pub fn integral(&self) -> f64 {
        let vol = if self.grid.dim == 2 {
            self.grid.dx * self.grid.dy
        } else {
            self.grid.dx
        };
        self.fold_interior(0.0, |a, v| a + v) * vol
    }

    /// First interior cell holding a non-finite value.
    pub fn first_non_finite(&self) -> Option<(usize, usize)> {
        let g = self.grid;
        for j in 0..g.ny {
            for i in 0..g.nx {
                if !self.get(i as isize, j as isize).is_finite() {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// New field whose interior is `f(i, j)`; ghosts are zero. Cells are
    /// computed independently in parallel, so the result is identical for
    /// any thread count.
    pub fn map_interior(grid: Grid, f: impl Fn(isize, isize) -> f64 + Sync) -> Field {
        let mut out = Field::new(grid, 0.0);
        out.update_interior(|i, j, _| f(i, j));
        out
    }

    /// Replace every interior value with `f(i, j, old)`.
    pub fn update_interior(&mut self, f: impl Fn(isize, isize, f64) -> f64 + Sync) {
        let g = self.grid;
        let px = g.px();
        let gy = g.gy();
        let ghost = g.ghost;
        self.data
            .par_chunks_mut(px)
            .enumerate()
            .filter(|(row, _)| *row >= gy && *row < gy + g.ny)
            .for_each(|(row, cells)| {
                let j = row as isize - gy as isize;
                cells[ghost..ghost + g.nx]
                    .par_chunks_mut(CHUNK)
                    .enumerate()
                    .for_each(|(c, chunk)| {
                        let base = c * CHUNK;
                        for (off, v) in chunk.iter_mut().enumerate() {
                            *v = f((base + off) as isize, j, *v);
                        }
                    });
            });
    }
}

/// A two-component vector field. In 1D only `x` is used and `y` is zero.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub x: Field,
    pub y: Field,
}

impl VectorField {
    pub fn zeros(grid: Grid) -> Self {
        VectorField {
            x: Field::new(grid, 0.0),
            y: Field::new(grid, 0.0),
        }
    }

    pub fn uniform(grid: Grid, v: [f64; 2]) -> Self {
        let vy = if grid.dim == 2 { v[1] } else { 0.0 };
        VectorField {
            x: Field::new(grid, v[0]),
            y: Field::new(grid, vy),
        }
    }

    #[inline]
    pub fn at(&self, i: isize, j: isize) -> [f64; 2] {
        [self.x.get(i, j), self.y.get(i, j)]
    }

    pub fn component(&self, axis: usize) -> &Field {
        if axis == 0 {
            &self.x
        } else {
            &self.y
        }
    }

    pub fn grid(&self) -> Grid {
        self.x.grid
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryKind {
    /// Ghost cells hold the ambient value.
    DirichletAmbient,
    /// Ghost cells mirror the interior (even reflection).
    NeumannZeroFlux,
}

/// One boundary condition per physical side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Boundaries {
    pub x_lo: BoundaryKind,
    pub x_hi: BoundaryKind,
    pub y_lo: BoundaryKind,
    pub y_hi: BoundaryKind,
}

impl Boundaries {
    pub fn all(kind: BoundaryKind) -> Self {
        Boundaries {
            x_lo: kind,
            x_hi: kind,
            y_lo: kind,
            y_hi: kind,
        }
    }

    pub fn dirichlet() -> Self {
        Self::all(BoundaryKind::DirichletAmbient)
    }

    pub fn neumann() -> Self {
        Self::all(BoundaryKind::NeumannZeroFlux)
    }
}

/// Fill every ghost layer of `f` according to `bc`.
///
/// The x ghosts of interior rows are written first, then whole ghost rows
/// along y, so corner ghosts are consistent with both sides.
pub fn fill_ghosts(f: &mut Field, bc: &Boundaries, ambient: f64) {
    let g = f.grid;
    let gw = g.ghost as isize;
    let nx = g.nx as isize;
    let ny = g.ny as isize;
    for j in 0..ny {
        for m in 0..gw {
            let lo = match bc.x_lo {
                BoundaryKind::DirichletAmbient => ambient,
                BoundaryKind::NeumannZeroFlux => f.get(m.min(nx - 1), j),
            };
            f.set(-1 - m, j, lo);
            let hi = match bc.x_hi {
                BoundaryKind::DirichletAmbient => ambient,
                BoundaryKind::NeumannZeroFlux => f.get((nx - 1 - m).max(0), j),
            };
            f.set(nx + m, j, hi);
        }
    }
    if g.dim == 2 {
        for i in -gw..nx + gw {
            for m in 0..gw {
                let lo = match bc.y_lo {
                    BoundaryKind::DirichletAmbient => ambient,
                    BoundaryKind::NeumannZeroFlux => f.get(i, m.min(ny - 1)),
                };
                f.set(i, -1 - m, lo);
                let hi = match bc.y_hi {
                    BoundaryKind::DirichletAmbient => ambient,
                    BoundaryKind::NeumannZeroFlux => f.get(i, (ny - 1 - m).max(0)),
                };
                f.set(i, ny + m, hi);
            }
        }
    }
}
