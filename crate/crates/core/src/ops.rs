//! Spatial operators on uniform grids.
//!
//! All operators read ghost-filled inputs and write a fresh output field
//! (interior only, ghosts zero). Each cell is computed independently.

use crate::error::{Error, Result};
use crate::grid::{fill_ghosts, Boundaries, Field, VectorField};

/// Ghost layers needed by the WENO5 stencil.
pub const WENO_GHOST: usize = 3;

/// Relative WENO regularisation, scaled by the squared derivative scale of
/// the field.
pub const WENO_EPS: f64 = 1e-6;

/// Second-order central differences along each axis.
pub fn gradient_central(f: &Field) -> VectorField {
    let g = f.grid;
    let x = Field::map_interior(g, |i, j| (f.get(i + 1, j) - f.get(i - 1, j)) / (2.0 * g.dx));
    let y = if g.dim == 2 {
        Field::map_interior(g, |i, j| (f.get(i, j + 1) - f.get(i, j - 1)) / (2.0 * g.dy))
    } else {
        Field::new(g, 0.0)
    };
    VectorField { x, y }
}

/// Conservative `∇·[K ∇T]` with arithmetic-mean face coefficients.
pub fn diffusion_variable_k(t: &Field, k: &Field) -> Result<Field> {
    t.check_shape(k, "diffusion_variable_k")?;
    let g = t.grid;
    let (td, kd) = (&t.data, &k.data);
    let axes: Vec<(usize, f64)> = (0..g.dim)
        .map(|a| (g.stride(a), 1.0 / (g.spacing(a) * g.spacing(a))))
        .collect();
    Ok(Field::map_interior(g, |i, j| {
        let c = g.idx(i, j);
        let mut acc = 0.0;
        for &(s, inv_h2) in &axes {
            let k_hi = 0.5 * (kd[c] + kd[c + s]);
            let k_lo = 0.5 * (kd[c] + kd[c - s]);
            acc += (k_hi * (td[c + s] - td[c]) - k_lo * (td[c] - td[c - s])) * inv_h2;
        }
        acc
    }))
}

/// Constant-coefficient Laplacian, the fast path of
/// [`diffusion_variable_k`] when `K` is uniform.
pub fn laplacian_scaled(t: &Field, k: f64) -> Field {
    let g = t.grid;
    let td = &t.data;
    let axes: Vec<(usize, f64)> = (0..g.dim)
        .map(|a| (g.stride(a), k / (g.spacing(a) * g.spacing(a))))
        .collect();
    Field::map_interior(g, |i, j| {
        let c = g.idx(i, j);
        axes.iter()
            .map(|&(s, w)| w * (td[c + s] - 2.0 * td[c] + td[c - s]))
            .sum()
    })
}

fn check_velocity(f: &Field, v: &VectorField) -> Result<()> {
    f.check_shape(&v.x, "advection velocity x")?;
    f.check_shape(&v.y, "advection velocity y")
}

/// First-order donor-cell discretisation of `v·∇f`.
pub fn advect_upwind(f: &Field, v: &VectorField) -> Result<Field> {
    check_velocity(f, v)?;
    let g = f.grid;
    let fd = &f.data;
    Ok(Field::map_interior(g, |i, j| {
        let c = g.idx(i, j);
        let mut acc = 0.0;
        for a in 0..g.dim {
            let s = g.stride(a);
            let va = v.component(a).data[c];
            let d = if va > 0.0 {
                fd[c] - fd[c - s]
            } else if va < 0.0 {
                fd[c + s] - fd[c]
            } else {
                0.0
            };
            acc += va * d / g.spacing(a);
        }
        acc
    }))
}

/// WENO5 discretisation of the non-conservative term `v·∇f`.
///
/// One-sided derivatives are reconstructed from divided differences with
/// Jiang-Shu smoothness indicators and the upwind side is selected by the
/// sign of the local velocity component.
pub fn advect_weno5(f: &Field, v: &VectorField) -> Result<Field> {
    weno5_advection(f, v, Weights::Nonlinear)
}

/// Weight selection for the WENO5 derivative.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Weights {
    Nonlinear,
    /// Ideal weights; the fifth-order linear upwind stencil.
    Linear,
}

pub fn weno5_advection(f: &Field, v: &VectorField, weights: Weights) -> Result<Field> {
    check_velocity(f, v)?;
    let g = f.grid;
    if g.ghost < WENO_GHOST {
        return Err(Error::GhostWidth {
            have: g.ghost,
            need: WENO_GHOST,
        });
    }
    let fd = &f.data;
    // per-axis regularisation from the largest divided difference
    let eps: Vec<f64> = (0..g.dim)
        .map(|a| {
            let s = g.stride(a);
            let h = g.spacing(a);
            let mut qmax: f64 = 0.0;
            for k in 0..fd.len() - s {
                qmax = qmax.max(((fd[k + s] - fd[k]) / h).abs());
            }
            (WENO_EPS * qmax * qmax).max(1e-100)
        })
        .collect();
    Ok(Field::map_interior(g, |i, j| {
        let c = g.idx(i, j);
        let mut acc = 0.0;
        for a in 0..g.dim {
            let va = v.component(a).data[c];
            if va == 0.0 {
                continue;
            }
            let s = g.stride(a) as isize;
            let h = g.spacing(a);
            let q = |m: isize| {
                let lo = (c as isize + m * s) as usize;
                (fd[lo + s as usize] - fd[lo]) / h
            };
            let d = if va > 0.0 {
                weno5_derivative([q(-3), q(-2), q(-1), q(0), q(1)], eps[a], weights)
            } else {
                weno5_derivative([q(2), q(1), q(0), q(-1), q(-2)], eps[a], weights)
            };
            acc += va * d;
        }
        acc
    }))
}

/// WENO5 combination of five consecutive divided differences, ordered from
/// the upwind side. Returns the one-sided derivative at the centre cell.
#[inline]
pub fn weno5_derivative(q: [f64; 5], eps: f64, weights: Weights) -> f64 {
    let [v1, v2, v3, v4, v5] = q;
    let p0 = v1 / 3.0 - 7.0 * v2 / 6.0 + 11.0 * v3 / 6.0;
    let p1 = -v2 / 6.0 + 5.0 * v3 / 6.0 + v4 / 3.0;
    let p2 = v3 / 3.0 + 5.0 * v4 / 6.0 - v5 / 6.0;
    let (w0, w1, w2) = match weights {
        Weights::Linear => (0.1, 0.6, 0.3),
        Weights::Nonlinear => {
            let b0 = 13.0 / 12.0 * (v1 - 2.0 * v2 + v3).powi(2)
                + 0.25 * (v1 - 4.0 * v2 + 3.0 * v3).powi(2);
            let b1 = 13.0 / 12.0 * (v2 - 2.0 * v3 + v4).powi(2) + 0.25 * (v2 - v4).powi(2);
            let b2 = 13.0 / 12.0 * (v3 - 2.0 * v4 + v5).powi(2)
                + 0.25 * (3.0 * v3 - 4.0 * v4 + v5).powi(2);
            let a0 = 0.1 / (eps + b0).powi(2);
            let a1 = 0.6 / (eps + b1).powi(2);
            let a2 = 0.3 / (eps + b2).powi(2);
            let sum = a0 + a1 + a2;
            (a0 / sum, a1 / sum, a2 / sum)
        }
    };
    w0 * p0 + w1 * p1 + w2 * p2
}

/// Slope field of the terrain, with Neumann ghosts so the slope does not
/// jump at the domain edge.
pub fn terrain_gradient(z: &Field) -> VectorField {
    let mut filled = z.clone();
    fill_ghosts(&mut filled, &Boundaries::neumann(), 0.0);
    gradient_central(&filled)
}
