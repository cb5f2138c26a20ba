//! Uniform periodic grid on the unit square torus and the finite-difference
//! stencils used everywhere else.
//!
//! Point `p = i + n*j` sits at `(x₁, x₂) = (i h, j h)`. Multi-component
//! fields are stored point-major with a fixed `width` of reals per point.

use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TorusGrid {
    pub n: usize,
    pub order: usize,
}

impl TorusGrid {
    pub fn new(n: usize, order: usize) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::Config(format!("grid size {n} must be a power of two >= 8")));
        }
        if order != 2 && order != 4 {
            return Err(Error::Config(format!("stencil order {order} must be 2 or 4")));
        }
        Ok(TorusGrid { n, order })
    }

    #[inline]
    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn coords(&self, p: usize) -> [f64; 2] {
        let h = self.h();
        [(p % self.n) as f64 * h, (p / self.n) as f64 * h]
    }

    pub fn check_same(&self, other: &TorusGrid) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(*self, *other));
        }
        Ok(())
    }

    /// Antisymmetric central-difference weights `(offset, c)`; the derivative
    /// is Σ c (f[i+offset] − f[i−offset]) / h.
    pub fn stencil(&self) -> &'static [(usize, f64)] {
        match self.order {
            2 => &[(1, 0.5)],
            _ => &[(1, 2.0 / 3.0), (2, -1.0 / 12.0)],
        }
    }

    /// Neighbour of point `p` displaced by `s` cells along `axis`, with a flag
    /// telling whether the read wrapped around the periodic boundary.
    #[inline]
    pub fn neighbour(&self, p: usize, axis: usize, s: isize) -> (usize, bool) {
        let n = self.n as isize;
        let (i, j) = ((p % self.n) as isize, (p / self.n) as isize);
        let (c, other) = if axis == 0 { (i, j) } else { (j, i) };
        let raw = c + s;
        let wraps = raw.div_euclid(n);
        let c2 = raw.rem_euclid(n);
        let q = if axis == 0 { c2 + n * other } else { other + n * c2 };
        (q as usize, wraps % 2 != 0)
    }

    pub fn map_points<F>(&self, f: F) -> Vec<f64>
    where
        F: Fn([f64; 2]) -> f64 + Sync,
    {
        (0..self.len()).into_par_iter().map(|p| f(self.coords(p))).collect()
    }
}

/// Central derivative along `axis` of a `width`-wide field. Reads crossing
/// the boundary an odd number of times pick up the factor `twist`.
pub fn diff(grid: &TorusGrid, axis: usize, twist: f64, width: usize, src: &[f64]) -> Vec<f64> {
    debug_assert_eq!(src.len(), grid.len() * width);
    let inv_h = grid.n as f64;
    let stencil = grid.stencil();
    let mut out = vec![0.0; src.len()];
    out.par_chunks_mut(width).enumerate().for_each(|(p, o)| {
        for &(s, c) in stencil {
            let (qp, wp) = grid.neighbour(p, axis, s as isize);
            let (qm, wm) = grid.neighbour(p, axis, -(s as isize));
            let sp = if wp { twist } else { 1.0 } * c * inv_h;
            let sm = if wm { twist } else { 1.0 } * c * inv_h;
            let a = &src[qp * width..(qp + 1) * width];
            let b = &src[qm * width..(qm + 1) * width];
            for k in 0..width {
                o[k] += sp * a[k] - sm * b[k];
            }
        }
    });
    out
}

/// Shift a field by `s` cells: out[p] = twist-signed src[p + s ê_axis].
pub fn shift(grid: &TorusGrid, axis: usize, s: isize, twist: f64, width: usize, src: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; src.len()];
    out.par_chunks_mut(width).enumerate().for_each(|(p, o)| {
        let (q, w) = grid.neighbour(p, axis, s);
        let sign = if w { twist } else { 1.0 };
        for k in 0..width {
            o[k] = sign * src[q * width + k];
        }
    });
    out
}

/// Neumaier-compensated sum in index order.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in it {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// h² Σ f, the flat quadrature on the grid.
pub fn flat_integral(grid: &TorusGrid, f: &[f64]) -> f64 {
    let h = grid.h();
    compensated_sum(f.iter().copied()) * h * h
}
