//! Spinor fields under the four spin structures of the torus, the spin
//! connection, the Dirac operator, spinor Lie derivatives and the spinor
//! divergence.
//!
//! Components are stored relative to the g-orthonormal frame E_α = b(∂_α).
//! A field may carry several spinor columns (vector spinors, gravitinos);
//! every differential operator here acts column-wise.
//!
//! The directional derivative is discretised in the skew form
//! E(s) = ½[bᵘD_μ s + (1/√g) D_μ(√g bᵘ s)] − ½ div(E) s, so the discrete
//! Dirac operator is exactly self-adjoint for the √g-weighted product.
//! Central differences alone leave 15 spurious zero modes at the grid
//! Nyquist corners. They are lifted by the regulator
//! W = |g|^{−3/8} W₀ |g|^{1/8} with W₀ = h^{2m−1} 4^{−m} Σ_μ (−Δ_μ)^m Γ.
//! W₀ anticommutes with the flat operator and is O(h^{2m−1}) on smooth
//! fields; the determinant weights keep W self-adjoint and give it the
//! same conformal weight as the Dirac operator.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clifford::{self, Spinor};
use crate::error::{Error, Result};
use crate::geometry::{almost_complex_at, d_scalar, m2_vec, MetricField, VectorField};
use crate::grid::{compensated_sum, diff, shift, TorusGrid};
use crate::trig::TrigPoly;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinStructure {
    pub eps: [i8; 2],
}

impl SpinStructure {
    pub const TRIVIAL: SpinStructure = SpinStructure { eps: [1, 1] };

    pub fn new(e1: i8, e2: i8) -> Result<Self> {
        if e1.abs() != 1 || e2.abs() != 1 {
            return Err(Error::Config(format!("spin twists must be ±1, got ({e1}, {e2})")));
        }
        Ok(SpinStructure { eps: [e1, e2] })
    }

    pub fn all() -> [SpinStructure; 4] {
        [
            SpinStructure { eps: [1, 1] },
            SpinStructure { eps: [-1, 1] },
            SpinStructure { eps: [1, -1] },
            SpinStructure { eps: [-1, -1] },
        ]
    }

    #[inline]
    pub fn twist(&self, axis: usize) -> f64 {
        self.eps[axis] as f64
    }

    /// Frequency offset of admissible plane waves along each axis.
    pub fn frequency_shift(&self) -> [f64; 2] {
        [if self.eps[0] < 0 { 0.5 } else { 0.0 }, if self.eps[1] < 0 { 0.5 } else { 0.0 }]
    }

    pub fn label(&self) -> String {
        let s = |e: i8| if e > 0 { "+" } else { "-" };
        format!("({}{})", s(self.eps[0]), s(self.eps[1]))
    }
}

/// A grid of `cols` spinors per point.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinorField {
    pub grid: TorusGrid,
    pub spin: SpinStructure,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl SpinorField {
    pub fn zeros(grid: TorusGrid, spin: SpinStructure, cols: usize) -> Self {
        SpinorField { grid, spin, cols, data: vec![0.0; grid.len() * 4 * cols] }
    }

    #[inline]
    pub fn width(&self) -> usize {
        4 * self.cols
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.grid, self.spin, self.cols)
    }

    /// Same value `q` in every column slot at every point (only meaningful
    /// for the trivial spin structure).
    pub fn constant(grid: TorusGrid, spin: SpinStructure, cols: &[Spinor]) -> Self {
        let mut f = Self::zeros(grid, spin, cols.len());
        for p in 0..grid.len() {
            for (c, q) in cols.iter().enumerate() {
                f.at_mut(p, c).copy_from_slice(q);
            }
        }
        f
    }

    /// Band-limited random field; admissible frequencies follow the spin
    /// structure.
    pub fn random<R: Rng>(rng: &mut R, grid: TorusGrid, spin: SpinStructure, cols: usize, band: usize, amp: f64) -> Self {
        let polys: Vec<TrigPoly> =
            (0..4 * cols).map(|_| TrigPoly::random(rng, band, amp, spin.frequency_shift())).collect();
        Self::from_trig(grid, spin, cols, &polys)
    }

    /// Field whose k-th real component (k = 4·col + a) samples `polys[k]`.
    pub fn from_trig(grid: TorusGrid, spin: SpinStructure, cols: usize, polys: &[TrigPoly]) -> Self {
        assert_eq!(polys.len(), 4 * cols);
        let samples: Vec<Vec<f64>> = polys.iter().map(|q| q.sample(&grid)).collect();
        let mut f = Self::zeros(grid, spin, cols);
        for p in 0..grid.len() {
            for k in 0..4 * cols {
                f.data[p * 4 * cols + k] = samples[k][p];
            }
        }
        f
    }

    #[inline]
    pub fn at(&self, p: usize, c: usize) -> &[f64] {
        let o = (p * self.cols + c) * 4;
        &self.data[o..o + 4]
    }

    #[inline]
    pub fn at_mut(&mut self, p: usize, c: usize) -> &mut [f64] {
        let o = (p * self.cols + c) * 4;
        &mut self.data[o..o + 4]
    }

    pub fn column(&self, c: usize) -> SpinorField {
        let mut out = SpinorField::zeros(self.grid, self.spin, 1);
        for p in 0..self.grid.len() {
            out.at_mut(p, 0).copy_from_slice(self.at(p, c));
        }
        out
    }

    pub fn set_column(&mut self, c: usize, col: &SpinorField) {
        for p in 0..self.grid.len() {
            let v: Spinor = col.at(p, 0).try_into().unwrap();
            self.at_mut(p, c).copy_from_slice(&v);
        }
    }

    pub fn check_compatible(&self, other: &SpinorField) -> Result<()> {
        self.grid.check_same(&other.grid)?;
        if self.spin != other.spin {
            return Err(Error::Incompatible(format!(
                "spin structures {} and {} differ",
                self.spin.label(),
                other.spin.label()
            )));
        }
        if self.cols != other.cols {
            return Err(Error::Incompatible(format!("column counts {} and {} differ", self.cols, other.cols)));
        }
        Ok(())
    }

    pub fn scaled(&self, a: f64) -> SpinorField {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|x| *x *= a);
        out
    }

    /// self + a·other
    pub fn axpy(&self, a: f64, other: &SpinorField) -> SpinorField {
        let mut out = self.clone();
        out.data.iter_mut().zip(&other.data).for_each(|(x, y)| *x += a * y);
        out
    }

    pub fn add_assign_scaled(&mut self, a: f64, other: &SpinorField) {
        self.data.iter_mut().zip(&other.data).for_each(|(x, y)| *x += a * y);
    }

    /// Multiply every spinor at point p by the scalar f[p].
    pub fn scale_pointwise(&self, f: &[f64]) -> SpinorField {
        let w = self.width();
        let mut out = self.clone();
        out.data.par_chunks_mut(w).zip(f.par_iter()).for_each(|(c, f)| c.iter_mut().for_each(|x| *x *= f));
        out
    }

    /// Apply a per-spinor linear map to every spinor slot.
    pub fn map_spinors<F: Fn(usize, usize, &[f64]) -> Spinor + Sync>(&self, f: F) -> SpinorField {
        let cols = self.cols;
        let mut out = self.zeros_like();
        out.data.par_chunks_mut(4 * cols).enumerate().for_each(|(p, o)| {
            for c in 0..cols {
                let v = f(p, c, &self.data[(p * cols + c) * 4..(p * cols + c) * 4 + 4]);
                o[c * 4..c * 4 + 4].copy_from_slice(&v);
            }
        });
        out
    }

    pub fn omega(&self) -> SpinorField {
        self.map_spinors(|_, _, s| clifford::omega_apply(s))
    }

    /// Pointwise Σ_cols ⟨s, t⟩.
    pub fn dot_pointwise(&self, other: &SpinorField) -> Vec<f64> {
        let w = self.width();
        self.data.par_chunks(w).zip(other.data.par_chunks(w)).map(|(a, b)| a.iter().zip(b).map(|(x, y)| x * y).sum()).collect()
    }

    /// ∫ Σ⟨s, t⟩ dvol_g.
    pub fn inner(&self, other: &SpinorField, g: &MetricField) -> f64 {
        g.integrate(&self.dot_pointwise(other))
    }

    pub fn norm(&self, g: &MetricField) -> f64 {
        self.inner(self, g).max(0.0).sqrt()
    }

    /// Euclidean norm of the raw component vector.
    pub fn raw_norm(&self) -> f64 {
        compensated_sum(self.data.iter().map(|x| x * x)).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// Central derivative along a coordinate axis, respecting the twist.
    pub fn coord_derivative(&self, axis: usize) -> SpinorField {
        SpinorField { data: diff(&self.grid, axis, self.spin.twist(axis), self.width(), &self.data), ..*self }
    }

    /// Grid translation: out(x) = s(x + steps·h) with twist signs.
    pub fn translated(&self, steps: [isize; 2]) -> SpinorField {
        let w = self.width();
        let a = shift(&self.grid, 0, steps[0], self.spin.twist(0), w, &self.data);
        let b = shift(&self.grid, 1, steps[1], self.spin.twist(1), w, &a);
        SpinorField { data: b, ..*self }
    }
}

impl SpinorField {
    pub fn with_data(&self, data: Vec<f64>) -> SpinorField {
        assert_eq!(data.len(), self.data.len());
        SpinorField { grid: self.grid, spin: self.spin, cols: self.cols, data }
    }
}

/// Frame derivatives E_α(s) for α = 1, 2 in the skew form.
pub fn frame_derivatives(s: &SpinorField, g: &MetricField) -> Result<[SpinorField; 2]> {
    s.grid.check_same(&g.grid)?;
    let d = [s.coord_derivative(0), s.coord_derivative(1)];
    if g.flat {
        let [a, b] = d;
        return Ok([a, b]);
    }
    let w = s.width();
    let n = s.grid.len();
    let mut out = [s.zeros_like(), s.zeros_like()];
    for alpha in 0..2 {
        // products √g bᵘ_α s
        let mut conv = s.zeros_like();
        let mut total = vec![0.0; n * w];
        for mu in 0..2 {
            conv.data.par_chunks_mut(w).enumerate().for_each(|(p, o)| {
                let c = g.sqrt_det[p] * g.frame(p, alpha)[mu];
                let src = &s.data[p * w..(p + 1) * w];
                for k in 0..w {
                    o[k] = c * src[k];
                }
            });
            let dd = diff(&s.grid, mu, s.spin.twist(mu), w, &conv.data);
            total.iter_mut().zip(dd).for_each(|(t, x)| *t += x);
        }
        out[alpha].data.par_chunks_mut(w).enumerate().for_each(|(p, o)| {
            let e = g.frame(p, alpha);
            let inv = 1.0 / g.sqrt_det[p];
            let dv = g.div_frame[p][alpha];
            for k in 0..w {
                let i = p * w + k;
                let adv = e[0] * d[0].data[i] + e[1] * d[1].data[i];
                o[k] = 0.5 * (adv + inv * total[i]) - 0.5 * dv * s.data[i];
            }
        });
    }
    Ok(out)
}

/// ∇^s_{E_α} s = E_α(s) + ½ ω₁₂(E_α) ω s, for both α.
pub fn spin_derivatives(s: &SpinorField, g: &MetricField) -> Result<[SpinorField; 2]> {
    let mut e = frame_derivatives(s, g)?;
    if g.flat {
        return Ok(e);
    }
    let w = s.width();
    for (alpha, ea) in e.iter_mut().enumerate() {
        ea.data.par_chunks_mut(w).enumerate().for_each(|(p, o)| {
            let c = 0.5 * g.omega12[p][alpha];
            for col in 0..s.cols {
                let v = clifford::omega_apply(s.at(p, col));
                for a in 0..4 {
                    o[col * 4 + a] += c * v[a];
                }
            }
        });
    }
    Ok(e)
}

pub fn spin_derivative(s: &SpinorField, alpha: usize, g: &MetricField) -> Result<SpinorField> {
    let [a, b] = spin_derivatives(s, g)?;
    Ok(if alpha == 0 { a } else { b })
}

/// Half-width m of the regulator for a given stencil order.
pub fn regulator_power(order: usize) -> usize {
    order / 2 + 2
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Flat part W₀ s (before the 1/√g weight).
fn regulator_flat(s: &SpinorField) -> SpinorField {
    let m = regulator_power(s.grid.order);
    let w = s.width();
    let scale = s.grid.n as f64 / 4f64.powi(m as i32);
    let mut acc = vec![0.0; s.data.len()];
    for axis in 0..2 {
        for j in -(m as isize)..=(m as isize) {
            let c = if j % 2 == 0 { 1.0 } else { -1.0 } * binomial(2 * m, (m as isize + j) as usize) * scale;
            let sh = shift(&s.grid, axis, j, s.spin.twist(axis), w, &s.data);
            acc.iter_mut().zip(sh).for_each(|(a, x)| *a += c * x);
        }
    }
    s.with_data(acc).map_spinors(|_, _, v| clifford::grading_apply(v))
}

/// Doubler regulator W s.
pub fn regulator(s: &SpinorField, g: &MetricField) -> Result<SpinorField> {
    s.grid.check_same(&g.grid)?;
    if g.flat {
        return Ok(regulator_flat(s));
    }
    let right: Vec<f64> = g.sqrt_det.iter().map(|x| x.powf(0.25)).collect();
    let left: Vec<f64> = g.sqrt_det.iter().map(|x| x.powf(-0.75)).collect();
    Ok(regulator_flat(&s.scale_pointwise(&right)).scale_pointwise(&left))
}

/// Σ_α γ_α ∇_α s + W s from precomputed derivatives.
pub fn dirac_from(nabla: &[SpinorField; 2], reg: &SpinorField) -> SpinorField {
    let mut out = reg.clone();
    let cols = reg.cols;
    out.data.par_chunks_mut(4 * cols).enumerate().for_each(|(p, o)| {
        for c in 0..cols {
            let a = clifford::gamma_apply(0, nabla[0].at(p, c));
            let b = clifford::gamma_apply(1, nabla[1].at(p, c));
            for k in 0..4 {
                o[c * 4 + k] += a[k] + b[k];
            }
        }
    });
    out
}

pub fn dirac(s: &SpinorField, g: &MetricField) -> Result<SpinorField> {
    let nabla = spin_derivatives(s, g)?;
    Ok(dirac_from(&nabla, &regulator(s, g)?))
}

/// ‖∂̸_{g'}(e^{−u/2}s) − e^{−3u/2}∂̸_g s‖ with g' = e^{2u}g.
pub fn dirac_conformal_check(s: &SpinorField, u: &[f64], g: &MetricField) -> Result<f64> {
    s.grid.check_same(&g.grid)?;
    let gp = g.conformal_rescale(u);
    let half: Vec<f64> = u.iter().map(|u| (-0.5 * u).exp()).collect();
    let three: Vec<f64> = u.iter().map(|u| (-1.5 * u).exp()).collect();
    let lhs = dirac(&s.scale_pointwise(&half), &gp)?;
    let rhs = dirac(s, g)?.scale_pointwise(&three);
    Ok(lhs.axpy(-1.0, &rhs).norm(&gp))
}

/// Frame components of a coordinate vector field at every point.
pub fn frame_components(x: &VectorField, g: &MetricField) -> Vec<[f64; 2]> {
    (0..g.grid.len()).map(|p| g.to_frame(p, x.v[p])).collect()
}

/// Coefficient a = (∂₁X₂ − ∂₂X₁)/√g of dX♭ with X♭ = g(X, ·), so that
/// γ(dX♭) = a ω.
pub fn curl_coefficient(x: &VectorField, g: &MetricField) -> Vec<f64> {
    let n = g.grid.len();
    let xl: Vec<[f64; 2]> = (0..n).map(|p| g.lower(p, x.v[p])).collect();
    let x1: Vec<f64> = xl.iter().map(|v| v[0]).collect();
    let x2: Vec<f64> = xl.iter().map(|v| v[1]).collect();
    let d1x2 = d_scalar(&g.grid, 0, &x2);
    let d2x1 = d_scalar(&g.grid, 1, &x1);
    (0..n).map(|p| (d1x2[p] - d2x1[p]) / g.sqrt_det[p]).collect()
}

/// ∇_X s = Σ_α X^α_frame ∇_α s.
pub fn covariant_along(x: &VectorField, nabla: &[SpinorField; 2], g: &MetricField) -> SpinorField {
    let xf = frame_components(x, g);
    let w = nabla[0].width();
    let mut out = nabla[0].zeros_like();
    out.data.par_chunks_mut(w).enumerate().for_each(|(p, o)| {
        for k in 0..w {
            o[k] = xf[p][0] * nabla[0].data[p * w + k] + xf[p][1] * nabla[1].data[p * w + k];
        }
    });
    out
}

/// Spinor Lie derivative L_X s = ∇_X s − ¼ γ(dX♭) s.
pub fn lie_spinor(x: &VectorField, s: &SpinorField, g: &MetricField) -> Result<SpinorField> {
    x.grid.check_same(&g.grid)?;
    let nabla = spin_derivatives(s, g)?;
    let a = curl_coefficient(x, g);
    let cov = covariant_along(x, &nabla, g);
    let w = s.omega().scale_pointwise(&a);
    Ok(cov.axpy(-0.25, &w))
}

/// div_σ(ρ) = Σ_α⟨∇_α σ, ρ⟩E_α + ¼ J_M grad⟨ωσ, ρ⟩, as a coordinate vector
/// field.
pub fn div_sigma(sigma: &SpinorField, rho: &SpinorField, g: &MetricField) -> Result<VectorField> {
    sigma.check_compatible(rho)?;
    sigma.grid.check_same(&g.grid)?;
    let nabla = spin_derivatives(sigma, g)?;
    let c = [nabla[0].dot_pointwise(rho), nabla[1].dot_pointwise(rho)];
    let f = sigma.omega().dot_pointwise(rho);
    let grid = g.grid;
    let df = [d_scalar(&grid, 0, &f), d_scalar(&grid, 1, &f)];
    let v = (0..grid.len())
        .map(|p| {
            let e1 = g.frame(p, 0);
            let e2 = g.frame(p, 1);
            let gradf = g.raise(p, [df[0][p], df[1][p]]);
            let j = m2_vec(&almost_complex_at(&g.g[p], g.sqrt_det[p]), gradf);
            [
                c[0][p] * e1[0] + c[1][p] * e2[0] + 0.25 * j[0],
                c[0][p] * e1[1] + c[1][p] * e2[1] + 0.25 * j[1],
            ]
        })
        .collect();
    Ok(VectorField { grid, v })
}

/// Rotate stored spinor (and optionally vector-index) components by the
/// spin lift of the frame rotation angle θ(x): s ↦ exp(θω/2) s.
pub fn rotate_spinors(s: &SpinorField, theta: &[f64]) -> SpinorField {
    s.map_spinors(|p, _, v| clifford::apply(&clifford::spin_rotation(theta[p]), v))
}

/// ∫⟨L_X σ, ρ⟩ dvol − ∫ g(X, div_σ ρ) dvol, all discrete.
pub fn lemma_defect(x: &VectorField, sigma: &SpinorField, rho: &SpinorField, g: &MetricField) -> Result<f64> {
    let l = lie_spinor(x, sigma, g)?;
    lemma_pairing(&l, x, sigma, rho, g)
}

/// Same identity on g = δ with L_X σ taken analytically from the
/// trigonometric data of X and σ (one polynomial per real component).
pub fn lemma_defect_analytic(x1: &TrigPoly, x2: &TrigPoly, sigma: &[TrigPoly], spin: SpinStructure, rho: &SpinorField, g: &MetricField) -> Result<f64> {
    if !g.flat {
        return Err(Error::Incompatible("analytic Lie derivative needs the flat metric".into()));
    }
    let grid = g.grid;
    let s = SpinorField::from_trig(grid, spin, 1, sigma);
    let mut l = s.zeros_like();
    for p in 0..grid.len() {
        let c = grid.coords(p);
        let (a, b) = (x1.eval(c), x2.eval(c));
        let curl = x2.deriv(c, 1, 0) - x1.deriv(c, 0, 1);
        let w = clifford::omega_apply(s.at(p, 0));
        for k in 0..4 {
            l.data[4 * p + k] = a * sigma[k].deriv(c, 1, 0) + b * sigma[k].deriv(c, 0, 1) - 0.25 * curl * w[k];
        }
    }
    lemma_pairing(&l, &VectorField::from_trig(grid, x1, x2), &s, rho, g)
}

fn lemma_pairing(l: &SpinorField, x: &VectorField, sigma: &SpinorField, rho: &SpinorField, g: &MetricField) -> Result<f64> {
    let d = div_sigma(sigma, rho, g)?;
    let a = l.dot_pointwise(rho);
    let f: Vec<f64> = (0..g.grid.len()).map(|p| a[p] - g.inner(p, x.v[p], d.v[p])).collect();
    Ok(g.integrate(&f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::AnalyticMetric;
    use crate::trig::seeded_rng;
    use std::f64::consts::PI;

    fn grid(n: usize) -> TorusGrid {
        TorusGrid::new(n, 2).unwrap()
    }

    #[test]
    fn constant_spinor_is_parallel_and_harmonic() {
        let gr = grid(16);
        let g = MetricField::flat(gr);
        let s = SpinorField::constant(gr, SpinStructure::TRIVIAL, &[[1.0, -2.0, 0.5, 3.0]]);
        assert_eq!(spin_derivative(&s, 0, &g).unwrap().max_abs(), 0.0);
        assert!(dirac(&s, &g).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn lichnerowicz_plane_wave() {
        let gr = grid(32);
        let g = MetricField::flat(gr);
        let s0 = [0.3, 1.0, -0.7, 0.2];
        let polys: Vec<TrigPoly> = s0.iter().map(|c| TrigPoly::cos([1.0, 0.0], *c)).collect();
        let s = SpinorField::from_trig(gr, SpinStructure::TRIVIAL, 1, &polys);
        let d2 = dirac(&dirac(&s, &g).unwrap(), &g).unwrap();
        let err = d2.axpy(-(2.0 * PI).powi(2), &s).max_abs();
        let h = gr.h();
        assert!(err < h * h * (2.0 * PI).powi(4), "{err}");
    }

    #[test]
    fn dirac_is_self_adjoint_for_weighted_product() {
        let gr = grid(16);
        let mut rng = seeded_rng(11, 0);
        let am = AnalyticMetric {
            u: TrigPoly::random(&mut rng, 2, 0.3, [0.0; 2]),
            nu1: TrigPoly::random(&mut rng, 1, 0.2, [0.0; 2]),
            nu2: TrigPoly::random(&mut rng, 1, 0.2, [0.0; 2]),
        };
        let g = am.sample(gr).unwrap();
        for spin in SpinStructure::all() {
            let s = SpinorField::random(&mut rng, gr, spin, 2, 2, 1.0);
            let t = SpinorField::random(&mut rng, gr, spin, 2, 2, 1.0);
            let a = dirac(&s, &g).unwrap().inner(&t, &g);
            let b = s.inner(&dirac(&t, &g).unwrap(), &g);
            assert!((a - b).abs() < 1e-11 * (a.abs() + 1.0), "{a} {b}");
        }
    }

    #[test]
    fn constant_conformal_rescale_is_exact() {
        let gr = grid(16);
        let mut rng = seeded_rng(12, 0);
        let g = MetricField::flat(gr);
        let s = SpinorField::random(&mut rng, gr, SpinStructure::new(-1, 1).unwrap(), 1, 2, 1.0);
        let d = dirac_conformal_check(&s, &vec![0.4; gr.len()], &g).unwrap();
        assert!(d < 1e-12, "{d}");
        assert_eq!(dirac_conformal_check(&s, &vec![0.0; gr.len()], &g).unwrap(), 0.0);
    }

    #[test]
    fn div_sigma_of_itself_is_half_gradient() {
        let gr = grid(16);
        let mut rng = seeded_rng(13, 0);
        let g = AnalyticMetric::conformal(TrigPoly::random(&mut rng, 1, 0.2, [0.0; 2])).sample(gr).unwrap();
        let s = SpinorField::random(&mut rng, gr, SpinStructure::TRIVIAL, 1, 2, 1.0);
        let v = div_sigma(&s, &s, &g).unwrap();
        let nabla = spin_derivatives(&s, &g).unwrap();
        for p in 0..gr.len() {
            let c0 = clifford::dot(nabla[0].at(p, 0), s.at(p, 0));
            let c1 = clifford::dot(nabla[1].at(p, 0), s.at(p, 0));
            let e = [g.frame(p, 0), g.frame(p, 1)];
            for mu in 0..2 {
                assert!((v.v[p][mu] - (c0 * e[0][mu] + c1 * e[1][mu])).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn translation_by_full_period_applies_twist() {
        let gr = grid(8);
        let mut rng = seeded_rng(14, 0);
        let spin = SpinStructure::new(-1, 1).unwrap();
        let s = SpinorField::random(&mut rng, gr, spin, 1, 1, 1.0);
        let t = s.translated([8, 0]);
        assert_eq!(t, s.scaled(-1.0));
        let u = s.translated([0, 8]);
        assert_eq!(u, s);
    }
}
