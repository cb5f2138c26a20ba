//! Metric fields on the torus grid: orthonormal frames, the Levi-Civita
//! connection form, integration, and the divergence operators on vector
//! fields and symmetric 2-tensors.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{compensated_sum, diff, TorusGrid};
use crate::trig::TrigPoly;

pub type M2 = [[f64; 2]; 2];

/// Symmetric 2×2 matrix stored as (a11, a12, a22).
pub type Sym = [f64; 3];

#[inline]
pub fn sym_to_m2(s: &Sym) -> M2 {
    [[s[0], s[1]], [s[1], s[2]]]
}

#[inline]
pub fn m2_to_sym(m: &M2) -> Sym {
    [m[0][0], 0.5 * (m[0][1] + m[1][0]), m[1][1]]
}

#[inline]
pub fn m2_mul(a: &M2, b: &M2) -> M2 {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

#[inline]
pub fn m2_vec(a: &M2, v: [f64; 2]) -> [f64; 2] {
    [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
}

#[inline]
pub fn m2_inv(a: &M2) -> M2 {
    let d = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    [[a[1][1] / d, -a[0][1] / d], [-a[1][0] / d, a[0][0] / d]]
}

#[inline]
pub fn m2_transpose(a: &M2) -> M2 {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

/// Principal square root of an SPD 2×2 matrix.
#[inline]
pub fn sym_sqrt(s: &Sym) -> Sym {
    let d = (s[0] * s[2] - s[1] * s[1]).sqrt();
    let t = (s[0] + s[2] + 2.0 * d).sqrt();
    [(s[0] + d) / t, s[1] / t, (s[2] + d) / t]
}

#[inline]
pub fn sym_inv(s: &Sym) -> Sym {
    let d = s[0] * s[2] - s[1] * s[1];
    [s[2] / d, -s[1] / d, s[0] / d]
}

#[inline]
pub fn sym_det(s: &Sym) -> f64 {
    s[0] * s[2] - s[1] * s[1]
}

/// Central derivative of a scalar field.
#[inline]
pub fn d_scalar(grid: &TorusGrid, axis: usize, f: &[f64]) -> Vec<f64> {
    diff(grid, axis, 1.0, 1, f)
}

#[derive(Clone, Debug)]
pub struct VectorField {
    pub grid: TorusGrid,
    pub v: Vec<[f64; 2]>,
}

#[derive(Clone, Debug)]
pub struct Sym2Field {
    pub grid: TorusGrid,
    pub k: Vec<Sym>,
}

impl VectorField {
    pub fn zeros(grid: TorusGrid) -> Self {
        VectorField { grid, v: vec![[0.0; 2]; grid.len()] }
    }

    pub fn constant(grid: TorusGrid, c: [f64; 2]) -> Self {
        VectorField { grid, v: vec![c; grid.len()] }
    }

    pub fn from_trig(grid: TorusGrid, x1: &TrigPoly, x2: &TrigPoly) -> Self {
        let a = x1.sample(&grid);
        let b = x2.sample(&grid);
        VectorField { grid, v: a.into_iter().zip(b).map(|(a, b)| [a, b]).collect() }
    }

    pub fn component(&self, mu: usize) -> Vec<f64> {
        self.v.iter().map(|x| x[mu]).collect()
    }
}

impl Sym2Field {
    pub fn zeros(grid: TorusGrid) -> Self {
        Sym2Field { grid, k: vec![[0.0; 3]; grid.len()] }
    }

    pub fn from_trig(grid: TorusGrid, k11: &TrigPoly, k12: &TrigPoly, k22: &TrigPoly) -> Self {
        let a = k11.sample(&grid);
        let b = k12.sample(&grid);
        let c = k22.sample(&grid);
        Sym2Field { grid, k: (0..grid.len()).map(|p| [a[p], b[p], c[p]]).collect() }
    }

    pub fn component(&self, c: usize) -> Vec<f64> {
        self.k.iter().map(|x| x[c]).collect()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Sym2Field { grid: self.grid, k: self.k.iter().map(|k| [s * k[0], s * k[1], s * k[2]]).collect() }
    }
}

/// A metric field with its derived caches.
#[derive(Clone, Debug)]
pub struct MetricField {
    pub grid: TorusGrid,
    pub g: Vec<Sym>,
    pub inv: Vec<Sym>,
    pub sqrt_det: Vec<f64>,
    /// b = H^{-1/2}; the frame vector E_α has coordinate components b[·][α].
    pub b: Vec<Sym>,
    /// b⁻¹ = g^{1/2}, mapping coordinate vectors to frame components.
    pub b_inv: Vec<Sym>,
    /// div_g(E_α) computed from stencil derivatives.
    pub div_frame: Vec<[f64; 2]>,
    /// ω₁₂(E_α) = g(∇_{E_α}E₁, E₂).
    pub omega12: Vec<[f64; 2]>,
    pub flat: bool,
}

impl MetricField {
    pub fn new(grid: TorusGrid, g: Vec<Sym>) -> Result<Self> {
        if g.len() != grid.len() {
            return Err(Error::Incompatible(format!("metric has {} points, grid {}", g.len(), grid.len())));
        }
        for (p, s) in g.iter().enumerate() {
            if !(s[0] > 0.0 && sym_det(s) > 0.0) || !s.iter().all(|x| x.is_finite()) {
                return Err(Error::NotSpd { i: p % grid.n, j: p / grid.n });
            }
        }
        let flat = g.iter().all(|s| *s == [1.0, 0.0, 1.0]);
        let inv: Vec<Sym> = g.iter().map(sym_inv).collect();
        let sqrt_det: Vec<f64> = g.iter().map(|s| sym_det(s).sqrt()).collect();
        let b_inv: Vec<Sym> = g.iter().map(sym_sqrt).collect();
        let b: Vec<Sym> = b_inv.iter().map(sym_inv).collect();
        let mut m = MetricField {
            grid,
            g,
            inv,
            sqrt_det,
            b,
            b_inv,
            div_frame: vec![[0.0; 2]; grid.len()],
            omega12: vec![[0.0; 2]; grid.len()],
            flat,
        };
        if !flat {
            let div: Vec<Vec<f64>> = (0..2).map(|a| m.div_vector_raw(|p| m.frame(p, a))).collect();
            m.div_frame = (0..grid.len()).map(|p| [div[0][p], div[1][p]]).collect();
            // div E₁ = ω₁₂(E₂) and div E₂ = −ω₁₂(E₁)
            m.omega12 = m.div_frame.iter().map(|d| [-d[1], d[0]]).collect();
        }
        Ok(m)
    }

    pub fn flat(grid: TorusGrid) -> Self {
        Self::new(grid, vec![[1.0, 0.0, 1.0]; grid.len()]).expect("flat metric")
    }

    /// g = e^{2u} δ.
    pub fn conformal(grid: TorusGrid, u: &[f64]) -> Self {
        let g = u.iter().map(|u| {
            let e = (2.0 * u).exp();
            [e, 0.0, e]
        });
        Self::new(grid, g.collect()).expect("conformal metric")
    }

    /// e^{2u} g for the same grid.
    pub fn conformal_rescale(&self, u: &[f64]) -> Self {
        let g = self.g.iter().zip(u).map(|(s, u)| {
            let e = (2.0 * u).exp();
            [e * s[0], e * s[1], e * s[2]]
        });
        Self::new(self.grid, g.collect()).expect("rescaled metric")
    }

    /// g + t k.
    pub fn perturbed(&self, k: &Sym2Field, t: f64) -> Result<Self> {
        self.grid.check_same(&k.grid)?;
        let g = self.g.iter().zip(&k.k).map(|(s, k)| [s[0] + t * k[0], s[1] + t * k[1], s[2] + t * k[2]]);
        Self::new(self.grid, g.collect())
    }

    /// Coordinate components of E_α at point p.
    #[inline]
    pub fn frame(&self, p: usize, alpha: usize) -> [f64; 2] {
        let b = &self.b[p];
        if alpha == 0 {
            [b[0], b[1]]
        } else {
            [b[1], b[2]]
        }
    }

    /// Frame components of a coordinate vector: g^{1/2} X.
    #[inline]
    pub fn to_frame(&self, p: usize, x: [f64; 2]) -> [f64; 2] {
        m2_vec(&sym_to_m2(&self.b_inv[p]), x)
    }

    #[inline]
    pub fn lower(&self, p: usize, x: [f64; 2]) -> [f64; 2] {
        m2_vec(&sym_to_m2(&self.g[p]), x)
    }

    #[inline]
    pub fn raise(&self, p: usize, w: [f64; 2]) -> [f64; 2] {
        m2_vec(&sym_to_m2(&self.inv[p]), w)
    }

    #[inline]
    pub fn inner(&self, p: usize, x: [f64; 2], y: [f64; 2]) -> f64 {
        let l = self.lower(p, x);
        l[0] * y[0] + l[1] * y[1]
    }

    /// Is g = e^{2u}δ to the given relative tolerance? Returns u if so.
    pub fn conformal_factor(&self) -> Option<Vec<f64>> {
        let mut u = Vec::with_capacity(self.grid.len());
        for s in &self.g {
            let scale = s[0].abs().max(s[2].abs());
            if s[1].abs() > 1e-12 * scale || (s[0] - s[2]).abs() > 1e-12 * scale {
                return None;
            }
            u.push(0.5 * s[0].ln());
        }
        Some(u)
    }

    /// (1/√g) Σ_μ D_μ(√g Xᵘ) for the coordinate vector field given pointwise.
    fn div_vector_raw<F: Fn(usize) -> [f64; 2] + Sync>(&self, x: F) -> Vec<f64> {
        let n = self.grid.len();
        let f1: Vec<f64> = (0..n).map(|p| self.sqrt_det[p] * x(p)[0]).collect();
        let f2: Vec<f64> = (0..n).map(|p| self.sqrt_det[p] * x(p)[1]).collect();
        let d1 = d_scalar(&self.grid, 0, &f1);
        let d2 = d_scalar(&self.grid, 1, &f2);
        (0..n).map(|p| (d1[p] + d2[p]) / self.sqrt_det[p]).collect()
    }

    /// ∫ f dvol_g.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        let h = self.grid.h();
        compensated_sum(f.iter().zip(&self.sqrt_det).map(|(f, s)| f * s)) * h * h
    }

    pub fn volume(&self) -> f64 {
        self.integrate(&vec![1.0; self.grid.len()])
    }
}

pub fn integrate(f: &[f64], g: &MetricField) -> Result<f64> {
    if f.len() != g.grid.len() {
        return Err(Error::Incompatible("scalar field and metric sizes differ".into()));
    }
    Ok(g.integrate(f))
}

pub fn div_vector(x: &VectorField, g: &MetricField) -> Result<Vec<f64>> {
    x.grid.check_same(&g.grid)?;
    Ok(g.div_vector_raw(|p| x.v[p]))
}

/// Gradient vector field g^{μν} D_ν f.
pub fn grad(f: &[f64], g: &MetricField) -> VectorField {
    let d1 = d_scalar(&g.grid, 0, f);
    let d2 = d_scalar(&g.grid, 1, f);
    VectorField { grid: g.grid, v: (0..g.grid.len()).map(|p| g.raise(p, [d1[p], d2[p]])).collect() }
}

/// Divergence of a symmetric 2-tensor, returned as covector components.
pub fn div_sym2(k: &Sym2Field, g: &MetricField) -> Result<VectorField> {
    k.grid.check_same(&g.grid)?;
    let grid = g.grid;
    let n = grid.len();
    // K^α_β = g^{αμ} k_{μβ}
    let kk: Vec<M2> = (0..n).map(|p| m2_mul(&sym_to_m2(&g.inv[p]), &sym_to_m2(&k.k[p]))).collect();
    let mut out = vec![[0.0; 2]; n];
    for beta in 0..2 {
        let f1: Vec<f64> = (0..n).map(|p| g.sqrt_det[p] * kk[p][0][beta]).collect();
        let f2: Vec<f64> = (0..n).map(|p| g.sqrt_det[p] * kk[p][1][beta]).collect();
        let d1 = d_scalar(&grid, 0, &f1);
        let d2 = d_scalar(&grid, 1, &f2);
        for p in 0..n {
            out[p][beta] = (d1[p] + d2[p]) / g.sqrt_det[p];
        }
    }
    let dg = metric_derivatives(g);
    for p in 0..n {
        let gi = sym_to_m2(&g.inv[p]);
        for beta in 0..2 {
            let dgb = sym_to_m2(&dg[beta][p]);
            // ½ g^{αη} (∂_β g_{ηγ}) K^γ_α
            let mut s = 0.0;
            for a in 0..2 {
                for e in 0..2 {
                    for c in 0..2 {
                        s += gi[a][e] * dgb[e][c] * kk[p][c][a];
                    }
                }
            }
            out[p][beta] -= 0.5 * s;
        }
    }
    Ok(VectorField { grid, v: out })
}

/// Stencil derivatives ∂_μ g_{αβ}, indexed [μ][point].
pub fn metric_derivatives(g: &MetricField) -> [Vec<Sym>; 2] {
    let grid = g.grid;
    let comps: Vec<Vec<f64>> = (0..3).map(|c| g.g.iter().map(|s| s[c]).collect()).collect();
    let mk = |axis: usize| -> Vec<Sym> {
        let d: Vec<Vec<f64>> = comps.iter().map(|f| d_scalar(&grid, axis, f)).collect();
        (0..grid.len()).map(|p| [d[0][p], d[1][p], d[2][p]]).collect()
    };
    [mk(0), mk(1)]
}

/// (L_X g)_{αβ} = X^γ ∂_γ g_{αβ} + g_{γβ} ∂_α X^γ + g_{αγ} ∂_β X^γ.
pub fn lie_metric(x: &VectorField, g: &MetricField) -> Result<Sym2Field> {
    x.grid.check_same(&g.grid)?;
    let grid = g.grid;
    let dg = metric_derivatives(g);
    let x1 = x.component(0);
    let x2 = x.component(1);
    // dx[μ][γ] = ∂_μ X^γ
    let dx = [
        [d_scalar(&grid, 0, &x1), d_scalar(&grid, 0, &x2)],
        [d_scalar(&grid, 1, &x1), d_scalar(&grid, 1, &x2)],
    ];
    let k = (0..grid.len())
        .map(|p| {
            let gm = sym_to_m2(&g.g[p]);
            let xv = x.v[p];
            let mut l = [[0.0; 2]; 2];
            for a in 0..2 {
                for b in 0..2 {
                    let mut s = xv[0] * sym_to_m2(&dg[0][p])[a][b] + xv[1] * sym_to_m2(&dg[1][p])[a][b];
                    for c in 0..2 {
                        s += gm[c][b] * dx[a][c][p] + gm[a][c] * dx[b][c][p];
                    }
                    l[a][b] = s;
                }
            }
            m2_to_sym(&l)
        })
        .collect();
    Ok(Sym2Field { grid, k })
}

/// Almost complex structure J_M with g(J X, Y) = dvol_g(X, Y).
pub fn almost_complex_at(g: &Sym, sqrt_det: f64) -> M2 {
    // J = √g · g⁻¹ · [[0,−1],[1,0]]
    let gi = sym_to_m2(&sym_inv(g));
    let r = [[0.0, -1.0], [1.0, 0.0]];
    let j = m2_mul(&gi, &r);
    [[sqrt_det * j[0][0], sqrt_det * j[0][1]], [sqrt_det * j[1][0], sqrt_det * j[1][1]]]
}

pub fn almost_complex(g: &MetricField) -> Vec<M2> {
    (0..g.grid.len()).map(|p| almost_complex_at(&g.g[p], g.sqrt_det[p])).collect()
}

/// Frame components b k b of a coordinate 2-tensor.
pub fn sym2_to_frame(k: &Sym, b: &Sym) -> Sym {
    let bm = sym_to_m2(b);
    m2_to_sym(&m2_mul(&m2_mul(&bm, &sym_to_m2(k)), &bm))
}

/// Coordinate components of a tensor given in frame components.
pub fn sym2_from_frame(t: &Sym, b_inv: &Sym) -> Sym {
    let bi = sym_to_m2(b_inv);
    m2_to_sym(&m2_mul(&m2_mul(&bi, &sym_to_m2(t)), &bi))
}

/// g-trace g^{μν} k_{μν}.
#[inline]
pub fn trace_g(k: &Sym, inv: &Sym) -> f64 {
    inv[0] * k[0] + 2.0 * inv[1] * k[1] + inv[2] * k[2]
}

/// Pointwise ⟨k, l⟩_g for frame-component tensors (plain Frobenius product).
#[inline]
pub fn frame_inner(k: &Sym, l: &Sym) -> f64 {
    k[0] * l[0] + 2.0 * k[1] * l[1] + k[2] * l[2]
}

/// Angle θ(x) of the rotation taking the stored g'-frame to the frame
/// transported from g by b^g_{g'}, i.e. E_transported = E' · R(θ).
/// Zero whenever g' is pointwise conformal to g.
pub fn transport_angle(g: &MetricField, g_new: &MetricField) -> Vec<f64> {
    (0..g.grid.len())
        .into_par_iter()
        .map(|p| {
            let b0 = sym_to_m2(&g.b[p]);
            let m = m2_to_sym(&m2_mul(&m2_mul(&b0, &sym_to_m2(&g_new.g[p])), &b0));
            let m_inv_sqrt = sym_to_m2(&sym_inv(&sym_sqrt(&m)));
            let r = m2_mul(&m2_mul(&sym_to_m2(&g_new.b_inv[p]), &b0), &m_inv_sqrt);
            r[1][0].atan2(r[0][0])
        })
        .collect()
}

/// Metric built from trigonometric data: g = e^{2u} [[1+ν₁, ν₂], [ν₂, 1−ν₁]].
#[derive(Clone, Debug)]
pub struct AnalyticMetric {
    pub u: TrigPoly,
    pub nu1: TrigPoly,
    pub nu2: TrigPoly,
}

impl AnalyticMetric {
    pub fn flat() -> Self {
        AnalyticMetric { u: TrigPoly::default(), nu1: TrigPoly::default(), nu2: TrigPoly::default() }
    }

    pub fn conformal(u: TrigPoly) -> Self {
        AnalyticMetric { u, nu1: TrigPoly::default(), nu2: TrigPoly::default() }
    }

    /// Seeded random metric with ‖u‖∞ ≤ amp_u and ‖ν_i‖∞ ≤ amp_nu (sup taken
    /// on a 64² sampling grid), mean-free u.
    pub fn random<R: rand::Rng>(rng: &mut R, band: usize, amp_u: f64, amp_nu: f64) -> Self {
        let probe = TorusGrid { n: 64, order: 2 };
        let mut norm = |amp: f64| {
            let mut p = TrigPoly::random(rng, band, 1.0, [0.0; 2]);
            p.constant = 0.0;
            let s = p.sup_on(&probe);
            if s > 0.0 && amp > 0.0 {
                p.scaled(amp / s)
            } else {
                TrigPoly::default()
            }
        };
        let u = norm(amp_u);
        let nu1 = norm(amp_nu);
        let nu2 = norm(amp_nu);
        AnalyticMetric { u, nu1, nu2 }
    }

    pub fn at(&self, x: [f64; 2]) -> Sym {
        let e = (2.0 * self.u.eval(x)).exp();
        let (a, b) = (self.nu1.eval(x), self.nu2.eval(x));
        [e * (1.0 + a), e * b, e * (1.0 - a)]
    }

    /// Analytic ∂_μ g.
    pub fn deriv(&self, x: [f64; 2], mu: u32) -> Sym {
        let (m1, m2) = if mu == 0 { (1, 0) } else { (0, 1) };
        let e = (2.0 * self.u.eval(x)).exp();
        let du = self.u.deriv(x, m1, m2);
        let (a, b) = (self.nu1.eval(x), self.nu2.eval(x));
        let (da, db) = (self.nu1.deriv(x, m1, m2), self.nu2.deriv(x, m1, m2));
        [
            e * (2.0 * du * (1.0 + a) + da),
            e * (2.0 * du * b + db),
            e * (2.0 * du * (1.0 - a) - da),
        ]
    }

    pub fn sample(&self, grid: TorusGrid) -> Result<MetricField> {
        let g = (0..grid.len()).map(|p| self.at(grid.coords(p))).collect();
        MetricField::new(grid, g)
    }
}

/// ∫⟨L_X g, k⟩ dvol + 2∫⟨X, div k⟩ dvol with every piece discrete.
pub fn adjunction_defect(x: &VectorField, k: &Sym2Field, g: &MetricField) -> Result<f64> {
    let l = lie_metric(x, g)?;
    adjunction_pairing(&l, x, k, g)
}

/// Same identity with L_X g evaluated analytically from the metric data and
/// X = (x1, x2), against the discrete divergence.
pub fn adjunction_defect_analytic(am: &AnalyticMetric, x1: &TrigPoly, x2: &TrigPoly, k: &Sym2Field, g: &MetricField) -> Result<f64> {
    let grid = g.grid;
    let l: Vec<Sym> = (0..grid.len())
        .map(|p| {
            let c = grid.coords(p);
            let gm = sym_to_m2(&am.at(c));
            let xv = [x1.eval(c), x2.eval(c)];
            let dx = [[x1.deriv(c, 1, 0), x1.deriv(c, 0, 1)], [x2.deriv(c, 1, 0), x2.deriv(c, 0, 1)]];
            let d0 = sym_to_m2(&am.deriv(c, 0));
            let d1 = sym_to_m2(&am.deriv(c, 1));
            let mut out = [[0.0; 2]; 2];
            for a in 0..2 {
                for b in 0..2 {
                    out[a][b] = xv[0] * d0[a][b] + xv[1] * d1[a][b];
                    for e in 0..2 {
                        out[a][b] += gm[e][b] * dx[e][a] + gm[a][e] * dx[e][b];
                    }
                }
            }
            m2_to_sym(&out)
        })
        .collect();
    let x = VectorField::from_trig(grid, x1, x2);
    adjunction_pairing(&Sym2Field { grid, k: l }, &x, k, g)
}

fn adjunction_pairing(l: &Sym2Field, x: &VectorField, k: &Sym2Field, g: &MetricField) -> Result<f64> {
    k.grid.check_same(&g.grid)?;
    let dk = div_sym2(k, g)?;
    let f: Vec<f64> = (0..g.grid.len())
        .map(|p| {
            let a = frame_inner(&sym2_to_frame(&l.k[p], &g.b[p]), &sym2_to_frame(&k.k[p], &g.b[p]));
            a + 2.0 * (x.v[p][0] * dk.v[p][0] + x.v[p][1] * dk.v[p][1])
        })
        .collect();
    Ok(g.integrate(&f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trig::seeded_rng;
    use std::f64::consts::PI;

    fn grid(n: usize) -> TorusGrid {
        TorusGrid::new(n, 2).unwrap()
    }

    #[test]
    fn integrate_examples() {
        let g = MetricField::flat(grid(16));
        assert!((g.volume() - 1.0).abs() < 1e-14);
        let gc = MetricField::conformal(grid(16), &vec![0.3; 256]);
        assert!((gc.volume() - 0.6f64.exp()).abs() < 1e-13);
        let f = grid(16).map_points(|x| (2.0 * PI * x[0]).sin().powi(2));
        assert!((g.integrate(&f) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn frames_are_orthonormal() {
        let mut rng = seeded_rng(1, 0);
        let am = AnalyticMetric {
            u: TrigPoly::random(&mut rng, 2, 0.3, [0.0; 2]),
            nu1: TrigPoly::random(&mut rng, 1, 0.2, [0.0; 2]),
            nu2: TrigPoly::random(&mut rng, 1, 0.2, [0.0; 2]),
        };
        let g = am.sample(grid(16)).unwrap();
        for p in 0..g.grid.len() {
            for a in 0..2 {
                for b in 0..2 {
                    let ip = g.inner(p, g.frame(p, a), g.frame(p, b));
                    let d = if a == b { 1.0 } else { 0.0 };
                    assert!((ip - d).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn conformal_frame_and_connection() {
        let gr = grid(32);
        let u = TrigPoly::sin([1.0, 0.0], 0.1);
        let g = MetricField::conformal(gr, &u.sample(&gr));
        let mut err = 0.0f64;
        for p in 0..gr.len() {
            let x = gr.coords(p);
            let eu = (-u.eval(x)).exp();
            assert!((g.b[p][0] - eu).abs() < 1e-14 && g.b[p][1].abs() < 1e-14);
            // ω₁₂(E₁) = −e^{−u}u₂, ω₁₂(E₂) = e^{−u}u₁
            err = err.max((g.omega12[p][1] - eu * u.deriv(x, 1, 0)).abs());
            err = err.max((g.omega12[p][0] + eu * u.deriv(x, 0, 1)).abs());
        }
        assert!(err < 0.1 * 4.0 * PI.powi(3) / (32.0 * 32.0), "{err}");
    }

    #[test]
    fn rejects_non_spd() {
        let gr = grid(8);
        let mut g = vec![[1.0, 0.0, 1.0]; 64];
        g[9] = [1.0, 2.0, 1.0];
        match MetricField::new(gr, g) {
            Err(Error::NotSpd { i, j }) => assert_eq!((i, j), (1, 1)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn div_and_lie_examples() {
        let gr = grid(64);
        let g = MetricField::flat(gr);
        let x = VectorField::from_trig(gr, &TrigPoly::sin([1.0, 0.0], 1.0), &TrigPoly::default());
        let d = div_vector(&x, &g).unwrap();
        let h = gr.h();
        for p in 0..gr.len() {
            let x1 = gr.coords(p)[0];
            assert!((d[p] - (2.0 * PI * x1).cos() * (2.0 * PI * h).sin() / h).abs() < 1e-10);
        }
        let k = Sym2Field { grid: gr, k: g.g.clone() };
        let dk = div_sym2(&k, &g).unwrap();
        assert!(dk.v.iter().all(|v| v[0].abs() < 1e-12 && v[1].abs() < 1e-12));
        let y = VectorField::from_trig(gr, &TrigPoly::sin([0.0, 1.0], 1.0), &TrigPoly::default());
        let l = lie_metric(&y, &g).unwrap();
        for p in 0..gr.len() {
            let x2 = gr.coords(p)[1];
            assert_eq!(l.k[p][0], 0.0);
            assert!((l.k[p][1] - (2.0 * PI * x2).cos() * (2.0 * PI * h).sin() / h).abs() < 1e-10);
        }
    }

    #[test]
    fn almost_complex_squares_to_minus_one() {
        let mut rng = seeded_rng(2, 0);
        let am = AnalyticMetric {
            u: TrigPoly::random(&mut rng, 2, 0.3, [0.0; 2]),
            nu1: TrigPoly::random(&mut rng, 1, 0.2, [0.0; 2]),
            nu2: TrigPoly::random(&mut rng, 1, 0.2, [0.0; 2]),
        };
        let g = am.sample(grid(16)).unwrap();
        for (p, j) in almost_complex(&g).iter().enumerate() {
            let j2 = m2_mul(j, j);
            assert!((j2[0][0] + 1.0).abs() < 1e-12 && (j2[1][1] + 1.0).abs() < 1e-12);
            assert!(j2[0][1].abs() < 1e-12 && j2[1][0].abs() < 1e-12);
            // g(JX, Y) = dvol(X, Y) on the coordinate basis
            let je1 = [j[0][0], j[1][0]];
            let v = g.inner(p, je1, [0.0, 1.0]);
            assert!((v - g.sqrt_det[p]).abs() < 1e-12);
        }
        let flat = almost_complex(&MetricField::flat(grid(8)));
        assert_eq!(flat[0], [[0.0, -1.0], [1.0, 0.0]]);
    }

    #[test]
    fn transport_angle_vanishes_for_conformal_change() {
        let mut rng = seeded_rng(4, 0);
        let am = AnalyticMetric {
            u: TrigPoly::random(&mut rng, 1, 0.3, [0.0; 2]),
            nu1: TrigPoly::random(&mut rng, 1, 0.2, [0.0; 2]),
            nu2: TrigPoly::random(&mut rng, 1, 0.2, [0.0; 2]),
        };
        let gr = grid(8);
        let g = am.sample(gr).unwrap();
        let u = vec![0.4; gr.len()];
        let th = transport_angle(&g, &g.conformal_rescale(&u));
        assert!(th.iter().all(|t| t.abs() < 1e-13));
    }
}
