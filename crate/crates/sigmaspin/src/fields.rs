//! Targets, maps with winding, vector spinors, gravitinos, the projections
//! P and Q, the twisted Dirac operator and the target curvature terms.
//!
//! Maps into S² are stored as ambient unit vectors and vector spinors along
//! them as ambient 3-column fields tangent at every point; covariant
//! derivatives are tangential projections of ambient ones.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::clifford::{self, Spinor};
use crate::error::{Error, Result};
use crate::geometry::{d_scalar, MetricField};
use crate::grid::TorusGrid;
use crate::spin::{dirac, SpinStructure, SpinorField};
use crate::trig::TrigPoly;

/// Section of S ⊗ φ*TN, one spinor column per (ambient) target index.
pub type VectorSpinorField = SpinorField;
/// Section of S ⊗ TM, one spinor column per frame index.
pub type GravitinoField = SpinorField;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Target {
    FlatRn { dim: usize },
    FlatTorus { dim: usize },
    Sphere2,
}

impl Target {
    /// Number of stored components of the map (ambient dimension).
    pub fn dim(&self) -> usize {
        match self {
            Target::FlatRn { dim } | Target::FlatTorus { dim } => *dim,
            Target::Sphere2 => 3,
        }
    }

    pub fn is_flat(&self) -> bool {
        !matches!(self, Target::Sphere2)
    }

    pub fn label(&self) -> String {
        match self {
            Target::FlatRn { dim } => format!("R^{dim}"),
            Target::FlatTorus { dim } => format!("T^{dim}"),
            Target::Sphere2 => "S^2".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MapField {
    pub grid: TorusGrid,
    pub target: Target,
    /// Rows of the integer winding matrix A (flat torus only).
    pub winding: Vec<[i64; 2]>,
    /// Periodic part p (flat targets) or unit vectors (sphere), point-major.
    pub values: Vec<f64>,
}

impl MapField {
    pub fn constant(grid: TorusGrid, target: Target, value: &[f64]) -> Self {
        let d = target.dim();
        assert_eq!(value.len(), d);
        let winding = if matches!(target, Target::FlatTorus { .. }) { vec![[0, 0]; d] } else { vec![] };
        MapField { grid, target, winding, values: value.iter().cycle().take(d * grid.len()).copied().collect() }
    }

    /// φ(x) = A x + p(x) into a flat torus.
    pub fn winding_map(grid: TorusGrid, winding: Vec<[i64; 2]>, periodic: Option<Vec<f64>>) -> Self {
        let d = winding.len();
        let values = periodic.unwrap_or_else(|| vec![0.0; d * grid.len()]);
        assert_eq!(values.len(), d * grid.len());
        MapField { grid, target: Target::FlatTorus { dim: d }, winding, values }
    }

    /// Sphere map from spherical angles θ (polar) and ϕ (azimuth) fields.
    pub fn sphere_from_angles(grid: TorusGrid, theta: &[f64], phi: &[f64]) -> Self {
        let mut values = Vec::with_capacity(3 * grid.len());
        for p in 0..grid.len() {
            let (st, ct) = theta[p].sin_cos();
            let (sp, cp) = phi[p].sin_cos();
            values.extend_from_slice(&[st * cp, st * sp, ct]);
        }
        MapField { grid, target: Target::Sphere2, winding: vec![], values }
    }

    /// The equator wrapped once along x₁: a closed geodesic, hence harmonic.
    pub fn sphere_equator(grid: TorusGrid) -> Self {
        let theta = vec![0.5 * PI; grid.len()];
        let phi = grid.map_points(|x| 2.0 * PI * x[0]);
        Self::sphere_from_angles(grid, &theta, &phi)
    }

    /// Seeded band-limited random map. Flat targets get a random periodic
    /// part on top of the given winding; sphere maps perturb the angles of
    /// the equator map.
    pub fn random<R: Rng>(rng: &mut R, grid: TorusGrid, target: Target, winding: Option<Vec<[i64; 2]>>, band: usize, amp: f64) -> Self {
        match target {
            Target::Sphere2 => {
                let a = TrigPoly::random(rng, band, amp, [0.0; 2]).sample(&grid);
                let b = TrigPoly::random(rng, band, amp, [0.0; 2]).sample(&grid);
                let theta: Vec<f64> = a.iter().map(|a| 0.5 * PI + a).collect();
                let phi: Vec<f64> = grid.map_points(|x| 2.0 * PI * x[0]).iter().zip(&b).map(|(x, b)| x + b).collect();
                Self::sphere_from_angles(grid, &theta, &phi)
            }
            _ => {
                let d = target.dim();
                let polys: Vec<Vec<f64>> = (0..d).map(|_| TrigPoly::random(rng, band, amp, [0.0; 2]).sample(&grid)).collect();
                let mut values = vec![0.0; d * grid.len()];
                for p in 0..grid.len() {
                    for j in 0..d {
                        values[p * d + j] = polys[j][p];
                    }
                }
                let winding = match target {
                    Target::FlatTorus { .. } => winding.unwrap_or_else(|| vec![[0, 0]; d]),
                    _ => vec![],
                };
                MapField { grid, target, winding, values }
            }
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.target.dim()
    }

    #[inline]
    pub fn value(&self, p: usize) -> &[f64] {
        let d = self.dim();
        &self.values[p * d..(p + 1) * d]
    }

    /// Point value including the winding part (flat torus: A x + p).
    pub fn full_value(&self, p: usize) -> Vec<f64> {
        let x = self.grid.coords(p);
        let mut v = self.value(p).to_vec();
        for (j, row) in self.winding.iter().enumerate() {
            v[j] += row[0] as f64 * x[0] + row[1] as f64 * x[1];
        }
        v
    }

    /// Coordinate derivatives D_μ φ (winding included), point-major.
    pub fn coord_derivatives(&self) -> [Vec<f64>; 2] {
        let d = self.dim();
        let n = self.grid.len();
        let mut out = [vec![0.0; d * n], vec![0.0; d * n]];
        for j in 0..d {
            let comp: Vec<f64> = (0..n).map(|p| self.values[p * d + j]).collect();
            for mu in 0..2 {
                let dd = d_scalar(&self.grid, mu, &comp);
                let a = self.winding.get(j).map(|r| r[mu] as f64).unwrap_or(0.0);
                for p in 0..n {
                    out[mu][p * d + j] = dd[p] + a;
                }
            }
        }
        out
    }

    /// φ moved along the tangent field v by ε: linear for flat targets,
    /// normalized for the sphere.
    pub fn moved(&self, v: &[f64], eps: f64) -> MapField {
        let mut out = self.clone();
        out.values.iter_mut().zip(v).for_each(|(x, v)| *x += eps * v);
        if let Target::Sphere2 = self.target {
            for c in out.values.chunks_mut(3) {
                let r = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
                c.iter_mut().for_each(|x| *x /= r);
            }
        }
        out
    }

    /// Grid translation of the map (winding part is translation-equivariant
    /// up to a constant, which is added to p).
    pub fn translated(&self, steps: [isize; 2]) -> MapField {
        let d = self.dim();
        let n = self.grid.len();
        let mut out = self.clone();
        let h = self.grid.h();
        for p in 0..n {
            let (q1, w1) = self.grid.neighbour(p, 0, steps[0]);
            let (q, w2) = self.grid.neighbour(q1, 1, steps[1]);
            let _ = (w1, w2);
            for j in 0..d {
                let mut v = self.values[q * d + j];
                if let Some(r) = self.winding.get(j) {
                    v += (r[0] as f64 * steps[0] as f64 + r[1] as f64 * steps[1] as f64) * h;
                }
                out.values[p * d + j] = v;
            }
        }
        out
    }

    /// Project an ambient field onto the tangent spaces (sphere) or return it
    /// unchanged (flat targets).
    pub fn project_vectors(&self, v: &[f64]) -> Vec<f64> {
        match self.target {
            Target::Sphere2 => {
                let mut out = v.to_vec();
                for (p, c) in out.chunks_mut(3).enumerate() {
                    let f = self.value(p);
                    let s = f[0] * c[0] + f[1] * c[1] + f[2] * c[2];
                    for j in 0..3 {
                        c[j] -= s * f[j];
                    }
                }
                out
            }
            _ => v.to_vec(),
        }
    }

    /// Tangential projection of a vector spinor, column index = ambient index.
    pub fn project_spinors(&self, psi: &SpinorField) -> SpinorField {
        match self.target {
            Target::Sphere2 => {
                let mut out = psi.clone();
                out.data.par_chunks_mut(12).enumerate().for_each(|(p, o)| {
                    let f = self.value(p);
                    for a in 0..4 {
                        let s = f[0] * o[a] + f[1] * o[4 + a] + f[2] * o[8 + a];
                        for j in 0..3 {
                            o[4 * j + a] -= s * f[j];
                        }
                    }
                });
                out
            }
            _ => psi.clone(),
        }
    }

    pub fn sphere_defect(&self) -> f64 {
        match self.target {
            Target::Sphere2 => self
                .values
                .chunks(3)
                .map(|c| ((c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt() - 1.0).abs())
                .fold(0.0, f64::max),
            _ => 0.0,
        }
    }
}

/// φ_*E_α, stored as `[p][j][α]` flattened: index (p·dim + j)·2 + α.
#[derive(Clone, Debug)]
pub struct Pushforward {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl Pushforward {
    #[inline]
    pub fn get(&self, p: usize, j: usize, alpha: usize) -> f64 {
        self.data[(p * self.dim + j) * 2 + alpha]
    }

    #[inline]
    pub fn column(&self, p: usize, alpha: usize) -> Vec<f64> {
        (0..self.dim).map(|j| self.get(p, j, alpha)).collect()
    }
}

pub fn pushforward(phi: &MapField, g: &MetricField) -> Result<Pushforward> {
    phi.grid.check_same(&g.grid)?;
    let d = phi.dim();
    let dphi = phi.coord_derivatives();
    let mut data = vec![0.0; d * 2 * g.grid.len()];
    data.par_chunks_mut(2 * d).enumerate().for_each(|(p, o)| {
        let e = [g.frame(p, 0), g.frame(p, 1)];
        for j in 0..d {
            for a in 0..2 {
                o[j * 2 + a] = e[a][0] * dphi[0][p * d + j] + e[a][1] * dphi[1][p * d + j];
            }
        }
    });
    Ok(Pushforward { dim: d, data })
}

/// (Pχ, Qχ) with (Qχ)^β = −½Σ_α γ_αγ_β χ^α and (Pχ)^β = −½Σ_α γ_βγ_α χ^α.
pub fn projections_pq(chi: &GravitinoField) -> (GravitinoField, GravitinoField) {
    assert_eq!(chi.cols, 2, "gravitino must have two columns");
    let q = apply_q(chi);
    let p = chi.axpy(-1.0, &q);
    (p, q)
}

pub fn apply_q(chi: &GravitinoField) -> GravitinoField {
    chi.map_spinors(|p, beta, _| {
        let mut out = [0.0; 4];
        for alpha in 0..2 {
            let v = clifford::gamma_apply(alpha, &clifford::gamma_apply(beta, chi.at(p, alpha)));
            for k in 0..4 {
                out[k] -= 0.5 * v[k];
            }
        }
        out
    })
}

pub fn apply_p(chi: &GravitinoField) -> GravitinoField {
    chi.axpy(-1.0, &apply_q(chi))
}

/// |Qχ|² pointwise.
pub fn q_norm_sq(chi: &GravitinoField) -> Vec<f64> {
    apply_q(chi).dot_pointwise(chi)
}

/// (1 ⊗ φ_*) applied to a gravitino-shaped field: column j is Σ_β ζ^β (φ_*e_β)^j.
pub fn contract_pushforward(zeta: &GravitinoField, dphi: &Pushforward) -> VectorSpinorField {
    let d = dphi.dim;
    let mut out = SpinorField::zeros(zeta.grid, zeta.spin, d);
    out.data.par_chunks_mut(4 * d).enumerate().for_each(|(p, o)| {
        for j in 0..d {
            for b in 0..2 {
                let c = dphi.get(p, j, b);
                let z = zeta.at(p, b);
                for k in 0..4 {
                    o[4 * j + k] += c * z[k];
                }
            }
        }
    });
    out
}

/// D̸ψ: column-wise Dirac operator, tangentially projected for the sphere.
pub fn twisted_dirac(psi: &VectorSpinorField, phi: &MapField, g: &MetricField) -> Result<VectorSpinorField> {
    check_psi(psi, phi)?;
    let d = dirac(psi, g)?;
    Ok(phi.project_spinors(&d))
}

pub fn check_psi(psi: &VectorSpinorField, phi: &MapField) -> Result<()> {
    psi.grid.check_same(&phi.grid)?;
    if psi.cols != phi.dim() {
        return Err(Error::Incompatible(format!(
            "vector spinor has {} columns but target {} needs {}",
            psi.cols,
            phi.target.label(),
            phi.dim()
        )));
    }
    Ok(())
}

/// Target curvature contributions Rm(ψ), SR(ψ) and S∇R(ψ).
pub struct CurvatureTerms {
    pub rm: Vec<f64>,
    pub sr: VectorSpinorField,
    /// Identically zero for all implemented targets (parallel curvature).
    pub snr: Vec<f64>,
}

pub fn curvature_terms(psi: &VectorSpinorField, phi: &MapField) -> Result<CurvatureTerms> {
    check_psi(psi, phi)?;
    let n = psi.grid.len();
    let d = phi.dim();
    match phi.target {
        Target::Sphere2 => {
            let mut rm = vec![0.0; n];
            let mut sr = psi.zeros_like();
            rm.par_iter_mut().zip(sr.data.par_chunks_mut(12)).enumerate().for_each(|(p, (r, o))| {
                let mut gram = [[0.0; 3]; 3];
                for i in 0..3 {
                    for k in 0..3 {
                        gram[i][k] = clifford::dot(psi.at(p, i), psi.at(p, k));
                    }
                }
                let tr = gram[0][0] + gram[1][1] + gram[2][2];
                let sq: f64 = gram.iter().flatten().map(|x| x * x).sum();
                *r = tr * tr - sq;
                for i in 0..3 {
                    for a in 0..4 {
                        let mut v = tr * psi.at(p, i)[a];
                        for k in 0..3 {
                            v -= gram[i][k] * psi.at(p, k)[a];
                        }
                        o[4 * i + a] = v;
                    }
                }
            });
            Ok(CurvatureTerms { rm, sr, snr: vec![0.0; n * d] })
        }
        _ => Ok(CurvatureTerms { rm: vec![0.0; n], sr: psi.zeros_like(), snr: vec![0.0; n * d] }),
    }
}

/// Random vector spinor along φ (tangent for the sphere).
pub fn random_vector_spinor<R: Rng>(rng: &mut R, phi: &MapField, spin: SpinStructure, band: usize, amp: f64) -> VectorSpinorField {
    let s = SpinorField::random(rng, phi.grid, spin, phi.dim(), band, amp);
    phi.project_spinors(&s)
}

/// Constant-in-space spinor columns helper used by twistor constructions.
pub fn spinor_columns(grid: TorusGrid, spin: SpinStructure, cols: &[Spinor]) -> SpinorField {
    SpinorField::constant(grid, spin, cols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trig::seeded_rng;

    #[test]
    fn projections_are_complementary() {
        let gr = TorusGrid::new(8, 2).unwrap();
        let mut rng = seeded_rng(21, 0);
        let chi = SpinorField::random(&mut rng, gr, SpinStructure::TRIVIAL, 2, 1, 1.0);
        let (p, q) = projections_pq(&chi);
        assert!(p.axpy(1.0, &q).axpy(-1.0, &chi).max_abs() < 1e-15);
        assert!(apply_p(&p).axpy(-1.0, &p).max_abs() < 1e-14);
        assert!(apply_q(&q).axpy(-1.0, &q).max_abs() < 1e-14);
        assert!(apply_p(&q).max_abs() < 1e-14);
        // Q-image: ζ² = −ω ζ¹
        for pt in 0..gr.len() {
            let w = clifford::omega_apply(q.at(pt, 0));
            for k in 0..4 {
                assert!((q.at(pt, 1)[k] + w[k]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn winding_pushforward_is_identity() {
        let gr = TorusGrid::new(8, 2).unwrap();
        let phi = MapField::winding_map(gr, vec![[1, 0], [0, 1]], None);
        let f = pushforward(&phi, &MetricField::flat(gr)).unwrap();
        for p in 0..gr.len() {
            assert_eq!([f.get(p, 0, 0), f.get(p, 0, 1), f.get(p, 1, 0), f.get(p, 1, 1)], [1.0, 0.0, 0.0, 1.0]);
        }
    }

    #[test]
    fn sphere_rm_vanishes_for_single_column() {
        let gr = TorusGrid::new(8, 2).unwrap();
        let phi = MapField::sphere_equator(gr);
        let mut psi = SpinorField::zeros(gr, SpinStructure::TRIVIAL, 3);
        for p in 0..gr.len() {
            psi.at_mut(p, 2).copy_from_slice(&[1.0, 0.5, -0.2, 0.3]);
        }
        let c = curvature_terms(&psi, &phi).unwrap();
        assert!(c.rm.iter().all(|r| r.abs() < 1e-15));
    }
}
