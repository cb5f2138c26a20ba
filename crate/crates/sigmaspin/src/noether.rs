//! Euler–Lagrange residuals, energy-momentum tensor, supercurrent and the
//! conservation, trace and holomorphy defects built from them.
//!
//! Everything is assembled from one [`Evaluation`] so that trace identities
//! see the very same discrete derivatives on both sides.
//!
//! Resolved conventions (checked against finite differences of the discrete
//! action):
//! * EL(φ) = P_φ[τ(φ) + C(ψ) − 2 div(Σ_β⟨(Qχ)^β, ψ⟩E_β)], where for S² the
//!   curvature term is C(ψ)^j = −Σ_{α,k}⟨ψ^j, γ_α ψ^k⟩(φ_*E_α)^k, which is
//!   −½R(ψ, E_α·ψ)φ_*E_α for R(X,Y)Z = ⟨Y,Z⟩X − ⟨X,Z⟩Y.
//! * The regulator W enters T as −½⟨ψ,Wψ⟩δ_{αβ} (it carries conformal
//!   weight like the Dirac term but has no frame-index structure).
//! * L^{S⊗TM}χ = (L^S χ¹ − wχ², L^S χ² + wχ¹) with w = ω₁₂(X) − ½ curl(X♭).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::action::{total_action, ActionDensities};
use crate::clifford;
use crate::error::{Error, Result};
use crate::fields::{
    apply_p, apply_q, contract_pushforward, curvature_terms, pushforward, q_norm_sq, CurvatureTerms, GravitinoField,
    MapField, Pushforward, Target, VectorSpinorField,
};
use crate::geometry::{
    d_scalar, div_sym2, lie_metric, sym2_from_frame, sym2_to_frame, frame_inner, sym_to_m2, transport_angle, Sym,
    Sym2Field, MetricField, VectorField,
};
use crate::spin::{dirac, dirac_from, div_sigma, lie_spinor, regulator, rotate_spinors, spin_derivatives, SpinorField};
use crate::spin::{curl_coefficient, frame_components};
use crate::state::ModelState;

/// Symmetric tensor in frame components T_{αβ} = T(E_α, E_β).
#[derive(Clone, Debug)]
pub struct EMTensor {
    pub grid: crate::grid::TorusGrid,
    pub t: Vec<Sym>,
}

impl EMTensor {
    pub fn trace(&self) -> Vec<f64> {
        self.t.iter().map(|t| t[0] + t[2]).collect()
    }

    /// Coordinate components T_{μν}.
    pub fn coordinate(&self, g: &MetricField) -> Sym2Field {
        Sym2Field { grid: self.grid, k: self.t.iter().zip(&g.b_inv).map(|(t, b)| sym2_from_frame(t, b)).collect() }
    }
}

/// Cached discrete ingredients of one state.
pub struct Evaluation<'a> {
    pub state: &'a ModelState,
    pub dphi: Pushforward,
    pub nabla: [SpinorField; 2],
    pub reg: SpinorField,
    /// D̸ψ (tangentially projected for S²).
    pub dpsi: VectorSpinorField,
    pub qchi: GravitinoField,
    pub qn: Vec<f64>,
    pub curv: CurvatureTerms,
    pub dens: ActionDensities,
}

impl<'a> Evaluation<'a> {
    pub fn new(state: &'a ModelState) -> Result<Self> {
        state.check()?;
        let ModelState { phi, psi, g, chi } = state;
        let dphi = pushforward(phi, g)?;
        let nabla = spin_derivatives(psi, g)?;
        let reg = regulator(psi, g)?;
        let dpsi = phi.project_spinors(&dirac_from(&nabla, &reg));
        let qchi = apply_q(chi);
        let qn = q_norm_sq(chi);
        let curv = curvature_terms(psi, phi)?;
        let e1: Vec<f64> = dphi.data.chunks(2 * dphi.dim).map(|c| c.iter().map(|x| x * x).sum()).collect();
        let e2 = psi.dot_pointwise(&dpsi);
        let e3: Vec<f64> = contract_pushforward(&qchi, &dphi).dot_pointwise(psi).iter().map(|x| -4.0 * x).collect();
        let pn = psi.dot_pointwise(psi);
        let e4: Vec<f64> = qn.iter().zip(&pn).map(|(a, b)| -a * b).collect();
        let e5: Vec<f64> = curv.rm.iter().map(|r| -r / 6.0).collect();
        let dens = ActionDensities { terms: [e1, e2, e3, e4, e5] };
        Ok(Evaluation { state, dphi, nabla, reg, dpsi, qchi, qn, curv, dens })
    }

    /// EL(ψ) = D̸ψ − |Qχ|²ψ − ⅓SR(ψ) − 2(1⊗φ_*)Qχ.
    pub fn el_psi(&self) -> VectorSpinorField {
        let s = self.state;
        let coupling = s.phi.project_spinors(&contract_pushforward(&self.qchi, &self.dphi));
        let mut out = self.dpsi.axpy(-1.0, &s.psi.scale_pointwise(&self.qn));
        out.add_assign_scaled(-1.0 / 3.0, &self.curv.sr);
        out.add_assign_scaled(-2.0, &coupling);
        out
    }

    /// EL(φ) as a point-major field of ambient target vectors.
    pub fn el_phi(&self) -> Vec<f64> {
        let s = self.state;
        let g = &s.g;
        let grid = g.grid;
        let n = grid.len();
        let d = s.phi.dim();
        let dphi = s.phi.coord_derivatives();
        let mut out = vec![0.0; n * d];
        for j in 0..d {
            // tension field (1/√g) D_μ(√g g^{μν} D_ν φ)
            let mut flux = [vec![0.0; n], vec![0.0; n]];
            // gravitino flux √g Σ_β b^μ_β ⟨(Qχ)^β, ψ^j⟩
            let mut gflux = [vec![0.0; n], vec![0.0; n]];
            for p in 0..n {
                let gi = g.inv[p];
                let (a, b) = (dphi[0][p * d + j], dphi[1][p * d + j]);
                flux[0][p] = g.sqrt_det[p] * (gi[0] * a + gi[1] * b);
                flux[1][p] = g.sqrt_det[p] * (gi[1] * a + gi[2] * b);
                for beta in 0..2 {
                    let c = clifford::dot(self.qchi.at(p, beta), s.psi.at(p, j));
                    let e = g.frame(p, beta);
                    gflux[0][p] += g.sqrt_det[p] * e[0] * c;
                    gflux[1][p] += g.sqrt_det[p] * e[1] * c;
                }
            }
            let t0 = d_scalar(&grid, 0, &flux[0]);
            let t1 = d_scalar(&grid, 1, &flux[1]);
            let g0 = d_scalar(&grid, 0, &gflux[0]);
            let g1 = d_scalar(&grid, 1, &gflux[1]);
            for p in 0..n {
                out[p * d + j] = (t0[p] + t1[p] - 2.0 * (g0[p] + g1[p])) / g.sqrt_det[p];
            }
        }
        if let Target::Sphere2 = s.phi.target {
            out.par_chunks_mut(3).enumerate().for_each(|(p, o)| {
                for j in 0..3 {
                    for alpha in 0..2 {
                        for k in 0..3 {
                            let gk = clifford::gamma_apply(alpha, s.psi.at(p, k));
                            o[j] -= clifford::dot(s.psi.at(p, j), &gk) * self.dphi.get(p, k, alpha);
                        }
                    }
                }
            });
        }
        s.phi.project_vectors(&out)
    }

    /// Frame components of T.
    pub fn energy_momentum(&self) -> EMTensor {
        let s = self.state;
        let n = s.grid().len();
        let d = self.dphi.dim;
        let lag = self.dens.lagrangian();
        let t = (0..n)
            .into_par_iter()
            .map(|p| {
                let mut t = [[0.0; 2]; 2];
                // pushforward part
                for a in 0..2 {
                    for b in 0..2 {
                        t[a][b] = 2.0 * (0..d).map(|j| self.dphi.get(p, j, a) * self.dphi.get(p, j, b)).sum::<f64>();
                    }
                }
                // Dirac part ½⟨ψ, γ_a∇_bψ + γ_b∇_aψ⟩ and gravitino part
                let mut dir = [[0.0; 2]; 2];
                let mut grav = [[0.0; 2]; 2];
                for j in 0..d {
                    let pj = s.psi.at(p, j);
                    for a in 0..2 {
                        for b in 0..2 {
                            dir[a][b] += clifford::dot(pj, &clifford::gamma_apply(a, self.nabla[b].at(p, j)));
                        }
                    }
                }
                for a in 0..2 {
                    // ⟨Σ_η γ_ηγ_a χ^η, ψ^j⟩
                    let mut v = [0.0; 4];
                    for eta in 0..2 {
                        let w = clifford::gamma_apply(eta, &clifford::gamma_apply(a, s.chi.at(p, eta)));
                        for k in 0..4 {
                            v[k] += w[k];
                        }
                    }
                    for b in 0..2 {
                        grav[a][b] = (0..d).map(|j| clifford::dot(&v, s.psi.at(p, j)) * self.dphi.get(p, j, b)).sum();
                    }
                }
                let w = 4 * s.psi.cols;
                let wpsi: f64 = (0..w).map(|k| s.psi.data[p * w + k] * self.reg.data[p * w + k]).sum();
                for a in 0..2 {
                    for b in 0..2 {
                        t[a][b] += 0.5 * (dir[a][b] + dir[b][a]) + grav[a][b] + grav[b][a];
                    }
                }
                let diag = -lag[p] + 0.5 * wpsi;
                [t[0][0] + diag, 0.5 * (t[0][1] + t[1][0]), t[1][1] + diag]
            })
            .collect();
        EMTensor { grid: s.grid(), t }
    }

    /// J^α = 2⟨φ_*E_β, γ_βγ_α ψ⟩ + |ψ|² γ_βγ_α χ^β.
    pub fn supercurrent(&self) -> GravitinoField {
        let s = self.state;
        let d = self.dphi.dim;
        let pn = s.psi.dot_pointwise(&s.psi);
        let mut j = s.chi.zeros_like();
        j.data.par_chunks_mut(8).enumerate().for_each(|(p, o)| {
            for alpha in 0..2 {
                for beta in 0..2 {
                    let mut acc = [0.0; 4];
                    for jj in 0..d {
                        let c = 2.0 * self.dphi.get(p, jj, beta);
                        let v = s.psi.at(p, jj);
                        for k in 0..4 {
                            acc[k] += c * v[k];
                        }
                    }
                    for k in 0..4 {
                        acc[k] += pn[p] * s.chi.at(p, beta)[k];
                    }
                    let w = clifford::gamma_apply(beta, &clifford::gamma_apply(alpha, &acc));
                    for k in 0..4 {
                        o[alpha * 4 + k] += w[k];
                    }
                }
            }
        });
        j
    }

    /// tr T + ⟨ψ, EL(ψ)⟩ + ½⟨χ, J⟩ pointwise.
    pub fn trace_defect(&self) -> Vec<f64> {
        let tr = self.energy_momentum().trace();
        let a = self.state.psi.dot_pointwise(&self.el_psi());
        let b = self.state.chi.dot_pointwise(&self.supercurrent());
        (0..tr.len()).map(|p| tr[p] + a[p] + 0.5 * b[p]).collect()
    }

    /// Size scale of the trace identity terms, for relative comparisons.
    pub fn trace_scale(&self) -> Vec<f64> {
        let t = self.energy_momentum();
        let a = self.state.psi.dot_pointwise(&self.el_psi());
        let b = self.state.chi.dot_pointwise(&self.supercurrent());
        (0..a.len()).map(|p| t.t[p].iter().map(|x| x.abs()).sum::<f64>() + a[p].abs() + b[p].abs()).collect()
    }
}

pub fn el_psi(state: &ModelState) -> Result<VectorSpinorField> {
    Ok(Evaluation::new(state)?.el_psi())
}

pub fn el_phi(state: &ModelState) -> Result<Vec<f64>> {
    Ok(Evaluation::new(state)?.el_phi())
}

pub fn energy_momentum(state: &ModelState) -> Result<EMTensor> {
    Ok(Evaluation::new(state)?.energy_momentum())
}

pub fn supercurrent(state: &ModelState) -> Result<GravitinoField> {
    Ok(Evaluation::new(state)?.supercurrent())
}

/// Energy-momentum tensor of the pure Dirac action:
/// ½⟨σ, γ_α∇_βσ + γ_β∇_ασ⟩ − ⟨σ,∂̸σ⟩δ_{αβ} + ½⟨σ,Wσ⟩δ_{αβ}.
pub fn dirac_energy_momentum(sigma: &SpinorField, g: &MetricField) -> Result<EMTensor> {
    sigma.grid.check_same(&g.grid)?;
    let nabla = spin_derivatives(sigma, g)?;
    let reg = regulator(sigma, g)?;
    let ds = dirac_from(&nabla, &reg);
    let l = sigma.dot_pointwise(&ds);
    let wr = sigma.dot_pointwise(&reg);
    let t = (0..g.grid.len())
        .into_par_iter()
        .map(|p| {
            let mut dir = [[0.0; 2]; 2];
            for c in 0..sigma.cols {
                for a in 0..2 {
                    for b in 0..2 {
                        dir[a][b] += clifford::dot(sigma.at(p, c), &clifford::gamma_apply(a, nabla[b].at(p, c)));
                    }
                }
            }
            let diag = -l[p] + 0.5 * wr[p];
            [dir[0][0] + diag, 0.5 * (dir[0][1] + dir[1][0]), dir[1][1] + diag]
        })
        .collect();
    Ok(EMTensor { grid: g.grid, t })
}

/// 2 div_σ(∂̸σ)♭ + div_g T(σ), as covector components.
pub fn dirac_conservation_defect(sigma: &SpinorField, g: &MetricField) -> Result<VectorField> {
    let t = dirac_energy_momentum(sigma, g)?;
    let dt = div_sym2(&t.coordinate(g), g)?;
    let ds = div_sigma(sigma, &dirac(sigma, g)?, g)?;
    let v = (0..g.grid.len())
        .map(|p| {
            let l = g.lower(p, ds.v[p]);
            [2.0 * l[0] + dt.v[p][0], 2.0 * l[1] + dt.v[p][1]]
        })
        .collect();
    Ok(VectorField { grid: g.grid, v })
}

/// g-divergence of S⊗TM sections: Σ_β ∇_β J^β + Σ_α div(E_α) J^α.
pub fn div_gravitino(j: &GravitinoField, g: &MetricField) -> Result<SpinorField> {
    let nabla = spin_derivatives(j, g)?;
    let mut out = SpinorField::zeros(j.grid, j.spin, 1);
    out.data.par_chunks_mut(4).enumerate().for_each(|(p, o)| {
        for beta in 0..2 {
            let d = nabla[beta].at(p, beta);
            let c = g.div_frame[p][beta];
            let v = j.at(p, beta);
            for k in 0..4 {
                o[k] += d[k] + c * v[k];
            }
        }
    });
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct ConservationDefects {
    /// div_g T (covector components).
    pub strong_t: VectorField,
    /// div_g J.
    pub div_j: SpinorField,
    /// tr T + ⟨ψ,EL(ψ)⟩ + ½⟨χ,J⟩.
    pub trace: Vec<f64>,
}

pub fn conservation_defects(state: &ModelState) -> Result<ConservationDefects> {
    let ev = Evaluation::new(state)?;
    let t = ev.energy_momentum();
    let strong_t = div_sym2(&t.coordinate(&state.g), &state.g)?;
    let div_j = div_gravitino(&ev.supercurrent(), &state.g)?;
    Ok(ConservationDefects { strong_t, div_j, trace: ev.trace_defect() })
}

/// L² norm ‖v‖ of a covector field with respect to g.
pub fn covector_norm(v: &VectorField, g: &MetricField) -> f64 {
    let f: Vec<f64> = (0..g.grid.len())
        .map(|p| {
            let r = g.raise(p, v.v[p]);
            r[0] * v.v[p][0] + r[1] * v.v[p][1]
        })
        .collect();
    g.integrate(&f).max(0.0).sqrt()
}

/// ‖f‖_{L²(g)} for a scalar field.
pub fn scalar_norm(f: &[f64], g: &MetricField) -> f64 {
    let sq: Vec<f64> = f.iter().map(|x| x * x).collect();
    g.integrate(&sq).max(0.0).sqrt()
}

/// L^{S⊗TM}_X χ.
pub fn lie_gravitino(x: &VectorField, chi: &GravitinoField, g: &MetricField) -> Result<GravitinoField> {
    let l = lie_spinor(x, chi, g)?;
    let xf = frame_components(x, g);
    let a = curl_coefficient(x, g);
    let mut out = l;
    out.data.par_chunks_mut(8).enumerate().for_each(|(p, o)| {
        let w = xf[p][0] * g.omega12[p][0] + xf[p][1] * g.omega12[p][1] - 0.5 * a[p];
        let (c1, c2) = (chi.at(p, 0), chi.at(p, 1));
        for k in 0..4 {
            o[k] -= w * c2[k];
            o[4 + k] += w * c1[k];
        }
    });
    Ok(out)
}

/// ∫ −½⟨L_X g, T⟩ + ⟨L^{S⊗TM}_X χ, J⟩ dvol.
pub fn weak_conservation(ev: &Evaluation, x: &VectorField) -> Result<f64> {
    let g = &ev.state.g;
    let t = ev.energy_momentum();
    let lg = lie_metric(x, g)?;
    let a: Vec<f64> = (0..g.grid.len()).map(|p| -0.5 * frame_inner(&sym2_to_frame(&lg.k[p], &g.b[p]), &t.t[p])).collect();
    let lchi = lie_gravitino(x, &ev.state.chi, g)?;
    Ok(g.integrate(&a) + lchi.inner(&ev.supercurrent(), g))
}

/// φ_*X = Xᵘ D_μ φ.
pub fn map_derivative_along(phi: &MapField, x: &VectorField) -> Vec<f64> {
    let d = phi.dim();
    let dphi = phi.coord_derivatives();
    let mut out = vec![0.0; d * phi.grid.len()];
    for p in 0..phi.grid.len() {
        for j in 0..d {
            out[p * d + j] = x.v[p][0] * dphi[0][p * d + j] + x.v[p][1] * dphi[1][p * d + j];
        }
    }
    out
}

/// Inner product ∫ Σ_j v^j w^j dvol of target-vector fields.
pub fn target_inner(v: &[f64], w: &[f64], d: usize, g: &MetricField) -> f64 {
    let f: Vec<f64> = v.chunks(d).zip(w.chunks(d)).map(|(a, b)| a.iter().zip(b).map(|(x, y)| x * y).sum()).collect();
    g.integrate(&f)
}

/// The four parts of the total variation along the flow of X:
/// [−2∫⟨φ_*X, EL(φ)⟩, 2∫⟨L_X ψ, EL(ψ)⟩, −½∫⟨L_X g, T⟩ + ∫⟨L_X χ, J⟩].
/// Their sum vanishes for every state in the continuum.
pub fn diffeo_variation_parts(state: &ModelState, x: &VectorField) -> Result<[f64; 3]> {
    let ev = Evaluation::new(state)?;
    let g = &state.g;
    let d = state.phi.dim();
    let a = -2.0 * target_inner(&map_derivative_along(&state.phi, x), &ev.el_phi(), d, g);
    let dpsi = state.phi.project_spinors(&lie_spinor(x, &state.psi, g)?);
    let b = 2.0 * dpsi.inner(&ev.el_psi(), g);
    let c = weak_conservation(&ev, x)?;
    Ok([a, b, c])
}

/// Holomorphy diagnostics of T on a conformally flat metric.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct HolomorphyDefect {
    /// ‖∂̄(T₁₁ − iT₁₂)‖ in coordinate components.
    pub cauchy_riemann: f64,
    /// ‖tr_g T‖.
    pub trace: f64,
}

pub fn holomorphy_defect_t(t: &EMTensor, g: &MetricField) -> Result<HolomorphyDefect> {
    if g.conformal_factor().is_none() {
        return Err(Error::NotConformallyFlat);
    }
    let c = t.coordinate(g);
    let grid = g.grid;
    let t11 = c.component(0);
    let t12 = c.component(1);
    let d1t11 = d_scalar(&grid, 0, &t11);
    let d2t11 = d_scalar(&grid, 1, &t11);
    let d1t12 = d_scalar(&grid, 0, &t12);
    let d2t12 = d_scalar(&grid, 1, &t12);
    let cr: Vec<f64> = (0..grid.len())
        .map(|p| {
            let re = 0.5 * (d1t11[p] + d2t12[p]);
            let im = 0.5 * (d2t11[p] - d1t12[p]);
            re * re + im * im
        })
        .collect();
    Ok(HolomorphyDefect { cauchy_riemann: g.integrate(&cr).max(0.0).sqrt(), trace: scalar_norm(&t.trace(), g) })
}

/// ‖div_g J‖ + ‖PJ‖ on a conformally flat metric.
pub fn holomorphy_defect_j(j: &GravitinoField, g: &MetricField) -> Result<f64> {
    if g.conformal_factor().is_none() {
        return Err(Error::NotConformallyFlat);
    }
    Ok(div_gravitino(j, g)?.norm(g) + apply_p(j).norm(g))
}

/// Transport stored components from g to g_new (δ-polar frames): spinors
/// by exp(θω/2), gravitino vector index by the frame rotation R(θ).
pub fn transport_state(state: &ModelState, g_new: MetricField) -> ModelState {
    let theta = transport_angle(&state.g, &g_new);
    let psi = rotate_spinors(&state.psi, &theta);
    let chi = rotate_spinors(&state.chi, &theta);
    let mut chi_r = chi.clone();
    for p in 0..chi.grid.len() {
        let (s, c) = theta[p].sin_cos();
        for k in 0..4 {
            let (a, b) = (chi.at(p, 0)[k], chi.at(p, 1)[k]);
            chi_r.at_mut(p, 0)[k] = c * a - s * b;
            chi_r.at_mut(p, 1)[k] = s * a + c * b;
        }
    }
    ModelState { psi, chi: chi_r, g: g_new, phi: state.phi.clone() }
}

/// A finite-difference comparison: `fd` from the action, `predicted` from
/// the closed form. `scale` is the Cauchy-Schwarz bound ‖gradient‖·‖direction‖
/// of the predicted pairing (0 when there is none).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FdComparison {
    pub fd: f64,
    pub predicted: f64,
    pub scale: f64,
}

impl FdComparison {
    pub fn abs_error(&self) -> f64 {
        (self.fd - self.predicted).abs()
    }

    pub fn rel_error(&self) -> f64 {
        self.abs_error() / self.fd.abs().max(self.predicted.abs()).max(1e-300)
    }

    /// Error relative to `scale`. Unlike `rel_error` this stays meaningful
    /// when the direction is nearly orthogonal to the gradient.
    pub fn scaled_error(&self) -> f64 {
        if self.scale > 0.0 {
            self.abs_error() / self.scale
        } else {
            self.abs_error()
        }
    }
}

fn central<F: Fn(f64) -> Result<f64>>(f: F, eps: f64) -> Result<f64> {
    Ok((f(eps)? - f(-eps)?) / (2.0 * eps))
}

/// d/dt A(ψ + tη) vs 2∫⟨η, EL(ψ)⟩ (η projected to be tangent).
pub fn psi_gradient_check(state: &ModelState, eta: &VectorSpinorField, eps: f64) -> Result<FdComparison> {
    let eta = state.phi.project_spinors(eta);
    let fd = central(|t| Ok(total_action(&state.with_psi(state.psi.axpy(t, &eta)))?.total), eps)?;
    let el = el_psi(state)?;
    let predicted = 2.0 * eta.inner(&el, &state.g);
    let scale = 2.0 * (eta.inner(&eta, &state.g) * el.inner(&el, &state.g)).sqrt();
    Ok(FdComparison { fd, predicted, scale })
}

/// d/dt A(φ_t, ψ_t) vs −2∫⟨v, EL(φ)⟩. For S² the map moves along v
/// (projected) and ψ is re-projected, which transports it to first order.
pub fn phi_gradient_check(state: &ModelState, v: &[f64], eps: f64) -> Result<FdComparison> {
    let v = state.phi.project_vectors(v);
    let fd = central(
        |t| {
            let phi = state.phi.moved(&v, t);
            let psi = phi.project_spinors(&state.psi);
            Ok(total_action(&ModelState { phi, psi, ..state.clone() })?.total)
        },
        eps,
    )?;
    let el = el_phi(state)?;
    let d = state.phi.dim();
    let predicted = -2.0 * target_inner(&v, &el, d, &state.g);
    let scale = 2.0 * (target_inner(&v, &v, d, &state.g) * target_inner(&el, &el, d, &state.g)).sqrt();
    Ok(FdComparison { fd, predicted, scale })
}

/// d/dt A(χ + tζ) vs ∫⟨ζ, J⟩.
pub fn chi_gradient_check(state: &ModelState, zeta: &GravitinoField, eps: f64) -> Result<FdComparison> {
    let fd = central(|t| Ok(total_action(&state.with_chi(state.chi.axpy(t, zeta)))?.total), eps)?;
    let j = supercurrent(state)?;
    let predicted = zeta.inner(&j, &state.g);
    let scale = (zeta.inner(zeta, &state.g) * j.inner(&j, &state.g)).sqrt();
    Ok(FdComparison { fd, predicted, scale })
}

/// d/dt A under g + tk with transported fields vs −½∫⟨k, T⟩.
pub fn metric_gradient_check(state: &ModelState, k: &Sym2Field, eps: f64) -> Result<FdComparison> {
    let fd = central(|t| Ok(total_action(&transport_state(state, state.g.perturbed(k, t)?))?.total), eps)?;
    let t = energy_momentum(state)?;
    let g = &state.g;
    let kf: Vec<_> = (0..g.grid.len()).map(|p| sym2_to_frame(&k.k[p], &g.b[p])).collect();
    let f: Vec<f64> = (0..g.grid.len()).map(|p| frame_inner(&kf[p], &t.t[p])).collect();
    let kk: Vec<f64> = kf.iter().map(|a| frame_inner(a, a)).collect();
    let tt: Vec<f64> = t.t.iter().map(|a| frame_inner(a, a)).collect();
    let scale = 0.5 * (g.integrate(&kk) * g.integrate(&tt)).sqrt();
    Ok(FdComparison { fd, predicted: -0.5 * g.integrate(&f), scale })
}

/// Closed form −½Σ_α γ_α∇_{K E_α}σ + ¼γ(grad tr_g k − (div_g k)♯)σ of the
/// derivative of the transported Dirac operator.
pub fn transported_dirac_closed_form(k: &Sym2Field, sigma: &SpinorField, g: &MetricField) -> Result<SpinorField> {
    k.grid.check_same(&g.grid)?;
    let nabla = spin_derivatives(sigma, g)?;
    let grid = g.grid;
    let n = grid.len();
    let tr: Vec<f64> = (0..n).map(|p| crate::geometry::trace_g(&k.k[p], &g.inv[p])).collect();
    let dtr = [d_scalar(&grid, 0, &tr), d_scalar(&grid, 1, &tr)];
    let dk = div_sym2(k, g)?;
    let cols = sigma.cols;
    let mut out = sigma.zeros_like();
    out.data.par_chunks_mut(4 * cols).enumerate().for_each(|(p, o)| {
        // frame matrix of K: b k b
        let kf = sym_to_m2(&sym2_to_frame(&k.k[p], &g.b[p]));
        let v = g.raise(p, [dtr[0][p] - dk.v[p][0], dtr[1][p] - dk.v[p][1]]);
        let vf = g.to_frame(p, v);
        for c in 0..cols {
            let s = sigma.at(p, c);
            let mut acc = clifford::vector_apply([0.25 * vf[0], 0.25 * vf[1]], s);
            for a in 0..2 {
                let mut dir = [0.0; 4];
                for b in 0..2 {
                    let nb = nabla[b].at(p, c);
                    for q in 0..4 {
                        dir[q] += kf[b][a] * nb[q];
                    }
                }
                let w = clifford::gamma_apply(a, &dir);
                for q in 0..4 {
                    acc[q] -= 0.5 * w[q];
                }
            }
            o[c * 4..c * 4 + 4].copy_from_slice(&acc);
        }
    });
    Ok(out)
}

/// Central difference in t of R(−θ_t) ∂̸_{g+tk} R(θ_t) σ.
pub fn transported_dirac_fd(k: &Sym2Field, sigma: &SpinorField, g: &MetricField, eps: f64) -> Result<SpinorField> {
    let apply = |t: f64| -> Result<SpinorField> {
        let gt = g.perturbed(k, t)?;
        let th = transport_angle(g, &gt);
        let back: Vec<f64> = th.iter().map(|x| -x).collect();
        Ok(rotate_spinors(&dirac(&rotate_spinors(sigma, &th), &gt)?, &back))
    };
    let plus = apply(eps)?;
    let minus = apply(-eps)?;
    Ok(plus.axpy(-1.0, &minus).scaled(0.5 / eps))
}

/// ‖FD transport − closed form‖_{L²}.
pub fn transported_dirac_derivative_check(k: &Sym2Field, sigma: &SpinorField, g: &MetricField, eps: f64) -> Result<f64> {
    let fd = transported_dirac_fd(k, sigma, g, eps)?;
    let cf = transported_dirac_closed_form(k, sigma, g)?;
    Ok(fd.axpy(-1.0, &cf).norm(g))
}
