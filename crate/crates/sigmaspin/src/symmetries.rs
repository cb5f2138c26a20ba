//! The symmetry transformations of the action and their defects: rescaled
//! conformal, super Weyl, grid translations, infinitesimal diffeomorphisms
//! and the degenerate supersymmetry with its critical twistor family.

use log::warn;

use crate::action::total_action;
use crate::clifford::{self, Spinor};
use crate::error::{Error, Result};
use crate::fields::{apply_p, pushforward, GravitinoField, MapField, VectorSpinorField};
use crate::geometry::{MetricField, Sym2Field, VectorField};
use crate::noether::{diffeo_variation_parts, FdComparison};
use crate::spin::{dirac, spin_derivatives, SpinStructure, SpinorField};

pub use crate::state::ModelState;

/// SUSY parameter q.
#[derive(Clone, Debug)]
pub struct SusyParameter {
    pub q: SpinorField,
}

impl SusyParameter {
    pub fn new(q: SpinorField) -> Result<Self> {
        if q.cols != 1 {
            return Err(Error::Incompatible(format!("SUSY parameter must be a single spinor, got {} columns", q.cols)));
        }
        Ok(SusyParameter { q })
    }

    /// Constant spinor q₀ (parallel for g = δ, trivial spin).
    pub fn constant(g: &MetricField, q0: Spinor) -> Self {
        SusyParameter { q: SpinorField::constant(g.grid, SpinStructure::TRIVIAL, &[q0]) }
    }

    /// e^{u/2} q₀ on g = e^{2u}δ: the conformal image of a parallel spinor,
    /// hence a twistor spinor.
    pub fn conformal_parallel(g: &MetricField, q0: Spinor) -> Result<Self> {
        let u = g.conformal_factor().ok_or(Error::NotConformallyFlat)?;
        let w: Vec<f64> = u.iter().map(|u| (0.5 * u).exp()).collect();
        Ok(SusyParameter { q: SpinorField::constant(g.grid, SpinStructure::TRIVIAL, &[q0]).scale_pointwise(&w) })
    }

    /// ‖∇_α q + ½γ_α ∂̸q‖ summed over α.
    pub fn twistor_defect(&self, g: &MetricField) -> Result<f64> {
        let nabla = spin_derivatives(&self.q, g)?;
        let dq = dirac(&self.q, g)?;
        let mut total = 0.0;
        for (alpha, na) in nabla.iter().enumerate() {
            let half = dq.map_spinors(|_, _, s| {
                let v = clifford::gamma_apply(alpha, s);
                [0.5 * v[0], 0.5 * v[1], 0.5 * v[2], 0.5 * v[3]]
            });
            total += na.axpy(1.0, &half).norm(g);
        }
        Ok(total)
    }
}

/// g → e^{2u}g, ψ → e^{−u/2}ψ, χ → e^{−u/2}χ, φ unchanged.
pub fn apply_rescaled_conformal(state: &ModelState, u: &[f64]) -> ModelState {
    let w: Vec<f64> = u.iter().map(|u| (-0.5 * u).exp()).collect();
    ModelState {
        phi: state.phi.clone(),
        psi: state.psi.scale_pointwise(&w),
        g: state.g.conformal_rescale(u),
        chi: state.chi.scale_pointwise(&w),
    }
}

/// χ → χ + Pζ.
pub fn apply_super_weyl(state: &ModelState, zeta: &GravitinoField) -> Result<ModelState> {
    state.chi.check_compatible(zeta)?;
    Ok(state.with_chi(state.chi.axpy(1.0, &apply_p(zeta))))
}

/// Pull every field back along x ↦ x + steps·h.
pub fn apply_translation(state: &ModelState, steps: [isize; 2]) -> Result<ModelState> {
    let grid = state.grid();
    let idx = |p: usize| {
        let (q, _) = grid.neighbour(p, 0, steps[0]);
        grid.neighbour(q, 1, steps[1]).0
    };
    let g = MetricField::new(grid, (0..grid.len()).map(|p| state.g.g[idx(p)]).collect())?;
    Ok(ModelState { phi: state.phi.translated(steps), psi: state.psi.translated(steps), g, chi: state.chi.translated(steps) })
}

/// Sum of the four variation terms along the flow of X (zero in the
/// continuum for every state).
pub fn diffeo_defect_infinitesimal(state: &ModelState, x: &VectorField) -> Result<f64> {
    let p = diffeo_variation_parts(state, x)?;
    Ok(p[0] + p[1] + p[2])
}

#[derive(Clone, Debug)]
pub struct SusyVariation {
    /// δφ^i = ⟨q, ψ^i⟩, point-major.
    pub delta_phi: Vec<f64>,
    /// δψ = −Σ_α γ_α q ⊗ φ_*E_α.
    pub delta_psi: VectorSpinorField,
    /// δχ = ∇_α q ⊗ E_α.
    pub delta_chi: GravitinoField,
}

pub fn susy_variation(state: &ModelState, q: &SusyParameter) -> Result<SusyVariation> {
    state.check()?;
    let q = &q.q;
    q.grid.check_same(&state.g.grid)?;
    if q.spin != state.spin() {
        return Err(Error::Incompatible("SUSY parameter and state have different spin structures".into()));
    }
    let d = state.phi.dim();
    let n = state.grid().len();
    let mut delta_phi = vec![0.0; n * d];
    for p in 0..n {
        for j in 0..d {
            delta_phi[p * d + j] = clifford::dot(q.at(p, 0), state.psi.at(p, j));
        }
    }
    let delta_phi = state.phi.project_vectors(&delta_phi);
    let delta_psi = state.phi.project_spinors(&gamma_grad(&state.phi, q, &state.g)?.scaled(-1.0));
    let nabla = spin_derivatives(q, &state.g)?;
    let mut delta_chi = SpinorField::zeros(state.grid(), state.spin(), 2);
    delta_chi.set_column(0, &nabla[0]);
    delta_chi.set_column(1, &nabla[1]);
    Ok(SusyVariation { delta_phi, delta_psi, delta_chi })
}

/// γ(grad φ) q = Σ_α γ_α q ⊗ φ_*E_α.
fn gamma_grad(phi: &MapField, q: &SpinorField, g: &MetricField) -> Result<VectorSpinorField> {
    let f = pushforward(phi, g)?;
    let d = f.dim;
    Ok(SpinorField::zeros(g.grid, q.spin, d).map_spinors(|p, j, _| {
        let a = clifford::gamma_apply(0, q.at(p, 0));
        let b = clifford::gamma_apply(1, q.at(p, 0));
        let (fa, fb) = (f.get(p, j, 0), f.get(p, j, 1));
        [fa * a[0] + fb * b[0], fa * a[1] + fb * b[1], fa * a[2] + fb * b[2], fa * a[3] + fb * b[3]]
    }))
}

/// Central FD of the action along (δφ, δψ, δχ); the predicted value is 0.
pub fn susy_defect(state: &ModelState, q: &SusyParameter, eps: f64) -> Result<FdComparison> {
    let v = susy_variation(state, q)?;
    let at = |t: f64| -> Result<f64> {
        let phi = state.phi.moved(&v.delta_phi, t);
        let psi = phi.project_spinors(&state.psi.axpy(t, &v.delta_psi));
        let chi = state.chi.axpy(t, &v.delta_chi);
        Ok(total_action(&ModelState { phi, psi, g: state.g.clone(), chi })?.total)
    };
    Ok(FdComparison { fd: (at(eps)? - at(-eps)?) / (2.0 * eps), predicted: 0.0, scale: 0.0 })
}

/// ψ_t = −t Σ_α γ_α q ⊗ φ_*E_α.
pub fn twistor_family(q: &SusyParameter, phi: &MapField, t: f64, g: &MetricField) -> Result<VectorSpinorField> {
    let state = ModelState::bosonic(phi.clone(), g.clone(), q.q.spin)?;
    let tau = crate::noether::el_phi(&state)?;
    let tn = crate::noether::target_inner(&tau, &tau, phi.dim(), g).sqrt();
    if tn > 1e-6 {
        warn!("twistor family built on a map with tension {tn:.3e}; the family need not be critical");
    }
    Ok(phi.project_spinors(&gamma_grad(phi, &q.q, g)?.scaled(-t)))
}

/// Full twistor-family state (φ, ψ_t; g, 0).
pub fn twistor_state(q: &SusyParameter, phi: &MapField, t: f64, g: &MetricField) -> Result<ModelState> {
    let psi = twistor_family(q, phi, t, g)?;
    let chi = SpinorField::zeros(g.grid, q.q.spin, 2);
    ModelState::new(phi.clone(), psi, g.clone(), chi)
}

/// Frame-rescaled random metric direction, used by sweeps that need a k.
pub fn conformal_direction(g: &MetricField, c: &[f64]) -> Sym2Field {
    Sym2Field { grid: g.grid, k: g.g.iter().zip(c).map(|(s, c)| [c * s[0], c * s[1], c * s[2]]).collect() }
}
