//! Dirichlet energy, Dirac action and the five-term action functional.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fields::{contract_pushforward, curvature_terms, pushforward, q_norm_sq, apply_q, twisted_dirac, MapField};
use crate::geometry::MetricField;
use crate::spin::{dirac, SpinorField};
use crate::state::ModelState;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ActionBreakdown {
    pub e_dirichlet: f64,
    pub e_dirac: f64,
    pub e_gravitino_coupling: f64,
    pub e_quartic: f64,
    pub e_curvature: f64,
    pub total: f64,
}

impl ActionBreakdown {
    fn from_terms(t: [f64; 5]) -> Self {
        ActionBreakdown {
            e_dirichlet: t[0],
            e_dirac: t[1],
            e_gravitino_coupling: t[2],
            e_quartic: t[3],
            e_curvature: t[4],
            total: t[0] + t[1] + t[2] + t[3] + t[4],
        }
    }

    /// Intro-style harmonic map energy with the ½ prefactor.
    pub fn harmonic_energy(&self) -> f64 {
        0.5 * self.e_dirichlet
    }
}

/// Pointwise integrands of the five terms (before the volume form).
#[derive(Clone, Debug)]
pub struct ActionDensities {
    pub terms: [Vec<f64>; 5],
}

impl ActionDensities {
    pub fn lagrangian(&self) -> Vec<f64> {
        (0..self.terms[0].len()).map(|p| self.terms.iter().map(|t| t[p]).sum()).collect()
    }
}

/// ∫ Σ_α |φ_*E_α|² dvol_g (no ½).
pub fn dirichlet_energy(phi: &MapField, g: &MetricField) -> Result<f64> {
    let f = pushforward(phi, g)?;
    let dens: Vec<f64> = f.data.chunks(2 * f.dim).map(|c| c.iter().map(|x| x * x).sum()).collect();
    Ok(g.integrate(&dens))
}

/// ∫⟨σ, ∂̸σ⟩ dvol_g (summed over columns).
pub fn dirac_action(sigma: &SpinorField, g: &MetricField) -> Result<f64> {
    let d = dirac(sigma, g)?;
    Ok(sigma.inner(&d, g))
}

pub fn action_densities(state: &ModelState) -> Result<ActionDensities> {
    state.check()?;
    let ModelState { phi, psi, g, chi } = state;
    let f = pushforward(phi, g)?;
    let e1: Vec<f64> = f.data.chunks(2 * f.dim).map(|c| c.iter().map(|x| x * x).sum()).collect();
    let e2 = psi.dot_pointwise(&twisted_dirac(psi, phi, g)?);
    let qchi = apply_q(chi);
    let e3: Vec<f64> = contract_pushforward(&qchi, &f).dot_pointwise(psi).iter().map(|x| -4.0 * x).collect();
    let qn = q_norm_sq(chi);
    let pn = psi.dot_pointwise(psi);
    let e4: Vec<f64> = qn.iter().zip(&pn).map(|(a, b)| -a * b).collect();
    let e5: Vec<f64> = curvature_terms(psi, phi)?.rm.iter().map(|r| -r / 6.0).collect();
    Ok(ActionDensities { terms: [e1, e2, e3, e4, e5] })
}

pub fn total_action(state: &ModelState) -> Result<ActionBreakdown> {
    let d = action_densities(state)?;
    let t = [0, 1, 2, 3, 4].map(|i| state.g.integrate(&d.terms[i]));
    Ok(ActionBreakdown::from_terms(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{random_vector_spinor, Target};
    use crate::grid::TorusGrid;
    use crate::spin::SpinStructure;
    use crate::trig::seeded_rng;

    #[test]
    fn winding_map_energy() {
        let gr = TorusGrid::new(16, 2).unwrap();
        let phi = MapField::winding_map(gr, vec![[1, 0], [0, 1]], None);
        let e = dirichlet_energy(&phi, &MetricField::flat(gr)).unwrap();
        assert!((e - 2.0).abs() < 1e-13);
    }

    #[test]
    fn sign_symmetry_is_exact() {
        let gr = TorusGrid::new(16, 2).unwrap();
        let mut rng = seeded_rng(5, 0);
        let phi = MapField::random(&mut rng, gr, Target::Sphere2, None, 2, 0.3);
        let spin = SpinStructure::new(-1, 1).unwrap();
        let psi = random_vector_spinor(&mut rng, &phi, spin, 2, 0.5);
        let chi = SpinorField::random(&mut rng, gr, spin, 2, 2, 0.5);
        let s = ModelState::new(phi, psi, MetricField::flat(gr), chi).unwrap();
        let a = total_action(&s).unwrap();
        let flipped = ModelState { psi: s.psi.scaled(-1.0), chi: s.chi.scaled(-1.0), ..s.clone() };
        let b = total_action(&flipped).unwrap();
        assert_eq!(a, b);
        assert!((a.total - (a.e_dirichlet + a.e_dirac + a.e_gravitino_coupling + a.e_quartic + a.e_curvature)).abs() <= 1e-14 * a.total.abs());
    }
}
