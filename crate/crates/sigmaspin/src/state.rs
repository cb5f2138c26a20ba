//! The field tuple (φ, ψ; g, χ) the action is evaluated on.

use crate::error::{Error, Result};
use crate::fields::{check_psi, GravitinoField, MapField, Target, VectorSpinorField};
use crate::geometry::MetricField;
use crate::grid::TorusGrid;
use crate::fields::random_vector_spinor;
use crate::spin::{SpinStructure, SpinorField};
use crate::trig::seeded_rng;

/// Amplitudes and band of a seeded random state.
#[derive(Clone, Copy, Debug)]
pub struct RandomSpec {
    pub band: usize,
    pub phi: f64,
    pub psi: f64,
    pub chi: f64,
}

impl Default for RandomSpec {
    fn default() -> Self {
        RandomSpec { band: 2, phi: 0.3, psi: 0.5, chi: 0.5 }
    }
}

#[derive(Clone, Debug)]
pub struct ModelState {
    pub phi: MapField,
    pub psi: VectorSpinorField,
    pub g: MetricField,
    pub chi: GravitinoField,
}

impl ModelState {
    /// Assemble and check a state; every diagnostic names the offending pair.
    pub fn new(phi: MapField, psi: VectorSpinorField, g: MetricField, chi: GravitinoField) -> Result<Self> {
        let s = ModelState { phi, psi, g, chi };
        s.check()?;
        Ok(s)
    }

    /// φ with ψ = 0 and χ = 0.
    pub fn bosonic(phi: MapField, g: MetricField, spin: SpinStructure) -> Result<Self> {
        let psi = SpinorField::zeros(phi.grid, spin, phi.dim());
        let chi = SpinorField::zeros(phi.grid, spin, 2);
        Self::new(phi, psi, g, chi)
    }

    /// Seeded random state on the given metric. Streams: 1 map, 2 vector
    /// spinor, 3 gravitino.
    pub fn random(seed: u64, g: MetricField, target: Target, spin: SpinStructure, winding: Option<Vec<[i64; 2]>>, spec: RandomSpec) -> Result<Self> {
        let grid = g.grid;
        let phi = MapField::random(&mut seeded_rng(seed, 1), grid, target, winding, spec.band, spec.phi);
        let psi = random_vector_spinor(&mut seeded_rng(seed, 2), &phi, spin, spec.band, spec.psi);
        let chi = SpinorField::random(&mut seeded_rng(seed, 3), grid, spin, 2, spec.band, spec.chi);
        Self::new(phi, psi, g, chi)
    }

    pub fn check(&self) -> Result<()> {
        let tag = |what: &str, e: Error| Error::Incompatible(format!("{what}: {e}"));
        self.phi.grid.check_same(&self.g.grid).map_err(|e| tag("phi/g", e))?;
        check_psi(&self.psi, &self.phi).map_err(|e| tag("psi/phi", e))?;
        self.chi.grid.check_same(&self.g.grid).map_err(|e| tag("chi/g", e))?;
        if self.chi.cols != 2 {
            return Err(Error::Incompatible(format!("chi: gravitino needs 2 columns, got {}", self.chi.cols)));
        }
        if self.chi.spin != self.psi.spin {
            return Err(Error::Incompatible(format!(
                "psi/chi: spin structures {} and {} differ",
                self.psi.spin.label(),
                self.chi.spin.label()
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn grid(&self) -> TorusGrid {
        self.g.grid
    }

    #[inline]
    pub fn spin(&self) -> SpinStructure {
        self.psi.spin
    }

    #[inline]
    pub fn target(&self) -> Target {
        self.phi.target
    }

    pub fn with_psi(&self, psi: VectorSpinorField) -> Self {
        ModelState { psi, ..self.clone() }
    }

    pub fn with_chi(&self, chi: GravitinoField) -> Self {
        ModelState { chi, ..self.clone() }
    }

    pub fn with_phi(&self, phi: MapField) -> Self {
        ModelState { phi, ..self.clone() }
    }

    pub fn with_metric(&self, g: MetricField) -> Self {
        ModelState { g, ..self.clone() }
    }
}
