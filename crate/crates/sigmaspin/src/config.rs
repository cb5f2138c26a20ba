//! Scenario configuration files.
//!
//! A config is a TOML document holding one or more `[[scenario]]` tables.
//! Unknown keys anywhere are rejected with the offending key and line. The
//! grammar is documented in `configs/README.md`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{MapField, Target};
use crate::geometry::{AnalyticMetric, MetricField};
use crate::grid::TorusGrid;
use crate::spin::{SpinStructure, SpinorField};
use crate::state::{ModelState, RandomSpec};
use crate::symmetries::{twistor_state, SusyParameter};
use crate::trig::{seeded_rng, Mode, TrigPoly};

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub scenario: Vec<ScenarioConfig>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub id: String,
    /// Seed for auxiliary random data (test directions, perturbations).
    pub seed: u64,
    pub grid: GridSpec,
    pub spin: [i8; 2],
    pub metric: MetricSpec,
    pub target: TargetSpec,
    pub fields: FieldSpec,
    pub checks: Vec<String>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    /// Number of seeded samples for the finite-difference checks.
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_samples() -> usize {
    1
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n: usize,
    #[serde(default = "default_order")]
    pub order: usize,
}

fn default_order() -> usize {
    2
}

/// One trigonometric mode `[k1, k2, a, b]`: a·cos 2π k·x + b·sin 2π k·x.
pub type ModeSpec = [f64; 4];

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricSpec {
    Flat,
    /// e^{2u}δ with u either random (seed, band, amplitude = sup of u) or
    /// given by modes.
    Conformal {
        seed: Option<u64>,
        #[serde(default = "default_band")]
        band: usize,
        #[serde(default = "default_amp")]
        amplitude: f64,
        #[serde(default)]
        u: Vec<ModeSpec>,
    },
    /// e^{2u}(δ + ν) with ν = [[ν₁, ν₂], [ν₂, −ν₁]].
    General {
        seed: Option<u64>,
        #[serde(default = "default_band")]
        band: usize,
        #[serde(default = "default_amp")]
        amplitude: f64,
        #[serde(default = "default_nu")]
        anisotropy: f64,
        #[serde(default)]
        u: Vec<ModeSpec>,
        #[serde(default)]
        nu1: Vec<ModeSpec>,
        #[serde(default)]
        nu2: Vec<ModeSpec>,
    },
}

fn default_band() -> usize {
    2
}
fn default_amp() -> f64 {
    0.3
}
fn default_nu() -> f64 {
    0.2
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetSpec {
    FlatRn { dim: usize },
    FlatTorus { dim: usize, winding: Vec<[i64; 2]> },
    Sphere2,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "init", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    Zero,
    Random {
        seed: u64,
        #[serde(default = "default_band")]
        band: usize,
        #[serde(default = "default_amp")]
        phi: f64,
        #[serde(default = "default_half")]
        psi: f64,
        #[serde(default = "default_half")]
        chi: f64,
    },
    /// ψ_t = −t γ(grad φ) q with q the (conformal image of a) constant spinor,
    /// χ = 0. `perturb` adds seeded relative noise to ψ and φ.
    TwistorFamily {
        t: f64,
        #[serde(default = "default_q")]
        q: [f64; 4],
        #[serde(default)]
        perturb: f64,
    },
    /// Explicit modes per real component: `phi[j]`, `psi[4·col + a]`,
    /// `chi[4·β + a]`. Missing components are zero.
    Coeffs {
        #[serde(default)]
        phi: Vec<Vec<ModeSpec>>,
        #[serde(default)]
        psi: Vec<Vec<ModeSpec>>,
        #[serde(default)]
        chi: Vec<Vec<ModeSpec>>,
    },
}

fn default_half() -> f64 {
    0.5
}
fn default_q() -> [f64; 4] {
    [0.7, -0.2, 0.4, 0.5]
}

/// Parse a config from text; `origin` names the source in diagnostics.
pub fn parse_config(text: &str, origin: &str) -> Result<Config> {
    let cfg: Config = toml::from_str(text).map_err(|e| Error::Config(format!("{origin}: {e}")))?;
    for s in &cfg.scenario {
        s.validate().map_err(|e| Error::Config(format!("{origin}: scenario '{}': {e}", s.id)))?;
    }
    let mut ids: Vec<&str> = cfg.scenario.iter().map(|s| s.id.as_str()).collect();
    ids.sort_unstable();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::Config(format!("{origin}: duplicate scenario id '{}'", w[0])));
    }
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<Config> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text, &path.display().to_string())
}

fn modes_poly(modes: &[ModeSpec]) -> TrigPoly {
    let mut p = TrigPoly::default();
    for m in modes {
        if m[0] == 0.0 && m[1] == 0.0 {
            p.constant += m[2];
        } else {
            p.modes.push(Mode { k: [m[0], m[1]], a: m[2], b: m[3] });
        }
    }
    p
}

fn check_shift(modes: &[ModeSpec], shift: [f64; 2], what: &str) -> std::result::Result<(), String> {
    for m in modes {
        for a in 0..2 {
            let r = m[a] - shift[a];
            if (r - r.round()).abs() > 1e-12 {
                return Err(format!("{what}: frequency {} on axis {} does not match the boundary twist", m[a], a + 1));
            }
        }
    }
    Ok(())
}

impl ScenarioConfig {
    pub fn validate(&self) -> std::result::Result<(), String> {
        TorusGrid::new(self.grid.n, self.grid.order).map_err(|e| e.to_string())?;
        let spin = SpinStructure::new(self.spin[0], self.spin[1]).map_err(|e| e.to_string())?;
        for c in &self.checks {
            if !crate::suites::is_known(c) {
                return Err(format!("unknown check '{c}'; known: {}", crate::suites::CHECKS.join(", ")));
            }
        }
        for k in self.tolerances.keys() {
            if !crate::suites::is_known_record(k) {
                return Err(format!("tolerance for unknown check '{k}'"));
            }
        }
        if self.samples == 0 {
            return Err("samples must be at least 1".into());
        }
        match &self.metric {
            MetricSpec::Conformal { seed, u, .. } | MetricSpec::General { seed, u, .. } => {
                if seed.is_none() && u.is_empty() && !matches!(self.metric, MetricSpec::General { .. }) {
                    return Err("metric.seed is required unless metric.u is given".into());
                }
                if let MetricSpec::General { seed: None, nu1, nu2, .. } = &self.metric {
                    if nu1.is_empty() && nu2.is_empty() && u.is_empty() {
                        return Err("metric.seed is required unless coefficients are given".into());
                    }
                }
                check_shift(u, [0.0; 2], "metric.u")?;
            }
            MetricSpec::Flat => {}
        }
        match &self.target {
            TargetSpec::FlatRn { dim } | TargetSpec::FlatTorus { dim, .. } if *dim == 0 => {
                return Err("target.dim must be positive".into());
            }
            TargetSpec::FlatTorus { dim, winding } if winding.len() != *dim => {
                return Err(format!("target.winding has {} rows, dim is {dim}", winding.len()));
            }
            _ => {}
        }
        match &self.fields {
            FieldSpec::TwistorFamily { .. } => {
                if spin != SpinStructure::TRIVIAL {
                    return Err("twistor_family needs the trivial spin structure".into());
                }
                if !matches!(self.target, TargetSpec::FlatTorus { .. } | TargetSpec::FlatRn { .. }) {
                    return Err("twistor_family needs a flat target".into());
                }
                if matches!(self.metric, MetricSpec::General { .. }) {
                    return Err("twistor_family needs a flat or conformal metric".into());
                }
            }
            FieldSpec::Coeffs { phi, psi, chi } => {
                let d = self.target_dim();
                if phi.len() > d || psi.len() > 4 * d || chi.len() > 8 {
                    return Err("fields.coeffs has more components than the fields".into());
                }
                for (i, m) in psi.iter().chain(chi.iter()).enumerate() {
                    check_shift(m, spin.frequency_shift(), &format!("fields spinor component {i}"))?;
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn target_dim(&self) -> usize {
        match &self.target {
            TargetSpec::FlatRn { dim } | TargetSpec::FlatTorus { dim, .. } => *dim,
            TargetSpec::Sphere2 => 3,
        }
    }

    pub fn spin_structure(&self) -> SpinStructure {
        SpinStructure::new(self.spin[0], self.spin[1]).expect("validated")
    }

    pub fn target(&self) -> Target {
        match &self.target {
            TargetSpec::FlatRn { dim } => Target::FlatRn { dim: *dim },
            TargetSpec::FlatTorus { dim, .. } => Target::FlatTorus { dim: *dim },
            TargetSpec::Sphere2 => Target::Sphere2,
        }
    }

    pub fn winding(&self) -> Option<Vec<[i64; 2]>> {
        match &self.target {
            TargetSpec::FlatTorus { winding, .. } => Some(winding.clone()),
            _ => None,
        }
    }

    pub fn grid_at(&self, n: usize) -> Result<TorusGrid> {
        TorusGrid::new(n, self.grid.order)
    }

    /// Replace every seed with `s` (random streams stay distinct).
    pub fn override_seed(&mut self, s: u64) {
        self.seed = s;
        match &mut self.metric {
            MetricSpec::Conformal { seed, .. } | MetricSpec::General { seed, .. } => {
                if seed.is_some() {
                    *seed = Some(s);
                }
            }
            MetricSpec::Flat => {}
        }
        if let FieldSpec::Random { seed, .. } = &mut self.fields {
            *seed = s;
        }
    }

    pub fn analytic_metric(&self) -> AnalyticMetric {
        match &self.metric {
            MetricSpec::Flat => AnalyticMetric::flat(),
            MetricSpec::Conformal { seed, band, amplitude, u } => {
                if u.is_empty() {
                    let mut rng = seeded_rng(seed.expect("validated"), 100);
                    AnalyticMetric::conformal(AnalyticMetric::random(&mut rng, *band, *amplitude, 0.0).u)
                } else {
                    AnalyticMetric::conformal(modes_poly(u))
                }
            }
            MetricSpec::General { seed, band, amplitude, anisotropy, u, nu1, nu2 } => {
                if u.is_empty() && nu1.is_empty() && nu2.is_empty() {
                    let mut rng = seeded_rng(seed.expect("validated"), 100);
                    AnalyticMetric::random(&mut rng, *band, *amplitude, *anisotropy)
                } else {
                    AnalyticMetric { u: modes_poly(u), nu1: modes_poly(nu1), nu2: modes_poly(nu2) }
                }
            }
        }
    }

    pub fn metric_at(&self, grid: TorusGrid) -> Result<MetricField> {
        match self.metric {
            MetricSpec::Flat => Ok(MetricField::flat(grid)),
            _ => self.analytic_metric().sample(grid),
        }
    }

    /// The scenario state on a grid of size n.
    pub fn state_at(&self, n: usize) -> Result<ModelState> {
        self.state_with_seed(n, 0)
    }

    /// State with the field seed shifted by `offset` (random init only).
    pub fn state_with_seed(&self, n: usize, offset: u64) -> Result<ModelState> {
        let grid = self.grid_at(n)?;
        let g = self.metric_at(grid)?;
        let spin = self.spin_structure();
        let target = self.target();
        match &self.fields {
            FieldSpec::Zero => {
                let phi = match &self.target {
                    TargetSpec::FlatTorus { winding, .. } => MapField::winding_map(grid, winding.clone(), None),
                    TargetSpec::FlatRn { dim } => MapField::constant(grid, target, &vec![0.0; *dim]),
                    TargetSpec::Sphere2 => MapField::sphere_equator(grid),
                };
                ModelState::bosonic(phi, g, spin)
            }
            FieldSpec::Random { seed, band, phi, psi, chi } => {
                let spec = RandomSpec { band: *band, phi: *phi, psi: *psi, chi: *chi };
                ModelState::random(seed + offset, g, target, spin, self.winding(), spec)
            }
            FieldSpec::TwistorFamily { t, q, perturb } => {
                let phi = match &self.target {
                    TargetSpec::FlatTorus { winding, .. } => MapField::winding_map(grid, winding.clone(), None),
                    _ => MapField::constant(grid, target, &vec![0.0; self.target_dim()]),
                };
                let qp = if g.flat { SusyParameter::constant(&g, *q) } else { SusyParameter::conformal_parallel(&g, *q)? };
                let s = twistor_state(&qp, &phi, *t, &g)?;
                if *perturb == 0.0 {
                    return Ok(s);
                }
                let mut rng = seeded_rng(self.seed + offset, 200);
                let scale = s.psi.max_abs().max(1.0);
                let noise = SpinorField::random(&mut rng, grid, spin, s.psi.cols, 2, perturb * scale);
                let dphi = MapField::random(&mut rng, grid, Target::FlatRn { dim: s.phi.dim() }, None, 2, *perturb).values;
                let phi = s.phi.moved(&dphi, 1.0);
                let psi = phi.project_spinors(&s.psi.axpy(1.0, &noise));
                ModelState::new(phi, psi, g, s.chi)
            }
            FieldSpec::Coeffs { phi, psi, chi } => {
                let d = self.target_dim();
                let comp = |list: &Vec<Vec<ModeSpec>>, k: usize| list.get(k).map(|m| modes_poly(m)).unwrap_or_default();
                let map = match &self.target {
                    TargetSpec::Sphere2 => {
                        let base = MapField::sphere_equator(grid);
                        let v: Vec<f64> = (0..grid.len())
                            .flat_map(|p| {
                                let x = grid.coords(p);
                                (0..3).map(move |j| (j, x)).collect::<Vec<_>>()
                            })
                            .map(|(j, x)| comp(phi, j).eval(x))
                            .collect();
                        base.moved(&v, 1.0)
                    }
                    _ => {
                        let mut values = vec![0.0; d * grid.len()];
                        for j in 0..d {
                            let s = comp(phi, j).sample(&grid);
                            for p in 0..grid.len() {
                                values[p * d + j] = s[p];
                            }
                        }
                        let winding = self.winding().unwrap_or_default();
                        MapField { grid, target, winding, values }
                    }
                };
                let pp: Vec<TrigPoly> = (0..4 * d).map(|k| comp(psi, k)).collect();
                let cp: Vec<TrigPoly> = (0..8).map(|k| comp(chi, k)).collect();
                let psi = map.project_spinors(&SpinorField::from_trig(grid, spin, d, &pp));
                let chi = SpinorField::from_trig(grid, spin, 2, &cp);
                ModelState::new(map, psi, g, chi)
            }
        }
    }
}
