//! Named verification checks run by the scenario runner.
//!
//! Every check evaluates one scenario on one grid and returns one or more
//! measurements. A measurement passes when its value is at most its
//! tolerance; defaults below can be overridden per scenario.

use serde::{Deserialize, Serialize};

use crate::action::{dirac_action, total_action};
use crate::clifford;
use crate::config::{FieldSpec, MetricSpec, ScenarioConfig, TargetSpec};
use crate::error::{Error, Result};
use crate::fields::{apply_p, apply_q, projections_pq, random_vector_spinor, MapField, Target};
use crate::geometry::{adjunction_defect, adjunction_defect_analytic, MetricField, Sym2Field, VectorField};
use crate::grid::TorusGrid;
use crate::noether::{
    chi_gradient_check, conservation_defects, diffeo_variation_parts, covector_norm, dirac_energy_momentum, holomorphy_defect_j,
    holomorphy_defect_t, metric_gradient_check, phi_gradient_check, psi_gradient_check, supercurrent, target_inner,
    transported_dirac_derivative_check, Evaluation,
};
use crate::solvers::{
    dirac_spectrum, flat_dirac_oracle, gradient_flow, solve_psi, FlowOptions, FlowReport, FlowStatus, PsiSolution, SolveOptions,
    SpectrumReport,
};
use crate::spin::{dirac, dirac_conformal_check, lemma_defect, lemma_defect_analytic, SpinStructure, SpinorField};
use crate::state::{ModelState, RandomSpec};
use crate::symmetries::{apply_rescaled_conformal, apply_super_weyl, apply_translation, susy_defect, SusyParameter};
use crate::trig::{seeded_rng, TrigPoly};

/// How a measurement behaves under grid refinement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    /// Zero up to roundoff on every grid.
    Exact,
    /// Discretization error; decays at the stencil order.
    Order,
    /// Bounded by O(h^order); faster decay also passes.
    Bound,
    /// A plain pass/fail quantity, not part of refinement studies.
    Value,
}

#[derive(Clone, Debug)]
pub struct Measurement {
    pub check: String,
    pub value: f64,
    pub tolerance: f64,
    pub kind: Kind,
}

pub const CHECKS: &[&str] = &[
    "clifford",
    "projections",
    "supercurrent_p_free",
    "super_weyl",
    "sign_symmetry",
    "translation",
    "trace_dirac",
    "trace_full",
    "fd_psi",
    "fd_phi",
    "fd_chi",
    "fd_metric",
    "rescaled_conformal_dirac",
    "rescaled_conformal",
    "homogeneous",
    "diffeo",
    "adjunction",
    "adjunction_analytic",
    "lemma",
    "lemma_analytic",
    "transported_dirac",
    "on_shell",
    "off_shell_control",
    "susy",
    "susy_control",
    "spectrum",
    "solve",
    "flow",
];

const ON_SHELL: [&str; 6] = ["el", "div_t", "trace_t", "div_j", "holo_t", "holo_j"];

pub fn is_known(name: &str) -> bool {
    CHECKS.contains(&name)
}

/// Check names plus the record names of multi-record checks.
pub fn is_known_record(name: &str) -> bool {
    if is_known(name) {
        return true;
    }
    match name.split_once('.') {
        Some(("on_shell", r)) => ON_SHELL.contains(&r),
        Some(("spectrum", r)) => ["kernel", "first", "residual"].contains(&r),
        Some(("flow", r)) => ["residual", "monotone"].contains(&r),
        _ => false,
    }
}

/// Default tolerance of a record on a given grid.
pub fn default_tolerance(record: &str, grid: &TorusGrid) -> f64 {
    let h = grid.h();
    let hp = h.powi(grid.order as i32);
    match record {
        "clifford" | "projections" | "supercurrent_p_free" | "super_weyl" | "sign_symmetry" | "translation" => 1e-12,
        "adjunction" | "lemma" => 1e-12,
        "trace_dirac" | "trace_full" => 1e-10,
        "fd_psi" | "fd_chi" => 1e-6,
        "fd_phi" | "fd_metric" => 1e-6 + 10.0 * hp,
        "off_shell_control" | "susy_control" => 1e-2,
        "spectrum.kernel" => 0.0,
        "spectrum.first" => (2.0 * std::f64::consts::PI * h).powi(grid.order as i32),
        "spectrum.residual" => 1e-8,
        "solve" => 1e-8,
        "flow.residual" => 1e-6,
        "flow.monotone" => 0.0,
        // discretization errors of O(1) quantities
        _ => 100.0 * hp,
    }
}

pub fn kind_of(record: &str) -> Kind {
    match record {
        "clifford" | "projections" | "supercurrent_p_free" | "super_weyl" | "sign_symmetry" | "translation" | "adjunction"
        | "lemma" | "trace_dirac" | "trace_full" => Kind::Exact,
        "rescaled_conformal_dirac" | "rescaled_conformal" | "homogeneous" | "diffeo" | "adjunction_analytic"
        | "lemma_analytic" | "transported_dirac" => Kind::Order,
        "susy" => Kind::Bound,
        r if r.starts_with("on_shell.") => Kind::Order,
        _ => Kind::Value,
    }
}

/// Whether a check contributes to refinement studies.
pub fn refinable(check: &str) -> bool {
    match check {
        "on_shell" => true,
        c => kind_of(c) != Kind::Value,
    }
}

struct Ctx<'a> {
    sc: &'a ScenarioConfig,
    n: usize,
    grid: TorusGrid,
}

impl Ctx<'_> {
    fn rng(&self, stream: u64) -> rand_chacha::ChaCha8Rng {
        seeded_rng(self.sc.seed, stream)
    }

    fn poly(&self, stream: u64, band: usize, amp: f64, shift: [f64; 2]) -> TrigPoly {
        TrigPoly::random(&mut self.rng(stream), band, amp, shift)
    }

    /// Mean-free conformal factor with sup 0.2.
    fn u(&self) -> Vec<f64> {
        let mut p = self.poly(300, 1, 1.0, [0.0; 2]);
        p.constant = 0.0;
        let s = p.sup_on(&TorusGrid { n: 64, order: 2 });
        p.scaled(0.2 / s).sample(&self.grid)
    }

    fn x_polys(&self) -> (TrigPoly, TrigPoly) {
        (self.poly(310, 1, 0.5, [0.0; 2]), self.poly(311, 1, 0.5, [0.0; 2]))
    }

    fn x(&self) -> VectorField {
        let (a, b) = self.x_polys();
        VectorField::from_trig(self.grid, &a, &b)
    }

    fn k(&self, j: u64) -> Sym2Field {
        let s = 320 + 3 * j;
        Sym2Field::from_trig(
            self.grid,
            &self.poly(s, 1, 0.5, [0.0; 2]),
            &self.poly(s + 1, 1, 0.5, [0.0; 2]),
            &self.poly(s + 2, 1, 0.5, [0.0; 2]),
        )
    }

    fn spinor_polys(&self, stream: u64) -> Vec<TrigPoly> {
        let shift = self.sc.spin_structure().frequency_shift();
        (0..4).map(|k| self.poly(stream + k, 2, 1.0, shift)).collect()
    }

    fn sigma(&self, stream: u64) -> SpinorField {
        SpinorField::from_trig(self.grid, self.sc.spin_structure(), 1, &self.spinor_polys(stream))
    }

    fn metric(&self) -> Result<MetricField> {
        self.sc.metric_at(self.grid)
    }

    fn state(&self) -> Result<ModelState> {
        self.sc.state_at(self.n)
    }

    fn m(&self, check: &str, value: f64) -> Measurement {
        let tolerance = self.sc.tolerances.get(check).copied().unwrap_or_else(|| default_tolerance(check, &self.grid));
        Measurement { check: check.to_string(), value, tolerance, kind: kind_of(check) }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

fn el_residual(ev: &Evaluation, g: &MetricField, d: usize) -> f64 {
    let e = ev.el_phi();
    ev.el_psi().norm(g) + target_inner(&e, &e, d, g).sqrt()
}

/// Run one named check of a scenario on an n×n grid.
pub fn run_check(sc: &ScenarioConfig, check: &str, n: usize) -> Result<Vec<Measurement>> {
    let grid = sc.grid_at(n)?;
    let c = Ctx { sc, n, grid };
    let one = |v: f64| Ok(vec![c.m(check, v)]);
    match check {
        "clifford" => one(clifford::relations_defect()),
        "projections" => {
            let s = c.state()?;
            let chi = if s.chi.max_abs() > 0.0 { s.chi.clone() } else { SpinorField::random(&mut c.rng(330), grid, s.spin(), 2, 2, 1.0) };
            let (p, q) = projections_pq(&chi);
            let d = [
                p.axpy(1.0, &q).axpy(-1.0, &chi).max_abs(),
                apply_p(&p).axpy(-1.0, &p).max_abs(),
                apply_q(&q).axpy(-1.0, &q).max_abs(),
                apply_p(&q).max_abs(),
            ];
            one(d.iter().fold(0.0f64, |a, b| a.max(*b)) / chi.max_abs().max(1.0))
        }
        "supercurrent_p_free" => {
            let j = supercurrent(&c.state()?)?;
            let m = j.max_abs();
            one(if m > 0.0 { apply_p(&j).max_abs() / m } else { 0.0 })
        }
        "super_weyl" => {
            let s = c.state()?;
            let zeta = SpinorField::random(&mut c.rng(331), grid, s.spin(), 2, 2, 1.0);
            let a = total_action(&s)?.total;
            one(rel(a, total_action(&apply_super_weyl(&s, &zeta)?)?.total))
        }
        "sign_symmetry" => {
            let s = c.state()?;
            let t = ModelState { psi: s.psi.scaled(-1.0), chi: s.chi.scaled(-1.0), ..s.clone() };
            one(rel(total_action(&s)?.total, total_action(&t)?.total))
        }
        "translation" => {
            let s = c.state()?;
            let a = total_action(&s)?.total;
            let mut worst = 0.0f64;
            for steps in [[1, 0], [0, 1], [3, -(n as isize) / 2 - 1]] {
                worst = worst.max(rel(a, total_action(&apply_translation(&s, steps)?)?.total));
            }
            one(worst)
        }
        "trace_dirac" => {
            let g = c.metric()?;
            let sigma = c.sigma(340);
            let t = dirac_energy_momentum(&sigma, &g)?.trace();
            let l = sigma.dot_pointwise(&dirac(&sigma, &g)?);
            one(t.iter().zip(&l).map(|(t, l)| (t + l).abs() / (1.0 + l.abs())).fold(0.0, f64::max))
        }
        "trace_full" => {
            let s = c.state()?;
            let ev = Evaluation::new(&s)?;
            let d = ev.trace_defect();
            let sc = ev.trace_scale();
            one(d.iter().zip(&sc).map(|(d, s)| d.abs() / s).fold(0.0, f64::max))
        }
        "fd_psi" | "fd_phi" | "fd_chi" | "fd_metric" => {
            let mut worst = 0.0f64;
            for i in 0..sc.samples as u64 {
                let s = sc.state_with_seed(n, i)?;
                let mut rng = seeded_rng(sc.seed + i, 400);
                let errs: Vec<f64> = match check {
                    "fd_psi" => {
                        let eta = random_vector_spinor(&mut rng, &s.phi, s.spin(), 2, 1.0);
                        vec![psi_gradient_check(&s, &eta, 1e-4)?.scaled_error()]
                    }
                    "fd_phi" => {
                        let v = MapField::random(&mut rng, grid, Target::FlatRn { dim: s.phi.dim() }, None, 2, 1.0).values;
                        vec![phi_gradient_check(&s, &v, 1e-4)?.scaled_error()]
                    }
                    "fd_chi" => {
                        let zeta = SpinorField::random(&mut rng, grid, s.spin(), 2, 2, 1.0);
                        vec![chi_gradient_check(&s, &zeta, 1e-4)?.scaled_error()]
                    }
                    _ => (0..5).map(|j| metric_gradient_check(&s, &c.k(j + 10 * i), 1e-5).map(|r| r.scaled_error())).collect::<Result<_>>()?,
                };
                worst = errs.into_iter().fold(worst, f64::max);
            }
            one(worst)
        }
        "rescaled_conformal_dirac" => {
            let g = c.metric()?;
            let sigma = c.sigma(340);
            let u = c.u();
            let w: Vec<f64> = u.iter().map(|u| (-0.5 * u).exp()).collect();
            let a = dirac_action(&sigma, &g)?;
            let b = dirac_action(&sigma.scale_pointwise(&w), &g.conformal_rescale(&u))?;
            one((a - b).abs())
        }
        "rescaled_conformal" => {
            let s = c.state()?;
            let a = total_action(&s)?.total;
            one((a - total_action(&apply_rescaled_conformal(&s, &c.u()))?.total).abs())
        }
        "homogeneous" => one(dirac_conformal_check(&c.sigma(340), &c.u(), &c.metric()?)?),
        "diffeo" => {
            // relative to the size of the parts, which grow with the fields
            let [a, b, d] = diffeo_variation_parts(&c.state()?, &c.x())?;
            one((a + b + d).abs() / (a.abs() + b.abs() + d.abs()).max(1e-300))
        }
        "adjunction" => one(adjunction_defect(&c.x(), &c.k(0), &c.metric()?)?.abs()),
        "adjunction_analytic" => {
            let (a, b) = c.x_polys();
            one(adjunction_defect_analytic(&sc.analytic_metric(), &a, &b, &c.k(0), &c.metric()?)?.abs())
        }
        "lemma" => one(lemma_defect(&c.x(), &c.sigma(340), &c.sigma(350), &c.metric()?)?.abs()),
        "lemma_analytic" => {
            let (a, b) = c.x_polys();
            let polys = c.spinor_polys(340);
            one(lemma_defect_analytic(&a, &b, &polys, sc.spin_structure(), &c.sigma(350), &c.metric()?)?.abs())
        }
        "transported_dirac" => one(transported_dirac_derivative_check(&c.k(0), &c.sigma(340), &c.metric()?, 1e-5)?),
        "on_shell" => {
            if !matches!(sc.fields, FieldSpec::TwistorFamily { perturb, .. } if perturb == 0.0) {
                return Err(Error::Config("on_shell needs an unperturbed twistor_family state".into()));
            }
            let s = c.state()?;
            let g = &s.g;
            let ev = Evaluation::new(&s)?;
            let cd = conservation_defects(&s)?;
            let h = holomorphy_defect_t(&ev.energy_momentum(), g)?;
            let vals = [
                el_residual(&ev, g, s.phi.dim()),
                covector_norm(&cd.strong_t, g),
                h.trace,
                cd.div_j.norm(g),
                h.cauchy_riemann,
                holomorphy_defect_j(&ev.supercurrent(), g)?,
            ];
            Ok(ON_SHELL.iter().zip(vals).map(|(r, v)| c.m(&format!("on_shell.{r}"), v)).collect())
        }
        "off_shell_control" => {
            let s = c.state()?;
            let ev = Evaluation::new(&s)?;
            let on = el_residual(&ev, &s.g, s.phi.dim());
            let off_state = ModelState::random(sc.seed, s.g.clone(), s.target(), s.spin(), sc.winding(), RandomSpec::default())?;
            let off = el_residual(&Evaluation::new(&off_state)?, &s.g, s.phi.dim());
            one(on / off)
        }
        "susy" | "susy_control" => {
            let (s, q) = susy_setup(&c)?;
            let good = susy_defect(&s, &q, 1e-4)?.fd.abs();
            if check == "susy" {
                return one(good);
            }
            let w = grid.map_points(|x| 1.0 + 0.5 * (2.0 * std::f64::consts::PI * x[1]).cos());
            let bad = susy_defect(&s, &SusyParameter::new(q.q.scale_pointwise(&w))?, 1e-4)?.fd.abs();
            one(good / bad)
        }
        "spectrum" => Ok(spectrum_check(sc, n, 8)?.1),
        "solve" => Ok(solve_check(sc, n)?.1),
        "flow" => Ok(flow_check(sc, n)?.1),
        other => Err(Error::Config(format!("unknown check '{other}'"))),
    }
}

/// Lowest m eigenpairs of ∂̸² with the kernel, first-eigenvalue and
/// residual records.
pub fn spectrum_check(sc: &ScenarioConfig, n: usize, m: usize) -> Result<(SpectrumReport, Vec<Measurement>)> {
    let grid = sc.grid_at(n)?;
    let c = Ctx { sc, n, grid };
    let g = c.metric()?;
    let spin = sc.spin_structure();
    let r = dirac_spectrum(&g, spin, m)?;
    let expected = if spin == SpinStructure::TRIVIAL { 4 } else { 0 };
    let mut out = vec![c.m("spectrum.kernel", (r.kernel_dim as f64 - expected as f64).abs())];
    if g.flat {
        let exact = continuum_first_eigenvalue(spin);
        let got = r.first_nonzero.unwrap_or(f64::INFINITY);
        out.push(c.m("spectrum.first", (got - exact).abs() / exact));
    }
    let res = r.residuals.iter().fold(0.0f64, |a, b| a.max(*b)) / r.scale.max(1.0);
    out.push(c.m("spectrum.residual", res));
    Ok((r, out))
}

pub fn solve_check(sc: &ScenarioConfig, n: usize) -> Result<(PsiSolution, Vec<Measurement>)> {
    let grid = sc.grid_at(n)?;
    let c = Ctx { sc, n, grid };
    let s = c.state()?;
    let sol = solve_psi(&s.phi, &s.chi, &s.g, &SolveOptions::default())?;
    let m = vec![c.m("solve", sol.residual)];
    Ok((sol, m))
}

pub fn flow_check(sc: &ScenarioConfig, n: usize) -> Result<(FlowReport, Vec<Measurement>)> {
    let grid = sc.grid_at(n)?;
    let c = Ctx { sc, n, grid };
    let (_, rep) = gradient_flow(&c.state()?, &FlowOptions::default())?;
    if rep.status != FlowStatus::Converged {
        log::warn!("{}: flow stopped with {:?} after {} iterations", sc.id, rep.status, rep.iterations);
    }
    let m = vec![c.m("flow.residual", rep.residual()), c.m("flow.monotone", if rep.monotone { 0.0 } else { 1.0 })];
    Ok((rep, m))
}

/// Smallest nonzero eigenvalue of ∂̸² on the flat unit torus.
pub fn continuum_first_eigenvalue(spin: SpinStructure) -> f64 {
    let s = spin.frequency_shift();
    let mut best = f64::INFINITY;
    for j1 in -2..=2 {
        for j2 in -2..=2 {
            let k = [j1 as f64 + s[0], j2 as f64 + s[1]];
            let l = 4.0 * std::f64::consts::PI.powi(2) * (k[0] * k[0] + k[1] * k[1]);
            if l > 0.0 {
                best = best.min(l);
            }
        }
    }
    best
}

/// Flat target, flat metric, trivial spin, χ = 0, constant q.
fn susy_setup(c: &Ctx) -> Result<(ModelState, SusyParameter)> {
    if !matches!(c.sc.metric, MetricSpec::Flat) || matches!(c.sc.target, TargetSpec::Sphere2) || c.sc.spin_structure() != SpinStructure::TRIVIAL {
        return Err(Error::Config("susy checks need a flat metric, a flat target and the trivial spin structure".into()));
    }
    let s = c.state()?;
    let chi = SpinorField::zeros(c.grid, s.spin(), 2);
    let q0 = match c.sc.fields {
        FieldSpec::TwistorFamily { q, .. } => q,
        _ => [0.7, -0.2, 0.4, 0.5],
    };
    Ok((s.with_chi(chi), SusyParameter::constant(&s.g, q0)))
}

/// Oracle eigenvalues for a flat scenario, used by the spectrum table.
pub fn oracle_eigenvalues(sc: &ScenarioConfig, n: usize, m: usize) -> Result<Option<Vec<f64>>> {
    if !matches!(sc.metric, MetricSpec::Flat) {
        return Ok(None);
    }
    Ok(Some(flat_dirac_oracle(sc.grid_at(n)?, sc.spin_structure(), m)))
}
