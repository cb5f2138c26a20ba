//! On-shell states: spectrum of the squared Dirac operator, the linear ψ
//! solve at fixed (φ, χ), and a gradient flow for the full action.
//!
//! All Krylov methods work in the √g-weighted L² product, in which the
//! discrete Dirac operator is exactly self-adjoint.

use log::{debug, info, warn};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::action::total_action;
use crate::error::{Error, Result};
use crate::fields::{apply_q, contract_pushforward, pushforward, q_norm_sq, GravitinoField, MapField, VectorSpinorField};
use crate::geometry::MetricField;
use crate::grid::TorusGrid;
use crate::noether::{target_inner, Evaluation};
use crate::spin::{dirac, regulator_power, SpinStructure, SpinorField};
use crate::state::ModelState;
use crate::trig::seeded_rng;

/// Eigenvalues below this multiple of the first nonzero one count as kernel.
pub const KERNEL_TOL: f64 = 1e-6;
/// Eigenvalues below this multiple of the operator scale are roundoff zeros.
pub const ZERO_TOL: f64 = 1e-12;

/// Weighted inner product ∫⟨a, b⟩ dvol_g without compensated summation.
fn wdot(a: &SpinorField, b: &SpinorField, g: &MetricField) -> f64 {
    let w = a.width();
    let h2 = g.grid.h() * g.grid.h();
    a.data
        .chunks(w)
        .zip(b.data.chunks(w))
        .zip(&g.sqrt_det)
        .map(|((x, y), s)| s * x.iter().zip(y).map(|(x, y)| x * y).sum::<f64>())
        .sum::<f64>()
        * h2
}

fn axpy_in_place(y: &mut SpinorField, a: f64, x: &SpinorField) {
    y.data.iter_mut().zip(&x.data).for_each(|(y, x)| *y += a * x);
}

fn combine(vs: &[SpinorField], coeffs: impl Iterator<Item = f64>) -> SpinorField {
    let mut out = vs[0].zeros_like();
    for (v, c) in vs.iter().zip(coeffs) {
        if c != 0.0 {
            axpy_in_place(&mut out, c, v);
        }
    }
    out
}

/// Two passes of classical Gram–Schmidt against an orthonormal family.
fn orthogonalize(v: &mut SpinorField, basis: &[&SpinorField], g: &MetricField) {
    for _ in 0..2 {
        let c: Vec<f64> = basis.iter().map(|b| wdot(b, v, g)).collect();
        for (b, c) in basis.iter().zip(c) {
            axpy_in_place(v, -c, b);
        }
    }
}

fn white_noise<R: Rng>(rng: &mut R, template: &SpinorField) -> SpinorField {
    template.with_data((0..template.data.len()).map(|_| rng.gen::<f64>() - 0.5).collect())
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LanczosOptions {
    pub block: usize,
    pub max_basis: usize,
    /// Ritz residual tolerance relative to the largest Ritz value seen.
    pub res_tol: f64,
    pub max_matvecs: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions { block: 4, max_basis: 100, res_tol: 1e-9, max_matvecs: 200_000, seed: 0 }
    }
}

/// Lowest eigenpairs of a self-adjoint operator.
#[derive(Clone, Debug)]
pub struct EigenResult {
    pub values: Vec<f64>,
    pub vectors: Vec<SpinorField>,
    pub residuals: Vec<f64>,
    pub matvecs: usize,
    /// Largest Ritz value seen, an estimate of the operator norm.
    pub scale: f64,
}

struct Ritz {
    values: Vec<f64>,
    vectors: Vec<SpinorField>,
    scale: f64,
    matvecs: usize,
}

/// One block Lanczos run with full reorthogonalization and thick restarts,
/// confined to the complement of `locked`.
fn block_lanczos<F>(op: &F, template: &SpinorField, g: &MetricField, m: usize, locked: &[SpinorField], opts: &LanczosOptions, stream: u64) -> Result<Ritz>
where
    F: Fn(&SpinorField) -> SpinorField,
{
    let dim = template.data.len() - locked.len();
    let m = m.min(dim);
    let b = opts.block.max(1).min(dim);
    let max_basis = opts.max_basis.max(m + 2 * b).min(dim);
    let mut rng = seeded_rng(opts.seed, 1000 + stream);
    let mut basis: Vec<SpinorField> = Vec::new();
    let mut images: Vec<SpinorField> = Vec::new();
    let mut t: Vec<Vec<f64>> = Vec::new();
    let mut matvecs = 0;
    let mut scale = 0.0f64;

    let mut raw: Vec<SpinorField> = (0..b).map(|_| white_noise(&mut rng, template)).collect();
    loop {
        // orthonormalize the candidate block against locked, basis and itself
        let mut block: Vec<SpinorField> = Vec::with_capacity(b);
        for mut v in raw.drain(..) {
            for attempt in 0.. {
                let n0 = wdot(&v, &v, g).sqrt();
                let refs: Vec<&SpinorField> = locked.iter().chain(&basis).chain(&block).collect();
                orthogonalize(&mut v, &refs, g);
                let n1 = wdot(&v, &v, g).sqrt();
                if n1 > 1e-8 * n0 && n1 > 0.0 {
                    v = v.scaled(1.0 / n1);
                    break;
                }
                if attempt > 4 || basis.len() + block.len() + locked.len() >= template.data.len() {
                    v = v.zeros_like();
                    break;
                }
                v = white_noise(&mut rng, template);
            }
            if v.data.iter().any(|x| *x != 0.0) {
                block.push(v);
            }
        }
        if block.is_empty() {
            break;
        }
        let added = block.len();
        for v in block {
            let av = op(&v);
            matvecs += 1;
            let k = basis.len();
            let col: Vec<f64> = basis.iter().map(|u| wdot(u, &av, g)).collect();
            let diag = wdot(&v, &av, g);
            for (i, c) in col.iter().enumerate() {
                t[i].push(*c);
            }
            let mut row = col.clone();
            row.push(diag);
            t.push(row);
            debug_assert_eq!(t[k].len(), k + 1);
            basis.push(v);
            images.push(av);
        }
        let k = basis.len();
        let tm = DMatrix::from_fn(k, k, |i, j| 0.5 * (t[i][j] + t[j][i]));
        let eig = SymmetricEigen::new(tm);
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|a, b| eig.eigenvalues[*a].total_cmp(&eig.eigenvalues[*b]));
        scale = scale.max(eig.eigenvalues.iter().fold(0.0f64, |s, x| s.max(x.abs())));

        // next raw block: A-images of the newest block, orthogonalized
        let last = k - added..k;
        let mut next: Vec<SpinorField> = images[last.clone()].to_vec();
        {
            let refs: Vec<&SpinorField> = locked.iter().chain(&basis).collect();
            for v in next.iter_mut() {
                orthogonalize(v, &refs, g);
            }
        }
        let done = k >= m && {
            // residual of a Ritz pair lives in the span of `next`
            let gram: Vec<Vec<f64>> = next.iter().map(|a| next.iter().map(|b| wdot(a, b, g)).collect()).collect();
            order[..m].iter().all(|&c| {
                let y: Vec<f64> = last.clone().map(|i| eig.eigenvectors[(i, c)]).collect();
                let r2: f64 = (0..y.len()).map(|i| (0..y.len()).map(|j| y[i] * gram[i][j] * y[j]).sum::<f64>()).sum();
                r2.max(0.0).sqrt() <= opts.res_tol * scale.max(1e-300)
            })
        };
        if done || k >= dim {
            let values: Vec<f64> = order[..m].iter().map(|&c| eig.eigenvalues[c]).collect();
            let vectors = order[..m].iter().map(|&c| combine(&basis, (0..k).map(|i| eig.eigenvectors[(i, c)]))).collect();
            return Ok(Ritz { values, vectors, scale, matvecs });
        }
        if matvecs >= opts.max_matvecs {
            return Err(Error::NoConvergence(format!(
                "block Lanczos: {matvecs} products, lowest Ritz values {:?}",
                order[..m].iter().map(|&c| eig.eigenvalues[c]).collect::<Vec<_>>()
            )));
        }
        if k + b > max_basis {
            let keep = (m + b).min(k);
            let cols: Vec<usize> = order[..keep].to_vec();
            let nb: Vec<SpinorField> = cols.iter().map(|&c| combine(&basis, (0..k).map(|i| eig.eigenvectors[(i, c)]))).collect();
            let ni: Vec<SpinorField> = cols.iter().map(|&c| combine(&images, (0..k).map(|i| eig.eigenvectors[(i, c)]))).collect();
            t = (0..keep).map(|i| (0..keep).map(|j| if i == j { eig.eigenvalues[cols[i]] } else { 0.0 }).collect()).collect();
            basis = nb;
            images = ni;
            debug!("block Lanczos restart at {matvecs} products");
        }
        raw = next;
    }
    Err(Error::NoConvergence("block Lanczos: Krylov space exhausted".into()))
}

/// Lowest `m` eigenpairs of a self-adjoint operator on fields shaped like
/// `template`. Degenerate clusters wider than the block are recovered by
/// repeating the run in the complement of the pairs already found until a
/// fresh run finds nothing lower.
pub fn lowest_eigenpairs<F>(op: F, template: &SpinorField, g: &MetricField, m: usize, opts: &LanczosOptions) -> Result<EigenResult>
where
    F: Fn(&SpinorField) -> SpinorField,
{
    let mut vals: Vec<f64> = Vec::new();
    let mut vecs: Vec<SpinorField> = Vec::new();
    let mut matvecs = 0;
    let mut scale = 0.0f64;
    for round in 0..12u64 {
        let r = block_lanczos(&op, template, g, m, &vecs, opts, round)?;
        matvecs += r.matvecs;
        scale = scale.max(r.scale);
        let top = vals.last().copied().unwrap_or(f64::INFINITY);
        let slack = 10.0 * opts.res_tol * r.scale;
        if vals.len() >= m && r.values.first().map_or(true, |v| *v >= top - slack) {
            let residuals = vals.iter().zip(&vecs).map(|(l, v)| {
                let mut r = op(v);
                axpy_in_place(&mut r, -l, v);
                wdot(&r, &r, g).sqrt()
            });
            let residuals = residuals.collect();
            return Ok(EigenResult { values: vals, vectors: vecs, residuals, matvecs, scale });
        }
        let mut all: Vec<(f64, SpinorField)> = vals.into_iter().zip(vecs).chain(r.values.into_iter().zip(r.vectors)).collect();
        all.sort_by(|a, b| a.0.total_cmp(&b.0));
        all.truncate(m);
        (vals, vecs) = all.into_iter().unzip();
    }
    Err(Error::NoConvergence("deflated Lanczos rounds did not settle".into()))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub spin: String,
    pub metric: String,
    /// Lowest eigenvalues of ∂̸², ascending.
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    pub kernel_dim: usize,
    pub first_nonzero: Option<f64>,
    /// Largest eigenvalue below `first_nonzero` divided by it (0 without one).
    pub gap_ratio: f64,
    /// Operator norm estimate.
    pub scale: f64,
    pub matvecs: usize,
}

impl SpectrumReport {
    fn from_eigen(spin: SpinStructure, metric: String, r: &EigenResult) -> Self {
        let values: Vec<f64> = r.values.iter().map(|v| v.max(0.0)).collect();
        let first_nonzero = values.iter().copied().find(|v| *v > ZERO_TOL * r.scale);
        let (kernel_dim, gap_ratio) = match first_nonzero {
            Some(f) => {
                let below: Vec<f64> = values.iter().copied().filter(|v| *v < f).collect();
                (values.iter().filter(|v| **v < KERNEL_TOL * f).count(), below.iter().copied().fold(0.0, f64::max) / f)
            }
            None => {
                warn!("no clearly nonzero eigenvalue among the {} computed", values.len());
                (values.len(), 0.0)
            }
        };
        SpectrumReport {
            spin: spin.label(),
            metric,
            eigenvalues: values,
            residuals: r.residuals.clone(),
            kernel_dim,
            first_nonzero,
            gap_ratio,
            scale: r.scale,
            matvecs: r.matvecs,
        }
    }

    /// True when every eigenvalue below the first nonzero one is a clean
    /// kernel eigenvalue.
    pub fn is_resolved(&self) -> bool {
        self.gap_ratio < KERNEL_TOL
    }
}

pub fn metric_tag(g: &MetricField) -> String {
    if g.flat {
        "flat".into()
    } else if g.conformal_factor().is_some() {
        "conformal".into()
    } else {
        "general".into()
    }
}

/// Lowest `m` eigenvalues of ∂̸² on single spinors.
pub fn dirac_spectrum(g: &MetricField, spin: SpinStructure, m: usize) -> Result<SpectrumReport> {
    dirac_spectrum_with(g, spin, m, &LanczosOptions::default())
}

pub fn dirac_spectrum_with(g: &MetricField, spin: SpinStructure, m: usize, opts: &LanczosOptions) -> Result<SpectrumReport> {
    if m == 0 || m > 64 {
        return Err(Error::Config(format!("spectrum size must be in 1..=64, got {m}")));
    }
    let template = SpinorField::zeros(g.grid, spin, 1);
    let op = |s: &SpinorField| {
        let d = dirac(s, g).expect("grid checked");
        dirac(&d, g).expect("grid checked")
    };
    let r = lowest_eigenpairs(op, &template, g, m, opts)?;
    info!("spectrum {} on {} metric: {} products", spin.label(), metric_tag(g), r.matvecs);
    Ok(SpectrumReport::from_eigen(spin, metric_tag(g), &r))
}

/// Exact lowest `m` eigenvalues of the discrete flat ∂̸² from its plane-wave
/// symbol: Σ_α s(θ_α)² + (n Σ_α sin^{2m}(θ_α/2))², each with multiplicity 4.
pub fn flat_dirac_oracle(grid: TorusGrid, spin: SpinStructure, m: usize) -> Vec<f64> {
    let n = grid.n;
    let h = grid.h();
    let shift = spin.frequency_shift();
    let power = regulator_power(grid.order) as i32;
    let mut all = Vec::with_capacity(4 * n * n);
    for i in 0..n {
        for j in 0..n {
            let theta = [2.0 * std::f64::consts::PI * (i as f64 + shift[0]) / n as f64, 2.0 * std::f64::consts::PI * (j as f64 + shift[1]) / n as f64];
            let s2: f64 = theta
                .iter()
                .map(|t| grid.stencil().iter().map(|(l, c)| 2.0 * c * (*l as f64 * t).sin() / h).sum::<f64>().powi(2))
                .sum();
            let r: f64 = n as f64 * theta.iter().map(|t| (0.5 * t).sin().powi(2 * power)).sum::<f64>();
            all.extend([s2 + r * r; 4]);
        }
    }
    all.sort_by(|a, b| a.total_cmp(b));
    all.truncate(m);
    all
}

/// Minimal-residual iteration for a self-adjoint operator in the weighted
/// product, restricted to the complement of the orthonormal `deflate`.
/// Returns the iterate and the number of products used.
pub fn minres<F>(op: F, rhs: &SpinorField, g: &MetricField, tol: f64, max_iter: usize, deflate: &[SpinorField]) -> (SpinorField, usize)
where
    F: Fn(&SpinorField) -> SpinorField,
{
    let refs: Vec<&SpinorField> = deflate.iter().collect();
    let project = |v: &mut SpinorField| {
        if !refs.is_empty() {
            orthogonalize(v, &refs, g)
        }
    };
    let mut x = rhs.zeros_like();
    let mut used = 0;
    // restarted so the recurrence's residual estimate is re-anchored
    for _ in 0..20 {
        let mut r1 = rhs.clone();
        if used > 0 {
            axpy_in_place(&mut r1, -1.0, &op(&x));
        }
        project(&mut r1);
        let beta1 = wdot(&r1, &r1, g).sqrt();
        if beta1 <= tol || used >= max_iter {
            break;
        }
        let mut y = r1.clone();
        let mut r2 = r1.clone();
        let (mut oldb, mut beta, mut dbar, mut epsln, mut phibar) = (0.0, beta1, 0.0, 0.0, beta1);
        let (mut cs, mut sn) = (-1.0f64, 0.0f64);
        let mut w = rhs.zeros_like();
        let mut w2 = rhs.zeros_like();
        for itn in 0.. {
            if used >= max_iter {
                break;
            }
            let v = y.scaled(1.0 / beta);
            let mut yy = op(&v);
            used += 1;
            project(&mut yy);
            if itn > 0 {
                axpy_in_place(&mut yy, -beta / oldb, &r1);
            }
            let alfa = wdot(&v, &yy, g);
            axpy_in_place(&mut yy, -alfa / beta, &r2);
            r1 = std::mem::replace(&mut r2, yy.clone());
            y = yy;
            oldb = beta;
            beta = wdot(&r2, &r2, g).sqrt();
            let oldeps = epsln;
            let delta = cs * dbar + sn * alfa;
            let gbar = sn * dbar - cs * alfa;
            epsln = sn * beta;
            dbar = -cs * beta;
            let gamma = gbar.hypot(beta).max(f64::EPSILON);
            cs = gbar / gamma;
            sn = beta / gamma;
            let phi = cs * phibar;
            phibar *= sn;
            let w1 = std::mem::replace(&mut w2, w.clone());
            let mut nw = v;
            axpy_in_place(&mut nw, -oldeps, &w1);
            axpy_in_place(&mut nw, -delta, &w2);
            w = nw.scaled(1.0 / gamma);
            axpy_in_place(&mut x, phi, &w);
            if phibar <= 0.5 * tol || beta <= f64::EPSILON * beta1 {
                break;
            }
        }
    }
    (x, used)
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Required ‖EL(ψ)‖ in L².
    pub tol: f64,
    pub max_iter: usize,
    /// Number of eigenvalues computed for the invertibility check.
    pub spectrum_size: usize,
    /// Refuse when the smallest nonzero singular value over the operator
    /// norm falls below this.
    pub min_gap: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-8, max_iter: 20_000, spectrum_size: 8, min_gap: 1e-5 }
    }
}

#[derive(Clone, Debug)]
pub struct PsiSolution {
    pub psi: VectorSpinorField,
    /// ‖EL(ψ)‖ recomputed from the returned state.
    pub residual: f64,
    pub iterations: usize,
    pub kernel_dim: usize,
    /// L² norm of the right-hand side's component along the kernel.
    pub rhs_kernel_component: f64,
    /// Spectrum of (∂̸ − |Qχ|²)².
    pub spectrum: SpectrumReport,
}

/// Solve EL(ψ) = 0 at fixed (φ, χ, g) for a flat target, i.e.
/// ∂̸ψ − |Qχ|²ψ = 2(1⊗φ_*)Qχ, in the complement of the operator's kernel.
pub fn solve_psi(phi: &MapField, chi: &GravitinoField, g: &MetricField, opts: &SolveOptions) -> Result<PsiSolution> {
    if !phi.target.is_flat() {
        return Err(Error::Incompatible(format!("solve_psi needs a flat target, got {}", phi.target.label())));
    }
    phi.grid.check_same(&g.grid)?;
    chi.grid.check_same(&g.grid)?;
    let spin = chi.spin;
    let qn = q_norm_sq(chi);
    let single = |s: &SpinorField| dirac(s, g).expect("grid checked").axpy(-1.0, &s.scale_pointwise(&qn));

    let template = SpinorField::zeros(g.grid, spin, 1);
    let eig = lowest_eigenpairs(|s: &SpinorField| single(&single(s)), &template, g, opts.spectrum_size, &LanczosOptions::default())?;
    let spectrum = SpectrumReport::from_eigen(spin, metric_tag(g), &eig);
    // smallest nonzero singular value of the operator relative to its norm
    let gap = spectrum.first_nonzero.map_or(0.0, |f| (f / spectrum.scale).sqrt());
    if !spectrum.is_resolved() || gap < opts.min_gap {
        return Err(Error::SmallGap { gap, threshold: opts.min_gap, spectrum: Box::new(spectrum) });
    }
    let kernel: Vec<&SpinorField> = eig.vectors[..spectrum.kernel_dim].iter().collect();

    let d = phi.dim();
    let rhs = contract_pushforward(&apply_q(chi), &pushforward(phi, g)?).scaled(2.0);
    // kernel of the column-wise operator: one copy per target column
    let mut deflate = Vec::with_capacity(kernel.len() * d);
    for k in &kernel {
        for c in 0..d {
            let mut f = SpinorField::zeros(g.grid, spin, d);
            f.set_column(c, k);
            deflate.push(f);
        }
    }
    let mut projected = rhs.clone();
    orthogonalize(&mut projected, &deflate.iter().collect::<Vec<_>>(), g);
    let rhs_kernel_component = rhs.axpy(-1.0, &projected).norm(g);
    if rhs_kernel_component > opts.tol {
        warn!("right-hand side has a kernel component {rhs_kernel_component:.3e}; solving in the complement");
    }

    let full = |s: &SpinorField| dirac(s, g).expect("grid checked").axpy(-1.0, &s.scale_pointwise(&qn));
    let (psi, iterations) = minres(full, &projected, g, 0.5 * opts.tol, opts.max_iter, &deflate);
    let state = ModelState::new(phi.clone(), psi, g.clone(), chi.clone())?;
    let residual = Evaluation::new(&state)?.el_psi().norm(g);
    info!("solve_psi: {iterations} iterations, residual {residual:.3e}, kernel {}", spectrum.kernel_dim);
    if residual > opts.tol + rhs_kernel_component {
        return Err(Error::NoConvergence(format!("solve_psi residual {residual:.3e} after {iterations} iterations")));
    }
    Ok(PsiSolution { psi: state.psi, residual, iterations, kernel_dim: spectrum.kernel_dim, rhs_kernel_component, spectrum })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FlowOptions {
    /// Stop when ‖EL(φ)‖ + ‖EL(ψ)‖ ≤ tol.
    pub tol: f64,
    pub max_iter: usize,
    /// Keep ψ fixed (harmonic map flow when ψ = 0 and χ = 0).
    pub freeze_psi: bool,
    /// MINRES products per ψ step.
    pub psi_inner: usize,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions { tol: 1e-6, max_iter: 10_000, freeze_psi: false, psi_inner: 30 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowStatus {
    Converged,
    MaxIter,
    Stagnated,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FlowReport {
    pub status: FlowStatus,
    pub iterations: usize,
    /// Action after every accepted step of either kind (first entry: initial).
    pub actions: Vec<f64>,
    /// No accepted φ step raised the action.
    pub monotone: bool,
    /// ‖EL(ψ)‖ before and after every accepted ψ step.
    pub psi_residuals: Vec<[f64; 2]>,
    pub residual_phi: f64,
    pub residual_psi: f64,
    pub phi_steps: Vec<f64>,
    pub psi_steps: Vec<f64>,
    pub inner_products: usize,
}

impl FlowReport {
    pub fn residual(&self) -> f64 {
        self.residual_phi + self.residual_psi
    }
}

fn residuals(state: &ModelState) -> Result<(Vec<f64>, VectorSpinorField, f64, f64)> {
    let ev = Evaluation::new(state)?;
    let ephi = ev.el_phi();
    let epsi = ev.el_psi();
    let rp = target_inner(&ephi, &ephi, state.phi.dim(), &state.g).max(0.0).sqrt();
    let rs = epsi.norm(&state.g);
    Ok((ephi, epsi, rp, rs))
}

fn moved_state(state: &ModelState, d: &[f64], alpha: f64) -> ModelState {
    let phi = state.phi.moved(d, alpha);
    let psi = phi.project_spinors(&state.psi);
    ModelState { phi, psi, g: state.g.clone(), chi: state.chi.clone() }
}

/// Alternating flow at frozen (g, χ): nonlinear conjugate gradient with a
/// monotone line search on the action in φ, and minimal-residual steps on
/// EL(ψ) in ψ (the action is indefinite in ψ).
pub fn gradient_flow(initial: &ModelState, opts: &FlowOptions) -> Result<(ModelState, FlowReport)> {
    initial.check()?;
    let mut state = initial.clone();
    let g = initial.g.clone();
    let d = state.phi.dim();
    let mut action = total_action(&state)?.total;
    let mut report = FlowReport {
        status: FlowStatus::MaxIter,
        iterations: 0,
        actions: vec![action],
        monotone: true,
        psi_residuals: vec![],
        residual_phi: 0.0,
        residual_psi: 0.0,
        phi_steps: vec![],
        psi_steps: vec![],
        inner_products: 0,
    };
    let mut alpha_guess = 0.1 * g.grid.h() * g.grid.h();
    let mut dir: Vec<f64> = vec![];
    let mut prev_r: Vec<f64> = vec![];
    let mut stuck = 0;
    for it in 0..=opts.max_iter {
        let (r, epsi, rp, rs) = residuals(&state)?;
        report.residual_phi = rp;
        report.residual_psi = if opts.freeze_psi { 0.0 } else { rs };
        report.iterations = it;
        if report.residual() <= opts.tol {
            report.status = FlowStatus::Converged;
            break;
        }
        if it == opts.max_iter {
            break;
        }
        if it % 500 == 0 {
            debug!("flow {it}: |EL(phi)| {rp:.3e} |EL(psi)| {rs:.3e} action {action:.12}");
        }
        let mut progressed = false;

        // φ: Polak–Ribière direction, secant step on the directional derivative
        if rp > 0.25 * opts.tol {
            let beta = if prev_r.is_empty() {
                0.0
            } else {
                let num = target_inner(&r, &r, d, &g) - target_inner(&r, &prev_r, d, &g);
                (num / target_inner(&prev_r, &prev_r, d, &g)).max(0.0)
            };
            dir = if dir.is_empty() || beta == 0.0 {
                r.clone()
            } else {
                r.iter().zip(&dir).map(|(r, p)| r + beta * p).collect()
            };
            dir = state.phi.project_vectors(&dir);
            let mut s0 = target_inner(&r, &dir, d, &g);
            if s0 <= 0.0 {
                dir = r.clone();
                s0 = target_inner(&r, &r, d, &g);
            }
            let trial = moved_state(&state, &dir, alpha_guess);
            let s1 = target_inner(&Evaluation::new(&trial)?.el_phi(), &dir, d, &g);
            let mut alpha = if s0 - s1 > 0.0 { alpha_guess * s0 / (s0 - s1) } else { 2.0 * alpha_guess };
            let mut accepted = None;
            for _ in 0..40 {
                let cand = moved_state(&state, &dir, alpha);
                let a = total_action(&cand)?.total;
                if a <= action {
                    accepted = Some((cand, a));
                    break;
                }
                alpha *= 0.5;
            }
            match accepted {
                Some((cand, a)) => {
                    report.monotone &= a <= action;
                    state = cand;
                    action = a;
                    report.actions.push(a);
                    report.phi_steps.push(alpha);
                    alpha_guess = alpha;
                    prev_r = r;
                    progressed = true;
                }
                None => {
                    dir.clear();
                    prev_r.clear();
                }
            }
        }

        // ψ: minimal-residual correction of the linear part, kept only if it
        // lowers ‖EL(ψ)‖
        if !opts.freeze_psi && rs > 0.5 * opts.tol {
            let (_, epsi, _, rs) = if progressed { residuals(&state)? } else { (vec![], epsi, rp, rs) };
            let qn = q_norm_sq(&state.chi);
            let phi = state.phi.clone();
            let lin = |s: &SpinorField| phi.project_spinors(&dirac(s, &g).expect("grid checked").axpy(-1.0, &s.scale_pointwise(&qn)));
            let (delta, used) = minres(lin, &epsi.scaled(-1.0), &g, 1e-3 * rs, opts.psi_inner, &[]);
            report.inner_products += used;
            let mut step = 1.0;
            for _ in 0..30 {
                let psi = phi.project_spinors(&state.psi.axpy(step, &delta));
                let cand = state.with_psi(psi);
                let nr = Evaluation::new(&cand)?.el_psi().norm(&g);
                if nr < rs {
                    action = total_action(&cand)?.total;
                    report.actions.push(action);
                    state = cand;
                    report.psi_residuals.push([rs, nr]);
                    report.psi_steps.push(step);
                    progressed = true;
                    break;
                }
                step *= 0.5;
            }
        }
        if progressed {
            stuck = 0;
        } else {
            stuck += 1;
            if stuck >= 3 {
                warn!("flow stagnated at iteration {it}: |EL(phi)| {rp:.3e} |EL(psi)| {rs:.3e}");
                report.status = FlowStatus::Stagnated;
                break;
            }
        }
    }
    Ok((state, report))
}
