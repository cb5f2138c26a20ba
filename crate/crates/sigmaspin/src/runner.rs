//! Drivers behind the command-line subcommands. Scenarios run concurrently
//! on a bounded rayon pool; results are assembled in config order so the
//! written reports do not depend on the worker count.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;

use crate::config::{Config, ScenarioConfig};
use crate::error::{Error, Result};
use crate::report::{loglog_slope, write_json, write_records_csv, write_table, ReportRecord};
use crate::suites::{self, oracle_eigenvalues, run_check, Kind, Measurement};

/// Defects below this are treated as roundoff in refinement studies.
pub const EXACT_FLOOR: f64 = 1e-10;
/// Allowed distance of a fitted order from the stencil order.
pub const ORDER_SLACK: f64 = 0.3;

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub workers: Option<usize>,
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub timing: bool,
}

impl RunOptions {
    pub fn new(out: impl Into<PathBuf>) -> Self {
        RunOptions { out: out.into(), ..Default::default() }
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(w) = self.workers {
            if w == 0 {
                return Err(Error::Config("--workers must be at least 1".into()));
            }
            b = b.num_threads(w);
        }
        b.build().map_err(|e| Error::Config(e.to_string()))
    }

    fn apply_seed(&self, cfg: &Config) -> Config {
        let mut c = cfg.clone();
        if let Some(s) = self.seed {
            c.scenario.iter_mut().for_each(|sc| sc.override_seed(s));
        }
        c
    }

    fn tables(&self) -> Result<PathBuf> {
        let t = self.out.join("tables");
        fs::create_dir_all(&t)?;
        Ok(t)
    }
}

fn record(sc: &ScenarioConfig, n: usize, m: &Measurement, secs: Option<f64>) -> ReportRecord {
    let mut r = ReportRecord::new(&sc.id, &m.check, m.value, m.tolerance, n);
    r.wall_time = secs;
    r
}

fn timed<T>(on: bool, f: impl FnOnce() -> T) -> (T, Option<f64>) {
    let t = Instant::now();
    let v = f();
    (v, on.then(|| t.elapsed().as_secs_f64()))
}

fn run_scenario(sc: &ScenarioConfig, n: usize, timing: bool) -> Vec<ReportRecord> {
    info!("scenario {} (n = {n}): {} checks", sc.id, sc.checks.len());
    let mut out = vec![];
    for check in &sc.checks {
        let (res, secs) = timed(timing, || run_check(sc, check, n));
        match res {
            Ok(ms) => out.extend(ms.iter().map(|m| record(sc, n, m, secs))),
            Err(e) => {
                warn!("{}: check {check} failed: {e}", sc.id);
                out.push(ReportRecord::failed(&sc.id, check, n, e.to_string()));
            }
        }
    }
    out
}

fn finish(opts: &RunOptions, records: &[ReportRecord], table: &str) -> Result<()> {
    fs::create_dir_all(&opts.out)?;
    write_json(&opts.out.join("report.json"), records)?;
    write_records_csv(&opts.tables()?.join(format!("{table}.csv")), records)?;
    info!("wrote {} records to {}", records.len(), opts.out.display());
    Ok(())
}

/// Run every check of every scenario at the configured grid size.
pub fn verify(cfg: &Config, opts: &RunOptions) -> Result<Vec<ReportRecord>> {
    let cfg = opts.apply_seed(cfg);
    let per: Vec<Vec<ReportRecord>> =
        opts.pool()?.install(|| cfg.scenario.par_iter().map(|sc| run_scenario(sc, sc.grid.n, opts.timing)).collect());
    let records: Vec<ReportRecord> = per.into_iter().flatten().collect();
    finish(opts, &records, "verify")?;
    Ok(records)
}

/// Number of eigenpairs listed in spectrum tables.
pub const SPECTRUM_PAIRS: usize = 12;

/// Lowest eigenvalues of ∂̸² per scenario, with the oracle column on flat
/// metrics.
pub fn spectrum(cfg: &Config, opts: &RunOptions) -> Result<Vec<ReportRecord>> {
    let cfg = opts.apply_seed(cfg);
    let tables = opts.tables()?;
    let per: Vec<Result<Vec<ReportRecord>>> = opts.pool()?.install(|| {
        cfg.scenario
            .par_iter()
            .map(|sc| {
                let n = sc.grid.n;
                let (res, secs) = timed(opts.timing, || suites::spectrum_check(sc, n, SPECTRUM_PAIRS));
                match res {
                    Ok((rep, ms)) => {
                        let oracle = oracle_eigenvalues(sc, n, rep.eigenvalues.len())?;
                        let rows: Vec<Vec<String>> = rep
                            .eigenvalues
                            .iter()
                            .enumerate()
                            .map(|(i, l)| {
                                vec![
                                    i.to_string(),
                                    format!("{l:e}"),
                                    format!("{:e}", rep.residuals[i]),
                                    oracle.as_ref().map(|o| format!("{:e}", o[i])).unwrap_or_default(),
                                ]
                            })
                            .collect();
                        write_table(&tables.join(format!("spectrum_{}.csv", sc.id)), &["index", "eigenvalue", "residual", "oracle"], &rows)?;
                        Ok(ms.iter().map(|m| record(sc, n, m, secs)).collect())
                    }
                    Err(e) => Ok(vec![ReportRecord::failed(&sc.id, "spectrum", n, e.to_string())]),
                }
            })
            .collect()
    });
    let records: Vec<ReportRecord> = per.into_iter().collect::<Result<Vec<_>>>()?.into_iter().flatten().collect();
    finish(opts, &records, "spectrum")?;
    Ok(records)
}

/// Solve EL(ψ) = 0 on flat-target scenarios; run the gradient flow where
/// the scenario lists "flow".
pub fn solve(cfg: &Config, opts: &RunOptions) -> Result<Vec<ReportRecord>> {
    let cfg = opts.apply_seed(cfg);
    let tables = opts.tables()?;
    type Row = (Vec<ReportRecord>, Vec<Vec<String>>);
    let per: Vec<Result<Row>> = opts.pool()?.install(|| {
        cfg.scenario
            .par_iter()
            .map(|sc| -> Result<Row> {
                let n = sc.grid.n;
                let mut recs = vec![];
                let mut rows = vec![];
                if sc.target().is_flat() {
                    let (res, secs) = timed(opts.timing, || suites::solve_check(sc, n));
                    match res {
                        Ok((sol, ms)) => {
                            rows.push(vec![
                                sc.id.clone(),
                                n.to_string(),
                                format!("{:e}", sol.residual),
                                sol.iterations.to_string(),
                                sol.kernel_dim.to_string(),
                                format!("{:e}", sol.rhs_kernel_component),
                            ]);
                            recs.extend(ms.iter().map(|m| record(sc, n, m, secs)));
                        }
                        Err(e) => recs.push(ReportRecord::failed(&sc.id, "solve", n, e.to_string())),
                    }
                }
                if sc.checks.iter().any(|c| c == "flow") {
                    let (res, secs) = timed(opts.timing, || suites::flow_check(sc, n));
                    match res {
                        Ok((rep, ms)) => {
                            let hist: Vec<Vec<String>> =
                                rep.actions.iter().enumerate().map(|(i, a)| vec![i.to_string(), format!("{a:e}")]).collect();
                            write_table(&tables.join(format!("flow_{}.csv", sc.id)), &["step", "action"], &hist)?;
                            recs.extend(ms.iter().map(|m| record(sc, n, m, secs)));
                        }
                        Err(e) => recs.push(ReportRecord::failed(&sc.id, "flow", n, e.to_string())),
                    }
                }
                Ok((recs, rows))
            })
            .collect()
    });
    let mut records = vec![];
    let mut rows = vec![];
    for r in per {
        let (a, b) = r?;
        records.extend(a);
        rows.extend(b);
    }
    write_table(&tables.join("solve_summary.csv"), &["scenario", "n", "residual", "iterations", "kernel_dim", "rhs_kernel_component"], &rows)?;
    finish(opts, &records, "solve")?;
    Ok(records)
}

/// Grid lists must hold at least three strictly increasing powers of two.
pub fn validate_grids(grids: &[usize]) -> Result<()> {
    if grids.len() < 3 {
        return Err(Error::Config(format!("convergence needs at least 3 grid sizes, got {}", grids.len())));
    }
    for w in grids.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::Config(format!("grid sizes must increase strictly: {} then {}", w[0], w[1])));
        }
    }
    if let Some(n) = grids.iter().find(|n| !n.is_power_of_two() || **n < 8) {
        return Err(Error::Config(format!("grid size {n} is not a power of two >= 8")));
    }
    Ok(())
}

/// Fit of one record across grids. `Order` records need a slope within
/// ORDER_SLACK of the stencil order, `Bound` records only a slope at least
/// that large.
pub fn fit_record(sc: &ScenarioConfig, check: &str, kind: Kind, ns: &[usize], values: &[f64]) -> ReportRecord {
    let n_max = *ns.last().unwrap();
    let worst = values.iter().fold(0.0f64, |a, b| a.max(*b));
    let mut r = if worst <= EXACT_FLOOR || kind == Kind::Exact {
        let mut r = ReportRecord::new(&sc.id, check, worst, EXACT_FLOOR, n_max);
        r.fit = Some("exact".into());
        r
    } else {
        let h: Vec<f64> = ns.iter().map(|n| 1.0 / *n as f64).collect();
        let v: Vec<f64> = values.iter().map(|v| v.max(1e-300)).collect();
        let slope = loglog_slope(&h, &v);
        let order = sc.grid.order as f64;
        let miss = if kind == Kind::Bound { (order - slope).max(0.0) } else { (slope - order).abs() };
        let mut r = ReportRecord::new(&sc.id, check, miss, ORDER_SLACK, n_max);
        r.order = Some(slope);
        r.fit = Some("slope".into());
        r
    };
    if !values.iter().all(|v| v.is_finite()) {
        r.pass = false;
    }
    r
}

/// Refinement study over `grids` for every refinable check of every
/// scenario.
pub fn convergence(cfg: &Config, grids: &[usize], opts: &RunOptions) -> Result<Vec<ReportRecord>> {
    validate_grids(grids)?;
    let cfg = opts.apply_seed(cfg);
    let tables = opts.tables()?;
    type Out = (Vec<ReportRecord>, Vec<Vec<String>>);
    let per: Vec<Out> = opts.pool()?.install(|| {
        cfg.scenario
            .par_iter()
            .map(|sc| {
                let mut recs = vec![];
                let mut rows = vec![];
                for check in sc.checks.iter().filter(|c| suites::refinable(c)) {
                    info!("{}: refining {check} over {grids:?}", sc.id);
                    let (res, secs) = timed(opts.timing, || -> Result<Vec<Vec<Measurement>>> {
                        grids.iter().map(|&n| run_check(sc, check, n)).collect()
                    });
                    let per_n = match res {
                        Ok(v) => v,
                        Err(e) => {
                            recs.push(ReportRecord::failed(&sc.id, check, *grids.last().unwrap(), e.to_string()));
                            continue;
                        }
                    };
                    for (i, m0) in per_n[0].iter().enumerate() {
                        let values: Vec<f64> = per_n.iter().map(|ms| ms[i].value).collect();
                        for (n, v) in grids.iter().zip(&values) {
                            rows.push(vec![sc.id.clone(), m0.check.clone(), n.to_string(), format!("{:e}", 1.0 / *n as f64), format!("{v:e}")]);
                        }
                        let mut r = fit_record(sc, &m0.check, m0.kind, grids, &values);
                        r.wall_time = secs;
                        recs.push(r);
                    }
                }
                (recs, rows)
            })
            .collect()
    });
    let mut records = vec![];
    let mut rows = vec![];
    for (a, b) in per {
        records.extend(a);
        rows.extend(b);
    }
    write_table(&tables.join("convergence_defects.csv"), &["scenario", "check", "n", "h", "defect"], &rows)?;
    finish(opts, &records, "convergence")?;
    Ok(records)
}

/// Load report.json from a directory.
pub fn load_report(dir: &Path) -> Result<Vec<ReportRecord>> {
    crate::report::read_json(&dir.join("report.json"))
}
