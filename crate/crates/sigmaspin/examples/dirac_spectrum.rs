//! Lowest eigenvalues of the squared Dirac operator for all four spin
//! structures, on the flat torus and on a conformal metric.

use sigmaspin::geometry::AnalyticMetric;
use sigmaspin::solvers::{dirac_spectrum, flat_dirac_oracle};
use sigmaspin::spin::SpinStructure;
use sigmaspin::trig::TrigPoly;
use sigmaspin::{MetricField, TorusGrid};

fn main() -> sigmaspin::Result<()> {
    let n = 32;
    let grid = TorusGrid::new(n, 2)?;
    let flat = MetricField::flat(grid);
    let u = TrigPoly::sin([1.0, 0.0], 0.3).plus(&TrigPoly::cos([0.0, 1.0], 0.2));
    let conformal = AnalyticMetric::conformal(u).sample(grid)?;
    for spin in SpinStructure::all() {
        let f = dirac_spectrum(&flat, spin, 6)?;
        let c = dirac_spectrum(&conformal, spin, 6)?;
        let oracle = flat_dirac_oracle(grid, spin, 6);
        println!("spin {}: kernel {} (flat) {} (conformal)", spin.label(), f.kernel_dim, c.kernel_dim);
        for i in 0..6 {
            println!("  {:>12.6} {:>12.6} {:>12.6}", f.eigenvalues[i], oracle[i], c.eigenvalues[i]);
        }
    }
    Ok(())
}
