//! A random metric on the torus: frames, volume and the Lie-derivative
//! adjunction, exact on the grid and second order against the analytic metric.

use sigmaspin::geometry::{adjunction_defect, adjunction_defect_analytic, AnalyticMetric};
use sigmaspin::trig::{seeded_rng, TrigPoly};
use sigmaspin::{Sym2Field, TorusGrid, VectorField};

fn main() -> sigmaspin::Result<()> {
    let am = AnalyticMetric::random(&mut seeded_rng(3, 0), 2, 0.3, 0.2);
    let mut rng = seeded_rng(3, 1);
    let x1 = TrigPoly::random(&mut rng, 1, 0.5, [0.0; 2]);
    let x2 = TrigPoly::random(&mut rng, 1, 0.5, [0.0; 2]);
    let k: Vec<TrigPoly> = (0..3).map(|_| TrigPoly::random(&mut rng, 1, 0.5, [0.0; 2])).collect();
    println!("{:>5} {:>12} {:>14} {:>14}", "n", "volume", "discrete", "analytic");
    for n in [16, 32, 64, 128] {
        let grid = TorusGrid::new(n, 2)?;
        let g = am.sample(grid)?;
        let x = VectorField::from_trig(grid, &x1, &x2);
        let kf = Sym2Field::from_trig(grid, &k[0], &k[1], &k[2]);
        let d = adjunction_defect(&x, &kf, &g)?;
        let a = adjunction_defect_analytic(&am, &x1, &x2, &kf, &g)?;
        println!("{n:>5} {:>12.8} {d:>14.3e} {a:>14.3e}", g.volume());
    }
    Ok(())
}
