//! The interpolating twistor family on a winding map over a conformal
//! metric: EL residuals and conservation defects along t. On the flat metric
//! every member is on shell exactly.

use sigmaspin::fields::MapField;
use sigmaspin::geometry::AnalyticMetric;
use sigmaspin::noether::{conservation_defects, covector_norm, el_phi, el_psi, scalar_norm};
use sigmaspin::symmetries::{twistor_state, SusyParameter};
use sigmaspin::trig::TrigPoly;
use sigmaspin::TorusGrid;

fn main() -> sigmaspin::Result<()> {
    println!("{:>5} {:>5} {:>12} {:>12} {:>12} {:>12}", "n", "t", "|EL(phi)|", "|EL(psi)|", "|div T|", "|div J|");
    for n in [16, 32, 64] {
        let grid = TorusGrid::new(n, 2)?;
        let u = TrigPoly::sin([1.0, 0.0], 0.2).plus(&TrigPoly::cos([1.0, 1.0], 0.1));
        let g = AnalyticMetric::conformal(u).sample(grid)?;
        let phi = MapField::winding_map(grid, vec![[2, 1], [0, 1]], None);
        let q = SusyParameter::conformal_parallel(&g, [0.7, -0.2, 0.4, 0.5])?;
        for t in [0.0, 0.5, 1.0] {
            let s = twistor_state(&q, &phi, t, &g)?;
            let d = conservation_defects(&s)?;
            let ep = el_phi(&s)?;
            println!(
                "{n:>5} {t:>5} {:>12.3e} {:>12.3e} {:>12.3e} {:>12.3e}",
                scalar_norm(&ep, &g),
                el_psi(&s)?.norm(&g),
                covector_norm(&d.strong_t, &g),
                d.div_j.norm(&g)
            );
        }
    }
    Ok(())
}
