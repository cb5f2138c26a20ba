//! Euler-Lagrange expressions, T and J of a random state checked against
//! finite differences of the action, plus the trace identity.

use sigmaspin::fields::{random_vector_spinor, MapField, Target};
use sigmaspin::geometry::AnalyticMetric;
use sigmaspin::noether::{chi_gradient_check, conservation_defects, metric_gradient_check, phi_gradient_check, psi_gradient_check};
use sigmaspin::spin::{SpinStructure, SpinorField};
use sigmaspin::state::{ModelState, RandomSpec};
use sigmaspin::trig::{seeded_rng, TrigPoly};
use sigmaspin::{Sym2Field, TorusGrid};

fn main() -> sigmaspin::Result<()> {
    let grid = TorusGrid::new(32, 2)?;
    let g = AnalyticMetric::random(&mut seeded_rng(2, 0), 2, 0.3, 0.2).sample(grid)?;
    let spin = SpinStructure::TRIVIAL;
    let s = ModelState::random(5, g, Target::Sphere2, spin, None, RandomSpec::default())?;
    let mut rng = seeded_rng(5, 9);
    let eta = random_vector_spinor(&mut rng, &s.phi, spin, 2, 1.0);
    let v = MapField::random(&mut rng, grid, Target::FlatRn { dim: 3 }, None, 2, 1.0).values;
    let zeta = SpinorField::random(&mut rng, grid, spin, 2, 2, 1.0);
    let kp: Vec<TrigPoly> = (0..3).map(|_| TrigPoly::random(&mut rng, 1, 0.3, [0.0; 2])).collect();
    let k = Sym2Field::from_trig(grid, &kp[0], &kp[1], &kp[2]);

    let checks = [
        ("psi", psi_gradient_check(&s, &eta, 1e-4)?),
        ("phi", phi_gradient_check(&s, &v, 1e-4)?),
        ("chi", chi_gradient_check(&s, &zeta, 1e-4)?),
        ("metric", metric_gradient_check(&s, &k, 1e-5)?),
    ];
    for (name, c) in checks {
        println!("{name:>6}: fd {:>13.6e} predicted {:>13.6e} scaled error {:.2e}", c.fd, c.predicted, c.scaled_error());
    }
    let d = conservation_defects(&s)?;
    let worst = d.trace.iter().fold(0.0f64, |a, t| a.max(t.abs()));
    println!("trace identity, worst point: {worst:.2e}");
    Ok(())
}
