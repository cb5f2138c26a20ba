//! Term-by-term action of random states on S^2 and on a flat torus.

use sigmaspin::action::total_action;
use sigmaspin::fields::Target;
use sigmaspin::geometry::AnalyticMetric;
use sigmaspin::spin::SpinStructure;
use sigmaspin::state::{ModelState, RandomSpec};
use sigmaspin::trig::seeded_rng;
use sigmaspin::TorusGrid;

fn main() -> sigmaspin::Result<()> {
    let grid = TorusGrid::new(32, 2)?;
    let g = AnalyticMetric::random(&mut seeded_rng(1, 0), 2, 0.3, 0.2).sample(grid)?;
    let spin = SpinStructure::new(-1, 1)?;
    let cases = [
        ("sphere", Target::Sphere2, None),
        ("torus", Target::FlatTorus { dim: 2 }, Some(vec![[2, 1], [0, 1]])),
    ];
    for (name, target, winding) in cases {
        let s = ModelState::random(7, g.clone(), target, spin, winding, RandomSpec::default())?;
        let a = total_action(&s)?;
        println!(
            "{name:>7}: dirichlet {:.5} dirac {:.5} gravitino {:.5} quartic {:.5} curvature {:.5} total {:.5}",
            a.e_dirichlet, a.e_dirac, a.e_gravitino_coupling, a.e_quartic, a.e_curvature, a.total
        );
    }
    Ok(())
}
