//! Invariance defects of the action: rescaled conformal, super Weyl,
//! translations, and the degenerate supersymmetry with its control.

use sigmaspin::action::total_action;
use sigmaspin::fields::{apply_p, Target};
use sigmaspin::spin::{SpinStructure, SpinorField};
use sigmaspin::state::{ModelState, RandomSpec};
use sigmaspin::symmetries::{apply_rescaled_conformal, apply_super_weyl, apply_translation, susy_defect, SusyParameter};
use sigmaspin::trig::{seeded_rng, TrigPoly};
use sigmaspin::{MetricField, TorusGrid};

fn main() -> sigmaspin::Result<()> {
    let spin = SpinStructure::TRIVIAL;
    let u = TrigPoly::sin([1.0, 0.0], 0.2);
    println!("{:>5} {:>14}", "n", "conformal");
    for n in [16, 32, 64] {
        let grid = TorusGrid::new(n, 2)?;
        let s = ModelState::random(3, MetricField::flat(grid), Target::Sphere2, spin, None, RandomSpec::default())?;
        let a = total_action(&s)?.total;
        let b = total_action(&apply_rescaled_conformal(&s, &u.sample(&grid)))?.total;
        println!("{n:>5} {:>14.3e}", (a - b).abs());
    }

    let grid = TorusGrid::new(32, 2)?;
    let g = MetricField::flat(grid);
    let s = ModelState::random(3, g.clone(), Target::Sphere2, spin, None, RandomSpec::default())?;
    let a = total_action(&s)?.total;
    let zeta = apply_p(&SpinorField::random(&mut seeded_rng(3, 50), grid, spin, 2, 2, 1.0));
    println!("super Weyl: {:.2e}", (total_action(&apply_super_weyl(&s, &zeta)?)?.total - a).abs());
    println!("translation: {:.2e}", (total_action(&apply_translation(&s, [5, -3])?)?.total - a).abs());

    // flat target, chi = 0: the defect is tiny for a parallel q
    let mut flat = ModelState::random(4, g.clone(), Target::FlatTorus { dim: 2 }, spin, Some(vec![[1, 0], [0, 1]]), RandomSpec::default())?;
    flat.chi = SpinorField::zeros(grid, spin, 2);
    let q = SusyParameter::constant(&g, [0.7, -0.2, 0.4, 0.5]);
    let bumpy = SusyParameter::new(q.q.scale_pointwise(&TrigPoly::cos([1.0, 1.0], 0.5).plus(&TrigPoly::constant(1.0)).sample(&grid)))?;
    println!("susy, parallel q: {:.2e}", susy_defect(&flat, &q, 1e-4)?.fd.abs());
    println!("susy, non-twistor q: {:.2e}", susy_defect(&flat, &bumpy, 1e-4)?.fd.abs());
    Ok(())
}
