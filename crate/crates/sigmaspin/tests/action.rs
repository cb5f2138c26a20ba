use proptest::prelude::*;
use sigmaspin::action::*;
use sigmaspin::fields::{MapField, Target};
use sigmaspin::geometry::AnalyticMetric;
use sigmaspin::spin::{SpinStructure, SpinorField};
use sigmaspin::state::{ModelState, RandomSpec};
use sigmaspin::symmetries::{apply_rescaled_conformal, apply_super_weyl, apply_translation};
use sigmaspin::trig::{seeded_rng, TrigPoly};
use sigmaspin::{MetricField, TorusGrid};
use std::f64::consts::PI;

fn general(seed: u64, grid: TorusGrid) -> MetricField {
    AnalyticMetric::random(&mut seeded_rng(seed, 7), 2, 0.3, 0.25).sample(grid).unwrap()
}

fn sphere_state(seed: u64, n: usize) -> ModelState {
    let grid = TorusGrid::new(n, 2).unwrap();
    ModelState::random(seed, general(seed, grid), Target::Sphere2, SpinStructure::new(-1, 1).unwrap(), None, RandomSpec::default()).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

#[test]
fn winding_energy_is_frobenius_norm() {
    let grid = TorusGrid::new(16, 2).unwrap();
    let phi = MapField::winding_map(grid, vec![[2, 1], [0, 1]], None);
    let e = dirichlet_energy(&phi, &MetricField::flat(grid)).unwrap();
    assert!((e - 6.0).abs() < 1e-12);
}

#[test]
fn dirichlet_energy_is_conformally_invariant() {
    let grid = TorusGrid::new(16, 2).unwrap();
    let phi = MapField::random(&mut seeded_rng(1, 1), grid, Target::FlatTorus { dim: 2 }, Some(vec![[1, 0], [1, 1]]), 2, 0.4);
    let g = general(3, grid);
    let u = TrigPoly::random(&mut seeded_rng(1, 9), 2, 0.3, [0.0; 2]).sample(&grid);
    let a = dirichlet_energy(&phi, &g).unwrap();
    let b = dirichlet_energy(&phi, &g.conformal_rescale(&u)).unwrap();
    assert!(rel(a, b) < 1e-13);
}

#[test]
fn equator_energy_converges() {
    // |∂₁φ|² = 4π² for the unit-speed equator
    let errs: Vec<f64> = [16, 32, 64]
        .iter()
        .map(|&n| {
            let grid = TorusGrid::new(n, 2).unwrap();
            let e = dirichlet_energy(&MapField::sphere_equator(grid), &MetricField::flat(grid)).unwrap();
            (e - 4.0 * PI * PI).abs()
        })
        .collect();
    assert!(errs[1] / errs[0] < 0.3 && errs[2] / errs[1] < 0.3, "{errs:?}");
}

#[test]
fn breakdown_sums_to_total() {
    let s = sphere_state(2, 16);
    let b = total_action(&s).unwrap();
    let sum = b.e_dirichlet + b.e_dirac + b.e_gravitino_coupling + b.e_quartic + b.e_curvature;
    assert_eq!(sum, b.total);
    assert!((b.harmonic_energy() - 0.5 * b.e_dirichlet).abs() == 0.0);
    let lag = action_densities(&s).unwrap().lagrangian();
    assert!(rel(s.g.integrate(&lag), b.total) < 1e-12);
}

#[test]
fn constant_spinor_has_zero_dirac_action() {
    let grid = TorusGrid::new(16, 2).unwrap();
    let s = SpinorField::constant(grid, SpinStructure::TRIVIAL, &[[1.0, 0.5, -0.2, 0.3]]);
    assert!(dirac_action(&s, &MetricField::flat(grid)).unwrap().abs() < 1e-12);
}

#[test]
fn constant_rescaling_is_an_exact_symmetry() {
    let s = sphere_state(4, 16);
    let u = vec![0.37; s.grid().len()];
    let a = total_action(&s).unwrap().total;
    let b = total_action(&apply_rescaled_conformal(&s, &u)).unwrap().total;
    assert!(rel(a, b) < 1e-12);
}

#[test]
fn rescaled_conformal_defect_converges() {
    let up = TrigPoly::sin([1.0, 0.0], 0.3).plus(&TrigPoly::cos([0.0, 1.0], 0.2));
    let errs: Vec<f64> = [16, 32, 64]
        .iter()
        .map(|&n| {
            let grid = TorusGrid::new(n, 2).unwrap();
            let spin = SpinStructure::new(1, -1).unwrap();
            let s = ModelState::random(5, MetricField::flat(grid), Target::FlatRn { dim: 2 }, spin, None, RandomSpec::default()).unwrap();
            let a = total_action(&s).unwrap().total;
            let b = total_action(&apply_rescaled_conformal(&s, &up.sample(&grid))).unwrap().total;
            (a - b).abs()
        })
        .collect();
    assert!(errs[1] / errs[0] < 0.35 && errs[2] / errs[1] < 0.35, "{errs:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn super_weyl_changes_nothing(seed in 0u64..1000) {
        let s = sphere_state(seed, 8);
        let zeta = SpinorField::random(&mut seeded_rng(seed, 20), s.grid(), s.spin(), 2, 2, 2.0);
        let a = total_action(&s).unwrap();
        let b = total_action(&apply_super_weyl(&s, &zeta).unwrap()).unwrap();
        prop_assert!(rel(a.total, b.total) < 1e-13);
        prop_assert!(rel(a.e_gravitino_coupling, b.e_gravitino_coupling) < 1e-13);
        prop_assert!(rel(a.e_quartic, b.e_quartic) < 1e-13);
    }

    #[test]
    fn sign_flip_of_fermions_changes_nothing(seed in 0u64..1000) {
        let s = sphere_state(seed, 8);
        let t = ModelState { psi: s.psi.scaled(-1.0), chi: s.chi.scaled(-1.0), ..s.clone() };
        prop_assert_eq!(total_action(&s).unwrap().total, total_action(&t).unwrap().total);
    }

    #[test]
    fn grid_translation_changes_nothing(seed in 0u64..1000, a in -7isize..7, b in -7isize..7) {
        let s = sphere_state(seed, 8);
        let t = apply_translation(&s, [a, b]).unwrap();
        prop_assert!(rel(total_action(&s).unwrap().total, total_action(&t).unwrap().total) < 1e-12);
    }
}
