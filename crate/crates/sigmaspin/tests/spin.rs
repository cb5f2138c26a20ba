use proptest::prelude::*;
use sigmaspin::geometry::{AnalyticMetric, VectorField};
use sigmaspin::spin::*;
use sigmaspin::trig::{seeded_rng, TrigPoly};
use sigmaspin::{MetricField, TorusGrid};

fn general(seed: u64, grid: TorusGrid) -> MetricField {
    let mut rng = seeded_rng(seed, 7);
    AnalyticMetric::random(&mut rng, 2, 0.3, 0.25).sample(grid).unwrap()
}

fn order_ratio(errs: &[f64]) -> f64 {
    errs.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max)
}

#[test]
fn translation_matches_lie_derivative_along_constant_field() {
    // For X = h·e₁ the order-2 stencil is exactly half the two-step shift
    // difference; order 4 combines shifts by one and two.
    for order in [2, 4] {
        for spin in SpinStructure::all() {
            let grid = TorusGrid::new(16, order).unwrap();
            let g = MetricField::flat(grid);
            let mut rng = seeded_rng(1, 0);
            let s = SpinorField::random(&mut rng, grid, spin, 1, 3, 1.0);
            for axis in 0..2 {
                let mut e = [0.0; 2];
                e[axis] = grid.h();
                let step = |k: isize| {
                    let mut st = [0isize; 2];
                    st[axis] = k;
                    s.translated(st)
                };
                let fd = if order == 2 {
                    step(1).axpy(-1.0, &step(-1)).scaled(0.5)
                } else {
                    step(1).axpy(-1.0, &step(-1)).scaled(8.0 / 12.0).axpy(-1.0 / 12.0, &step(2).axpy(-1.0, &step(-2)))
                };
                let l = lie_spinor(&VectorField::constant(grid, e), &s, &g).unwrap();
                assert!(fd.axpy(-1.0, &l).max_abs() < 1e-12, "order {order} axis {axis} {}", spin.label());
            }
        }
    }
}

#[test]
fn full_period_translation_applies_the_twist() {
    let grid = TorusGrid::new(8, 2).unwrap();
    let mut rng = seeded_rng(2, 0);
    for spin in SpinStructure::all() {
        let s = SpinorField::random(&mut rng, grid, spin, 1, 2, 1.0);
        for axis in 0..2 {
            let mut st = [0isize; 2];
            st[axis] = 8;
            let t = s.translated(st);
            let want = s.scaled(spin.twist(axis));
            assert!(t.axpy(-1.0, &want).max_abs() < 1e-15);
        }
    }
}

#[test]
fn lemma_is_exact_on_the_grid() {
    for seed in 0..4 {
        let grid = TorusGrid::new(16, 2).unwrap();
        let g = general(seed, grid);
        let spin = SpinStructure::all()[seed as usize % 4];
        let mut rng = seeded_rng(seed, 3);
        let x1 = TrigPoly::random(&mut rng, 2, 1.0, [0.0; 2]);
        let x2 = TrigPoly::random(&mut rng, 2, 1.0, [0.0; 2]);
        let x = VectorField::from_trig(grid, &x1, &x2);
        let sigma = SpinorField::random(&mut rng, grid, spin, 1, 2, 1.0);
        let rho = SpinorField::random(&mut rng, grid, spin, 1, 2, 1.0);
        let d = lemma_defect(&x, &sigma, &rho, &g).unwrap();
        assert!(d.abs() < 1e-12, "seed {seed}: {d:e}");
    }
}

#[test]
fn analytic_lemma_converges_at_order_two() {
    let spin = SpinStructure::new(-1, 1).unwrap();
    let mut rng = seeded_rng(5, 3);
    let x1 = TrigPoly::random(&mut rng, 2, 1.0, [0.0; 2]);
    let x2 = TrigPoly::random(&mut rng, 2, 1.0, [0.0; 2]);
    let sigma: Vec<TrigPoly> = (0..4).map(|_| TrigPoly::random(&mut rng, 2, 1.0, spin.frequency_shift())).collect();
    let rho: Vec<TrigPoly> = (0..4).map(|_| TrigPoly::random(&mut rng, 2, 1.0, spin.frequency_shift())).collect();
    let errs: Vec<f64> = [16, 32, 64]
        .iter()
        .map(|&n| {
            let grid = TorusGrid::new(n, 2).unwrap();
            let g = MetricField::flat(grid);
            let r = SpinorField::from_trig(grid, spin, 1, &rho);
            lemma_defect_analytic(&x1, &x2, &sigma, spin, &r, &g).unwrap().abs()
        })
        .collect();
    assert!(order_ratio(&errs) < 0.35, "{errs:?}");
}

#[test]
fn analytic_lemma_needs_flat_metric() {
    let grid = TorusGrid::new(8, 2).unwrap();
    let g = general(0, grid);
    let z = TrigPoly::default();
    let r = SpinorField::zeros(grid, SpinStructure::TRIVIAL, 1);
    let polys = vec![z.clone(), z.clone(), z.clone(), z.clone()];
    assert!(lemma_defect_analytic(&z, &z, &polys, SpinStructure::TRIVIAL, &r, &g).is_err());
}

#[test]
fn conformal_covariance_converges_at_order_two() {
    let spin = SpinStructure::new(1, -1).unwrap();
    let u = TrigPoly::sin([1.0, 0.0], 0.3).plus(&TrigPoly::cos([1.0, -1.0], 0.2));
    let mut rng = seeded_rng(8, 0);
    let polys: Vec<TrigPoly> = (0..4).map(|_| TrigPoly::random(&mut rng, 2, 1.0, spin.frequency_shift())).collect();
    let errs: Vec<f64> = [16, 32, 64]
        .iter()
        .map(|&n| {
            let grid = TorusGrid::new(n, 2).unwrap();
            let g = MetricField::flat(grid);
            let s = SpinorField::from_trig(grid, spin, 1, &polys);
            dirac_conformal_check(&s, &u.sample(&grid), &g).unwrap()
        })
        .collect();
    assert!(order_ratio(&errs) < 0.35, "{errs:?}");
}

#[test]
fn dirac_commutes_with_grid_translations() {
    let grid = TorusGrid::new(16, 4).unwrap();
    let g = MetricField::flat(grid);
    let spin = SpinStructure::new(-1, -1).unwrap();
    let mut rng = seeded_rng(4, 0);
    let s = SpinorField::random(&mut rng, grid, spin, 2, 3, 1.0);
    let a = dirac(&s.translated([3, -5]), &g).unwrap();
    let b = dirac(&s, &g).unwrap().translated([3, -5]);
    assert!(a.axpy(-1.0, &b).max_abs() < 1e-11);
}

#[test]
fn mismatched_spin_structures_are_rejected() {
    let grid = TorusGrid::new(8, 2).unwrap();
    let g = MetricField::flat(grid);
    let a = SpinorField::zeros(grid, SpinStructure::TRIVIAL, 1);
    let b = SpinorField::zeros(grid, SpinStructure::new(-1, 1).unwrap(), 1);
    assert!(div_sigma(&a, &b, &g).is_err());
    assert!(SpinStructure::new(2, 1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn dirac_is_symmetric(seed in 0u64..1000, k in 0usize..4) {
        let grid = TorusGrid::new(8, 2).unwrap();
        let g = general(seed, grid);
        let spin = SpinStructure::all()[k];
        let mut rng = seeded_rng(seed, 1);
        let a = SpinorField::random(&mut rng, grid, spin, 1, 3, 1.0);
        let b = SpinorField::random(&mut rng, grid, spin, 1, 3, 1.0);
        let l = dirac(&a, &g).unwrap().inner(&b, &g);
        let r = a.inner(&dirac(&b, &g).unwrap(), &g);
        prop_assert!((l - r).abs() < 1e-10 * (1.0 + l.abs()));
    }

    #[test]
    fn grading_flips_only_the_gradient_part(seed in 0u64..1000) {
        // Γ anticommutes with γ_α∇_α and commutes with the regulator.
        let grid = TorusGrid::new(8, 2).unwrap();
        let g = general(seed, grid);
        let mut rng = seeded_rng(seed, 2);
        let s = SpinorField::random(&mut rng, grid, SpinStructure::TRIVIAL, 1, 2, 1.0);
        let gr = |f: &SpinorField| f.map_spinors(|_, _, v| sigmaspin::clifford::grading_apply(v));
        let conj = gr(&dirac(&gr(&s), &g).unwrap());
        let sum = conj.axpy(1.0, &dirac(&s, &g).unwrap());
        let w = regulator(&s, &g).unwrap().scaled(2.0);
        prop_assert!(sum.axpy(-1.0, &w).max_abs() < 1e-10);
    }

    #[test]
    fn discrete_lemma_holds_for_any_seed(seed in 0u64..1000) {
        let grid = TorusGrid::new(8, 2).unwrap();
        let g = general(seed, grid);
        let mut rng = seeded_rng(seed, 4);
        let x = VectorField::from_trig(grid, &TrigPoly::random(&mut rng, 2, 1.0, [0.0; 2]), &TrigPoly::random(&mut rng, 2, 1.0, [0.0; 2]));
        let a = SpinorField::random(&mut rng, grid, SpinStructure::TRIVIAL, 1, 2, 1.0);
        let b = SpinorField::random(&mut rng, grid, SpinStructure::TRIVIAL, 1, 2, 1.0);
        prop_assert!(lemma_defect(&x, &a, &b, &g).unwrap().abs() < 1e-12);
    }
}
