use sigmaspin::fields::{random_vector_spinor, Target};
use sigmaspin::geometry::AnalyticMetric;
use sigmaspin::noether::*;
use sigmaspin::spin::{SpinStructure, SpinorField};
use sigmaspin::state::{ModelState, RandomSpec};
use sigmaspin::trig::{seeded_rng, TrigPoly};
use sigmaspin::{MetricField, Sym2Field, TorusGrid, VectorField};

fn general_metric(seed: u64, grid: TorusGrid) -> MetricField {
    AnalyticMetric::random(&mut seeded_rng(seed, 9), 1, 0.3, 0.2).sample(grid).unwrap()
}

fn state(seed: u64, n: usize, target: Target, general: bool) -> ModelState {
    let grid = TorusGrid::new(n, 2).unwrap();
    let g = if general { general_metric(seed, grid) } else { MetricField::flat(grid) };
    let winding = match target {
        Target::FlatTorus { dim: 2 } => Some(vec![[1, 0], [0, 1]]),
        _ => None,
    };
    ModelState::random(seed, g, target, SpinStructure::new(-1, 1).unwrap(), winding, RandomSpec::default()).unwrap()
}

const TARGETS: [Target; 3] = [Target::FlatRn { dim: 2 }, Target::FlatTorus { dim: 2 }, Target::Sphere2];

#[test]
fn psi_gradient_matches_finite_differences() {
    for (i, t) in TARGETS.iter().enumerate() {
        let s = state(10 + i as u64, 16, *t, true);
        let eta = random_vector_spinor(&mut seeded_rng(77, 0), &s.phi, s.spin(), 2, 1.0);
        let c = psi_gradient_check(&s, &eta, 1e-4).unwrap();
        assert!(c.rel_error() < 1e-7, "{t:?}: {c:?}");
    }
}

#[test]
fn phi_gradient_matches_finite_differences() {
    for (i, t) in TARGETS.iter().enumerate() {
        let mut errs = vec![];
        for n in [16, 32] {
            let s = state(20 + i as u64, n, *t, true);
            let v = sigmaspin::fields::MapField::random(&mut seeded_rng(78, 0), s.grid(), Target::FlatRn { dim: s.phi.dim() }, None, 2, 1.0).values;
            let c = phi_gradient_check(&s, &v, 1e-4).unwrap();
            errs.push(c.rel_error());
        }
        if t.is_flat() {
            assert!(errs.iter().all(|e| *e < 1e-7), "{t:?}: {errs:?}");
        } else {
            assert!(errs[1] < 0.35 * errs[0] && errs[1] < 1e-2, "{t:?}: {errs:?}");
        }
    }
}

#[test]
fn supercurrent_matches_finite_differences() {
    let s = state(30, 16, Target::Sphere2, true);
    let zeta = SpinorField::random(&mut seeded_rng(79, 0), s.grid(), s.spin(), 2, 2, 1.0);
    let c = chi_gradient_check(&s, &zeta, 1e-4).unwrap();
    assert!(c.rel_error() < 1e-8, "{c:?}");
}

#[test]
fn metric_gradient_matches_finite_differences() {
    for general in [false, true] {
        let mut errs = vec![];
        for n in [16, 32, 64] {
            let s = state(40, n, Target::FlatTorus { dim: 2 }, general);
            let mut rng = seeded_rng(80, 0);
            let k = Sym2Field::from_trig(
                s.grid(),
                &TrigPoly::random(&mut rng, 1, 0.5, [0.0; 2]),
                &TrigPoly::random(&mut rng, 1, 0.5, [0.0; 2]),
                &TrigPoly::random(&mut rng, 1, 0.5, [0.0; 2]),
            );
            let c = metric_gradient_check(&s, &k, 1e-5).unwrap();
            eprintln!("general={general} n={n} {c:?}");
            errs.push(c.rel_error());
        }
        let exact = errs.iter().all(|e| *e < 1e-8);
        assert!(exact || (errs[2] < 0.35 * errs[1] && errs[1] < 0.35 * errs[0]), "{errs:?}");
    }
}

#[test]
fn trace_identity_is_pointwise_exact() {
    for (i, t) in TARGETS.iter().enumerate() {
        let s = state(50 + i as u64, 16, *t, true);
        let ev = Evaluation::new(&s).unwrap();
        let d = ev.trace_defect();
        let sc = ev.trace_scale();
        let worst = d.iter().zip(&sc).map(|(d, s)| d.abs() / s).fold(0.0, f64::max);
        assert!(worst < 1e-12, "{t:?}: {worst}");
    }
}

#[test]
fn supercurrent_is_p_free() {
    let s = state(60, 16, Target::Sphere2, true);
    let j = supercurrent(&s).unwrap();
    assert!(sigmaspin::fields::apply_p(&j).max_abs() < 1e-12 * j.max_abs());
}

#[test]
fn dirac_trace_law_and_conservation() {
    let mut errs = vec![];
    for n in [16, 32, 64] {
        let grid = TorusGrid::new(n, 2).unwrap();
        let g = general_metric(3, grid);
        let sigma = SpinorField::random(&mut seeded_rng(4, 0), grid, SpinStructure::TRIVIAL, 1, 2, 1.0);
        let t = dirac_energy_momentum(&sigma, &g).unwrap();
        let l = sigma.dot_pointwise(&sigmaspin::spin::dirac(&sigma, &g).unwrap());
        for (a, b) in t.trace().iter().zip(&l) {
            assert!((a + b).abs() < 1e-11 * (1.0 + b.abs()));
        }
        errs.push(covector_norm(&dirac_conservation_defect(&sigma, &g).unwrap(), &g));
    }
    eprintln!("{errs:?}");
    assert!(errs[2] < 0.35 * errs[1] && errs[1] < 0.35 * errs[0], "{errs:?}");
}

#[test]
fn transported_dirac_closed_form() {
    let mut errs = vec![];
    for n in [16, 32, 64] {
        let grid = TorusGrid::new(n, 2).unwrap();
        let g = general_metric(5, grid);
        let mut rng = seeded_rng(6, 0);
        let k = Sym2Field::from_trig(
            grid,
            &TrigPoly::random(&mut rng, 1, 0.5, [0.0; 2]),
            &TrigPoly::random(&mut rng, 1, 0.5, [0.0; 2]),
            &TrigPoly::random(&mut rng, 1, 0.5, [0.0; 2]),
        );
        let sigma = SpinorField::random(&mut rng, grid, SpinStructure::TRIVIAL, 1, 2, 1.0);
        errs.push(transported_dirac_derivative_check(&k, &sigma, &g, 1e-5).unwrap());
    }
    eprintln!("{errs:?}");
    assert!(errs[2] < 0.35 * errs[1] && errs[1] < 0.35 * errs[0], "{errs:?}");
}

#[test]
fn diffeo_variation_sums_to_zero() {
    for t in TARGETS {
        let mut sums = vec![];
        for n in [16, 32, 64] {
            let s = state(70, n, t, true);
            let mut rng = seeded_rng(71, 0);
            let x = VectorField::from_trig(
                s.grid(),
                &TrigPoly::random(&mut rng, 1, 0.5, [0.0; 2]),
                &TrigPoly::random(&mut rng, 1, 0.5, [0.0; 2]),
            );
            let p = diffeo_variation_parts(&s, &x).unwrap();
            eprintln!("{t:?} n={n} {p:?}");
            sums.push((p[0] + p[1] + p[2]).abs());
        }
        assert!(sums[2] < 0.35 * sums[1] && sums[1] < 0.35 * sums[0], "{t:?} {sums:?}");
    }
}
