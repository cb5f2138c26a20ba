use proptest::prelude::*;
use sigmaspin::clifford::*;
use std::f64::consts::PI;

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

#[test]
fn canonical_representation_satisfies_all_relations() {
    assert_eq!(relations_defect(), 0.0);
    let r = GammaRep::canonical();
    assert_eq!(matmul(&r.gamma1, &r.gamma2), r.omega);
}

#[test]
fn fast_paths_agree_with_matrices() {
    let s = [0.3, -1.2, 2.0, 0.7];
    assert_eq!(gamma_apply(0, &s), apply(&GAMMA1, &s));
    assert_eq!(gamma_apply(1, &s), apply(&GAMMA2, &s));
    assert_eq!(omega_apply(&s), apply(&OMEGA, &s));
    assert_eq!(grading_apply(&s), apply(&GRADING, &s));
}

#[test]
fn spin_lift_of_full_turn_is_minus_one() {
    let m = spin_rotation(2.0 * PI);
    assert!(max_abs(&add(&m, &IDENTITY, 1.0)) < 1e-15);
    assert!(max_abs(&add(&spin_rotation(4.0 * PI), &IDENTITY, -1.0)) < 1e-14);
}

#[test]
fn two_form_rejects_degenerate_metric() {
    assert!(two_form_apply(1.0, 0.0, &[1.0, 0.0, 0.0, 0.0]).is_err());
    let w = two_form_apply(2.0, 4.0, &[1.0, 0.0, 0.0, 0.0]).unwrap();
    assert_eq!(w, [0.0, 1.0, 0.0, 0.0]);
}

fn spinor() -> impl Strategy<Value = [f64; 4]> {
    prop::array::uniform4(-3.0f64..3.0)
}

proptest! {
    #[test]
    fn clifford_relation_for_vectors(v in prop::array::uniform2(-2.0f64..2.0), w in prop::array::uniform2(-2.0f64..2.0), s in spinor()) {
        let a = vector_apply(v, &vector_apply(w, &s));
        let b = vector_apply(w, &vector_apply(v, &s));
        let ip = v[0] * w[0] + v[1] * w[1];
        let lhs: Vec<f64> = (0..4).map(|k| a[k] + b[k]).collect();
        let rhs: Vec<f64> = s.iter().map(|x| -2.0 * ip * x).collect();
        prop_assert!(close(&lhs, &rhs, 1e-12));
    }

    #[test]
    fn clifford_multiplication_is_skew(v in prop::array::uniform2(-2.0f64..2.0), s in spinor(), t in spinor()) {
        let l = dot(&vector_apply(v, &s), &t);
        let r = dot(&s, &vector_apply(v, &t));
        prop_assert!((l + r).abs() < 1e-12);
    }

    #[test]
    fn spin_rotation_is_a_homomorphism(a in -7.0f64..7.0, b in -7.0f64..7.0, s in spinor()) {
        let ab = apply(&spin_rotation(a), &apply(&spin_rotation(b), &s));
        let c = apply(&spin_rotation(a + b), &s);
        prop_assert!(close(&ab, &c, 1e-12));
        // orthogonal
        prop_assert!((dot(&c, &c) - dot(&s, &s)).abs() < 1e-11);
    }

    #[test]
    fn spin_rotation_covers_the_frame_rotation(th in -4.0f64..4.0, s in spinor()) {
        // R γ(v) R⁻¹ = γ(rot_θ v) on the spin side
        let r = spin_rotation(th);
        let ri = spin_rotation(-th);
        let v = [1.0, 0.0];
        let lhs = apply(&r, &vector_apply(v, &apply(&ri, &s)));
        let rot = [th.cos(), th.sin()];
        let rhs = vector_apply(rot, &s);
        prop_assert!(close(&lhs, &rhs, 1e-12));
    }

    #[test]
    fn grading_anticommutes_and_omega_commutes(s in spinor()) {
        for a in 0..2 {
            let x = grading_apply(&gamma_apply(a, &s));
            let y = gamma_apply(a, &grading_apply(&s));
            prop_assert!(close(&x, &y.map(|v| -v), 0.0));
        }
        let x = grading_apply(&omega_apply(&s));
        let y = omega_apply(&grading_apply(&s));
        prop_assert!(close(&x, &y, 0.0));
    }
}
