//! Gamma matrices, the grading and the spin lift of a frame rotation.

use std::f64::consts::PI;

use sigmaspin::clifford::{self, gamma, matmul, max_abs, spin_rotation};

fn main() {
    println!("relations defect: {:.2e}", clifford::relations_defect());
    for a in 0..2 {
        println!("gamma_{}:", a + 1);
        for row in gamma(a) {
            println!("  {row:?}");
        }
    }
    let s = [1.0, 0.5, -0.25, 2.0];
    let w = clifford::omega_apply(&clifford::omega_apply(&s));
    println!("omega^2 s = {w:?} (expect -s)");

    // a full turn lifts to -1, two turns to +1
    let id = spin_rotation(0.0);
    let one = spin_rotation(2.0 * PI);
    let two = matmul(&one, &one);
    println!("|R(2pi) + 1| = {:.2e}", max_abs(&clifford::add(&one, &id, 1.0)));
    println!("|R(2pi)^2 - 1| = {:.2e}", max_abs(&clifford::add(&two, &id, -1.0)));
}
