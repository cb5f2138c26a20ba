//! Real Clifford algebra Cl(0,2) acting on the spinor module S = R⁴.
//!
//! The generators satisfy γ_α γ_β + γ_β γ_α = −2 δ_αβ and are skew, so they
//! are orthogonal for the standard inner product on R⁴.

pub type Spinor = [f64; 4];
pub type Mat4 = [[f64; 4]; 4];

pub const GAMMA1: Mat4 = [
    [0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
    [-1.0, 0.0, 0.0, 0.0],
    [0.0, -1.0, 0.0, 0.0],
];

pub const GAMMA2: Mat4 = [
    [0.0, 0.0, 0.0, -1.0],
    [0.0, 0.0, 1.0, 0.0],
    [0.0, -1.0, 0.0, 0.0],
    [1.0, 0.0, 0.0, 0.0],
];

/// Volume element ω = γ₁γ₂.
pub const OMEGA: Mat4 = [
    [0.0, -1.0, 0.0, 0.0],
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
    [0.0, 0.0, -1.0, 0.0],
];

/// Grading operator used by the doubler regulator. It is symmetric and
/// anticommutes with both generators.
pub const GRADING: Mat4 = [
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, -1.0, 0.0],
    [0.0, 0.0, 0.0, -1.0],
];

pub const IDENTITY: Mat4 = [
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
];

#[inline]
pub fn gamma(alpha: usize) -> &'static Mat4 {
    match alpha {
        0 => &GAMMA1,
        1 => &GAMMA2,
        _ => panic!("frame index {alpha} out of range"),
    }
}

#[inline]
pub fn apply(m: &Mat4, s: &[f64]) -> Spinor {
    let mut out = [0.0; 4];
    for (i, row) in m.iter().enumerate() {
        out[i] = row[0] * s[0] + row[1] * s[1] + row[2] * s[2] + row[3] * s[3];
    }
    out
}

/// Clifford multiplication by the frame vector e_α.
#[inline]
pub fn gamma_apply(alpha: usize, s: &[f64]) -> Spinor {
    // explicit forms of the matrices above
    match alpha {
        0 => [s[2], s[3], -s[0], -s[1]],
        1 => [-s[3], s[2], -s[1], s[0]],
        _ => panic!("frame index {alpha} out of range"),
    }
}

#[inline]
pub fn omega_apply(s: &[f64]) -> Spinor {
    [-s[1], s[0], s[3], -s[2]]
}

#[inline]
pub fn grading_apply(s: &[f64]) -> Spinor {
    [s[0], s[1], -s[2], -s[3]]
}

/// Clifford multiplication by the vector v = v¹e₁ + v²e₂.
#[inline]
pub fn vector_apply(v: [f64; 2], s: &[f64]) -> Spinor {
    let a = gamma_apply(0, s);
    let b = gamma_apply(1, s);
    [
        v[0] * a[0] + v[1] * b[0],
        v[0] * a[1] + v[1] * b[1],
        v[0] * a[2] + v[1] * b[2],
        v[0] * a[3] + v[1] * b[3],
    ]
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

pub fn matmul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut c = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            c[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

pub fn transpose(a: &Mat4) -> Mat4 {
    let mut t = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            t[i][j] = a[j][i];
        }
    }
    t
}

pub fn add(a: &Mat4, b: &Mat4, sb: f64) -> Mat4 {
    let mut c = *a;
    for i in 0..4 {
        for j in 0..4 {
            c[i][j] += sb * b[i][j];
        }
    }
    c
}

pub fn max_abs(a: &Mat4) -> f64 {
    a.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Clifford action of the 2-form a·dx¹∧dx²: (a/√det g) ω s.
pub fn two_form_apply(a: f64, det_g: f64, s: &[f64]) -> crate::Result<Spinor> {
    if !(det_g > 0.0) {
        return Err(crate::Error::Incompatible(format!("det g = {det_g} is not positive")));
    }
    let w = omega_apply(s);
    let c = a / det_g.sqrt();
    Ok([c * w[0], c * w[1], c * w[2], c * w[3]])
}

/// The fixed representation, bundled for callers that want the matrices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaRep {
    pub gamma1: Mat4,
    pub gamma2: Mat4,
    pub omega: Mat4,
}

impl GammaRep {
    pub fn canonical() -> Self {
        GammaRep { gamma1: GAMMA1, gamma2: GAMMA2, omega: OMEGA }
    }
}

/// Largest entry of |γ_αγ_β + γ_βγ_α + 2δ_αβ|, together with the
/// skewness and volume-element identities. Zero for a valid representation.
pub fn relations_defect() -> f64 {
    let mut worst = 0.0f64;
    for a in 0..2 {
        for b in 0..2 {
            let ab = matmul(gamma(a), gamma(b));
            let ba = matmul(gamma(b), gamma(a));
            let mut s = add(&ab, &ba, 1.0);
            if a == b {
                s = add(&s, &IDENTITY, 2.0);
            }
            worst = worst.max(max_abs(&s));
        }
        worst = worst.max(max_abs(&add(&transpose(gamma(a)), gamma(a), 1.0)));
        let anti = add(&matmul(gamma(a), &GRADING), &matmul(&GRADING, gamma(a)), 1.0);
        worst = worst.max(max_abs(&anti));
    }
    let w = matmul(&GAMMA1, &GAMMA2);
    worst = worst.max(max_abs(&add(&w, &OMEGA, -1.0)));
    worst = worst.max(max_abs(&add(&matmul(&OMEGA, &OMEGA), &IDENTITY, 1.0)));
    worst
}

/// Matrix of the spin lift of a rotation of the frame by angle θ:
/// exp(θω/2) = cos(θ/2) + sin(θ/2) ω.
pub fn spin_rotation(theta: f64) -> Mat4 {
    let (s, c) = (0.5 * theta).sin_cos();
    let mut m = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] = c * IDENTITY[i][j] + s * OMEGA[i][j];
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relations_hold_exactly() {
        assert_eq!(relations_defect(), 0.0);
    }

    #[test]
    fn fast_paths_match_matrices() {
        let s = [0.3, -1.2, 2.5, 0.7];
        for a in 0..2 {
            assert_eq!(gamma_apply(a, &s), apply(gamma(a), &s));
        }
        assert_eq!(omega_apply(&s), apply(&OMEGA, &s));
        assert_eq!(grading_apply(&s), apply(&GRADING, &s));
    }

    #[test]
    fn omega_relations() {
        // γ₁ω = −γ₂ and γ₂ω = γ₁
        let g1w = matmul(&GAMMA1, &OMEGA);
        let g2w = matmul(&GAMMA2, &OMEGA);
        assert_eq!(max_abs(&add(&g1w, &GAMMA2, 1.0)), 0.0);
        assert_eq!(max_abs(&add(&g2w, &GAMMA1, -1.0)), 0.0);
    }

    #[test]
    fn two_form_examples() {
        let s = [1.0, 2.0, -0.5, 0.25];
        assert_eq!(two_form_apply(0.0, 2.0, &s).unwrap(), [0.0; 4]);
        assert_eq!(two_form_apply(3.0, 9.0, &s).unwrap(), omega_apply(&s));
        assert!(two_form_apply(1.0, 0.0, &s).is_err());
    }

    #[test]
    fn spin_rotation_conjugates_generators() {
        let th = 0.73;
        let s = spin_rotation(th);
        let sinv = spin_rotation(-th);
        let c1 = matmul(&matmul(&s, &GAMMA1), &sinv);
        let expect = add(&add(&[[0.0; 4]; 4], &GAMMA1, th.cos()), &GAMMA2, th.sin());
        assert!(max_abs(&add(&c1, &expect, -1.0)) < 1e-15);
    }
}
