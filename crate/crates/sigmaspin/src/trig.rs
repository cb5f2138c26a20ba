//! Trigonometric polynomials on the torus. They supply smooth test fields
//! with closed-form derivatives, and seeded band-limited random samples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_2, PI};

use crate::grid::TorusGrid;

/// One mode a·cos(2π k·x) + b·sin(2π k·x).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mode {
    pub k: [f64; 2],
    pub a: f64,
    pub b: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrigPoly {
    pub constant: f64,
    pub modes: Vec<Mode>,
}

pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

impl TrigPoly {
    pub fn constant(c: f64) -> Self {
        TrigPoly { constant: c, modes: vec![] }
    }

    pub fn cos(k: [f64; 2], a: f64) -> Self {
        TrigPoly { constant: 0.0, modes: vec![Mode { k, a, b: 0.0 }] }
    }

    pub fn sin(k: [f64; 2], b: f64) -> Self {
        TrigPoly { constant: 0.0, modes: vec![Mode { k, a: 0.0, b }] }
    }

    /// Random polynomial with all wave vectors |k_μ| ≤ band (shifted by
    /// `shift` ∈ {0, ½} per axis for antiperiodic fields). Coefficients decay
    /// like 1/(1 + |k|²).
    pub fn random<R: Rng>(rng: &mut R, band: usize, amplitude: f64, shift: [f64; 2]) -> Self {
        let b = band as i64;
        let mut modes = Vec::new();
        let mut constant = 0.0;
        for k2 in 0..=b {
            for k1 in -b..=b {
                let k = [k1 as f64 + shift[0], k2 as f64 + shift[1]];
                if k == [0.0, 0.0] {
                    constant = amplitude * rng.gen_range(-1.0..1.0);
                    continue;
                }
                if shift[1] == 0.0 && k2 == 0 && k1 < 0 {
                    continue;
                }
                let w = amplitude / (1.0 + k[0] * k[0] + k[1] * k[1]);
                modes.push(Mode { k, a: w * rng.gen_range(-1.0..1.0), b: w * rng.gen_range(-1.0..1.0) });
            }
        }
        TrigPoly { constant, modes }
    }

    pub fn scaled(mut self, s: f64) -> Self {
        self.constant *= s;
        for m in &mut self.modes {
            m.a *= s;
            m.b *= s;
        }
        self
    }

    pub fn plus(mut self, other: &TrigPoly) -> Self {
        self.constant += other.constant;
        self.modes.extend_from_slice(&other.modes);
        self
    }

    pub fn eval(&self, x: [f64; 2]) -> f64 {
        self.deriv(x, 0, 0)
    }

    /// ∂₁^m1 ∂₂^m2 of the polynomial at x.
    pub fn deriv(&self, x: [f64; 2], m1: u32, m2: u32) -> f64 {
        let m = m1 + m2;
        let mut s = if m == 0 { self.constant } else { 0.0 };
        for md in &self.modes {
            let th = 2.0 * PI * (md.k[0] * x[0] + md.k[1] * x[1]) + m as f64 * FRAC_PI_2;
            let f = (2.0 * PI * md.k[0]).powi(m1 as i32) * (2.0 * PI * md.k[1]).powi(m2 as i32);
            s += f * (md.a * th.cos() + md.b * th.sin());
        }
        s
    }

    pub fn sample(&self, grid: &TorusGrid) -> Vec<f64> {
        grid.map_points(|x| self.eval(x))
    }

    pub fn sample_deriv(&self, grid: &TorusGrid, m1: u32, m2: u32) -> Vec<f64> {
        grid.map_points(|x| self.deriv(x, m1, m2))
    }

    /// Max over the grid of |f|, used to normalise amplitudes.
    pub fn sup_on(&self, grid: &TorusGrid) -> f64 {
        self.sample(grid).iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}
