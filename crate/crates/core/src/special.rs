//! Associated Laguerre polynomials and the few special-function values the
//! vortex states need.

use crate::error::{Error, Result};

/// `L_m^α(z)` by the three-term recurrence
/// `k L_k = (2k − 1 + α − z) L_{k−1} − (k − 1 + α) L_{k−2}`.
pub fn alp_eval(m: usize, alpha: f64, z: f64) -> f64 {
    let mut prev = 1.0;
    if m == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - z;
    for k in 2..=m {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0 + alpha - z) * cur - (kf - 1.0 + alpha) * prev) / kf;
        prev = cur;
        cur = next;
    }
    cur
}

/// Generalized binomial coefficient `binom(x, j)` for real `x`.
pub fn binom_real(x: f64, j: usize) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (x - i as f64) / (i + 1) as f64)
}

/// `Γ(m + ½) = (2m)! √π / (4^m m!)`, accumulated as `Π (k − ½)` to stay finite.
pub fn gamma_half_integer(m: usize) -> f64 {
    (1..=m).fold(std::f64::consts::PI.sqrt(), |acc, k| acc * (k as f64 - 0.5))
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Monomial coefficients of `L_m^α`, lowest power first.
#[derive(Debug, Clone, PartialEq)]
pub struct AlpCoeffs {
    m: usize,
    alpha: f64,
    coeffs: Vec<f64>,
}

impl AlpCoeffs {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Horner evaluation of the explicit series.
    pub fn eval(&self, z: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * z + c)
    }
}

/// `c_k = (−1)^k binom(m + α, m − k) / k!`
pub fn alp_coeffs(m: usize, alpha: f64) -> AlpCoeffs {
    let coeffs = (0..=m)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign * binom_real(m as f64 + alpha, m - k) / factorial(k)
        })
        .collect();
    AlpCoeffs { m, alpha, coeffs }
}

/// Physicists' Hermite polynomial `H_n(x)` by recurrence.
pub fn hermite(n: usize, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 2.0 * x;
    for k in 1..n {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

pub const RODRIGUES_MAX_ORDER: usize = 8;

/// `L_m^{−1/2}(x²)` recovered from `H_{2m}(x) = (−1)^m 2^{2m} m! L_m^{−1/2}(x²)`.
pub fn rodrigues_check(m: usize, x: f64) -> Result<f64> {
    if m > RODRIGUES_MAX_ORDER {
        return Err(Error::param(
            "m",
            format!("Hermite cross-check supports m <= {RODRIGUES_MAX_ORDER}, got {m}"),
        ));
    }
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(hermite(2 * m, x) / (sign * 4f64.powi(m as i32) * factorial(m)))
}
