//! Exact-rational expansion of the scaled interference term: `L_m^{-1/2}`
//! is built by the three-term recurrence over rationals, `z = (r ± s)²/c`
//! is substituted by bivariate polynomial multiplication, and monomials are
//! classified by their exponents.

#![allow(dead_code)]

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub type Poly1 = Vec<BigRational>;
pub type Poly2 = BTreeMap<(usize, usize), BigRational>;

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

/// Coefficients of `L_m^{-1/2}(z)` in powers of z, from
/// `k L_k = (2k − 3/2 − z) L_{k−1} − (k − 3/2) L_{k−2}`.
pub fn laguerre_half(m: usize) -> Poly1 {
    let mut prev: Poly1 = vec![BigRational::one()];
    if m == 0 {
        return prev;
    }
    let mut cur: Poly1 = vec![rat(1, 2), rat(-1, 1)];
    for k in 2..=m {
        let kk = k as i64;
        let a = rat(4 * kk - 3, 2);
        let b = rat(2 * kk - 3, 2);
        let mut next = vec![BigRational::zero(); k + 1];
        for (i, c) in cur.iter().enumerate() {
            next[i] += &a * c;
            next[i + 1] -= c;
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] -= &b * c;
        }
        let kr = rat(kk, 1);
        prev = cur;
        cur = next.into_iter().map(|c| c / &kr).collect();
    }
    cur
}

pub fn mul(a: &Poly2, b: &Poly2) -> Poly2 {
    let mut out = Poly2::new();
    for ((i1, j1), c1) in a {
        for ((i2, j2), c2) in b {
            *out.entry((i1 + i2, j1 + j2)).or_insert_with(BigRational::zero) += c1 * c2;
        }
    }
    out
}

/// `(cross, single)` sums at `(r, s)` for the sum (`sign = 1`) or
/// difference (`sign = −1`) argument.
pub fn expanded(m: usize, c: &BigRational, sign: i64, r: &BigRational, s: &BigRational) -> (BigRational, BigRational) {
    let lag = laguerre_half(m);
    let mut lin = Poly2::new();
    lin.insert((1, 0), BigRational::one());
    lin.insert((0, 1), rat(sign, 1));
    let z = mul(&lin, &lin)
        .into_iter()
        .map(|(k, v)| (k, v / c))
        .collect::<Poly2>();
    let mut power = Poly2::from([((0, 0), BigRational::one())]);
    let mut total = Poly2::new();
    for coeff in &lag {
        for (k, v) in &power {
            *total.entry(*k).or_insert_with(BigRational::zero) += coeff * v;
        }
        power = mul(&power, &z);
    }
    let (mut cross, mut single) = (BigRational::zero(), BigRational::zero());
    for ((i, j), v) in total {
        let term = v * pow(r, i) * pow(s, j);
        match (i, j) {
            (0, 0) => {}
            (0, _) | (_, 0) => single += term,
            _ => cross += term,
        }
    }
    (cross, single)
}

pub fn pow(x: &BigRational, n: usize) -> BigRational {
    (0..n).fold(BigRational::one(), |acc, _| acc * x)
}
