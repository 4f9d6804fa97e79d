//! Lossless two-mode couplers (beam splitter and dual-channel directional
//! coupler) and their SU(2) coefficient pair.
//!
//! Both devices act on the annihilation operators through
//!
//! ```text
//! ⎡a1'⎤   ⎡A1  A2 ⎤ ⎡a1⎤
//! ⎣a2'⎦ = ⎣A2  A1*⎦ ⎣a2⎦
//! ```
//!
//! with `|A1|² + |A2|² = 1`. The vortex generator weights are the moduli of
//! the pair; the relative phase is carried by the vortex sign.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Coefficient pair `(A1, A2)` of a lossless two-mode coupler.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeCoupler {
    a1: Complex64,
    a2: Complex64,
}

impl ModeCoupler {
    pub const UNITARITY_TOL: f64 = 1e-12;

    /// Builds a coupler from explicit coefficients, rejecting pairs that are
    /// not unitary within [`Self::UNITARITY_TOL`].
    pub fn new(a1: Complex64, a2: Complex64) -> Result<Self> {
        let c = ModeCoupler { a1, a2 };
        let defect = c.unitarity_defect();
        if !defect.is_finite() || defect > Self::UNITARITY_TOL {
            return Err(Error::param(
                "coupler",
                format!("|A1|^2 + |A2|^2 deviates from 1 by {defect:e}"),
            ));
        }
        Ok(c)
    }

    pub fn identity() -> Self {
        ModeCoupler {
            a1: Complex64::new(1.0, 0.0),
            a2: Complex64::new(0.0, 0.0),
        }
    }

    pub fn a1(&self) -> Complex64 {
        self.a1
    }

    pub fn a2(&self) -> Complex64 {
        self.a2
    }

    /// `| |A1|² + |A2|² − 1 |`
    pub fn unitarity_defect(&self) -> f64 {
        (self.a1.norm_sqr() + self.a2.norm_sqr() - 1.0).abs()
    }

    /// `A1* A2 + A1 A2*`; zero for a mixing-angle beam splitter with
    /// `φ ∈ {0, π}`.
    pub fn phase_condition(&self) -> f64 {
        2.0 * (self.a1.conj() * self.a2).re
    }

    /// Vortex generator weights `(η_x, η_y) = (|A1|, |A2|)`.
    pub fn ellipticity(&self) -> (f64, f64) {
        (self.a1.norm(), self.a2.norm())
    }
}

/// Beam splitter with mixing angle `theta` and phase `phi`:
/// `A1 = cos θ`, `A2 = −i e^{iφ} sin θ`.
pub fn bs_coupler(theta: f64, phi: f64) -> ModeCoupler {
    let (s, c) = sin_cos_balanced(theta);
    let (sp, cp) = sin_cos_balanced(phi);
    // −i e^{iφ} = sin φ − i cos φ
    ModeCoupler {
        a1: Complex64::new(c, 0.0),
        a2: Complex64::new(sp * s, -cp * s),
    }
}

/// `(sin a, cos a)` after reduction to the first quadrant, with the cosine
/// taken as `sin(π/2 − r)` so that both agree bitwise at `π/4`.
fn sin_cos_balanced(a: f64) -> (f64, f64) {
    use std::f64::consts::{FRAC_PI_2, TAU};
    let a = a.rem_euclid(TAU);
    let q = ((a / FRAC_PI_2).floor() as u8).min(3);
    let r = (a - f64::from(q) * FRAC_PI_2).max(0.0);
    let (s, c) = (r.sin(), (FRAC_PI_2 - r).sin());
    match q {
        0 => (s, c),
        1 => (c, -s),
        2 => (-s, -c),
        _ => (-c, s),
    }
}

/// Physical parameters of a dual-channel directional coupler.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DcdcParams {
    g: f64,
    delta: f64,
    t: f64,
}

impl DcdcParams {
    pub fn new(g: f64, delta: f64, t: f64) -> Result<Self> {
        if !(g.is_finite() && g > 0.0) {
            return Err(Error::param("g", format!("coupling strength must be > 0, got {g}")));
        }
        if !delta.is_finite() {
            return Err(Error::param("delta", "detuning must be finite"));
        }
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::param("t", format!("interaction time must be >= 0, got {t}")));
        }
        Ok(DcdcParams { g, delta, t })
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Ω = √(δ² + g²)
    pub fn omega(&self) -> f64 {
        self.delta.hypot(self.g)
    }
}

/// Time-evolved coefficients of a DCDC:
/// `A1 = cos Ωt − i(δ/Ω) sin Ωt`, `A2 = i(g/Ω) sin Ωt`.
pub fn dcdc_coupler(p: &DcdcParams) -> ModeCoupler {
    let omega = p.omega();
    let (s, c) = sin_cos_balanced(omega * p.t);
    ModeCoupler {
        a1: Complex64::new(c, -(p.delta / omega) * s),
        a2: Complex64::new(0.0, (p.g / omega) * s),
    }
}

pub fn coupler_to_ellipticity(c: &ModeCoupler) -> (f64, f64) {
    c.ellipticity()
}

/// Shortest interaction time with `|A1(t)| / |A2(t)| = ratio`.
///
/// On the first branch `Ωt ∈ (0, π/2]` the ratio falls monotonically from
/// infinity to `|δ|/g`, and `sin² Ωt = Ω² / (g² (1 + ratio²))`.
pub fn dcdc_time_for_ratio(ratio: f64, g: f64, delta: f64) -> Result<f64> {
    if !(ratio.is_finite() && ratio > 0.0) {
        return Err(Error::param("ratio", format!("must be finite and > 0, got {ratio}")));
    }
    if !(g.is_finite() && g > 0.0) {
        return Err(Error::param("g", format!("coupling strength must be > 0, got {g}")));
    }
    if !delta.is_finite() {
        return Err(Error::param("delta", "detuning must be finite"));
    }
    let infimum = delta.abs() / g;
    if ratio < infimum {
        return Err(Error::InfeasibleRatio {
            requested: ratio,
            infimum,
        });
    }
    let omega = delta.hypot(g);
    let sin_wt = (omega / (g * ratio.hypot(1.0))).min(1.0);
    Ok(sin_wt.asin() / omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};

    fn assert_c(z: Complex64, re: f64, im: f64) {
        assert_abs_diff_eq!(z.re, re, epsilon = 1e-14);
        assert_abs_diff_eq!(z.im, im, epsilon = 1e-14);
    }

    #[test]
    fn balanced_beam_splitter() {
        let c = bs_coupler(FRAC_PI_4, 0.0);
        assert_c(c.a1(), FRAC_1_SQRT_2, 0.0);
        assert_c(c.a2(), 0.0, -FRAC_1_SQRT_2);
        assert!(c.phase_condition().abs() < 1e-12);
    }

    #[test]
    fn zero_angle_is_identity() {
        for phi in [0.0, 1.3, -7.0] {
            let c = bs_coupler(0.0, phi);
            assert_c(c.a1(), 1.0, 0.0);
            assert_c(c.a2(), 0.0, 0.0);
        }
    }

    #[test]
    fn third_angle_with_quarter_phase() {
        let c = bs_coupler(FRAC_PI_3, FRAC_PI_2);
        assert_c(c.a1(), 0.5, 0.0);
        assert_c(c.a2(), 3f64.sqrt() / 2.0, 0.0);
        assert!(c.unitarity_defect() < 1e-12);
    }

    #[test]
    fn dcdc_resonant_quarter_period() {
        let c = dcdc_coupler(&DcdcParams::new(1.0, 0.0, FRAC_PI_4).unwrap());
        assert_c(c.a1(), FRAC_1_SQRT_2, 0.0);
        assert_c(c.a2(), 0.0, FRAC_1_SQRT_2);
    }

    #[test]
    fn dcdc_zero_time() {
        let c = dcdc_coupler(&DcdcParams::new(1.0, 0.0, 0.0).unwrap());
        assert_c(c.a1(), 1.0, 0.0);
        assert_c(c.a2(), 0.0, 0.0);
    }

    #[test]
    fn dcdc_detuned() {
        let p = DcdcParams::new(3.0, 4.0, 0.1).unwrap();
        assert_eq!(p.omega(), 5.0);
        let c = dcdc_coupler(&p);
        assert_c(c.a1(), 0.5f64.cos(), -0.8 * 0.5f64.sin());
        assert_c(c.a2(), 0.0, 0.6 * 0.5f64.sin());
        assert!(c.unitarity_defect() < 1e-12);
    }

    #[test]
    fn dcdc_rejects_bad_parameters() {
        assert!(DcdcParams::new(0.0, 1.0, 1.0).is_err());
        assert!(DcdcParams::new(-1.0, 1.0, 1.0).is_err());
        assert!(DcdcParams::new(1.0, 1.0, -0.5).is_err());
        assert!(DcdcParams::new(f64::NAN, 1.0, 1.0).is_err());
    }

    #[test]
    fn ellipticity_moduli() {
        let (ex, ey) = bs_coupler(FRAC_PI_4, 0.0).ellipticity();
        assert_abs_diff_eq!(ex, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_eq!(ex / ey, 1.0);
        let (ex, ey) = dcdc_coupler(&DcdcParams::new(1.0, 0.0, FRAC_PI_4).unwrap()).ellipticity();
        assert_eq!(ex / ey, 1.0);
        assert_eq!(ModeCoupler::identity().ellipticity(), (1.0, 0.0));
        let c = ModeCoupler::new(Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)).unwrap();
        let (ex, ey) = coupler_to_ellipticity(&c);
        assert_abs_diff_eq!(ex, 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(ey, 0.8, epsilon = 1e-15);
    }

    #[test]
    fn new_rejects_non_unitary() {
        assert!(ModeCoupler::new(Complex64::new(0.6, 0.0), Complex64::new(0.6, 0.0)).is_err());
    }

    #[test]
    fn ratio_one_resonant() {
        let t = dcdc_time_for_ratio(1.0, 1.0, 0.0).unwrap();
        assert_abs_diff_eq!(t, FRAC_PI_4, epsilon = 1e-12);
    }

    #[test]
    fn ratio_large_is_small_angle() {
        let t = dcdc_time_for_ratio(1e6, 1.0, 0.0).unwrap();
        // sin t = 1/sqrt(1 + 1e12), so t = 1e-6 (1 - 5e-13) + O(1e-18)
        assert_abs_diff_eq!(t, 1e-6, epsilon = 1e-17);
    }

    /// Dense scan of |A1|/|A2| over the first branch followed by bisection,
    /// independent of the closed-form inversion.
    fn scan_for_ratio(ratio: f64, g: f64, delta: f64) -> f64 {
        let omega = delta.hypot(g);
        let r = |t: f64| {
            let c = dcdc_coupler(&DcdcParams::new(g, delta, t).unwrap());
            c.a1().norm() / c.a2().norm()
        };
        let t_max = FRAC_PI_2 / omega;
        let n = 10_000;
        let mut lo = t_max / n as f64 * 1e-3;
        let mut hi = t_max;
        for k in 1..=n {
            let t = t_max * k as f64 / n as f64;
            if r(t) <= ratio {
                hi = t;
                lo = t_max * (k - 1) as f64 / n as f64;
                break;
            }
        }
        if lo == 0.0 {
            lo = 1e-300;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if r(mid) > ratio {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn ratio_matches_scan_oracle() {
        for &(ratio, g, delta) in &[(2.0, 3.0, 4.0), (2.5, 1.0, 0.3), (0.7, 2.0, -1.0), (1.0, 1.0, 0.0)] {
            let t = dcdc_time_for_ratio(ratio, g, delta).unwrap();
            let t_scan = scan_for_ratio(ratio, g, delta);
            assert_abs_diff_eq!(t, t_scan, epsilon = 1e-10);
            let c = dcdc_coupler(&DcdcParams::new(g, delta, t).unwrap());
            assert_abs_diff_eq!(c.a1().norm() / c.a2().norm(), ratio, epsilon = 1e-10);
        }
    }

    #[test]
    fn ratio_detuned_equation() {
        // ratio 1 needs cos²(5t) + (16/25) sin²(5t) = (9/25) sin²(5t), which
        // has no root: the infimum of |A1|/|A2| is δ/g = 4/3
        match dcdc_time_for_ratio(1.0, 3.0, 4.0) {
            Err(Error::InfeasibleRatio { infimum, .. }) => assert_abs_diff_eq!(infimum, 4.0 / 3.0),
            other => panic!("expected infeasible, got {other:?}"),
        }
        // ratio 2: cos²(5t) + (16/25) sin²(5t) = 4 (9/25) sin²(5t)
        let t = dcdc_time_for_ratio(2.0, 3.0, 4.0).unwrap();
        let (s, c) = (5.0 * t).sin_cos();
        assert_abs_diff_eq!(c * c + 16.0 / 25.0 * s * s, 36.0 / 25.0 * s * s, epsilon = 1e-12);
        assert!(5.0 * t > 0.0 && 5.0 * t <= FRAC_PI_2);
    }

    #[test]
    fn ratio_infeasible_reports_infimum() {
        match dcdc_time_for_ratio(0.5, 1.0, 2.0) {
            Err(Error::InfeasibleRatio { infimum, .. }) => assert_eq!(infimum, 2.0),
            other => panic!("expected infeasible, got {other:?}"),
        }
        assert!(dcdc_time_for_ratio(0.0, 1.0, 0.0).is_err());
        assert!(dcdc_time_for_ratio(1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn dcdc_periodicity() {
        let p = DcdcParams::new(1.7, -0.4, 0.9).unwrap();
        let q = DcdcParams::new(1.7, -0.4, 0.9 + 2.0 * PI / p.omega()).unwrap();
        let (a, b) = (dcdc_coupler(&p), dcdc_coupler(&q));
        assert!((a.a1() - b.a1()).norm() < 1e-12);
        assert!((a.a2() - b.a2()).norm() < 1e-12);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn bs_is_unitary(theta in -50.0f64..50.0, phi in -50.0f64..50.0) {
                let c = bs_coupler(theta, phi);
                prop_assert!(c.unitarity_defect() <= 1e-12);
            }

            #[test]
            fn bs_phase_condition_for_real_phase(theta in -50.0f64..50.0, flip in any::<bool>()) {
                // A1* A2 + A1 A2* = sin 2θ sin φ vanishes for φ ∈ {0, π}
                let c = bs_coupler(theta, if flip { PI } else { 0.0 });
                prop_assert!(c.phase_condition().abs() <= 1e-12);
            }

            #[test]
            fn dcdc_is_unitary(g in 1e-3f64..10.0, delta in -10.0f64..10.0, t in 0.0f64..100.0) {
                let c = dcdc_coupler(&DcdcParams::new(g, delta, t).unwrap());
                prop_assert!(c.unitarity_defect() <= 1e-12);
            }

            #[test]
            fn dcdc_period(g in 1e-2f64..5.0, delta in -5.0f64..5.0, t in 0.0f64..10.0) {
                let p = DcdcParams::new(g, delta, t).unwrap();
                let q = DcdcParams::new(g, delta, t + 2.0 * PI / p.omega()).unwrap();
                let (a, b) = (dcdc_coupler(&p), dcdc_coupler(&q));
                prop_assert!((a.a1() - b.a1()).norm() <= 1e-12);
                prop_assert!((a.a2() - b.a2()).norm() <= 1e-12);
            }
        }
    }
}
