//! Closed forms against the numerical Wigner transform.

use qvortex_core::oracle::{adjudicate, oracle_marginal_xy, oracle_wigner, QuadratureSpec};
use qvortex_core::quad::{integrate, QuadOptions};
use qvortex_core::report::Verdict;
use qvortex_core::state::{DeevParams, Displacement, VortexSign};
use qvortex_core::wigner::{ClosedForm, PhasePoint, WignerModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const WIDTHS: [(f64, f64); 3] = [(1.0, 1.0), (5.0, 3.0), (2.0, 0.7)];

fn random_point(rng: &mut ChaCha8Rng, p: &DeevParams) -> PhasePoint {
    let (sx, sy) = (p.sigma_x(), p.sigma_y());
    let c = PhasePoint::center(p.displacement());
    PhasePoint::new(
        c.x + rng.gen_range(-2.5..2.5) * sx,
        c.y + rng.gen_range(-2.5..2.5) * sy,
        c.px + rng.gen_range(-2.5..2.5) / sx,
        c.py + rng.gen_range(-2.5..2.5) / sy,
    )
}

#[test]
fn coupled_mode_form_equals_oracle() {
    let q = QuadratureSpec::default();
    let mut cases = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for m in 0..=3 {
        for (sx, sy) in WIDTHS {
            let sign = if m % 2 == 0 { VortexSign::Plus } else { VortexSign::Minus };
            let p = DeevParams::from_sigmas(m, sx, sy)
                .unwrap()
                .with_sign(sign)
                .with_displacement(Displacement::new(0.3, -0.2, 0.1, 0.05))
                .unwrap();
            for _ in 0..12 {
                cases.push((p, random_point(&mut rng, &p)));
            }
        }
    }
    cases.par_iter().for_each(|(p, pt)| {
        let model = WignerModel::new(*p, ClosedForm::CoupledMode).unwrap();
        let w = model.eval(*pt);
        let o = oracle_wigner(p, *pt, &q).unwrap();
        assert!(o.imag.abs() <= 10.0 * q.abs_tol, "imag {}", o.imag);
        if o.value.abs() > 1e-10 {
            let rel = (w - o.value).abs() / o.value.abs();
            assert!(rel <= 1e-6, "m={} {pt:?}: closed {w} oracle {}", p.m(), o.value);
        } else {
            assert!((w - o.value).abs() <= 1e-10);
        }
    });
}

#[test]
fn elliptic_m3_reference_point() {
    let p = DeevParams::from_sigmas(3, 5.0, 3.0).unwrap();
    let pt = PhasePoint::new(1.0, 1.0, 0.1, -0.1);
    let o = oracle_wigner(&p, pt, &QuadratureSpec::default()).unwrap();
    let coupled = WignerModel::new(p, ClosedForm::CoupledMode).unwrap().eval(pt);
    assert!((coupled - o.value).abs() <= 1e-6 * o.value.abs());
}

#[test]
fn compact_form_shape_differs_from_oracle() {
    let q = QuadratureSpec::default();
    for (sx, sy) in [(1.0, 1.0), (5.0, 3.0)] {
        let p = DeevParams::from_sigmas(1, sx, sy).unwrap();
        let model = WignerModel::new(p, ClosedForm::Compact).unwrap();
        let r = adjudicate(&model, &q, 5).unwrap();
        assert_eq!(r.verdict, Verdict::ShapeMismatch);
        let again = adjudicate(&model, &q.halved(), 5).unwrap();
        assert_eq!(again.verdict, r.verdict);
    }
}

#[test]
fn marginals_match_intensity() {
    let q = QuadratureSpec::default();
    let p = DeevParams::from_sigmas(3, 5.0, 3.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pts: Vec<(f64, f64)> = (0..10)
        .map(|_| (rng.gen_range(-12.0..12.0), rng.gen_range(-8.0..8.0)))
        .collect();
    pts.par_iter().for_each(|&(x, y)| {
        let m = oracle_marginal_xy(&p, x, y, &q).unwrap();
        assert!(m.discrepancy() <= 1e-5, "({x}, {y}): {m:?}");
    });
}

#[test]
fn coupled_mode_form_integrates_to_one() {
    // nested quadrature in scaled variables over [−7, 7]⁴
    let p = DeevParams::from_sigmas(2, 2.0, 0.7).unwrap();
    let model = WignerModel::new(p, ClosedForm::CoupledMode).unwrap();
    let (sx, sy) = (p.sigma_x(), p.sigma_y());
    let opts = QuadOptions {
        abs_tol: 1e-9,
        rel_tol: 1e-8,
        max_subdivisions: 200,
        initial_pieces: 2,
    };
    let l = 7.0;
    let total = integrate(
        |a| {
            integrate(
                |b| {
                    integrate(
                        |c| {
                            integrate(
                                |d| model.eval(PhasePoint::new(a * sx, b * sy, c / sx, d / sy)),
                                -l,
                                l,
                                &opts,
                            )
                            .unwrap()
                            .value
                        },
                        -l,
                        l,
                        &opts,
                    )
                    .unwrap()
                    .value
                },
                -l,
                l,
                &opts,
            )
            .unwrap()
            .value
        },
        -l,
        l,
        &opts,
    )
    .unwrap()
    .value;
    assert!((total - 1.0).abs() <= 1e-4, "∫W = {total}");
}
