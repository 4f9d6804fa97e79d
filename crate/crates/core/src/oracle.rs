//! Numerical Wigner transform of the position-space wavefunction.
//!
//! `W(x, y, px, py) = (1/π²) ∫∫ ψ*(x+u, y+v) ψ(x−u, y−v) e^{2i(px u + py v)} du dv`
//! evaluated by nested adaptive Gauss–Kronrod quadrature (outer `u`, inner
//! `v`) over `[−R, R]²`. It shares nothing with the closed forms except the
//! wavefunction, so it can adjudicate them.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::{integrate, QuadOptions, WithError};
use crate::report::{DiscrepancyReport, Probe, Verdict};
use crate::state::DeevParams;
use crate::wigner::{PhasePoint, WignerModel};

const INV_PI2: f64 = 1.0 / (std::f64::consts::PI * std::f64::consts::PI);

/// Ratios that agree to this relative spread count as one constant.
pub const SHAPE_TOLERANCE: f64 = 1e-6;
/// Probes where either the oracle or the closed form is smaller than this
/// are skipped during calibration.
pub const PROBE_FLOOR: f64 = 1e-8;
pub const CALIBRATION_PROBES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Half-width of the integration box in units of `max(σx, σy)`.
    pub truncation_radius: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            abs_tol: 1e-13,
            rel_tol: 1e-11,
            max_subdivisions: 4000,
            truncation_radius: 8.0,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, t) in [("abs_tol", self.abs_tol), ("rel_tol", self.rel_tol)] {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::param(name, format!("tolerance must be finite and > 0, got {t}")));
            }
        }
        if self.max_subdivisions == 0 {
            return Err(Error::param("max_subdivisions", "must be >= 1"));
        }
        if !(self.truncation_radius.is_finite() && self.truncation_radius >= 6.0) {
            return Err(Error::param(
                "truncation_radius",
                format!("must be >= 6, got {}", self.truncation_radius),
            ));
        }
        Ok(())
    }

    /// Both tolerances halved.
    pub fn halved(&self) -> Self {
        QuadratureSpec {
            abs_tol: 0.5 * self.abs_tol,
            rel_tol: 0.5 * self.rel_tol,
            ..*self
        }
    }

    fn window(&self, params: &DeevParams) -> (f64, usize) {
        let (sx, sy) = (params.sigma_x(), params.sigma_y());
        let r = self.truncation_radius * sx.max(sy);
        // one initial piece per narrowest width keeps every lobe resolved
        let pieces = (2.0 * r / sx.min(sy)).ceil().clamp(1.0, 512.0) as usize;
        (r, pieces)
    }

    fn inner_options(&self, r: f64, pieces: usize) -> QuadOptions {
        QuadOptions {
            abs_tol: self.abs_tol / (2.0 * r),
            rel_tol: self.rel_tol,
            max_subdivisions: self.max_subdivisions,
            initial_pieces: pieces,
        }
    }

    fn outer_options(&self, pieces: usize) -> QuadOptions {
        QuadOptions {
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            max_subdivisions: self.max_subdivisions,
            initial_pieces: pieces,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleEstimate {
    /// Real part of the transform.
    pub value: f64,
    /// Imaginary residue, zero for an exact Wigner function.
    pub imag: f64,
    /// Error bound including propagated inner-integral errors.
    pub error: f64,
    pub evaluations: usize,
}

/// `∫∫ ψ*(x+u, y+v) ψ(x−u, y−v) ku(u) kv(v) du dv` with the complex
/// kernels given per axis, scaled by `1/π²`.
fn transform<Ku, Kv>(params: &DeevParams, x: f64, y: f64, q: &QuadratureSpec, ku: Ku, kv: Kv) -> Result<OracleEstimate>
where
    Ku: Fn(f64) -> Complex64,
    Kv: Fn(f64) -> Complex64,
{
    q.validate()?;
    let (r, pieces) = q.window(params);
    let inner_opts = q.inner_options(r, pieces);
    let outer_opts = q.outer_options(pieces);
    let mut evaluations = 0;
    let mut failure = None;
    let outer = integrate(
        |u| {
            let k = ku(u);
            let inner = integrate(
                |v| {
                    let a = params.psi(x + u, y + v).conj();
                    let b = params.psi(x - u, y - v);
                    a * b * kv(v)
                },
                -r,
                r,
                &inner_opts,
            );
            match inner {
                Ok(res) => {
                    evaluations += res.evaluations;
                    WithError {
                        value: res.value * k,
                        error: res.error * k.norm(),
                    }
                }
                Err(e) => {
                    failure.get_or_insert(e);
                    WithError {
                        value: Complex64::new(0.0, 0.0),
                        error: 0.0,
                    }
                }
            }
        },
        -r,
        r,
        &outer_opts,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let res = outer?;
    Ok(OracleEstimate {
        value: res.value.value.re * INV_PI2,
        imag: res.value.value.im * INV_PI2,
        error: res.error * INV_PI2,
        evaluations: evaluations + res.evaluations,
    })
}

/// Numerical Wigner function at one phase-space point.
pub fn oracle_wigner(params: &DeevParams, pt: PhasePoint, q: &QuadratureSpec) -> Result<OracleEstimate> {
    let (px, py) = (pt.px, pt.py);
    transform(
        params,
        pt.x,
        pt.y,
        q,
        |u| Complex64::from_polar(1.0, 2.0 * px * u),
        |v| Complex64::from_polar(1.0, 2.0 * py * v),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginalEstimate {
    /// Momentum integral of the oracle transform.
    pub quadrature: OracleEstimate,
    /// `|ψ(x, y)|²`.
    pub shortcut: f64,
}

impl MarginalEstimate {
    pub fn discrepancy(&self) -> f64 {
        (self.quadrature.value - self.shortcut).abs()
    }
}

/// `∫∫ W dpx dpy` at `(x, y)`.
///
/// The momentum integral over `[p0 − P, p0 + P]` of the transform kernel is
/// `e^{2i p0 u} sin(2Pu)/u`, with `P = (R_t + 2)/σ` per axis, beyond which
/// the Wigner function of an in-scope state is negligible. Tolerances are
/// loosened tenfold relative to `q`.
pub fn oracle_marginal_xy(params: &DeevParams, x: f64, y: f64, q: &QuadratureSpec) -> Result<MarginalEstimate> {
    let d = params.displacement();
    let t = q.truncation_radius + 2.0;
    let (wx, wy) = (t / params.sigma_x(), t / params.sigma_y());
    let loose = QuadratureSpec {
        abs_tol: 10.0 * q.abs_tol,
        rel_tol: 10.0 * q.rel_tol,
        ..*q
    };
    let quadrature = transform(
        params,
        x,
        y,
        &loose,
        |u| sinc_kernel(d.px0, wx, u),
        |v| sinc_kernel(d.py0, wy, v),
    )?;
    Ok(MarginalEstimate {
        quadrature,
        shortcut: params.intensity(x, y),
    })
}

fn sinc_kernel(p0: f64, half_width: f64, u: f64) -> Complex64 {
    let s = if u == 0.0 {
        2.0 * half_width
    } else {
        (2.0 * half_width * u).sin() / u
    };
    Complex64::from_polar(s, 2.0 * p0 * u)
}

/// Deterministic probe points `pt = center + (a σx, b σy, c/σx, d/σy)`
/// with `a..d` drawn from a Halton sequence on `[−1.5, 1.5]`.
pub fn probe_points(params: &DeevParams, n: usize) -> impl Iterator<Item = PhasePoint> + '_ {
    let (sx, sy) = (params.sigma_x(), params.sigma_y());
    let d = params.displacement();
    (1..=n).map(move |i| {
        let h = |base: usize| 3.0 * radical_inverse(i, base) - 1.5;
        PhasePoint::new(
            d.x0 + h(2) * sx,
            d.y0 + h(3) * sy,
            d.px0 + h(5) / sx,
            d.py0 + h(7) / sy,
        )
    })
}

fn radical_inverse(mut i: usize, base: usize) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base) as f64 * inv;
        i /= base;
        inv /= base as f64;
    }
    out
}

/// Evaluates the model's shape and the oracle at probes until `count`
/// usable ones (both magnitudes above [`PROBE_FLOOR`]) are collected.
fn collect_probes(model: &WignerModel, q: &QuadratureSpec, count: usize) -> Result<Vec<Probe>> {
    let params = *model.params();
    let mut probes = Vec::with_capacity(count);
    // the Halton points cover the box densely, so usable probes are common
    for pt in probe_points(&params, 64 * count.max(1)) {
        if probes.len() == count {
            break;
        }
        let shape = model.shape(pt);
        if shape.abs() <= PROBE_FLOOR {
            continue;
        }
        let oracle = oracle_wigner(&params, pt, q)?;
        if oracle.value.abs() <= PROBE_FLOOR {
            continue;
        }
        probes.push(Probe {
            point: pt,
            closed_form: model.constant().k * shape,
            shape,
            oracle: oracle.value,
            oracle_error: oracle.error,
            ratio: oracle.value / shape,
        });
    }
    if probes.len() < count {
        return Err(Error::param(
            "probes",
            format!("only {} of {count} probe points exceed {PROBE_FLOOR:e}", probes.len()),
        ));
    }
    Ok(probes)
}

/// Compares a closed form against the oracle at `count` probes.
///
/// The calibrated constant is the median probe ratio `W_oracle / shape`.
/// The verdict is `shape-mismatch` when any ratio deviates from it by more
/// than [`SHAPE_TOLERANCE`] relative, `match` when the model's own constant
/// also agrees to that tolerance, and `constant-only-mismatch` otherwise.
pub fn adjudicate(model: &WignerModel, q: &QuadratureSpec, count: usize) -> Result<DiscrepancyReport> {
    let probes = collect_probes(model, q, count.max(1))?;
    let mut ratios: Vec<f64> = probes.iter().map(|p| p.ratio).collect();
    ratios.sort_by(f64::total_cmp);
    let calibrated = ratios[ratios.len() / 2];
    let max_deviation = probes
        .iter()
        .map(|p| (p.ratio / calibrated - 1.0).abs())
        .fold(0.0, f64::max);
    let native = model.constant().k;
    let constant_deviation = (native / calibrated - 1.0).abs();
    let verdict = if max_deviation.is_nan() || max_deviation > SHAPE_TOLERANCE {
        Verdict::ShapeMismatch
    } else if constant_deviation <= SHAPE_TOLERANCE {
        Verdict::Match
    } else {
        Verdict::ConstantOnlyMismatch
    };
    Ok(DiscrepancyReport {
        params: *model.params(),
        form: model.form(),
        quadrature: *q,
        probes,
        native_constant: native,
        calibrated_constant: calibrated,
        max_deviation,
        verdict,
    })
}

/// Fits the closed form's constant against the oracle over
/// [`CALIBRATION_PROBES`] probes. A shape mismatch refuses calibration and
/// hands back the report as the error payload.
pub fn calibrate_constant(
    model: &WignerModel,
    q: &QuadratureSpec,
) -> std::result::Result<f64, CalibrationError> {
    let report = adjudicate(model, q, CALIBRATION_PROBES).map_err(CalibrationError::Oracle)?;
    match report.verdict {
        Verdict::ShapeMismatch => Err(CalibrationError::ShapeMismatch(Box::new(report))),
        _ => Ok(report.calibrated_constant),
    }
}

#[derive(Debug)]
pub enum CalibrationError {
    Oracle(Error),
    ShapeMismatch(Box<DiscrepancyReport>),
}

impl std::fmt::Display for CalibrationError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CalibrationError::Oracle(e) => write!(f, "{e}"),
            CalibrationError::ShapeMismatch(r) => write!(
                f,
                "closed form differs from the oracle in shape (max deviation {:e})",
                r.max_deviation
            ),
        }
    }
}

impl std::error::Error for CalibrationError {}

impl From<CalibrationError> for Error {
    fn from(e: CalibrationError) -> Self {
        match e {
            CalibrationError::Oracle(e) => e,
            CalibrationError::ShapeMismatch(r) => Error::ShapeMismatch {
                max_deviation: r.max_deviation,
            },
        }
    }
}
