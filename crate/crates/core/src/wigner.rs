//! Closed-form Wigner functions of DEEV states, their two-variable slices,
//! and the scaled interference term (SIT).
//!
//! Two closed forms are available:
//!
//! * [`ClosedForm::Compact`]: the compact scaled-variable expression
//!   `K exp[−(X1² + Y1² + Px1² + Py1²)] L_m^{−1/2}[(Px2 + Py2 − X2 − Y2)² / (σx² + σy²)]`
//!   with `K = 2^{m−4} m! / (π√π Γ(m+½)) · [−2(σx² + σy²)]^m`.
//! * [`ClosedForm::CoupledMode`]: for weights with `η_x σ_x = η_y σ_y` the
//!   state is the Fock state `|m⟩` of the coupled mode `(a_x ± i a_y)/√2` in
//!   scaled coordinates, so
//!   `W = (−1)^m/π² · exp[−(ξ² + χ² + κx² + κy²)] · L_m[(ξ ± κy)² + (κx ∓ χ)²]`
//!   with `ξ = (x − x0)/σx`, `κx = σx (px − px0)` and likewise for y.
//!
//! Both use ħ = 1 and `W = (1/π²) ∫∫ ψ*(x+u, y+v) ψ(x−u, y−v) e^{2i(px u + py v)} du dv`
//! as the reference convention (see [`crate::oracle`]).

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::{AxisLabel, Field2D, GridSpec};
use crate::special::{alp_coeffs, alp_eval, binom_real, factorial, gamma_half_integer};
use crate::state::{DeevParams, Displacement};

/// A point `(x, y, px, py)` of the four-dimensional phase space.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhasePoint {
    pub x: f64,
    pub y: f64,
    pub px: f64,
    pub py: f64,
}

impl PhasePoint {
    pub fn new(x: f64, y: f64, px: f64, py: f64) -> Self {
        PhasePoint { x, y, px, py }
    }

    pub fn center(d: Displacement) -> Self {
        PhasePoint::new(d.x0, d.y0, d.px0, d.py0)
    }

    pub fn shifted(self, d: Displacement) -> Self {
        PhasePoint::new(self.x + d.x0, self.y + d.y0, self.px + d.px0, self.py + d.py0)
    }
}

/// The shifted and scaled variables of the compact closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledCoords {
    pub x1: f64,
    pub y1: f64,
    pub px1: f64,
    pub py1: f64,
    pub x2: f64,
    pub y2: f64,
    pub px2: f64,
    pub py2: f64,
}

pub fn scaled_coords(params: &DeevParams, pt: PhasePoint) -> ScaledCoords {
    let d = params.displacement();
    let (sx, sy) = (params.sigma_x(), params.sigma_y());
    let (dx, dy) = (pt.x - d.x0, pt.y - d.y0);
    let (dpx, dpy) = (pt.px - d.px0, pt.py - d.py0);
    let r2 = std::f64::consts::SQRT_2;
    ScaledCoords {
        x1: dx / sx,
        y1: dy / sy,
        px1: sx * dpx / r2,
        py1: sy * dpy / r2,
        x2: sy * dx / (2.0 * sx),
        y2: sx * dy / (2.0 * sy),
        px2: sy.powi(3) * dpx / r2,
        py2: sx.powi(3) * dpy / r2,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClosedForm {
    #[default]
    Compact,
    CoupledMode,
}

impl ClosedForm {
    pub fn as_str(self) -> &'static str {
        match self {
            ClosedForm::Compact => "compact",
            ClosedForm::CoupledMode => "coupled-mode",
        }
    }
}

impl fmt::Display for ClosedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClosedForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "compact" => Ok(ClosedForm::Compact),
            "coupled-mode" => Ok(ClosedForm::CoupledMode),
            other => Err(Error::Parse {
                what: "closed form",
                reason: format!("expected `compact` or `coupled-mode`, got `{other}`"),
            }),
        }
    }
}

/// `K = 2^{m−4} m! / (π√π Γ(m+½)) · [−2(σx² + σy²)]^m`
pub fn printed_constant(m: usize, sigma_x: f64, sigma_y: f64) -> f64 {
    let pi = std::f64::consts::PI;
    2f64.powi(m as i32 - 4) * factorial(m) / (pi * pi.sqrt() * gamma_half_integer(m))
        * (-2.0 * (sigma_x * sigma_x + sigma_y * sigma_y)).powi(m as i32)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstantSource {
    /// The constant that ships with the closed form.
    Native,
    /// Fitted against the numerical Wigner transform.
    Calibrated,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WignerConstant {
    pub k: f64,
    pub source: ConstantSource,
}

/// A closed form bound to a state and a multiplicative constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WignerModel {
    params: DeevParams,
    form: ClosedForm,
    constant: WignerConstant,
}

impl WignerModel {
    /// Uses the form's native constant. The coupled-mode form requires
    /// `η_x σ_x = η_y σ_y`.
    pub fn new(params: DeevParams, form: ClosedForm) -> Result<Self> {
        if form == ClosedForm::CoupledMode && !params.has_tied_weights() {
            return Err(Error::param(
                "closed_form",
                "coupled-mode form needs eta_x·sigma_x = eta_y·sigma_y",
            ));
        }
        let k = native_constant(&params, form);
        Ok(WignerModel {
            params,
            form,
            constant: WignerConstant {
                k,
                source: ConstantSource::Native,
            },
        })
    }

    pub fn with_constant(mut self, k: f64) -> Self {
        self.constant = WignerConstant {
            k,
            source: ConstantSource::Calibrated,
        };
        self
    }

    pub fn params(&self) -> &DeevParams {
        &self.params
    }

    pub fn form(&self) -> ClosedForm {
        self.form
    }

    pub fn constant(&self) -> WignerConstant {
        self.constant
    }

    pub fn native_constant(&self) -> f64 {
        native_constant(&self.params, self.form)
    }

    /// The closed form without its constant.
    pub fn shape(&self, pt: PhasePoint) -> f64 {
        let p = &self.params;
        match self.form {
            ClosedForm::Compact => {
                let c = scaled_coords(p, pt);
                let gauss = -(c.x1 * c.x1 + c.y1 * c.y1 + c.px1 * c.px1 + c.py1 * c.py1);
                let t = c.px2 + c.py2 - c.x2 - c.y2;
                let (sx, sy) = (p.sigma_x(), p.sigma_y());
                gauss.exp() * alp_eval(p.m(), -0.5, t * t / (sx * sx + sy * sy))
            }
            ClosedForm::CoupledMode => {
                let d = p.displacement();
                let (sx, sy) = (p.sigma_x(), p.sigma_y());
                let xi = (pt.x - d.x0) / sx;
                let chi = (pt.y - d.y0) / sy;
                let kx = sx * (pt.px - d.px0);
                let ky = sy * (pt.py - d.py0);
                let s = p.sign().value();
                let (a, b) = (xi + s * ky, kx - s * chi);
                let gauss = -(xi * xi + chi * chi + kx * kx + ky * ky);
                gauss.exp() * alp_eval(p.m(), 0.0, a * a + b * b)
            }
        }
    }

    pub fn eval(&self, pt: PhasePoint) -> f64 {
        self.constant.k * self.shape(pt)
    }

    /// Samples the model on a slice plane with the two remaining variables
    /// pinned at their displacement values.
    pub fn slice(&self, plane: SlicePlane, grid: &GridSpec) -> Result<Field2D> {
        let (a, b) = plane.axes();
        grid.expect_labels(a, b)?;
        let d = self.params.displacement();
        let values = grid.sample(|u, v| self.eval(plane.point(u, v, d)));
        let mut field = Field2D::new(*grid, values)?;
        self.params.annotate(&mut field);
        field.set_meta("quantity", "wigner");
        field.set_meta("plane", plane);
        field.set_meta("closed_form", self.form);
        field.set_meta("constant", self.constant.k);
        field.set_meta(
            "constant_source",
            match self.constant.source {
                ConstantSource::Native => "native",
                ConstantSource::Calibrated => "calibrated",
            },
        );
        Ok(field)
    }
}

fn native_constant(params: &DeevParams, form: ClosedForm) -> f64 {
    match form {
        ClosedForm::Compact => printed_constant(params.m(), params.sigma_x(), params.sigma_y()),
        ClosedForm::CoupledMode => {
            let pi2 = std::f64::consts::PI * std::f64::consts::PI;
            if params.m().is_multiple_of(2) {
                1.0 / pi2
            } else {
                -1.0 / pi2
            }
        }
    }
}

/// Compact closed form with its printed constant.
pub fn wigner4d(params: &DeevParams, x: f64, y: f64, px: f64, py: f64) -> f64 {
    WignerModel::new(*params, ClosedForm::Compact)
        .expect("compact form accepts any state")
        .eval(PhasePoint::new(x, y, px, py))
}

/// The six two-variable reductions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SlicePlane {
    XY,
    PxPy,
    XPx,
    YPy,
    XPy,
    YPx,
}

impl SlicePlane {
    pub const ALL: [SlicePlane; 6] = [
        SlicePlane::XY,
        SlicePlane::PxPy,
        SlicePlane::XPx,
        SlicePlane::YPy,
        SlicePlane::XPy,
        SlicePlane::YPx,
    ];

    pub fn axes(self) -> (AxisLabel, AxisLabel) {
        use AxisLabel::*;
        match self {
            SlicePlane::XY => (X, Y),
            SlicePlane::PxPy => (Px, Py),
            SlicePlane::XPx => (X, Px),
            SlicePlane::YPy => (Y, Py),
            SlicePlane::XPy => (X, Py),
            SlicePlane::YPx => (Y, Px),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SlicePlane::XY => "xy",
            SlicePlane::PxPy => "pxpy",
            SlicePlane::XPx => "xpx",
            SlicePlane::YPy => "ypy",
            SlicePlane::XPy => "xpy",
            SlicePlane::YPx => "ypx",
        }
    }

    /// Phase-space point for in-plane values `(a, b)`, other variables at the
    /// displacement.
    pub fn point(self, a: f64, b: f64, d: Displacement) -> PhasePoint {
        let mut pt = PhasePoint::center(d);
        for (label, v) in [(self.axes().0, a), (self.axes().1, b)] {
            match label {
                AxisLabel::X => pt.x = v,
                AxisLabel::Y => pt.y = v,
                AxisLabel::Px => pt.px = v,
                AxisLabel::Py => pt.py = v,
                AxisLabel::R | AxisLabel::S => unreachable!("slice planes use phase-space axes"),
            }
        }
        pt
    }
}

impl fmt::Display for SlicePlane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SlicePlane {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SlicePlane::ALL
            .into_iter()
            .find(|p| p.as_str() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Parse {
                what: "slice plane",
                reason: format!("expected one of xy, pxpy, xpx, ypy, xpy, ypx; got `{s}`"),
            })
    }
}

/// Compact-form slice with the printed constant.
pub fn wigner_slice(params: &DeevParams, plane: SlicePlane, grid: &GridSpec) -> Result<Field2D> {
    WignerModel::new(*params, ClosedForm::Compact)?.slice(plane, grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SitForm {
    /// ALP argument built from `(r + s)²`.
    #[default]
    Sum,
    /// ALP argument built from `(r − s)²`.
    Difference,
}

impl fmt::Display for SitForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SitForm::Sum => "sum",
            SitForm::Difference => "difference",
        })
    }
}

impl FromStr for SitForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sum" => Ok(SitForm::Sum),
            "difference" | "diff" => Ok(SitForm::Difference),
            other => Err(Error::Parse {
                what: "SIT form",
                reason: format!("expected `sum` or `difference`, got `{other}`"),
            }),
        }
    }
}

/// Monomial expansion of `L_m^{−1/2}((r ± s)² / (σx² + σy²))` split into
/// cross terms (both powers ≥ 1) and single-variable terms.
#[derive(Debug, Clone, PartialEq)]
pub struct SitExpansion {
    /// `a_k = c_k / (σx² + σy²)^k` for k = 1..=m; the constant term is dropped.
    scaled: Vec<f64>,
    /// `binomials[k-1][j] = binom(2k, j)`.
    binomials: Vec<Vec<f64>>,
}

impl SitExpansion {
    pub fn new(m: usize, sigma_x: f64, sigma_y: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::param("m", "SIT needs m >= 1; L_0 has no interference terms"));
        }
        for (name, s) in [("sigma_x", sigma_x), ("sigma_y", sigma_y)] {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::param(name, format!("width must be finite and > 0, got {s}")));
            }
        }
        let c = sigma_x * sigma_x + sigma_y * sigma_y;
        let coeffs = alp_coeffs(m, -0.5);
        let scaled = (1..=m)
            .map(|k| coeffs.coeffs()[k] / c.powi(k as i32))
            .collect();
        let binomials = (1..=m)
            .map(|k| (0..=2 * k).map(|j| binom_real((2 * k) as f64, j)).collect())
            .collect();
        Ok(SitExpansion { scaled, binomials })
    }

    /// `(cross, single)` sums at `(r, s)`.
    pub fn parts(&self, r: f64, s: f64, form: SitForm) -> (f64, f64) {
        let t = match form {
            SitForm::Sum => s,
            SitForm::Difference => -s,
        };
        let mut cross = 0.0;
        let mut single = 0.0;
        for (idx, (&a, binom)) in self.scaled.iter().zip(&self.binomials).enumerate() {
            let n = 2 * (idx + 1) as i32;
            single += a * (r.powi(n) + t.powi(n));
            let inner: f64 = (1..n)
                .map(|j| binom[j as usize] * r.powi(j) * t.powi(n - j))
                .sum();
            cross += a * inner;
        }
        (cross, single)
    }

    /// Cross terms over single-variable terms. A zero denominator gives
    /// `±∞` (sign of the numerator), or NaN when the numerator is zero too.
    pub fn eval(&self, r: f64, s: f64, form: SitForm) -> f64 {
        let (cross, single) = self.parts(r, s, form);
        if single == 0.0 {
            if cross == 0.0 {
                f64::NAN
            } else {
                f64::INFINITY.copysign(cross)
            }
        } else {
            cross / single
        }
    }
}

pub fn sit(m: usize, sigma_x: f64, sigma_y: f64, r: f64, s: f64, form: SitForm) -> Result<f64> {
    Ok(SitExpansion::new(m, sigma_x, sigma_y)?.eval(r, s, form))
}

/// SIT sampled on an `(r, s)` grid. Raw values keep IEEE infinities; the
/// render cap (given, or the 99th percentile of finite magnitudes, which
/// ignores the spikes along vanishing denominators) is stored as
/// `render_cap` metadata for clamped rendering.
pub fn sit_field(
    m: usize,
    sigma_x: f64,
    sigma_y: f64,
    grid: &GridSpec,
    form: SitForm,
    cap: Option<f64>,
) -> Result<Field2D> {
    grid.expect_labels(AxisLabel::R, AxisLabel::S)?;
    let exp = SitExpansion::new(m, sigma_x, sigma_y)?;
    let values = grid.sample(|r, s| exp.eval(r, s, form));
    let mut field = Field2D::new(*grid, values)?;
    let cap = match cap {
        Some(c) if c.is_finite() && c > 0.0 => c,
        Some(c) => return Err(Error::param("clamp", format!("render cap must be > 0, got {c}"))),
        None => magnitude_quantile(field.values(), 0.99)
            .filter(|c| *c > 0.0)
            .unwrap_or(1.0),
    };
    field.set_meta("quantity", "sit");
    field.set_meta("m", m);
    field.set_meta("sigma_x", sigma_x);
    field.set_meta("sigma_y", sigma_y);
    field.set_meta("form", form);
    field.set_meta("render_cap", cap);
    Ok(field)
}

/// `q`-quantile of the finite magnitudes, by nearest rank.
fn magnitude_quantile(values: &[f64], q: f64) -> Option<f64> {
    let mut mags: Vec<f64> = values.iter().filter(|v| v.is_finite()).map(|v| v.abs()).collect();
    if mags.is_empty() {
        return None;
    }
    mags.sort_by(f64::total_cmp);
    let rank = ((q * mags.len() as f64).ceil() as usize).clamp(1, mags.len());
    Some(mags[rank - 1])
}
