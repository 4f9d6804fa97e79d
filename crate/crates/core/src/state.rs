//! Displaced elliptical–elliptical vortex (DEEV) states in position space.
//!
//! The state is a vortex factor `[η_x (x − x0) ± i η_y (y − y0)]^m` on an
//! elliptical Gaussian with widths `σ_i = exp(2ζ_i)`, carrying the plane-wave
//! phase `exp(i(px0 (x − x0) + py0 (y − y0)))` of the momentum displacement.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{AxisLabel, Field2D, GridSpec};
use crate::special::{binom_real, gamma_half_integer};

/// The relative `±i` between the two vortex generator terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VortexSign {
    #[default]
    Plus,
    Minus,
}

impl VortexSign {
    pub fn value(self) -> f64 {
        match self {
            VortexSign::Plus => 1.0,
            VortexSign::Minus => -1.0,
        }
    }
}

impl fmt::Display for VortexSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VortexSign::Plus => "+",
            VortexSign::Minus => "-",
        })
    }
}

impl FromStr for VortexSign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "plus" | "+1" => Ok(VortexSign::Plus),
            "-" | "minus" | "-1" => Ok(VortexSign::Minus),
            other => Err(Error::Parse {
                what: "vortex sign",
                reason: format!("expected + or -, got `{other}`"),
            }),
        }
    }
}

/// Phase-space displacement: `x0 = Re α_x`, `px0 = Im α_x`, and likewise for y.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Displacement {
    pub x0: f64,
    pub y0: f64,
    pub px0: f64,
    pub py0: f64,
}

impl Displacement {
    pub fn new(x0: f64, y0: f64, px0: f64, py0: f64) -> Self {
        Displacement { x0, y0, px0, py0 }
    }

    fn is_finite(&self) -> bool {
        [self.x0, self.y0, self.px0, self.py0].iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeevParams {
    m: usize,
    eta_x: f64,
    eta_y: f64,
    sign: VortexSign,
    zeta_x: f64,
    zeta_y: f64,
    sigma_x: f64,
    sigma_y: f64,
    displacement: Displacement,
    norm: f64,
}

impl DeevParams {
    /// State with squeezing `ζ_x, ζ_y` and the tied weights `η_i = 1/(√2 σ_i)`.
    pub fn new(m: usize, zeta_x: f64, zeta_y: f64) -> Result<Self> {
        if !(zeta_x.is_finite() && zeta_y.is_finite()) {
            return Err(Error::param("zeta", "squeezing parameters must be finite"));
        }
        let mut p = DeevParams {
            m,
            eta_x: 0.0,
            eta_y: 0.0,
            sign: VortexSign::Plus,
            zeta_x,
            zeta_y,
            sigma_x: (2.0 * zeta_x).exp(),
            sigma_y: (2.0 * zeta_y).exp(),
            displacement: Displacement::default(),
            norm: 0.0,
        };
        let (ex, ey) = p.tied_weights();
        p.eta_x = ex;
        p.eta_y = ey;
        p.refresh()
    }

    /// Same as [`DeevParams::new`] with the widths given directly.
    pub fn from_sigmas(m: usize, sigma_x: f64, sigma_y: f64) -> Result<Self> {
        for (name, s) in [("sigma_x", sigma_x), ("sigma_y", sigma_y)] {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::param(name, format!("width must be finite and > 0, got {s}")));
            }
        }
        let mut p = Self::new(m, 0.5 * sigma_x.ln(), 0.5 * sigma_y.ln())?;
        // keep the given widths exact rather than round-tripping through ln/exp
        p.sigma_x = sigma_x;
        p.sigma_y = sigma_y;
        let (ex, ey) = p.tied_weights();
        p.eta_x = ex;
        p.eta_y = ey;
        p.refresh()
    }

    /// Overrides the vortex generator weights.
    pub fn with_weights(mut self, eta_x: f64, eta_y: f64) -> Result<Self> {
        if !(eta_x.is_finite() && eta_y.is_finite()) {
            return Err(Error::param("eta", "weights must be finite"));
        }
        if eta_x * eta_x + eta_y * eta_y <= 0.0 {
            return Err(Error::param("eta", "eta_x² + eta_y² must be > 0"));
        }
        self.eta_x = eta_x;
        self.eta_y = eta_y;
        self.refresh()
    }

    pub fn with_sign(mut self, sign: VortexSign) -> Self {
        self.sign = sign;
        self
    }

    pub fn with_displacement(mut self, d: Displacement) -> Result<Self> {
        if !d.is_finite() {
            return Err(Error::param("displacement", "must be finite"));
        }
        self.displacement = d;
        Ok(self)
    }

    /// Exchanges the x and y widths and weights; the displacement is kept.
    pub fn with_swapped_widths(self) -> Self {
        DeevParams {
            eta_x: self.eta_y,
            eta_y: self.eta_x,
            zeta_x: self.zeta_y,
            zeta_y: self.zeta_x,
            sigma_x: self.sigma_y,
            sigma_y: self.sigma_x,
            ..self
        }
    }

    fn refresh(mut self) -> Result<Self> {
        let s = self.unnormalized_norm_sq();
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::param(
                "state",
                format!("norm integral is {s:e}; parameters out of representable range"),
            ));
        }
        self.norm = s.sqrt().recip();
        Ok(self)
    }

    /// `∫∫ (η_x² x² + η_y² y²)^m exp(−x²/σ_x² − y²/σ_y²) dx dy`, summed
    /// binomially over one-dimensional Gaussian moments
    /// `∫ x^{2k} e^{−x²/σ²} dx = Γ(k + ½) σ^{2k+1}`.
    fn unnormalized_norm_sq(&self) -> f64 {
        let (sx, sy) = (self.sigma_x(), self.sigma_y());
        let m = self.m;
        (0..=m)
            .map(|k| {
                let l = m - k;
                binom_real(m as f64, k)
                    * (self.eta_x * self.eta_x * sx * sx).powi(k as i32)
                    * (self.eta_y * self.eta_y * sy * sy).powi(l as i32)
                    * gamma_half_integer(k)
                    * gamma_half_integer(l)
                    * sx
                    * sy
            })
            .sum()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn eta_x(&self) -> f64 {
        self.eta_x
    }

    pub fn eta_y(&self) -> f64 {
        self.eta_y
    }

    pub fn sign(&self) -> VortexSign {
        self.sign
    }

    pub fn zeta_x(&self) -> f64 {
        self.zeta_x
    }

    pub fn zeta_y(&self) -> f64 {
        self.zeta_y
    }

    /// σ_x = exp(2ζ_x)
    pub fn sigma_x(&self) -> f64 {
        self.sigma_x
    }

    /// σ_y = exp(2ζ_y)
    pub fn sigma_y(&self) -> f64 {
        self.sigma_y
    }

    pub fn displacement(&self) -> Displacement {
        self.displacement
    }

    /// `(1/(√2 σ_x), 1/(√2 σ_y))`
    pub fn tied_weights(&self) -> (f64, f64) {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        (r / self.sigma_x(), r / self.sigma_y())
    }

    /// Whether `η_x σ_x = η_y σ_y`, i.e. the weights are the tied ones up to
    /// an overall scale (which the normalization absorbs).
    pub fn has_tied_weights(&self) -> bool {
        let a = self.eta_x * self.sigma_x();
        let b = self.eta_y * self.sigma_y();
        (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
    }

    /// Normalization constant making `∫∫ |ψ|² = 1`.
    pub fn normalization(&self) -> f64 {
        self.norm
    }

    /// The closed-form prefactor `2^{m−2} / √(σ_x σ_y Γ(m+½) √π)`.
    pub fn printed_normalization(&self) -> f64 {
        let m = self.m as i32;
        2f64.powi(m - 2)
            / (self.sigma_x() * self.sigma_y() * gamma_half_integer(self.m) * std::f64::consts::PI.sqrt())
                .sqrt()
    }

    fn vortex_factor(&self, dx: f64, dy: f64) -> Complex64 {
        Complex64::new(self.eta_x * dx, self.sign.value() * self.eta_y * dy).powu(self.m as u32)
    }

    fn gaussian(&self, dx: f64, dy: f64) -> f64 {
        let (ux, uy) = (dx / self.sigma_x(), dy / self.sigma_y());
        (-0.5 * (ux * ux + uy * uy)).exp()
    }

    /// Normalized wavefunction ψ(x, y).
    pub fn psi(&self, x: f64, y: f64) -> Complex64 {
        let d = &self.displacement;
        let (dx, dy) = (x - d.x0, y - d.y0);
        let phase = Complex64::from_polar(1.0, d.px0 * dx + d.py0 * dy);
        self.vortex_factor(dx, dy) * phase * (self.norm * self.gaussian(dx, dy))
    }

    /// |ψ(x, y)|²
    pub fn intensity(&self, x: f64, y: f64) -> f64 {
        let d = &self.displacement;
        let (dx, dy) = (x - d.x0, y - d.y0);
        let (a, b) = (self.eta_x * dx, self.eta_y * dy);
        let g = self.gaussian(dx, dy);
        self.norm * self.norm * (a * a + b * b).powi(self.m as i32) * g * g
    }

    /// Writes the state parameters into a field's metadata.
    pub fn annotate(&self, field: &mut Field2D) {
        let d = self.displacement;
        field.set_meta("m", self.m);
        field.set_meta("sigma_x", self.sigma_x());
        field.set_meta("sigma_y", self.sigma_y());
        field.set_meta("eta_x", self.eta_x);
        field.set_meta("eta_y", self.eta_y);
        field.set_meta("sign", self.sign);
        field.set_meta("x0", d.x0);
        field.set_meta("y0", d.y0);
        field.set_meta("px0", d.px0);
        field.set_meta("py0", d.py0);
    }
}

/// Samples |ψ|² over an `(x, y)` grid.
pub fn intensity_field(params: &DeevParams, grid: &GridSpec) -> Result<Field2D> {
    grid.expect_labels(AxisLabel::X, AxisLabel::Y)?;
    let values = grid.sample(|x, y| params.intensity(x, y));
    let mut field = Field2D::new(*grid, values)?;
    params.annotate(&mut field);
    field.set_meta("quantity", "intensity");
    Ok(field)
}

/// Expansion of the vortex factor over circular vortices
/// `u^k v^{m−k}` with `u = x' + i y'`, `v = x' − i y'`.
#[derive(Debug, Clone, PartialEq)]
pub struct VortexDecomposition {
    coefficients: Vec<f64>,
}

impl VortexDecomposition {
    /// `c_k`, the weight of `u^k v^{m−k}`.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn m(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// `Σ_k c_k u^k v^{m−k}` at the displaced coordinates `(dx, dy)`.
    pub fn evaluate(&self, dx: f64, dy: f64) -> Complex64 {
        let u = Complex64::new(dx, dy);
        let v = u.conj();
        let m = self.m() as u32;
        self.coefficients
            .iter()
            .enumerate()
            .map(|(k, &c)| u.powu(k as u32) * v.powu(m - k as u32) * c)
            .sum()
    }
}

/// `η_x x' ± i η_y y' = u (η_x ± η_y)/2 + v (η_x ∓ η_y)/2`, expanded binomially.
pub fn circular_decomposition(params: &DeevParams) -> VortexDecomposition {
    let s = params.sign.value();
    let cu = 0.5 * (params.eta_x + s * params.eta_y);
    let cv = 0.5 * (params.eta_x - s * params.eta_y);
    let m = params.m;
    let coefficients = (0..=m)
        .map(|k| binom_real(m as f64, k) * cu.powi(k as i32) * cv.powi((m - k) as i32))
        .collect();
    VortexDecomposition { coefficients }
}
