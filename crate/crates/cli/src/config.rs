//! Run configuration files (TOML).
//!
//! ```toml
//! m = 3
//! sigma_x = 5.0          # or zeta_x (σ = e^{2ζ})
//! sigma_y = 3.0
//! x0 = 2.0
//! y0 = 4.0
//! closed_form = "compact"
//!
//! [grid.intensity]
//! x = { min = -15.0, max = 19.0, count = 201 }
//! y = { min = -11.0, max = 19.0, count = 201 }
//! ```
//!
//! Unknown keys anywhere are rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use qvortex_core::coupling::{bs_coupler, dcdc_coupler, DcdcParams, ModeCoupler};
use qvortex_core::grid::{Axis, AxisLabel, GridSpec};
use qvortex_core::io::Clamp;
use qvortex_core::oracle::QuadratureSpec;
use qvortex_core::state::{DeevParams, Displacement, VortexSign};
use qvortex_core::wigner::{ClosedForm, SitForm, SlicePlane};
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub m: usize,
    pub sigma_x: Option<f64>,
    pub sigma_y: Option<f64>,
    pub zeta_x: Option<f64>,
    pub zeta_y: Option<f64>,
    pub eta_x: Option<f64>,
    pub eta_y: Option<f64>,
    #[serde(default)]
    pub sign: Option<String>,
    #[serde(default)]
    pub x0: f64,
    #[serde(default)]
    pub y0: f64,
    #[serde(default)]
    pub px0: f64,
    #[serde(default)]
    pub py0: f64,
    #[serde(default)]
    pub closed_form: Option<String>,
    /// `native` or `calibrated`.
    #[serde(default)]
    pub constant: Option<String>,
    #[serde(default)]
    pub sit_form: Option<String>,
    /// Vorticities swept by `sit` when `--m` is absent.
    #[serde(default)]
    pub sit_m: Option<Vec<usize>>,
    /// `auto` or a positive number.
    #[serde(default)]
    pub clamp: Option<ClampValue>,
    pub coupler: Option<CouplerBlock>,
    #[serde(default)]
    pub grid: BTreeMap<String, GridBlock>,
    #[serde(default)]
    pub quadrature: Option<QuadratureBlock>,
    #[serde(default)]
    pub verify: Option<VerifyBlock>,
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ClampValue {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum CouplerBlock {
    Bs {
        theta: f64,
        #[serde(default)]
        phi: f64,
    },
    Dcdc { g: f64, delta: f64, t: f64 },
}

impl CouplerBlock {
    pub fn coupler(&self) -> Result<ModeCoupler> {
        Ok(match *self {
            CouplerBlock::Bs { theta, phi } => bs_coupler(theta, phi),
            CouplerBlock::Dcdc { g, delta, t } => dcdc_coupler(&DcdcParams::new(g, delta, t)?),
        })
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisBlock {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub x: Option<AxisBlock>,
    pub y: Option<AxisBlock>,
    pub px: Option<AxisBlock>,
    pub py: Option<AxisBlock>,
    pub r: Option<AxisBlock>,
    pub s: Option<AxisBlock>,
}

impl GridBlock {
    fn get(&self, label: AxisLabel) -> Option<AxisBlock> {
        match label {
            AxisLabel::X => self.x,
            AxisLabel::Y => self.y,
            AxisLabel::Px => self.px,
            AxisLabel::Py => self.py,
            AxisLabel::R => self.r,
            AxisLabel::S => self.s,
        }
    }

    fn to_spec(&self, name: &str, a: AxisLabel, b: AxisLabel) -> Result<GridSpec> {
        let all = [AxisLabel::X, AxisLabel::Y, AxisLabel::Px, AxisLabel::Py, AxisLabel::R, AxisLabel::S];
        for label in all {
            if label != a && label != b && self.get(label).is_some() {
                bail!("grid.{name}: axis `{label}` does not belong to this grid (expected {a}, {b})");
            }
        }
        let axis = |label: AxisLabel| -> Result<Axis> {
            let blk = self
                .get(label)
                .ok_or_else(|| anyhow!("grid.{name}: missing axis `{label}`"))?;
            Ok(Axis::new(label, blk.min, blk.max, blk.count)?)
        };
        Ok(GridSpec::new(axis(a)?, axis(b)?)?)
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureBlock {
    pub abs_tol: Option<f64>,
    pub rel_tol: Option<f64>,
    pub max_subdivisions: Option<usize>,
    pub truncation_radius: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyBlock {
    /// Probe points used for the closed-form comparison.
    pub probes: Option<usize>,
    /// Positions at which the marginal is checked.
    pub marginal_points: Option<usize>,
}

const GRID_NAMES: [&str; 8] = ["intensity", "xy", "pxpy", "xpx", "ypy", "xpy", "ypx", "sit"];
const DEFAULT_COUNT: usize = 201;

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).context("malformed config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    /// Checks everything that does not need computation, so later failures
    /// are never configuration errors.
    pub fn validate(&self) -> Result<()> {
        for name in self.grid.keys() {
            if !GRID_NAMES.contains(&name.as_str()) {
                bail!("unknown grid `{name}`; expected one of {}", GRID_NAMES.join(", "));
            }
        }
        self.params()?;
        self.closed_form()?;
        self.use_calibrated()?;
        self.sit_form()?;
        self.clamp()?;
        self.quadrature()?;
        self.intensity_grid()?;
        for plane in SlicePlane::ALL {
            self.plane_grid(plane)?;
        }
        self.sit_grid()?;
        if let Some(ms) = &self.sit_m {
            for &m in ms {
                check_sit_m(m)?;
            }
        }
        Ok(())
    }

    pub fn params(&self) -> Result<DeevParams> {
        let width = |sigma: Option<f64>, zeta: Option<f64>, axis: &str| -> Result<f64> {
            match (sigma, zeta) {
                (Some(s), None) => Ok(s),
                (None, Some(z)) => Ok((2.0 * z).exp()),
                (Some(_), Some(_)) => bail!("give either sigma_{axis} or zeta_{axis}, not both"),
                (None, None) => bail!("missing sigma_{axis} (or zeta_{axis})"),
            }
        };
        let sx = width(self.sigma_x, self.zeta_x, "x")?;
        let sy = width(self.sigma_y, self.zeta_y, "y")?;
        let mut p = match (self.zeta_x, self.zeta_y) {
            (Some(zx), Some(zy)) => DeevParams::new(self.m, zx, zy)?,
            _ => DeevParams::from_sigmas(self.m, sx, sy)?,
        };
        match (self.eta_x, self.eta_y, &self.coupler) {
            (Some(_), Some(_), Some(_)) => bail!("give either eta_x/eta_y or [coupler], not both"),
            (Some(ex), Some(ey), None) => p = p.with_weights(ex, ey)?,
            (None, None, Some(c)) => {
                let (ex, ey) = c.coupler()?.ellipticity();
                p = p.with_weights(ex, ey)?;
            }
            (None, None, None) => {}
            _ => bail!("eta_x and eta_y must be given together"),
        }
        if let Some(s) = &self.sign {
            p = p.with_sign(s.parse::<VortexSign>()?);
        }
        Ok(p.with_displacement(Displacement::new(self.x0, self.y0, self.px0, self.py0))?)
    }

    pub fn closed_form(&self) -> Result<ClosedForm> {
        Ok(match &self.closed_form {
            Some(s) => s.parse()?,
            None => ClosedForm::Compact,
        })
    }

    pub fn use_calibrated(&self) -> Result<bool> {
        match self.constant.as_deref() {
            None | Some("native") => Ok(false),
            Some("calibrated") => Ok(true),
            Some(other) => bail!("constant must be `native` or `calibrated`, got `{other}`"),
        }
    }

    pub fn sit_form(&self) -> Result<SitForm> {
        Ok(match &self.sit_form {
            Some(s) => s.parse()?,
            None => SitForm::Sum,
        })
    }

    pub fn clamp(&self) -> Result<Clamp> {
        Ok(match &self.clamp {
            None => Clamp::Auto,
            Some(ClampValue::Number(c)) => c.to_string().parse()?,
            Some(ClampValue::Text(t)) => t.parse()?,
        })
    }

    pub fn quadrature(&self) -> Result<QuadratureSpec> {
        let mut q = QuadratureSpec::default();
        if let Some(b) = self.quadrature {
            q.abs_tol = b.abs_tol.unwrap_or(q.abs_tol);
            q.rel_tol = b.rel_tol.unwrap_or(q.rel_tol);
            q.max_subdivisions = b.max_subdivisions.unwrap_or(q.max_subdivisions);
            q.truncation_radius = b.truncation_radius.unwrap_or(q.truncation_radius);
        }
        q.validate()?;
        Ok(q)
    }

    pub fn verify_probes(&self) -> usize {
        self.verify.and_then(|v| v.probes).unwrap_or(8).max(5)
    }

    pub fn marginal_points(&self) -> usize {
        self.verify.and_then(|v| v.marginal_points).unwrap_or(6).max(1)
    }

    pub fn sit_ms(&self) -> Vec<usize> {
        self.sit_m.clone().unwrap_or_else(|| vec![1, 2, 3, 4])
    }

    fn configured(&self, name: &str, a: AxisLabel, b: AxisLabel) -> Result<Option<GridSpec>> {
        self.grid
            .get(name)
            .map(|blk| blk.to_spec(name, a, b))
            .transpose()
    }

    pub fn intensity_grid(&self) -> Result<GridSpec> {
        match self.configured("intensity", AxisLabel::X, AxisLabel::Y)? {
            Some(g) => Ok(g),
            None => {
                let p = self.params()?;
                Ok(GridSpec::new(
                    default_axis(&p, AxisLabel::X)?,
                    default_axis(&p, AxisLabel::Y)?,
                )?)
            }
        }
    }

    pub fn plane_grid(&self, plane: SlicePlane) -> Result<GridSpec> {
        let (a, b) = plane.axes();
        match self.configured(plane.as_str(), a, b)? {
            Some(g) => Ok(g),
            None => {
                let p = self.params()?;
                Ok(GridSpec::new(default_axis(&p, a)?, default_axis(&p, b)?)?)
            }
        }
    }

    pub fn sit_grid(&self) -> Result<GridSpec> {
        match self.configured("sit", AxisLabel::R, AxisLabel::S)? {
            Some(g) => Ok(g),
            None => Ok(GridSpec::new(
                Axis::new(AxisLabel::R, -3.0, 3.0, DEFAULT_COUNT)?,
                Axis::new(AxisLabel::S, -3.0, 3.0, DEFAULT_COUNT)?,
            )?),
        }
    }
}

pub fn check_sit_m(m: usize) -> Result<()> {
    if m == 0 {
        bail!("SIT needs m >= 1 (m = 0 has no interference terms)");
    }
    Ok(())
}

/// Centered on the displacement, half-width `(√m + 3.5)` widths: `σ` for
/// positions and `√2/σ` for momenta.
fn default_axis(p: &DeevParams, label: AxisLabel) -> Result<Axis> {
    let d = p.displacement();
    let h = (p.m() as f64).sqrt() + 3.5;
    let sq2 = std::f64::consts::SQRT_2;
    let (center, half) = match label {
        AxisLabel::X => (d.x0, h * p.sigma_x()),
        AxisLabel::Y => (d.y0, h * p.sigma_y()),
        AxisLabel::Px => (d.px0, h * sq2 / p.sigma_x()),
        AxisLabel::Py => (d.py0, h * sq2 / p.sigma_y()),
        AxisLabel::R | AxisLabel::S => (0.0, 3.0),
    };
    Ok(Axis::new(label, center - half, center + half, DEFAULT_COUNT)?)
}
