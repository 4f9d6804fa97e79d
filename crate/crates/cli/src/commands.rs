//! The five subcommands, callable without a process boundary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use qvortex_core::coupling::{bs_coupler, dcdc_coupler, dcdc_time_for_ratio, DcdcParams, ModeCoupler};
use qvortex_core::grid::{Axis, Field2D, GridSpec};
use qvortex_core::io::{write_atomic, write_csv, write_pgm, Clamp};
use qvortex_core::oracle::{adjudicate, calibrate_constant, oracle_marginal_xy, CalibrationError};
use qvortex_core::quad::{integrate, QuadOptions};
use qvortex_core::report::{write_report, Verdict};
use qvortex_core::state::{intensity_field, DeevParams};
use qvortex_core::wigner::{sit_field, ClosedForm, SlicePlane, WignerModel};
use qvortex_core::Error as CoreError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{check_sit_m, RunConfig};

#[derive(Debug)]
pub enum CmdError {
    /// Bad configuration or arguments; exit code 2.
    Config(anyhow::Error),
    /// The closed form differs from the oracle in shape; exit code 1.
    ShapeMismatch { report: PathBuf },
    /// A verification suite failed; exit code 1.
    Suites { failed: Vec<String>, report: Option<PathBuf> },
    /// Anything else (I/O, quadrature failure); exit code 1.
    Runtime(anyhow::Error),
}

impl CmdError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Config(_) => 2,
            _ => 1,
        }
    }
}

impl std::fmt::Display for CmdError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CmdError::Config(e) => write!(f, "configuration error: {e:#}"),
            CmdError::ShapeMismatch { report } => write!(
                f,
                "closed form and numerical transform differ in shape; report: {}",
                report.display()
            ),
            CmdError::Suites { failed, report } => {
                write!(f, "verification failed: {}", failed.join(", "))?;
                if let Some(r) = report {
                    write!(f, "; report: {}", r.display())?;
                }
                Ok(())
            }
            CmdError::Runtime(e) => write!(f, "{e:#}"),
        }
    }
}

impl std::error::Error for CmdError {}

pub type CmdResult<T> = std::result::Result<T, CmdError>;

fn config_err(e: impl Into<anyhow::Error>) -> CmdError {
    CmdError::Config(e.into())
}

fn runtime(e: impl Into<anyhow::Error>) -> CmdError {
    CmdError::Runtime(e.into())
}

fn prepare_out(out: &Path) -> CmdResult<()> {
    std::fs::create_dir_all(out)
        .with_context(|| format!("cannot create output directory {}", out.display()))
        .map_err(runtime)
}

fn write_pair(field: &Field2D, out: &Path, stem: &str, clamp: Clamp) -> CmdResult<Vec<PathBuf>> {
    let csv = out.join(format!("{stem}.csv"));
    let pgm = out.join(format!("{stem}.pgm"));
    write_csv(field, &csv).map_err(runtime)?;
    write_pgm(field, &pgm, clamp).map_err(runtime)?;
    Ok(vec![csv, pgm])
}

/// `intensity.csv` and `intensity.pgm`.
pub fn cmd_field(cfg: &RunConfig, out: &Path, clamp: Clamp) -> CmdResult<Vec<PathBuf>> {
    let params = cfg.params().map_err(config_err)?;
    let grid = cfg.intensity_grid().map_err(config_err)?;
    prepare_out(out)?;
    let field = intensity_field(&params, &grid).map_err(runtime)?;
    write_pair(&field, out, "intensity", clamp)
}

fn model(cfg: &RunConfig) -> CmdResult<WignerModel> {
    let params = cfg.params().map_err(config_err)?;
    let form = cfg.closed_form().map_err(config_err)?;
    WignerModel::new(params, form).map_err(config_err)
}

/// `wigner_<plane>.csv` and `.pgm` for each requested plane.
pub fn cmd_wigner(cfg: &RunConfig, planes: &[SlicePlane], out: &Path, clamp: Clamp) -> CmdResult<Vec<PathBuf>> {
    let mut model = model(cfg)?;
    let grids = planes
        .iter()
        .map(|&p| cfg.plane_grid(p).map(|g| (p, g)))
        .collect::<anyhow::Result<Vec<_>>>()
        .map_err(config_err)?;
    prepare_out(out)?;
    if cfg.use_calibrated().map_err(config_err)? {
        let q = cfg.quadrature().map_err(config_err)?;
        match calibrate_constant(&model, &q) {
            Ok(k) => model = model.with_constant(k),
            Err(CalibrationError::ShapeMismatch(report)) => {
                let path = out.join("report.txt");
                write_report(&report, &path).map_err(runtime)?;
                return Err(CmdError::ShapeMismatch { report: path });
            }
            Err(CalibrationError::Oracle(e)) => return Err(runtime(e)),
        }
    }
    let mut files = Vec::new();
    for (plane, grid) in grids {
        let field = model.slice(plane, &grid).map_err(runtime)?;
        files.extend(write_pair(&field, out, &format!("wigner_{plane}"), clamp)?);
    }
    Ok(files)
}

/// `sit_m<k>.csv` and `.pgm` for each vorticity. With `Clamp::Auto` the
/// render range is `±render_cap`.
pub fn cmd_sit(cfg: &RunConfig, ms: &[usize], out: &Path, clamp: Clamp) -> CmdResult<Vec<PathBuf>> {
    let params = cfg.params().map_err(config_err)?;
    let grid = cfg.sit_grid().map_err(config_err)?;
    let form = cfg.sit_form().map_err(config_err)?;
    for &m in ms {
        check_sit_m(m).map_err(config_err)?;
    }
    prepare_out(out)?;
    let cap = match clamp {
        Clamp::Fixed(c) => Some(c),
        Clamp::Auto => None,
    };
    let mut files = Vec::new();
    for &m in ms {
        let field = sit_field(m, params.sigma_x(), params.sigma_y(), &grid, form, cap).map_err(runtime)?;
        let render_cap: f64 = field.metadata()["render_cap"].parse().map_err(runtime)?;
        files.extend(write_pair(&field, out, &format!("sit_m{m}"), Clamp::Fixed(render_cap))?);
    }
    Ok(files)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct VerifyOutcome {
    pub suites: Vec<SuiteResult>,
    pub verdict: Verdict,
    pub report: PathBuf,
    pub summary: PathBuf,
}

/// Normalization, marginal, oracle-equivalence, σ-swap and minima-count
/// suites. Writes `report.txt` (the closed-form comparison) and
/// `verify.txt` (one line per suite). Errors only when the run itself
/// cannot complete; see [`VerifyOutcome::status`] for the pass/fail result.
pub fn cmd_verify(cfg: &RunConfig, out: &Path) -> CmdResult<VerifyOutcome> {
    let model = model(cfg)?;
    let params = *model.params();
    let q = cfg.quadrature().map_err(config_err)?;
    let xpx = cfg.plane_grid(SlicePlane::XPx).map_err(config_err)?;
    let ypx = cfg.plane_grid(SlicePlane::YPx).map_err(config_err)?;
    let xy = cfg.plane_grid(SlicePlane::XY).map_err(config_err)?;
    prepare_out(out)?;

    let mut suites = vec![
        normalization_suite(&params),
        marginal_suite(&params, &q, cfg.marginal_points()).map_err(runtime)?,
    ];

    let report = adjudicate(&model, &q, cfg.verify_probes()).map_err(runtime)?;
    let report_path = out.join("report.txt");
    write_report(&report, &report_path).map_err(runtime)?;
    suites.push(SuiteResult {
        name: "oracle-equivalence",
        passed: report.verdict != Verdict::ShapeMismatch,
        detail: format!(
            "{} form: verdict {}, max deviation {:.3e}, native constant {:.6e}, calibrated {:.6e}",
            model.form(),
            report.verdict,
            report.max_deviation,
            report.native_constant,
            report.calibrated_constant
        ),
    });
    suites.push(swap_suite(&model, &xy).map_err(runtime)?);
    suites.push(minima_suite(&params, &xpx, &ypx).map_err(runtime)?);

    let mut text = String::new();
    for s in &suites {
        let _ = writeln!(text, "{} {}: {}", if s.passed { "PASS" } else { "FAIL" }, s.name, s.detail);
    }
    let _ = writeln!(text, "verdict={}", report.verdict);
    let summary = out.join("verify.txt");
    write_atomic(&summary, text.as_bytes()).map_err(runtime)?;

    Ok(VerifyOutcome {
        suites,
        verdict: report.verdict,
        report: report_path,
        summary,
    })
}

impl VerifyOutcome {
    /// `Ok` when every suite passed and the verdict is not `shape-mismatch`.
    pub fn status(&self) -> CmdResult<()> {
        if self.verdict == Verdict::ShapeMismatch {
            return Err(CmdError::ShapeMismatch {
                report: self.report.clone(),
            });
        }
        let failed: Vec<String> = self
            .suites
            .iter()
            .filter(|s| !s.passed)
            .map(|s| s.name.to_string())
            .collect();
        if !failed.is_empty() {
            return Err(CmdError::Suites {
                failed,
                report: Some(self.report.clone()),
            });
        }
        Ok(())
    }
}

pub fn norm_integral(params: &DeevParams) -> Result<f64, CoreError> {
    let d = params.displacement();
    let (hx, hy) = (10.0 * params.sigma_x(), 10.0 * params.sigma_y());
    let opts = QuadOptions {
        abs_tol: 1e-12,
        rel_tol: 1e-11,
        max_subdivisions: 2000,
        initial_pieces: 8,
    };
    let mut failure = None;
    let outer = integrate(
        |x| match integrate(|y| params.intensity(x, y), d.y0 - hy, d.y0 + hy, &opts) {
            Ok(r) => r.value,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        d.x0 - hx,
        d.x0 + hx,
        &opts,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(outer?.value)
}

fn normalization_suite(params: &DeevParams) -> SuiteResult {
    match norm_integral(params) {
        Ok(v) => SuiteResult {
            name: "normalization",
            passed: (v - 1.0).abs() <= 1e-8,
            detail: format!("integral of |psi|^2 = {v:.12}"),
        },
        Err(e) => SuiteResult {
            name: "normalization",
            passed: false,
            detail: format!("quadrature failed: {e}"),
        },
    }
}

fn marginal_suite(params: &DeevParams, q: &qvortex_core::QuadratureSpec, n: usize) -> anyhow::Result<SuiteResult> {
    let d = params.displacement();
    let mut rng = ChaCha8Rng::seed_from_u64(0x4d41);
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let x = d.x0 + rng.gen_range(-2.5..2.5) * params.sigma_x();
        let y = d.y0 + rng.gen_range(-2.5..2.5) * params.sigma_y();
        worst = worst.max(oracle_marginal_xy(params, x, y, q)?.discrepancy());
    }
    Ok(SuiteResult {
        name: "marginal",
        passed: worst <= 1e-5,
        detail: format!("max |integral of W over p - |psi|^2| = {worst:.3e} at {n} points"),
    })
}

/// Swapping the widths transposes the XY slice (checked on a 41×41
/// subsampling of the configured grid).
fn swap_suite(model: &WignerModel, xy: &GridSpec) -> anyhow::Result<SuiteResult> {
    let params = *model.params();
    let half = 0.5 * (xy.axis1.max - xy.axis1.min).max(xy.axis2.max - xy.axis2.min);
    let d = params.displacement();
    let g = GridSpec::new(
        Axis::new(xy.axis1.label, d.x0 - half, d.x0 + half, 41)?,
        Axis::new(xy.axis2.label, d.y0 - half, d.y0 + half, 41)?,
    )?;
    let swapped_params = params
        .with_swapped_widths()
        .with_displacement(qvortex_core::Displacement::new(d.y0, d.x0, d.py0, d.px0))?;
    let swapped = WignerModel::new(swapped_params, model.form())?;
    let g_swapped = GridSpec::new(
        Axis::new(xy.axis1.label, d.y0 - half, d.y0 + half, 41)?,
        Axis::new(xy.axis2.label, d.x0 - half, d.x0 + half, 41)?,
    )?;
    let a = model.slice(SlicePlane::XY, &g)?.transpose();
    let b = swapped.slice(SlicePlane::XY, &g_swapped)?;
    let worst = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(u, v)| (u - v).abs() / u.abs().max(1e-300))
        .filter(|r| r.is_finite())
        .fold(0.0, f64::max);
    Ok(SuiteResult {
        name: "sigma-swap",
        passed: worst <= 1e-10,
        detail: format!("max relative transpose defect {worst:.3e}"),
    })
}

/// Strict local minima of the compact-form XPX and YPX slices equal m.
fn minima_suite(params: &DeevParams, xpx: &GridSpec, ypx: &GridSpec) -> anyhow::Result<SuiteResult> {
    let compact = WignerModel::new(*params, ClosedForm::Compact)?;
    let nx = compact.slice(SlicePlane::XPx, xpx)?.strict_local_minima(1e-12).len();
    let ny = compact.slice(SlicePlane::YPx, ypx)?.strict_local_minima(1e-12).len();
    let m = params.m();
    Ok(SuiteResult {
        name: "minima-count",
        passed: nx == m && ny == m,
        detail: format!("compact form: {nx} minima in xpx, {ny} in ypx, m = {m}"),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CouplerRequest {
    Bs { theta: f64, phi: f64 },
    Dcdc { g: f64, delta: f64, t: f64 },
    Ratio { ratio: f64, g: f64, delta: f64 },
}

fn describe(c: &ModeCoupler) -> String {
    let (ex, ey) = c.ellipticity();
    let (a1, a2) = (c.a1(), c.a2());
    format!(
        "A1 = {:.12} {:+.12}i\nA2 = {:.12} {:+.12}i\n|A1|^2 = {:.12}\n|A2|^2 = {:.12}\neta_x = {:.12}\neta_y = {:.12}\n",
        a1.re,
        a1.im,
        a2.re,
        a2.im,
        a1.norm_sqr(),
        a2.norm_sqr(),
        ex,
        ey
    )
}

/// Coupler coefficients as printable text.
pub fn cmd_coupler(req: CouplerRequest) -> CmdResult<String> {
    match req {
        CouplerRequest::Bs { theta, phi } => {
            if !(theta.is_finite() && phi.is_finite()) {
                return Err(config_err(anyhow!("angles must be finite")));
            }
            Ok(describe(&bs_coupler(theta, phi)))
        }
        CouplerRequest::Dcdc { g, delta, t } => {
            let p = DcdcParams::new(g, delta, t).map_err(config_err)?;
            Ok(describe(&dcdc_coupler(&p)))
        }
        CouplerRequest::Ratio { ratio, g, delta } => {
            let t = dcdc_time_for_ratio(ratio, g, delta).map_err(config_err)?;
            let p = DcdcParams::new(g, delta, t).map_err(config_err)?;
            Ok(format!("t = {t:.15}\n{}", describe(&dcdc_coupler(&p))))
        }
    }
}

/// Runs `f` on a dedicated pool of `threads` workers (all cores when `None`).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> anyhow::Result<T> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(anyhow!("--threads must be >= 1"));
        }
        b = b.num_threads(n);
    }
    Ok(b.build()?.install(f))
}
