//! Closed form versus oracle comparison results.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::io::write_atomic;
use crate::oracle::QuadratureSpec;
use crate::state::DeevParams;
use crate::wigner::{ClosedForm, PhasePoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Match,
    ConstantOnlyMismatch,
    ShapeMismatch,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Match => "match",
            Verdict::ConstantOnlyMismatch => "constant-only-mismatch",
            Verdict::ShapeMismatch => "shape-mismatch",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Verdict {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "match" => Ok(Verdict::Match),
            "constant-only-mismatch" => Ok(Verdict::ConstantOnlyMismatch),
            "shape-mismatch" => Ok(Verdict::ShapeMismatch),
            other => Err(Error::Parse {
                what: "verdict",
                reason: format!("unknown verdict `{other}`"),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probe {
    pub point: PhasePoint,
    /// Closed form with its own constant.
    pub closed_form: f64,
    /// Closed form without constant.
    pub shape: f64,
    pub oracle: f64,
    pub oracle_error: f64,
    /// `oracle / shape`
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscrepancyReport {
    pub params: DeevParams,
    pub form: ClosedForm,
    pub quadrature: QuadratureSpec,
    pub probes: Vec<Probe>,
    pub native_constant: f64,
    pub calibrated_constant: f64,
    /// Largest `|ratio / calibrated − 1|` over the probes.
    pub max_deviation: f64,
    pub verdict: Verdict,
}

impl DiscrepancyReport {
    /// Human-readable `#` lines followed by `key=value` lines; the verdict
    /// is always the last line.
    pub fn render(&self, mut out: impl Write) -> std::io::Result<()> {
        let p = &self.params;
        let d = p.displacement();
        writeln!(out, "# Wigner closed form versus numerical transform")?;
        writeln!(
            out,
            "# state: m={} sigma=({}, {}) eta=({}, {}) sign={}",
            p.m(),
            p.sigma_x(),
            p.sigma_y(),
            p.eta_x(),
            p.eta_y(),
            p.sign()
        )?;
        writeln!(out, "# closed form: {}", self.form)?;
        writeln!(
            out,
            "# constant: native {:e}, calibrated {:e}",
            self.native_constant, self.calibrated_constant
        )?;
        writeln!(
            out,
            "# {} probes, max relative deviation after calibration {:e}",
            self.probes.len(),
            self.max_deviation
        )?;
        writeln!(out, "# verdict: {}", self.verdict)?;
        writeln!(out, "m={}", p.m())?;
        writeln!(out, "sigma_x={:e}", p.sigma_x())?;
        writeln!(out, "sigma_y={:e}", p.sigma_y())?;
        writeln!(out, "eta_x={:e}", p.eta_x())?;
        writeln!(out, "eta_y={:e}", p.eta_y())?;
        writeln!(out, "sign={}", p.sign())?;
        writeln!(out, "displacement={:e},{:e},{:e},{:e}", d.x0, d.y0, d.px0, d.py0)?;
        writeln!(out, "closed_form={}", self.form)?;
        let q = &self.quadrature;
        writeln!(out, "abs_tol={:e}", q.abs_tol)?;
        writeln!(out, "rel_tol={:e}", q.rel_tol)?;
        writeln!(out, "max_subdivisions={}", q.max_subdivisions)?;
        writeln!(out, "truncation_radius={:e}", q.truncation_radius)?;
        writeln!(out, "native_constant={:.16e}", self.native_constant)?;
        writeln!(out, "calibrated_constant={:.16e}", self.calibrated_constant)?;
        writeln!(out, "max_deviation={:.16e}", self.max_deviation)?;
        writeln!(out, "probes={}", self.probes.len())?;
        for (i, pr) in self.probes.iter().enumerate() {
            let pt = pr.point;
            writeln!(
                out,
                "probe.{i}={:.16e},{:.16e},{:.16e},{:.16e} closed_form={:.16e} oracle={:.16e} oracle_error={:.3e} ratio={:.16e}",
                pt.x, pt.y, pt.px, pt.py, pr.closed_form, pr.oracle, pr.oracle_error, pr.ratio
            )?;
        }
        writeln!(out, "verdict={}", self.verdict)
    }
}

/// Writes the report atomically.
pub fn write_report(report: &DiscrepancyReport, dest: &Path) -> Result<()> {
    let mut buf = Vec::new();
    report.render(&mut buf).map_err(|e| Error::io(dest, e))?;
    write_atomic(dest, &buf)
}

/// Reads the verdict from a report's final line.
pub fn read_verdict(text: &str) -> Result<Verdict> {
    let last = text.lines().rev().find(|l| !l.trim().is_empty()).unwrap_or("");
    last.strip_prefix("verdict=")
        .ok_or_else(|| Error::Parse {
            what: "report",
            reason: "final line is not `verdict=...`".into(),
        })?
        .parse()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture(verdict: Verdict, dev: f64) -> DiscrepancyReport {
        let params = DeevParams::from_sigmas(1, 5.0, 3.0).unwrap();
        let probe = Probe {
            point: PhasePoint::new(0.1, 0.2, 0.3, 0.4),
            closed_form: -0.5,
            shape: 0.25,
            oracle: -0.4,
            oracle_error: 1e-13,
            ratio: -1.6,
        };
        DiscrepancyReport {
            params,
            form: ClosedForm::Compact,
            quadrature: QuadratureSpec::default(),
            probes: vec![probe; 3],
            native_constant: -2.0,
            calibrated_constant: -1.6,
            max_deviation: dev,
            verdict,
        }
    }

    #[test]
    fn verdict_is_last_line() {
        for v in [Verdict::Match, Verdict::ConstantOnlyMismatch, Verdict::ShapeMismatch] {
            let mut buf = Vec::new();
            fixture(v, 0.3).render(&mut buf).unwrap();
            let text = String::from_utf8(buf).unwrap();
            assert_eq!(read_verdict(&text).unwrap(), v);
            assert!(text.lines().any(|l| l.starts_with("# ")));
            assert!(text.lines().any(|l| l == "probes=3"));
        }
    }

    #[test]
    fn written_report_round_trips_verdict() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.txt");
        write_report(&fixture(Verdict::ShapeMismatch, 0.4), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(read_verdict(&text).unwrap(), Verdict::ShapeMismatch);
        assert!(text.contains("max_deviation=4.0000000000000002e-1"));
    }

    #[test]
    fn unwritable_destination_fails() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("missing").join("report.txt");
        assert!(write_report(&fixture(Verdict::Match, 0.0), &path).is_err());
    }

    #[test]
    fn bad_verdict_line_rejected() {
        assert!(read_verdict("m=1\n").is_err());
        assert!(read_verdict("verdict=maybe").is_err());
    }
}
