//! CSV and 16-bit PGM serialization of sampled fields.
//!
//! CSV layout:
//!
//! ```text
//! # axis1=x:-15:19:201 axis2=y:-11:19:201 m=3 ...
//! x,y,value
//! -1.5000000000000000e1,-1.1000000000000000e1,1.2345678901234567e-20
//! ```
//!
//! Numbers carry 17 significant digits so every finite `f64` round-trips
//! bit-exactly; non-finite values are written as `inf`, `-inf` and `NaN`.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::{Axis, Field2D, GridSpec};

/// Writes `bytes` to a temporary file next to `dest` and renames it into
/// place, so `dest` is either complete or untouched.
pub fn write_atomic(dest: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match dest.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dest, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(dest, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(dest, e))?;
    tmp.persist(dest).map_err(|e| Error::io(dest, e.error))?;
    Ok(())
}

fn axis_token(a: &Axis) -> String {
    format!("{}:{}:{}:{}", a.label, a.min, a.max, a.count)
}

fn parse_axis(token: &str) -> Result<Axis> {
    let bad = |reason: String| Error::Parse { what: "axis", reason };
    let parts: Vec<&str> = token.split(':').collect();
    if parts.len() != 4 {
        return Err(bad(format!("expected label:min:max:count, got `{token}`")));
    }
    let num = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("`{s}`: {e}")));
    let count = parts[3].parse::<usize>().map_err(|e| bad(format!("`{}`: {e}", parts[3])))?;
    Axis::new(parts[0].parse()?, num(parts[1])?, num(parts[2])?, count)
}

/// CSV text for a field.
pub fn csv_string(field: &Field2D) -> String {
    let spec = field.spec();
    let mut out = String::with_capacity(64 * (spec.len() + 2));
    out.push_str("# axis1=");
    out.push_str(&axis_token(&spec.axis1));
    out.push_str(" axis2=");
    out.push_str(&axis_token(&spec.axis2));
    for (k, v) in field.metadata() {
        let _ = write!(out, " {k}={v}");
    }
    let _ = writeln!(out, "\n{},{},value", spec.axis1.label, spec.axis2.label);
    let n2 = spec.axis2.count;
    for (k, v) in field.values().iter().enumerate() {
        let a = spec.axis1.node(k / n2);
        let b = spec.axis2.node(k % n2);
        let _ = writeln!(out, "{a:.16e},{b:.16e},{v:.16e}");
    }
    out
}

pub fn write_csv(field: &Field2D, dest: &Path) -> Result<()> {
    write_atomic(dest, csv_string(field).as_bytes())
}

/// Parses CSV text produced by [`csv_string`].
pub fn parse_csv(text: &str) -> Result<Field2D> {
    let bad = |reason: String| Error::Parse { what: "csv", reason };
    let mut lines = text.lines();
    let meta_line = lines
        .next()
        .and_then(|l| l.strip_prefix('#'))
        .ok_or_else(|| bad("missing `#` metadata line".into()))?;
    let mut meta = BTreeMap::new();
    for pair in meta_line.split_whitespace() {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| bad(format!("metadata entry `{pair}` is not key=value")))?;
        meta.insert(k.to_string(), v.to_string());
    }
    let axis = |key: &str, meta: &mut BTreeMap<String, String>| {
        meta.remove(key)
            .ok_or_else(|| bad(format!("metadata lacks `{key}`")))
            .and_then(|t| parse_axis(&t))
    };
    let spec = GridSpec::new(axis("axis1", &mut meta)?, axis("axis2", &mut meta)?)?;
    let header = lines.next().ok_or_else(|| bad("missing column header".into()))?;
    let expected = format!("{},{},value", spec.axis1.label, spec.axis2.label);
    if header != expected {
        return Err(bad(format!("column header `{header}`, expected `{expected}`")));
    }
    let mut values = Vec::with_capacity(spec.len());
    for (row, line) in lines.enumerate() {
        let field = line
            .rsplit(',')
            .next()
            .filter(|_| line.matches(',').count() == 2)
            .ok_or_else(|| bad(format!("row {row}: expected 3 columns")))?;
        values.push(f64::from_str(field).map_err(|e| bad(format!("row {row}: `{field}`: {e}")))?);
    }
    let mut f = Field2D::new(spec, values)?;
    for (k, v) in meta {
        f.set_meta(k, v);
    }
    Ok(f)
}

pub fn read_csv(path: &Path) -> Result<Field2D> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text)
}

/// Value range mapped onto the gray levels.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Clamp {
    /// `[−c, c]`
    Fixed(f64),
    /// Finite minimum and maximum of the field.
    #[default]
    Auto,
}

impl fmt::Display for Clamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Clamp::Fixed(c) => write!(f, "{c}"),
            Clamp::Auto => f.write_str("auto"),
        }
    }
}

impl FromStr for Clamp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Clamp::Auto);
        }
        let c: f64 = s.parse().map_err(|e| Error::Parse {
            what: "clamp",
            reason: format!("`{s}`: {e}"),
        })?;
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::param("clamp", format!("must be finite and > 0, got {s}")));
        }
        Ok(Clamp::Fixed(c))
    }
}

/// Binary 16-bit PGM bytes. Image columns follow axis1 left to right and
/// rows follow axis2 with its maximum at the top. `[lo, hi]` maps affinely
/// onto `[0, 65535]` with saturation; NaN maps to 0 and a degenerate range
/// to mid-gray. The mapping is recorded in a header comment.
pub fn pgm_bytes(field: &Field2D, clamp: Clamp) -> Result<Vec<u8>> {
    let (lo, hi) = match clamp {
        Clamp::Fixed(c) if c.is_finite() && c > 0.0 => (-c, c),
        Clamp::Fixed(c) => return Err(Error::param("clamp", format!("must be finite and > 0, got {c}"))),
        Clamp::Auto => field.finite_range().unwrap_or((0.0, 0.0)),
    };
    let spec = field.spec();
    let (n1, n2) = (spec.axis1.count, spec.axis2.count);
    let mut out = format!(
        "P5\n# value_map lo={lo:e} hi={hi:e} clamp={clamp} axis1={} axis2={}\n{n1} {n2}\n65535\n",
        spec.axis1.label, spec.axis2.label
    )
    .into_bytes();
    out.reserve(2 * n1 * n2);
    let span = hi - lo;
    for row in 0..n2 {
        let j = n2 - 1 - row;
        for i in 0..n1 {
            let v = field.get(i, j);
            let level: u16 = if v.is_nan() {
                0
            } else if span.is_nan() || span <= 0.0 {
                32768
            } else {
                ((v - lo) / span * 65535.0).round().clamp(0.0, 65535.0) as u16
            };
            out.extend_from_slice(&level.to_be_bytes());
        }
    }
    Ok(out)
}

pub fn write_pgm(field: &Field2D, dest: &Path, clamp: Clamp) -> Result<()> {
    write_atomic(dest, &pgm_bytes(field, clamp)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::AxisLabel;
    use proptest::prelude::*;

    fn field(n1: usize, n2: usize, values: Vec<f64>) -> Field2D {
        let g = GridSpec::new(
            Axis::new(AxisLabel::R, -1.0, 1.0, n1).unwrap(),
            Axis::new(AxisLabel::S, 0.1, 0.7, n2).unwrap(),
        )
        .unwrap();
        Field2D::new(g, values).unwrap()
    }

    #[test]
    fn unit_field_has_four_rows() {
        let f = field(2, 2, vec![1.0; 4]).with_meta("m", 1);
        let text = csv_string(&f);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 6);
        assert_eq!(lines[0], "# axis1=r:-1:1:2 axis2=s:0.1:0.7:2 m=1");
        assert_eq!(lines[1], "r,s,value");
        assert_eq!(lines[2], "-1.0000000000000000e0,1.0000000000000001e-1,1.0000000000000000e0");
    }

    #[test]
    fn non_finite_tokens() {
        let f = field(2, 2, vec![f64::INFINITY, f64::NEG_INFINITY, f64::NAN, -0.0]);
        let text = csv_string(&f);
        assert!(text.contains(",inf\n") && text.contains(",-inf\n") && text.contains(",NaN\n"));
        let back = parse_csv(&text).unwrap();
        for (a, b) in f.values().iter().zip(back.values()) {
            assert!(a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()));
        }
    }

    #[test]
    fn file_round_trip_keeps_metadata() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let f = field(3, 2, vec![0.1, 0.2, 0.3, 0.4, 0.5, 1e-300]).with_meta("plane", "xpx");
        write_csv(&f, &path).unwrap();
        assert_eq!(read_csv(&path).unwrap(), f);
    }

    #[test]
    fn malformed_csv_rejected() {
        assert!(parse_csv("x,y,value\n").is_err());
        assert!(parse_csv("# axis1=x:0:1:2\nx,y,value\n").is_err());
        let good = csv_string(&field(2, 2, vec![0.0; 4]));
        let truncated: String = good.lines().take(4).map(|l| format!("{l}\n")).collect();
        assert!(parse_csv(&truncated).is_err());
        assert!(parse_csv(&good.replace("r,s,value", "a,b,value")).is_err());
    }

    #[test]
    fn unwritable_destination_fails() {
        let dir = tempfile::tempdir().unwrap();
        let f = field(2, 2, vec![0.0; 4]);
        assert!(write_csv(&f, &dir.path().join("no/such/dir.csv")).is_err());
    }

    fn pixels(bytes: &[u8]) -> Vec<u16> {
        // header has exactly four newline-terminated lines
        let mut nl = 0;
        let start = bytes
            .iter()
            .position(|&b| {
                nl += (b == b'\n') as usize;
                nl == 4
            })
            .unwrap()
            + 1;
        bytes[start..].chunks(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect()
    }

    #[test]
    fn constant_field_is_uniform_gray() {
        let f = field(3, 2, vec![0.4; 6]);
        let px = pixels(&pgm_bytes(&f, Clamp::Auto).unwrap());
        assert_eq!(px, vec![32768; 6]);
        let px = pixels(&pgm_bytes(&f, Clamp::Fixed(1.0)).unwrap());
        assert!(px.iter().all(|&p| p == px[0]));
    }

    #[test]
    fn pgm_orientation_and_mapping() {
        // values[i][j] = i + 10 j
        let f = field(2, 2, vec![0.0, 10.0, 1.0, 11.0]);
        let bytes = pgm_bytes(&f, Clamp::Auto).unwrap();
        let text = String::from_utf8_lossy(&bytes);
        assert!(text.starts_with("P5\n# value_map lo=0e0 hi=1.1e1 clamp=auto"));
        // top row is j = 1
        let px = pixels(&bytes);
        let level = |v: f64| (v / 11.0 * 65535.0).round() as u16;
        assert_eq!(px, vec![level(10.0), 65535, 0, level(1.0)]);
    }

    #[test]
    fn pgm_saturates_and_handles_nan() {
        let f = field(2, 2, vec![f64::NAN, f64::INFINITY, -5.0, 0.0]);
        let px = pixels(&pgm_bytes(&f, Clamp::Fixed(1.0)).unwrap());
        assert_eq!(px, vec![65535, 32768, 0, 0]);
        assert!(pgm_bytes(&f, Clamp::Fixed(0.0)).is_err());
    }

    #[test]
    fn clamp_parsing() {
        assert_eq!("auto".parse::<Clamp>().unwrap(), Clamp::Auto);
        assert_eq!("2.5".parse::<Clamp>().unwrap(), Clamp::Fixed(2.5));
        assert!("-1".parse::<Clamp>().is_err());
        assert!("x".parse::<Clamp>().is_err());
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_bit_exact(
            raw in prop::collection::vec(prop::num::f64::ANY, 12),
            lo in -1e6f64..1e6,
            width in 1e-3f64..1e6,
        ) {
            let g = GridSpec::new(
                Axis::new(AxisLabel::X, lo, lo + width, 3).unwrap(),
                Axis::new(AxisLabel::Px, -width, lo.abs() + 1.0, 4).unwrap(),
            ).unwrap();
            let f = Field2D::new(g, raw).unwrap();
            let back = parse_csv(&csv_string(&f)).unwrap();
            prop_assert_eq!(back.spec(), f.spec());
            for (a, b) in f.values().iter().zip(back.values()) {
                prop_assert!(a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()));
            }
        }
    }
}
