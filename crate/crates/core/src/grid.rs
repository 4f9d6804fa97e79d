//! Rectangular sampling grids and sampled real fields.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AxisLabel {
    X,
    Y,
    Px,
    Py,
    R,
    S,
}

impl AxisLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            AxisLabel::X => "x",
            AxisLabel::Y => "y",
            AxisLabel::Px => "px",
            AxisLabel::Py => "py",
            AxisLabel::R => "r",
            AxisLabel::S => "s",
        }
    }
}

impl fmt::Display for AxisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AxisLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "x" => AxisLabel::X,
            "y" => AxisLabel::Y,
            "px" => AxisLabel::Px,
            "py" => AxisLabel::Py,
            "r" => AxisLabel::R,
            "s" => AxisLabel::S,
            other => {
                return Err(Error::Parse {
                    what: "axis label",
                    reason: format!("unknown label `{other}`"),
                })
            }
        })
    }
}

/// One uniformly sampled axis, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub label: AxisLabel,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(label: AxisLabel, min: f64, max: f64, count: usize) -> Result<Self> {
        let axis = Axis {
            label,
            min,
            max,
            count,
        };
        axis.validate()?;
        Ok(axis)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite()) {
            return Err(Error::InvalidGrid(format!("axis {} has non-finite bounds", self.label)));
        }
        if self.min >= self.max {
            return Err(Error::InvalidGrid(format!(
                "axis {} needs min < max, got [{}, {}]",
                self.label, self.min, self.max
            )));
        }
        if self.count < 2 {
            return Err(Error::InvalidGrid(format!(
                "axis {} needs at least 2 nodes, got {}",
                self.label, self.count
            )));
        }
        Ok(())
    }

    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            return self.max;
        }
        self.min + (self.max - self.min) * i as f64 / (self.count - 1) as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(|i| self.node(i))
    }

    /// Index of the node closest to `v` (clamped to the axis).
    pub fn nearest(&self, v: f64) -> usize {
        let t = (v - self.min) / (self.max - self.min) * (self.count - 1) as f64;
        t.round().clamp(0.0, (self.count - 1) as f64) as usize
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.count - 1) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub axis1: Axis,
    pub axis2: Axis,
}

impl GridSpec {
    pub fn new(axis1: Axis, axis2: Axis) -> Result<Self> {
        let g = GridSpec { axis1, axis2 };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        self.axis1.validate()?;
        self.axis2.validate()?;
        if self.axis1.label == self.axis2.label {
            return Err(Error::InvalidGrid(format!("both axes labelled {}", self.axis1.label)));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.axis1.count * self.axis2.count
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn labels(&self) -> (AxisLabel, AxisLabel) {
        (self.axis1.label, self.axis2.label)
    }

    pub(crate) fn expect_labels(&self, a: AxisLabel, b: AxisLabel) -> Result<()> {
        self.validate()?;
        if self.labels() != (a, b) {
            return Err(Error::InvalidGrid(format!(
                "expected axes ({a}, {b}), got ({}, {})",
                self.axis1.label, self.axis2.label
            )));
        }
        Ok(())
    }

    /// Evaluates `f(axis1 value, axis2 value)` at every node, row-major with
    /// axis2 fastest. Rows are computed in parallel; each node is computed
    /// independently so the output does not depend on the thread count.
    pub fn sample<F>(&self, f: F) -> Vec<f64>
    where
        F: Fn(f64, f64) -> f64 + Sync,
    {
        let n2 = self.axis2.count;
        let mut values = vec![0.0; self.len()];
        values.par_chunks_mut(n2).enumerate().for_each(|(i, row)| {
            let a = self.axis1.node(i);
            for (j, v) in row.iter_mut().enumerate() {
                *v = f(a, self.axis2.node(j));
            }
        });
        values
    }
}

/// Real field sampled on a [`GridSpec`], row-major with axis2 fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Field2D {
    spec: GridSpec,
    values: Vec<f64>,
    metadata: BTreeMap<String, String>,
}

impl Field2D {
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        spec.validate()?;
        if values.len() != spec.len() {
            return Err(Error::InvalidGrid(format!(
                "{} values for a {}x{} grid",
                values.len(),
                spec.axis1.count,
                spec.axis2.count
            )));
        }
        Ok(Field2D {
            spec,
            values,
            metadata: BTreeMap::new(),
        })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn metadata(&self) -> &BTreeMap<String, String> {
        &self.metadata
    }

    /// Adds a metadata entry. Whitespace and `=` in keys or values are
    /// replaced by `_` so the single-line CSV header stays parseable.
    pub fn set_meta(&mut self, key: impl AsRef<str>, value: impl fmt::Display) {
        let clean = |s: &str| {
            s.chars()
                .map(|c| if c.is_whitespace() || c == '=' { '_' } else { c })
                .collect::<String>()
        };
        self.metadata
            .insert(clean(key.as_ref()), clean(&value.to_string()));
    }

    pub fn with_meta(mut self, key: impl AsRef<str>, value: impl fmt::Display) -> Self {
        self.set_meta(key, value);
        self
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.spec.axis2.count + j]
    }

    /// Swaps the roles of the two axes.
    pub fn transpose(&self) -> Field2D {
        let (n1, n2) = (self.spec.axis1.count, self.spec.axis2.count);
        let mut values = Vec::with_capacity(self.values.len());
        for j in 0..n2 {
            for i in 0..n1 {
                values.push(self.get(i, j));
            }
        }
        Field2D {
            spec: GridSpec {
                axis1: self.spec.axis2,
                axis2: self.spec.axis1,
            },
            values,
            metadata: self.metadata.clone(),
        }
    }

    /// Smallest and largest finite entries, or `None` when no entry is finite.
    pub fn finite_range(&self) -> Option<(f64, f64)> {
        self.values
            .iter()
            .filter(|v| v.is_finite())
            .fold(None, |acc, &v| match acc {
                None => Some((v, v)),
                Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
            })
    }

    pub fn argmin(&self) -> Option<(usize, usize)> {
        let n2 = self.spec.axis2.count;
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_nan())
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, _)| (k / n2, k % n2))
    }

    /// Interior nodes that are strictly smaller than all eight neighbours
    /// and whose magnitude exceeds `threshold`.
    pub fn strict_local_minima(&self, threshold: f64) -> Vec<(usize, usize)> {
        let (n1, n2) = (self.spec.axis1.count, self.spec.axis2.count);
        let mut found = Vec::new();
        for i in 1..n1.saturating_sub(1) {
            for j in 1..n2.saturating_sub(1) {
                let v = self.get(i, j);
                if v.is_nan() || v.abs() <= threshold {
                    continue;
                }
                let is_min = (i - 1..=i + 1)
                    .flat_map(|a| (j - 1..=j + 1).map(move |b| (a, b)))
                    .filter(|&(a, b)| (a, b) != (i, j))
                    .all(|(a, b)| v < self.get(a, b));
                if is_min {
                    found.push((i, j));
                }
            }
        }
        found
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n1: usize, n2: usize) -> GridSpec {
        GridSpec::new(
            Axis::new(AxisLabel::X, -1.0, 1.0, n1).unwrap(),
            Axis::new(AxisLabel::Y, 0.0, 2.0, n2).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn rejects_bad_axes() {
        assert!(Axis::new(AxisLabel::X, 0.0, 0.0, 10).is_err());
        assert!(Axis::new(AxisLabel::X, 1.0, 0.0, 10).is_err());
        assert!(Axis::new(AxisLabel::X, 0.0, 1.0, 1).is_err());
        assert!(Axis::new(AxisLabel::X, f64::NAN, 1.0, 3).is_err());
        assert!(Axis::new(AxisLabel::X, 0.0, f64::INFINITY, 3).is_err());
        let a = Axis::new(AxisLabel::X, 0.0, 1.0, 3).unwrap();
        assert!(GridSpec::new(a, a).is_err());
    }

    #[test]
    fn nodes_hit_endpoints() {
        let a = Axis::new(AxisLabel::Px, -0.3, 0.7, 11).unwrap();
        assert_eq!(a.node(0), -0.3);
        assert_eq!(a.node(10), 0.7);
        assert_eq!(a.nearest(0.21), 5);
        assert_eq!(a.nearest(99.0), 10);
    }

    #[test]
    fn sample_is_row_major_axis2_fastest() {
        let g = grid(3, 2);
        let v = g.sample(|a, b| 10.0 * a + b);
        assert_eq!(v, vec![-10.0, -8.0, 0.0, 2.0, 10.0, 12.0]);
    }

    #[test]
    fn transpose_round_trip() {
        let g = grid(4, 3);
        let f = Field2D::new(g, g.sample(|a, b| a * 3.0 - b)).unwrap();
        let t = f.transpose();
        assert_eq!(t.get(2, 1), f.get(1, 2));
        assert_eq!(t.transpose(), f);
    }

    #[test]
    fn length_mismatch_rejected() {
        assert!(Field2D::new(grid(2, 2), vec![0.0; 3]).is_err());
    }

    #[test]
    fn finds_single_minimum() {
        let g = grid(21, 21);
        let f = Field2D::new(g, g.sample(|a, b| (a - 0.1).powi(2) + (b - 1.0).powi(2) - 1.0)).unwrap();
        let mins = f.strict_local_minima(1e-12);
        assert_eq!(mins, vec![(11, 10)]);
        // plateaus are not strict minima
        let flat = Field2D::new(g, vec![-1.0; g.len()]).unwrap();
        assert!(flat.strict_local_minima(1e-12).is_empty());
    }

    #[test]
    fn metadata_is_sanitized() {
        let f = Field2D::new(grid(2, 2), vec![0.0; 4])
            .unwrap()
            .with_meta("closed form", "a=b c");
        assert_eq!(f.metadata()["closed_form"], "a_b_c");
    }
}
