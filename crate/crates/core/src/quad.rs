//! Globally adaptive Gauss–Kronrod (G10/K21) quadrature.
//!
//! The interval with the largest error estimate is bisected until the
//! summed error satisfies `err <= max(abs_tol, rel_tol · |I|)`. Integrands
//! may be real, complex, or carry an auxiliary error channel (see
//! [`QuadValue`]), which lets nested integrals propagate inner error bounds.

use std::collections::BinaryHeap;
use std::cmp::Ordering;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_452_462,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Gauss weights for the odd-indexed Kronrod nodes `XGK[1], XGK[3], …, XGK[9]`.
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Values a quadrature rule can accumulate.
pub trait QuadValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync
{
    fn zero() -> Self;
    /// Size used for error estimation and the relative tolerance test.
    fn magnitude(&self) -> f64;
    /// Error carried in from an inner integration, if any.
    fn carried_error(&self) -> f64 {
        0.0
    }
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// A value together with the error bound of the inner integral that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WithError<T> {
    pub value: T,
    pub error: f64,
}

impl<T: QuadValue> Add for WithError<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        WithError {
            value: self.value + rhs.value,
            error: self.error + rhs.error,
        }
    }
}

impl<T: QuadValue> Sub for WithError<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        // error bounds add under subtraction too
        WithError {
            value: self.value - rhs.value,
            error: self.error + rhs.error,
        }
    }
}

impl<T: QuadValue> Mul<f64> for WithError<T> {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        WithError {
            value: self.value * rhs,
            error: self.error * rhs.abs(),
        }
    }
}

impl<T: QuadValue> QuadValue for WithError<T> {
    fn zero() -> Self {
        WithError {
            value: T::zero(),
            error: 0.0,
        }
    }
    fn magnitude(&self) -> f64 {
        self.value.magnitude()
    }
    fn carried_error(&self) -> f64 {
        self.error
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Upper bound on the number of bisections.
    pub max_subdivisions: usize,
    /// Equal-width pieces the interval is cut into before adapting.
    pub initial_pieces: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
            initial_pieces: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<T> {
    pub value: T,
    /// Discretization error estimate plus any carried inner error.
    pub error: f64,
    pub evaluations: usize,
    pub subdivisions: usize,
}

struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
    carried: f64,
    /// The error estimate is the rounding floor, so bisection cannot lower it.
    at_floor: bool,
}

impl<T> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Segment<T> {}
impl<T> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn kronrod21<T: QuadValue, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> Segment<T> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = T::zero();
    let mut carried = fc.carried_error() * WGK[10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        let pair = f1 + f2;
        kronrod = kronrod + pair * WGK[j];
        carried += (f1.carried_error() + f2.carried_error()) * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + pair * WG[j / 2];
        }
    }
    let value = kronrod * half;
    let diff = (kronrod - gauss).magnitude() * half.abs();
    // Floor at a few ulps of the accumulated absolute size.
    let floor = 50.0 * f64::EPSILON * value.magnitude();
    Segment {
        a,
        b,
        value,
        error: diff.max(floor),
        carried: carried * half.abs(),
        at_floor: diff <= floor,
    }
}

/// Integrates `f` over `[a, b]`.
///
/// On failure to reach the tolerance within `max_subdivisions` bisections,
/// returns [`Error::Quadrature`] with the best estimate (for real-valued
/// integrands, or the magnitude otherwise) and its error bound. When the
/// worst interval's error is already at the rounding floor the result is
/// returned with that error bound even if it exceeds the tolerance.
pub fn integrate<T, F>(mut f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<QuadResult<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::param("interval", "quadrature bounds must be finite"));
    }
    let pieces = opts.initial_pieces.max(1);
    let width = (b - a) / pieces as f64;
    let mut heap = BinaryHeap::with_capacity(pieces + opts.max_subdivisions + 1);
    let mut evaluations = 0;
    for k in 0..pieces {
        let lo = a + width * k as f64;
        let hi = if k + 1 == pieces { b } else { a + width * (k + 1) as f64 };
        heap.push(kronrod21(&mut f, lo, hi));
        evaluations += 21;
    }

    let sum = |heap: &BinaryHeap<Segment<T>>| {
        heap.iter().fold((T::zero(), 0.0, 0.0), |(v, e, c), s| {
            (v + s.value, e + s.error, c + s.carried)
        })
    };
    let (mut total, mut err, _) = sum(&heap);
    let mut subdivisions = 0;
    loop {
        let tol = opts.abs_tol.max(opts.rel_tol * total.magnitude());
        if err <= tol || subdivisions >= opts.max_subdivisions {
            // resum to drop drift from the running totals
            let (t, e, carried) = sum(&heap);
            total = t;
            err = e;
            if err <= opts.abs_tol.max(opts.rel_tol * total.magnitude()) {
                return Ok(QuadResult {
                    value: total,
                    error: err + carried,
                    evaluations,
                    subdivisions,
                });
            }
            if subdivisions >= opts.max_subdivisions {
                return Err(Error::Quadrature {
                    estimate: total.magnitude(),
                    error_bound: err + carried,
                    subdivisions,
                });
            }
        }
        if heap.peek().is_some_and(|s| s.at_floor) {
            // rounding-limited: the estimate is as good as f64 allows
            let (t, e, carried) = sum(&heap);
            return Ok(QuadResult {
                value: t,
                error: e + carried,
                evaluations,
                subdivisions,
            });
        }
        let worst = heap.pop().expect("heap holds at least one segment");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval exhausted at machine resolution
            let (t, e, carried) = sum(&heap);
            return Err(Error::Quadrature {
                estimate: (t + worst.value).magnitude(),
                error_bound: e + worst.error + carried + worst.carried,
                subdivisions,
            });
        }
        let left = kronrod21(&mut f, worst.a, mid);
        let right = kronrod21(&mut f, mid, worst.b);
        total = total - worst.value + left.value + right.value;
        err = (err - worst.error + left.error + right.error).max(0.0);
        heap.push(left);
        heap.push(right);
        evaluations += 42;
        subdivisions += 1;
    }
}
