//! Samples and their exact step quantile functions.
//!
//! Every empirical or trimmed distribution in this crate is carried as a
//! [`StepQuantile`]: a nondecreasing, left-continuous, piecewise-constant map
//! on `(0, 1]`. Functionals of one or two such maps are integrated exactly by
//! walking the merged breakpoint grid, so no quadrature error enters.
//!
//! Breakpoints coming from samples are kept as exact fractions `i/n`, which
//! lets two empirical grids be merged without floating-point collisions.

use std::cmp::Ordering;

use crate::error::{Error, Result};

/// A finite, non-empty collection of real observations.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
}

impl Sample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Values in ascending order (the order statistics).
    pub fn sorted(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_unstable_by(f64::total_cmp);
        v
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }
}

impl TryFrom<Vec<f64>> for Sample {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Sample::new(values)
    }
}

/// Position of a breakpoint in `(0, 1]`.
///
/// `Ratio` positions compare exactly against each other; a `Real` position is
/// compared through its floating-point value.
#[derive(Debug, Clone, Copy)]
pub enum Knot {
    Ratio { num: u64, den: u64 },
    Real(f64),
}

impl Knot {
    pub const ONE: Knot = Knot::Ratio { num: 1, den: 1 };
    pub(crate) const ZERO: Knot = Knot::Ratio { num: 0, den: 1 };

    pub fn ratio(num: u64, den: u64) -> Self {
        debug_assert!(den > 0 && num <= den);
        Knot::Ratio { num, den }
    }

    pub fn value(self) -> f64 {
        match self {
            Knot::Ratio { num, den } => num as f64 / den as f64,
            Knot::Real(x) => x,
        }
    }

    /// `self - earlier` as a float, exact up to the final rounding for two ratios.
    fn width_from(self, earlier: Knot) -> f64 {
        match (self, earlier) {
            (Knot::Ratio { num: a, den: b }, Knot::Ratio { num: c, den: d }) => {
                if b == d {
                    (a - c) as f64 / b as f64
                } else {
                    let top = a as i128 * d as i128 - c as i128 * b as i128;
                    top as f64 / (b as f64 * d as f64)
                }
            }
            _ => self.value() - earlier.value(),
        }
    }
}

impl PartialEq for Knot {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Knot {}

impl PartialOrd for Knot {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Knot {
    fn cmp(&self, other: &Self) -> Ordering {
        match (*self, *other) {
            (Knot::Ratio { num: a, den: b }, Knot::Ratio { num: c, den: d }) => {
                (a as u128 * d as u128).cmp(&(c as u128 * b as u128))
            }
            (x, y) => x.value().total_cmp(&y.value()),
        }
    }
}

/// Integrand applied to the pointwise difference `q1(t) - q2(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    SquaredDifference,
    PositivePartSquared,
    NegativePartSquared,
    AbsoluteDifference,
    PositivePart,
}

impl Kernel {
    #[inline]
    pub fn apply(self, d: f64) -> f64 {
        match self {
            Kernel::SquaredDifference => d * d,
            Kernel::PositivePartSquared => {
                if d > 0.0 {
                    d * d
                } else {
                    0.0
                }
            }
            Kernel::NegativePartSquared => {
                if d < 0.0 {
                    d * d
                } else {
                    0.0
                }
            }
            Kernel::AbsoluteDifference => d.abs(),
            Kernel::PositivePart => d.max(0.0),
        }
    }
}

/// Nondecreasing left-continuous step function on `(0, 1]`.
///
/// Piece `i` covers `(knots[i-1], knots[i]]` (with an implicit leading `0`)
/// and takes the value `values[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepQuantile {
    knots: Vec<Knot>,
    values: Vec<f64>,
}

impl StepQuantile {
    /// Builds a step quantile from right endpoints in `(0, 1]` (the last must be 1)
    /// and the value on each piece.
    pub fn new(breakpoints: &[f64], values: Vec<f64>) -> Result<Self> {
        if breakpoints.is_empty() || breakpoints.len() != values.len() {
            return Err(Error::InvalidQuantile(
                "need one value per piece and at least one piece".into(),
            ));
        }
        if *breakpoints.last().unwrap() != 1.0 {
            return Err(Error::InvalidQuantile("last breakpoint must be 1".into()));
        }
        let mut prev = 0.0;
        for &b in breakpoints {
            if !(b > prev) {
                return Err(Error::InvalidQuantile(
                    "breakpoints must be strictly increasing in (0, 1]".into(),
                ));
            }
            prev = b;
        }
        let n = breakpoints.len();
        let knots = breakpoints
            .iter()
            .enumerate()
            .map(|(i, &b)| if i + 1 == n { Knot::ONE } else { Knot::Real(b) })
            .collect();
        Self::from_parts(knots, values)
    }

    pub(crate) fn from_parts(knots: Vec<Knot>, values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidQuantile("NaN value".into()));
        }
        if values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidQuantile("values must be nondecreasing".into()));
        }
        Ok(Self { knots, values })
    }

    /// Step quantile of a sample given in ascending order; piece `i` is `((i-1)/n, i/n]`.
    pub(crate) fn from_sorted(sorted: Vec<f64>) -> Self {
        let n = sorted.len() as u64;
        debug_assert!(n > 0);
        let knots = (1..=n).map(|i| Knot::ratio(i, n)).collect();
        Self {
            knots,
            values: sorted,
        }
    }

    pub fn constant(value: f64) -> Self {
        Self {
            knots: vec![Knot::ONE],
            values: vec![value],
        }
    }

    /// Number of pieces. For an empirical quantile this is the sample size.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn knots(&self) -> &[Knot] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Right endpoints of the pieces as floats.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.knots.iter().map(|k| k.value()).collect()
    }

    /// Iterator over `(left, right, value)` for each piece.
    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let lefts = std::iter::once(0.0).chain(self.knots.iter().map(|k| k.value()));
        lefts
            .zip(self.knots.iter())
            .zip(self.values.iter())
            .map(|((l, r), &v)| (l, r.value(), v))
    }

    pub fn evaluate(&self, t: f64) -> Result<f64> {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::domain("quantile level", t));
        }
        let idx = self.knots.partition_point(|k| k.value() < t);
        Ok(self.values[idx.min(self.len() - 1)])
    }

    /// Evaluation without the domain check; levels `<= 0` give the first value.
    pub(crate) fn at(&self, t: f64) -> f64 {
        let idx = self.knots.partition_point(|k| k.value() < t);
        self.values[idx.min(self.len() - 1)]
    }

    /// Value at the exact level `num/den`, with level 0 mapped to the first
    /// value (the right limit) instead of an error.
    pub fn value_at_ratio(&self, num: u64, den: u64) -> f64 {
        if num == 0 {
            return self.values[0];
        }
        let target = Knot::ratio(num.min(den), den);
        let idx = self.knots.partition_point(|k| *k < target);
        self.values[idx.min(self.len() - 1)]
    }

    pub fn min_value(&self) -> f64 {
        self.values[0]
    }

    pub fn max_value(&self) -> f64 {
        self.values[self.len() - 1]
    }

    /// Merges adjacent pieces with equal values.
    pub fn canonicalize(&self) -> StepQuantile {
        let mut knots = Vec::with_capacity(self.len());
        let mut values: Vec<f64> = Vec::with_capacity(self.len());
        for (&k, &v) in self.knots.iter().zip(&self.values) {
            if values.last() == Some(&v) {
                *knots.last_mut().unwrap() = k;
            } else {
                knots.push(k);
                values.push(v);
            }
        }
        StepQuantile { knots, values }
    }

    /// Quantile of `scale * X + shift`, for `scale > 0`.
    pub fn affine(&self, scale: f64, shift: f64) -> Result<StepQuantile> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::domain("scale", scale));
        }
        let values = self.values.iter().map(|v| scale * v + shift).collect();
        Self::from_parts(self.knots.clone(), values)
    }

    /// True when both functions agree on every piece of the merged grid.
    pub fn same_function(&self, other: &StepQuantile) -> bool {
        let mut same = true;
        for_each_piece(self, other, |_, _, a, b| same &= a == b);
        same
    }
}

/// Empirical quantile of a sample: the `i`-th order statistic on `((i-1)/n, i/n]`.
pub fn empirical_quantile(sample: &Sample) -> StepQuantile {
    StepQuantile::from_sorted(sample.sorted())
}

/// Calls `f(right, width, a, b)` on every piece of the merged grid of `q1` and `q2`,
/// where `a` and `b` are the values of `q1` and `q2` on that piece.
pub(crate) fn for_each_piece<F>(q1: &StepQuantile, q2: &StepQuantile, mut f: F)
where
    F: FnMut(Knot, f64, f64, f64),
{
    let (mut i, mut j) = (0, 0);
    let mut prev = Knot::ZERO;
    while i < q1.knots.len() && j < q2.knots.len() {
        let (ka, kb) = (q1.knots[i], q2.knots[j]);
        let (next, step_a, step_b) = match ka.cmp(&kb) {
            Ordering::Less => (ka, true, false),
            Ordering::Greater => (kb, false, true),
            Ordering::Equal => (ka, true, true),
        };
        let width = next.width_from(prev);
        if width > 0.0 {
            f(next, width, q1.values[i], q2.values[j]);
        }
        prev = next;
        i += step_a as usize;
        j += step_b as usize;
    }
}

/// Exact value of `∫₀¹ kernel(q1(t) - q2(t)) dt`.
pub fn integrate_piecewise(q1: &StepQuantile, q2: &StepQuantile, kernel: Kernel) -> f64 {
    let mut acc = 0.0;
    for_each_piece(q1, q2, |_, w, a, b| acc += w * kernel.apply(a - b));
    acc
}

/// Positive- and negative-part squared integrals from a single pass over the merged grid.
pub(crate) fn split_squared(q1: &StepQuantile, q2: &StepQuantile) -> (f64, f64) {
    let (mut pos, mut neg) = (0.0, 0.0);
    for_each_piece(q1, q2, |_, w, a, b| {
        let d = a - b;
        if d > 0.0 {
            pos += w * d * d;
        } else if d < 0.0 {
            neg += w * d * d;
        }
    });
    (pos, neg)
}

/// Builds a step quantile from values computed on the merged grid of `q1` and `q2`.
pub(crate) fn combine<F>(q1: &StepQuantile, q2: &StepQuantile, mut f: F) -> Result<StepQuantile>
where
    F: FnMut(f64, f64) -> f64,
{
    let mut knots = Vec::with_capacity(q1.len() + q2.len());
    let mut values = Vec::with_capacity(q1.len() + q2.len());
    for_each_piece(q1, q2, |k, _, a, b| {
        knots.push(k);
        values.push(f(a, b));
    });
    StepQuantile::from_parts(knots, values)
}
