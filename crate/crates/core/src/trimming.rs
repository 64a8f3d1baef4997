//! Minimal and maximal trimmings of a distribution.
//!
//! Among all π-trimmings of `F`, the stochastically smallest one keeps the
//! lower `1 - π` of the mass and the largest keeps the upper `1 - π`. Their
//! quantiles are `t ↦ F⁻¹((1-π)t)` and `t ↦ F⁻¹(π + (1-π)t)`, and every other
//! trimming has its quantile squeezed between them.

use crate::empirical::{for_each_piece, Knot, StepQuantile};
use crate::error::{Error, Result};

/// Reparametrized breakpoints closer than this to an end of `(0, 1]` are
/// snapped onto it, so that e.g. `π = 1/3` on a grid of thirds does not leave
/// a sliver piece of width `1e-16`.
const SNAP: f64 = 1e-12;

/// Trimming proportion `π ∈ [0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct TrimLevel(f64);

impl TrimLevel {
    pub const ZERO: TrimLevel = TrimLevel(0.0);

    pub fn new(pi: f64) -> Result<Self> {
        if (0.0..1.0).contains(&pi) {
            Ok(Self(pi))
        } else {
            Err(Error::domain("trim level", pi))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrimSide {
    /// `F_π`: mass removed from the top.
    Lower,
    /// `F^π`: mass removed from the bottom.
    Upper,
}

/// Quantile of `F_π`: `t ↦ q((1-π)t)`.
pub fn lower_trim_quantile(q: &StepQuantile, pi: TrimLevel) -> StepQuantile {
    if pi.0 == 0.0 {
        return q.clone();
    }
    let keep = 1.0 - pi.0;
    let mut knots = Vec::new();
    let mut values = Vec::new();
    for (&k, &v) in q.knots().iter().zip(q.values()) {
        let s = k.value() / keep;
        if s >= 1.0 - SNAP {
            knots.push(Knot::ONE);
            values.push(v);
            break;
        }
        knots.push(Knot::Real(s));
        values.push(v);
    }
    StepQuantile::from_parts(knots, values).expect("reparametrization keeps monotonicity")
}

/// Quantile of `F^π`: `t ↦ q(π + (1-π)t)`.
pub fn upper_trim_quantile(q: &StepQuantile, pi: TrimLevel) -> StepQuantile {
    if pi.0 == 0.0 {
        return q.clone();
    }
    let keep = 1.0 - pi.0;
    let n = q.len();
    let mut knots = Vec::new();
    let mut values = Vec::new();
    for (i, (&k, &v)) in q.knots().iter().zip(q.values()).enumerate() {
        if i + 1 == n {
            knots.push(Knot::ONE);
            values.push(v);
            break;
        }
        let s = (k.value() - pi.0) / keep;
        if s <= SNAP {
            continue;
        }
        if s >= 1.0 {
            knots.push(Knot::ONE);
            values.push(v);
            break;
        }
        knots.push(Knot::Real(s));
        values.push(v);
    }
    StepQuantile::from_parts(knots, values).expect("reparametrization keeps monotonicity")
}

/// Distribution function of a trimmed law evaluated from `F(x)`.
pub fn trimmed_cdf_value(f_at_x: f64, pi: TrimLevel, side: TrimSide) -> f64 {
    let keep = 1.0 - pi.0;
    match side {
        TrimSide::Upper => ((f_at_x - pi.0) / keep).max(0.0),
        TrimSide::Lower => (f_at_x / keep).min(1.0),
    }
}

/// Whether `candidate` lies between the minimal and maximal π-trimmings of `base`.
pub fn envelope_contains(candidate: &StepQuantile, base: &StepQuantile, pi: TrimLevel) -> bool {
    let lower = lower_trim_quantile(base, pi);
    let upper = upper_trim_quantile(base, pi);
    let mut inside = true;
    for_each_piece(&lower, candidate, |_, _, lo, c| inside &= lo <= c);
    for_each_piece(candidate, &upper, |_, _, c, hi| inside &= c <= hi);
    inside
}
