//! Distances to the stochastic order and the violation index.
//!
//! For step quantiles every quantity here is an exact finite sum over the
//! merged breakpoint grid of the two arguments.

use crate::empirical::{combine, for_each_piece, integrate_piecewise, split_squared, Kernel, StepQuantile};
use crate::error::{Error, Result};
use crate::trimming::{lower_trim_quantile, upper_trim_quantile, TrimLevel};

/// Distances at or below this are treated as zero.
pub const ZERO_DISTANCE: f64 = 1e-14;

pub const DEFAULT_TRIM_TOL: f64 = 1e-6;

/// The violation index together with the integrals it is made of.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexReport {
    pub epsilon: f64,
    /// `∫ (F⁻¹ - G⁻¹)₊²`
    pub violation_integral: f64,
    pub w2_squared: f64,
    /// Number of atoms of the first argument (the sample size for empirical input).
    pub n: Option<usize>,
    pub m: Option<usize>,
}

/// The pair in the stochastic-order cone closest to `(F_π, G^π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalOrderedPair {
    pub lower: StepQuantile,
    pub upper: StepQuantile,
    pub distance: f64,
}

/// Smallest trimming level that removes every violation of the order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimalTrim {
    pub pi: f64,
    /// Set when no `π < 1` reaches zero distance; `pi` is then `1 - tol`.
    pub no_finite_trim: bool,
}

/// `F ≤st G`, i.e. `F⁻¹ ≤ G⁻¹` everywhere on `(0, 1)`.
pub fn is_stochastically_dominated(qf: &StepQuantile, qg: &StepQuantile) -> bool {
    let mut ordered = true;
    for_each_piece(qf, qg, |_, _, a, b| ordered &= a <= b);
    ordered
}

pub fn w2(qf: &StepQuantile, qg: &StepQuantile) -> f64 {
    integrate_piecewise(qf, qg, Kernel::SquaredDifference).sqrt()
}

/// Share of `W2²(F, G)` contributed by the region where `F⁻¹ > G⁻¹`.
pub fn epsilon_index(qf: &StepQuantile, qg: &StepQuantile) -> Result<IndexReport> {
    let (pos, neg) = split_squared(qf, qg);
    let total = pos + neg;
    if total == 0.0 {
        return Err(Error::IdenticalDistributions);
    }
    Ok(IndexReport {
        epsilon: pos / total,
        violation_integral: pos,
        w2_squared: total,
        n: Some(qf.len()),
        m: Some(qg.len()),
    })
}

/// `d₂` distance from the π-trimming sets of `F` and `G` to the order cone:
/// `√(½ ∫ (F⁻¹((1-π)t) - G⁻¹(π + (1-π)t))₊² dt)`.
pub fn trimmed_order_distance(qf: &StepQuantile, qg: &StepQuantile, pi: TrimLevel) -> f64 {
    let lo = lower_trim_quantile(qf, pi);
    let hi = upper_trim_quantile(qg, pi);
    (0.5 * integrate_piecewise(&lo, &hi, Kernel::PositivePartSquared)).sqrt()
}

/// Closest ordered pair to `(F_π, G^π)`: both quantiles are moved to their
/// midpoint wherever `F_π⁻¹ > G^π⁻¹` and left alone elsewhere.
pub fn optimal_ordered_pair(qf: &StepQuantile, qg: &StepQuantile, pi: TrimLevel) -> OptimalOrderedPair {
    let f = lower_trim_quantile(qf, pi);
    let g = upper_trim_quantile(qg, pi);
    let lower =
        combine(&f, &g, |a, b| a.min(0.5 * (a + b))).expect("pointwise min of quantiles is a quantile");
    let upper =
        combine(&f, &g, |a, b| b.max(0.5 * (a + b))).expect("pointwise max of quantiles is a quantile");
    let distance = (0.5 * integrate_piecewise(&f, &g, Kernel::PositivePartSquared)).sqrt();
    OptimalOrderedPair {
        lower,
        upper,
        distance,
    }
}

/// Bisection for the smallest `π` with zero trimmed distance.
pub fn minimal_trim_for_order(qf: &StepQuantile, qg: &StepQuantile, tol: f64) -> Result<MinimalTrim> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::domain("bisection tolerance", tol));
    }
    let zero_at =
        |p: f64| trimmed_order_distance(qf, qg, TrimLevel::new(p).expect("p in [0,1)")) <= ZERO_DISTANCE;
    if zero_at(0.0) {
        return Ok(MinimalTrim {
            pi: 0.0,
            no_finite_trim: false,
        });
    }
    let top = 1.0 - tol;
    if !zero_at(top) {
        return Ok(MinimalTrim {
            pi: top,
            no_finite_trim: true,
        });
    }
    let (mut lo, mut hi) = (0.0, top);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if zero_at(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(MinimalTrim {
        pi: hi,
        no_finite_trim: false,
    })
}

/// L1 analogue of the index: `∫ (F⁻¹ - G⁻¹)₊ / ∫ |F⁻¹ - G⁻¹|`, which in
/// distribution-function coordinates reads `∫_{F<G} (G - F) dx / ‖F - G‖₁`.
pub fn l1_comparator_index(qf: &StepQuantile, qg: &StepQuantile) -> Result<f64> {
    let (mut pos, mut neg) = (0.0, 0.0);
    for_each_piece(qf, qg, |_, w, a, b| {
        let d = a - b;
        if d > 0.0 {
            pos += w * d;
        } else {
            neg -= w * d;
        }
    });
    let total = pos + neg;
    if total == 0.0 {
        return Err(Error::IdenticalDistributions);
    }
    Ok(pos / total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::empirical::{empirical_quantile, Sample};

    fn q(xs: &[f64]) -> StepQuantile {
        empirical_quantile(&Sample::new(xs.to_vec()).unwrap())
    }

    fn pi(p: f64) -> TrimLevel {
        TrimLevel::new(p).unwrap()
    }

    #[test]
    fn dominance_examples() {
        assert!(is_stochastically_dominated(&q(&[1.0, 3.0]), &q(&[2.0, 4.0])));
        assert!(!is_stochastically_dominated(&q(&[0.0, 2.0]), &q(&[1.0, 1.0])));
        let a = q(&[5.0, -2.0, 0.5]);
        assert!(is_stochastically_dominated(&a, &a));
    }

    #[test]
    fn w2_examples() {
        assert_eq!(w2(&q(&[0.0, 2.0]), &q(&[1.0, 1.0])), 1.0);
        let a = q(&[5.0, -2.0, 0.5]);
        assert_eq!(w2(&a, &a), 0.0);
        assert_eq!(w2(&q(&[0.0]), &q(&[-3.5])), 3.5);
    }

    #[test]
    fn epsilon_examples() {
        let r = epsilon_index(&q(&[0.0, 2.0]), &q(&[1.0, 1.0])).unwrap();
        assert_eq!(r.epsilon, 0.5);
        assert_eq!((r.violation_integral, r.w2_squared), (0.5, 1.0));
        assert_eq!((r.n, r.m), (Some(2), Some(2)));
        assert_eq!(
            epsilon_index(&q(&[1.0, 3.0]), &q(&[2.0, 4.0])).unwrap().epsilon,
            0.0
        );
        assert_eq!(
            epsilon_index(&q(&[2.0, 4.0]), &q(&[1.0, 3.0])).unwrap().epsilon,
            1.0
        );
        let a = q(&[1.0, 2.0]);
        assert_eq!(epsilon_index(&a, &a), Err(Error::IdenticalDistributions));
    }

    #[test]
    fn trimmed_distance_examples() {
        let (f, g) = (q(&[0.0, 2.0]), q(&[1.0, 1.0]));
        assert!((trimmed_order_distance(&f, &g, pi(0.0)) - 0.5).abs() < 1e-15);
        let d = trimmed_order_distance(&f, &g, pi(0.25));
        assert!((d - (1.0f64 / 6.0).sqrt()).abs() < 1e-15, "{d}");
        assert_eq!(trimmed_order_distance(&f, &g, pi(0.5)), 0.0);
    }

    #[test]
    fn optimal_pair_examples() {
        let (f, g) = (q(&[0.0, 2.0]), q(&[1.0, 1.0]));
        let pair = optimal_ordered_pair(&f, &g, pi(0.0));
        assert_eq!(pair.lower.values(), &[0.0, 1.5]);
        assert_eq!(pair.upper.values(), &[1.0, 1.5]);
        assert_eq!(pair.lower.breakpoints(), vec![0.5, 1.0]);
        assert!((pair.distance - 0.5).abs() < 1e-15);

        let (a, b) = (q(&[1.0, 3.0]), q(&[2.0, 4.0]));
        let pair = optimal_ordered_pair(&a, &b, pi(0.0));
        assert!(pair.lower.same_function(&a) && pair.upper.same_function(&b));
        assert_eq!(pair.distance, 0.0);

        let pair = optimal_ordered_pair(&f, &g, pi(0.5));
        assert!(pair.lower.same_function(&StepQuantile::constant(0.0)));
        assert!(pair.upper.same_function(&StepQuantile::constant(1.0)));
        assert_eq!(pair.distance, 0.0);
    }

    #[test]
    fn minimal_trim_examples() {
        let t = minimal_trim_for_order(&q(&[1.0, 3.0]), &q(&[2.0, 4.0]), 1e-6).unwrap();
        assert_eq!(
            t,
            MinimalTrim {
                pi: 0.0,
                no_finite_trim: false
            }
        );

        let t = minimal_trim_for_order(&q(&[0.0, 2.0]), &q(&[1.0, 1.0]), 1e-6).unwrap();
        assert!(!t.no_finite_trim);
        assert!((t.pi - 0.5).abs() <= 1e-6, "{}", t.pi);

        let t = minimal_trim_for_order(&q(&[2.0]), &q(&[1.0]), 1e-6).unwrap();
        assert!(t.no_finite_trim);
        assert_eq!(t.pi, 1.0 - 1e-6);

        assert!(minimal_trim_for_order(&q(&[2.0]), &q(&[1.0]), 0.0).is_err());
    }

    #[test]
    fn l1_examples() {
        assert_eq!(
            l1_comparator_index(&q(&[0.0, 2.0]), &q(&[1.0, 1.0])).unwrap(),
            0.5
        );
        assert_eq!(
            l1_comparator_index(&q(&[1.0, 3.0]), &q(&[2.0, 4.0])).unwrap(),
            0.0
        );
        let (a, b) = (q(&[0.0, 5.0, 1.0]), q(&[2.0, 2.5]));
        let s = l1_comparator_index(&a, &b).unwrap() + l1_comparator_index(&b, &a).unwrap();
        assert!((s - 1.0).abs() < 1e-15);
        assert!(l1_comparator_index(&a, &a).is_err());
    }
}
