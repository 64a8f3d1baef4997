//! Asymptotic inference for the violation index.
//!
//! The test rejects `H0: ε ≥ ε0` in favour of almost dominance when
//! `√(nm/(n+m)) (ε̂ - ε0) < σ̂ Φ⁻¹(α)`, and reports the matching one-sided
//! upper confidence bound. `σ̂` comes either from a nonparametric bootstrap
//! or from the plug-in variance functional built on
//! `u±(x) = ∫₀ˣ 2 (s - G⁻¹(F(s)))± ds`.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::empirical::{empirical_quantile, split_squared, Sample, StepQuantile};
use crate::error::{Error, Result};
use crate::models::{normal_cdf, normal_quantile, Distribution};
use crate::order_distance::{epsilon_index, IndexReport};
use crate::quad::{integrate_adaptive, integrate_unit_interval_floor};
use crate::rng::Stream;

pub const DEFAULT_BOOTSTRAP_REPLICATES: usize = 500;
pub const DEFAULT_EPSILON_0: f64 = 0.05;
pub const DEFAULT_ALPHA: f64 = 0.05;

/// Resamples that land on identical empirical laws are redrawn at most this often.
const MAX_REDRAWS: usize = 100;

/// Which part of `c(x) = 2x` enters the integrand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    /// `2 x₊`
    Plus,
    /// `2 x₋ = 2 max(-x, 0)`
    Minus,
    /// `2 x`
    Signed,
}

/// `∫_a^b c(s - level) ds` in closed form.
fn piece_integral(a: f64, b: f64, level: f64, part: Part) -> f64 {
    if a == b {
        // Also keeps infinite levels (G⁻¹(0), G⁻¹(1)) from producing NaN.
        return 0.0;
    }
    match part {
        Part::Plus => {
            if level == f64::INFINITY {
                return 0.0;
            }
            (b - level).max(0.0).powi(2) - (a - level).max(0.0).powi(2)
        }
        Part::Minus => {
            if level == f64::NEG_INFINITY {
                return 0.0;
            }
            (level - a).max(0.0).powi(2) - (level - b).max(0.0).powi(2)
        }
        Part::Signed => (b - level).powi(2) - (a - level).powi(2),
    }
}

/// `x ↦ ∫ c(s - G⁻¹(F_n(s))) ds` for an empirical `F_n`.
///
/// `s ↦ G⁻¹(F_n(s))` is constant between consecutive distinct order
/// statistics of the `F`-sample, so the integral is a sum of closed-form
/// pieces. Values are kept relative to the smallest observation; [`eval`]
/// shifts them to the literal lower limit 0.
///
/// [`eval`]: UFunction::eval
#[derive(Debug, Clone)]
pub struct UFunction {
    /// Distinct sorted values of the `F`-sample.
    knots: Vec<f64>,
    /// `levels[j]` is `G⁻¹(F_n(s))` for `s` in `[knots[j-1], knots[j])`;
    /// `levels[0]` applies below the first knot.
    levels: Vec<f64>,
    /// Integral from `knots[0]` to `knots[j]`.
    cum: Vec<f64>,
    part: Part,
    origin: f64,
}

impl UFunction {
    /// `sorted_f` is the `F`-sample in ascending order; `g_at(k)` must return
    /// `G⁻¹(k/n)` for `k = 0..=n`.
    fn build<Q: Fn(u64) -> f64>(sorted_f: &[f64], g_at: Q, part: Part) -> Self {
        let n = sorted_f.len();
        let mut knots = Vec::with_capacity(n);
        let mut counts = Vec::with_capacity(n);
        for (i, &x) in sorted_f.iter().enumerate() {
            if knots.last() == Some(&x) {
                *counts.last_mut().unwrap() = (i + 1) as u64;
            } else {
                knots.push(x);
                counts.push((i + 1) as u64);
            }
        }
        let mut levels = Vec::with_capacity(knots.len() + 1);
        levels.push(g_at(0));
        levels.extend(counts.iter().map(|&c| g_at(c)));
        let mut cum = Vec::with_capacity(knots.len());
        cum.push(0.0);
        for j in 1..knots.len() {
            let prev = cum[j - 1];
            cum.push(prev + piece_integral(knots[j - 1], knots[j], levels[j], part));
        }
        let mut u = Self {
            knots,
            levels,
            cum,
            part,
            origin: 0.0,
        };
        u.origin = u.eval_anchored(0.0);
        u
    }

    /// Plug-in `u` with `F = F_n` (from `sample_f`) and `G⁻¹ = G_m⁻¹`.
    pub fn empirical(sample_f: &Sample, qg: &StepQuantile, part: Part) -> Self {
        let sorted = sample_f.sorted();
        let n = sorted.len() as u64;
        Self::build(&sorted, |k| qg.value_at_ratio(k, n), part)
    }

    /// `F = F_n` from `sample_f`, `G` analytic.
    pub fn semi_empirical<G: Distribution + ?Sized>(sample_f: &Sample, g: &G, part: Part) -> Self {
        let sorted = sample_f.sorted();
        let n = sorted.len() as f64;
        Self::build(&sorted, |k| g.quantile(k as f64 / n), part)
    }

    /// Integral from the smallest `F`-observation to `x`.
    pub fn eval_anchored(&self, x: f64) -> f64 {
        let j = self.knots.partition_point(|&k| k <= x);
        if j == 0 {
            -piece_integral(x, self.knots[0], self.levels[0], self.part)
        } else {
            self.cum[j - 1] + piece_integral(self.knots[j - 1], x, self.levels[j], self.part)
        }
    }

    /// `∫₀ˣ`, signed (negative `x` integrates backwards).
    pub fn eval(&self, x: f64) -> f64 {
        self.eval_anchored(x) - self.origin
    }
}

/// `u±(x)` with empirical plug-ins for both `F` and `G`.
pub fn u_function_empirical(x: f64, sample_f: &Sample, qg: &StepQuantile, part: Part) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain("u-function argument", x));
    }
    Ok(UFunction::empirical(sample_f, qg, part).eval(x))
}

/// `u±(x)` for analytic `F` and `G`, by adaptive quadrature to `abs_tol`.
pub fn u_function_analytic<F, G>(x: f64, f: &F, g: &G, part: Part, abs_tol: f64) -> Result<f64>
where
    F: Distribution + ?Sized,
    G: Distribution + ?Sized,
{
    if !x.is_finite() {
        return Err(Error::domain("u-function argument", x));
    }
    let hi = 1.0 - f64::EPSILON / 2.0;
    let integrand = |s: f64| {
        let p = f.cdf(s).clamp(f64::MIN_POSITIVE, hi);
        let d = s - g.quantile(p);
        match part {
            Part::Plus => 2.0 * d.max(0.0),
            Part::Minus => 2.0 * (-d).max(0.0),
            Part::Signed => 2.0 * d,
        }
    };
    Ok(integrate_adaptive(integrand, 0.0, x, abs_tol))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarianceMethod {
    /// The closed-form variance exactly as stated, `[(1-λ) Var u₋(X) + λ Var u₊(Y)] / W2⁸`.
    /// It is not scale-free (it scales like `a⁻⁴`), so its size is only
    /// meaningful for data on a unit-like scale.
    PlugIn,
    /// First-order expansion of `S⁺ / (S⁺ + S⁻)`; scale-free.
    DeltaMethod,
    Bootstrap {
        replicates: usize,
    },
}

impl Default for VarianceMethod {
    fn default() -> Self {
        VarianceMethod::Bootstrap {
            replicates: DEFAULT_BOOTSTRAP_REPLICATES,
        }
    }
}

impl VarianceMethod {
    pub fn name(&self) -> &'static str {
        match self {
            VarianceMethod::PlugIn => "plug-in",
            VarianceMethod::DeltaMethod => "delta",
            VarianceMethod::Bootstrap { .. } => "bootstrap",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarianceEstimate {
    pub sigma_squared: f64,
    pub method: VarianceMethod,
    pub lambda_hat: f64,
    pub details: BTreeMap<&'static str, f64>,
}

impl VarianceEstimate {
    pub fn sigma(&self) -> f64 {
        self.sigma_squared.sqrt()
    }
}

/// Variance with divisor `len` (the plug-in moment of the empirical law).
fn plug_in_variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n
}

/// Plug-in asymptotic variance
/// `[(1-λ) Var u₋(X) + λ Var u₊(Y)] / W2⁸` with `F_n`, `G_m` in place of `F`, `G`.
pub fn plug_in_sigma(x: &Sample, y: &Sample) -> Result<VarianceEstimate> {
    let qf = empirical_quantile(x);
    let qg = empirical_quantile(y);
    let (pos, neg) = split_squared(&qf, &qg);
    let w2_squared = pos + neg;
    if w2_squared == 0.0 {
        return Err(Error::VarianceUndefined);
    }
    // Variances ignore the additive constant, so the anchored values are used.
    let u_minus = UFunction::empirical(x, &qg, Part::Minus);
    let u_plus = UFunction::empirical(x, &qg, Part::Plus);
    let um: Vec<f64> = x.values().iter().map(|&v| u_minus.eval_anchored(v)).collect();
    let up: Vec<f64> = y.values().iter().map(|&v| u_plus.eval_anchored(v)).collect();
    let var_minus = plug_in_variance(&um);
    let var_plus = plug_in_variance(&up);
    let (n, m) = (x.len() as f64, y.len() as f64);
    let lambda = n / (n + m);
    let sigma_squared = ((1.0 - lambda) * var_minus + lambda * var_plus) / w2_squared.powi(4);
    let details = BTreeMap::from([
        ("var_u_minus_x", var_minus),
        ("var_u_plus_y", var_plus),
        ("w2_squared", w2_squared),
    ]);
    Ok(VarianceEstimate {
        sigma_squared,
        method: VarianceMethod::PlugIn,
        lambda_hat: lambda,
        details,
    })
}

/// Delta-method variance of `√(nm/(n+m)) ε̂`:
/// `(1-λ) Var(S⁻ u₊(X) + S⁺ u₋(X)) / S⁴ + λ Var(S⁺ u'₊(Y) + S⁻ u'₋(Y)) / S⁴`,
/// where `S± = ∫ (F⁻¹ - G⁻¹)±²`, `S = S⁺ + S⁻`, and `u'` is built with the
/// roles of the samples swapped. Empirical laws are plugged in throughout.
pub fn delta_method_sigma(x: &Sample, y: &Sample) -> Result<VarianceEstimate> {
    let qf = empirical_quantile(x);
    let qg = empirical_quantile(y);
    let (pos, neg) = split_squared(&qf, &qg);
    let total = pos + neg;
    if total == 0.0 {
        return Err(Error::VarianceUndefined);
    }
    let influence = |sample: &Sample, other: &StepQuantile, w_plus: f64, w_minus: f64| {
        let up = UFunction::empirical(sample, other, Part::Plus);
        let um = UFunction::empirical(sample, other, Part::Minus);
        let vals: Vec<f64> = sample
            .values()
            .iter()
            .map(|&v| w_plus * up.eval_anchored(v) + w_minus * um.eval_anchored(v))
            .collect();
        plug_in_variance(&vals) / total.powi(4)
    };
    let var_x = influence(x, &qg, neg, pos);
    let var_y = influence(y, &qf, pos, neg);
    let (n, m) = (x.len() as f64, y.len() as f64);
    let lambda = n / (n + m);
    let details = BTreeMap::from([
        ("var_x_term", var_x),
        ("var_y_term", var_y),
        ("w2_squared", total),
    ]);
    Ok(VarianceEstimate {
        sigma_squared: (1.0 - lambda) * var_x + lambda * var_y,
        method: VarianceMethod::DeltaMethod,
        lambda_hat: lambda,
        details,
    })
}

/// Draws `sorted.len()` values with replacement and returns them sorted,
/// in linear time by counting.
fn resample_sorted(sorted: &[f64], counts: &mut Vec<u32>, stream: &mut Stream) -> Vec<f64> {
    let n = sorted.len();
    counts.clear();
    counts.resize(n, 0);
    for _ in 0..n {
        counts[stream.below(n)] += 1;
    }
    let mut out = Vec::with_capacity(n);
    for (v, &c) in sorted.iter().zip(counts.iter()) {
        for _ in 0..c {
            out.push(*v);
        }
    }
    out
}

fn sample_sd(values: &[f64]) -> f64 {
    let b = values.len() as f64;
    let mean = values.iter().sum::<f64>() / b;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (b - 1.0)).sqrt()
}

/// Bootstrap estimate of the standard deviation of `√(nm/(n+m)) ε̂`.
///
/// Replicate `b` draws from the stream `(seed, b)`, so the result does not
/// depend on the number of worker threads.
pub fn bootstrap_sigma(x: &Sample, y: &Sample, replicates: usize, seed: u64) -> Result<VarianceEstimate> {
    if replicates < 2 {
        return Err(Error::Config(format!(
            "bootstrap needs at least 2 replicates, got {replicates}"
        )));
    }
    let xs = x.sorted();
    let ys = y.sorted();
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let scale = (n * m / (n + m)).sqrt();
    let draws: Vec<Result<(f64, usize)>> = (0..replicates as u64)
        .into_par_iter()
        .map(|b| {
            let mut stream = Stream::new(seed, &[b]);
            let mut counts = Vec::new();
            for redraw in 0..=MAX_REDRAWS {
                let qf = StepQuantile::from_sorted(resample_sorted(&xs, &mut counts, &mut stream));
                let qg = StepQuantile::from_sorted(resample_sorted(&ys, &mut counts, &mut stream));
                let (pos, neg) = split_squared(&qf, &qg);
                if pos + neg > 0.0 {
                    return Ok((pos / (pos + neg), redraw));
                }
            }
            Err(Error::Bootstrap(format!(
                "replicate {b}: every resample gave identical empirical laws"
            )))
        })
        .collect();
    let mut stats = Vec::with_capacity(replicates);
    let mut redraws = 0;
    for d in draws {
        let (eps, r) = d?;
        stats.push(scale * eps);
        redraws += r;
    }
    let sd = sample_sd(&stats);
    let details = BTreeMap::from([
        ("replicates", replicates as f64),
        ("redraws", redraws as f64),
        (
            "mean_scaled_epsilon",
            stats.iter().sum::<f64>() / stats.len() as f64,
        ),
    ]);
    Ok(VarianceEstimate {
        sigma_squared: sd * sd,
        method: VarianceMethod::Bootstrap { replicates },
        lambda_hat: n / (n + m),
        details,
    })
}

/// `∫₀¹ k(F_n⁻¹(t) - G⁻¹(t)) dt` for a step `F_n⁻¹` against an analytic `G`,
/// split at every breakpoint and at every level where `G⁻¹` crosses a step.
fn step_vs_analytic<G, K>(qf: &StepQuantile, g: &G, kernel: K, tol: f64, floor: f64) -> f64
where
    G: Distribution + ?Sized,
    K: Fn(f64) -> f64,
{
    let mut breaks = qf.breakpoints();
    breaks.extend(qf.values().iter().map(|&v| g.cdf(v)));
    integrate_unit_interval_floor(|t| kernel(qf.at(t) - g.quantile(t)), &breaks, tol, floor)
}

/// Index between an empirical quantile and an analytic law.
pub fn one_sample_epsilon<G: Distribution + ?Sized>(
    qf: &StepQuantile,
    g: &G,
    tol: f64,
) -> Result<IndexReport> {
    let total = step_vs_analytic(qf, g, |d| d * d, tol, 0.0);
    let pos = step_vs_analytic(qf, g, |d| d.max(0.0).powi(2), tol, tol * total).min(total);
    if !(total > 0.0) {
        return Err(Error::IdenticalDistributions);
    }
    Ok(IndexReport {
        epsilon: pos / total,
        violation_integral: pos,
        w2_squared: total,
        n: Some(qf.len()),
        m: None,
    })
}

/// One-sample variance `Var v₋(U) / W2⁸` against a fully known `G`, with
/// `v₋` evaluated at the grid levels `i/n`.
pub fn one_sample_sigma<G: Distribution + ?Sized>(x: &Sample, g: &G) -> Result<VarianceEstimate> {
    let qf = empirical_quantile(x);
    let w2_squared = step_vs_analytic(&qf, g, |d| d * d, 1e-10, 0.0);
    if !(w2_squared > 0.0) {
        return Err(Error::VarianceUndefined);
    }
    let v_minus = UFunction::semi_empirical(x, g, Part::Minus);
    let values: Vec<f64> = qf.values().iter().map(|&v| v_minus.eval_anchored(v)).collect();
    let var = plug_in_variance(&values);
    let details = BTreeMap::from([("var_v_minus", var), ("w2_squared", w2_squared)]);
    Ok(VarianceEstimate {
        sigma_squared: var / w2_squared.powi(4),
        method: VarianceMethod::PlugIn,
        lambda_hat: 1.0,
        details,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestOptions {
    pub epsilon_0: f64,
    pub alpha: f64,
    pub method: VarianceMethod,
    pub seed: u64,
}

impl Default for TestOptions {
    fn default() -> Self {
        Self {
            epsilon_0: DEFAULT_EPSILON_0,
            alpha: DEFAULT_ALPHA,
            method: VarianceMethod::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestResult {
    pub epsilon_hat: f64,
    pub epsilon_0: f64,
    /// `√(nm/(n+m)) (ε̂ - ε0)`
    pub statistic: f64,
    pub sigma_hat: f64,
    pub alpha: f64,
    pub reject: bool,
    pub p_value: f64,
    pub upper_bound: f64,
    /// `σ̂ = 0`: the decision falls back to `ε̂ < ε0`.
    pub degenerate: bool,
    pub index: IndexReport,
    pub variance: VarianceEstimate,
}

/// Decision, p-value and upper bound from an index estimate and `σ̂`.
pub fn decide(
    index: IndexReport,
    n: usize,
    m: usize,
    variance: VarianceEstimate,
    epsilon_0: f64,
    alpha: f64,
) -> Result<TestResult> {
    let z_alpha = normal_quantile(alpha)?;
    let (nf, mf) = (n as f64, m as f64);
    let root = (nf * mf / (nf + mf)).sqrt();
    let epsilon_hat = index.epsilon;
    let statistic = root * (epsilon_hat - epsilon_0);
    let sigma_hat = variance.sigma();
    let upper_bound = epsilon_hat - sigma_hat * z_alpha / root;
    let degenerate = sigma_hat == 0.0;
    let (reject, p_value) = if degenerate {
        let reject = epsilon_hat < epsilon_0;
        (reject, if reject { 0.0 } else { 1.0 })
    } else {
        (statistic < sigma_hat * z_alpha, normal_cdf(statistic / sigma_hat))
    };
    Ok(TestResult {
        epsilon_hat,
        epsilon_0,
        statistic,
        sigma_hat,
        alpha,
        reject,
        p_value,
        upper_bound,
        degenerate,
        index,
        variance,
    })
}

pub(crate) fn check_level(what: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(what, v))
    }
}

/// Test of `H0: ε(F, G) ≥ ε0` against `Ha: ε(F, G) < ε0`.
pub fn test_almost_dominance(x: &Sample, y: &Sample, opts: &TestOptions) -> Result<TestResult> {
    check_level("epsilon_0", opts.epsilon_0)?;
    check_level("alpha", opts.alpha)?;
    let index = epsilon_index(&empirical_quantile(x), &empirical_quantile(y))?;
    let variance = match opts.method {
        VarianceMethod::PlugIn => plug_in_sigma(x, y)?,
        VarianceMethod::DeltaMethod => delta_method_sigma(x, y)?,
        VarianceMethod::Bootstrap { replicates } => bootstrap_sigma(x, y, replicates, opts.seed)?,
    };
    decide(index, x.len(), y.len(), variance, opts.epsilon_0, opts.alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{NormalParams, UniformParams};

    fn s(xs: &[f64]) -> Sample {
        Sample::new(xs.to_vec()).unwrap()
    }

    #[test]
    fn piece_integrals_match_quadrature() {
        for &(a, b, c) in &[
            (0.0, 1.0, 0.3),
            (-1.0, 2.0, 0.5),
            (0.2, 0.4, 1.0),
            (1.0, -1.0, 0.0),
        ] {
            for part in [Part::Plus, Part::Minus, Part::Signed] {
                let f = |s: f64| {
                    let d = s - c;
                    match part {
                        Part::Plus => 2.0 * d.max(0.0),
                        Part::Minus => 2.0 * (-d).max(0.0),
                        Part::Signed => 2.0 * d,
                    }
                };
                let q = integrate_adaptive(f, a, b, 1e-13);
                assert!((piece_integral(a, b, c, part) - q).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn u_vanishes_when_laws_coincide() {
        let n = NormalParams::new(0.3, 2.0).unwrap();
        for x in [-3.0, -0.5, 0.0, 1.0, 4.0] {
            for part in [Part::Plus, Part::Minus] {
                assert!(u_function_analytic(x, &n, &n, part, 1e-12).unwrap().abs() < 1e-9);
            }
        }
    }

    #[test]
    fn u_for_shifted_uniforms() {
        let f = UniformParams::new(0.0, 1.0).unwrap();
        let g = UniformParams::new(0.5, 1.5).unwrap();
        for x in [0.0, 0.25, 0.5, 1.0] {
            let um = u_function_analytic(x, &f, &g, Part::Minus, 1e-12).unwrap();
            let up = u_function_analytic(x, &f, &g, Part::Plus, 1e-12).unwrap();
            let us = u_function_analytic(x, &f, &g, Part::Signed, 1e-12).unwrap();
            assert!((um - x).abs() < 1e-10, "{um} vs {x}");
            assert!(up.abs() < 1e-12);
            assert!((up - um - us).abs() < 1e-10);
        }
        assert!(u_function_analytic(f64::NAN, &f, &g, Part::Plus, 1e-12).is_err());
    }

    #[test]
    fn empirical_u_sign_decomposition() {
        let x = s(&[0.3, -1.2, 2.2, 0.7, 0.7, 1.9]);
        let qg = empirical_quantile(&s(&[0.1, 0.5, 3.0, -0.4]));
        let plus = UFunction::empirical(&x, &qg, Part::Plus);
        let minus = UFunction::empirical(&x, &qg, Part::Minus);
        let signed = UFunction::empirical(&x, &qg, Part::Signed);
        for t in [-2.0, -1.2, 0.0, 0.5, 0.7, 1.0, 2.2, 5.0] {
            assert!((plus.eval(t) - minus.eval(t) - signed.eval(t)).abs() < 1e-12);
            assert_eq!(plus.eval(0.0), 0.0);
        }
        assert!(u_function_empirical(f64::INFINITY, &x, &qg, Part::Plus).is_err());
    }

    #[test]
    fn empirical_u_matches_direct_quadrature() {
        // F_n(s) and G_m^{-1} evaluated pointwise as an independent route.
        let xv = [0.3, -1.2, 2.2, 0.7, 0.7, 1.9];
        let x = s(&xv);
        let yv = [0.1, 0.5, 3.0, -0.4];
        let qg = empirical_quantile(&s(&yv));
        let n = xv.len() as f64;
        let fn_cdf = |t: f64| xv.iter().filter(|&&v| v <= t).count() as f64 / n;
        let g_inv = |p: f64| {
            if p <= 0.0 {
                qg.values()[0]
            } else {
                qg.evaluate(p).unwrap()
            }
        };
        for part in [Part::Plus, Part::Minus] {
            let u = UFunction::empirical(&x, &qg, part);
            for t in [-2.0, -0.3, 0.9, 2.5] {
                let f = |s: f64| {
                    let d = s - g_inv(fn_cdf(s));
                    match part {
                        Part::Plus => 2.0 * d.max(0.0),
                        _ => 2.0 * (-d).max(0.0),
                    }
                };
                // integrate piecewise between sample points to avoid the jumps
                let mut pts = vec![0.0, t];
                pts.extend(xv.iter().copied().filter(|v| (*v - 0.0) * (*v - t) < 0.0));
                pts.sort_by(f64::total_cmp);
                let mut q: f64 = pts
                    .windows(2)
                    .map(|w| integrate_adaptive(&f, w[0], w[1], 1e-13))
                    .sum();
                if t < 0.0 {
                    q = -q;
                }
                assert!(
                    (u.eval(t) - q).abs() < 1e-9,
                    "{part:?} t={t}: {} vs {q}",
                    u.eval(t)
                );
            }
        }
    }

    #[test]
    fn plug_in_requires_distinct_laws() {
        let x = s(&[1.0, 2.0, 3.0]);
        assert_eq!(plug_in_sigma(&x, &x.clone()), Err(Error::VarianceUndefined));
    }

    #[test]
    fn bootstrap_degenerate_and_deterministic() {
        let x = s(&[0.0; 20]);
        let y = s(&[1.0; 30]);
        let v = bootstrap_sigma(&x, &y, 50, 3).unwrap();
        assert_eq!(v.sigma_squared, 0.0);

        let x = s(&[0.1, 0.5, 0.9, 1.3, 2.0, -0.4, 0.2]);
        let y = s(&[0.3, 0.6, 1.1, 0.2, 0.8]);
        let a = bootstrap_sigma(&x, &y, 100, 9).unwrap();
        let b = bootstrap_sigma(&x, &y, 100, 9).unwrap();
        assert_eq!(a, b);
        assert!(a.sigma_squared > 0.0);
        assert!(bootstrap_sigma(&x, &y, 1, 9).is_err());
    }

    #[test]
    fn bootstrap_gives_up_on_identical_singletons() {
        let x = s(&[1.0]);
        assert!(matches!(
            bootstrap_sigma(&x, &x.clone(), 10, 0),
            Err(Error::Bootstrap(_))
        ));
    }

    fn variance(sigma: f64) -> VarianceEstimate {
        VarianceEstimate {
            sigma_squared: sigma * sigma,
            method: VarianceMethod::PlugIn,
            lambda_hat: 0.5,
            details: BTreeMap::new(),
        }
    }

    fn index(eps: f64) -> IndexReport {
        IndexReport {
            epsilon: eps,
            violation_integral: eps,
            w2_squared: 1.0,
            n: None,
            m: None,
        }
    }

    #[test]
    fn decision_arithmetic() {
        let r = decide(index(0.02), 1000, 1000, variance(0.1), 0.05, 0.05).unwrap();
        let root = 500f64.sqrt();
        assert!((r.statistic - root * -0.03).abs() < 1e-12);
        assert!((r.statistic + 0.670_820_393).abs() < 1e-8);
        assert!(r.reject);
        assert!((r.upper_bound - 0.027_356_3).abs() < 1e-6);
        assert!((r.upper_bound - (0.02 + 0.1 * 1.644_853_626_951_472_2 / root)).abs() < 1e-12);
        assert!(r.p_value < 0.05);

        let r = decide(index(0.05), 50, 80, variance(0.3), 0.05, 0.05).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!(!r.reject);
        assert!((r.p_value - 0.5).abs() < 1e-15);
    }

    #[test]
    fn degenerate_sigma() {
        let r = decide(index(0.0), 10, 10, variance(0.0), 0.05, 0.05).unwrap();
        assert!(r.degenerate && r.reject);
        assert_eq!((r.p_value, r.upper_bound), (0.0, 0.0));
        let r = decide(index(0.2), 10, 10, variance(0.0), 0.05, 0.05).unwrap();
        assert!(r.degenerate && !r.reject);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn test_validates_levels() {
        let x = s(&[0.0, 1.0]);
        let y = s(&[0.5, 2.0]);
        for (e0, a) in [(0.0, 0.05), (1.0, 0.05), (0.05, 0.0), (0.05, 1.0)] {
            let opts = TestOptions {
                epsilon_0: e0,
                alpha: a,
                ..TestOptions::default()
            };
            assert!(test_almost_dominance(&x, &y, &opts).is_err());
        }
        let opts = TestOptions::default();
        assert!(matches!(
            test_almost_dominance(&x, &x.clone(), &opts),
            Err(Error::IdenticalDistributions)
        ));
    }

    #[test]
    fn one_sample_uniform_shift() {
        // G^{-1}(F(s)) = s + 0.5 on the support, so v_-(t) = t and Var = 1/12.
        let g = UniformParams::new(0.5, 1.5).unwrap();
        let n = 20_000;
        let x = Sample::new((1..=n).map(|i| (i as f64 - 0.5) / n as f64).collect()).unwrap();
        let v = one_sample_sigma(&x, &g).unwrap();
        assert!((v.details["var_v_minus"] - 1.0 / 12.0).abs() < 1e-4);
        assert!((v.details["w2_squared"] - 0.25).abs() < 1e-6);
        let same = Sample::new((1..=n).map(|i| 0.5 + (i as f64 - 0.5) / n as f64).collect()).unwrap();
        assert!(one_sample_sigma(&same, &g).unwrap().details["w2_squared"] < 1e-8);
    }
}
