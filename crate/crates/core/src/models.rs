//! Analytic distributions, the normal family in particular.
//!
//! The index between two analytic laws is computed by quadrature of their
//! quantile difference over `(0, 1)`. For two normals the single point where
//! the quantile curves cross is known in closed form and is used to split the
//! positive-part integral, so the kink never sits inside a quadrature cell.

use rayon::prelude::*;

use crate::empirical::Sample;
use crate::error::{Error, Result};
use crate::order_distance::IndexReport;
use crate::quad::{integrate_unit_interval, integrate_unit_interval_floor};

pub const DEFAULT_TOL: f64 = 1e-8;

const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

/// A univariate law given by its distribution and quantile functions.
///
/// `quantile` is called on `[0, 1]`; at the ends it should return the limits
/// (possibly infinite).
pub trait Distribution: Sync {
    fn cdf(&self, x: f64) -> f64;
    fn quantile(&self, p: f64) -> f64;
}

impl<D: Distribution + ?Sized> Distribution for &D {
    fn cdf(&self, x: f64) -> f64 {
        (**self).cdf(x)
    }
    fn quantile(&self, p: f64) -> f64 {
        (**self).quantile(p)
    }
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / SQRT_2PI
}

/// Standard normal distribution function, `Φ(x) = erfc(-x/√2)/2`.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal quantile `Φ⁻¹(p)` for `p ∈ (0, 1)`.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain("probability", p));
    }
    Ok(std_quantile(p))
}

fn std_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    // 1 - p is exact for p >= 1/2; refine in the lower tail where Φ keeps
    // full relative precision.
    if p > 0.5 {
        return -lower_quantile(1.0 - p);
    }
    lower_quantile(p)
}

/// Acklam's rational approximation followed by one Halley step.
fn lower_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.024_25;

    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    let e = normal_cdf(x) - p;
    let u = e * SQRT_2PI * (0.5 * x * x).exp();
    x - u / (1.0 + 0.5 * x * u)
}

/// Parameters of `N(mu, sigma²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalParams {
    mu: f64,
    sigma: f64,
}

impl NormalParams {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::domain("normal mean", mu));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::domain("normal standard deviation", sigma));
        }
        Ok(Self { mu, sigma })
    }

    pub fn standard() -> Self {
        Self { mu: 0.0, sigma: 1.0 }
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

impl Distribution for NormalParams {
    fn cdf(&self, x: f64) -> f64 {
        normal_cdf((x - self.mu) / self.sigma)
    }

    fn quantile(&self, p: f64) -> f64 {
        self.mu + self.sigma * std_quantile(p)
    }
}

/// Uniform law on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformParams {
    lo: f64,
    hi: f64,
}

impl UniformParams {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::Config(format!("uniform bounds [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }
}

impl Distribution for UniformParams {
    fn cdf(&self, x: f64) -> f64 {
        ((x - self.lo) / (self.hi - self.lo)).clamp(0.0, 1.0)
    }

    fn quantile(&self, p: f64) -> f64 {
        self.lo + (self.hi - self.lo) * p.clamp(0.0, 1.0)
    }
}

/// A law given by a pair of closures.
pub struct FnDistribution<C, Q> {
    pub cdf: C,
    pub quantile: Q,
}

impl<C, Q> Distribution for FnDistribution<C, Q>
where
    C: Fn(f64) -> f64 + Sync,
    Q: Fn(f64) -> f64 + Sync,
{
    fn cdf(&self, x: f64) -> f64 {
        (self.cdf)(x)
    }
    fn quantile(&self, p: f64) -> f64 {
        (self.quantile)(p)
    }
}

/// Finds sign changes of `F⁻¹ - G⁻¹` on a grid that is geometric toward both
/// ends of `(0, 1)`, and refines each by bisection. Crossings that come in
/// pairs inside one grid cell are not detected.
fn locate_crossings<F, G>(f: &F, g: &G) -> Vec<f64>
where
    F: Distribution + ?Sized,
    G: Distribution + ?Sized,
{
    let d = |t: f64| f.quantile(t) - g.quantile(t);
    let mut grid: Vec<f64> = Vec::new();
    for k in (2..=50).rev() {
        grid.push(2f64.powi(-k));
    }
    for i in 1..256 {
        grid.push(0.25 + 0.5 * i as f64 / 256.0);
    }
    for k in 2..=50 {
        grid.push(1.0 - 2f64.powi(-k));
    }
    let mut roots = Vec::new();
    for w in grid.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        let (da, db) = (d(a), d(b));
        if !(da.is_finite() && db.is_finite()) || da.signum() == db.signum() || da == 0.0 || db == 0.0 {
            continue;
        }
        let sa = da.signum();
        for _ in 0..80 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if d(m).signum() == sa {
                a = m;
            } else {
                b = m;
            }
        }
        roots.push(0.5 * (a + b));
    }
    roots
}

fn index_from_parts<F, G>(f: &F, g: &G, crossings: &[f64], tol: f64) -> Result<IndexReport>
where
    F: Distribution + ?Sized,
    G: Distribution + ?Sized,
{
    if !(tol > 0.0) {
        return Err(Error::domain("tolerance", tol));
    }
    // W2² has a smooth integrand; the violation part only needs accuracy
    // relative to it, not to itself.
    let d = |t: f64| f.quantile(t) - g.quantile(t);
    let total = integrate_unit_interval(|t| d(t).powi(2), crossings, tol);
    let pos =
        integrate_unit_interval_floor(|t| d(t).max(0.0).powi(2), crossings, tol, tol * total).min(total);
    if !(total > 0.0) {
        return Err(Error::IdenticalDistributions);
    }
    Ok(IndexReport {
        epsilon: pos / total,
        violation_integral: pos,
        w2_squared: total,
        n: None,
        m: None,
    })
}

/// Violation index between two analytic laws by quadrature.
pub fn epsilon_analytic<F, G>(f: &F, g: &G, tol: f64) -> Result<IndexReport>
where
    F: Distribution + ?Sized,
    G: Distribution + ?Sized,
{
    let crossings = locate_crossings(f, g);
    index_from_parts(f, g, &crossings, tol)
}

/// Violation index between two normals, split at the closed-form crossing.
pub fn epsilon_normal(f: NormalParams, g: NormalParams, tol: f64) -> Result<IndexReport> {
    let mut crossings = Vec::new();
    if f.sigma != g.sigma {
        // mu_f + sigma_f z = mu_g + sigma_g z
        let z = (g.mu - f.mu) / (f.sigma - g.sigma);
        let t = normal_cdf(z);
        if t > 0.0 && t < 1.0 {
            crossings.push(t);
        }
    }
    index_from_parts(&f, &g, &crossings, tol)
}

/// `W2²` between two analytic laws by quadrature.
pub fn w2_squared_analytic<F, G>(f: &F, g: &G, tol: f64) -> f64
where
    F: Distribution + ?Sized,
    G: Distribution + ?Sized,
{
    integrate_unit_interval(
        |t| {
            let d = f.quantile(t) - g.quantile(t);
            d * d
        },
        &[],
        tol,
    )
}

/// One point of the `(mu, sigma)` contour grid of `ε(N(0,1), N(mu, sigma²))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourPoint {
    pub mu: f64,
    pub sigma: f64,
    /// `None` at `(0, 1)`, where the index is undefined.
    pub epsilon: Option<f64>,
}

fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    (0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect()
}

/// Evaluates the normal-family index on a `resolution × resolution` grid.
/// Rows are ordered by `mu` then `sigma`, independent of scheduling.
pub fn contour_grid(
    mu_range: (f64, f64),
    sigma_range: (f64, f64),
    resolution: usize,
) -> Result<Vec<ContourPoint>> {
    if resolution == 0 {
        return Err(Error::Config("resolution must be at least 1".into()));
    }
    if !(sigma_range.0 > 0.0 && sigma_range.1 >= sigma_range.0) {
        return Err(Error::Config(format!(
            "sigma range [{}, {}] must be positive and ordered",
            sigma_range.0, sigma_range.1
        )));
    }
    if !(mu_range.0.is_finite() && mu_range.1.is_finite() && mu_range.1 >= mu_range.0) {
        return Err(Error::Config(format!(
            "mu range [{}, {}] must be finite and ordered",
            mu_range.0, mu_range.1
        )));
    }
    let mus = linspace(mu_range.0, mu_range.1, resolution);
    let sigmas = linspace(sigma_range.0, sigma_range.1, resolution);
    let cells: Vec<(f64, f64)> = mus
        .iter()
        .flat_map(|&mu| sigmas.iter().map(move |&s| (mu, s)))
        .collect();
    let std = NormalParams::standard();
    Ok(cells
        .par_iter()
        .map(|&(mu, sigma)| ContourPoint {
            mu,
            sigma,
            epsilon: NormalParams::new(mu, sigma)
                .and_then(|g| epsilon_normal(std, g, DEFAULT_TOL))
                .ok()
                .map(|r| r.epsilon),
        })
        .collect())
}

/// Maximum-likelihood normal fit (standard deviation with divisor `n`).
pub fn fit_normal_ml(sample: &Sample) -> Result<NormalParams> {
    if sample.len() < 2 {
        return Err(Error::ZeroVariance);
    }
    let mean = sample.mean();
    let var = sample.values().iter().map(|x| (x - mean).powi(2)).sum::<f64>() / sample.len() as f64;
    if !(var > 0.0) {
        return Err(Error::ZeroVariance);
    }
    NormalParams::new(mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bisection_quantile(p: f64) -> f64 {
        if p > 0.5 {
            // 1 - p is exact here; the upper cdf tail is not resolvable directly.
            return -bisection_quantile(1.0 - p);
        }
        let (mut lo, mut hi) = (-40.0, 40.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if normal_cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn quantile_known_values() {
        assert_eq!(normal_quantile(0.5).unwrap(), 0.0);
        let q = normal_quantile(0.975).unwrap();
        assert!((q - bisection_quantile(0.975)).abs() < 1e-12);
        assert!((q - 1.959_964).abs() < 1e-6);
        assert!(normal_quantile(0.0).is_err());
        assert!(normal_quantile(1.0).is_err());
        assert!(normal_quantile(f64::NAN).is_err());
    }

    #[test]
    fn quantile_inverts_cdf_on_grid() {
        for i in 1..10_000 {
            let p = i as f64 / 10_000.0;
            let x = normal_quantile(p).unwrap();
            assert!((normal_cdf(x) - p).abs() < 1e-9, "p={p}");
        }
        for p in [1e-300, 1e-100, 1e-20, 1e-10, 1.0 - 1e-10, 1.0 - 1e-15] {
            let x = normal_quantile(p).unwrap();
            assert!((x - bisection_quantile(p)).abs() < 1e-9, "p={p}");
        }
    }

    #[test]
    fn cdf_reference_values() {
        assert!((normal_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-15);
        assert!((normal_cdf(-3.0) - 0.001_349_898_031_630_094_6).abs() < 1e-16);
    }

    #[test]
    fn ml_fit() {
        let p = fit_normal_ml(&Sample::new(vec![0.0, 2.0]).unwrap()).unwrap();
        assert_eq!((p.mu(), p.sigma()), (1.0, 1.0));
        assert_eq!(
            fit_normal_ml(&Sample::new(vec![3.0, 3.0]).unwrap()),
            Err(Error::ZeroVariance)
        );
        assert!(fit_normal_ml(&Sample::new(vec![3.0]).unwrap()).is_err());
    }

    #[test]
    fn normal_params_validate() {
        assert!(NormalParams::new(0.0, 0.0).is_err());
        assert!(NormalParams::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn identical_normals_have_no_index() {
        let s = NormalParams::standard();
        assert_eq!(
            epsilon_normal(s, s, DEFAULT_TOL),
            Err(Error::IdenticalDistributions)
        );
    }

    #[test]
    fn generic_and_normal_paths_agree() {
        let f = NormalParams::standard();
        let g = NormalParams::new(0.455, 1.5).unwrap();
        let a = epsilon_analytic(&f, &g, 1e-10).unwrap().epsilon;
        let b = epsilon_normal(f, g, 1e-10).unwrap().epsilon;
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn contour_cardinality_and_order() {
        let rows = contour_grid((0.0, 1.5), (0.5, 2.5), 5).unwrap();
        assert_eq!(rows.len(), 25);
        assert_eq!((rows[0].mu, rows[0].sigma), (0.0, 0.5));
        assert_eq!((rows[1].mu, rows[1].sigma), (0.0, 1.0));
        assert_eq!(rows[1].epsilon, None);
        assert!(contour_grid((0.0, 1.0), (0.0, 1.0), 3).is_err());
    }
}
