//! Seeded Monte Carlo studies under the normal model.
//!
//! Replication `r` draws its `X` sample from stream `(seed, r, 0)`, its `Y`
//! sample from `(seed, r, 1)` and seeds its bootstrap with `(seed, r, 2)`.
//! Replications run in parallel and are reduced by counting, so a report is a
//! pure function of its configuration.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::empirical::Sample;
use crate::error::{Error, Result};
use crate::inference::{
    check_level, decide, test_almost_dominance, TestOptions, TestResult, VarianceEstimate, VarianceMethod,
};
use crate::models::{epsilon_normal, fit_normal_ml, normal_quantile, NormalParams};
use crate::rng::{derive_seed, Stream};

/// Quadrature tolerance for the index between fitted normals.
const PARAMETRIC_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Nonparametric,
    Parametric,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Nonparametric => "nonparametric",
            Mode::Parametric => "parametric",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub model_f: NormalParams,
    pub model_g: NormalParams,
    pub n: usize,
    pub m: usize,
    pub epsilon_0: f64,
    pub alpha: f64,
    pub replications: usize,
    pub variance_method: VarianceMethod,
    pub mode: Mode,
    pub master_seed: u64,
}

impl SimConfig {
    /// `F = N(0,1)`, `G = N(mu, sigma²)`, bootstrap variance with 500 replicates.
    pub fn normal_cell(mu: f64, sigma: f64, n: usize, epsilon_0: f64) -> Result<Self> {
        Ok(Self {
            model_f: NormalParams::standard(),
            model_g: NormalParams::new(mu, sigma)?,
            n,
            m: n,
            epsilon_0,
            alpha: 0.05,
            replications: 1000,
            variance_method: VarianceMethod::default(),
            mode: Mode::Nonparametric,
            master_seed: 0,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if self.n == 0 || self.m == 0 {
            return Err(Error::Config("sample sizes must be at least 1".into()));
        }
        check_level("alpha", self.alpha)?;
        check_level("epsilon_0", self.epsilon_0)?;
        if let VarianceMethod::Bootstrap { replicates } = self.variance_method {
            if replicates < 2 {
                return Err(Error::Config("bootstrap_b must be at least 2".into()));
            }
        }
        if self.mode == Mode::Parametric && self.bootstrap_b() == 0 {
            return Err(Error::Config(
                "parametric mode needs variance_method = bootstrap".into(),
            ));
        }
        if self.mode == Mode::Parametric && (self.n < 2 || self.m < 2) {
            return Err(Error::Config("parametric mode needs n, m >= 2".into()));
        }
        Ok(())
    }

    fn bootstrap_b(&self) -> usize {
        match self.variance_method {
            VarianceMethod::Bootstrap { replicates } => replicates,
            VarianceMethod::PlugIn | VarianceMethod::DeltaMethod => 0,
        }
    }

    /// Parses `key = value` lines; `#` starts a comment. `mu_g` and `sigma_g`
    /// are required, everything else has a default.
    pub fn parse(text: &str) -> Result<Self> {
        let mut mu_f = 0.0;
        let mut sigma_f = 1.0;
        let mut mu_g = None;
        let mut sigma_g = None;
        let mut n = 100;
        let mut m = None;
        let mut epsilon_0 = 0.05;
        let mut alpha = 0.05;
        let mut replications = 1000;
        let mut method = "bootstrap".to_string();
        let mut bootstrap_b = crate::inference::DEFAULT_BOOTSTRAP_REPLICATES;
        let mut mode = Mode::Nonparametric;
        let mut master_seed = 0;

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .or_else(|| line.split_once(':'))
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let key = key.trim().to_ascii_lowercase();
            let value = value.trim();
            let bad = |what: &str| Error::Config(format!("line {}: invalid {what} '{value}'", lineno + 1));
            let real = || value.parse::<f64>().map_err(|_| bad(&key));
            let int = || value.parse::<usize>().map_err(|_| bad(&key));
            match key.as_str() {
                "mu_f" => mu_f = real()?,
                "sigma_f" => sigma_f = real()?,
                "mu_g" => mu_g = Some(real()?),
                "sigma_g" => sigma_g = Some(real()?),
                "n" => n = int()?,
                "m" => m = Some(int()?),
                "epsilon_0" | "epsilon0" => epsilon_0 = real()?,
                "alpha" => alpha = real()?,
                "replications" => replications = int()?,
                "variance_method" | "method" => method = value.to_ascii_lowercase(),
                "bootstrap_b" => bootstrap_b = int()?,
                "mode" => {
                    mode = match value.to_ascii_lowercase().as_str() {
                        "nonparametric" => Mode::Nonparametric,
                        "parametric" => Mode::Parametric,
                        _ => return Err(bad("mode")),
                    }
                }
                "master_seed" | "seed" => master_seed = value.parse::<u64>().map_err(|_| bad("seed"))?,
                other => {
                    return Err(Error::Config(format!(
                        "line {}: unknown key '{other}'",
                        lineno + 1
                    )))
                }
            }
        }
        let variance_method = match method.as_str() {
            "bootstrap" => VarianceMethod::Bootstrap {
                replicates: bootstrap_b,
            },
            "plug-in" | "plugin" | "plug_in" => VarianceMethod::PlugIn,
            "delta" => VarianceMethod::DeltaMethod,
            other => return Err(Error::Config(format!("unknown variance_method '{other}'"))),
        };
        let model_g = NormalParams::new(
            mu_g.ok_or_else(|| Error::Config("missing mu_g".into()))?,
            sigma_g.ok_or_else(|| Error::Config("missing sigma_g".into()))?,
        )?;
        let cfg = SimConfig {
            model_f: NormalParams::new(mu_f, sigma_f)?,
            model_g,
            n,
            m: m.unwrap_or(n),
            epsilon_0,
            alpha,
            replications,
            variance_method,
            mode,
            master_seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Inverse of [`SimConfig::parse`].
    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.columns() {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    fn columns(&self) -> Vec<(&'static str, String)> {
        vec![
            ("mode", self.mode.name().to_string()),
            ("variance_method", self.variance_method.name().to_string()),
            ("mu_f", self.model_f.mu().to_string()),
            ("sigma_f", self.model_f.sigma().to_string()),
            ("mu_g", self.model_g.mu().to_string()),
            ("sigma_g", self.model_g.sigma().to_string()),
            ("n", self.n.to_string()),
            ("m", self.m.to_string()),
            ("epsilon_0", self.epsilon_0.to_string()),
            ("alpha", self.alpha.to_string()),
            ("replications", self.replications.to_string()),
            ("bootstrap_b", self.bootstrap_b().to_string()),
            ("master_seed", self.master_seed.to_string()),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Study {
    Rejection,
    Coverage,
}

impl Study {
    pub fn name(&self) -> &'static str {
        match self {
            Study::Rejection => "rejection",
            Study::Coverage => "coverage",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub study: Study,
    /// Rejection rate or coverage, over completed replications.
    pub rate: f64,
    pub replications: usize,
    /// Replications that returned an error; they count toward neither outcome.
    pub failures: usize,
    /// Rejections (or covering bounds).
    pub hits: usize,
    /// `√(rate (1 - rate) / completed)`
    pub binomial_se: f64,
    /// Population index for the configured pair, when the study needs it.
    pub true_epsilon: Option<f64>,
    pub config: SimConfig,
}

impl SimReport {
    pub fn completed(&self) -> usize {
        self.replications - self.failures
    }

    pub fn csv_header() -> String {
        let cols: Vec<&str> = std::iter::once("study")
            .chain(
                SimConfig::normal_cell(0.0, 1.0, 1, 0.5)
                    .expect("valid")
                    .columns()
                    .into_iter()
                    .map(|(k, _)| k),
            )
            .chain(["true_epsilon", "rate", "se", "hits", "failures"])
            .collect();
        cols.join(",")
    }

    pub fn csv_row(&self) -> String {
        let mut cols = vec![self.study.name().to_string()];
        cols.extend(self.config.columns().into_iter().map(|(_, v)| v));
        cols.push(self.true_epsilon.map(|e| e.to_string()).unwrap_or_default());
        cols.push(self.rate.to_string());
        cols.push(self.binomial_se.to_string());
        cols.push(self.hits.to_string());
        cols.push(self.failures.to_string());
        cols.join(",")
    }
}

/// `count` draws from `N(mu, sigma²)` by inverse transform of the stream's uniforms.
pub fn normal_sampler(params: NormalParams, count: usize, stream: &mut Stream) -> Result<Sample> {
    if count == 0 {
        return Err(Error::EmptySample);
    }
    let values = (0..count)
        .map(|_| {
            let z = normal_quantile(stream.uniform()).expect("open-interval uniform");
            params.mu() + params.sigma() * z
        })
        .collect();
    Sample::new(values)
}

/// Benchmark test on normal fits: `ε̂` between the ML-fitted normals, `σ̂`
/// from a parametric bootstrap that redraws from the fits and refits.
pub fn parametric_test(
    x: &Sample,
    y: &Sample,
    epsilon_0: f64,
    alpha: f64,
    replicates: usize,
    seed: u64,
) -> Result<TestResult> {
    check_level("epsilon_0", epsilon_0)?;
    check_level("alpha", alpha)?;
    if replicates < 2 {
        return Err(Error::Config("bootstrap needs at least 2 replicates".into()));
    }
    let fx = fit_normal_ml(x)?;
    let fy = fit_normal_ml(y)?;
    let index = epsilon_normal(fx, fy, PARAMETRIC_TOL)?;
    let (n, m) = (x.len(), y.len());
    let scale = ((n * m) as f64 / (n + m) as f64).sqrt();
    let stats: Vec<f64> = (0..replicates as u64)
        .into_par_iter()
        .map(|b| -> Result<f64> {
            let xs = normal_sampler(fx, n, &mut Stream::new(seed, &[b, 0]))?;
            let ys = normal_sampler(fy, m, &mut Stream::new(seed, &[b, 1]))?;
            let e = epsilon_normal(fit_normal_ml(&xs)?, fit_normal_ml(&ys)?, PARAMETRIC_TOL)?;
            Ok(scale * e.epsilon)
        })
        .collect::<Result<_>>()?;
    let b = stats.len() as f64;
    let mean = stats.iter().sum::<f64>() / b;
    let var = stats.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (b - 1.0);
    let variance = VarianceEstimate {
        sigma_squared: var,
        method: VarianceMethod::Bootstrap { replicates },
        lambda_hat: n as f64 / (n + m) as f64,
        details: [("replicates", b), ("mean_scaled_epsilon", mean)]
            .into_iter()
            .collect(),
    };
    decide(index, n, m, variance, epsilon_0, alpha)
}

/// Runs the configured test on one replication's data.
pub fn replicate_test(cfg: &SimConfig, r: u64) -> Result<TestResult> {
    let seed = cfg.master_seed;
    let x = normal_sampler(cfg.model_f, cfg.n, &mut Stream::new(seed, &[r, 0]))?;
    let y = normal_sampler(cfg.model_g, cfg.m, &mut Stream::new(seed, &[r, 1]))?;
    let test_seed = derive_seed(seed, &[r, 2]);
    match cfg.mode {
        Mode::Nonparametric => {
            let opts = TestOptions {
                epsilon_0: cfg.epsilon_0,
                alpha: cfg.alpha,
                method: cfg.variance_method,
                seed: test_seed,
            };
            test_almost_dominance(&x, &y, &opts)
        }
        Mode::Parametric => parametric_test(&x, &y, cfg.epsilon_0, cfg.alpha, cfg.bootstrap_b(), test_seed),
    }
}

fn run_study<P>(cfg: &SimConfig, study: Study, true_epsilon: Option<f64>, hit: P) -> Result<SimReport>
where
    P: Fn(&TestResult) -> bool + Sync,
{
    cfg.validate()?;
    let outcomes: Vec<Option<bool>> = (0..cfg.replications as u64)
        .into_par_iter()
        .map(|r| replicate_test(cfg, r).ok().map(|t| hit(&t)))
        .collect();
    let failures = outcomes.iter().filter(|o| o.is_none()).count();
    let hits = outcomes.iter().filter(|o| **o == Some(true)).count();
    let completed = cfg.replications - failures;
    let (rate, binomial_se) = if completed == 0 {
        (f64::NAN, f64::NAN)
    } else {
        let p = hits as f64 / completed as f64;
        (p, (p * (1.0 - p) / completed as f64).sqrt())
    };
    Ok(SimReport {
        study,
        rate,
        replications: cfg.replications,
        failures,
        hits,
        binomial_se,
        true_epsilon,
        config: *cfg,
    })
}

/// Fraction of replications in which the test rejects `H0: ε ≥ ε0`.
pub fn run_rejection_study(cfg: &SimConfig) -> Result<SimReport> {
    run_study(cfg, Study::Rejection, None, |t| t.reject)
}

/// Fraction of replications whose upper confidence bound covers the true index.
/// `epsilon_0` plays no role here beyond being echoed.
pub fn run_coverage_study(cfg: &SimConfig) -> Result<SimReport> {
    cfg.validate()?;
    let truth = epsilon_normal(cfg.model_f, cfg.model_g, 1e-10)?.epsilon;
    run_study(cfg, Study::Coverage, Some(truth), move |t| truth <= t.upper_bound)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampler_is_deterministic_and_linear() {
        let std = NormalParams::standard();
        let p = NormalParams::new(2.0, 3.0).unwrap();
        let a = normal_sampler(std, 50, &mut Stream::new(4, &[1])).unwrap();
        let b = normal_sampler(std, 50, &mut Stream::new(4, &[1])).unwrap();
        assert_eq!(a, b);
        let c = normal_sampler(p, 50, &mut Stream::new(4, &[1])).unwrap();
        for (z, x) in a.values().iter().zip(c.values()) {
            assert!((2.0 + 3.0 * z - x).abs() < 1e-12);
        }
        assert!(normal_sampler(std, 0, &mut Stream::new(0, &[])).is_err());
    }

    #[test]
    fn config_round_trip_and_errors() {
        let text = "# cell\nmu_g = 0.697\nsigma_g = 1.5\nn = 1000\nepsilon_0 = 0.05\nreplications = 500\nmaster_seed = 11\n";
        let cfg = SimConfig::parse(text).unwrap();
        assert_eq!(cfg.m, 1000);
        assert_eq!(cfg.variance_method, VarianceMethod::Bootstrap { replicates: 500 });
        assert_eq!(SimConfig::parse(&cfg.to_key_value()).unwrap(), cfg);

        assert!(SimConfig::parse("sigma_g = 1").is_err());
        assert!(SimConfig::parse("mu_g = 0\nsigma_g = 1\nbogus = 3").is_err());
        assert!(SimConfig::parse("mu_g = 0\nsigma_g = 1\nalpha = 1.5").is_err());
        assert!(SimConfig::parse("mu_g = 0\nsigma_g = 1\nreplications = 0").is_err());
        assert!(SimConfig::parse("mu_g = 0\nsigma_g = -1").is_err());
        assert!(SimConfig::parse("mu_g = 0\nsigma_g = 1\nmode = parametric\nmethod = plug-in").is_err());
    }

    #[test]
    fn report_is_deterministic_and_consistent() {
        let mut cfg = SimConfig::normal_cell(0.455, 1.5, 60, 0.1).unwrap();
        cfg.replications = 40;
        cfg.variance_method = VarianceMethod::Bootstrap { replicates: 40 };
        cfg.master_seed = 5;
        let a = run_rejection_study(&cfg).unwrap();
        let b = run_rejection_study(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.csv_row(), b.csv_row());
        assert!(a.rate >= 0.0 && a.rate <= 1.0);
        assert!(a.hits <= a.replications - a.failures);
        let expect = (a.rate * (1.0 - a.rate) / a.completed() as f64).sqrt();
        assert_eq!(a.binomial_se, expect);
        assert_eq!(
            SimReport::csv_header().split(',').count(),
            a.csv_row().split(',').count()
        );
    }

    #[test]
    fn coverage_ignores_epsilon_0() {
        let mut cfg = SimConfig::normal_cell(0.455, 1.5, 80, 0.3).unwrap();
        cfg.replications = 30;
        cfg.variance_method = VarianceMethod::PlugIn;
        let a = run_coverage_study(&cfg).unwrap();
        cfg.epsilon_0 = 0.9;
        let b = run_coverage_study(&cfg).unwrap();
        assert_eq!((a.hits, a.rate), (b.hits, b.rate));
        assert_eq!(b.config.epsilon_0, 0.9);
        assert!((a.true_epsilon.unwrap() - 0.05).abs() < 0.003);
    }

    #[test]
    fn parametric_mode_runs() {
        let mut cfg = SimConfig::normal_cell(1.395, 2.0, 100, 0.05).unwrap();
        cfg.mode = Mode::Parametric;
        cfg.replications = 8;
        cfg.variance_method = VarianceMethod::Bootstrap { replicates: 30 };
        let r = run_rejection_study(&cfg).unwrap();
        assert_eq!(r.failures, 0);
        assert!(r.rate >= 0.0 && r.rate <= 1.0);
    }
}
