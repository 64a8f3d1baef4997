use almostdom::{IndexReport, OptimalOrderedPair, SimReport, StepQuantile, TestResult, VarianceEstimate};
use serde::Serialize;
use serde_json::{json, Map, Value};

pub const SCHEMA_VERSION: &str = "1";

/// Envelope of every JSON emission. Floats are written in shortest
/// round-trip form, so parsing recovers them bit for bit.
#[derive(Debug, Serialize)]
pub struct RunOutput {
    pub schema_version: &'static str,
    pub command: &'static str,
    pub inputs: Value,
    pub results: Value,
    pub warnings: Vec<String>,
}

impl RunOutput {
    pub fn new(command: &'static str, inputs: Value, results: Value, warnings: Vec<String>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command,
            inputs,
            results,
            warnings,
        }
    }
}

pub fn index(r: &IndexReport) -> Value {
    json!({
        "epsilon": r.epsilon,
        "violation_integral": r.violation_integral,
        "w2_squared": r.w2_squared,
        "n": r.n,
        "m": r.m,
    })
}

pub fn variance(v: &VarianceEstimate) -> Value {
    let details: Map<String, Value> = v.details.iter().map(|(k, x)| (k.to_string(), json!(x))).collect();
    json!({
        "method": v.method.name(),
        "sigma_squared": v.sigma_squared,
        "sigma": v.sigma(),
        "lambda_hat": v.lambda_hat,
        "details": details,
    })
}

pub fn test(t: &TestResult) -> Value {
    json!({
        "epsilon_hat": t.epsilon_hat,
        "epsilon_0": t.epsilon_0,
        "statistic": t.statistic,
        "sigma_hat": t.sigma_hat,
        "alpha": t.alpha,
        "reject": t.reject,
        "p_value": t.p_value,
        "upper_bound": t.upper_bound,
        "degenerate": t.degenerate,
        "index": index(&t.index),
        "variance": variance(&t.variance),
    })
}

fn quantile(q: &StepQuantile) -> Value {
    json!({ "breakpoints": q.breakpoints(), "values": q.values() })
}

pub fn pair(p: &OptimalOrderedPair) -> Value {
    json!({
        "distance": p.distance,
        "lower": quantile(&p.lower),
        "upper": quantile(&p.upper),
    })
}

pub fn simulation(r: &SimReport) -> Value {
    let c = &r.config;
    json!({
        "study": r.study.name(),
        "rate": r.rate,
        "binomial_se": r.binomial_se,
        "replications": r.replications,
        "completed": r.completed(),
        "hits": r.hits,
        "failures": r.failures,
        "true_epsilon": r.true_epsilon,
        "config": {
            "mode": c.mode.name(),
            "variance_method": c.variance_method.name(),
            "mu_f": c.model_f.mu(),
            "sigma_f": c.model_f.sigma(),
            "mu_g": c.model_g.mu(),
            "sigma_g": c.model_g.sigma(),
            "n": c.n,
            "m": c.m,
            "epsilon_0": c.epsilon_0,
            "alpha": c.alpha,
            "master_seed": c.master_seed,
        },
    })
}
