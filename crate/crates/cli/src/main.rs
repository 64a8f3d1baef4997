mod io;
mod report;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use almostdom::inference::{TestOptions, VarianceMethod, DEFAULT_BOOTSTRAP_REPLICATES};
use almostdom::models::contour_grid;
use almostdom::order_distance::DEFAULT_TRIM_TOL;
use almostdom::simlab::{run_coverage_study, run_rejection_study, SimConfig, SimReport};
use almostdom::{
    empirical_quantile, epsilon_index, is_stochastically_dominated, minimal_trim_for_order,
    optimal_ordered_pair, test_almost_dominance, Sample, TrimLevel,
};
use anyhow::{Context, Result};
use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::report::RunOutput;

/// Almost stochastic dominance through the Wasserstein violation index.
#[derive(Debug, Parser)]
#[command(name = "almostdom", version)]
struct Cli {
    /// Seed for every random choice (bootstrap, simulation overrides).
    #[arg(long, global = true, env = "ALMOSTDOM_SEED")]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    Bootstrap,
    #[value(name = "plug-in")]
    PlugIn,
    Delta,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Violation index of X against Y.
    Index { x: PathBuf, y: PathBuf },
    /// Test H0: eps >= eps0 against Ha: eps < eps0.
    Test {
        x: PathBuf,
        y: PathBuf,
        #[arg(long = "epsilon0", default_value_t = 0.05)]
        epsilon_0: f64,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, value_enum, default_value_t = Method::Bootstrap)]
        method: Method,
        #[arg(long = "bootstrap-B", default_value_t = DEFAULT_BOOTSTRAP_REPLICATES)]
        bootstrap_b: usize,
    },
    /// Distance to the order cone after trimming, or the minimal trimming level.
    #[command(group(ArgGroup::new("mode").required(true).args(["pi", "solve"])))]
    Trim {
        x: PathBuf,
        y: PathBuf,
        #[arg(long)]
        pi: Option<f64>,
        #[arg(long)]
        solve: bool,
        #[arg(long, default_value_t = DEFAULT_TRIM_TOL, requires = "solve")]
        tol: f64,
    },
    /// Index of N(mu, sigma^2) against N(0, 1) over a grid, written as CSV.
    Contour {
        #[arg(long, default_value_t = 0.0)]
        mu_min: f64,
        #[arg(long, default_value_t = 1.5)]
        mu_max: f64,
        #[arg(long, default_value_t = 0.5)]
        sigma_min: f64,
        #[arg(long, default_value_t = 2.5)]
        sigma_max: f64,
        #[arg(long, default_value_t = 50)]
        resolution: usize,
        #[arg(long)]
        output: PathBuf,
    },
    /// Rejection-rate study from a key = value configuration file.
    Simulate {
        config: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Coverage of the upper confidence bound, same configuration format.
    Coverage {
        config: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            let text = serde_json::to_string_pretty(&out).expect("JSON values serialize");
            // A closed pipe downstream (`| head`) is not our failure.
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<RunOutput> {
    let seed = cli.seed;
    match cli.command {
        Command::Index { x, y } => cmd_index(&x, &y),
        Command::Test {
            x,
            y,
            epsilon_0,
            alpha,
            method,
            bootstrap_b,
        } => {
            let method = match method {
                Method::Bootstrap => VarianceMethod::Bootstrap {
                    replicates: bootstrap_b,
                },
                Method::PlugIn => VarianceMethod::PlugIn,
                Method::Delta => VarianceMethod::DeltaMethod,
            };
            let opts = TestOptions {
                epsilon_0,
                alpha,
                method,
                seed: seed.unwrap_or(0),
            };
            cmd_test(&x, &y, &opts)
        }
        Command::Trim { x, y, pi, solve, tol } => cmd_trim(&x, &y, pi, solve, tol),
        Command::Contour {
            mu_min,
            mu_max,
            sigma_min,
            sigma_max,
            resolution,
            output,
        } => cmd_contour((mu_min, mu_max), (sigma_min, sigma_max), resolution, &output),
        Command::Simulate { config, output } => cmd_study("simulate", &config, &output, seed),
        Command::Coverage { config, output } => cmd_study("coverage", &config, &output, seed),
    }
}

fn load_pair(x: &Path, y: &Path) -> Result<(Sample, Sample)> {
    Ok((io::read_sample(x)?, io::read_sample(y)?))
}

fn pair_inputs(x: &Path, y: &Path, sx: &Sample, sy: &Sample) -> serde_json::Value {
    json!({ "x": x.display().to_string(), "y": y.display().to_string(), "n": sx.len(), "m": sy.len() })
}

fn cmd_index(x: &Path, y: &Path) -> Result<RunOutput> {
    let (sx, sy) = load_pair(x, y)?;
    let r = epsilon_index(&empirical_quantile(&sx), &empirical_quantile(&sy))?;
    Ok(RunOutput::new(
        "index",
        pair_inputs(x, y, &sx, &sy),
        report::index(&r),
        Vec::new(),
    ))
}

fn cmd_test(x: &Path, y: &Path, opts: &TestOptions) -> Result<RunOutput> {
    let (sx, sy) = load_pair(x, y)?;
    let t = test_almost_dominance(&sx, &sy, opts)?;
    let mut warnings = Vec::new();
    if t.degenerate {
        warnings.push("sigma_hat is 0; the decision reduces to epsilon_hat < epsilon_0".to_string());
    }
    if opts.method == VarianceMethod::PlugIn {
        warnings.push("plug-in variance is not scale-invariant; prefer bootstrap or delta".to_string());
    }
    if sx.len().min(sy.len()) < 30 {
        warnings.push("small samples: the normal approximation may be poor".to_string());
    }
    let mut inputs = pair_inputs(x, y, &sx, &sy);
    inputs["epsilon_0"] = json!(opts.epsilon_0);
    inputs["alpha"] = json!(opts.alpha);
    inputs["method"] = json!(opts.method.name());
    if let VarianceMethod::Bootstrap { replicates } = opts.method {
        inputs["bootstrap_b"] = json!(replicates);
    }
    inputs["seed"] = json!(opts.seed);
    Ok(RunOutput::new("test", inputs, report::test(&t), warnings))
}

fn cmd_trim(x: &Path, y: &Path, pi: Option<f64>, solve: bool, tol: f64) -> Result<RunOutput> {
    let (sx, sy) = load_pair(x, y)?;
    let (qx, qy) = (empirical_quantile(&sx), empirical_quantile(&sy));
    let mut inputs = pair_inputs(x, y, &sx, &sy);
    let mut warnings = Vec::new();
    let results = if solve {
        inputs["tol"] = json!(tol);
        let t = minimal_trim_for_order(&qx, &qy, tol)?;
        if t.no_finite_trim {
            warnings.push("no trimming level below 1 removes the violation".to_string());
        }
        json!({ "pi": t.pi, "no_finite_trim": t.no_finite_trim, "already_ordered": is_stochastically_dominated(&qx, &qy) })
    } else {
        let pi = pi.expect("clap enforces --pi or --solve");
        inputs["pi"] = json!(pi);
        let pair = optimal_ordered_pair(&qx, &qy, TrimLevel::new(pi)?);
        report::pair(&pair)
    };
    Ok(RunOutput::new("trim", inputs, results, warnings))
}

fn cmd_contour(mu: (f64, f64), sigma: (f64, f64), resolution: usize, output: &Path) -> Result<RunOutput> {
    let grid = contour_grid(mu, sigma, resolution)?;
    let mut csv = String::from("mu,sigma,epsilon\n");
    let mut undefined = 0;
    for p in &grid {
        let e = p.epsilon.map(io::sig6).unwrap_or_else(|| {
            undefined += 1;
            String::new()
        });
        let _ = writeln!(csv, "{},{},{}", io::sig6(p.mu), io::sig6(p.sigma), e);
    }
    io::write_text(output, &csv)?;
    let warnings = if undefined > 0 {
        vec![format!(
            "{undefined} grid point(s) coincide with N(0,1); epsilon left empty"
        )]
    } else {
        Vec::new()
    };
    let inputs = json!({
        "mu_range": [mu.0, mu.1],
        "sigma_range": [sigma.0, sigma.1],
        "resolution": resolution,
    });
    let results = json!({ "output": output.display().to_string(), "rows": grid.len() });
    Ok(RunOutput::new("contour", inputs, results, warnings))
}

fn cmd_study(command: &'static str, config: &Path, output: &Path, seed: Option<u64>) -> Result<RunOutput> {
    let text =
        std::fs::read_to_string(config).with_context(|| format!("cannot read {}", config.display()))?;
    let mut cfg =
        SimConfig::parse(&text).with_context(|| format!("invalid configuration {}", config.display()))?;
    if let Some(s) = seed {
        cfg.master_seed = s;
    }
    // Fail on an unwritable output before spending the compute.
    io::write_text(output, "")?;
    let report: SimReport = if command == "coverage" {
        run_coverage_study(&cfg)?
    } else {
        run_rejection_study(&cfg)?
    };
    io::write_text(
        output,
        &format!("{}\n{}\n", SimReport::csv_header(), report.csv_row()),
    )?;
    let mut warnings = Vec::new();
    if report.failures > 0 {
        warnings.push(format!(
            "{} replication(s) failed and were excluded",
            report.failures
        ));
    }
    if cfg.variance_method == VarianceMethod::PlugIn {
        warnings.push("plug-in variance is not scale-invariant; prefer bootstrap or delta".to_string());
    }
    let inputs = json!({ "config": config.display().to_string(), "output": output.display().to_string() });
    let mut results = report::simulation(&report);
    results["output"] = json!(output.display().to_string());
    Ok(RunOutput::new(command, inputs, results, warnings))
}
