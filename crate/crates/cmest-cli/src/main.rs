//! Command-line front end: estimate on user data, run certification
//! campaigns, sweep the divergence demo, browse the catalog.
//!
//! Exit codes: 0 success, 1 statistical failure, 2 usage or domain error.

mod data;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;

use cmest::exec::Parallelism;
use cmest::verify::{self, CertifyOptions, DivergenceOptions, KURTOSIS_WARN_THRESHOLD};
use cmest::{parse_model, parse_q, EstimatorSpec};

const EPOCH_TIMESTAMP: &str = "1970-01-01T00:00:00Z";

#[derive(Parser)]
#[command(
    name = "cmest",
    version,
    about = "Unbiased estimation of completely monotone functions of exponential-family natural parameters"
)]
struct Cli {
    /// Write a JSON report to this path
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// RNG seed. When set, JSON reports are byte-deterministic: the
    /// timestamp is pinned to the epoch and wall times are zeroed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Absolute tolerance for estimator quadrature
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the unbiased estimator on observed data points
    Estimate {
        /// Model spec, e.g. normal, gamma:alpha=2, invgauss:lambda=1,
        /// truncnormal:sigma=1,b=0, gamma:alpha=2,trunc_lo=1
        #[arg(long)]
        model: String,
        /// Target spec: recip, power:k=<v>, shiftpow:b=<v>,k=<v>,
        /// window:d1=<v>,d2=<v|inf>
        #[arg(long)]
        q: String,
        /// Location shift: estimate q(theta - theta0) instead of q(theta)
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        theta0: f64,
        /// Inline observation(s), comma separated
        #[arg(
            long,
            value_delimiter = ',',
            conflicts_with = "data",
            allow_negative_numbers = true
        )]
        x: Option<Vec<f64>>,
        /// Data file with one observation per row
        #[arg(long)]
        data: Option<PathBuf>,
        /// Data file format (inferred from the extension when omitted)
        #[arg(long, value_enum)]
        format: Option<data::Format>,
        /// Column name or 0-based index in the data file
        #[arg(long)]
        column: Option<String>,
        /// Reduce the sample to its sufficient statistic T = sum(x_i) and
        /// estimate from T under the matching summed family
        #[arg(long)]
        sufficient: bool,
        /// Bypass closed forms and force the kernel quadrature
        #[arg(long)]
        quadrature: bool,
    },
    /// Monte Carlo certification of unbiasedness over a theta grid
    Verify {
        #[arg(long)]
        model: String,
        #[arg(long)]
        q: String,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        theta0: f64,
        /// Grid of model parameters, comma separated
        #[arg(
            long,
            value_delimiter = ',',
            required = true,
            allow_negative_numbers = true
        )]
        thetas: Vec<f64>,
        /// Draws per grid point
        #[arg(long, default_value_t = 1_000_000)]
        n: u64,
        /// Pass threshold on |z|
        #[arg(long, default_value_t = 4.0)]
        z_max: f64,
        /// Run single-threaded even when the parallel feature is enabled
        #[arg(long)]
        sequential: bool,
    },
    /// Tabulate the divergent second-moment integrand of the normal
    /// reciprocal estimator and track its running empirical second moment
    #[command(name = "demo-divergence")]
    DemoDivergence {
        /// Natural parameter, must be positive
        #[arg(long, allow_negative_numbers = true)]
        theta: f64,
    },
    /// List models, targets, and closed-form availability
    Catalog,
}

fn main() -> ExitCode {
    // die quietly when a downstream pager closes the pipe
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Estimate {
            ref model,
            ref q,
            theta0,
            ref x,
            ref data,
            format,
            ref column,
            sufficient,
            quadrature,
        } => {
            let args = EstimateArgs {
                model,
                q,
                theta0,
                inline: x.as_deref(),
                data_path: data.as_deref(),
                format,
                column: column.as_deref(),
                sufficient,
                quadrature,
            };
            cmd_estimate(&cli, &args)
        }
        Command::Verify {
            ref model,
            ref q,
            theta0,
            ref thetas,
            n,
            z_max,
            sequential,
        } => cmd_verify(&cli, model, q, theta0, thetas, n, z_max, sequential),
        Command::DemoDivergence { theta } => cmd_demo_divergence(&cli, theta),
        Command::Catalog => {
            cmd_catalog();
            Ok(ExitCode::SUCCESS)
        }
    }
}

#[derive(Serialize)]
struct EstimateRecord {
    x: f64,
    value: f64,
    log_abs_value: f64,
    method: String,
    quadrature_error_bound: Option<f64>,
}

#[derive(Serialize)]
struct EstimateErrorRecord {
    position: Option<usize>,
    x: Option<f64>,
    message: String,
}

#[derive(Serialize)]
struct EstimateDocument {
    version: String,
    command: String,
    model: String,
    q: String,
    transform: String,
    tolerance: f64,
    estimates: Vec<EstimateRecord>,
    errors: Vec<EstimateErrorRecord>,
}

struct EstimateArgs<'a> {
    model: &'a str,
    q: &'a str,
    theta0: f64,
    inline: Option<&'a [f64]>,
    data_path: Option<&'a std::path::Path>,
    format: Option<data::Format>,
    column: Option<&'a str>,
    sufficient: bool,
    quadrature: bool,
}

fn cmd_estimate(cli: &Cli, args: &EstimateArgs) -> Result<ExitCode> {
    let model = parse_model(args.model)?;
    let q = parse_q(args.q)?;

    let mut points: Vec<f64> = Vec::new();
    let mut errors: Vec<EstimateErrorRecord> = Vec::new();
    match (args.inline, args.data_path) {
        (Some(xs), None) => points.extend_from_slice(xs),
        (None, Some(path)) => {
            for row in data::load(path, args.format, args.column)? {
                match row {
                    data::Row::Value(v) => points.push(v),
                    data::Row::Bad { position, message } => {
                        eprintln!("row {position}: {message}");
                        errors.push(EstimateErrorRecord {
                            position: Some(position),
                            x: None,
                            message,
                        });
                    }
                }
            }
        }
        (None, None) => bail!("provide observations via --x or --data"),
        (Some(_), Some(_)) => unreachable!("clap enforces exclusivity"),
    }
    if points.is_empty() {
        bail!("no observations to estimate from");
    }

    let (model, points) = if args.sufficient {
        let (reduced, t) = model.sufficient_reduction(&points)?;
        println!(
            "sufficient reduction: {} observations -> T = {t} under {}",
            points.len(),
            reduced.name()
        );
        (reduced, vec![t])
    } else {
        (model, points)
    };

    let spec = EstimatorSpec::new(model, q)
        .with_location_shift(args.theta0)
        .with_tolerance(cli.tol)
        .force_quadrature(args.quadrature);

    let mut estimates = Vec::new();
    for &x in &points {
        match spec.estimate(x) {
            Ok(e) => {
                let mut line = format!("x={x} estimate={} method={}", e.value, e.method);
                if let Some(b) = e.quadrature_error_bound {
                    line.push_str(&format!(" err_bound={b:e}"));
                }
                println!("{line}");
                estimates.push(EstimateRecord {
                    x,
                    value: e.value,
                    log_abs_value: e.log_abs_value,
                    method: e.method.to_string(),
                    quadrature_error_bound: e.quadrature_error_bound,
                });
            }
            Err(err) => {
                eprintln!("x={x}: {err}");
                errors.push(EstimateErrorRecord {
                    position: None,
                    x: Some(x),
                    message: err.to_string(),
                });
            }
        }
    }

    let had_errors = !errors.is_empty();
    if let Some(path) = &cli.out {
        let doc = EstimateDocument {
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: "estimate".to_string(),
            model: spec.model().name().to_string(),
            q: spec.q().name().to_string(),
            transform: spec.transform_id(),
            tolerance: cli.tol,
            estimates,
            errors,
        };
        write_json(path, &serde_json::to_string_pretty(&doc)?)?;
    }

    Ok(if had_errors {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    cli: &Cli,
    model_str: &str,
    q_str: &str,
    theta0: f64,
    thetas: &[f64],
    n: u64,
    z_max: f64,
    sequential: bool,
) -> Result<ExitCode> {
    let spec = EstimatorSpec::new(parse_model(model_str)?, parse_q(q_str)?)
        .with_location_shift(theta0)
        .with_tolerance(cli.tol);
    let deterministic = cli.seed.is_some();
    let opts = CertifyOptions {
        n,
        seed: cli.seed.unwrap_or_else(random_seed),
        z_max,
        parallelism: if sequential {
            Parallelism::Sequential
        } else {
            Parallelism::default()
        },
    };

    let started = std::time::Instant::now();
    let (detailed, point_errors) = verify::certify_grid_detailed(&spec, thetas, &opts);
    for (report, diag) in &detailed {
        println!(
            "theta={} n={} mean={:.8} target={:.8} se={:.3e} z={:+.3} {} [{} ms]",
            report.theta,
            report.n,
            report.sample_mean,
            report.target,
            report.std_error,
            report.z_score,
            if report.pass { "PASS" } else { "FAIL" },
            report.wall_time_ms,
        );
        if diag.heavy_tailed() {
            eprintln!(
                "warning: theta={}: sample excess kurtosis {:.1e} exceeds {KURTOSIS_WARN_THRESHOLD}; \
                 the estimator variance may be infinite and the z-test unreliable \
                 (see demo-divergence)",
                report.theta, diag.excess_kurtosis
            );
        }
    }
    for pe in &point_errors {
        eprintln!("theta={}: {}", pe.theta, pe.error);
    }
    let reports: Vec<_> = detailed.into_iter().map(|(r, _)| r).collect();
    let pass = reports.iter().filter(|r| r.pass).count();
    let fail = reports.len() - pass;
    println!(
        "summary: {pass} pass, {fail} fail, {} error(s) in {:.1} s",
        point_errors.len(),
        started.elapsed().as_secs_f64()
    );

    if let Some(path) = &cli.out {
        let outcome = verify::CampaignOutcome {
            reports,
            point_errors: Vec::new(),
        };
        let mut report = outcome.into_report(if deterministic {
            EPOCH_TIMESTAMP.to_string()
        } else {
            now_timestamp()
        });
        if deterministic {
            for r in &mut report.reports {
                r.wall_time_ms = 0;
            }
        }
        write_json(path, &report.to_json())?;
    }

    Ok(if !point_errors.is_empty() {
        ExitCode::from(2)
    } else if fail > 0 {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn cmd_demo_divergence(cli: &Cli, theta: f64) -> Result<ExitCode> {
    let opts = DivergenceOptions {
        seed: cli.seed.unwrap_or(verify::DIVERGENCE_DEMO_SEED),
        ..Default::default()
    };
    let report = verify::divergence_demo(theta, &opts)?;
    for c in &report.threshold_crossings {
        println!(
            "g_theta first exceeds {:e} at x = {:.6} (sweeping toward -inf)",
            c.threshold, c.x
        );
    }
    for p in &report.running_second_moment {
        println!(
            "running second moment of delta_0 at n={}: {:.3}",
            p.n, p.second_moment
        );
    }
    if let Some(path) = &cli.out {
        write_json(path, &serde_json::to_string_pretty(&report)?)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_catalog() {
    println!("models:");
    let entries = cmest::catalog();
    for e in &entries {
        let (lo, hi) = e.model.theta_domain();
        println!(
            "  {:<32} {:<58} theta domain ({lo}, {hi})",
            e.grammar, e.summary
        );
    }
    println!("\ntargets:");
    for (grammar, summary) in [
        ("recip", "q(theta) = 1/theta"),
        ("power:k=<v>", "q(theta) = theta^-k, k > 0"),
        (
            "shiftpow:b=<v>,k=<v>",
            "q(theta) = (b + theta)^-k on theta > -b",
        ),
        (
            "window:d1=<v>,d2=<v|inf>",
            "q(theta) = (e^(-d1 theta) - e^(-d2 theta))/theta",
        ),
    ] {
        println!("  {grammar:<32} {summary}");
    }
    println!("\nclosed forms (everything else runs through the kernel quadrature):");
    let qs = [
        cmest::QFunction::reciprocal(),
        cmest::QFunction::power(2.0).unwrap(),
        cmest::QFunction::shifted_power(1.0, 1.0).unwrap(),
        cmest::QFunction::shifted_power(1.0, 2.0).unwrap(),
        cmest::QFunction::window(0.5, 2.0).unwrap(),
    ];
    for e in &entries {
        for q in &qs {
            let spec = EstimatorSpec::new(e.model.clone(), q.clone());
            let label = match spec.closed_form() {
                Some(tag) => format!("closed_form=yes ({tag})"),
                None => "closed_form=no".to_string(),
            };
            println!("  {:<28} {:<24} {label}", e.model.name(), q.name());
        }
    }
}

fn random_seed() -> u64 {
    use rand::Rng;
    rand::rng().random()
}

fn now_timestamp() -> String {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("unix:{secs}")
}

fn write_json(path: &std::path::Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))?;
    println!("report written to {}", path.display());
    Ok(())
}
