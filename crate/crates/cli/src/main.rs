//! Command-line surface: norm computation, equivalence experiments,
//! inequality suites, kernel diagnostics and condition checks.
//!
//! Exit codes: 0 ok, 1 condition/assertion failure, 2 usage error,
//! 3 numeric failure.

mod config;
mod expr;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use varspace::differences::{
    besov_norm_differences, besov_norm_differences_2ml, check_conditions, tl_norm_differences,
    tl_norm_differences_2ml, ConditionReport, SmoothnessSpec,
};
use varspace::exponents::{
    two_microlocal_weights, weights_from_smoothness, SmoothnessFunction, WeightSequence,
};
use varspace::frequency::{
    besov_norm_fourier, build_local_means_kernels, build_resolution_of_unity, default_top_level,
    discrete_moment, local_means_norm, peetre_norm, tl_norm_fourier,
};
use varspace::harness::{
    auto_peetre_parameter, check_dif_peetre, check_discrete_convolution, check_eta_ball_convolution,
    check_eta_convolution, check_mixed_holder, check_power_sum, run_equivalence_experiment,
    ExponentPair, SuiteReport,
};
use varspace::{Error, Flavor, Grid, Result};

use config::{exponent_from_expr, parse_weight_spec, smoothness_from_expr};

#[derive(Parser)]
#[command(name = "varspace", version, about = "Function-space norms with variable smoothness and integrability on periodic grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a space norm of a sampled function read from CSV
    Norm(NormArgs),
    /// Run a norm-equivalence experiment described by a config file
    Equivalence(EquivalenceArgs),
    /// Run randomized inequality suites
    Inequalities(InequalitiesArgs),
    /// Build local-means kernels and print diagnostics
    Kernels(KernelsArgs),
    /// Evaluate the difference-characterization conditions
    Conditions(ConditionsArgs),
}

#[derive(Args)]
struct NormArgs {
    /// Input CSV (1D: one "re" or "re,im" per line; 2D: header line)
    #[arg(long = "input")]
    input: PathBuf,
    /// besov | tl
    #[arg(long = "flavor")]
    flavor: String,
    /// fourier | localmeans | differences | peetre
    #[arg(long = "method")]
    method: String,
    /// Smoothness expression s(x[, y])
    #[arg(long = "s")]
    s: Option<String>,
    /// Weight sequence spec "2ml:<s>,<s'>,<x0>"
    #[arg(long = "weights")]
    weights: Option<String>,
    /// Integrability exponent expression p(x[, y])
    #[arg(long = "p")]
    p: String,
    /// Summability exponent expression q(x[, y])
    #[arg(long = "q")]
    q: String,
    /// Difference order
    #[arg(long = "M", default_value_t = 2)]
    m: u32,
    /// Top decomposition level (default: largest level below Nyquist)
    #[arg(long = "J")]
    j: Option<usize>,
    /// Peetre parameter: "auto" or a positive real
    #[arg(long = "a", default_value = "auto")]
    a: String,
    /// Lowest difference level (default -J)
    #[arg(long = "k-lo")]
    k_lo: Option<i32>,
    /// Highest difference level (default J)
    #[arg(long = "k-hi")]
    k_hi: Option<i32>,
    /// Report path (stdout when omitted)
    #[arg(long = "out")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EquivalenceArgs {
    #[arg(long = "config")]
    config: PathBuf,
    #[arg(long = "out")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InequalitiesArgs {
    /// all | holder | convolution | eta | powersum | etaball | difpeetre
    #[arg(long = "suite", default_value = "all")]
    suite: String,
    #[arg(long = "trials", default_value_t = 1000)]
    trials: usize,
    #[arg(long = "seed", default_value_t = 1)]
    seed: u64,
    #[arg(long = "out")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct KernelsArgs {
    /// Vanishing-moment order R
    #[arg(long = "R", default_value_t = 3)]
    r: usize,
    /// Support radius (<= 1)
    #[arg(long = "radius", default_value_t = 0.9)]
    radius: f64,
    /// Verify the kernel invariants and set the exit code accordingly
    #[arg(long = "check", default_value_t = false)]
    check: bool,
}

#[derive(Args)]
struct ConditionsArgs {
    #[arg(long = "s")]
    s: String,
    #[arg(long = "p")]
    p: String,
    #[arg(long = "q")]
    q: String,
    #[arg(long = "M", default_value_t = 2)]
    m: u32,
    #[arg(long = "flavor", default_value = "besov")]
    flavor: String,
}

#[derive(Serialize, Deserialize)]
struct Meta {
    tool: String,
    timestamp_unix: u64,
    runtime_ms: u64,
}

/// Report envelope. `meta` is the only nondeterministic part; diff the
/// `result` subtree when comparing runs.
#[derive(Serialize, Deserialize)]
struct ReportFile<T> {
    meta: Meta,
    result: T,
}

#[derive(Serialize, Deserialize, PartialEq, Debug)]
struct NormReport {
    schema: String,
    input: String,
    flavor: Flavor,
    method: String,
    space: String,
    p: String,
    q: String,
    m: u32,
    j_levels: usize,
    a_used: Option<f64>,
    k_lo: i32,
    k_hi: i32,
    dim: usize,
    points_per_axis: usize,
    period: f64,
    condition: ConditionReport,
    value: f64,
}

#[derive(Serialize, Deserialize, PartialEq, Debug)]
struct InequalitiesReport {
    schema: String,
    suite: String,
    trials: usize,
    seed: u64,
    reports: Vec<SuiteReport>,
    pass: bool,
}

fn main() {
    let cli = Cli::parse();
    let code = match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            error_code(&e)
        }
    };
    std::process::exit(code);
}

fn error_code(e: &Error) -> i32 {
    match e {
        Error::Precondition(_) => 1,
        Error::Numeric(_) | Error::Construction(_) => 3,
        _ => 2,
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Norm(args) => cmd_norm(args),
        Command::Equivalence(args) => cmd_equivalence(args),
        Command::Inequalities(args) => cmd_inequalities(args),
        Command::Kernels(args) => cmd_kernels(args),
        Command::Conditions(args) => cmd_conditions(args),
    }
}

fn emit_report<T: Serialize>(result: T, out: Option<&Path>, started: Instant) -> Result<()> {
    let meta = Meta {
        tool: format!("varspace {}", env!("CARGO_PKG_VERSION")),
        timestamp_unix: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        runtime_ms: started.elapsed().as_millis() as u64,
    };
    let file = ReportFile { meta, result };
    let text = serde_json::to_string_pretty(&file)
        .map_err(|e| Error::Numeric(format!("report serialization: {e}")))?;
    match out {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

enum SpaceInput {
    Smoothness(SmoothnessFunction),
    Weights { s: f64, sprime: f64, x0: f64 },
}

fn resolve_space(
    s: &Option<String>,
    weights: &Option<String>,
    grid: Grid,
) -> Result<(SpaceInput, String)> {
    match (s, weights) {
        (Some(_), Some(_)) => Err(Error::InvalidConfig(
            "give either --s or --weights, not both".into(),
        )),
        (None, None) => Err(Error::InvalidConfig("one of --s or --weights is required".into())),
        (Some(text), None) => {
            let sf = smoothness_from_expr(text, grid)?;
            Ok((SpaceInput::Smoothness(sf), format!("s = {text}")))
        }
        (None, Some(spec)) => {
            let (s, sprime, x0) = parse_weight_spec(spec)?;
            Ok((SpaceInput::Weights { s, sprime, x0 }, spec.clone()))
        }
    }
}

fn build_weight_sequence(space: &SpaceInput, grid: Grid, j: usize) -> Result<WeightSequence> {
    match space {
        SpaceInput::Smoothness(sf) => weights_from_smoothness(sf, j),
        SpaceInput::Weights { s, sprime, x0 } => {
            two_microlocal_weights(grid, *s, *sprime, [*x0, *x0], j)
        }
    }
}

fn cmd_norm(args: NormArgs) -> Result<i32> {
    let started = Instant::now();
    let f = varspace::read_csv(&args.input)?;
    let grid = *f.grid();
    let flavor: Flavor = args.flavor.parse()?;
    let p = exponent_from_expr(&args.p, grid, "--p")?;
    let q = exponent_from_expr(&args.q, grid, "--q")?;
    if flavor == Flavor::TriebelLizorkin && (p.has_infinity() || q.has_infinity()) {
        return Err(Error::InvalidConfig(
            "--flavor tl requires finite --p and --q everywhere".into(),
        ));
    }
    let j = args.j.unwrap_or_else(|| default_top_level(&grid));
    let (space, space_desc) = resolve_space(&args.s, &args.weights, grid)?;
    let weights = build_weight_sequence(&space, grid, j)?;
    let condition = match &space {
        SpaceInput::Smoothness(sf) => {
            check_conditions(SmoothnessSpec::Function(sf), &p, &q, args.m, flavor)
        }
        SpaceInput::Weights { .. } => {
            check_conditions(SmoothnessSpec::Weights(&weights), &p, &q, args.m, flavor)
        }
    };
    if !condition.m_ok {
        return Err(Error::Precondition(format!(
            "difference order M must exceed the upper smoothness: M = {} does not exceed {} \
             (use a larger --M)",
            args.m, condition.m_bound
        )));
    }
    let k_lo = args.k_lo.unwrap_or(-(j as i32));
    let k_hi = args.k_hi.unwrap_or(j as i32);
    let alpha_like = condition.clog_smoothness;
    let a_used = match args.a.as_str() {
        "auto" => None,
        v => Some(
            v.parse::<f64>()
                .map_err(|e| Error::InvalidConfig(format!("--a must be 'auto' or a real: {e}")))?,
        ),
    };

    let (value, a_report) = match args.method.as_str() {
        "fourier" => {
            let bank = build_resolution_of_unity(grid, j)?;
            let v = match flavor {
                Flavor::Besov => besov_norm_fourier(&f, &bank, &weights, &p, &q)?,
                Flavor::TriebelLizorkin => tl_norm_fourier(&f, &bank, &weights, &p, &q)?,
            };
            (v, None)
        }
        "localmeans" => {
            let r = (weights.alpha2().max(0.0).floor() as usize) + 1;
            let kernels = build_local_means_kernels(grid, r, 0.9)?;
            (local_means_norm(&f, &kernels, &weights, &p, &q, flavor)?, None)
        }
        "peetre" => {
            let r = (weights.alpha2().max(0.0).floor() as usize) + 1;
            let kernels = build_local_means_kernels(grid, r, 0.9)?;
            let a = a_used
                .unwrap_or_else(|| auto_peetre_parameter(flavor, grid.dim(), &p, &q, alpha_like));
            (peetre_norm(&f, &kernels, &weights, &p, &q, a, flavor)?, Some(a))
        }
        "differences" => {
            let v = match (&space, flavor) {
                (SpaceInput::Smoothness(sf), Flavor::Besov) => {
                    besov_norm_differences(&f, sf, &p, &q, args.m, (k_lo, k_hi))?
                }
                (SpaceInput::Smoothness(sf), Flavor::TriebelLizorkin) => {
                    tl_norm_differences(&f, sf, &p, &q, args.m, (k_lo, k_hi))?
                }
                (SpaceInput::Weights { .. }, Flavor::Besov) => {
                    besov_norm_differences_2ml(&f, &weights, &p, &q, args.m, (k_lo, k_hi))?
                }
                (SpaceInput::Weights { .. }, Flavor::TriebelLizorkin) => {
                    tl_norm_differences_2ml(&f, &weights, &p, &q, args.m, (k_lo, k_hi))?
                }
            };
            (v, None)
        }
        other => {
            return Err(Error::InvalidConfig(format!(
                "--method must be fourier, localmeans, differences or peetre, got '{other}'"
            )))
        }
    };

    let report = NormReport {
        schema: "varspace.norm.v1".into(),
        input: args.input.display().to_string(),
        flavor,
        method: args.method.clone(),
        space: space_desc,
        p: args.p.clone(),
        q: args.q.clone(),
        m: args.m,
        j_levels: j,
        a_used: a_report,
        k_lo,
        k_hi,
        dim: grid.dim(),
        points_per_axis: grid.points_per_axis(),
        period: grid.period(),
        condition,
        value,
    };
    emit_report(report, args.out.as_deref(), started)?;
    Ok(0)
}

fn cmd_equivalence(args: EquivalenceArgs) -> Result<i32> {
    let started = Instant::now();
    let cfg = config::experiment_from_file(&args.config)?;
    let report = run_equivalence_experiment(&cfg)?;
    let pass = report.pass;
    emit_report(report, args.out.as_deref(), started)?;
    Ok(if pass { 0 } else { 1 })
}

fn cmd_inequalities(args: InequalitiesArgs) -> Result<i32> {
    let started = Instant::now();
    let tau = 2.0 * std::f64::consts::PI;
    let mut reports: Vec<SuiteReport> = Vec::new();
    let wanted = args.suite.as_str();
    let want = |name: &str| wanted == "all" || wanted == name;
    let mut matched = false;

    if want("holder") {
        matched = true;
        let grid = Grid::line(16, tau)?;
        let exps = ExponentPair::sinusoidal(grid)?;
        reports.push(check_mixed_holder(args.seed, args.trials, 0.5, &exps)?);
    }
    if want("convolution") {
        matched = true;
        let grid = Grid::line(16, tau)?;
        let constant = ExponentPair::constant(grid, 2.0, 1.5)?;
        reports.push(check_discrete_convolution(args.seed, args.trials, 1.0, &constant)?);
        let variable = ExponentPair::sinusoidal(grid)?;
        let mut rep = check_discrete_convolution(args.seed, args.trials.min(200), 1.0, &variable)?;
        rep.suite = "convolution_variable".into();
        reports.push(rep);
    }
    if want("eta") {
        matched = true;
        let grid = Grid::line(32, tau)?;
        let exps = ExponentPair::sinusoidal(grid)?;
        let m = grid.dim() as f64 + exps.q.clog_estimate() + 1.5;
        reports.push(check_eta_convolution(
            args.seed,
            args.trials.min(200),
            m,
            &exps,
            Flavor::Besov,
        )?);
        let const_exps = ExponentPair::constant(grid, 2.0, 2.0)?;
        let mut rep = check_eta_convolution(
            args.seed,
            args.trials.min(200),
            grid.dim() as f64 + 1.0,
            &const_exps,
            Flavor::TriebelLizorkin,
        )?;
        rep.suite = "eta_tl".into();
        reports.push(rep);
    }
    if want("powersum") {
        matched = true;
        reports.push(check_power_sum(args.seed, args.trials, 1.0, 1.0)?);
        let mut rep = check_power_sum(args.seed, args.trials, 0.5, 1.0)?;
        rep.suite = "powersum_small_q".into();
        reports.push(rep);
    }
    if want("etaball") {
        matched = true;
        let grid = Grid::line(2048, tau)?;
        reports.push(check_eta_ball_convolution(grid, 2, 2.0)?);
    }
    if want("difpeetre") {
        matched = true;
        let grid = Grid::line(256, tau)?;
        reports.push(check_dif_peetre(grid, args.seed, 2, 2.0)?);
    }
    if !matched {
        return Err(Error::InvalidConfig(format!(
            "--suite must be all, holder, convolution, eta, powersum, etaball or difpeetre, \
             got '{wanted}'"
        )));
    }

    let pass = reports.iter().all(|r| r.pass);
    let report = InequalitiesReport {
        schema: "varspace.inequalities.v1".into(),
        suite: args.suite.clone(),
        trials: args.trials,
        seed: args.seed,
        reports,
        pass,
    };
    emit_report(report, args.out.as_deref(), started)?;
    Ok(if pass { 0 } else { 1 })
}

fn cmd_kernels(args: KernelsArgs) -> Result<i32> {
    let tau = 2.0 * std::f64::consts::PI;
    let grid = Grid::line(512, tau)?;
    let kernels = build_local_means_kernels(grid, args.r, args.radius)?;
    println!(
        "kernel set on a 1D grid of {} points, period {:.6}",
        grid.points_per_axis(),
        grid.period()
    );
    println!(
        "  moment order R = {}, support radius = {}, tauberian epsilon = {:.6}",
        kernels.moment_order(),
        kernels.support_radius(),
        kernels.tauber_epsilon()
    );
    let k0_mass = discrete_moment(kernels.k0(), [0, 0]);
    println!("  k0 mass = {k0_mass:.12}");
    let mut all_ok = true;
    for beta in 0..args.r.max(1) as u32 {
        let m = discrete_moment(kernels.k(), [beta, 0]);
        let ok = m.abs() <= 1e-10;
        if beta < args.r as u32 {
            all_ok &= ok;
        }
        println!(
            "  k moment |beta| = {beta}: {m:+.3e}{}",
            if beta < args.r as u32 && args.check {
                if ok {
                    "  [ok]"
                } else {
                    "  [VIOLATED]"
                }
            } else {
                ""
            }
        );
    }
    let support_points =
        kernels.k().values().iter().filter(|v| v.re != 0.0).count();
    println!("  k support points = {support_points}");
    if args.check {
        let eps_ok = kernels.tauber_epsilon() > 0.0;
        all_ok &= eps_ok;
        println!(
            "check: moments {} / tauberian {}",
            if all_ok { "pass" } else { "fail" },
            if eps_ok { "pass" } else { "fail" }
        );
        return Ok(if all_ok { 0 } else { 1 });
    }
    Ok(0)
}

fn cmd_conditions(args: ConditionsArgs) -> Result<i32> {
    let tau = 2.0 * std::f64::consts::PI;
    let grid = Grid::line(256, tau)?;
    let flavor: Flavor = args.flavor.parse()?;
    let s = smoothness_from_expr(&args.s, grid)?;
    let p = exponent_from_expr(&args.p, grid, "--p")?;
    let q = exponent_from_expr(&args.q, grid, "--q")?;
    let report = check_conditions(SmoothnessSpec::Function(&s), &p, &q, args.m, flavor);
    let text = serde_json::to_string_pretty(&report)
        .map_err(|e| Error::Numeric(format!("report serialization: {e}")))?;
    println!("{text}");
    Ok(if report.ok { 0 } else { 1 })
}
