use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use nspa::bits::BitString;
use nspa::lp_attack::{build_attack_lp, optimal_attack, AttackOptions, Direction};
use nspa::report::{AttackReport, Strategy};
use nspa::scalar::{format_rational, parse_rational};
use nspa::sweep::{run_sweep, write_csv, SweepSpec};
use nspa::table::{chsh_success, pr_product};
use nspa::verify::{run_verify, Mutation, VerifyConfig};
use nspa::{Error, HashFunction, Probability, Rational, Result};

#[derive(Parser)]
#[command(name = "nspa", version, about = "Non-signaling boxes, box partitions and attacks on hashed PR-box outputs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit the n-fold product of unbiased PR boxes with error eps.
    Box(BoxArgs),
    /// Evaluate an attack on the hashed outputs of a PR-box product.
    Attack(AttackArgs),
    /// Sweep strategies and bounds over a grid, writing CSV.
    Sweep(SweepArgs),
    /// Print the attack LP as a plain-text constraint listing.
    LpExport(LpExportArgs),
    /// Run the verification suite.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct BoxArgs {
    /// Box error as a rational a/b.
    #[arg(long)]
    eps: String,
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Print normalization, non-signaling and CHSH verdicts.
    #[arg(long)]
    check: bool,
    /// Emit float entries instead of exact rationals.
    #[arg(long)]
    float: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AttackArgs {
    #[arg(long)]
    eps: String,
    #[arg(long)]
    n: usize,
    /// Hash function: xor, and, majority, const0, const1 or tt:<hex>.
    #[arg(long)]
    f: String,
    /// wbar, trivial or lp.
    #[arg(long, default_value = "wbar")]
    strategy: String,
    /// Weight of the z = 0 element (lp only).
    #[arg(long, default_value = "1/2")]
    p: String,
    /// Objective input as u|v bit strings (lp only).
    #[arg(long)]
    input: Option<String>,
    /// Also solve the LP biased toward 1 and keep the better one.
    #[arg(long)]
    both_directions: bool,
    /// Solve the LP with every input pair as objective and report whether the optimum varies.
    #[arg(long)]
    all_inputs: bool,
    /// Write the LP partition as JSON (lp only).
    #[arg(long)]
    partition_out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Inclusive range a..b or a single width.
    #[arg(long)]
    n: String,
    /// start..end:step or a comma-separated list.
    #[arg(long)]
    eps: String,
    /// Comma-separated hash function specs.
    #[arg(long, default_value = "xor")]
    f: String,
    /// Comma-separated subset of wbar, trivial, lp, bounds.
    #[arg(long, default_value = "wbar")]
    strategy: String,
    /// Add an exact rational column.
    #[arg(long)]
    exact: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LpExportArgs {
    #[arg(long)]
    eps: String,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    f: String,
    #[arg(long, default_value = "1/2")]
    p: String,
    #[arg(long)]
    input: Option<String>,
    /// toward0 or toward1.
    #[arg(long, default_value = "toward0")]
    direction: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 3)]
    n_max: usize,
    #[arg(long, default_value = "1/8")]
    eps: String,
    /// Seed for the randomized product checks.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Inject a known defect to test the harness (biaswbar).
    #[arg(long)]
    mutate: Option<String>,
}

/// Command-line rationals must be written `a/b` or as integers.
fn cli_rational(s: &str) -> Result<Rational> {
    if s.contains('.') {
        return Err(Error::Parse(format!("'{s}': use a/b syntax, decimals are only accepted in sweep grids")));
    }
    parse_rational(s)
}

fn cli_probability(s: &str) -> Result<Probability> {
    Probability::new(cli_rational(s)?)
}

fn parse_input(s: Option<&str>, n: usize) -> Result<(usize, usize)> {
    let Some(s) = s else { return Ok((0, 0)) };
    let (u, v) = s
        .split_once('|')
        .ok_or_else(|| Error::Parse(format!("input '{s}' must look like u|v")))?;
    let (u, v): (BitString, BitString) = (u.parse()?, v.parse()?);
    if u.width() != n || v.width() != n {
        return Err(Error::Parse(format!("input '{s}' must have {n}-bit halves")));
    }
    Ok((u.index(), v.index()))
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json(path: Option<&Path>, value: &serde_json::Value) -> Result<()> {
    let mut out = open_output(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn cmd_box(args: BoxArgs) -> Result<()> {
    let eps = cli_rational(&args.eps)?;
    let table = pr_product(args.n, &eps)?;
    let json = if args.float {
        table.map(|e| nspa::Scalar::to_f64(e)).to_json()
    } else {
        table.to_json()
    };
    write_json(args.out.as_deref(), &json)?;
    if args.check {
        let mut verdict = format!(
            "normalized: {}, nonsignaling: {}",
            table.check_normalized().is_ok(),
            table.is_nonsignaling()
        );
        if args.n == 1 {
            verdict.push_str(&format!(", chsh: {}", chsh_success(&table)?));
        }
        println!("{verdict}");
    }
    Ok(())
}

fn cmd_attack(args: AttackArgs) -> Result<()> {
    let epsilon = cli_probability(&args.eps)?;
    let strategy: Strategy = args.strategy.parse()?;
    let f = HashFunction::parse(&args.f, args.n)?;
    let base = pr_product(args.n, epsilon.value())?;
    let report = match strategy {
        Strategy::Lp => {
            let opts = AttackOptions {
                p: cli_probability(&args.p)?,
                objective_input: parse_input(args.input.as_deref(), args.n)?,
                both_directions: args.both_directions,
                all_inputs: args.all_inputs,
            };
            let attack = optimal_attack(&base, &f, &epsilon, &opts)?;
            info!("LP solved in {} pivots", attack.solution.pivots);
            if let Some(path) = &args.partition_out {
                write_json(Some(path), &attack.partition.to_json())?;
            }
            attack.report
        }
        other => {
            if args.partition_out.is_some() || args.all_inputs || args.both_directions || args.input.is_some() {
                return Err(Error::Parse("LP options require --strategy lp".into()));
            }
            AttackReport::evaluate(other, &base, &f, &epsilon)?
        }
    };
    report.check()?;
    write_json(None, &report.to_json())
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let mut spec = SweepSpec::parse(&args.n, &args.eps, &args.f, &args.strategy)?;
    spec.exact = args.exact;
    let rows = run_sweep(&spec)?;
    let out = open_output(args.out.as_deref())?;
    write_csv(&rows, spec.exact, out)
}

fn cmd_lp_export(args: LpExportArgs) -> Result<()> {
    let eps = cli_rational(&args.eps)?;
    let f = HashFunction::parse(&args.f, args.n)?;
    let base = pr_product(args.n, &eps)?;
    let direction = match args.direction.as_str() {
        "toward0" => Direction::TowardZero,
        "toward1" => Direction::TowardOne,
        other => return Err(Error::Parse(format!("unknown direction '{other}'"))),
    };
    let input = parse_input(args.input.as_deref(), args.n)?;
    let lp = build_attack_lp(&base, &f, &cli_probability(&args.p)?, input, direction)?;
    let mut out = open_output(args.out.as_deref())?;
    out.write_all(lp.to_text().as_bytes())?;
    out.flush()?;
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<bool> {
    let config = VerifyConfig {
        n_max: args.n_max,
        epsilon: cli_probability(&args.eps)?,
        seed: args.seed,
        mutation: args.mutate.as_deref().map(str::parse::<Mutation>).transpose()?,
    };
    let report = run_verify(&config)?;
    let mut out = io::stdout().lock();
    writeln!(out, "verify: n <= {}, eps = {}, seed = {}", config.n_max, format_rational(config.epsilon.value()), config.seed)?;
    for check in &report.checks {
        writeln!(out, "{check}")?;
    }
    match report.first_failure() {
        None => {
            writeln!(out, "all {} checks passed", report.checks.len())?;
            Ok(true)
        }
        Some(failure) => {
            let counterexample = failure.counterexample.clone().unwrap_or(serde_json::Value::Null);
            writeln!(out, "first counterexample ({}): {}", failure.label, counterexample)?;
            Ok(false)
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Box(a) => cmd_box(a).map(|_| true),
        Command::Attack(a) => cmd_attack(a).map(|_| true),
        Command::Sweep(a) => cmd_sweep(a).map(|_| true),
        Command::LpExport(a) => cmd_lp_export(a).map(|_| true),
        Command::Verify(a) => cmd_verify(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
