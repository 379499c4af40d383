use clap::{Parser, Subcommand, ValueEnum};
use opoly_cli::{render, run, CliError, Command, Format, JobConfig};
use std::path::PathBuf;
use std::process::ExitCode;

/// Orthogonality of constant-coefficient combinations of monic orthogonal polynomials.
#[derive(Parser)]
#[command(name = "opoly", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Check the orthogonality conditions and cross-check with a Gram test.
    Check(RunArgs),
    /// Print the recurrence of the combined family.
    Tilde(RunArgs),
    /// Zeros of Q_n as eigenvalues, cross-checked against polynomial roots.
    Zeros(RunArgs),
    /// Solve for h_k with u = h_k v and verify it.
    Hk(RunArgs),
    /// Gauss rule and the quadrature rule on the zeros of Q_n.
    Quad(RunArgs),
    /// Emit the configured family with its validation.
    Gen(RunArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Job config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
    /// Degree for `zeros` and `quad`.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    tol_conditions: Option<f64>,
    #[arg(long)]
    tol_gram: Option<f64>,
    #[arg(long)]
    tol_zeros: Option<f64>,
    #[arg(long)]
    tol_hk: Option<f64>,
    #[arg(long)]
    tol_quad: Option<f64>,
}

fn execute(command: Command, args: &RunArgs) -> Result<bool, CliError> {
    let mut config = JobConfig::load(&args.config)?;
    let tols = &mut config.tolerances;
    let overrides = [
        (args.tol_conditions, &mut tols.conditions),
        (args.tol_gram, &mut tols.gram),
        (args.tol_zeros, &mut tols.zeros),
        (args.tol_hk, &mut tols.hk),
        (args.tol_quad, &mut tols.quad),
    ];
    for (given, slot) in overrides {
        if let Some(v) = given {
            *slot = v;
        }
    }
    if args.n.is_some() {
        config.n = args.n;
    }
    let job = config.build()?;
    let outcome = run(command, &job)?;
    let format = match args.format {
        FormatArg::Json => Format::Json,
        FormatArg::Csv => Format::Csv,
    };
    let text = render(command, &job.config, &outcome, format)?;
    match &args.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match &cli.command {
        Sub::Check(a) => (Command::Check, a),
        Sub::Tilde(a) => (Command::Tilde, a),
        Sub::Zeros(a) => (Command::Zeros, a),
        Sub::Hk(a) => (Command::Hk, a),
        Sub::Quad(a) => (Command::Quad, a),
        Sub::Gen(a) => (Command::Gen, a),
    };
    match execute(command, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("opoly: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
