use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use lemniscatic::cli::{self, bundle, Overrides, Status, ERROR_EXIT};
use lemniscatic::NearBoundaryPolicy;

/// Conformal maps of unbounded multiply connected domains onto lemniscatic
/// domains.
#[derive(Parser)]
#[command(name = "lemniscatic", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct SpecFlags {
    /// Nodes per boundary curve (even).
    #[arg(long)]
    n: Option<usize>,
    /// Relative residual target of the integral equation solves.
    #[arg(long)]
    gmres_tol: Option<f64>,
    /// Newton stops once the step norm falls below this.
    #[arg(long)]
    newton_tol: Option<f64>,
    /// Scale applied to curve centroids for the starting centers.
    #[arg(long)]
    s0: Option<f64>,
    /// Radius factor of the starting circles.
    #[arg(long)]
    delta: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem file and write a result bundle.
    Solve {
        /// Problem JSON, or `-` for standard input.
        spec: PathBuf,
        #[command(flatten)]
        flags: SpecFlags,
        /// Bundle directory (overrides "outputs").
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate Φ at points read from a CSV of `re,im` lines.
    Eval {
        bundle: PathBuf,
        points: PathBuf,
        /// Write the CSV here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Policy::Auto)]
        policy: Policy,
    },
    /// Sample |U(w)| on a lattice and write grid.csv into a bundle.
    Grid {
        bundle: PathBuf,
        #[arg(long, default_value_t = 200)]
        nx: usize,
        #[arg(long, default_value_t = 200)]
        ny: usize,
        /// Padding around the boundary values, relative to their extent.
        #[arg(long, default_value_t = 0.25)]
        margin: f64,
    },
    /// Logarithmic capacity of the complement, by an independent method.
    Capacity {
        spec: PathBuf,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Run the built-in invariant checks.
    Selftest {
        #[arg(long, default_value_t = 64)]
        n: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Policy {
    Plain,
    Normalized,
    Auto,
}

impl From<Policy> for NearBoundaryPolicy {
    fn from(p: Policy) -> Self {
        match p {
            Policy::Plain => NearBoundaryPolicy::Plain,
            Policy::Normalized => NearBoundaryPolicy::Normalized,
            Policy::Auto => NearBoundaryPolicy::Auto,
        }
    }
}

fn run(command: Command) -> anyhow::Result<u8> {
    match command {
        Command::Solve { spec, flags, out } => {
            let mut spec = cli::read_spec(&spec)?;
            spec.apply(&Overrides {
                n: flags.n,
                gmres_tol: flags.gmres_tol,
                newton_tol: flags.newton_tol,
                s0: flags.s0,
                delta: flags.delta,
                out,
            })?;
            let report = cli::run_solve(&spec)?;
            match report.status {
                Status::Converged => println!(
                    "converged in {} Newton steps, tau = {}; wrote {}",
                    report.newton_iterations,
                    bundle::fmt17(report.tau),
                    report.out.display()
                ),
                Status::NotConverged => eprintln!(
                    "newton: {}; diagnostics written to {}",
                    report.failure.as_deref().unwrap_or("did not converge"),
                    report.out.display()
                ),
            }
            Ok(report.status.exit_code())
        }
        Command::Eval {
            bundle,
            points,
            out,
            policy,
        } => {
            let text = std::fs::read_to_string(&points)
                .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", points.display()))?;
            let rows = cli::run_eval(&bundle, &cli::parse_points(&text)?, policy.into())?;
            let csv = cli::eval_csv(&rows)?;
            match out {
                Some(path) => std::fs::write(path, csv)?,
                None => print!("{csv}"),
            }
            Ok(0)
        }
        Command::Grid { bundle, nx, ny, margin } => {
            let path = cli::run_grid(&bundle, nx, ny, margin)?;
            println!("wrote {}", path.display());
            Ok(0)
        }
        Command::Capacity { spec, n } => {
            let mut spec = cli::read_spec(&spec)?;
            spec.apply(&Overrides { n, ..Overrides::default() })?;
            print!("{}", bundle::to_json(&cli::run_capacity(&spec)?)?);
            Ok(0)
        }
        Command::Selftest { n } => {
            let report = cli::run_selftest(n);
            print!("{}", report.text());
            Ok(if report.ok() { 0 } else { ERROR_EXIT })
        }
    }
}

fn main() -> ExitCode {
    // usage errors are input errors; clap's own code 2 means non-convergence here
    let args = match Cli::try_parse() {
        Ok(args) => args,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { ERROR_EXIT } else { 0 });
        }
    };
    match run(args.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(ERROR_EXIT)
        }
    }
}
