//! Scenario-driven command-line front end. Reads a scenario file, dispatches
//! to the library, and prints a deterministic JSON report.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use frobset_cli::report;
use frobset_cli::run::{run_scenario, selftest, Overrides, RunError};
use frobset_cli::scenario::{build_scenario, parse_document, Document};

#[derive(Parser)]
#[command(
    name = "frobset",
    about = "Exact F-set computations: orbit/subgroup intersections, recurrence solvers, \
             twisted polynomials, torus demos",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct OutputArgs {
    /// Write the report to this path as well as standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone, Default)]
struct SolverArgs {
    /// Search bound for the exact-equation solver.
    #[arg(long)]
    nmax: Option<u64>,
    /// Sieve moduli, comma separated.
    #[arg(long, value_delimiter = ',')]
    sieve: Option<Vec<u64>>,
    /// Exponent box bound (gm-intersect and fset enumerations).
    #[arg(long = "box")]
    box_bound: Option<i64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file.
    Run {
        /// Scenario file path.
        file: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Drinfeld-module computations.
    Drinfeld {
        #[command(subcommand)]
        command: DrinfeldCommand,
    },
    /// Multiplicative torus computations.
    Gm {
        #[command(subcommand)]
        command: GmCommand,
    },
    /// Replay the randomized pipeline-vs-brute-force property.
    Selftest {
        /// Seed for the deterministic instance stream.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Number of instances.
        #[arg(long, default_value_t = 10)]
        count: u32,
        /// Print one line per instance.
        #[arg(long, default_value_t = false)]
        verbose: bool,
    },
}

#[derive(Subcommand)]
enum DrinfeldCommand {
    /// Scan for ring elements whose image is a sum of two unit powers of F.
    Survey {
        /// The q of F_q[t] (a prime power; also the twist).
        #[arg(long)]
        q: u64,
        /// Coefficient field degree a: coefficients live in F_{q^a}.
        #[arg(long, default_value_t = 1)]
        coeff_degree: usize,
        /// Coefficients of phi_t, low F-degree first (prime fields only here;
        /// use a scenario file for extension coefficients).
        #[arg(long, value_delimiter = ',')]
        phi_t: Vec<u64>,
        /// Degree bound for the scanned polynomials.
        #[arg(long)]
        deg_bound: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// The cyclic-module/line intersection scenario over F_{q^2}.
    Sharp {
        #[arg(long)]
        q: u64,
        /// Operator degree bound.
        #[arg(long)]
        deg_bound: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Subcommand)]
enum GmCommand {
    /// Intersect a finitely generated torus subgroup with a hypersurface.
    Intersect {
        /// Scenario file (kind = gm-intersect).
        file: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

fn load_document(path: &PathBuf) -> Result<Document, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse_document(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn emit(report: &report::Report, output: &OutputArgs) -> Result<(), String> {
    let rendered = report.render();
    print!("{rendered}");
    if let Some(path) = &output.out {
        std::fs::write(path, rendered.as_bytes())
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    Ok(())
}

fn execute(doc: &Document, overrides: &Overrides, output: &OutputArgs) -> ExitCode {
    let scenario = match build_scenario(doc) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run_scenario(doc, &scenario, overrides) {
        Ok(report) => match emit(&report, output) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
        Err(RunError::Refused(m)) => {
            eprintln!("refused: {m}");
            ExitCode::from(1)
        }
        Err(RunError::Failed(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}

fn scenario_from_args(kind: &str, body: String) -> Document {
    parse_document(&format!("kind = {kind}\n{body}")).expect("internal scenario is well formed")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { file, output, solver } => {
            let doc = match load_document(&file) {
                Ok(d) => d,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            let overrides = Overrides {
                n_max: solver.nmax,
                sieve: solver.sieve,
                box_bound: solver.box_bound,
            };
            execute(&doc, &overrides, &output)
        }
        Command::Drinfeld { command } => match command {
            DrinfeldCommand::Survey { q, coeff_degree, phi_t, deg_bound, output } => {
                let coeffs: Vec<String> = phi_t.iter().map(|c| c.to_string()).collect();
                let body = format!(
                    "[drinfeld]\nq = {q}\ncoeff_degree = {coeff_degree}\nphi_t = [{}]\ndeg_bound = {deg_bound}\n",
                    coeffs.join(", ")
                );
                let doc = scenario_from_args("drinfeld-survey", body);
                execute(&doc, &Overrides::default(), &output)
            }
            DrinfeldCommand::Sharp { q, deg_bound, output } => {
                let body = format!("[sharp]\nq = {q}\ndeg_bound = {deg_bound}\n");
                let doc = scenario_from_args("drinfeld-sharp", body);
                execute(&doc, &Overrides::default(), &output)
            }
        },
        Command::Gm { command } => match command {
            GmCommand::Intersect { file, output, solver } => {
                let doc = match load_document(&file) {
                    Ok(d) => d,
                    Err(e) => {
                        eprintln!("error: {e}");
                        return ExitCode::from(2);
                    }
                };
                if doc.kind != "gm-intersect" {
                    eprintln!("error: {} is not a gm-intersect scenario", file.display());
                    return ExitCode::from(2);
                }
                let overrides = Overrides {
                    n_max: solver.nmax,
                    sieve: solver.sieve,
                    box_bound: solver.box_bound,
                };
                execute(&doc, &overrides, &output)
            }
        },
        Command::Selftest { seed, count, verbose } => {
            let failures = selftest(seed, count, verbose);
            if failures == 0 {
                println!("selftest: {count} instances, all consistent (seed {seed})");
                ExitCode::SUCCESS
            } else {
                println!("selftest: {failures} of {count} instances FAILED (seed {seed})");
                ExitCode::from(1)
            }
        }
    }
}
