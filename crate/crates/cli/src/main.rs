use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cylstokes_cli::config::RunConfig;
use cylstokes_cli::{exit_code, run, Command, EXIT_CONFIG};

#[derive(Parser)]
#[command(name = "cylstokes", version, about = "Verification suites and solvers for the generalized Stokes operator on cylinders")]
struct Cli {
    /// JSON run configuration; defaults apply to every missing field.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for reports and fields.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Overrides the seed of the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for the per-tau solves.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Refuse Navier-Stokes data above zeta and count hypothesis warnings as failures.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Numerical checks of transforms, symbols, Green formulas and jump relations.
    Verify {
        #[command(subcommand)]
        what: Verify,
    },
    /// Singular-value scans over the axial frequency.
    Scan {
        #[command(subcommand)]
        what: Scan,
    },
    /// Linear Dirichlet and Navier-Stokes solves on an arc of the cylinder.
    Solve {
        #[command(subcommand)]
        what: Solve,
    },
    /// Runs all verify and scan suites and collects earlier solver reports.
    Report,
}

#[derive(Subcommand)]
enum Verify {
    /// Principal-value transform, jump functional and residue integrals.
    Fourier,
    /// Symbol inverse and boundary symbols against closed forms.
    Symbols,
    /// Green formula for random state pairs.
    Green,
    /// Layer-potential jumps and operator identities.
    Jumps,
}

#[derive(Subcommand)]
enum Scan {
    /// Indicial family on the full circle.
    Invertibility,
    /// Boundary operators on the arc.
    BoundaryInvertibility,
}

#[derive(Subcommand)]
enum Solve {
    /// Linear problem by single-layer, double-layer and direct routes.
    Dirichlet,
    /// Stationary Navier-Stokes by Picard iteration.
    Ns,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cmd = match cli.cmd {
        Cmd::Verify { what: Verify::Fourier } => Command::VerifyFourier,
        Cmd::Verify { what: Verify::Symbols } => Command::VerifySymbols,
        Cmd::Verify { what: Verify::Green } => Command::VerifyGreen,
        Cmd::Verify { what: Verify::Jumps } => Command::VerifyJumps,
        Cmd::Scan { what: Scan::Invertibility } => Command::ScanInvertibility,
        Cmd::Scan { what: Scan::BoundaryInvertibility } => Command::ScanBoundaryInvertibility,
        Cmd::Solve { what: Solve::Dirichlet } => Command::SolveDirichlet,
        Cmd::Solve { what: Solve::Ns } => Command::SolveNs,
        Cmd::Report => Command::Report,
    };
    let mut cfg = match &cli.config {
        None => RunConfig::default(),
        Some(path) => match std::fs::read_to_string(path).map_err(|e| e.to_string()).and_then(|t| RunConfig::from_json(&t).map_err(|e| e.to_string())) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("{}: {e}", path.display());
                return ExitCode::from(EXIT_CONFIG as u8);
            }
        },
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(n) = cli.threads {
        if n == 0 || rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
            eprintln!("invalid --threads {n}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    }
    let result = run(cmd, &cfg, &cli.out, cli.strict);
    match &result {
        Ok(b) => {
            for r in b.rows.iter().filter(|r| !r.pass) {
                eprintln!("FAIL {}: measured {:e}, expected {:e}, tolerance {:e}", r.check_id, r.measured, r.expected, r.tolerance);
            }
            for n in &b.notes {
                eprintln!("note: {n}");
            }
            println!("{}: {} passed, {} failed; reports in {}", b.command, b.passed, b.failed, cli.out.display());
        }
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(exit_code(&result) as u8)
}
