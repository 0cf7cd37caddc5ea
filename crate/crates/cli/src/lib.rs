//! Command-line front end: configuration, report bundles and the suites behind each subcommand.

pub mod config;
pub mod report;
pub mod suites;

use std::path::Path;

use config::{ConfigError, RunConfig};
use report::{ReportBundle, Row};
use suites::{RunError, SuiteOutput};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    VerifyFourier,
    VerifySymbols,
    VerifyGreen,
    VerifyJumps,
    ScanInvertibility,
    ScanBoundaryInvertibility,
    SolveDirichlet,
    SolveNs,
    Report,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Command::VerifyFourier,
        Command::VerifySymbols,
        Command::VerifyGreen,
        Command::VerifyJumps,
        Command::ScanInvertibility,
        Command::ScanBoundaryInvertibility,
        Command::SolveDirichlet,
        Command::SolveNs,
        Command::Report,
    ];

    /// The subcommand as typed on the command line.
    pub fn name(self) -> &'static str {
        match self {
            Command::VerifyFourier => "verify fourier",
            Command::VerifySymbols => "verify symbols",
            Command::VerifyGreen => "verify green",
            Command::VerifyJumps => "verify jumps",
            Command::ScanInvertibility => "scan invertibility",
            Command::ScanBoundaryInvertibility => "scan boundary-invertibility",
            Command::SolveDirichlet => "solve dirichlet",
            Command::SolveNs => "solve ns",
            Command::Report => "report",
        }
    }

    /// File stem of the report bundle.
    pub fn stem(self) -> String {
        self.name().replace([' ', '-'], "_")
    }
}

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

fn run_suite(cmd: Command, cfg: &RunConfig, out: &Path, strict: bool) -> Result<SuiteOutput, RunError> {
    Ok(match cmd {
        Command::VerifyFourier => suites::verify_fourier(cfg),
        Command::VerifySymbols => suites::verify_symbols(cfg),
        Command::VerifyGreen => suites::verify_green(cfg),
        Command::VerifyJumps => suites::verify_jumps(cfg)?,
        Command::ScanInvertibility => suites::scan_invertibility(cfg, out)?,
        Command::ScanBoundaryInvertibility => suites::scan_boundary_invertibility(cfg, out, strict)?,
        Command::SolveDirichlet => suites::solve_dirichlet(cfg, out)?,
        Command::SolveNs => suites::solve_ns(cfg, out, strict)?,
        Command::Report => {
            let mut rows = Vec::new();
            let mut notes = Vec::new();
            let sub_cfg = RunConfig { command: None, ..cfg.clone() };
            for sub in &Command::ALL[..6] {
                let o = run(*sub, &sub_cfg, out, strict)?;
                rows.extend(o.rows.into_iter().map(|r| Row { check_id: format!("{}/{}", sub.stem(), r.check_id), ..r }));
                notes.extend(o.notes.into_iter().map(|n| format!("{}: {n}", sub.stem())));
            }
            // Solver bundles from earlier runs in the same directory.
            for sub in [Command::SolveDirichlet, Command::SolveNs] {
                let path = out.join(format!("{}.json", sub.stem()));
                if let Ok(text) = std::fs::read_to_string(&path) {
                    let b: ReportBundle = serde_json::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
                    rows.extend(b.rows.into_iter().map(|r| Row { check_id: format!("{}/{}", sub.stem(), r.check_id), ..r }));
                    notes.push(format!("included {}", path.display()));
                }
            }
            SuiteOutput { rows, notes }
        }
    })
}

/// Runs one subcommand and writes `<stem>.json` and `<stem>.csv` under `out`.
pub fn run(cmd: Command, cfg: &RunConfig, out: &Path, strict: bool) -> Result<ReportBundle, RunError> {
    if let Some(c) = &cfg.command {
        if c != cmd.name() {
            return Err(ConfigError(format!("config is for `{c}`, not `{}`", cmd.name())).into());
        }
    }
    std::fs::create_dir_all(out)?;
    let o = run_suite(cmd, cfg, out, strict)?;
    let bundle = ReportBundle::new(cmd.name(), cfg.seed, o.rows, o.notes);
    bundle.write(out, &cmd.stem())?;
    Ok(bundle)
}

/// Exit code for a finished run.
pub fn exit_code(result: &Result<ReportBundle, RunError>) -> i32 {
    match result {
        Ok(b) if b.all_pass() => EXIT_PASS,
        Ok(_) => EXIT_FAIL,
        Err(RunError::Config(_)) => EXIT_CONFIG,
        Err(RunError::Io(_)) => EXIT_CONFIG,
    }
}
