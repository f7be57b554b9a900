use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tenfold::commands::{self, OracleOptions};
use tenfold::error::{CliError, CliResult, EXIT_OK, EXIT_OTHER, EXIT_PARSE};
use tenfold::model_file::ToleranceOverrides;
use tenfold::report::RunReport;

/// Symmetry classification, junction zero-mode prediction and finite-size
/// checks for one-dimensional gapped operators.
#[derive(Debug, Parser)]
#[command(name = "tenfold", version)]
struct Cli {
    #[command(flatten)]
    tol: TolArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct TolArgs {
    /// Eigenvalue tolerance (overrides model files).
    #[arg(long = "tol-eig", global = true)]
    eig: Option<f64>,
    /// Rank tolerance (overrides model files).
    #[arg(long = "tol-rank", global = true)]
    rank: Option<f64>,
    /// Frame and residual tolerance (overrides model files).
    #[arg(long = "tol-frame", global = true)]
    frame: Option<f64>,
}

#[derive(Debug, Args)]
struct SpecArgs {
    /// Half length of the discretized domain.
    #[arg(long = "spec-L")]
    half_length: Option<f64>,
    /// Grid step of the discretized domain.
    #[arg(long = "spec-h")]
    h: Option<f64>,
    /// Unit cells per side for tight-binding chains.
    #[arg(long = "spec-cells")]
    n_cells: Option<usize>,
    /// Energy window for near-zero modes (default: a tenth of the bulk gap).
    #[arg(long = "spec-window")]
    energy_window: Option<f64>,
    /// Write the window spectrum (index, eigenvalue, central_weight) as CSV.
    #[arg(long)]
    spectra: Option<PathBuf>,
}

impl From<SpecArgs> for OracleOptions {
    fn from(a: SpecArgs) -> Self {
        OracleOptions { half_length: a.half_length, h: a.h, n_cells: a.n_cells, energy_window: a.energy_window, spectra: a.spectra }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Symmetry class, membership residuals and indices of one bulk.
    Classify {
        model: PathBuf,
        /// Write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Protected bound and predicted zero modes of a junction: two bulk
    /// files, or one piecewise_dirac profile.
    Junction {
        #[arg(required = true, num_args = 1..=2)]
        models: Vec<PathBuf>,
        /// Also count localized near-zero modes of a finite discretization.
        #[arg(long)]
        verify: bool,
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Same as `junction --verify`.
    Verify {
        #[arg(required = true, num_args = 1..=2)]
        models: Vec<PathBuf>,
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a template with one "@sweep" value over a parameter grid.
    #[command(allow_negative_numbers = true)]
    Sweep {
        template: PathBuf,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long, default_value_t = 41)]
        points: usize,
        /// Left bulk of a junction whose predicted mode count is tabulated.
        #[arg(long)]
        reference: Option<PathBuf>,
        /// CSV output path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the ten symmetry classes.
    Table,
}

fn write_report(report: &RunReport, out: Option<&Path>) -> CliResult<()> {
    print!("{}", report.render());
    if let Some(path) = out {
        std::fs::write(path, report.to_json() + "\n").map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })?;
    }
    Ok(())
}

/// Exit status of a finished report: a failed oracle comparison is not a success.
fn report_status(report: &RunReport) -> i32 {
    match &report.oracle {
        Some(o) if o.verdict == "FAIL" => EXIT_OTHER,
        _ => EXIT_OK,
    }
}

fn run(cli: Cli) -> CliResult<i32> {
    let tol = ToleranceOverrides { rank: cli.tol.rank, eig: cli.tol.eig, frame: cli.tol.frame };
    match cli.command {
        Command::Classify { model, out } => {
            let report = commands::classify(&model, tol)?;
            write_report(&report, out.as_deref())?;
            Ok(report_status(&report))
        }
        Command::Junction { models, verify, spec, out } => {
            let opts: OracleOptions = spec.into();
            let report = commands::junction(&models, tol, verify.then_some(&opts))?;
            write_report(&report, out.as_deref())?;
            Ok(report_status(&report))
        }
        Command::Verify { models, spec, out } => {
            let report = commands::junction(&models, tol, Some(&spec.into()))?;
            write_report(&report, out.as_deref())?;
            Ok(report_status(&report))
        }
        Command::Sweep { template, from, to, points, reference, out } => {
            if points == 0 {
                return Err(CliError::Usage("--points must be positive".into()));
            }
            let rows = commands::sweep(&template, &commands::sweep_grid(from, to, points), reference.as_deref(), tol)?;
            commands::write_sweep_csv(&rows, &out)?;
            let closed = rows.iter().filter(|r| r.status != "OK").count();
            println!("{} points written to {} ({closed} with the gap closed)", rows.len(), out.display());
            Ok(EXIT_OK)
        }
        Command::Table => {
            print!("{}", commands::table());
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_PARSE as u8 } else { EXIT_OK as u8 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
