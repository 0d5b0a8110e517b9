//! Deterministic CSV/JSON artifacts from dressed-lattice and blockade-gate
//! calculations.
//!
//! One operation per invocation. The operation and its physics parameters
//! live in a strict-schema JSON config whose top-level `"command"` key
//! selects `potential-scan`, `blockade-scan`, or `report` (see `configs/`
//! at the repository root for working examples). Species constants come
//! from a separate `--preset` file (see `presets/`); commands whose physics
//! involves no species reject a supplied preset rather than ignore it.
//!
//! Config files quote frequencies in Hz, magnetic fields in gauss, and
//! lengths in metres; conversion to the library's angular units happens
//! once at this boundary. Identical inputs produce byte-identical artifacts
//! (no timestamps, stable row ordering); each artifact gains a
//! `<out>.meta.json` sidecar echoing the exact configuration it was built
//! from.
//!
//! Exit codes: 0 success, 2 configuration error, 3 physics-domain error.

mod config;
mod output;

use clap::{Parser, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

use spinlat::gate::{self, BlockadeModel};
use spinlat::lattice;
use spinlat::units::hz_to_angular;
use spinlat::Species;

use config::{ReportKind, RunCommand};

/// CLI failure, split by exit code: configuration problems (flags, files,
/// schema) exit with 2, physics-level rejections from the library with 3.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Domain(#[from] spinlat::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Domain(_) => 3,
        }
    }
}

/// Output artifact encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Dressed-lattice and blockade-gate simulator front end.
#[derive(Debug, Parser)]
#[command(name = "spinlat", version, about)]
struct Cli {
    /// JSON run configuration; its "command" key selects the operation.
    #[arg(long)]
    config: PathBuf,

    /// JSON species preset (mass, wavelength, Zeeman coefficients).
    #[arg(long)]
    preset: Option<PathBuf>,

    /// Output artifact path; a deterministic <out>.meta.json sidecar is
    /// written next to it.
    #[arg(long)]
    out: PathBuf,

    /// Artifact format; scans default to csv, reports are always json.
    #[arg(long, value_enum)]
    format: Option<Format>,

    /// Worker-thread cap for parallel sweeps (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        // Fails only if a global pool already exists, which cannot happen
        // this early in main; surface it anyway rather than ignore it.
        spinlat::exec::configure_threads(n)
            .map_err(|e| CliError::Config(format!("--threads {n}: {e}")))?;
    }

    let config_text = std::fs::read_to_string(&cli.config).map_err(|e| {
        CliError::Config(format!("cannot read config {}: {e}", cli.config.display()))
    })?;
    let (command, config_echo) = config::parse_run_config(&config_text)?;

    let species = match (command.needs_species(), &cli.preset) {
        (true, Some(path)) => Some(config::load_species(path)?),
        (true, None) => {
            return Err(CliError::Config(format!(
                "command \"{}\" requires --preset <species.json>",
                command.name()
            )))
        }
        (false, Some(_)) => {
            return Err(CliError::Config(format!(
                "command \"{}\" takes no species preset; drop --preset",
                command.name()
            )))
        }
        (false, None) => None,
    };

    let format = resolve_format(&command, cli.format)?;
    let artifact = render(&command, species.as_ref().map(|(s, _)| s), format)?;
    let sidecar = output::sidecar_json(
        command.name(),
        format,
        &config_echo,
        species.as_ref().map(|(_, echo)| echo),
    )?;
    output::write_atomic(&cli.out, artifact.as_bytes())?;
    output::write_atomic(&output::sidecar_path(&cli.out), sidecar.as_bytes())?;
    Ok(())
}

/// Scans default to CSV but can ship as JSON; reports are nested documents
/// and only exist as JSON.
fn resolve_format(command: &RunCommand, requested: Option<Format>) -> Result<Format, CliError> {
    match command {
        RunCommand::Report(_) => match requested {
            None | Some(Format::Json) => Ok(Format::Json),
            Some(Format::Csv) => Err(CliError::Config(
                "report artifacts are nested JSON documents; use --format json".into(),
            )),
        },
        _ => Ok(requested.unwrap_or(Format::Csv)),
    }
}

fn render(
    command: &RunCommand,
    species: Option<&Species>,
    format: Format,
) -> Result<String, CliError> {
    match command {
        RunCommand::PotentialScan(cfg) => {
            let species = *species.expect("species presence enforced by caller");
            let lattice_config = cfg.to_lattice(species);
            let phases = cfg.sorted_phases();
            let xs = cfg.position_grid(lattice_config.period());
            let rows = lattice::potential_scan(&lattice_config, &phases, &xs)?;
            match format {
                Format::Csv => Ok(output::potential_rows_csv(&rows)),
                Format::Json => output::potential_rows_json(&rows),
            }
        }
        RunCommand::BlockadeScan(cfg) => {
            let rabi = hz_to_angular(cfg.rabi_hz);
            let family = cfg.family.to_scan_family()?;
            let points = gate::fidelity_scan(family, rabi, &cfg.ratios)?;
            match format {
                Format::Csv => Ok(output::fidelity_points_csv(&points)),
                Format::Json => output::pretty_json(&points),
            }
        }
        RunCommand::Report(kind) => match kind {
            ReportKind::GateTruthTable(cfg) => {
                let rabi = hz_to_angular(cfg.rabi_hz);
                let model = BlockadeModel {
                    rabi,
                    variant: cfg.blockade.to_variant(rabi)?,
                };
                output::pretty_json(&gate::gate_truth_table(&model)?)
            }
            ReportKind::Addressability(cfg) => {
                let species = species.expect("species presence enforced by caller");
                output::pretty_json(&output::addressability_artifact(cfg, species)?)
            }
            ReportKind::DecoherenceBudget(cfg) => {
                let species = species.expect("species presence enforced by caller");
                let report = gate::decoherence_budget(&cfg.to_input(), species)?;
                output::pretty_json(&output::BudgetArtifact::from(report))
            }
        },
    }
}
