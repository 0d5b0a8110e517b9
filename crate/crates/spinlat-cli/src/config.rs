//! Strict-schema run configuration.
//!
//! The config file is a single JSON object whose `"command"` key names the
//! operation; the remaining keys are that command's parameter block and are
//! deserialized with `deny_unknown_fields`, so a typo in a physics
//! parameter is an error rather than a silently applied default. Tag keys
//! (`"command"`, `"report"`) are dispatched by hand on `serde_json::Value`
//! to keep the error messages explicit and the strictness airtight.

use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{Map, Value};
use std::f64::consts::TAU;
use std::path::Path;

use spinlat::gate::{BlockadeVariant, BudgetInput, ScanFamily};
use spinlat::lattice::{LatticeConfig, StarkShifts};
use spinlat::units::hz_to_angular;
use spinlat::Species;

use crate::CliError;

/// The operation selected by the config, with its parameter block parsed.
#[derive(Debug)]
pub enum RunCommand {
    PotentialScan(PotentialScanConfig),
    BlockadeScan(BlockadeScanConfig),
    Report(ReportKind),
}

impl RunCommand {
    pub fn name(&self) -> &'static str {
        match self {
            RunCommand::PotentialScan(_) => "potential-scan",
            RunCommand::BlockadeScan(_) => "blockade-scan",
            RunCommand::Report(_) => "report",
        }
    }

    /// Whether the command's physics involves species constants and hence
    /// needs a `--preset` file.
    pub fn needs_species(&self) -> bool {
        match self {
            RunCommand::PotentialScan(_) => true,
            RunCommand::BlockadeScan(_) => false,
            RunCommand::Report(kind) => match kind {
                ReportKind::GateTruthTable(_) => false,
                ReportKind::Addressability(_) | ReportKind::DecoherenceBudget(_) => true,
            },
        }
    }
}

/// Report sub-kind, selected by the config's `"report"` key.
#[derive(Debug)]
pub enum ReportKind {
    GateTruthTable(GateTruthTableConfig),
    Addressability(AddressabilityConfig),
    DecoherenceBudget(BudgetConfig),
}

/// Parses the run configuration, returning the command plus the full
/// original document for the sidecar echo.
pub fn parse_run_config(text: &str) -> Result<(RunCommand, Value), CliError> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| CliError::Config(format!("config: {e}")))?;
    let echo = value.clone();
    let Value::Object(mut obj) = value else {
        return Err(CliError::Config(
            "config: top level must be a JSON object".into(),
        ));
    };
    let command = take_tag(&mut obj, "command", "config")?;
    let parsed = match command.as_str() {
        "potential-scan" => {
            let cfg: PotentialScanConfig = from_object(obj, "potential-scan config")?;
            cfg.validate()?;
            RunCommand::PotentialScan(cfg)
        }
        "blockade-scan" => {
            let cfg: BlockadeScanConfig = from_object(obj, "blockade-scan config")?;
            cfg.validate()?;
            RunCommand::BlockadeScan(cfg)
        }
        "report" => {
            let kind = take_tag(&mut obj, "report", "report config")?;
            let report = match kind.as_str() {
                "gate-truth-table" => {
                    ReportKind::GateTruthTable(from_object(obj, "gate-truth-table config")?)
                }
                "addressability" => {
                    ReportKind::Addressability(from_object(obj, "addressability config")?)
                }
                "decoherence-budget" => {
                    ReportKind::DecoherenceBudget(from_object(obj, "decoherence-budget config")?)
                }
                other => {
                    return Err(CliError::Config(format!(
                        "unknown report \"{other}\" (expected gate-truth-table, \
                         addressability, or decoherence-budget)"
                    )))
                }
            };
            RunCommand::Report(report)
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown command \"{other}\" (expected potential-scan, blockade-scan, \
                 or report)"
            )))
        }
    };
    Ok((parsed, echo))
}

/// Reads and validates a species preset, returning the parsed species plus
/// the original document for the sidecar echo.
pub fn load_species(path: &Path) -> Result<(Species, Value), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::Config(format!("cannot read species preset {}: {e}", path.display()))
    })?;
    let species = Species::from_json_str(&text)
        .map_err(|e| CliError::Config(format!("species preset {}: {e}", path.display())))?;
    let echo: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("species preset {}: {e}", path.display())))?;
    Ok((species, echo))
}

fn take_tag(obj: &mut Map<String, Value>, key: &str, what: &str) -> Result<String, CliError> {
    match obj.remove(key) {
        Some(Value::String(s)) => Ok(s),
        Some(_) => Err(CliError::Config(format!(
            "{what}: \"{key}\" must be a string"
        ))),
        None => Err(CliError::Config(format!("{what}: missing \"{key}\" key"))),
    }
}

fn from_object<T: DeserializeOwned>(
    obj: Map<String, Value>,
    what: &str,
) -> Result<T, CliError> {
    serde_json::from_value(Value::Object(obj))
        .map_err(|e| CliError::Config(format!("{what}: {e}")))
}

/// Parameters of a relative-phase / position sweep of the two dressed
/// potentials. Combined with a species preset into a [`LatticeConfig`].
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialScanConfig {
    /// Peak Rabi frequency of both dressing standing waves, Hz.
    pub rabi_peak_hz: f64,
    /// Dressing-laser detuning from the metastable transition, Hz.
    pub detuning_hz: f64,
    /// Peak per-beam off-resonant Stark shift of the dressed qubit level, Hz.
    pub stark_ground_peak_hz: f64,
    /// Peak per-beam off-resonant Stark shift of the metastable level, Hz.
    pub stark_excited_peak_hz: f64,
    /// Keep the off-resonant Stark terms in the Hamiltonian; with `false`
    /// the potentials follow the resonant closed form exactly.
    pub include_offresonant: bool,
    /// Relative standing-wave phases to scan, rad. Rows are emitted in
    /// ascending phase order regardless of the order given here.
    pub relative_phases_rad: Vec<f64>,
    /// Position-grid resolution; the library requires at least 64.
    pub points_per_period: u32,
    /// Lattice periods covered by the grid (endpoint excluded, so the grid
    /// tiles seamlessly).
    pub periods: u32,
}

impl PotentialScanConfig {
    fn validate(&self) -> Result<(), CliError> {
        if self.relative_phases_rad.is_empty() {
            return Err(CliError::Config(
                "potential-scan config: phases must be nonempty".into(),
            ));
        }
        if self.points_per_period == 0 {
            return Err(CliError::Config(
                "potential-scan config: points_per_period must be at least 1".into(),
            ));
        }
        if self.periods == 0 {
            return Err(CliError::Config(
                "potential-scan config: periods must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn to_lattice(&self, species: Species) -> LatticeConfig {
        LatticeConfig::symmetric(
            species,
            hz_to_angular(self.rabi_peak_hz),
            hz_to_angular(self.detuning_hz),
            StarkShifts {
                ground_peak: hz_to_angular(self.stark_ground_peak_hz),
                excited_peak: hz_to_angular(self.stark_excited_peak_hz),
            },
            self.include_offresonant,
        )
    }

    pub fn sorted_phases(&self) -> Vec<f64> {
        let mut phases = self.relative_phases_rad.clone();
        phases.sort_by(f64::total_cmp);
        phases
    }

    /// Endpoint-exclusive grid `x_j = j * period / points_per_period`.
    pub fn position_grid(&self, period: f64) -> Vec<f64> {
        let n = self.points_per_period as usize * self.periods as usize;
        let step = period / f64::from(self.points_per_period);
        (0..n).map(|j| j as f64 * step).collect()
    }
}

/// Parameters of a blockade-strength sweep of the two-qubit gate.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockadeScanConfig {
    /// Rabi frequency of the auxiliary drive pulses, Hz.
    pub rabi_hz: f64,
    pub family: FamilyConfig,
    /// Scanned blockade strengths in units of the Rabi frequency:
    /// gamma/Omega for the lossy and combined families, delta/Omega for the
    /// interaction family.
    pub ratios: Vec<f64>,
}

impl BlockadeScanConfig {
    fn validate(&self) -> Result<(), CliError> {
        if self.ratios.is_empty() {
            return Err(CliError::Config(
                "blockade-scan config: ratios must be nonempty".into(),
            ));
        }
        self.family.to_scan_family()?;
        Ok(())
    }
}

/// One-parameter blockade family for sweeps.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    /// "lossy", "interaction", or "combined".
    pub kind: String,
    /// Fixed interaction shift in units of the Rabi frequency; required by
    /// (and only valid for) the combined family.
    #[serde(default)]
    pub delta_over_rabi: Option<f64>,
}

impl FamilyConfig {
    pub fn to_scan_family(&self) -> Result<ScanFamily, CliError> {
        match (self.kind.as_str(), self.delta_over_rabi) {
            ("lossy", None) => Ok(ScanFamily::Lossy),
            ("interaction", None) => Ok(ScanFamily::Interaction),
            ("combined", Some(delta_over_rabi)) => Ok(ScanFamily::Combined { delta_over_rabi }),
            ("combined", None) => Err(CliError::Config(
                "blockade family \"combined\" requires delta_over_rabi".into(),
            )),
            ("lossy" | "interaction", Some(_)) => Err(CliError::Config(format!(
                "blockade family \"{}\" does not take delta_over_rabi",
                self.kind
            ))),
            (other, _) => Err(CliError::Config(format!(
                "unknown blockade family \"{other}\" (expected lossy, interaction, \
                 or combined)"
            ))),
        }
    }
}

/// Parameters of a single gate-characterization run.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateTruthTableConfig {
    /// Rabi frequency of the auxiliary drive pulses, Hz.
    pub rabi_hz: f64,
    pub blockade: BlockadeSpec,
}

/// Blockade mechanism for a single run, with strengths in units of the
/// Rabi frequency.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockadeSpec {
    /// "perfect", "interaction", "lossy", or "combined".
    pub kind: String,
    #[serde(default)]
    pub delta_over_rabi: Option<f64>,
    #[serde(default)]
    pub gamma_over_rabi: Option<f64>,
}

impl BlockadeSpec {
    pub fn to_variant(&self, rabi: f64) -> Result<BlockadeVariant, CliError> {
        let reject = |field: &str| -> CliError {
            CliError::Config(format!(
                "blockade kind \"{}\" does not take {field}",
                self.kind
            ))
        };
        let require = |field: &str| -> CliError {
            CliError::Config(format!("blockade kind \"{}\" requires {field}", self.kind))
        };
        match self.kind.as_str() {
            "perfect" => match (self.delta_over_rabi, self.gamma_over_rabi) {
                (None, None) => Ok(BlockadeVariant::Perfect),
                (Some(_), _) => Err(reject("delta_over_rabi")),
                (None, Some(_)) => Err(reject("gamma_over_rabi")),
            },
            "interaction" => match (self.delta_over_rabi, self.gamma_over_rabi) {
                (Some(d), None) => Ok(BlockadeVariant::Interaction { delta: d * rabi }),
                (None, _) => Err(require("delta_over_rabi")),
                (_, Some(_)) => Err(reject("gamma_over_rabi")),
            },
            "lossy" => match (self.delta_over_rabi, self.gamma_over_rabi) {
                (None, Some(g)) => Ok(BlockadeVariant::Lossy { gamma: g * rabi }),
                (_, None) => Err(require("gamma_over_rabi")),
                (Some(_), _) => Err(reject("delta_over_rabi")),
            },
            "combined" => match (self.delta_over_rabi, self.gamma_over_rabi) {
                (Some(d), Some(g)) => Ok(BlockadeVariant::Combined {
                    delta: d * rabi,
                    gamma: g * rabi,
                }),
                (None, _) => Err(require("delta_over_rabi")),
                (_, None) => Err(require("gamma_over_rabi")),
            },
            other => Err(CliError::Config(format!(
                "unknown blockade kind \"{other}\" (expected perfect, interaction, \
                 lossy, or combined)"
            ))),
        }
    }
}

/// Parameters of a qubit-addressing and site-resolved-readout report.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AddressabilityConfig {
    /// Bias field, gauss.
    pub field_gauss: f64,
    /// The two nuclear-spin projections encoding the qubit, each stored as
    /// twice its value (so m = 9/2 is 9).
    pub qubit_pair_twice_m: [i32; 2],
    /// Rabi frequency of the dressing/gate drive whose selectivity against
    /// the qubit splitting is judged, Hz.
    pub drive_rabi_hz: f64,
    /// Readout field gradient, gauss per cm.
    pub gradient_gauss_per_cm: f64,
    /// Site spacing, m; null or absent selects half the clock wavelength.
    #[serde(default)]
    pub site_spacing_m: Option<f64>,
    /// Trap frequency during readout, Hz.
    pub trap_frequency_hz: f64,
    /// Raman readout Rabi frequency, Hz.
    pub raman_rabi_hz: f64,
}

/// Parameters of the dressed-qubit decoherence budget.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetConfig {
    /// Trap frequency, Hz.
    pub trap_frequency_hz: f64,
    /// One-sided PSD of fractional lattice-intensity noise as
    /// `[frequency_hz, psd_per_hz]` pairs, ascending in frequency. Must
    /// cover twice the trap frequency.
    pub intensity_noise_psd: Vec<(f64, f64)>,
    /// Lattice depth expressed as a frequency, Hz.
    pub lattice_depth_hz: f64,
    /// Fractional mismatch between the two dressing wavelengths.
    pub wavelength_mismatch: f64,
    /// RMS detuning noise of the dressing laser, Hz.
    pub detuning_noise_hz: f64,
    /// Dressing Rabi frequency, Hz.
    pub dressing_rabi_hz: f64,
    /// Amplitude admixture of the short-lived auxiliary level.
    pub aux_admixture: f64,
    /// Decay rate of that auxiliary level, 1/s.
    pub aux_decay_rate_per_s: f64,
}

impl BudgetConfig {
    /// Converts to library units: frequencies become angular, and the PSD
    /// pairs pick up the Jacobian that preserves integrated power,
    /// `(f, S) -> (2 pi f, S / 2 pi)`.
    pub fn to_input(&self) -> BudgetInput {
        BudgetInput {
            trap_omega: hz_to_angular(self.trap_frequency_hz),
            intensity_noise_psd: self
                .intensity_noise_psd
                .iter()
                .map(|&(f, s)| (hz_to_angular(f), s / TAU))
                .collect(),
            lattice_depth: hz_to_angular(self.lattice_depth_hz),
            wavelength_mismatch: self.wavelength_mismatch,
            detuning_noise: hz_to_angular(self.detuning_noise_hz),
            dressing_rabi: hz_to_angular(self.dressing_rabi_hz),
            aux_admixture: self.aux_admixture,
            aux_decay_rate: self.aux_decay_rate_per_s,
        }
    }
}
