//! Artifact rendering and atomic file output.
//!
//! CSV artifacts carry exactly one header line and print floats with 17
//! significant digits so they round-trip to the same f64. JSON artifacts go
//! through serde_json, whose object keys serialize in sorted order and
//! whose float encoding is shortest-round-trip, so every artifact is
//! byte-identical across runs with identical inputs. Files are written to a
//! temp file in the destination directory and renamed into place, so a
//! failed run never leaves a partial artifact.

use serde::Serialize;
use serde_json::Value;
use std::io::Write;
use std::path::{Path, PathBuf};

use spinlat::gate::{BudgetReport, FidelityPoint};
use spinlat::lattice::ScanRow;
use spinlat::register::{
    readout_addressability, AddressabilityReport, GradientConfig, HalfInt, SelectivityReport,
    ZeemanConfig,
};
use spinlat::units::{angular_to_hz, hz_to_angular};
use spinlat::Species;

use crate::config::AddressabilityConfig;
use crate::{CliError, Format};

pub const POTENTIAL_HEADER: &str = "phi_rad,x_m,spin,v_lower_hz,v_upper_hz,admixture_e";
pub const FIDELITY_HEADER: &str = "ratio,loss_probability,process_fidelity,gamma_eff_prediction";

/// 17 significant digits, enough to reconstruct the exact f64.
fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn potential_rows_csv(rows: &[ScanRow]) -> String {
    let mut out = String::with_capacity(64 + rows.len() * 120);
    out.push_str(POTENTIAL_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            sig17(r.relative_phase),
            sig17(r.x),
            r.spin.index(),
            sig17(angular_to_hz(r.v_lower)),
            sig17(angular_to_hz(r.v_upper)),
            sig17(r.admixture_e),
        ));
    }
    out
}

/// JSON mirror of the potential-scan CSV columns.
#[derive(Serialize)]
struct PotentialRow {
    phi_rad: f64,
    x_m: f64,
    spin: usize,
    v_lower_hz: f64,
    v_upper_hz: f64,
    admixture_e: f64,
}

pub fn potential_rows_json(rows: &[ScanRow]) -> Result<String, CliError> {
    let rows: Vec<PotentialRow> = rows
        .iter()
        .map(|r| PotentialRow {
            phi_rad: r.relative_phase,
            x_m: r.x,
            spin: r.spin.index(),
            v_lower_hz: angular_to_hz(r.v_lower),
            v_upper_hz: angular_to_hz(r.v_upper),
            admixture_e: r.admixture_e,
        })
        .collect();
    pretty_json(&rows)
}

pub fn fidelity_points_csv(points: &[FidelityPoint]) -> String {
    let mut out = String::with_capacity(64 + points.len() * 96);
    out.push_str(FIDELITY_HEADER);
    out.push('\n');
    for p in points {
        out.push_str(&format!(
            "{},{},{},{}\n",
            sig17(p.ratio),
            sig17(p.loss_probability),
            sig17(p.process_fidelity),
            sig17(p.gamma_eff_prediction),
        ));
    }
    out
}

pub fn pretty_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Config(format!("serialize artifact: {e}")))?;
    text.push('\n');
    Ok(text)
}

/// Qubit addressing (Zeeman selectivity) and site-resolved readout margins
/// in one document.
#[derive(Serialize)]
pub struct AddressabilityArtifact {
    /// Resonance spacing between neighbouring nuclear-spin projections, Hz.
    pub neighbour_spacing_hz: f64,
    pub zeeman: SelectivityReport,
    pub readout: AddressabilityReport,
}

pub fn addressability_artifact(
    cfg: &AddressabilityConfig,
    species: &Species,
) -> Result<AddressabilityArtifact, CliError> {
    let zeeman_config = ZeemanConfig {
        species: *species,
        field_gauss: cfg.field_gauss,
        qubit_pair: (
            HalfInt::new_twice(cfg.qubit_pair_twice_m[0]),
            HalfInt::new_twice(cfg.qubit_pair_twice_m[1]),
        ),
    };
    let zeeman = zeeman_config.selectivity(hz_to_angular(cfg.drive_rabi_hz))?;
    let gradient = GradientConfig {
        gradient_gauss_per_cm: cfg.gradient_gauss_per_cm,
        site_spacing_m: cfg.site_spacing_m,
    };
    let readout = readout_addressability(
        &gradient,
        species,
        hz_to_angular(cfg.trap_frequency_hz),
        hz_to_angular(cfg.raman_rabi_hz),
    )?;
    Ok(AddressabilityArtifact {
        neighbour_spacing_hz: zeeman_config.neighbour_spacing_hz(),
        zeeman,
        readout,
    })
}

/// Decoherence budget with the frequency-valued entries converted back to
/// Hz for the artifact.
#[derive(Serialize)]
pub struct BudgetArtifact {
    pub heating_rate_per_s: f64,
    pub trap_frequency_difference_hz: f64,
    pub trap_frequency_difference_linear_hz: f64,
    pub linearization_rel_gap: f64,
    pub fractional_depth_estimate: f64,
    pub pair_loss_rate_per_s: f64,
    pub dephasing_time_s: Option<f64>,
}

impl From<BudgetReport> for BudgetArtifact {
    fn from(report: BudgetReport) -> Self {
        BudgetArtifact {
            heating_rate_per_s: report.heating_rate,
            trap_frequency_difference_hz: angular_to_hz(report.trap_frequency_difference),
            trap_frequency_difference_linear_hz: angular_to_hz(
                report.trap_frequency_difference_linear,
            ),
            linearization_rel_gap: report.linearization_rel_gap,
            fractional_depth_estimate: report.fractional_depth_estimate,
            pair_loss_rate_per_s: report.pair_loss_rate,
            dephasing_time_s: report.dephasing_time,
        }
    }
}

/// Deterministic run-metadata sidecar: tool identity plus a verbatim echo
/// of the parsed config and preset. Deliberately no timestamps, so repeated
/// runs stay byte-identical.
pub fn sidecar_json(
    command: &str,
    format: Format,
    config_echo: &Value,
    preset_echo: Option<&Value>,
) -> Result<String, CliError> {
    pretty_json(&serde_json::json!({
        "tool": "spinlat",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "format": format.name(),
        "config": config_echo,
        "preset": preset_echo,
    }))
}

/// `scan.csv` gets its metadata at `scan.csv.meta.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(".meta.json");
    out.with_file_name(name)
}

/// Writes via a temp file in the destination directory plus rename, so the
/// final path either holds the complete artifact or nothing.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let fail = |e: &dyn std::fmt::Display| {
        CliError::Config(format!("cannot write {}: {e}", path.display()))
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| fail(&e))?;
    tmp.write_all(bytes).map_err(|e| fail(&e))?;
    tmp.persist(path).map_err(|e| fail(&e))?;
    Ok(())
}
