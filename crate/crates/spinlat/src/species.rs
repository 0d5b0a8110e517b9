//! Atomic species parameters.
//!
//! A [`Species`] bundles the handful of constants the simulator needs:
//! mass, clock-transition wavelength (which sets the lattice wavenumber and
//! the default site spacing), the linear nuclear Zeeman coefficient of the
//! clock states, the magnetic-gradient coefficient of the stretched
//! metastable readout state, and the nuclear spin. Presets ship as JSON
//! files with the same field names (see `presets/sr87.json`).

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Constants describing one alkaline-earth-like species.
///
/// The nuclear spin is stored as `2I` so that half-integer spins stay exact
/// integers end to end.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Species {
    /// Atomic mass, kg.
    pub mass_kg: f64,
    /// Wavelength of the clock transition, m. Dressing lattices in this
    /// crate run at this wavelength, so it also fixes the lattice period.
    pub clock_wavelength_m: f64,
    /// Differential nuclear Zeeman shift of the clock transition, Hz per
    /// gauss per unit m_I.
    pub zeeman_hz_per_gauss: f64,
    /// Field-gradient coefficient of the stretched metastable readout
    /// state, Hz per cm of displacement per (gauss per cm) of gradient.
    pub p2_gradient_hz_per_cm_per_gauss_per_cm: f64,
    /// Twice the nuclear spin (integer; 9 means I = 9/2).
    #[serde(rename = "nuclear_spin_2I")]
    pub nuclear_spin_2i: u32,
}

impl Species {
    /// Fermionic strontium-87.
    ///
    /// Mass 86.908877 u and the 698.4457 nm clock wavelength are standard
    /// reference values; the Zeeman coefficient (109 Hz/G per m_I) and the
    /// stretched-state gradient coefficient (4.1 MHz/cm per G/cm) are the
    /// operating values for the clock qubit and the |F = 13/2, m_F = -13/2>
    /// readout state.
    pub fn sr87() -> Self {
        Species {
            mass_kg: 1.443_155_86e-25,
            clock_wavelength_m: 698.4457e-9,
            zeeman_hz_per_gauss: 109.0,
            p2_gradient_hz_per_cm_per_gauss_per_cm: 4.1e6,
            nuclear_spin_2i: 9,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (value, name) in [
            (self.mass_kg, "mass_kg"),
            (self.clock_wavelength_m, "clock_wavelength_m"),
            (self.zeeman_hz_per_gauss, "zeeman_hz_per_gauss"),
            (
                self.p2_gradient_hz_per_cm_per_gauss_per_cm,
                "p2_gradient_hz_per_cm_per_gauss_per_cm",
            ),
        ] {
            crate::error::ensure_finite(value, name)?;
        }
        if self.mass_kg <= 0.0 {
            return Err(Error::InvalidParam("mass_kg must be positive".into()));
        }
        if self.clock_wavelength_m <= 0.0 {
            return Err(Error::InvalidParam(
                "clock_wavelength_m must be positive".into(),
            ));
        }
        if self.nuclear_spin_2i == 0 {
            return Err(Error::InvalidParam(
                "nuclear_spin_2I must be at least 1 (I >= 1/2)".into(),
            ));
        }
        Ok(())
    }

    /// Parses a preset from JSON, rejecting unknown keys.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let species: Species = serde_json::from_str(text)
            .map_err(|e| Error::InvalidParam(format!("species preset: {e}")))?;
        species.validate()?;
        Ok(species)
    }

    /// Lattice wavenumber 2pi/lambda of a dressing beam at the clock
    /// wavelength, rad/m.
    pub fn lattice_wavenumber(&self) -> f64 {
        TAU / self.clock_wavelength_m
    }

    /// Default site spacing lambda/2, m.
    pub fn default_site_spacing_m(&self) -> f64 {
        0.5 * self.clock_wavelength_m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sr87_preset_values() {
        let sr = Species::sr87();
        sr.validate().unwrap();
        assert_eq!(sr.zeeman_hz_per_gauss, 109.0);
        assert_eq!(sr.p2_gradient_hz_per_cm_per_gauss_per_cm, 4.1e6);
        assert_eq!(sr.nuclear_spin_2i, 9);
        // 87 u to within a part in 1e3, half the clock wavelength ~349 nm.
        assert!((sr.mass_kg / 1.6605e-27 - 87.0).abs() < 0.1);
        assert!((sr.default_site_spacing_m() - 349.22e-9).abs() < 0.1e-9);
    }

    #[test]
    fn json_roundtrip_and_strict_schema() {
        let sr = Species::sr87();
        let text = serde_json::to_string(&sr).unwrap();
        assert!(text.contains("nuclear_spin_2I"));
        let back = Species::from_json_str(&text).unwrap();
        assert_eq!(back, sr);

        let with_extra = text.replace('}', ",\"surprise\":1}");
        assert!(Species::from_json_str(&with_extra).is_err());
    }

    #[test]
    fn rejects_nonpositive_mass() {
        let mut sr = Species::sr87();
        sr.mass_kg = 0.0;
        assert!(sr.validate().is_err());
    }
}
