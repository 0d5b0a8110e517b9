//! Nuclear-spin register: Zeeman addressing, tensor light shifts, and
//! site-resolved readout margins.
//!
//! Qubits are encoded in pairs of nuclear-spin projections of the clock
//! states. A bias field fans the m_I ladder out linearly (109 Hz/G per unit
//! m_I for strontium-87), which makes dressing and gate drives frequency
//! selective; a field gradient on the stretched metastable state splits
//! resonances site by site for readout.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{ensure_finite, Error, Result};
use crate::species::Species;
use crate::units::hz_to_angular;

/// Ratio of qubit splitting to drive Rabi frequency above which a drive is
/// considered frequency selective.
pub const DEFAULT_SELECTIVITY_THRESHOLD: f64 = 10.0;

/// Trap-to-Raman frequency ratio required for band-resolved readout.
pub const BAND_SAFETY_FACTOR: f64 = 10.0;

/// Half-integer stored exactly as twice its value, so m = 9/2 is
/// `HalfInt::new_twice(9)` and m = -2 is `HalfInt::new_twice(-4)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HalfInt(i32);

impl HalfInt {
    pub const fn new_twice(twice: i32) -> Self {
        HalfInt(twice)
    }

    pub const fn twice(self) -> i32 {
        self.0
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// Linear Zeeman model for the clock-state nuclear ladder of one species.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeemanConfig {
    pub species: Species,
    /// Bias field, gauss.
    pub field_gauss: f64,
    /// The two m_I projections encoding the qubit.
    pub qubit_pair: (HalfInt, HalfInt),
}

fn check_projection(m: HalfInt, spin_2i: u32, what: &str) -> Result<()> {
    let twice_i = spin_2i as i32;
    if m.twice().abs() > twice_i || (m.twice() - twice_i).rem_euclid(2) != 0 {
        return Err(Error::ProjectionOutOfRange {
            m_twice: m.twice(),
            spin_twice: twice_i,
        });
    }
    let _ = what;
    Ok(())
}

impl ZeemanConfig {
    pub fn validate(&self) -> Result<()> {
        self.species.validate()?;
        ensure_finite(self.field_gauss, "field_gauss")?;
        if self.field_gauss < 0.0 {
            return Err(Error::InvalidParam("field_gauss must be >= 0".into()));
        }
        check_projection(self.qubit_pair.0, self.species.nuclear_spin_2i, "qubit m_I")?;
        check_projection(self.qubit_pair.1, self.species.nuclear_spin_2i, "qubit m_I")?;
        if self.qubit_pair.0 == self.qubit_pair.1 {
            return Err(Error::InvalidParam(
                "qubit projections must be distinct".into(),
            ));
        }
        Ok(())
    }

    /// Resonance offset of projection `m` from the zero-field line:
    /// `m zeta B`, Hz.
    pub fn resonance_offset(&self, m: HalfInt) -> Result<f64> {
        self.validate()?;
        check_projection(m, self.species.nuclear_spin_2i, "m_I")?;
        Ok(m.value() * self.species.zeeman_hz_per_gauss * self.field_gauss)
    }

    /// Resonance spacing between neighbouring projections (delta m = 1):
    /// `zeta B`, Hz.
    pub fn neighbour_spacing_hz(&self) -> f64 {
        self.species.zeeman_hz_per_gauss * self.field_gauss
    }

    /// Resonance spacing between the two qubit projections, Hz. A
    /// stretched pair (m = -I, +I) buys a factor 2I over neighbours.
    pub fn qubit_splitting_hz(&self) -> f64 {
        let dm = f64::from((self.qubit_pair.0.twice() - self.qubit_pair.1.twice()).abs()) / 2.0;
        dm * self.species.zeeman_hz_per_gauss * self.field_gauss
    }

    /// Frequency selectivity of a drive at Rabi frequency `drive_rabi`
    /// (rad/s) against the qubit splitting, judged at
    /// [`DEFAULT_SELECTIVITY_THRESHOLD`].
    pub fn selectivity(&self, drive_rabi: f64) -> Result<SelectivityReport> {
        self.selectivity_with_threshold(drive_rabi, DEFAULT_SELECTIVITY_THRESHOLD)
    }

    pub fn selectivity_with_threshold(
        &self,
        drive_rabi: f64,
        threshold: f64,
    ) -> Result<SelectivityReport> {
        self.validate()?;
        ensure_finite(drive_rabi, "drive_rabi")?;
        ensure_finite(threshold, "threshold")?;
        if drive_rabi <= 0.0 {
            return Err(Error::InvalidParam("drive_rabi must be positive".into()));
        }
        if threshold <= 0.0 {
            return Err(Error::InvalidParam("threshold must be positive".into()));
        }
        let splitting_hz = self.qubit_splitting_hz();
        let ratio = hz_to_angular(splitting_hz) / drive_rabi;
        Ok(SelectivityReport {
            qubit_splitting_hz: splitting_hz,
            ratio,
            threshold,
            selective: ratio >= threshold,
        })
    }
}

/// Verdict on frequency-selective addressing of one qubit pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SelectivityReport {
    pub qubit_splitting_hz: f64,
    /// (qubit splitting as angular frequency) / (drive Rabi frequency).
    pub ratio: f64,
    pub threshold: f64,
    pub selective: bool,
}

/// One hyperfine state |F, m_F>.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HyperfineState {
    pub f: HalfInt,
    pub m_f: HalfInt,
}

impl HyperfineState {
    pub fn validate(&self) -> Result<()> {
        if self.f.twice() < 1 {
            return Err(Error::InvalidParam("F must be at least 1/2".into()));
        }
        if self.m_f.twice().abs() > self.f.twice()
            || (self.m_f.twice() - self.f.twice()).rem_euclid(2) != 0
        {
            return Err(Error::ProjectionOutOfRange {
                m_twice: self.m_f.twice(),
                spin_twice: self.f.twice(),
            });
        }
        Ok(())
    }
}

/// Tensor polarizability weight `(3 m_F^2 - F(F+1)) / (F(2F - 1))` as an
/// exact reduced fraction `(numerator, denominator)`, denominator positive.
/// Stretched states (|m_F| = F) give exactly 1, and the coefficient summed
/// over a full m_F manifold vanishes identically. Undefined for F < 1.
pub fn tensor_coefficient_exact(state: HyperfineState) -> Result<(i64, i64)> {
    state.validate()?;
    let a = i64::from(state.f.twice());
    let b = i64::from(state.m_f.twice());
    if a < 2 {
        return Err(Error::TensorUndefined {
            f_twice: state.f.twice(),
        });
    }
    // With a = 2F and b = 2m_F: 3 m_F^2 - F(F+1) = (3b^2 - a(a+2))/4 and
    // F(2F-1) = a(a-1)/2, so the ratio is (3b^2 - a(a+2)) / (2a(a-1)).
    let num = 3 * b * b - a * (a + 2);
    let den = 2 * a * (a - 1);
    let g = gcd(num.unsigned_abs(), den.unsigned_abs()) as i64;
    Ok((num / g, den / g))
}

/// Tensor coefficient as a float; see [`tensor_coefficient_exact`].
pub fn tensor_coefficient(state: HyperfineState) -> Result<f64> {
    let (num, den) = tensor_coefficient_exact(state)?;
    Ok(num as f64 / den as f64)
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

/// Scalar and tensor polarizabilities together with the squared field
/// amplitude. Units are the caller's; the shift comes out in (polarizability
/// unit) x (field unit)^2, conventionally Hz.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarizabilityInput {
    pub alpha_scalar: f64,
    pub alpha_tensor: f64,
    /// Squared field amplitude E^2 (proportional to intensity).
    pub field_sq: f64,
}

/// Light-shift report for one hyperfine state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PolarizabilityReport {
    /// Tensor weight of this |F, m_F>.
    pub coefficient: f64,
    /// alpha_scalar + alpha_tensor x coefficient.
    pub total_polarizability: f64,
    /// Energy shift `-(total) E^2 / 2`, in the caller's units (Hz when the
    /// polarizabilities are supplied as Hz per squared field unit).
    pub shift_hz: f64,
    /// Negative total polarizability for light polarized along the
    /// quantization axis means this state is pulled to the same intensity
    /// extrema as the lower dressed potential of the same beams.
    pub trapped_at_dressed_minima: bool,
}

/// Total light shift `-(alpha_s + alpha_t C(F, m_F)) E^2 / 2` of one
/// hyperfine state.
pub fn polarizability_shift(
    state: HyperfineState,
    input: PolarizabilityInput,
) -> Result<PolarizabilityReport> {
    ensure_finite(input.alpha_scalar, "alpha_scalar")?;
    ensure_finite(input.alpha_tensor, "alpha_tensor")?;
    ensure_finite(input.field_sq, "field_sq")?;
    if input.field_sq < 0.0 {
        return Err(Error::InvalidParam("field_sq must be >= 0".into()));
    }
    let coefficient = tensor_coefficient(state)?;
    let total = input.alpha_scalar + input.alpha_tensor * coefficient;
    Ok(PolarizabilityReport {
        coefficient,
        total_polarizability: total,
        shift_hz: -0.5 * total * input.field_sq,
        trapped_at_dressed_minima: total < 0.0,
    })
}

/// Magnetic-gradient configuration for site-resolved readout.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientConfig {
    /// Field gradient magnitude, gauss per cm.
    pub gradient_gauss_per_cm: f64,
    /// Site spacing, m; defaults to half the clock wavelength.
    pub site_spacing_m: Option<f64>,
}

impl GradientConfig {
    fn spacing_m(&self, species: &Species) -> f64 {
        self.site_spacing_m
            .unwrap_or_else(|| species.default_site_spacing_m())
    }

    fn validate(&self, species: &Species) -> Result<()> {
        species.validate()?;
        ensure_finite(self.gradient_gauss_per_cm, "gradient_gauss_per_cm")?;
        if self.gradient_gauss_per_cm <= 0.0 {
            return Err(Error::InvalidParam(
                "gradient_gauss_per_cm must be positive".into(),
            ));
        }
        if let Some(s) = self.site_spacing_m {
            ensure_finite(s, "site_spacing_m")?;
            if s <= 0.0 {
                return Err(Error::InvalidParam("site_spacing_m must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Resonance splitting between neighbouring lattice sites of the stretched
/// metastable readout state under a field gradient, Hz per site.
pub fn gradient_site_splitting(config: &GradientConfig, species: &Species) -> Result<f64> {
    config.validate(species)?;
    let spacing_cm = config.spacing_m(species) * 100.0;
    Ok(species.p2_gradient_hz_per_cm_per_gauss_per_cm
        * config.gradient_gauss_per_cm
        * spacing_cm)
}

/// Verdict on site-resolved readout: the Raman drive must sit below the
/// per-site splitting (spectral resolution) and below a tenth of the trap
/// frequency (no interband excitation).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AddressabilityReport {
    pub site_splitting_hz: f64,
    pub raman_rabi_hz: f64,
    pub trap_frequency_hz: f64,
    /// Raman Rabi frequency below the site splitting.
    pub site_resolvable: bool,
    /// Raman Rabi frequency below trap frequency / 10.
    pub band_safe: bool,
    pub addressable: bool,
    /// Fastest spectrally clean readout pulse, 2pi / Omega_Raman, s.
    pub min_readout_time_s: f64,
}

/// Checks whether a Raman readout drive at `raman_rabi` (rad/s) resolves
/// single sites in a trap of frequency `trap_omega` (rad/s).
pub fn readout_addressability(
    config: &GradientConfig,
    species: &Species,
    trap_omega: f64,
    raman_rabi: f64,
) -> Result<AddressabilityReport> {
    ensure_finite(trap_omega, "trap_omega")?;
    ensure_finite(raman_rabi, "raman_rabi")?;
    if trap_omega <= 0.0 {
        return Err(Error::InvalidParam("trap_omega must be positive".into()));
    }
    if raman_rabi <= 0.0 {
        return Err(Error::InvalidParam("raman_rabi must be positive".into()));
    }
    let site_splitting_hz = gradient_site_splitting(config, species)?;
    let site_resolvable = raman_rabi < hz_to_angular(site_splitting_hz);
    let band_safe = raman_rabi < trap_omega / BAND_SAFETY_FACTOR;
    Ok(AddressabilityReport {
        site_splitting_hz,
        raman_rabi_hz: crate::units::angular_to_hz(raman_rabi),
        trap_frequency_hz: crate::units::angular_to_hz(trap_omega),
        site_resolvable,
        band_safe,
        addressable: site_resolvable && band_safe,
        min_readout_time_s: std::f64::consts::TAU / raman_rabi,
    })
}
