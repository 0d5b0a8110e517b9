//! Physical constants and unit conventions.
//!
//! Every energy and frequency inside the crate is an angular frequency in
//! rad/s; Planck's constant enters only when converting to mechanical
//! quantities (trap curvature to rad/s, harmonic-oscillator lengths).
//! Interfaces that face users (CLI, serialized reports) speak ordinary
//! frequencies in Hz and magnetic fields in gauss, converted at the boundary.

use std::f64::consts::TAU;

/// Reduced Planck constant, J s (h / 2pi with h exact by SI definition).
pub const HBAR: f64 = 1.054_571_817e-34;

/// Planck constant, J s (exact by SI definition).
pub const H_PLANCK: f64 = 6.626_070_15e-34;

/// Unified atomic mass unit, kg (CODATA 2018).
pub const ATOMIC_MASS_KG: f64 = 1.660_539_066_60e-27;

/// Ordinary frequency in Hz to angular frequency in rad/s.
pub fn hz_to_angular(f_hz: f64) -> f64 {
    TAU * f_hz
}

/// Angular frequency in rad/s to ordinary frequency in Hz.
pub fn angular_to_hz(omega: f64) -> f64 {
    omega / TAU
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hz_roundtrip() {
        let f = 120e3;
        assert_eq!(angular_to_hz(hz_to_angular(f)), f);
        assert!((hz_to_angular(1.0) - TAU).abs() < 1e-15);
    }

    #[test]
    fn hbar_is_h_over_tau() {
        assert!((HBAR - H_PLANCK / TAU).abs() / HBAR < 1e-9);
    }
}
