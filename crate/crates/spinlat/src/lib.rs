//! Desk-scale simulator for nuclear-spin-dependent optical lattices built
//! by dressing an ultranarrow clock transition, and for the two-qubit
//! gates those lattices enable.
//!
//! Driving the clock transition of an alkaline-earth-like atom with a
//! standing wave produces dressed potentials whose shape depends on the
//! nuclear-spin projection through the drive phase. This crate models
//! that physics end to end:
//!
//! - [`lattice`] — dressed potentials, excited-state admixture, trap
//!   frequencies, and non-adiabatic loss estimates on a phase/position
//!   grid.
//! - [`register`] — Zeeman-resolved qubit encoding in the nuclear-spin
//!   manifold: transition selectivity, tensor polarizability, magnetic
//!   gradients, and site-resolved readout margins.
//! - [`lindblad`] — open-system evolution of the driven lossy clock
//!   transition, with an explicit loss sink and the closed-form no-jump
//!   propagator as a cross-check.
//! - [`gate`] — the transport-plus-blockade two-qubit gate protocol,
//!   fidelity/loss scans over blockade strength, and a decoherence
//!   budget for the dressed qubit.
//! - [`species`] / [`units`] — atomic parameters and physical constants.
//!
//! Scans are data-parallel via rayon when the `parallel` feature (on by
//! default) is enabled; every scan also has a `_seq` twin so the two can
//! be compared.
//!
//! Conventions: frequencies are angular (rad/s) unless a name says `hz`,
//! lengths are meters, magnetic fields are gauss, energies are expressed
//! as frequencies (E / hbar).

pub mod error;
pub mod exec;
pub mod gate;
pub mod lattice;
pub mod lindblad;
pub mod register;
pub mod species;
pub mod units;

/// Complex amplitude type used throughout.
pub type C64 = num_complex::Complex64;

pub use error::{Error, Result};
pub use species::Species;
