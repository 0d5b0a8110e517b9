//! Two-qubit gate built from state-dependent transport and an on-site
//! blockade of the auxiliary clock transition.
//!
//! Each atom carries five levels: the qubit pair `|0>, |1>` (nuclear spin
//! states of the electronic ground state), two auxiliary clock-excited
//! shelves `|0x>, |1x>`, and a bookkeeping `|lost>` level. The protocol on
//! a pair of neighbouring atoms is
//!
//! 1. state-dependent transport: the right atom's `|1>` component moves
//!    one site left, onto the left atom (colocated exactly when the pair is
//!    in `|0,1>`),
//! 2. a pi pulse `|0> -> |0x>` on both atoms,
//! 3. a 2*pi pulse `|1> -> |1x>` on both atoms; for the right atom this
//!    drive is blockaded whenever the left atom sits on the same site in
//!    `|0x>`,
//! 4. a pi pulse returning `|0x> -> |0>`, and transport back.
//!
//! A perfect blockade freezes the blocked drive entirely and the pulse
//! phases compose to the entangling truth table `diag(1, -1, 1, 1)`. The
//! physical blockade mechanisms — an interaction shift `delta` of the
//! doubly-excited state, a two-body loss rate `gamma` from it, or both —
//! replace the frozen drive with the exact two-level propagator of
//! `[[0, Omega/2], [Omega/2, delta - i gamma/2]]`, so the same machinery
//! quantifies residual phases and loss. Loss never returns: amplitudes
//! simply shrink, and `1 - |psi|^2` is the loss probability.
//!
//! All frequencies are rad/s unless a name says otherwise.

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{ensure_finite, Error, Result};
use crate::exec;
use crate::lattice::Qubit;
use crate::lindblad::{gamma_eff, two_level_propagator, LossSystem};
use crate::species::Species;
use crate::units::HBAR;
use crate::C64;

/// Levels per atom.
pub const ATOM_DIM: usize = 5;
/// Dimension of the two-atom state space.
pub const PAIR_DIM: usize = ATOM_DIM * ATOM_DIM;

/// Single-atom level in the fixed basis order used throughout.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AtomLevel {
    Zero,
    One,
    ZeroAux,
    OneAux,
    Lost,
}

impl AtomLevel {
    pub const ALL: [AtomLevel; ATOM_DIM] = [
        AtomLevel::Zero,
        AtomLevel::One,
        AtomLevel::ZeroAux,
        AtomLevel::OneAux,
        AtomLevel::Lost,
    ];

    pub fn index(self) -> usize {
        match self {
            AtomLevel::Zero => 0,
            AtomLevel::One => 1,
            AtomLevel::ZeroAux => 2,
            AtomLevel::OneAux => 3,
            AtomLevel::Lost => 4,
        }
    }
}

/// Driven auxiliary transition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transition {
    /// `|0> <-> |0x>`
    ZeroAux,
    /// `|1> <-> |1x>`
    OneAux,
}

impl Transition {
    fn levels(self) -> (usize, usize) {
        match self {
            Transition::ZeroAux => (AtomLevel::Zero.index(), AtomLevel::ZeroAux.index()),
            Transition::OneAux => (AtomLevel::One.index(), AtomLevel::OneAux.index()),
        }
    }
}

/// Global pulse on one auxiliary transition: rotation area (rad) and drive
/// phase (rad).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pulse {
    pub transition: Transition,
    pub area: f64,
    pub phase: f64,
}

impl Pulse {
    pub fn pi(transition: Transition) -> Self {
        Pulse {
            transition,
            area: PI,
            phase: 0.0,
        }
    }

    pub fn two_pi(transition: Transition) -> Self {
        Pulse {
            transition,
            area: TAU,
            phase: 0.0,
        }
    }
}

/// Blockade mechanism acting on the doubly-excited colocated pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum BlockadeVariant {
    /// Idealized limit: the blocked drive does nothing at all.
    Perfect,
    /// Coherent interaction shift `delta` of the doubly-excited state.
    Interaction { delta: f64 },
    /// Two-body loss at rate `gamma` from the doubly-excited state.
    Lossy { gamma: f64 },
    /// Shift and loss together.
    Combined { delta: f64, gamma: f64 },
}

impl BlockadeVariant {
    /// `(delta, gamma)` of the doubly-excited state; `None` for the
    /// idealized blockade.
    fn shift_and_loss(self) -> Option<(f64, f64)> {
        match self {
            BlockadeVariant::Perfect => None,
            BlockadeVariant::Interaction { delta } => Some((delta, 0.0)),
            BlockadeVariant::Lossy { gamma } => Some((0.0, gamma)),
            BlockadeVariant::Combined { delta, gamma } => Some((delta, gamma)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some((delta, gamma)) = self.shift_and_loss() {
            ensure_finite(delta, "blockade delta")?;
            ensure_finite(gamma, "blockade gamma")?;
            if gamma < 0.0 {
                return Err(Error::InvalidParam("blockade gamma must be >= 0".into()));
            }
        }
        Ok(())
    }
}

/// Drive strength plus blockade mechanism.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockadeModel {
    /// Rabi frequency of the auxiliary drives, rad/s.
    pub rabi: f64,
    pub variant: BlockadeVariant,
}

impl BlockadeModel {
    pub fn validate(&self) -> Result<()> {
        ensure_finite(self.rabi, "blockade rabi")?;
        if self.rabi <= 0.0 {
            return Err(Error::InvalidParam("blockade rabi must be positive".into()));
        }
        self.variant.validate()
    }

    /// The driven lossy two-level system seen by a blocked drive, when the
    /// variant has one.
    pub fn blocked_system(&self) -> Option<LossSystem> {
        self.variant.shift_and_loss().map(|(delta, gamma)| LossSystem {
            rabi: self.rabi,
            detuning: delta,
            loss_rate: gamma,
        })
    }

    /// Map applied to a blocked `{|1>, |1x>}` pair over a pulse of the
    /// given area: identity for the perfect blockade, otherwise the exact
    /// (generally non-unitary) propagator of the shifted lossy transition.
    fn blocked_map(&self, area: f64, phase: f64) -> [[C64; 2]; 2] {
        match self.variant.shift_and_loss() {
            None => [
                [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
                [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            ],
            Some((delta, gamma)) => {
                let u = two_level_propagator(
                    self.rabi,
                    C64::new(delta, -0.5 * gamma),
                    area / self.rabi,
                );
                conjugate_by_drive_phase(u, phase)
            }
        }
    }
}

/// Unitary of an unblocked pulse:
/// `cos(area/2) I - i sin(area/2) (cos(phase) sx + sin(phase) sy)`.
fn unblocked_map(area: f64, phase: f64) -> [[C64; 2]; 2] {
    let (s, c) = (0.5 * area).sin_cos();
    let e_minus = C64::new(0.0, -phase).exp();
    let e_plus = C64::new(0.0, phase).exp();
    [
        [C64::new(c, 0.0), -C64::i() * s * e_minus],
        [-C64::i() * s * e_plus, C64::new(c, 0.0)],
    ]
}

/// Re-phases a zero-phase two-level map for a drive phase `phi`:
/// `diag(1, e^{i phi}) U diag(1, e^{-i phi})`.
fn conjugate_by_drive_phase(u: [[C64; 2]; 2], phase: f64) -> [[C64; 2]; 2] {
    if phase == 0.0 {
        return u;
    }
    let e_plus = C64::new(0.0, phase).exp();
    let e_minus = C64::new(0.0, -phase).exp();
    [
        [u[0][0], u[0][1] * e_minus],
        [u[1][0] * e_plus, u[1][1]],
    ]
}

/// Joint state of the atom pair. `transported` records whether the
/// state-dependent shift is currently applied, which is what arms the
/// blockade rule; amplitudes themselves live in the fixed 25-state basis
/// `index = 5 * left + right`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairState {
    pub amplitudes: [C64; PAIR_DIM],
    pub transported: bool,
}

impl PairState {
    pub fn index(left: AtomLevel, right: AtomLevel) -> usize {
        ATOM_DIM * left.index() + right.index()
    }

    /// Computational basis state `|q1, q2>`, not yet transported.
    pub fn from_logical(q1: Qubit, q2: Qubit) -> Self {
        let mut amplitudes = [C64::new(0.0, 0.0); PAIR_DIM];
        amplitudes[ATOM_DIM * q1.index() + q2.index()] = C64::new(1.0, 0.0);
        PairState {
            amplitudes,
            transported: false,
        }
    }

    /// Arbitrary logical superposition `[c00, c01, c10, c11]`, normalized.
    pub fn from_logical_amplitudes(coeffs: &[C64; 4]) -> Result<Self> {
        let norm_sq: f64 = coeffs.iter().map(|z| z.norm_sqr()).sum();
        if !(norm_sq.is_finite() && norm_sq > 0.0) {
            return Err(Error::InvalidParam(
                "logical amplitudes must have positive finite norm".into(),
            ));
        }
        let scale = norm_sq.sqrt().recip();
        let mut amplitudes = [C64::new(0.0, 0.0); PAIR_DIM];
        for (logical, c) in coeffs.iter().enumerate() {
            amplitudes[ATOM_DIM * (logical >> 1) + (logical & 1)] = c * scale;
        }
        Ok(PairState {
            amplitudes,
            transported: false,
        })
    }

    pub fn amplitude(&self, left: AtomLevel, right: AtomLevel) -> C64 {
        self.amplitudes[Self::index(left, right)]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Probability that the pair has been lost, assuming the state started
    /// normalized: the norm deficit accumulated by non-unitary blockade.
    pub fn loss_probability(&self) -> f64 {
        (1.0 - self.norm_sqr()).max(0.0)
    }

    /// Amplitudes on the computational subspace, ordered `[00, 01, 10, 11]`.
    pub fn logical_amplitudes(&self) -> [C64; 4] {
        let mut out = [C64::new(0.0, 0.0); 4];
        for (logical, slot) in out.iter_mut().enumerate() {
            *slot = self.amplitudes[ATOM_DIM * (logical >> 1) + (logical & 1)];
        }
        out
    }

    pub fn with_transport(mut self, transported: bool) -> Self {
        self.transported = transported;
        self
    }
}

/// Applies one global pulse to both atoms.
///
/// The left atom is never blocked (its `|1>` component moved away from its
/// neighbour). The right atom's `|1> -> |1x>` drive is blocked exactly for
/// components where the transported left atom sits in `|0x>` — the only
/// configuration that is both colocated and clock-excited. The blocking
/// pattern commutes with the left atom's own drive on any single pulse, so
/// applying the two single-atom maps in sequence is exact.
pub fn apply_pulse(state: &PairState, pulse: &Pulse, model: &BlockadeModel) -> PairState {
    let (lo, hi) = pulse.transition.levels();
    let u_free = unblocked_map(pulse.area, pulse.phase);
    let mut amplitudes = state.amplitudes;

    for s2 in 0..ATOM_DIM {
        let i_lo = ATOM_DIM * lo + s2;
        let i_hi = ATOM_DIM * hi + s2;
        let (a, b) = (amplitudes[i_lo], amplitudes[i_hi]);
        amplitudes[i_lo] = u_free[0][0] * a + u_free[0][1] * b;
        amplitudes[i_hi] = u_free[1][0] * a + u_free[1][1] * b;
    }

    let u_block = model.blocked_map(pulse.area, pulse.phase);
    for s1 in 0..ATOM_DIM {
        let blocked = state.transported
            && pulse.transition == Transition::OneAux
            && s1 == AtomLevel::ZeroAux.index();
        let u = if blocked { &u_block } else { &u_free };
        let i_lo = ATOM_DIM * s1 + lo;
        let i_hi = ATOM_DIM * s1 + hi;
        let (a, b) = (amplitudes[i_lo], amplitudes[i_hi]);
        amplitudes[i_lo] = u[0][0] * a + u[0][1] * b;
        amplitudes[i_hi] = u[1][0] * a + u[1][1] * b;
    }

    PairState {
        amplitudes,
        transported: state.transported,
    }
}

/// States after each stage of the gate protocol.
#[derive(Clone, Debug)]
pub struct ProtocolTrace {
    pub initial: PairState,
    /// After the storage pi pulse `|0> -> |0x>`.
    pub after_store: PairState,
    /// After the (possibly blocked) 2*pi pulse on `|1> -> |1x>`.
    pub after_blockade: PairState,
    /// After the return pi pulse and reverse transport.
    pub final_state: PairState,
}

/// Runs the full transport-and-blockade pulse sequence on an arbitrary
/// initial pair state.
pub fn blockade_protocol_state(model: &BlockadeModel, input: PairState) -> Result<ProtocolTrace> {
    model.validate()?;
    let initial = input.clone();
    let moved = input.with_transport(true);
    let after_store = apply_pulse(&moved, &Pulse::pi(Transition::ZeroAux), model);
    let after_blockade = apply_pulse(&after_store, &Pulse::two_pi(Transition::OneAux), model);
    let final_state =
        apply_pulse(&after_blockade, &Pulse::pi(Transition::ZeroAux), model).with_transport(false);
    Ok(ProtocolTrace {
        initial,
        after_store,
        after_blockade,
        final_state,
    })
}

/// Runs the protocol on a computational basis state.
pub fn blockade_protocol(model: &BlockadeModel, input: (Qubit, Qubit)) -> Result<ProtocolTrace> {
    blockade_protocol_state(model, PairState::from_logical(input.0, input.1))
}

/// Complex truth table `m[out][in]` over the computational basis
/// `[00, 01, 10, 11]`, one protocol run per input column.
pub fn truth_table(model: &BlockadeModel) -> Result<[[C64; 4]; 4]> {
    let mut m = [[C64::new(0.0, 0.0); 4]; 4];
    for (col, &(q1, q2)) in LOGICAL_INPUTS.iter().enumerate() {
        let trace = blockade_protocol(model, (q1, q2))?;
        let amps = trace.final_state.logical_amplitudes();
        for (row, amp) in amps.iter().enumerate() {
            m[row][col] = *amp;
        }
    }
    Ok(m)
}

const LOGICAL_INPUTS: [(Qubit, Qubit); 4] = [
    (Qubit::Zero, Qubit::Zero),
    (Qubit::Zero, Qubit::One),
    (Qubit::One, Qubit::Zero),
    (Qubit::One, Qubit::One),
];

/// Overlap fidelity `|tr(D^+ M)|^2 / 16` against the ideal truth table
/// `D = diag(1, -1, 1, 1)`. Invariant under a global phase of `M`.
pub fn process_fidelity(m: &[[C64; 4]; 4]) -> f64 {
    let tr = m[0][0] - m[1][1] + m[2][2] + m[3][3];
    tr.norm_sqr() / 16.0
}

/// Gate characterization from four basis-state protocol runs.
#[derive(Clone, Debug, Serialize)]
pub struct GateReport {
    pub rabi_rad_per_s: f64,
    pub variant: BlockadeVariant,
    /// `truth_table[out][in] = [re, im]` over `[00, 01, 10, 11]`.
    pub truth_table: [[[f64; 2]; 4]; 4],
    pub process_fidelity: f64,
    /// Largest loss probability over the four basis inputs.
    pub max_loss_probability: f64,
    /// Phase error of the blocked branch: `arg(-m[01][01])`, zero for the
    /// ideal gate.
    pub residual_phase_rad: f64,
    /// Inverse-loss time in gate-time units, `rabi / (2 pi Gamma_eff)`;
    /// present only when the variant actually loses atoms.
    pub loss_to_gate_time_ratio: Option<f64>,
}

/// Runs the protocol on all four basis states and summarizes the result.
pub fn gate_truth_table(model: &BlockadeModel) -> Result<GateReport> {
    model.validate()?;
    let m = truth_table(model)?;
    let mut max_loss = 0.0_f64;
    for &(q1, q2) in &LOGICAL_INPUTS {
        let trace = blockade_protocol(model, (q1, q2))?;
        max_loss = max_loss.max(trace.final_state.loss_probability());
    }
    let mut truth_table = [[[0.0_f64; 2]; 4]; 4];
    for (i, row) in m.iter().enumerate() {
        for (j, z) in row.iter().enumerate() {
            truth_table[i][j] = [z.re, z.im];
        }
    }
    let loss_to_gate_time_ratio = match model.blocked_system() {
        Some(sys) if sys.loss_rate > 0.0 => {
            let eff = gamma_eff(&sys)?;
            Some(model.rabi / (TAU * eff.rate))
        }
        _ => None,
    };
    Ok(GateReport {
        rabi_rad_per_s: model.rabi,
        variant: model.variant,
        truth_table,
        process_fidelity: process_fidelity(&m),
        max_loss_probability: max_loss,
        residual_phase_rad: (-m[1][1]).arg(),
        loss_to_gate_time_ratio,
    })
}

/// One-parameter families for fidelity scans; the scanned `ratio` is
/// measured in units of the drive Rabi frequency.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScanFamily {
    /// `ratio = gamma / rabi`, pure two-body loss.
    Lossy,
    /// `ratio = delta / rabi`, pure interaction shift.
    Interaction,
    /// `ratio = gamma / rabi` at a fixed interaction shift.
    Combined { delta_over_rabi: f64 },
}

impl ScanFamily {
    pub fn variant(self, rabi: f64, ratio: f64) -> BlockadeVariant {
        match self {
            ScanFamily::Lossy => BlockadeVariant::Lossy { gamma: ratio * rabi },
            ScanFamily::Interaction => BlockadeVariant::Interaction { delta: ratio * rabi },
            ScanFamily::Combined { delta_over_rabi } => BlockadeVariant::Combined {
                delta: delta_over_rabi * rabi,
                gamma: ratio * rabi,
            },
        }
    }

    fn validate(self, ratios: &[f64]) -> Result<()> {
        if ratios.is_empty() {
            return Err(Error::EmptyGrid("blockade scan ratios"));
        }
        for &r in ratios {
            ensure_finite(r, "scan ratio")?;
            match self {
                ScanFamily::Interaction => {}
                ScanFamily::Lossy | ScanFamily::Combined { .. } => {
                    if r < 0.0 {
                        return Err(Error::InvalidParam(
                            "loss ratios must be >= 0".into(),
                        ));
                    }
                }
            }
        }
        if let ScanFamily::Combined { delta_over_rabi } = self {
            ensure_finite(delta_over_rabi, "delta_over_rabi")?;
        }
        Ok(())
    }
}

/// One point of a blockade-strength scan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FidelityPoint {
    pub ratio: f64,
    pub loss_probability: f64,
    pub process_fidelity: f64,
    /// Perturbative loss prediction `1 - exp(-Gamma_eff * 2 pi / rabi)`
    /// for comparison against the simulated loss.
    pub gamma_eff_prediction: f64,
}

fn scan_point(family: ScanFamily, rabi: f64, ratio: f64) -> Result<FidelityPoint> {
    let model = BlockadeModel {
        rabi,
        variant: family.variant(rabi, ratio),
    };
    let report = gate_truth_table(&model)?;
    let prediction = match model.blocked_system() {
        Some(sys) => {
            let eff = gamma_eff(&sys)?;
            1.0 - (-eff.rate * TAU / rabi).exp()
        }
        None => 0.0,
    };
    Ok(FidelityPoint {
        ratio,
        loss_probability: report.max_loss_probability,
        process_fidelity: report.process_fidelity,
        gamma_eff_prediction: prediction,
    })
}

/// Gate fidelity and loss as a function of blockade strength, evaluated
/// concurrently when the `parallel` feature is active.
pub fn fidelity_scan(family: ScanFamily, rabi: f64, ratios: &[f64]) -> Result<Vec<FidelityPoint>> {
    ensure_finite(rabi, "rabi")?;
    if rabi <= 0.0 {
        return Err(Error::InvalidParam("scan rabi must be positive".into()));
    }
    family.validate(ratios)?;
    let tasks: Vec<f64> = ratios.to_vec();
    exec::map_collect(&tasks, |&ratio| scan_point(family, rabi, ratio))
        .into_iter()
        .collect()
}

/// Sequential reference implementation of [`fidelity_scan`].
pub fn fidelity_scan_seq(
    family: ScanFamily,
    rabi: f64,
    ratios: &[f64],
) -> Result<Vec<FidelityPoint>> {
    ensure_finite(rabi, "rabi")?;
    if rabi <= 0.0 {
        return Err(Error::InvalidParam("scan rabi must be positive".into()));
    }
    family.validate(ratios)?;
    let tasks: Vec<f64> = ratios.to_vec();
    exec::map_collect_seq(&tasks, |&ratio| scan_point(family, rabi, ratio))
        .into_iter()
        .collect()
}

/// Phase accumulated by holding two colocated ground-state atoms, the slow
/// alternative the blockade gate is measured against.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CollisionalGate {
    /// `u_onsite * hold_time`.
    pub phase_rad: f64,
    /// Whether the interaction stays well below the trap spacing
    /// (`u_onsite < trap_omega / 10`), keeping the dynamics in one band.
    pub single_band_ok: bool,
}

/// On-site collisional phase accumulation at interaction energy
/// `u_onsite` (rad/s) for `hold_time` seconds in a trap of frequency
/// `trap_omega` (rad/s).
pub fn collisional_phase_gate(
    u_onsite: f64,
    hold_time: f64,
    trap_omega: f64,
) -> Result<CollisionalGate> {
    ensure_finite(u_onsite, "u_onsite")?;
    ensure_finite(hold_time, "hold_time")?;
    ensure_finite(trap_omega, "trap_omega")?;
    if hold_time < 0.0 {
        return Err(Error::InvalidParam("hold_time must be >= 0".into()));
    }
    if trap_omega <= 0.0 {
        return Err(Error::InvalidParam("trap_omega must be positive".into()));
    }
    Ok(CollisionalGate {
        phase_rad: u_onsite * hold_time,
        single_band_ok: u_onsite.abs() < trap_omega / 10.0,
    })
}

/// Inputs to the qubit decoherence budget.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetInput {
    /// Trap frequency, rad/s.
    pub trap_omega: f64,
    /// One-sided PSD of fractional lattice-intensity noise as
    /// `(angular frequency rad/s, spectral density s)` pairs, ascending.
    pub intensity_noise_psd: Vec<(f64, f64)>,
    /// Lattice depth over hbar, rad/s.
    pub lattice_depth: f64,
    /// Fractional mismatch `epsilon` between the two dressing wavelengths.
    pub wavelength_mismatch: f64,
    /// RMS detuning noise of the dressing laser, rad/s.
    pub detuning_noise: f64,
    /// Dressing Rabi frequency, rad/s.
    pub dressing_rabi: f64,
    /// Amplitude admixture of the short-lived auxiliary level.
    pub aux_admixture: f64,
    /// Decay rate of that auxiliary level, 1/s.
    pub aux_decay_rate: f64,
}

/// Decoherence and loss budget for a dressed-lattice qubit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BudgetReport {
    /// Parametric heating rate `pi^2 omega^2 S(2 omega) / 2`, 1/s.
    pub heating_rate: f64,
    /// Exact trap-frequency difference between the two spin states caused
    /// by the wavelength mismatch, rad/s.
    pub trap_frequency_difference: f64,
    /// First-order-in-epsilon approximation of the same difference, rad/s.
    pub trap_frequency_difference_linear: f64,
    /// `|linear - exact| / |linear|`, equal to `epsilon / (1 + epsilon)`.
    pub linearization_rel_gap: f64,
    /// Fractional depth fluctuation `(detuning_noise / dressing_rabi)^2`
    /// induced by dressing-laser detuning noise.
    pub fractional_depth_estimate: f64,
    /// Two-body-style loss rate from auxiliary admixture,
    /// `aux_decay_rate * aux_admixture^2`, 1/s.
    pub pair_loss_rate: f64,
    /// Time for the two spin states to dephase by pi,
    /// `pi / trap_frequency_difference`; absent when the difference is 0.
    pub dephasing_time: Option<f64>,
}

/// Linear interpolation into an ascending `(frequency, value)` table;
/// frequencies outside the table are an error, not an extrapolation.
fn interpolate_psd(table: &[(f64, f64)], frequency: f64) -> Result<f64> {
    let (first, last) = match (table.first(), table.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(Error::InterpolationRange { frequency }),
    };
    if frequency < first.0 || frequency > last.0 {
        return Err(Error::InterpolationRange { frequency });
    }
    if frequency == first.0 {
        return Ok(first.1);
    }
    let hi = table
        .iter()
        .position(|&(f, _)| f >= frequency)
        .expect("frequency is within table bounds");
    let (f1, s1) = table[hi];
    if frequency == f1 {
        return Ok(s1);
    }
    let (f0, s0) = table[hi - 1];
    Ok(s0 + (s1 - s0) * (frequency - f0) / (f1 - f0))
}

/// Evaluates the decoherence budget. The trap-frequency pieces use the
/// recoil frequency `hbar k^2 / 2m` of the species' clock-transition
/// lattice, and the harmonic relation `omega = 2 sqrt(depth * recoil)`.
pub fn decoherence_budget(input: &BudgetInput, species: &Species) -> Result<BudgetReport> {
    species.validate()?;
    ensure_finite(input.trap_omega, "trap_omega")?;
    ensure_finite(input.lattice_depth, "lattice_depth")?;
    ensure_finite(input.wavelength_mismatch, "wavelength_mismatch")?;
    ensure_finite(input.detuning_noise, "detuning_noise")?;
    ensure_finite(input.dressing_rabi, "dressing_rabi")?;
    ensure_finite(input.aux_admixture, "aux_admixture")?;
    ensure_finite(input.aux_decay_rate, "aux_decay_rate")?;
    if input.trap_omega <= 0.0 {
        return Err(Error::InvalidParam("trap_omega must be positive".into()));
    }
    if input.lattice_depth < 0.0 {
        return Err(Error::InvalidParam("lattice_depth must be >= 0".into()));
    }
    if input.wavelength_mismatch <= -1.0 {
        return Err(Error::InvalidParam(
            "wavelength_mismatch must exceed -1".into(),
        ));
    }
    if input.dressing_rabi <= 0.0 {
        return Err(Error::InvalidParam("dressing_rabi must be positive".into()));
    }
    if input.aux_decay_rate < 0.0 {
        return Err(Error::InvalidParam("aux_decay_rate must be >= 0".into()));
    }
    let mut prev = f64::NEG_INFINITY;
    for &(f, s) in &input.intensity_noise_psd {
        ensure_finite(f, "psd frequency")?;
        ensure_finite(s, "psd value")?;
        if f <= prev {
            return Err(Error::InvalidParam(
                "psd frequencies must be strictly ascending".into(),
            ));
        }
        if s < 0.0 {
            return Err(Error::InvalidParam("psd values must be >= 0".into()));
        }
        prev = f;
    }

    let s_2omega = interpolate_psd(&input.intensity_noise_psd, 2.0 * input.trap_omega)?;
    let heating_rate = 0.5 * PI * PI * input.trap_omega * input.trap_omega * s_2omega;

    let k = species.lattice_wavenumber();
    let recoil = HBAR * k * k / (2.0 * species.mass_kg);
    let omega_scale = 2.0 * (input.lattice_depth * recoil).sqrt();
    let eps = input.wavelength_mismatch;
    // 1 - 1/(1 + eps) written as eps/(1 + eps): same function, but immune
    // to the cancellation that would swamp the gap at eps ~ 1e-8.
    let exact = omega_scale * (eps / (1.0 + eps));
    let linear = omega_scale * eps;
    let rel_gap = if linear == 0.0 {
        0.0
    } else {
        ((linear - exact) / linear).abs()
    };

    let ratio = input.detuning_noise / input.dressing_rabi;
    Ok(BudgetReport {
        heating_rate,
        trap_frequency_difference: exact,
        trap_frequency_difference_linear: linear,
        linearization_rel_gap: rel_gap,
        fractional_depth_estimate: ratio * ratio,
        pair_loss_rate: input.aux_decay_rate * input.aux_admixture * input.aux_admixture,
        dephasing_time: if exact == 0.0 {
            None
        } else {
            Some(PI / exact.abs())
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use ndarray::{Array1, Array2};

    fn perfect_model() -> BlockadeModel {
        BlockadeModel {
            rabi: TAU * 1e3,
            variant: BlockadeVariant::Perfect,
        }
    }

    fn assert_close(z: C64, re: f64, im: f64, eps: f64) {
        assert_abs_diff_eq!(z.re, re, epsilon = eps);
        assert_abs_diff_eq!(z.im, im, epsilon = eps);
    }

    #[test]
    fn perfect_truth_table_is_diag_signs() {
        let report = gate_truth_table(&perfect_model()).unwrap();
        let expected = [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, -1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert_abs_diff_eq!(report.truth_table[i][j][0], expected[i][j], epsilon = 1e-12);
                assert_abs_diff_eq!(report.truth_table[i][j][1], 0.0, epsilon = 1e-12);
            }
        }
        assert_abs_diff_eq!(report.process_fidelity, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(report.max_loss_probability, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(report.residual_phase_rad, 0.0, epsilon = 1e-12);
        assert!(report.loss_to_gate_time_ratio.is_none());
    }

    #[test]
    fn perfect_protocol_intermediate_amplitudes() {
        let model = perfect_model();

        // |00>: both atoms shelve with a -i each, return with another -i each.
        let t = blockade_protocol(&model, (Qubit::Zero, Qubit::Zero)).unwrap();
        assert_close(
            t.after_store.amplitude(AtomLevel::ZeroAux, AtomLevel::ZeroAux),
            -1.0,
            0.0,
            1e-12,
        );

        // |01>: right atom untouched, left shelves; blockade freezes step 3.
        let t = blockade_protocol(&model, (Qubit::Zero, Qubit::One)).unwrap();
        assert_close(
            t.after_store.amplitude(AtomLevel::ZeroAux, AtomLevel::One),
            0.0,
            -1.0,
            1e-12,
        );
        assert_close(
            t.after_blockade.amplitude(AtomLevel::ZeroAux, AtomLevel::One),
            0.0,
            -1.0,
            1e-12,
        );

        // |10>: the left atom's unblocked 2*pi pulse contributes the -1.
        let t = blockade_protocol(&model, (Qubit::One, Qubit::Zero)).unwrap();
        assert_close(
            t.after_store.amplitude(AtomLevel::One, AtomLevel::ZeroAux),
            0.0,
            -1.0,
            1e-12,
        );
        assert_close(
            t.after_blockade.amplitude(AtomLevel::One, AtomLevel::ZeroAux),
            0.0,
            1.0,
            1e-12,
        );

        // |11>: two unblocked 2*pi pulses, (-1)^2 = +1.
        let t = blockade_protocol(&model, (Qubit::One, Qubit::One)).unwrap();
        assert_close(
            t.after_blockade.amplitude(AtomLevel::One, AtomLevel::One),
            1.0,
            0.0,
            1e-12,
        );
        assert!(!t.final_state.transported);
    }

    #[test]
    fn absent_blockade_gives_identity_and_quarter_fidelity() {
        let model = BlockadeModel {
            rabi: TAU * 1e3,
            variant: BlockadeVariant::Combined {
                delta: 0.0,
                gamma: 0.0,
            },
        };
        let m = truth_table(&model).unwrap();
        for (i, row) in m.iter().enumerate() {
            for (j, amp) in row.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert_close(*amp, expected, 0.0, 1e-12);
            }
        }
        assert_abs_diff_eq!(process_fidelity(&m), 0.25, epsilon = 1e-12);
    }

    #[test]
    fn strong_loss_blockade_loss_level() {
        let rabi = TAU * 1e3;
        let model = BlockadeModel {
            rabi,
            variant: BlockadeVariant::Lossy { gamma: 100.0 * rabi },
        };
        let report = gate_truth_table(&model).unwrap();
        // Only the |01> branch is blocked and lossy; the rest stay unitary.
        assert_abs_diff_eq!(report.max_loss_probability, 0.061, epsilon = 2e-3);
        assert!(report.process_fidelity > 0.9);
        let ratio = report.loss_to_gate_time_ratio.unwrap();
        assert_relative_eq!(ratio, 100.0 / TAU, max_relative = 1e-10);
        let t01 = blockade_protocol(&model, (Qubit::Zero, Qubit::One)).unwrap();
        let t00 = blockade_protocol(&model, (Qubit::Zero, Qubit::Zero)).unwrap();
        assert!(t01.final_state.loss_probability() > 0.05);
        assert_abs_diff_eq!(t00.final_state.loss_probability(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn interaction_blockade_residual_phase() {
        let rabi = TAU * 1e3;
        let model = BlockadeModel {
            rabi,
            variant: BlockadeVariant::Interaction { delta: 20.0 * rabi },
        };
        let report = gate_truth_table(&model).unwrap();
        assert_abs_diff_eq!(report.residual_phase_rad, 0.0776, epsilon = 1e-3);
        assert!(report.process_fidelity > 0.99 && report.process_fidelity < 1.0);
        assert_abs_diff_eq!(report.max_loss_probability, 0.0, epsilon = 1e-12);
        assert!(report.loss_to_gate_time_ratio.is_none());
    }

    #[test]
    fn combined_variant_reduces_bitwise_to_pure_cases() {
        let rabi = TAU * 2e3;
        let delta = 7.5 * rabi;
        let gamma = 40.0 * rabi;
        let pure_shift = truth_table(&BlockadeModel {
            rabi,
            variant: BlockadeVariant::Interaction { delta },
        })
        .unwrap();
        let combined_shift = truth_table(&BlockadeModel {
            rabi,
            variant: BlockadeVariant::Combined { delta, gamma: 0.0 },
        })
        .unwrap();
        let pure_loss = truth_table(&BlockadeModel {
            rabi,
            variant: BlockadeVariant::Lossy { gamma },
        })
        .unwrap();
        let combined_loss = truth_table(&BlockadeModel {
            rabi,
            variant: BlockadeVariant::Combined { delta: 0.0, gamma },
        })
        .unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(pure_shift[i][j], combined_shift[i][j]);
                assert_eq!(pure_loss[i][j], combined_loss[i][j]);
            }
        }
    }

    /// Independent route: build each pulse as an explicit 25x25 matrix and
    /// compose them by matrix multiplication.
    fn pulse_matrix(pulse: &Pulse, model: &BlockadeModel, transported: bool) -> Array2<C64> {
        let (lo, hi) = pulse.transition.levels();
        let u_free = unblocked_map(pulse.area, pulse.phase);
        let u_block = model.blocked_map(pulse.area, pulse.phase);
        let embed = |u: &[[C64; 2]; 2]| -> Array2<C64> {
            let mut m = Array2::eye(ATOM_DIM);
            m[[lo, lo]] = u[0][0];
            m[[lo, hi]] = u[0][1];
            m[[hi, lo]] = u[1][0];
            m[[hi, hi]] = u[1][1];
            m
        };
        let left = embed(&u_free);
        // Left-atom factor: kron(left, I).
        let mut full = Array2::zeros((PAIR_DIM, PAIR_DIM));
        for i in 0..ATOM_DIM {
            for j in 0..ATOM_DIM {
                for k in 0..ATOM_DIM {
                    full[[ATOM_DIM * i + k, ATOM_DIM * j + k]] = left[[i, j]];
                }
            }
        }
        // Right-atom factor, block-dependent on the left level.
        let mut right_full: Array2<C64> = Array2::zeros((PAIR_DIM, PAIR_DIM));
        for s1 in 0..ATOM_DIM {
            let blocked = transported
                && pulse.transition == Transition::OneAux
                && s1 == AtomLevel::ZeroAux.index();
            let u = if blocked {
                embed(&u_block)
            } else {
                embed(&u_free)
            };
            for i in 0..ATOM_DIM {
                for j in 0..ATOM_DIM {
                    right_full[[ATOM_DIM * s1 + i, ATOM_DIM * s1 + j]] = u[[i, j]];
                }
            }
        }
        right_full.dot(&full)
    }

    #[test]
    fn protocol_matches_matrix_composition_oracle() {
        let rabi = TAU * 1e3;
        let variants = [
            BlockadeVariant::Perfect,
            BlockadeVariant::Interaction { delta: 12.0 * rabi },
            BlockadeVariant::Lossy { gamma: 30.0 * rabi },
            BlockadeVariant::Combined {
                delta: 5.0 * rabi,
                gamma: 8.0 * rabi,
            },
        ];
        for variant in variants {
            let model = BlockadeModel { rabi, variant };
            let sequence = [
                Pulse::pi(Transition::ZeroAux),
                Pulse::two_pi(Transition::OneAux),
                Pulse::pi(Transition::ZeroAux),
            ];
            let mut total: Array2<C64> = Array2::eye(PAIR_DIM);
            for pulse in &sequence {
                total = pulse_matrix(pulse, &model, true).dot(&total);
            }
            for &(q1, q2) in &LOGICAL_INPUTS {
                let trace = blockade_protocol(&model, (q1, q2)).unwrap();
                let mut input = Array1::zeros(PAIR_DIM);
                input[ATOM_DIM * q1.index() + q2.index()] = C64::new(1.0, 0.0);
                let expected = total.dot(&input);
                for idx in 0..PAIR_DIM {
                    let got = trace.final_state.amplitudes[idx];
                    assert_abs_diff_eq!((got - expected[idx]).norm(), 0.0, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn unblocked_map_matches_propagator() {
        let rabi = 3.0;
        for area in [PI, TAU, 0.4] {
            let direct = unblocked_map(area, 0.0);
            let via_propagator = two_level_propagator(rabi, C64::new(0.0, 0.0), area / rabi);
            for i in 0..2 {
                for j in 0..2 {
                    assert_abs_diff_eq!(
                        (direct[i][j] - via_propagator[i][j]).norm(),
                        0.0,
                        epsilon = 1e-12
                    );
                }
            }
        }
    }

    #[test]
    fn logical_superposition_roundtrip_and_normalization() {
        let coeffs = [
            C64::new(2.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 2.0),
            C64::new(0.0, 0.0),
        ];
        let state = PairState::from_logical_amplitudes(&coeffs).unwrap();
        assert_abs_diff_eq!(state.norm_sqr(), 1.0, epsilon = 1e-14);
        let logical = state.logical_amplitudes();
        assert_close(logical[0], 1.0 / 2.0_f64.sqrt(), 0.0, 1e-14);
        assert_close(logical[2], 0.0, 1.0 / 2.0_f64.sqrt(), 1e-14);
        assert!(PairState::from_logical_amplitudes(&[C64::new(0.0, 0.0); 4]).is_err());
    }

    #[test]
    fn fidelity_scan_tracks_zeno_regime() {
        let rabi = TAU * 1e3;
        let ratios = [1.0, 10.0, 100.0, 1000.0];
        let points = fidelity_scan(ScanFamily::Lossy, rabi, &ratios).unwrap();
        assert_eq!(points.len(), ratios.len());
        for pair in points.windows(2) {
            assert!(pair[1].loss_probability < pair[0].loss_probability);
            assert!(pair[1].process_fidelity > pair[0].process_fidelity);
        }
        // Deep in the Zeno regime the perturbative prediction is accurate.
        let deep = points.last().unwrap();
        assert_relative_eq!(
            deep.loss_probability,
            deep.gamma_eff_prediction,
            max_relative = 1e-2
        );
    }

    #[test]
    fn scan_parallel_and_sequential_agree() {
        let rabi = TAU * 1e3;
        let ratios = [0.5, 2.0, 20.0];
        let family = ScanFamily::Combined {
            delta_over_rabi: 10.0,
        };
        let par = fidelity_scan(family, rabi, &ratios).unwrap();
        let seq = fidelity_scan_seq(family, rabi, &ratios).unwrap();
        assert_eq!(par, seq);
    }

    #[test]
    fn scan_input_validation() {
        let rabi = TAU * 1e3;
        assert!(matches!(
            fidelity_scan(ScanFamily::Lossy, rabi, &[]),
            Err(Error::EmptyGrid(_))
        ));
        assert!(fidelity_scan(ScanFamily::Lossy, rabi, &[-1.0]).is_err());
        assert!(fidelity_scan(ScanFamily::Lossy, 0.0, &[1.0]).is_err());
        assert!(fidelity_scan(ScanFamily::Interaction, rabi, &[-3.0]).is_ok());
    }

    #[test]
    fn collisional_gate_phase_and_band_check() {
        let u = TAU * 500.0;
        let trap = TAU * 20e3;
        let hold = PI / u;
        let gate = collisional_phase_gate(u, hold, trap).unwrap();
        assert_relative_eq!(gate.phase_rad, PI, max_relative = 1e-12);
        assert!(gate.single_band_ok);
        let strong = collisional_phase_gate(trap, hold, trap).unwrap();
        assert!(!strong.single_band_ok);
    }

    fn sample_budget_input() -> BudgetInput {
        BudgetInput {
            trap_omega: TAU * 20e3,
            intensity_noise_psd: vec![
                (TAU * 10e3, 1e-13),
                (TAU * 50e3, 3e-13),
                (TAU * 100e3, 1e-12),
            ],
            lattice_depth: TAU * 100e3,
            wavelength_mismatch: 1e-8,
            detuning_noise: TAU * 10.0,
            dressing_rabi: TAU * 120e3,
            aux_admixture: 0.1,
            aux_decay_rate: 1.0,
        }
    }

    #[test]
    fn budget_pair_loss_and_linearization_gap() {
        let input = sample_budget_input();
        let report = decoherence_budget(&input, &Species::sr87()).unwrap();
        assert_eq!(report.pair_loss_rate, 0.1 * 0.1 * 1.0);
        let eps = input.wavelength_mismatch;
        assert_relative_eq!(
            report.linearization_rel_gap,
            eps / (1.0 + eps),
            max_relative = 1e-6
        );
        assert!(report.trap_frequency_difference > 0.0);
        assert!(
            (report.trap_frequency_difference_linear - report.trap_frequency_difference).abs()
                / report.trap_frequency_difference_linear
                < 1e-6
        );
        let dephasing = report.dephasing_time.unwrap();
        assert_relative_eq!(
            dephasing,
            PI / report.trap_frequency_difference,
            max_relative = 1e-12
        );
        let ratio = input.detuning_noise / input.dressing_rabi;
        assert_eq!(report.fractional_depth_estimate, ratio * ratio);
    }

    #[test]
    fn budget_heating_uses_interpolated_psd() {
        let mut input = sample_budget_input();
        input.trap_omega = TAU * 15e3; // 2*omega lands between table rows
        let report = decoherence_budget(&input, &Species::sr87()).unwrap();
        let s = 1e-13 + (3e-13 - 1e-13) * (TAU * 30e3 - TAU * 10e3) / (TAU * 50e3 - TAU * 10e3);
        let expected = 0.5 * PI * PI * input.trap_omega.powi(2) * s;
        assert_relative_eq!(report.heating_rate, expected, max_relative = 1e-12);
    }

    #[test]
    fn budget_psd_out_of_range_is_an_error() {
        let mut input = sample_budget_input();
        input.trap_omega = TAU * 80e3; // 2*omega above the table
        assert!(matches!(
            decoherence_budget(&input, &Species::sr87()),
            Err(Error::InterpolationRange { .. })
        ));
        input.intensity_noise_psd.clear();
        assert!(decoherence_budget(&input, &Species::sr87()).is_err());
    }

    #[test]
    fn budget_zero_mismatch_has_no_dephasing_time() {
        let mut input = sample_budget_input();
        input.wavelength_mismatch = 0.0;
        let report = decoherence_budget(&input, &Species::sr87()).unwrap();
        assert_eq!(report.trap_frequency_difference, 0.0);
        assert_eq!(report.linearization_rel_gap, 0.0);
        assert!(report.dephasing_time.is_none());
    }

    #[test]
    fn psd_interpolation_table_edges() {
        let table = [(1.0, 0.5), (3.0, 1.5)];
        assert_eq!(interpolate_psd(&table, 1.0).unwrap(), 0.5);
        assert_eq!(interpolate_psd(&table, 3.0).unwrap(), 1.5);
        assert_abs_diff_eq!(interpolate_psd(&table, 2.0).unwrap(), 1.0, epsilon = 1e-15);
        assert!(interpolate_psd(&table, 8.0).is_err());
        assert!(interpolate_psd(&[], 1.0).is_err());
    }
}
