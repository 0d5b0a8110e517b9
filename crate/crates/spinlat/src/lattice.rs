//! Spin-dependent dressed lattice potentials on the clock transition.
//!
//! Each qubit spin state is coupled to a metastable level by its own
//! standing-wave dressing field with position-dependent Rabi frequency
//! `Omega_i(x) = Omega_i sin(k_l x + phi_i)`. Diagonalizing the two-level
//! Hamiltonian at every `x` yields a pair of adiabatic potentials; with the
//! off-resonant Stark shifts of both beams switched off they reduce to the
//! closed form
//!
//! ```text
//! V_pm(x) = ( -delta_i +- sqrt(delta_i^2 + Omega_i(x)^2) ) / 2
//! ```
//!
//! The relative phase between the two standing waves moves the two spin
//! lattices with respect to each other, which is what makes spin-dependent
//! transport possible. All energies are angular frequencies (rad/s).

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{ensure_finite, Error, Result};
use crate::exec;
use crate::species::Species;
use crate::units::HBAR;

/// Number of sample points used for period averages.
const AVERAGE_SAMPLES: usize = 1024;

/// Coarse samples per period when bracketing the potential minimum.
const MINIMUM_SCAN_SAMPLES: usize = 256;

/// Curvature stencil step, as a fraction of the lattice period.
const CURVATURE_STEP_FRACTION: f64 = 1.0 / 4096.0;

/// Relative step used by the finite-difference non-adiabatic coupling.
const COUPLING_STEP_FRACTION: f64 = 1e-5;

/// Logical qubit spin label. Spin `Zero` and `One` are the two clock-state
/// superpositions, each dressed by its own standing wave.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Qubit {
    Zero,
    One,
}

impl Qubit {
    pub const BOTH: [Qubit; 2] = [Qubit::Zero, Qubit::One];

    /// 0 or 1, for compact serialized output.
    pub fn index(self) -> usize {
        match self {
            Qubit::Zero => 0,
            Qubit::One => 1,
        }
    }
}

/// One standing-wave dressing field, resonant with (or detuned from) the
/// metastable transition of a single spin state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DressingField {
    /// Which qubit spin this field dresses.
    pub spin: Qubit,
    /// Peak Rabi frequency, rad/s (amplitude of the sin profile).
    pub rabi_peak: f64,
    /// Detuning of the dressing laser from the transition, rad/s.
    pub detuning: f64,
    /// Lattice wavenumber k_l, rad/m.
    pub wavenumber: f64,
    /// Standing-wave phase offset, rad.
    pub phase: f64,
}

impl DressingField {
    /// Position-dependent Rabi frequency `Omega sin(k_l x + phi)`, rad/s.
    pub fn rabi_at(&self, x: f64) -> f64 {
        self.rabi_peak * (self.wavenumber * x + self.phase).sin()
    }

    /// Lattice period 2pi/k_l, m.
    pub fn period(&self) -> f64 {
        TAU / self.wavenumber
    }

    fn validate(&self) -> Result<()> {
        ensure_finite(self.rabi_peak, "rabi_peak")?;
        ensure_finite(self.detuning, "detuning")?;
        ensure_finite(self.wavenumber, "wavenumber")?;
        ensure_finite(self.phase, "phase")?;
        if self.rabi_peak < 0.0 {
            return Err(Error::InvalidParam("rabi_peak must be >= 0".into()));
        }
        if self.wavenumber <= 0.0 {
            return Err(Error::InvalidParam("wavenumber must be positive".into()));
        }
        Ok(())
    }
}

/// Peak off-resonant AC Stark shifts produced by one dressing beam on the
/// ground and metastable levels. The spatial envelope is the summed
/// intensity profile of both standing waves.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StarkShifts {
    /// Peak per-beam shift of the lower (dressed-qubit) level, rad/s.
    pub ground_peak: f64,
    /// Peak per-beam shift of the metastable level, rad/s.
    pub excited_peak: f64,
}

/// Full lattice configuration: one dressing field per spin plus the
/// off-resonant Stark environment shared by both.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeConfig {
    pub species: Species,
    pub field_0: DressingField,
    pub field_1: DressingField,
    pub stark: StarkShifts,
    /// When false the Hamiltonian keeps only the resonant coupling and the
    /// potentials follow the closed form exactly.
    pub include_offresonant: bool,
}

impl LatticeConfig {
    /// Symmetric two-spin configuration: both fields share the peak Rabi
    /// frequency, detuning, and the species' clock-wavelength wavenumber;
    /// phases start at zero.
    pub fn symmetric(
        species: Species,
        rabi_peak: f64,
        detuning: f64,
        stark: StarkShifts,
        include_offresonant: bool,
    ) -> Self {
        let k = species.lattice_wavenumber();
        let field = |spin| DressingField {
            spin,
            rabi_peak,
            detuning,
            wavenumber: k,
            phase: 0.0,
        };
        LatticeConfig {
            species,
            field_0: field(Qubit::Zero),
            field_1: field(Qubit::One),
            stark,
            include_offresonant,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.species.validate()?;
        self.field_0.validate()?;
        self.field_1.validate()?;
        ensure_finite(self.stark.ground_peak, "stark.ground_peak")?;
        ensure_finite(self.stark.excited_peak, "stark.excited_peak")?;
        if self.field_0.spin == self.field_1.spin {
            return Err(Error::InvalidParam(
                "field_0 and field_1 must dress distinct spins".into(),
            ));
        }
        if self.field_0.wavenumber != self.field_1.wavenumber {
            return Err(Error::InvalidParam(
                "both dressing fields must share one wavenumber".into(),
            ));
        }
        Ok(())
    }

    pub fn field(&self, spin: Qubit) -> &DressingField {
        if self.field_0.spin == spin {
            &self.field_0
        } else {
            &self.field_1
        }
    }

    /// Lattice period 2pi/k_l, m.
    pub fn period(&self) -> f64 {
        self.field_0.period()
    }

    /// Copy of this configuration with field 0 at phase zero and field 1 at
    /// `phi`, the scan convention for relative-phase sweeps.
    pub fn with_relative_phase(&self, phi: f64) -> Self {
        let mut out = *self;
        out.field_0.phase = 0.0;
        out.field_1.phase = phi;
        out
    }
}

/// Real symmetric 2x2 Hamiltonian `[[a, c], [c, b]]` in the (dressed
/// qubit, metastable) basis at a single position.
#[derive(Clone, Copy, Debug)]
pub(crate) struct TwoLevel {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl TwoLevel {
    /// (lower, upper) eigenvalues.
    pub fn eigenvalues(self) -> (f64, f64) {
        let mean = 0.5 * (self.a + self.b);
        let r = f64::hypot(0.5 * (self.a - self.b), self.c);
        (mean - r, mean + r)
    }

    /// Normalized lower eigenvector `(g, e)` with nonnegative g component
    /// (e component nonnegative when g vanishes). For a fully degenerate
    /// point the convention is the bare ground state.
    pub fn lower_eigenvector(self) -> [f64; 2] {
        let (lower, _) = self.eigenvalues();
        // Two algebraically equivalent null-vector forms; pick the one with
        // the larger norm to dodge cancellation.
        let v = [self.c, lower - self.a];
        let w = [lower - self.b, self.c];
        let nv = v[0] * v[0] + v[1] * v[1];
        let nw = w[0] * w[0] + w[1] * w[1];
        let mut out = if nv >= nw { v } else { w };
        let norm = f64::hypot(out[0], out[1]);
        if norm == 0.0 {
            return [1.0, 0.0];
        }
        out = [out[0] / norm, out[1] / norm];
        if out[0] < 0.0 || (out[0] == 0.0 && out[1] < 0.0) {
            out = [-out[0], -out[1]];
        }
        out
    }

    /// Normalized upper eigenvector, orthogonal to the lower one.
    pub fn upper_eigenvector(self) -> [f64; 2] {
        let lo = self.lower_eigenvector();
        [-lo[1], lo[0]]
    }
}

/// Off-resonant Stark profiles `(shift_ground, shift_excited)` at `x`,
/// rad/s. Both standing waves contribute intensity, so the envelope is
/// `sin^2(k x + phi_0) + sin^2(k x + phi_1)`; at relative phase pi/2 the sum
/// is exactly 1 and the shifts turn spatially homogeneous. The profile is
/// computed from the configured peaks regardless of `include_offresonant`;
/// that flag only controls whether [`adiabatic_potentials`] includes it.
pub fn stark_profiles(config: &LatticeConfig, x: f64) -> (f64, f64) {
    let envelope = (config.field_0.wavenumber * x + config.field_0.phase)
        .sin()
        .powi(2)
        + (config.field_1.wavenumber * x + config.field_1.phase)
            .sin()
            .powi(2);
    (
        config.stark.ground_peak * envelope,
        config.stark.excited_peak * envelope,
    )
}

fn hamiltonian_at(config: &LatticeConfig, spin: Qubit, x: f64) -> TwoLevel {
    let field = config.field(spin);
    let (shift_g, shift_e) = if config.include_offresonant {
        stark_profiles(config, x)
    } else {
        (0.0, 0.0)
    };
    TwoLevel {
        a: shift_g,
        b: -field.detuning + shift_e,
        c: 0.5 * field.rabi_at(x),
    }
}

/// One sample of the adiabatic potential pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PotentialSample {
    /// Position, m.
    pub x: f64,
    /// Lower adiabatic potential, rad/s.
    pub v_lower: f64,
    /// Upper adiabatic potential, rad/s.
    pub v_upper: f64,
    /// Weight of the metastable level in the lower dressed state.
    pub admixture_e: f64,
}

/// Closed-form resonant-only potentials `(V_minus, V_plus)` of one field at
/// `x`, rad/s. Matches [`adiabatic_potentials`] exactly when
/// `include_offresonant` is false.
pub fn resonant_potentials(field: &DressingField, x: f64) -> (f64, f64) {
    let root = f64::hypot(field.detuning, field.rabi_at(x));
    (
        0.5 * (-field.detuning - root),
        0.5 * (-field.detuning + root),
    )
}

/// Diagonalizes the dressed two-level Hamiltonian of `spin` at `x`.
pub fn adiabatic_potentials(
    config: &LatticeConfig,
    spin: Qubit,
    x: f64,
) -> Result<PotentialSample> {
    config.validate()?;
    ensure_finite(x, "x")?;
    Ok(sample_unchecked(config, spin, x))
}

fn sample_unchecked(config: &LatticeConfig, spin: Qubit, x: f64) -> PotentialSample {
    let h = hamiltonian_at(config, spin, x);
    let (v_lower, v_upper) = h.eigenvalues();
    let lower = h.lower_eigenvector();
    PotentialSample {
        x,
        v_lower,
        v_upper,
        admixture_e: lower[1] * lower[1],
    }
}

/// Weighting used for period averages of the metastable admixture.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AveragingWeight {
    /// Uniform in x over one lattice period (the default).
    Uniform,
    /// Weighted by the harmonic motional ground-state density at the
    /// minimum of the lower potential.
    GroundStateDensity,
}

/// Period-averaged metastable admixture of the lower dressed state at
/// relative standing-wave phase `phi` (field 0 at phase zero, field 1 at
/// `phi`), averaged uniformly in x.
pub fn period_averaged_admixture(config: &LatticeConfig, spin: Qubit, phi: f64) -> Result<f64> {
    period_averaged_admixture_weighted(config, spin, phi, AveragingWeight::Uniform)
}

/// Same average with an explicit weighting choice.
pub fn period_averaged_admixture_weighted(
    config: &LatticeConfig,
    spin: Qubit,
    phi: f64,
    weight: AveragingWeight,
) -> Result<f64> {
    config.validate()?;
    ensure_finite(phi, "relative phase")?;
    let cfg = config.with_relative_phase(phi);
    let period = cfg.period();
    let xs: Vec<f64> = (0..AVERAGE_SAMPLES)
        .map(|j| (j as f64 + 0.5) * period / AVERAGE_SAMPLES as f64)
        .collect();
    match weight {
        AveragingWeight::Uniform => {
            let sum: f64 = xs
                .iter()
                .map(|&x| sample_unchecked(&cfg, spin, x).admixture_e)
                .sum();
            Ok(sum / AVERAGE_SAMPLES as f64)
        }
        AveragingWeight::GroundStateDensity => {
            let x_min = minimize_lower_potential(&cfg, spin)?;
            let omega = trap_frequency_at(&cfg, spin, x_min)?;
            let a_ho_sq = HBAR / (cfg.species.mass_kg * omega);
            let mut num = 0.0;
            let mut den = 0.0;
            for &x in &xs {
                let mut d = (x - x_min) % period;
                if d > 0.5 * period {
                    d -= period;
                } else if d < -0.5 * period {
                    d += period;
                }
                let w = (-d * d / a_ho_sq).exp();
                num += w * sample_unchecked(&cfg, spin, x).admixture_e;
                den += w;
            }
            Ok(num / den)
        }
    }
}

/// One row of a relative-phase / position scan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    /// Relative standing-wave phase, rad.
    pub relative_phase: f64,
    pub spin: Qubit,
    /// Position, m.
    pub x: f64,
    /// Lower adiabatic potential, rad/s.
    pub v_lower: f64,
    /// Upper adiabatic potential, rad/s.
    pub v_upper: f64,
    /// Metastable weight of the lower dressed state.
    pub admixture_e: f64,
}

fn validate_scan_grid(xs: &[f64], period: f64) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::EmptyGrid("scan positions"));
    }
    for &x in xs {
        ensure_finite(x, "scan position")?;
    }
    if xs.len() < 2 {
        return Err(Error::GridCoverage(
            "a scan needs at least two positions".into(),
        ));
    }
    let (min, max) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    let span = max - min;
    let step = span / (xs.len() - 1) as f64;
    if span + step < period * (1.0 - 1e-9) {
        return Err(Error::GridCoverage(format!(
            "grid spans {:.3e} m but must cover one lattice period ({:.3e} m)",
            span + step,
            period
        )));
    }
    if period / step < 64.0 * (1.0 - 1e-9) {
        return Err(Error::GridCoverage(format!(
            "grid resolves {:.1} points per period; at least 64 required",
            period / step
        )));
    }
    Ok(())
}

fn scan_tasks(phases: &[f64], xs: &[f64]) -> Vec<(f64, Qubit, f64)> {
    let mut tasks = Vec::with_capacity(phases.len() * 2 * xs.len());
    for &phi in phases {
        for spin in Qubit::BOTH {
            for &x in xs {
                tasks.push((phi, spin, x));
            }
        }
    }
    tasks
}

fn scan_row(config: &LatticeConfig, task: &(f64, Qubit, f64)) -> ScanRow {
    let (phi, spin, x) = *task;
    let cfg = config.with_relative_phase(phi);
    let s = sample_unchecked(&cfg, spin, x);
    ScanRow {
        relative_phase: phi,
        spin,
        x,
        v_lower: s.v_lower,
        v_upper: s.v_upper,
        admixture_e: s.admixture_e,
    }
}

fn validate_scan(config: &LatticeConfig, phases: &[f64], xs: &[f64]) -> Result<()> {
    config.validate()?;
    if phases.is_empty() {
        return Err(Error::EmptyGrid("relative phases"));
    }
    for &phi in phases {
        ensure_finite(phi, "relative phase")?;
    }
    validate_scan_grid(xs, config.period())
}

/// Tabulates both spin potentials and admixtures over a grid of relative
/// phases and positions. Rows come out ordered (phase, spin, x); grid
/// points are independent, so with the `parallel` feature they are
/// evaluated concurrently.
pub fn potential_scan(
    config: &LatticeConfig,
    phases: &[f64],
    xs: &[f64],
) -> Result<Vec<ScanRow>> {
    validate_scan(config, phases, xs)?;
    let tasks = scan_tasks(phases, xs);
    Ok(exec::map_collect(&tasks, |t| scan_row(config, t)))
}

/// Sequential variant of [`potential_scan`], always available for
/// benchmarking against the parallel path.
pub fn potential_scan_seq(
    config: &LatticeConfig,
    phases: &[f64],
    xs: &[f64],
) -> Result<Vec<ScanRow>> {
    validate_scan(config, phases, xs)?;
    let tasks = scan_tasks(phases, xs);
    Ok(exec::map_collect_seq(&tasks, |t| scan_row(config, t)))
}

fn lower_potential(config: &LatticeConfig, spin: Qubit, x: f64) -> f64 {
    hamiltonian_at(config, spin, x).eigenvalues().0
}

/// Locates the minimum of the lower potential within one period: coarse
/// 256-point bracket followed by golden-section refinement.
fn minimize_lower_potential(config: &LatticeConfig, spin: Qubit) -> Result<f64> {
    let period = config.period();
    let n = MINIMUM_SCAN_SAMPLES;
    let mut best = (0usize, f64::INFINITY);
    let mut vmax = f64::NEG_INFINITY;
    for j in 0..n {
        let x = j as f64 * period / n as f64;
        let v = lower_potential(config, spin, x);
        if v < best.1 {
            best = (j, v);
        }
        vmax = vmax.max(v);
    }
    let depth = vmax - best.1;
    let scale = vmax.abs().max(best.1.abs());
    if depth <= 1e-12 * scale || depth == 0.0 {
        return Err(Error::NoConfinement);
    }

    let step = period / n as f64;
    let mut lo = best.0 as f64 * step - step;
    let mut hi = best.0 as f64 * step + step;
    // Golden-section search; the potential is periodic so evaluating
    // slightly outside [0, period) is fine.
    let inv_phi = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = lower_potential(config, spin, x1);
    let mut f2 = lower_potential(config, spin, x2);
    let tol = period * 1e-10;
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = lower_potential(config, spin, x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = lower_potential(config, spin, x2);
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Trap frequency from the curvature at a given minimum (five-point central
/// second difference), rad/s.
fn trap_frequency_at(config: &LatticeConfig, spin: Qubit, x_min: f64) -> Result<f64> {
    let h = config.period() * CURVATURE_STEP_FRACTION;
    let f = |x| lower_potential(config, spin, x);
    let curvature = (-f(x_min - 2.0 * h) + 16.0 * f(x_min - h) - 30.0 * f(x_min)
        + 16.0 * f(x_min + h)
        - f(x_min + 2.0 * h))
        / (12.0 * h * h);
    if !(curvature.is_finite() && curvature > 0.0) {
        return Err(Error::NoConfinement);
    }
    // curvature is d^2 V / dx^2 with V in rad/s; hbar converts it to an
    // energy curvature before the mechanical frequency is taken.
    Ok((HBAR * curvature / config.species.mass_kg).sqrt())
}

/// Harmonic trap frequency at the minimum of the lower adiabatic potential
/// of `spin`, rad/s.
pub fn trap_frequency(config: &LatticeConfig, spin: Qubit) -> Result<f64> {
    config.validate()?;
    let x_min = minimize_lower_potential(config, spin)?;
    trap_frequency_at(config, spin, x_min)
}

/// Closed-form trap frequency of a resonantly dressed lattice (detuning
/// zero): expanding `V_minus = -Omega |sin(k x)| / 2` about an antinode
/// gives curvature `Omega k^2 / 2` and hence `omega = k sqrt(hbar Omega /
/// (2 m))`.
pub fn resonant_trap_frequency(species: &Species, rabi_peak: f64) -> Result<f64> {
    species.validate()?;
    ensure_finite(rabi_peak, "rabi_peak")?;
    if rabi_peak <= 0.0 {
        return Err(Error::InvalidParam(
            "rabi_peak must be positive for a resonant lattice".into(),
        ));
    }
    let k = species.lattice_wavenumber();
    Ok(k * (HBAR * rabi_peak / (2.0 * species.mass_kg)).sqrt())
}

/// Which non-adiabatic decay channel a suppression factor refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LossChannel {
    /// Transitions across a single dressing field's gap delta_i.
    SingleDressing,
    /// Transitions bridged by the frequency difference of the two fields.
    CrossDressing,
}

/// Exponential suppression factor `exp(-gap / omega)` for motional
/// non-adiabatic transitions. The prefactor is deliberately not modeled;
/// only the scaling in the (frequency gap) / (trap frequency) ratio is.
pub fn nonadiabatic_loss_scaling(
    _channel: LossChannel,
    frequency_gap: f64,
    trap_omega: f64,
) -> Result<f64> {
    ensure_finite(frequency_gap, "frequency_gap")?;
    ensure_finite(trap_omega, "trap_omega")?;
    if trap_omega <= 0.0 {
        return Err(Error::InvalidParam("trap_omega must be positive".into()));
    }
    if frequency_gap < 0.0 {
        return Err(Error::InvalidParam(
            "frequency_gap must be nonnegative".into(),
        ));
    }
    Ok((-frequency_gap / trap_omega).exp())
}

/// Magnitude of `<upper| d/dx |lower>` for a position-dependent two-level
/// profile, via central differences of the gauge-aligned lower eigenvector.
pub(crate) fn coupling_from_profile(
    profile: impl Fn(f64) -> TwoLevel,
    x: f64,
    step: f64,
) -> Result<f64> {
    let h = profile(x);
    let (lo, hi) = h.eigenvalues();
    let gap = hi - lo;
    let scale = h.a.abs().max(h.b.abs()).max(h.c.abs());
    if scale == 0.0 || gap <= 1e-12 * scale {
        return Err(Error::DegenerateChannels { x });
    }
    let anchor = h.lower_eigenvector();
    let align = |mut v: [f64; 2]| {
        if v[0] * anchor[0] + v[1] * anchor[1] < 0.0 {
            v = [-v[0], -v[1]];
        }
        v
    };
    let vp = align(profile(x + step).lower_eigenvector());
    let vm = align(profile(x - step).lower_eigenvector());
    let dv = [(vp[0] - vm[0]) / (2.0 * step), (vp[1] - vm[1]) / (2.0 * step)];
    let up = h.upper_eigenvector();
    Ok((up[0] * dv[0] + up[1] * dv[1]).abs())
}

/// Non-adiabatic coupling `|<Psi_plus| d/dx |Psi_minus>|` between the
/// adiabatic channels of `spin` at `x`, in 1/m. Largest near nodes of the
/// dressing field, where the gap is smallest. Errors when the channels are
/// degenerate at `x`.
pub fn nonadiabatic_coupling(config: &LatticeConfig, spin: Qubit, x: f64) -> Result<f64> {
    config.validate()?;
    ensure_finite(x, "x")?;
    let step = config.period() * COUPLING_STEP_FRACTION;
    coupling_from_profile(|x| hamiltonian_at(config, spin, x), x, step)
}
