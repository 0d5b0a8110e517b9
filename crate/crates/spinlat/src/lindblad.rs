//! Open-system dynamics of a driven, lossy two-level transition.
//!
//! The workhorse model is a qubit level |g> coupled with Rabi frequency
//! Omega to a metastable level |e> that decays at rate Gamma:
//!
//! ```text
//! H = (Omega/2) (sp + sm) - (Delta/2) sz
//! d rho / dt = -i [H, rho] + Gamma (L rho L+ - {L+L, rho} / 2)
//! ```
//!
//! By default the decay channel points at an explicit `|lost>` sink state
//! (the atom leaves the trap), so "survival" is simply the trace left in
//! the system block; the textbook recycling channel `L = |g><e|` is
//! available behind a flag. Because nothing ever returns from the sink, the
//! system block of the sink model evolves exactly like a pure state under
//! the non-Hermitian Hamiltonian `H - i (Gamma/2) |e><e|`; that closed-form
//! no-jump propagator is exposed too and doubles as an independent
//! cross-check on the integrator.
//!
//! Integration is fixed-step RK4 on the density matrix. All frequencies
//! are rad/s.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::io::{self, Write};

use crate::error::{ensure_finite, Error, Result};
use crate::C64;

/// Trace drift at which the fixed step is declared too coarse.
const TRACE_DRIFT_LIMIT: f64 = 1e-6;

/// dt x (fastest model frequency) above which a step-size warning is
/// recorded.
const STEP_SCALE_WARNING: f64 = 0.05;

/// Hard cap on integrator steps per call.
const MAX_STEPS: u64 = 50_000_000;

fn adjoint(a: &Array2<C64>) -> Array2<C64> {
    a.t().mapv(|z| z.conj())
}

/// Eigenvalues of a Hermitian matrix by cyclic Jacobi rotations, ascending.
/// Intended for the small (dim <= 25) matrices used here.
pub(crate) fn hermitian_eigenvalues(a: &Array2<C64>) -> Vec<f64> {
    let n = a.nrows();
    let mut m = a.clone();
    let scale = m.iter().map(|z| z.norm()).fold(0.0_f64, f64::max).max(1e-300);
    for _sweep in 0..100 {
        let mut off = 0.0_f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(m[[p, q]].norm());
            }
        }
        if off <= 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                let r = apq.norm();
                if r <= 1e-300 {
                    continue;
                }
                let u = apq / r;
                let alpha = m[[p, p]].re;
                let beta = m[[q, q]].re;
                let theta = 0.5 * (2.0 * r).atan2(alpha - beta);
                let (s, c) = theta.sin_cos();
                for i in 0..n {
                    let aip = m[[i, p]];
                    let aiq = m[[i, q]];
                    m[[i, p]] = c * aip + s * u.conj() * aiq;
                    m[[i, q]] = -s * u * aip + c * aiq;
                }
                for i in 0..n {
                    let api = m[[p, i]];
                    let aqi = m[[q, i]];
                    m[[p, i]] = c * api + s * u * aqi;
                    m[[q, i]] = -s * u.conj() * api + c * aqi;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| m[[i, i]].re).collect();
    eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eig
}

/// Density matrix: Hermitian, unit trace, positive semidefinite within
/// numerical tolerance.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    data: Array2<C64>,
}

impl DensityMatrix {
    /// Validates Hermiticity (defect <= 1e-12), unit trace (within 1e-10),
    /// and positivity (eigenvalues >= -1e-10).
    pub fn new(data: Array2<C64>) -> Result<Self> {
        if data.nrows() != data.ncols() || data.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "density matrix must be square and nonempty, got {}x{}",
                data.nrows(),
                data.ncols()
            )));
        }
        let candidate = DensityMatrix { data };
        let defect = candidate.hermiticity_defect();
        if defect > 1e-12 {
            return Err(Error::NotHermitian {
                defect,
                tol: 1e-12,
            });
        }
        let tr = candidate.trace();
        if (tr - 1.0).norm() > 1e-10 {
            return Err(Error::NotDensityMatrix(format!(
                "trace {} differs from 1 by more than 1e-10",
                tr
            )));
        }
        let min = candidate.min_eigenvalue();
        if min < -1e-10 {
            return Err(Error::NotDensityMatrix(format!(
                "negative eigenvalue {min:e}"
            )));
        }
        Ok(candidate)
    }

    pub(crate) fn from_trusted(data: Array2<C64>) -> Self {
        DensityMatrix { data }
    }

    /// |i><i| in a `dim`-level system.
    pub fn basis_state(dim: usize, index: usize) -> Result<Self> {
        if index >= dim || dim == 0 {
            return Err(Error::DimensionMismatch(format!(
                "basis index {index} out of range for dim {dim}"
            )));
        }
        let mut data = Array2::zeros((dim, dim));
        data[[index, index]] = C64::new(1.0, 0.0);
        Ok(DensityMatrix { data })
    }

    /// |psi><psi| for an arbitrary ket, normalized first.
    pub fn pure(ket: &Array1<C64>) -> Result<Self> {
        let norm_sq: f64 = ket.iter().map(|z| z.norm_sqr()).sum();
        if !(norm_sq.is_finite() && norm_sq > 0.0) {
            return Err(Error::InvalidParam(
                "pure-state ket must have positive finite norm".into(),
            ));
        }
        let dim = ket.len();
        let mut data = Array2::zeros((dim, dim));
        for i in 0..dim {
            for j in 0..dim {
                data[[i, j]] = ket[i] * ket[j].conj() / norm_sq;
            }
        }
        Ok(DensityMatrix { data })
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn data(&self) -> &Array2<C64> {
        &self.data
    }

    /// Diagonal element `rho_ii` as a real population.
    pub fn population(&self, index: usize) -> f64 {
        self.data[[index, index]].re
    }

    pub fn trace(&self) -> C64 {
        self.data.diag().sum()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut defect = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                defect = defect.max((self.data[[i, j]] - self.data[[j, i]].conj()).norm());
            }
        }
        defect
    }

    /// Ascending eigenvalues (real by Hermiticity).
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.data)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }
}

/// One decay channel: collapse operator with an associated rate.
#[derive(Clone, Debug)]
pub struct JumpOperator {
    pub op: Array2<C64>,
    /// Decay rate, 1/s (nonnegative).
    pub rate: f64,
}

/// Hamiltonian plus jump operators defining a Lindblad master equation.
#[derive(Clone, Debug)]
pub struct LindbladModel {
    hamiltonian: Array2<C64>,
    jumps: Vec<JumpOperator>,
}

impl LindbladModel {
    /// Validates Hermiticity of H (defect <= 1e-12 relative to its largest
    /// entry), matching dimensions, and nonnegative finite rates.
    pub fn new(hamiltonian: Array2<C64>, jumps: Vec<JumpOperator>) -> Result<Self> {
        let n = hamiltonian.nrows();
        if n == 0 || hamiltonian.ncols() != n {
            return Err(Error::DimensionMismatch(
                "hamiltonian must be square and nonempty".into(),
            ));
        }
        let scale = hamiltonian
            .iter()
            .map(|z| z.norm())
            .fold(0.0_f64, f64::max)
            .max(1e-300);
        let mut defect = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                defect = defect.max((hamiltonian[[i, j]] - hamiltonian[[j, i]].conj()).norm());
            }
        }
        if defect > 1e-12 * scale {
            return Err(Error::NotHermitian {
                defect,
                tol: 1e-12 * scale,
            });
        }
        for jump in &jumps {
            if jump.op.nrows() != n || jump.op.ncols() != n {
                return Err(Error::DimensionMismatch(
                    "jump operator dimension differs from hamiltonian".into(),
                ));
            }
            ensure_finite(jump.rate, "jump rate")?;
            if jump.rate < 0.0 {
                return Err(Error::InvalidParam("jump rate must be >= 0".into()));
            }
        }
        Ok(LindbladModel { hamiltonian, jumps })
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn hamiltonian(&self) -> &Array2<C64> {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[JumpOperator] {
        &self.jumps
    }

    /// Fastest frequency in the model: the largest Hamiltonian entry or
    /// decay rate. Used for the step-size sanity check.
    pub fn frequency_scale(&self) -> f64 {
        let h = self
            .hamiltonian
            .iter()
            .map(|z| z.norm())
            .fold(0.0_f64, f64::max);
        let g = self
            .jumps
            .iter()
            .map(|j| j.rate)
            .fold(0.0_f64, f64::max);
        h.max(g)
    }

    /// Right-hand side `-i[H, rho] + sum_k gamma_k (L rho L+ - {L+L, rho}/2)`.
    pub fn rhs(&self, rho: &Array2<C64>) -> Array2<C64> {
        let h = &self.hamiltonian;
        let mut out = (h.dot(rho) - rho.dot(h)).mapv(|z| -C64::i() * z);
        for jump in &self.jumps {
            if jump.rate == 0.0 {
                continue;
            }
            let l = &jump.op;
            let ld = adjoint(l);
            let ldl = ld.dot(l);
            let gain = l.dot(rho).dot(&ld);
            let anti = ldl.dot(rho) + rho.dot(&ldl);
            out = out + (gain - anti.mapv(|z| 0.5 * z)).mapv(|z| jump.rate * z);
        }
        out
    }
}

/// Fixed-step RK4 controls.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorParams {
    /// Step, s.
    pub dt: f64,
    /// End time, s.
    pub t_final: f64,
    /// Record every n-th step (the initial and final states are always
    /// recorded).
    pub sample_stride: usize,
}

impl IntegratorParams {
    pub fn validate(&self) -> Result<()> {
        ensure_finite(self.dt, "dt")?;
        ensure_finite(self.t_final, "t_final")?;
        if !(self.dt > 0.0 && self.dt <= self.t_final) {
            return Err(Error::InvalidParam(
                "integrator needs 0 < dt <= t_final".into(),
            ));
        }
        if self.sample_stride == 0 {
            return Err(Error::InvalidParam("sample_stride must be >= 1".into()));
        }
        Ok(())
    }

    /// Step small against every frequency in the system: at most 1e-3 of a
    /// Rabi cycle, 1e-2 of a decay time, and 1e-2 of a detuning period.
    pub fn default_for(sys: &LossSystem, t_final: f64) -> Self {
        let mut dt = t_final / 1e4;
        if sys.rabi > 0.0 {
            dt = dt.min(1e-3 * TAU / sys.rabi);
        }
        if sys.loss_rate > 0.0 {
            dt = dt.min(1e-2 / sys.loss_rate);
        }
        if sys.detuning != 0.0 {
            dt = dt.min(1e-2 / sys.detuning.abs());
        }
        let steps = (t_final / dt).ceil().max(1.0);
        IntegratorParams {
            dt,
            t_final,
            sample_stride: (steps / 1024.0).ceil().max(1.0) as usize,
        }
    }
}

/// Time-ordered density-matrix samples plus any integrator warnings.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub samples: Vec<(f64, DensityMatrix)>,
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub fn final_state(&self) -> &DensityMatrix {
        &self.samples.last().expect("trajectory is never empty").1
    }
}

fn rk4_step(model: &LindbladModel, rho: &Array2<C64>, dt: f64) -> Array2<C64> {
    let k1 = model.rhs(rho);
    let k2 = model.rhs(&(rho + &k1.mapv(|z| 0.5 * dt * z)));
    let k3 = model.rhs(&(rho + &k2.mapv(|z| 0.5 * dt * z)));
    let k4 = model.rhs(&(rho + &k3.mapv(|z| dt * z)));
    rho + &(k1 + k2.mapv(|z| 2.0 * z) + k3.mapv(|z| 2.0 * z) + k4)
        .mapv(|z| dt / 6.0 * z)
}

/// Integrates the master equation from `rho0` with fixed-step RK4.
///
/// A warning is recorded when `dt` is coarse against the fastest model
/// frequency; if the trace then drifts beyond 1e-6 the run aborts with
/// [`Error::TraceDrift`].
pub fn evolve(
    model: &LindbladModel,
    rho0: &DensityMatrix,
    params: &IntegratorParams,
) -> Result<Trajectory> {
    params.validate()?;
    if rho0.dim() != model.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state dim {} vs model dim {}",
            rho0.dim(),
            model.dim()
        )));
    }
    let steps_est = (params.t_final / params.dt).ceil();
    if !(steps_est.is_finite() && steps_est <= MAX_STEPS as f64) {
        return Err(Error::InvalidParam(format!(
            "t_final/dt = {steps_est:e} steps exceeds the {MAX_STEPS} step cap"
        )));
    }

    let mut warnings = Vec::new();
    let scale = model.frequency_scale();
    if params.dt * scale > STEP_SCALE_WARNING {
        warnings.push(format!(
            "dt * max-frequency = {:.3e} exceeds {STEP_SCALE_WARNING}; \
             expect reduced accuracy",
            params.dt * scale
        ));
    }

    let trace0 = rho0.trace();
    let mut rho = rho0.data().clone();
    let mut samples = vec![(0.0, rho0.clone())];
    let mut t = 0.0_f64;
    let mut step_index = 0u64;
    while t < params.t_final {
        let dt = params.dt.min(params.t_final - t);
        rho = rk4_step(model, &rho, dt);
        t += dt;
        step_index += 1;

        let drift = (rho.diag().sum() - trace0).norm();
        if drift > TRACE_DRIFT_LIMIT {
            return Err(Error::TraceDrift { drift });
        }
        let done = t >= params.t_final;
        if step_index.is_multiple_of(params.sample_stride as u64) || done {
            samples.push((t, DensityMatrix::from_trusted(rho.clone())));
        }
    }
    Ok(Trajectory { samples, warnings })
}

/// Driven lossy transition: Rabi frequency, drive detuning, decay rate of
/// the upper level (all rad/s; the rate is 1/s).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossSystem {
    pub rabi: f64,
    pub detuning: f64,
    pub loss_rate: f64,
}

impl LossSystem {
    pub fn validate(&self) -> Result<()> {
        ensure_finite(self.rabi, "rabi")?;
        ensure_finite(self.detuning, "detuning")?;
        ensure_finite(self.loss_rate, "loss_rate")?;
        if self.rabi < 0.0 {
            return Err(Error::InvalidParam("rabi must be >= 0".into()));
        }
        if self.loss_rate < 0.0 {
            return Err(Error::InvalidParam("loss_rate must be >= 0".into()));
        }
        Ok(())
    }
}

/// Assembles the Lindblad model for a [`LossSystem`].
///
/// With `sink = true` (the default throughout this crate) the state space
/// is `{|g>, |e>, |lost>}` and decay feeds the inert sink; with `sink =
/// false` it is the two-level recycling channel `|g><e|`.
pub fn build_loss_model(sys: &LossSystem, sink: bool) -> Result<LindbladModel> {
    sys.validate()?;
    let half_rabi = C64::new(0.5 * sys.rabi, 0.0);
    let half_det = C64::new(0.5 * sys.detuning, 0.0);
    let dim = if sink { 3 } else { 2 };
    let mut h = Array2::zeros((dim, dim));
    h[[0, 0]] = half_det;
    h[[1, 1]] = -half_det;
    h[[0, 1]] = half_rabi;
    h[[1, 0]] = half_rabi;
    let mut op = Array2::zeros((dim, dim));
    let target = if sink { 2 } else { 0 };
    op[[target, 1]] = C64::new(1.0, 0.0);
    LindbladModel::new(
        h,
        vec![JumpOperator {
            op,
            rate: sys.loss_rate,
        }],
    )
}

/// Propagator `exp(-i t [[0, omega/2], [omega/2, z]])` for a two-level
/// system whose upper level carries the (possibly complex) diagonal `z`;
/// `z = Delta - i Gamma/2` gives the no-jump evolution of a blocked, lossy
/// transition. Exact up to floating-point rounding.
pub fn two_level_propagator(omega: f64, upper_diag: C64, t: f64) -> [[C64; 2]; 2] {
    // H = a I + c sx + d sz with (c sx + d sz)^2 = (c^2 + d^2) I, which
    // holds for complex coefficients too, so the rotation formula applies
    // with complex half-splitting b. The global phase is kept inside the
    // eigenvalue exponentials exp(-i (a +- b) t): their magnitudes stay
    // bounded for decaying systems, whereas cos(bt) alone would overflow
    // once Gamma t is large.
    let a = 0.5 * upper_diag;
    let c = C64::new(0.5 * omega, 0.0);
    let d = -0.5 * upper_diag;
    let b = (c * c + d * d).sqrt();
    let e_minus = (-C64::i() * (a - b) * t).exp();
    let e_plus = (-C64::i() * (a + b) * t).exp();
    // exp(-i a t) cos(b t) and exp(-i a t) sin(b t) / b.
    let cos_term = 0.5 * (e_minus + e_plus);
    let sin_term = if (b * t).norm() < 1e-8 {
        let bt = b * t;
        (-C64::i() * a * t).exp() * t * (C64::new(1.0, 0.0) - bt * bt / 6.0)
    } else {
        (e_minus - e_plus) / (2.0 * C64::i() * b)
    };
    let m = [[d, c], [c, -d]];
    let mut u = [[C64::new(0.0, 0.0); 2]; 2];
    for (i, row) in m.iter().enumerate() {
        for (j, &mij) in row.iter().enumerate() {
            let ident = if i == j { cos_term } else { C64::new(0.0, 0.0) };
            u[i][j] = ident - C64::i() * sin_term * mij;
        }
    }
    u
}

/// Probability that no loss has occurred up to `t`, computed by integrating
/// the sink model from |g> and reading the trace left in the system block.
/// `dt` overrides the default step from [`IntegratorParams::default_for`].
pub fn survival_probability(sys: &LossSystem, t: f64, dt: Option<f64>) -> Result<f64> {
    ensure_finite(t, "t")?;
    if t <= 0.0 {
        return Err(Error::InvalidParam("t must be positive".into()));
    }
    let model = build_loss_model(sys, true)?;
    let mut params = IntegratorParams::default_for(sys, t);
    if let Some(dt) = dt {
        params.dt = dt;
    }
    params.sample_stride = usize::MAX;
    let traj = evolve(&model, &DensityMatrix::basis_state(3, 0)?, &params)?;
    Ok(1.0 - traj.final_state().population(2))
}

/// Same survival probability through the independent no-jump route: the
/// squared norm of `exp(-i (H - i Gamma/2 |e><e|) t) |g>`, which is exact
/// for the sink structure since nothing returns from `|lost>`.
pub fn survival_probability_nojump(sys: &LossSystem, t: f64) -> Result<f64> {
    sys.validate()?;
    ensure_finite(t, "t")?;
    if t < 0.0 {
        return Err(Error::InvalidParam("t must be >= 0".into()));
    }
    // Relative to the |g> diagonal the upper level sits at -Delta (the
    // dropped Delta/2 offset only contributes a global phase).
    let u = two_level_propagator(
        sys.rabi,
        C64::new(-sys.detuning, -0.5 * sys.loss_rate),
        t,
    );
    Ok(u[0][0].norm_sqr() + u[1][0].norm_sqr())
}

/// Effective loss rate of the driven lossy transition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GammaEff {
    /// `Omega^2 Gamma / (4 (Delta^2 + Gamma^2/4))`, 1/s.
    pub rate: f64,
    /// False when the drive is too strong for the perturbative picture
    /// (`Omega > max(|Delta|, Gamma)/5`).
    pub perturbative_valid: bool,
}

/// Perturbative effective decay rate of |g> under a weak drive to the lossy
/// level: `Gamma_eff = Omega^2 Gamma / (4 (Delta^2 + Gamma^2/4))`. Far off
/// resonance this tends to `Omega^2 Gamma / (4 Delta^2)`; on resonance with
/// strong loss it is `Omega^2 / Gamma`, the quantum-Zeno regime where more
/// loss means less loss.
pub fn gamma_eff(sys: &LossSystem) -> Result<GammaEff> {
    sys.validate()?;
    let rate = if sys.loss_rate == 0.0 {
        0.0
    } else {
        sys.rabi * sys.rabi * sys.loss_rate
            / (4.0 * (sys.detuning * sys.detuning + 0.25 * sys.loss_rate * sys.loss_rate))
    };
    let scale = sys.detuning.abs().max(sys.loss_rate);
    Ok(GammaEff {
        rate,
        perturbative_valid: sys.rabi <= scale / 5.0,
    })
}

/// Column layout for trajectory CSV export.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrajectoryColumns {
    /// `t_s` plus the real diagonal populations `p_0..p_{d-1}`.
    Populations,
    /// `t_s` plus every entry, row-major, as `re_i_j,im_i_j` pairs.
    DensityRowMajor,
}

/// Writes a trajectory as CSV with a single header line; floats carry 17
/// significant digits so they round-trip exactly.
pub fn write_trajectory_csv<W: Write>(
    mut out: W,
    trajectory: &Trajectory,
    columns: TrajectoryColumns,
) -> io::Result<()> {
    let dim = trajectory
        .samples
        .first()
        .map(|(_, rho)| rho.dim())
        .unwrap_or(0);
    let mut header = String::from("t_s");
    match columns {
        TrajectoryColumns::Populations => {
            for i in 0..dim {
                header.push_str(&format!(",p_{i}"));
            }
        }
        TrajectoryColumns::DensityRowMajor => {
            for i in 0..dim {
                for j in 0..dim {
                    header.push_str(&format!(",re_{i}_{j},im_{i}_{j}"));
                }
            }
        }
    }
    writeln!(out, "{header}")?;
    for (t, rho) in &trajectory.samples {
        let mut line = format!("{t:.16e}");
        match columns {
            TrajectoryColumns::Populations => {
                for i in 0..dim {
                    line.push_str(&format!(",{:.16e}", rho.population(i)));
                }
            }
            TrajectoryColumns::DensityRowMajor => {
                for i in 0..dim {
                    for j in 0..dim {
                        let z = rho.data()[[i, j]];
                        line.push_str(&format!(",{:.16e},{:.16e}", z.re, z.im));
                    }
                }
            }
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}
