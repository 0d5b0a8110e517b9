//! Crate-wide error taxonomy.
//!
//! Validation failures on user-supplied parameters surface as
//! [`Error::InvalidParam`] or one of the more specific variants; numerical
//! routines add their own failure modes (degenerate adiabatic channels, flat
//! potentials, trace drift in the integrator, interpolation out of range).

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter that must be finite was NaN or infinite.
    #[error("non-finite value for {0}")]
    NonFinite(&'static str),

    /// Catch-all for parameter combinations that fail validation.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// A scan or average was requested over an empty grid.
    #[error("empty grid: {0}")]
    EmptyGrid(&'static str),

    /// Scan grid is too short or too coarse for the requested operation.
    #[error("grid coverage: {0}")]
    GridCoverage(String),

    /// The lower adiabatic potential is flat (or has no quadratic minimum),
    /// so no trap frequency can be extracted.
    #[error("lower potential provides no confinement over the scanned period")]
    NoConfinement,

    /// The adiabatic channels are degenerate at the requested position, so
    /// the non-adiabatic coupling between them is undefined.
    #[error("adiabatic channels degenerate at x = {x:e} m")]
    DegenerateChannels { x: f64 },

    /// Tensor polarizability coefficient has a vanishing denominator
    /// F(2F - 1); it is undefined below F = 1.
    #[error("tensor coefficient undefined for F = {f_twice}/2")]
    TensorUndefined { f_twice: i32 },

    /// A magnetic projection outside the |m| <= I (or |m_F| <= F) manifold.
    #[error("projection {m_twice}/2 lies outside the spin-{spin_twice}/2 manifold")]
    ProjectionOutOfRange { m_twice: i32, spin_twice: i32 },

    /// Matrix or vector dimensions do not agree.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A matrix that must be Hermitian failed the symmetry check.
    #[error("matrix not Hermitian: defect {defect:e} exceeds {tol:e}")]
    NotHermitian { defect: f64, tol: f64 },

    /// A density matrix failed its construction invariants.
    #[error("not a density matrix: {0}")]
    NotDensityMatrix(String),

    /// The master-equation integrator detected trace drift beyond 1e-6,
    /// which means the fixed step is too coarse for the model.
    #[error("density-matrix trace drifted by {drift:e} (limit 1e-6); reduce dt")]
    TraceDrift { drift: f64 },

    /// A tabulated quantity was requested outside its tabulation range.
    #[error("tabulated data does not cover frequency {frequency:e} rad/s")]
    InterpolationRange { frequency: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

/// Returns `Ok(value)` when finite, otherwise [`Error::NonFinite`] tagged
/// with the parameter name.
pub(crate) fn ensure_finite(value: f64, name: &'static str) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite(name))
    }
}
