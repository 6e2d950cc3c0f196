use thiserror::Error;

/// Errors surfaced by the library. Guard violations carry enough context to
/// pick a different method or shrink the problem.
#[derive(Debug, Error)]
pub enum Error {
    #[error("not Hermitian: max |h - h^dag| = {deviation:.3e}")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("not unitary: max |U^dag U - I| = {deviation:.3e}")]
    NotUnitary { deviation: f64 },

    #[error("dense permanent guard exceeded: N = {n} > {guard}; use a banded method")]
    DenseGuardExceeded { n: usize, guard: usize },

    #[error("band guard exceeded: B = {band} > {guard}")]
    BandGuardExceeded { band: usize, guard: usize },

    #[error("matrix band structure is not circulant")]
    NotCirculant,

    #[error("particle number not conserved: input {input}, output {output}")]
    ParticleNumberMismatch { input: usize, output: usize },

    #[error("Fock basis size {size} exceeds enumeration guard {guard}")]
    EnumerationGuardExceeded { size: usize, guard: usize },

    #[error("Fock basis mismatch between distributions")]
    BasisMismatch,

    #[error("control '{channel}' out of bounds at step {step}: value {value}")]
    ControlOutOfBounds {
        channel: String,
        step: usize,
        value: f64,
    },

    #[error("waveform does not match model family: {0}")]
    ChannelMismatch(String),

    #[error("non-finite fidelity at iteration {iteration}")]
    NonFiniteFidelity { iteration: usize },

    #[error("closure guard exceeded: d^2 = {dim_sq} > {guard}")]
    ClosureGuardExceeded { dim_sq: usize, guard: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
