//! Error type shared by the simulation modules.
//!
//! Parse and compile failures of the pulse language are reported separately
//! as positioned [`crate::lang::Diagnostic`]s.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("doublet splitting must be positive, got {0} Hz")]
    NonPositiveSplitting(f64),

    #[error("level index {0} outside 0..=2")]
    LevelOutOfRange(usize),

    #[error("selective pulse on {i} and {j}: identical levels")]
    IdenticalLevels { i: usize, j: usize },

    #[error(
        "selective pulse on {i} and {j}: non-adjacent levels (double-quantum transition is not directly drivable)"
    )]
    NonAdjacentLevels { i: usize, j: usize },

    #[error("flip angle must lie in (0, 2pi], got {0} rad")]
    FlipAngleOutOfRange(f64),

    #[error("shaped pulse needs a positive duration")]
    MissingDuration,

    #[error("shaped compilation requires a transition-selective pulse")]
    NotSelective,

    #[error("time step {dt} s too coarse for a {duration} s pulse (need dt <= duration/200)")]
    StepTooCoarse { dt: f64, duration: f64 },

    #[error("pulse envelope integrates to zero")]
    ZeroEnvelope,

    #[error("state matrix is not Hermitian (defect {0:.3e})")]
    NotHermitian(f64),

    #[error("state matrix is not traceless (defect {0:.3e})")]
    NotTraceless(f64),

    #[error("linewidth must be positive, got {0} Hz")]
    NonPositiveLinewidth(f64),

    #[error("sweep width {sweep} Hz must exceed the doublet splitting {splitting} Hz")]
    SweepTooNarrow { sweep: f64, splitting: f64 },

    #[error("spectrum needs at least 2 points, got {0}")]
    TooFewPoints(usize),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
}
