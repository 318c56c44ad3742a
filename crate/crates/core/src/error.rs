use alloc::string::String;

/// Errors raised by the spectral kernels.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A cutoff of zero was requested.
    #[error("cutoff must be at least 1")]
    ZeroCutoff,
    /// The mode set is empty, e.g. the third-ball for N < 3.
    #[error("mode set for cutoff {0} is empty")]
    EmptyModeSet(u32),
    /// The zero wavevector is not a mode.
    #[error("(0,0) is not a valid mode")]
    ZeroMode,
    /// Requested tolerance needs a lattice radius above the configured maximum.
    #[error("tolerance needs radius {needed}, above the maximum {max}")]
    RadiusTooLarge {
        /// Radius that would be needed.
        needed: u64,
        /// Configured maximum radius.
        max: u64,
    },
    /// A complex field is not conjugate symmetric.
    #[error("conjugate symmetry violated at ({k1},{k2}) by {residual:e}")]
    ConjugateSymmetry {
        /// First component of the worst mode.
        k1: i32,
        /// Second component of the worst mode.
        k2: i32,
        /// Size of the violation.
        residual: f64,
    },
    /// A zero-mean field was required.
    #[error("field has nonzero mean {0:e}")]
    NonzeroMean(f64),
    /// A mode lies outside the field's cutoff.
    #[error("mode ({k1},{k2}) outside cutoff {cutoff}")]
    OutsideCutoff {
        /// First component.
        k1: i32,
        /// Second component.
        k2: i32,
        /// Cutoff of the container.
        cutoff: u32,
    },
    /// Coefficient vector length does not match the mode set.
    #[error("expected {expected} coefficients, got {got}")]
    LengthMismatch {
        /// Expected length.
        expected: usize,
        /// Actual length.
        got: usize,
    },
    /// Two fields have different cutoffs.
    #[error("cutoff mismatch: {0} vs {1}")]
    CutoffMismatch(u32, u32),
    /// Dealiasing grid too small.
    #[error("grid size {grid} too small, need at least {needed}")]
    GridTooSmall {
        /// Grid size supplied.
        grid: usize,
        /// Minimum grid size.
        needed: usize,
    },
    /// A cylinder function uses modes outside the safe band.
    #[error("mode ({k1},{k2}) outside the safe band of cutoff {cutoff}")]
    OutsideSafeBand {
        /// First component.
        k1: i32,
        /// Second component.
        k2: i32,
        /// State cutoff.
        cutoff: u32,
    },
    /// Infinite cutoff requested without a tolerance.
    #[error("an infinite cutoff needs a positive tolerance")]
    MissingTolerance,
    /// Configuration rejected.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    /// Observable not recorded.
    #[error("mode ({k1},{k2}) is not a recorded observable")]
    UnknownObservable {
        /// First component.
        k1: i32,
        /// Second component.
        k2: i32,
    },
    /// Not enough data for an estimator.
    #[error("degenerate input: {0}")]
    Degenerate(String),
    /// Grids or shapes of two ensembles disagree.
    #[error("mismatched grids: {0}")]
    Mismatch(String),
}
