//! Error type shared by every stage of the pipeline.

use thiserror::Error;

/// Failures reported by the numerical pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GtsError {
    /// A seed does not lie in any open class interval.
    #[error("invalid seed (k={k}, l={l}, b={b}): {reason}")]
    InvalidSeed { k: i8, l: i8, b: f64, reason: String },

    /// A system description violates its own invariants.
    #[error("invalid system: {0}")]
    InvalidSystem(String),

    /// A state left the box |x|,|y| <= sigma.
    #[error("state ({x}, {y}) leaves the domain |x|,|y| <= {sigma}")]
    DomainExceeded { x: f64, y: f64, sigma: f64 },

    /// The radicand of an S branch is negative beyond rounding.
    #[error("branch radicand negative: {0}")]
    BranchDomain(f64),

    /// Double-exponential refinement did not reach the requested accuracy.
    #[error("quadrature did not converge: estimate {estimate}, error {error}")]
    QuadratureFail { estimate: f64, error: f64 },

    /// The adaptive integrator could not continue.
    #[error("integrator step failure at t={t}: {reason}")]
    StepFail { t: f64, reason: String },

    /// No return to the section was observed in the allotted time.
    #[error("no return to the section within time {limit}")]
    NoReturn { limit: f64 },

    /// The monotonicity indicator changes sign along the cycle.
    #[error("monotonicity indicator changes sign (min {min}, max {max})")]
    NotMonotone { min: f64, max: f64 },

    /// The mean of the first-order coefficient is not zero.
    #[error("mean of xi is {0}, expected zero")]
    MeanNotZero(f64),

    /// A right-hand side that must have zero mean does not.
    #[error("right-hand side {name} has mean {mean}, expected zero")]
    MeanMismatch { name: String, mean: f64 },

    /// A Fourier mode of the transport equation is resonant.
    #[error("resonant mode n={n}: |1-cos(alpha_n T)| = {gap}")]
    ResonantMode { n: usize, gap: f64 },

    /// The nondegeneracy constant is too small to decide.
    #[error("degenerate nondegeneracy constant K={0}")]
    DegenerateK(f64),

    /// The gamma argument lies outside the supported range.
    #[error("gamma {0} outside the supported range")]
    GammaOutOfRange(f64),

    /// Crossing tables did not settle into a monotone contraction.
    #[error("crossing table is not monotone: {0}")]
    NonMonotone(String),

    /// The two crossing tables around a predicted cycle do not close in.
    #[error("limit cycle bracket did not converge: {0}")]
    NotConverged(String),

    /// Newton iteration for an equilibrium failed.
    #[error("Newton iteration failed from ({x0}, {y0})")]
    NewtonFail { x0: f64, y0: f64 },
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, GtsError>;
