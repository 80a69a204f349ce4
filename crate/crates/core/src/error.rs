//! Error type shared by all modules.

use std::fmt;

/// Failure modes of the numerical routines.
///
/// Variant names are stable: the CLI surfaces them verbatim in reports so a
/// failed pipeline always names the originating condition.
#[derive(Debug, Clone, PartialEq)]
pub enum WaveError {
    /// Argument outside its admissible interval.
    Domain { what: &'static str, value: f64 },
    /// Input at or below the singular threshold (e.g. s ≤ s₀).
    SingularInput { what: &'static str, value: f64 },
    /// The requested equation has no solution (e.g. Bernoulli inversion below R_c).
    NoSolution { what: &'static str },
    /// No sign change found while growing a root bracket.
    BracketFailure { what: &'static str },
    /// Shooting solve hit a resonant vertical mode.
    ShootingDegeneracy,
    /// Operating within the guard band of the dispersion root τ*.
    NearResonance { tau: f64, tau_star: f64 },
    /// Grid refinement check failed.
    DiscretizationFailure { what: &'static str },
    /// Surface stagnation guard triggered (Ψ_Y below threshold).
    Stagnation { x: f64 },
    /// Hodograph validity lost (h_p at or below threshold).
    HodographBreakdown,
    /// Newton iteration did not converge.
    NonConvergence { iterations: usize, residual: f64 },
    /// Invalid request (bad sizes, inconsistent inputs).
    InvalidInput { what: &'static str },
    /// A relation that must hold for in-range inputs failed to hold.
    InternalInconsistency { what: &'static str },
}

impl WaveError {
    /// Stable machine-readable name of the variant.
    pub fn name(&self) -> &'static str {
        match self {
            WaveError::Domain { .. } => "domain-error",
            WaveError::SingularInput { .. } => "singular-input",
            WaveError::NoSolution { .. } => "no-solution",
            WaveError::BracketFailure { .. } => "bracket-failure",
            WaveError::ShootingDegeneracy => "shooting-degeneracy",
            WaveError::NearResonance { .. } => "near-resonance",
            WaveError::DiscretizationFailure { .. } => "discretization-failure",
            WaveError::Stagnation { .. } => "stagnation",
            WaveError::HodographBreakdown => "hodograph-breakdown",
            WaveError::NonConvergence { .. } => "non-convergence",
            WaveError::InvalidInput { .. } => "invalid-input",
            WaveError::InternalInconsistency { .. } => "internal-inconsistency",
        }
    }
}

impl fmt::Display for WaveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WaveError::Domain { what, value } => {
                write!(f, "domain error: {what} = {value} outside admissible range")
            }
            WaveError::SingularInput { what, value } => {
                write!(f, "singular input: {what} = {value}")
            }
            WaveError::NoSolution { what } => write!(f, "no solution: {what}"),
            WaveError::BracketFailure { what } => write!(f, "bracket failure: {what}"),
            WaveError::ShootingDegeneracy => write!(f, "shooting degeneracy: resonant vertical mode"),
            WaveError::NearResonance { tau, tau_star } => {
                write!(f, "near resonance: tau = {tau} within guard band of tau* = {tau_star}")
            }
            WaveError::DiscretizationFailure { what } => {
                write!(f, "discretization failure: {what}")
            }
            WaveError::Stagnation { x } => write!(f, "stagnation guard at X = {x}"),
            WaveError::HodographBreakdown => write!(f, "hodograph breakdown: h_p not positive"),
            WaveError::NonConvergence { iterations, residual } => {
                write!(f, "no convergence after {iterations} iterations (residual {residual:e})")
            }
            WaveError::InvalidInput { what } => write!(f, "invalid input: {what}"),
            WaveError::InternalInconsistency { what } => {
                write!(f, "internal inconsistency: {what}")
            }
        }
    }
}

impl std::error::Error for WaveError {}
