use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Invalid construction parameters (interval, mode count, radius, ...).
    #[error("invalid configuration `{field}`: {reason}")]
    Config { field: &'static str, reason: String },

    /// An argument lies outside the domain of the operation (negative time,
    /// misordered horizons, mismatched dimensions).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("initial state already in target: ‖y0‖ = {norm} ≤ r = {radius}")]
    AlreadyInTarget { norm: f64, radius: f64 },

    /// The free trajectory already reaches the ball by the requested horizon,
    /// so the minimizer of the dual functional is zero.
    #[error("target reachable by free dynamics: horizon {horizon} ≥ exit time {exit_time}")]
    ReachableByFreeDynamics { horizon: f64, exit_time: f64 },

    /// `(δ, k)` violates `2δ ≤ kδ < T*`.
    #[error("(δ = {delta}, k = {blocks}) outside the admissible set 2δ ≤ kδ < T* = {exit_time}")]
    OutsideAdmissible {
        delta: f64,
        blocks: usize,
        exit_time: f64,
    },

    #[error("sampling too coarse: no k with kδ < T* = {exit_time} meets budget {budget} (δ = {delta})")]
    SamplingTooCoarse {
        delta: f64,
        budget: f64,
        exit_time: f64,
    },

    /// ‖q‖ ≤ r: the ball-regularized quadratic is minimized at zero.
    #[error("zero minimizer: ‖q‖ = {q_norm} ≤ r = {radius}")]
    ZeroMinimizer { q_norm: f64, radius: f64 },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("construction failed: {0}")]
    Construction(String),

    /// A verified postcondition failed; indicates a bug or loss of precision.
    #[error("internal consistency check failed: {0}")]
    Consistency(String),
}

impl Error {
    pub(crate) fn config(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Config {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// `true` for failures caused by the inputs (as opposed to the numerics).
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::Config { .. }
                | Error::Domain(_)
                | Error::AlreadyInTarget { .. }
                | Error::ReachableByFreeDynamics { .. }
                | Error::OutsideAdmissible { .. }
                | Error::SamplingTooCoarse { .. }
                | Error::ZeroMinimizer { .. }
        )
    }
}
