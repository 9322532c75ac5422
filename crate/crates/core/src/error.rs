use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Every failure the numerical core can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid constants: {0}")]
    InvalidConstants(&'static str),

    #[error("non-finite input")]
    NonFiniteInput,

    #[error("negative internal energy {0}")]
    NegativeInternalEnergy(f64),

    #[error("invalid grid configuration: {0}")]
    InvalidGridConfig(&'static str),

    /// The absorbed state-density weights failed the exponential moment check.
    #[error("internal-energy quadrature check failed: got {got}, expected {expected}")]
    QuadratureCheckFailed { got: f64, expected: f64 },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(&'static str),

    #[error("operands live on different phase grids")]
    GridMismatch,

    /// `V·V <= 0`: the discrete flux is not timelike.
    #[error("particle flux is not timelike (V·V = {norm_sq})")]
    NonTimelikeFlux { norm_sq: f64 },

    #[error("particle flux has non-positive time component {0}")]
    NegativeTimeComponent(f64),

    #[error("gamma must be positive, got {0}")]
    NonPositiveGamma(f64),

    #[error("quadrature tolerance not reached: estimate {estimate:e}, requested {requested:e}")]
    ToleranceNotReached { estimate: f64, requested: f64 },

    /// The scalar moment ratio lies outside `(0, 1/(mc))`.
    #[error("moment ratio {ratio} outside (0, {upper})")]
    RatioOutOfRange { ratio: f64, upper: f64 },

    #[error("could not bracket gamma")]
    BracketFailure,

    #[error("discrete equilibrium fit did not converge (relative residual {residual:e})")]
    ClosureFailure { residual: f64 },

    /// `dt·ν_max` exceeds the RK4 stability bound on the negative real axis.
    #[error("time step too stiff: dt*nu_max = {stiffness}")]
    StiffnessWarning { stiffness: f64 },

    #[error("time step must be positive and finite, got {0}")]
    InvalidTimeStep(f64),

    #[error("CFL condition violated: c*dt/dx = {courant}")]
    CflViolation { courant: f64 },
}

impl Error {
    /// True for failures caused by the numerics rather than by invalid input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::QuadratureCheckFailed { .. }
                | Error::NonTimelikeFlux { .. }
                | Error::NegativeTimeComponent(_)
                | Error::ToleranceNotReached { .. }
                | Error::RatioOutOfRange { .. }
                | Error::BracketFailure
                | Error::ClosureFailure { .. }
                | Error::StiffnessWarning { .. }
        )
    }
}
