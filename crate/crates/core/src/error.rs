use thiserror::Error;

/// Errors raised by the spectral, paraproduct and remainder machinery.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid size {n} must be a power of two and dimension {dim} must be 1 or 2")]
    InvalidGrid { dim: usize, n: usize },

    #[error("grid too small: N={n} resolves J_max={j_max} dyadic scales, at least 4 are needed")]
    GridTooSmall { n: usize, j_max: i32 },

    #[error("block index {j} is outside the resolvable range -1..={j_max}")]
    UnresolvedBandwidth { j: i32, j_max: i32 },

    #[error("derivative order {order} exceeds K_max={k_max}")]
    OrderExceeded { order: usize, k_max: usize },

    #[error("derivative order {order} is not below the total regularity {alpha}")]
    OrderOutOfRange { order: usize, alpha: f64 },

    #[error("bandwidth {bandwidth} reaches the Nyquist limit {nyquist}; products would alias")]
    Aliasing { bandwidth: f64, nyquist: usize },

    #[error("regularity must be positive, got {0}")]
    NonpositiveRegularity(f64),

    #[error("regularity must be non-integer, got {0}")]
    IntegerRegularity(f64),

    #[error("insufficient scales: {found} usable, {required} required")]
    InsufficientScales { found: usize, required: usize },

    #[error("multi-index must be nonzero")]
    ZeroMultiIndex,

    #[error("component {0} is not bound in the context")]
    UnboundComponent(usize),

    #[error("unknown identity `{0}`")]
    UnknownIdentity(String),

    #[error("unknown decay target `{0}`")]
    UnknownDecayTarget(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed field file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for violations of a numeric precondition (regularity, bandwidth,
    /// order) as opposed to malformed input or I/O.
    pub fn is_numeric_precondition(&self) -> bool {
        matches!(
            self,
            Error::GridTooSmall { .. }
                | Error::UnresolvedBandwidth { .. }
                | Error::OrderExceeded { .. }
                | Error::OrderOutOfRange { .. }
                | Error::Aliasing { .. }
                | Error::NonpositiveRegularity(_)
                | Error::IntegerRegularity(_)
                | Error::InsufficientScales { .. }
                | Error::ZeroMultiIndex
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
