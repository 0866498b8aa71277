//! Crate-wide error type.

/// Everything that can go wrong in this crate is a domain violation of some
/// scalar or vector argument; one flat enum keeps call sites uniform.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{name} must be strictly positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("{name} must lie in [{lo}, {hi}], got {value}")]
    OutOfRange {
        name: &'static str,
        lo: f64,
        hi: f64,
        value: f64,
    },

    #[error("{name} must be at least {min}, got {value}")]
    TooSmall {
        name: &'static str,
        min: usize,
        value: usize,
    },

    #[error("vector lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("zero vector has no direction")]
    ZeroVector,

    #[error("single-antenna quantization gain is deterministic; no density exists")]
    DegenerateGain,

    #[error("no interior stationary point for coefficient {coeff}")]
    NoStationaryPoint { coeff: f64 },

    #[error("tau grid must be strictly increasing and lie within [0, {slot}]")]
    BadTauGrid { slot: f64 },
}
