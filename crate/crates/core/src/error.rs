use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid stimulus: {0}")]
    InvalidStimulus(String),

    #[error("invalid model parameter: {0}")]
    InvalidParameter(String),

    /// Neither noise nor tone reaches the filter output.
    #[error("degenerate stimulus: no power after peripheral filtering")]
    DegenerateStimulus,

    #[error("coherence modulus {modulus} exceeds 1; quadrature did not converge")]
    CoherenceOutOfRange { modulus: f64 },

    #[error("quadrature did not reach tolerance {tolerance:e} within {panels} panels")]
    QuadratureNotConverged { panels: usize, tolerance: f64 },

    /// `d'·σ_bin / (2·artanh ρ̂)` exceeds one, so no IPD change reaches criterion.
    #[error("binaural sensitivity too low for a finite IPD threshold (arcsin argument {ratio})")]
    SensitivityInsufficient { ratio: f64 },

    #[error("no threshold: d' - target does not change sign on [{lower}, {upper}]")]
    NoThreshold { lower: f64, upper: f64 },

    #[error("unknown experiment family `{0}`")]
    UnknownFamily(String),

    #[error("sweep value {value} outside [{min}, {max}] for {family}")]
    SweepOutOfRange {
        family: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("R² undefined: observed values have zero variance")]
    UndefinedRSquared,

    #[error("length mismatch: {0} observed vs {1} predicted")]
    LengthMismatch(usize, usize),

    #[error("need at least {required} data points, got {got}")]
    InsufficientData { required: usize, got: usize },
}
