use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("thermal series not converged at tau = {tau} after {m_reached} phonon terms")]
    TruncationNotConverged { tau: f64, m_reached: usize },
    /// g2 + Λ2 vanishes, so there is no thermal revival comb. The Kerr comb
    /// period π/Λ1 is carried along for the caller to report instead.
    #[error("g2 + lambda2 = 0: no thermal revival sequence (Kerr comb period {kerr_period})")]
    DegenerateModel { kerr_period: f64 },
    #[error("no collapse crossing found for tau in (0, {scanned_to}]")]
    NoRoot { scanned_to: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("Fock truncation too small: {0}")]
    TruncationTooSmall(String),
    #[error("RK4 step {dt} not converged: halving changed the final state by {change:e} (tolerance {tolerance:e})")]
    StepNotConverged {
        dt: f64,
        change: f64,
        tolerance: f64,
    },
    #[error("ambiguous spectral peak: second peak at {second} within resolution of {first}")]
    PeakAmbiguous { first: f64, second: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("trace is empty")]
    EmptyTrace,
    #[error("trace grid is not uniform")]
    NonUniformGrid,
    #[error("need at least {required} samples, got {got}")]
    TooFewSamples { required: usize, got: usize },
    #[error("grid too coarse: Nyquist frequency {nyquist} below required band {required}")]
    GridTooCoarse { nyquist: f64, required: f64 },
    #[error("unknown preset '{0}'")]
    UnknownPreset(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}
