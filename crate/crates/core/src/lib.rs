//! Optomechanical system with linear, quadratic and cubic optomechanical
//! couplings.
//!
//! The crate evaluates the spectrum of the averaged (diagonal) Hamiltonian,
//! the photon-blockade detunings it implies, and the closed-form dissipative
//! mean amplitude `<a>(t)` of an optical coherent state coupled to a thermal
//! mechanical mode. Every closed form has a brute-force counterpart in
//! [`oracle`], which evolves truncated Fock-space amplitudes directly.
//!
//! All rates are expressed in units of the mechanical frequency Ω and times
//! as τ = Ω t.
//!
//! ```
//! use optomech::{InitialState, KerrCoefficients, ModelParams, System};
//!
//! let params = ModelParams::default();
//! let kerr = KerrCoefficients::from_params(&params);
//! assert!((kerr.lambda3 - 10.0 / 12.0 * 0.005_f64.powi(2)).abs() < 1e-18);
//!
//! let system = System::new(params, InitialState::from_mean_photons(5.0, 1.0));
//! let a0 = optomech::dynamics::amplitude_exact(&system, 0.0, &Default::default()).unwrap();
//! assert!((a0.value - system.state.alpha).norm() < 1e-12);
//! ```

pub mod analysis;
pub mod dynamics;
mod error;
pub mod model;
pub mod oracle;
pub mod thermal;

pub use error::{AnalysisError, DynamicsError, Error, ModelError, OracleError};
pub use model::{BlockadeDetunings, KerrCoefficients, ModelParams, SpectrumEntry};
pub use thermal::InitialState;

pub use num_complex::Complex64;

/// Parameters, derived nonlinearities and initial state bundled together.
///
/// The Kerr coefficients are stored rather than recomputed so that callers can
/// evaluate the dynamics with deliberately altered coefficients (the oracle's
/// sensitivity checks rely on this).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct System {
    pub params: ModelParams,
    pub kerr: KerrCoefficients,
    pub state: InitialState,
}

impl System {
    pub fn new(params: ModelParams, state: InitialState) -> Self {
        Self {
            kerr: KerrCoefficients::from_params(&params),
            params,
            state,
        }
    }

    pub fn with_kerr(params: ModelParams, kerr: KerrCoefficients, state: InitialState) -> Self {
        Self {
            params,
            kerr,
            state,
        }
    }

    /// Highest angular frequency (units of Ω) carried by `<a>` with weight
    /// above the Poisson tail at five standard deviations.
    pub fn spectral_band(&self) -> f64 {
        let mean = self.state.mean_photons();
        self.params.delta.abs() + 2.0 * self.kerr.lambda1.abs() * (mean + 5.0 * mean.sqrt())
    }
}
