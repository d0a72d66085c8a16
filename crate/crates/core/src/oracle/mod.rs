//! Brute-force Fock-space evolution used to cross-check the closed forms.
//!
//! The mechanical thermal state is carried as one amplitude vector with real
//! coefficients sqrt(|p_m|²). Every observable compared here depends on the
//! phonon populations only, so this gives the same answers as the density
//! matrix at a fraction of the cost.

mod fock;
mod hamiltonian;
mod rk4;
mod spectral;

pub use fock::{build_initial_state, default_truncation, evolve_diagonal, FockState, TAIL_TOL};
pub use hamiltonian::{apply_full_hamiltonian, DiagonalHamiltonian, FullHamiltonian, Hamiltonian, BANDWIDTH};
pub use rk4::{evolve_rk4, EvolutionResult, Rk4Options};
pub use spectral::{validate_effective_spectrum, SpectralCheck, SpectralOptions, MAX_COUPLING};
