//! Model parameters, Kerr/cross-Kerr coefficients and the spectrum of the
//! averaged diagonal Hamiltonian
//!
//! ```text
//! H_eff = Δ a†a + Ω b†b − (g2/2) a†a − g2 a†a b†b
//!         − Λ1 (a†a)² − Λ2 (a†a)² b†b − Λ3 (a†a)² (b†b)²
//! ```
//!
//! whose eigenvalues on |n, m> are
//! `E = (Δ − g2/2) n + Ω m − g2 n m − Λ1 n² − Λ2 n² m − Λ3 n² m²`.

use crate::error::ModelError;

/// Coupling ratio g/Ω above which the averaged Hamiltonian is reported as
/// outside its perturbative range.
pub const PERTURBATIVE_LIMIT: f64 = 0.3;

/// Physical rates, all in units of the mechanical frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Optical cavity frequency ω_c. Only the full (non-averaged) Hamiltonian
    /// uses it; the averaged dynamics live in the drive frame and see `delta`.
    pub omega_c: f64,
    /// Mechanical frequency Ω (1 after normalization).
    pub omega: f64,
    pub g1: f64,
    pub g2: f64,
    pub g3: f64,
    /// Detuning Δ = ω_c − ω_d.
    pub delta: f64,
    /// Optical energy decay rate κ.
    pub kappa: f64,
    /// Mechanical energy decay rate γ.
    pub gamma: f64,
}

impl Default for ModelParams {
    /// The `fig2a` preset parameters at κ = 0.01.
    fn default() -> Self {
        Self {
            omega_c: 1.0,
            omega: 1.0,
            g1: 0.1,
            g2: 0.015,
            g3: 0.005,
            delta: 1.0,
            kappa: 0.01,
            gamma: 1e-4,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        let fields = [
            ("omega_c", self.omega_c),
            ("omega", self.omega),
            ("g1", self.g1),
            ("g2", self.g2),
            ("g3", self.g3),
            ("delta", self.delta),
            ("kappa", self.kappa),
            ("gamma", self.gamma),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(ModelError::InvalidParameter {
                    name,
                    value,
                    reason: "must be finite",
                });
            }
        }
        if self.omega <= 0.0 {
            return Err(ModelError::InvalidParameter {
                name: "omega",
                value: self.omega,
                reason: "mechanical frequency must be positive",
            });
        }
        if self.kappa < 0.0 {
            return Err(ModelError::InvalidParameter {
                name: "kappa",
                value: self.kappa,
                reason: "decay rate must be nonnegative",
            });
        }
        if self.gamma < 0.0 {
            return Err(ModelError::InvalidParameter {
                name: "gamma",
                value: self.gamma,
                reason: "decay rate must be nonnegative",
            });
        }
        if !self.is_perturbative() {
            log::warn!(
                "couplings (g1, g2, g3) = ({}, {}, {}) exceed {} Ω; the averaged Hamiltonian is outside its perturbative range",
                self.g1,
                self.g2,
                self.g3,
                PERTURBATIVE_LIMIT
            );
        }
        Ok(())
    }

    /// Whether every coupling satisfies |g|/Ω ≤ [`PERTURBATIVE_LIMIT`].
    pub fn is_perturbative(&self) -> bool {
        [self.g1, self.g2, self.g3]
            .iter()
            .all(|g| g.abs() / self.omega <= PERTURBATIVE_LIMIT)
    }
}

/// Effective nonlinearities produced by second-order averaging.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KerrCoefficients {
    /// Kerr self-action Λ1.
    pub lambda1: f64,
    /// Sixth-degree cross-Kerr strength Λ2.
    pub lambda2: f64,
    /// Eighth-degree cross-Kerr strength Λ3.
    pub lambda3: f64,
}

impl KerrCoefficients {
    pub fn from_params(p: &ModelParams) -> Self {
        let (g1, g2, g3) = (p.g1, p.g2, p.g3);
        Self {
            lambda1: (g1 * g1 + g1 * g3 + 0.25 * g2 * g2 + g3 * g3 / 18.0) / p.omega,
            lambda2: (2.0 * g1 * g3 + 0.5 * g2 * g2 + 10.0 / 12.0 * g3 * g3) / p.omega,
            lambda3: 10.0 / 12.0 * g3 * g3 / p.omega,
        }
    }

    /// Λ1 + Λ2 m + Λ3 m², the photon-number nonlinearity seen at phonon number `m`.
    pub fn kerr_at(&self, m: f64) -> f64 {
        self.lambda1 + self.lambda2 * m + self.lambda3 * m * m
    }
}

pub fn compute_kerr_coefficients(p: &ModelParams) -> KerrCoefficients {
    KerrCoefficients::from_params(p)
}

/// `E_{n,m}` of the averaged Hamiltonian.
pub fn energy_level(p: &ModelParams, k: &KerrCoefficients, n: u32, m: u32) -> f64 {
    let (n, m) = (f64::from(n), f64::from(m));
    (p.delta - 0.5 * p.g2) * n + p.omega * m - p.g2 * n * m
        - k.lambda1 * n * n
        - k.lambda2 * n * n * m
        - k.lambda3 * n * n * m * m
}

/// `E_to − E_from`.
pub fn transition_energy(
    p: &ModelParams,
    k: &KerrCoefficients,
    from: (u32, u32),
    to: (u32, u32),
) -> f64 {
    energy_level(p, k, to.0, to.1) - energy_level(p, k, from.0, from.1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumEntry {
    pub n: u32,
    pub m: u32,
    pub energy: f64,
}

/// All levels with n ≤ `n_max`, m ≤ `m_max`, ordered by n then m.
pub fn spectrum(p: &ModelParams, k: &KerrCoefficients, n_max: u32, m_max: u32) -> Vec<SpectrumEntry> {
    (0..=n_max)
        .flat_map(|n| {
            (0..=m_max).map(move |m| SpectrumEntry {
                n,
                m,
                energy: energy_level(p, k, n, m),
            })
        })
        .collect()
}

/// Detuning of the second-photon transitions (1,m)→(2,m), m = 0 and 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockadeDetunings {
    /// Offsets relative to the bare cavity frequency: `g2/2 + 3Λ1` and
    /// `3g2/2 + 3(Λ1 + Λ2 + Λ3)`.
    pub cavity_ref: (f64, f64),
    /// Offsets relative to a drive resonant with (0,0)→(1,0): `2Λ1` and
    /// `2Λ1 + g2 + 3Λ2 + 3Λ3`.
    pub drive_ref: (f64, f64),
}

pub fn blockade_detunings(p: &ModelParams, k: &KerrCoefficients) -> BlockadeDetunings {
    let (l1, l2, l3) = (k.lambda1, k.lambda2, k.lambda3);
    BlockadeDetunings {
        cavity_ref: (0.5 * p.g2 + 3.0 * l1, 1.5 * p.g2 + 3.0 * (l1 + l2 + l3)),
        drive_ref: (2.0 * l1, 2.0 * l1 + p.g2 + 3.0 * l2 + 3.0 * l3),
    }
}
