use rayon::prelude::*;

use super::fock::FockState;
use super::hamiltonian::FullHamiltonian;
use super::rk4::{evolve_rk4, Rk4Options};
use crate::analysis::spectrum::Spectrum;
use crate::error::{Error, OracleError};
use crate::model::{transition_energy, KerrCoefficients};
use crate::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralOptions {
    pub n_max: usize,
    pub m_max: usize,
    pub dt: f64,
    /// Spacing of the <a> samples fed to the FFT.
    pub sample_interval: f64,
    pub pad_factor: usize,
    /// Largest change of the extracted frequency when dt is halved. `None`
    /// skips the second run.
    pub freq_halving_tol: Option<f64>,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self {
            n_max: 3,
            m_max: 20,
            dt: 0.02,
            sample_interval: 0.5,
            pad_factor: 4,
            freq_halving_tol: Some(1e-5),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralCheck {
    /// (n, m) → (n + 1, m).
    pub lower: (usize, usize),
    pub upper: (usize, usize),
    /// E_{n+1,m} − E_{n,m} of the averaged spectrum, lab frame (Δ → ω_c).
    pub analytic_freq: f64,
    pub numeric_freq: f64,
    pub deviation: f64,
}

/// Largest coupling accepted, in units of Ω.
pub const MAX_COUPLING: f64 = 0.1;

fn dominant_frequency(
    h: &FullHamiltonian,
    init: &FockState,
    t_final: f64,
    dt: f64,
    opts: &SpectralOptions,
) -> Result<f64, OracleError> {
    let every = (opts.sample_interval / dt).round().max(1.0) as usize;
    let rk4 = Rk4Options {
        halving_tol: None,
        record_every: every,
        ..Rk4Options::default()
    };
    let run = evolve_rk4(init, h, t_final, dt, &rk4)?;
    let spectrum = Spectrum::new(&run.trace.value, every as f64 * dt, opts.pad_factor);
    let peak = spectrum
        .dominant_peak()
        .ok_or_else(|| OracleError::InvalidArgument("trace too short for a spectrum".into()))?;
    if let Some((second, _)) = peak.rival {
        return Err(OracleError::PeakAmbiguous {
            first: peak.frequency,
            second,
        });
    }
    Ok(peak.frequency)
}

/// Check the averaged spectrum against brute-force integration of the full
/// Hamiltonian.
///
/// Each probe (n, m) starts from (|n,m> + |n+1,m>)/√2, is integrated without
/// dissipation for `t_final`, and the dominant frequency of <a> is compared
/// with E_{n+1,m} − E_{n,m}. Probes run in parallel.
pub fn validate_effective_spectrum(
    p: &ModelParams,
    probes: &[(usize, usize)],
    t_final: f64,
    opts: &SpectralOptions,
) -> Result<Vec<SpectralCheck>, Error> {
    for (name, g) in [("g1", p.g1), ("g2", p.g2), ("g3", p.g3)] {
        if g.abs() > MAX_COUPLING * p.omega {
            return Err(OracleError::InvalidArgument(format!(
                "{name} = {g} exceeds {MAX_COUPLING} omega"
            ))
            .into());
        }
    }
    let kerr = KerrCoefficients::from_params(p);
    if kerr.lambda1 > 0.0 && t_final < 10.0 / kerr.lambda1 {
        return Err(OracleError::InvalidArgument(format!(
            "t_final = {t_final} cannot resolve lambda1 = {}; need at least {}",
            kerr.lambda1,
            10.0 / kerr.lambda1
        ))
        .into());
    }
    let lab = ModelParams {
        delta: p.omega_c,
        ..*p
    };
    let h = FullHamiltonian::new(p, opts.m_max);

    probes
        .par_iter()
        .map(|&(n, m)| {
            let init = FockState::superposition(opts.n_max, opts.m_max, &[(n, m), (n + 1, m)])?;
            let (coarse, fine) = rayon::join(
                || dominant_frequency(&h, &init, t_final, opts.dt, opts),
                || {
                    opts.freq_halving_tol
                        .map(|_| dominant_frequency(&h, &init, t_final, 0.5 * opts.dt, opts))
                },
            );
            let numeric = coarse?;
            if let (Some(fine), Some(tol)) = (fine, opts.freq_halving_tol) {
                let change = (fine? - numeric).abs();
                if change > tol {
                    return Err(OracleError::StepNotConverged {
                        dt: opts.dt,
                        change,
                        tolerance: tol,
                    }
                    .into());
                }
            }
            let analytic = transition_energy(&lab, &kerr, (n as u32, m as u32), (n as u32 + 1, m as u32));
            Ok(SpectralCheck {
                lower: (n, m),
                upper: (n + 1, m),
                analytic_freq: analytic,
                numeric_freq: numeric,
                deviation: numeric - analytic,
            })
        })
        .collect()
}
