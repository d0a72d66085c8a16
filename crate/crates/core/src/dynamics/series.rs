//! Double sum over photon and phonon number, before the Poisson series is
//! resummed. Kept as an independent route to the closed form.

use num_complex::Complex64;

use crate::error::DynamicsError;
use crate::thermal::{ln_thermal_weight, thermal_tail};
use crate::System;

const TAIL_TOL: f64 = 1e-12;

/// (n_max, m_max) with Poisson and thermal tails below 1e−12.
pub fn default_series_truncation(sys: &System) -> (usize, usize) {
    let a2 = sys.state.mean_photons();
    let mbar = sys.state.mbar;
    let n_max = (a2 + 10.0 * a2.sqrt() + 10.0).ceil() as usize;
    let m_max = (28.0 * (mbar + 1.0)).ceil() as usize;
    (n_max, m_max)
}

/// Σ_{n > n_max} e^{−a2} a2^n / n!, summed upward from n_max + 1.
fn poisson_tail(a2: f64, n_max: usize) -> f64 {
    if a2 == 0.0 {
        return 0.0;
    }
    let ln_fact: f64 = (1..=n_max + 1).map(|k| (k as f64).ln()).sum();
    let mut ln_p = -a2 + (n_max + 1) as f64 * a2.ln() - ln_fact;
    let mut tail = 0.0;
    let mut n = n_max + 1;
    loop {
        let p = ln_p.exp();
        tail += p;
        // Past the mode, terms fall geometrically with ratio a2/(n+1).
        if n as f64 > a2 && (p == 0.0 || p < 1e-18 * tail) {
            break;
        }
        n += 1;
        ln_p += a2.ln() - (n as f64).ln();
    }
    tail
}

/// Mean amplitude as the explicit (n, m) double sum
///
/// ```text
/// (α/N) Σ_{n,m} |p_m|² e^{−|α|²} |α|^{2n}/n! e^{−iΔt}
///       exp{i t [g2(m + ½) + (Λ1 + Λ2 m + Λ3 m²)(2n + 1)]} e^{−[κ(n + ½) + γm] t}
/// ```
///
/// Fails if either truncation leaves more than 1e−12 of probability behind.
pub fn amplitude_series(
    sys: &System,
    t: f64,
    n_max: usize,
    m_max: usize,
) -> Result<Complex64, DynamicsError> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(DynamicsError::InvalidArgument(format!(
            "time must be finite and nonnegative, got {t}"
        )));
    }
    let p = &sys.params;
    let k = &sys.kerr;
    let a2 = sys.state.mean_photons();
    let mbar = sys.state.mbar;
    if poisson_tail(a2, n_max) >= TAIL_TOL || thermal_tail(m_max, mbar) >= TAIL_TOL {
        return Err(DynamicsError::TruncationNotConverged {
            tau: t,
            m_reached: m_max,
        });
    }

    // e^{−|α|²}/N(t) = B(t) exp(−|α|² e^{−κt})
    let bracket = 1.0 + mbar * (1.0 - (-p.gamma * t).exp());
    let ln_norm = -a2 * (-p.kappa * t).exp();
    let ln_a2 = if a2 > 0.0 { a2.ln() } else { f64::NEG_INFINITY };

    let mut total = Complex64::new(0.0, 0.0);
    for m in 0..=m_max {
        let ln_w = ln_thermal_weight(m, mbar);
        if ln_w == f64::NEG_INFINITY {
            continue;
        }
        let mf = m as f64;
        let kerr_m = k.lambda1 + k.lambda2 * mf + k.lambda3 * mf * mf;
        let mut ln_fact = 0.0;
        for n in 0..=n_max {
            let nf = n as f64;
            if n > 0 {
                ln_fact += nf.ln();
            }
            let ln_poisson = if n == 0 { 0.0 } else { nf * ln_a2 - ln_fact };
            if ln_poisson == f64::NEG_INFINITY {
                break;
            }
            let magnitude = ln_w + ln_poisson + ln_norm - (p.kappa * (nf + 0.5) + p.gamma * mf) * t;
            let phase = (-p.delta + p.g2 * (mf + 0.5) + kerr_m * (2.0 * nf + 1.0)) * t;
            total += Complex64::new(magnitude, phase).exp();
        }
    }
    Ok(sys.state.alpha * bracket * total)
}
