//! Closed-form dissipative dynamics of the mean optical amplitude.
//!
//! With the optical mode in a coherent state |α> and the mechanical mode in a
//! thermal state, evolution under the diagonal non-Hermitian Hamiltonian
//! `H_eff − iκ a†a/2 − iγ b†b/2` keeps every Fock amplitude on its own
//! exponential. Renormalizing the state and summing the Poisson series over
//! photon number leaves a single thermal sum over phonon number m:
//!
//! ```text
//! <a>(t) = α B(t) e^{−κt/2 − i(Δ − g2/2)t}
//!          Σ_m |p_m|² exp(−mγt + iφ_m t + |α|² e^{−κt}(e^{iθ_m t} − 1))
//!
//! φ_m = Λ1 + (g2 + Λ2) m + Λ3 m²,   θ_m = 2(Λ1 + Λ2 m + Λ3 m²),
//! B(t) = 1 + m̄(1 − e^{−γt}).
//! ```
//!
//! The factor e^{−|α|²}/N(t) of the normalization has been folded into the
//! exponent so every summand is bounded by |p_m|² e^{−mγt}.

mod approx;
mod series;
mod times;

pub use approx::{amplitude_approx, approx_trace};
pub use series::{amplitude_series, default_series_truncation};
pub use times::{collapse_lhs, collapse_time, revival_period, revival_times, CollapseTime};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::DynamicsError;
use crate::thermal::{ln_thermal_weight, thermal_tail};
use crate::System;

/// Truncation rules for the thermal sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    /// Stop once the neglected thermal weight is below this.
    pub weight_tail_tol: f64,
    /// ...and the last summand is smaller than this.
    pub term_tol: f64,
    /// Hard cap on the phonon index; `None` means max(200, 50 (m̄ + 1)).
    pub m_max_cap: Option<usize>,
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self {
            weight_tail_tol: 1e-12,
            term_tol: 1e-14,
            m_max_cap: None,
        }
    }
}

impl SeriesControl {
    pub fn cap_for(&self, mbar: f64) -> usize {
        self.m_max_cap
            .unwrap_or_else(|| 200usize.max((50.0 * (mbar + 1.0)).ceil() as usize))
    }
}

/// A truncated sum together with the number of phonon terms it used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSum {
    pub value: Complex64,
    pub m_terms: usize,
}

/// Uniform time grid τ_j = j d_tau, j = 0..=floor(tau_max / d_tau).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub tau_max: f64,
    pub d_tau: f64,
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            tau_max: 1500.0,
            d_tau: 0.1,
        }
    }
}

impl Grid {
    pub fn new(tau_max: f64, d_tau: f64) -> Self {
        Self { tau_max, d_tau }
    }

    pub fn len(&self) -> usize {
        (self.tau_max / self.d_tau + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn tau(&self, j: usize) -> f64 {
        j as f64 * self.d_tau
    }

    pub fn taus(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.tau(j)).collect()
    }

    fn check(&self) -> Result<(), DynamicsError> {
        if !(self.d_tau > 0.0 && self.d_tau.is_finite()) {
            return Err(DynamicsError::InvalidArgument(format!(
                "d_tau must be positive, got {}",
                self.d_tau
            )));
        }
        if !(self.tau_max >= 0.0 && self.tau_max.is_finite()) {
            return Err(DynamicsError::InvalidArgument(format!(
                "tau_max must be nonnegative, got {}",
                self.tau_max
            )));
        }
        Ok(())
    }
}

/// Mean amplitude and its time derivative sampled on a grid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AmplitudeTrace {
    pub tau: Vec<f64>,
    pub value: Vec<Complex64>,
    pub derivative: Vec<Complex64>,
}

impl AmplitudeTrace {
    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }

    /// Grid spacing if the samples are uniform to within 1e-9 relative.
    pub fn uniform_step(&self) -> Option<f64> {
        if self.tau.len() < 2 {
            return None;
        }
        let step = (self.tau[self.tau.len() - 1] - self.tau[0]) / (self.tau.len() - 1) as f64;
        let uniform = self
            .tau
            .windows(2)
            .all(|w| ((w[1] - w[0]) - step).abs() <= 1e-9 * step.abs().max(1.0));
        (uniform && step > 0.0).then_some(step)
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.value.iter().map(|v| v.norm()).collect()
    }
}

fn check_time(t: f64) -> Result<(), DynamicsError> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(DynamicsError::InvalidArgument(format!(
            "time must be finite and nonnegative, got {t}"
        )))
    }
}

/// Norm N(t) = e^{−|α|²} exp(|α|² e^{−κt}) / (1 + m̄(1 − e^{−γt})) of the
/// unnormalized evolved state.
pub fn normalization(sys: &System, t: f64) -> f64 {
    let p = &sys.params;
    let a2 = sys.state.mean_photons();
    (a2 * (-p.kappa * t).exp_m1()).exp() / thermal_bracket(sys, t)
}

/// B(t) = 1 + m̄(1 − e^{−γt}).
fn thermal_bracket(sys: &System, t: f64) -> f64 {
    1.0 - sys.state.mbar * (-sys.params.gamma * t).exp_m1()
}

struct ThermalSum {
    sum: Complex64,
    sum_dt: Complex64,
    m_terms: usize,
}

/// Σ_m |p_m|² e^{f_m(t)} and optionally Σ_m |p_m|² f_m'(t) e^{f_m(t)}.
fn thermal_sum(
    sys: &System,
    t: f64,
    control: &SeriesControl,
    with_derivative: bool,
) -> Result<ThermalSum, DynamicsError> {
    let p = &sys.params;
    let k = &sys.kerr;
    let mbar = sys.state.mbar;
    let a2 = sys.state.mean_photons();
    let x = (-p.kappa * t).exp();
    let cap = control.cap_for(mbar);

    let mut sum = Complex64::new(0.0, 0.0);
    let mut sum_dt = Complex64::new(0.0, 0.0);
    for m in 0..=cap {
        let mf = m as f64;
        let ln_w = ln_thermal_weight(m, mbar);
        let phi = k.lambda1 + (p.g2 + k.lambda2) * mf + k.lambda3 * mf * mf;
        let theta = 2.0 * k.kerr_at(mf);
        let rot = Complex64::from_polar(1.0, theta * t);
        let exponent = Complex64::new(ln_w - mf * p.gamma * t, phi * t) + a2 * x * (rot - 1.0);
        let term = if ln_w == f64::NEG_INFINITY {
            Complex64::new(0.0, 0.0)
        } else {
            exponent.exp()
        };
        sum += term;
        if with_derivative {
            let d_exponent = Complex64::new(-mf * p.gamma, phi)
                + a2 * x * (Complex64::new(-p.kappa, theta) * rot + p.kappa);
            sum_dt += d_exponent * term;
        }
        if thermal_tail(m, mbar) <= control.weight_tail_tol && term.norm() < control.term_tol {
            return Ok(ThermalSum {
                sum,
                sum_dt,
                m_terms: m + 1,
            });
        }
    }
    Err(DynamicsError::TruncationNotConverged {
        tau: t,
        m_reached: cap,
    })
}

/// The prefactor α e^{−κt/2 − i(Δ − g2/2)t} and its logarithmic derivative.
fn carrier(sys: &System, t: f64) -> (Complex64, Complex64) {
    let p = &sys.params;
    let rate = Complex64::new(-0.5 * p.kappa, -(p.delta - 0.5 * p.g2));
    (sys.state.alpha * (rate * t).exp(), rate)
}

/// Closed-form mean amplitude <a>(t) with the thermal sum truncated per
/// `control`.
pub fn amplitude_exact(
    sys: &System,
    t: f64,
    control: &SeriesControl,
) -> Result<SeriesSum, DynamicsError> {
    check_time(t)?;
    let s = thermal_sum(sys, t, control, false)?;
    let (c, _) = carrier(sys, t);
    Ok(SeriesSum {
        value: c * thermal_bracket(sys, t) * s.sum,
        m_terms: s.m_terms,
    })
}

/// Term-by-term analytic d<a>/dt of [`amplitude_exact`].
pub fn amplitude_derivative(
    sys: &System,
    t: f64,
    control: &SeriesControl,
) -> Result<SeriesSum, DynamicsError> {
    amplitude_with_derivative(sys, t, control).map(|(_, d)| d)
}

/// <a>(t) and d<a>/dt from a single pass over the thermal sum.
pub fn amplitude_with_derivative(
    sys: &System,
    t: f64,
    control: &SeriesControl,
) -> Result<(SeriesSum, SeriesSum), DynamicsError> {
    check_time(t)?;
    let s = thermal_sum(sys, t, control, true)?;
    let (c, rate) = carrier(sys, t);
    let b = thermal_bracket(sys, t);
    let db = sys.state.mbar * sys.params.gamma * (-sys.params.gamma * t).exp();
    let value = c * b * s.sum;
    let derivative = c * ((rate * b + db) * s.sum + b * s.sum_dt);
    Ok((
        SeriesSum {
            value,
            m_terms: s.m_terms,
        },
        SeriesSum {
            value: derivative,
            m_terms: s.m_terms,
        },
    ))
}

/// Evaluate [`amplitude_exact`] and [`amplitude_derivative`] on a uniform grid.
///
/// Grid points are independent and computed in parallel; each point's value
/// does not depend on the partition.
pub fn trace(
    sys: &System,
    grid: &Grid,
    control: &SeriesControl,
) -> Result<AmplitudeTrace, DynamicsError> {
    grid.check()?;
    let points: Vec<(Complex64, Complex64)> = (0..grid.len())
        .into_par_iter()
        .map(|j| {
            amplitude_with_derivative(sys, grid.tau(j), control).map(|(v, d)| (v.value, d.value))
        })
        .collect::<Result<_, _>>()?;
    let (value, derivative) = points.into_iter().unzip();
    Ok(AmplitudeTrace {
        tau: grid.taus(),
        value,
        derivative,
    })
}
