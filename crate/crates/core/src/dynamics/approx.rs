use num_complex::Complex64;
use rayon::prelude::*;

use super::{normalization, Grid};
use crate::System;

/// Long-time approximation of the mean amplitude.
///
/// The exponential `exp(|α|² e^{−κt} e^{iθ_m t})` under the thermal sum is
/// replaced by its first two Taylor terms and Λ3 is dropped, after which the
/// sum over m is geometric:
///
/// ```text
/// <a> ≈ (α/N) exp(−|α|² + (γ − κ/2)t − i(Δ − g2/2 − Λ1)t)
///       × [ 1 / (e^{γt}(1 + m̄) − e^{i(g2 + Λ2)t} m̄)
///         + |α|² e^{−κt + 2iΛ1 t} / (e^{γt}(1 + m̄) − e^{i(g2 + 3Λ2)t} m̄) ]
/// ```
///
/// Only meaningful once |α|² e^{−κt} ≪ 1.
pub fn amplitude_approx(sys: &System, t: f64) -> Complex64 {
    let p = &sys.params;
    let k = &sys.kerr;
    let mbar = sys.state.mbar;
    let a2 = sys.state.mean_photons();
    let x = (-p.kappa * t).exp();

    // e^{γt} is divided into both denominators to keep them O(1).
    let decay = (-p.gamma * t).exp();
    let denominator = |freq: f64| (1.0 + mbar) - mbar * decay * Complex64::from_polar(1.0, freq * t);
    let bracket = 1.0 / denominator(p.g2 + k.lambda2)
        + a2 * x * Complex64::from_polar(1.0, 2.0 * k.lambda1 * t) / denominator(p.g2 + 3.0 * k.lambda2);

    // (α/N) e^{−|α|²} written without forming e^{−|α|²} on its own.
    let scale = (-a2 * x).exp() * (1.0 - mbar * (-p.gamma * t).exp_m1());
    debug_assert!((scale - (-a2).exp() / normalization(sys, t)).abs() <= 1e-12 * scale.max(1.0));
    let carrier = Complex64::new(-0.5 * p.kappa, -(p.delta - 0.5 * p.g2 - k.lambda1)) * t;
    sys.state.alpha * scale * carrier.exp() * bracket
}

/// [`amplitude_approx`] on every grid point.
pub fn approx_trace(sys: &System, grid: &Grid) -> Vec<Complex64> {
    (0..grid.len())
        .into_par_iter()
        .map(|j| amplitude_approx(sys, grid.tau(j)))
        .collect()
}
