//! Initial state: optical coherent state times a thermal mechanical mode.

use num_complex::Complex64;

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;

/// Coherent amplitude α of the optical mode and mean thermal phonon number m̄.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialState {
    pub alpha: Complex64,
    pub mbar: f64,
}

impl InitialState {
    pub fn new(alpha: Complex64, mbar: f64) -> Self {
        Self { alpha, mbar }
    }

    /// Real α = sqrt(`mean_photons`).
    pub fn from_mean_photons(mean_photons: f64, mbar: f64) -> Self {
        Self::new(Complex64::new(mean_photons.sqrt(), 0.0), mbar)
    }

    /// |α|².
    pub fn mean_photons(&self) -> f64 {
        self.alpha.norm_sqr()
    }
}

/// Bose occupation `1/(exp(ħΩ/k_B T) − 1)` of a mode at angular frequency
/// `omega_phys` (rad/s) and `temperature` (K). Zero at T = 0.
pub fn thermal_occupation(omega_phys: f64, temperature: f64) -> f64 {
    if temperature <= 0.0 {
        return 0.0;
    }
    1.0 / (HBAR * omega_phys / (K_B * temperature)).exp_m1()
}

/// Same as [`thermal_occupation`] with the ratio x = ħΩ/k_B T given directly.
pub fn bose_occupation(x: f64) -> f64 {
    if x.is_infinite() {
        return 0.0;
    }
    1.0 / x.exp_m1()
}

/// ln |p_m|² = m ln(m̄/(m̄+1)) − ln(m̄+1). `-inf` for m > 0 at m̄ = 0.
pub fn ln_thermal_weight(m: usize, mbar: f64) -> f64 {
    if mbar == 0.0 {
        return if m == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    -(m as f64) * (1.0 / mbar).ln_1p() - mbar.ln_1p()
}

/// Geometric thermal weight |p_m|² = m̄^m/(m̄+1)^{m+1}, evaluated in log space.
pub fn thermal_weight(m: usize, mbar: f64) -> f64 {
    ln_thermal_weight(m, mbar).exp()
}

/// Σ_{m > m_max} |p_m|² = (m̄/(m̄+1))^{m_max+1}.
pub fn thermal_tail(m_max: usize, mbar: f64) -> f64 {
    if mbar == 0.0 {
        return 0.0;
    }
    (-((m_max + 1) as f64) * (1.0 / mbar).ln_1p()).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Neumaier-compensated sum.
    fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
        let (mut sum, mut c) = (0.0f64, 0.0f64);
        for v in values {
            let t = sum + v;
            if sum.abs() >= v.abs() {
                c += (sum - t) + v;
            } else {
                c += (v - t) + sum;
            }
            sum = t;
        }
        sum + c
    }

    #[test]
    fn bose_function() {
        assert!((bose_occupation(1.0) - 0.581_976_706_869_326_4).abs() < 1e-15);
        let omega = 2.0 * std::f64::consts::PI * 1e6;
        let t = HBAR * omega / K_B;
        assert!((thermal_occupation(omega, t) - 0.581_976_706_869_326_4).abs() < 1e-12);
        assert_eq!(thermal_occupation(omega, 0.0), 0.0);
        // Very cold: exponent overflows to an exact zero.
        assert_eq!(thermal_occupation(omega, 1e-12), 0.0);
    }

    #[test]
    fn classical_limit() {
        for x in [1e-3, 5e-3, 9.9e-3] {
            let rel = (bose_occupation(x) - 1.0 / x).abs() / bose_occupation(x);
            assert!(rel < 0.01, "x = {x}: rel = {rel}");
        }
    }

    #[test]
    fn weight_examples() {
        assert_eq!(thermal_weight(0, 0.0), 1.0);
        assert_eq!(thermal_weight(3, 0.0), 0.0);
        assert!((thermal_weight(1, 1.0) - 0.25).abs() < 1e-16);
        // Far tail: the log weight stays exact where the weight underflows.
        let ln_w = ln_thermal_weight(100_000, 10.0);
        assert!((ln_w - (-100_000.0 * 1.1f64.ln() - 11f64.ln())).abs() < 1e-8);
        assert_eq!(thermal_weight(100_000, 10.0), 0.0);
    }

    #[test]
    fn tail_closed_form() {
        let mbar = 3.0;
        let partial = compensated_sum((0..=40).map(|m| thermal_weight(m, mbar)));
        assert!((1.0 - partial - thermal_tail(40, mbar)).abs() < 1e-14);
    }

    #[test]
    fn normalization_within_28_mbar_plus_one() {
        for mbar in [0.0f64, 0.01, 0.5, 1.0, 2.0, 7.5, 25.0, 60.0, 100.0] {
            let m_max = (28.0 * (mbar + 1.0)).ceil() as usize;
            let partial = compensated_sum((0..=m_max).map(|m| thermal_weight(m, mbar)));
            assert!(partial >= 1.0 - 1e-12, "mbar = {mbar}: {partial}");
            assert!(partial <= 1.0 + 1e-14);
        }
    }

    proptest! {
        #[test]
        fn weights_sum_to_one(mbar in 0.0f64..100.0) {
            let m_max = (28.0 * (mbar + 1.0)).ceil() as usize;
            let partial = compensated_sum((0..=m_max).map(|m| thermal_weight(m, mbar)));
            prop_assert!((partial + thermal_tail(m_max, mbar) - 1.0).abs() < 1e-12);
        }
    }
}
