use ndarray::{Array2, ArrayView2};
use num_complex::Complex64;

use crate::error::OracleError;
use crate::model::energy_level;
use crate::thermal::{ln_thermal_weight, thermal_tail, InitialState};
use crate::System;

/// Largest admissible Poisson or thermal tail left outside the truncation.
pub const TAIL_TOL: f64 = 1e-12;

/// Two-mode amplitudes c[n][m], n ≤ n_max photons, m ≤ m_max phonons.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    pub amps: Array2<Complex64>,
}

impl FockState {
    pub fn zeros(n_max: usize, m_max: usize) -> Self {
        Self {
            amps: Array2::zeros((n_max + 1, m_max + 1)),
        }
    }

    /// Equal-weight superposition of the listed basis states.
    pub fn superposition(n_max: usize, m_max: usize, levels: &[(usize, usize)]) -> Result<Self, OracleError> {
        let mut s = Self::zeros(n_max, m_max);
        let c = Complex64::new(1.0 / (levels.len() as f64).sqrt(), 0.0);
        for &(n, m) in levels {
            if n > n_max || m > m_max {
                return Err(OracleError::TruncationTooSmall(format!(
                    "level ({n}, {m}) outside ({n_max}, {m_max})"
                )));
            }
            s.amps[[n, m]] += c;
        }
        Ok(s)
    }

    pub fn n_max(&self) -> usize {
        self.amps.nrows() - 1
    }

    pub fn m_max(&self) -> usize {
        self.amps.ncols() - 1
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum()
    }

    /// <ψ|a|ψ>/<ψ|ψ>.
    pub fn mean_amplitude(&self) -> Complex64 {
        mean_amplitude(self.amps.view())
    }

    /// Larger of the norm fractions in the top photon row and top phonon column.
    pub fn edge_population(&self) -> f64 {
        edge_population(self.amps.view())
    }
}

pub(crate) fn mean_amplitude(amps: ArrayView2<Complex64>) -> Complex64 {
    let norm: f64 = amps.iter().map(|c| c.norm_sqr()).sum();
    lowering_element(amps, amps) / norm
}

/// <φ|a|ψ> = Σ √(n+1) φ*[n][m] ψ[n+1][m].
pub(crate) fn lowering_element(phi: ArrayView2<Complex64>, psi: ArrayView2<Complex64>) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for n in 0..phi.nrows() - 1 {
        let s = ((n + 1) as f64).sqrt();
        let row = phi.row(n);
        let next = psi.row(n + 1);
        let partial: Complex64 = row.iter().zip(next.iter()).map(|(a, b)| a.conj() * b).sum();
        acc += s * partial;
    }
    acc
}

/// A mode truncated to a single level has no edge and is skipped.
pub(crate) fn edge_population(amps: ArrayView2<Complex64>) -> f64 {
    let total: f64 = amps.iter().map(|c| c.norm_sqr()).sum();
    let (rows, cols) = amps.dim();
    let weight = |it: ndarray::ArrayView1<Complex64>| it.iter().map(|c| c.norm_sqr()).sum::<f64>();
    let top_row = if rows > 1 { weight(amps.row(rows - 1)) } else { 0.0 };
    let top_col = if cols > 1 { weight(amps.column(cols - 1)) } else { 0.0 };
    top_row.max(top_col) / total
}

/// N_max = ceil(|α|² + 10|α| + 10), M_max = ceil(28(m̄ + 1)) + 6. The six
/// extra phonon levels give room for the bandwidth-3 cubic coupling.
pub fn default_truncation(state: &InitialState) -> (usize, usize) {
    let a2 = state.mean_photons();
    let n_max = (a2 + 10.0 * a2.sqrt() + 10.0).ceil() as usize;
    let m_max = (28.0 * (state.mbar + 1.0)).ceil() as usize + 6;
    (n_max, m_max)
}

fn ln_factorials(n_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for n in 1..=n_max {
        acc += (n as f64).ln();
        out.push(acc);
    }
    out
}

/// |α> ⊗ Σ_m p_m |m> with p_m = sqrt(|p_m|²) taken real and nonnegative.
pub fn build_initial_state(state: &InitialState, n_max: usize, m_max: usize) -> Result<FockState, OracleError> {
    let a2 = state.mean_photons();
    let ln_fact = ln_factorials(n_max);
    let ln_poisson = |n: usize| {
        if n == 0 {
            -a2
        } else {
            -a2 + n as f64 * a2.ln() - ln_fact[n]
        }
    };
    let kept: f64 = (0..=n_max).map(|n| ln_poisson(n).exp()).sum();
    let photon_tail = (1.0 - kept).max(0.0);
    let phonon_tail = thermal_tail(m_max, state.mbar);
    if photon_tail >= TAIL_TOL || phonon_tail >= TAIL_TOL {
        return Err(OracleError::TruncationTooSmall(format!(
            "tails outside ({n_max}, {m_max}): photons {photon_tail:e}, phonons {phonon_tail:e}"
        )));
    }

    let phase = state.alpha.arg();
    let mut s = FockState::zeros(n_max, m_max);
    for n in 0..=n_max {
        let ln_photon = if a2 == 0.0 {
            if n == 0 {
                0.0
            } else {
                f64::NEG_INFINITY
            }
        } else {
            0.5 * ln_poisson(n)
        };
        let photon = Complex64::from_polar(ln_photon.exp(), n as f64 * phase);
        for m in 0..=m_max {
            let phonon = (0.5 * ln_thermal_weight(m, state.mbar)).exp();
            s.amps[[n, m]] = photon * phonon;
        }
    }
    Ok(s)
}

/// Exact evolution under the diagonal non-Hermitian Hamiltonian:
/// c[n][m](t) = c[n][m](0) exp(−i E_{n,m} t − (κn + γm) t / 2).
pub fn evolve_diagonal(state: &FockState, sys: &System, t: f64) -> FockState {
    let p = &sys.params;
    let mut out = state.clone();
    for ((n, m), c) in out.amps.indexed_iter_mut() {
        let e = energy_level(p, &sys.kerr, n as u32, m as u32);
        let decay = -0.5 * (p.kappa * n as f64 + p.gamma * m as f64) * t;
        *c *= Complex64::new(decay, -e * t).exp();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{amplitude_exact, normalization, SeriesControl};
    use crate::ModelParams;

    fn fig2a(mbar: f64) -> System {
        System::new(ModelParams::default(), InitialState::from_mean_photons(5.0, mbar))
    }

    #[test]
    fn vacuum() {
        let s = build_initial_state(&InitialState::from_mean_photons(0.0, 0.0), 3, 3).unwrap();
        assert_eq!(s.amps[[0, 0]], Complex64::new(1.0, 0.0));
        assert_eq!(s.norm_sqr(), 1.0);
    }

    #[test]
    fn coherent_norm() {
        let s = build_initial_state(&InitialState::from_mean_photons(5.0, 0.0), 40, 0).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        assert!((s.mean_amplitude() - Complex64::new(5f64.sqrt(), 0.0)).norm() < 1e-12);
    }

    #[test]
    fn complex_alpha_is_reproduced() {
        let st = InitialState::new(Complex64::new(-1.0, 1.5), 0.7);
        let (n, m) = default_truncation(&st);
        let s = build_initial_state(&st, n, m).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        assert!((s.mean_amplitude() - st.alpha).norm() < 1e-12);
    }

    #[test]
    fn thermal_column_ratios() {
        let s = build_initial_state(&InitialState::from_mean_photons(2.0, 1.0), 30, 40).unwrap();
        let c00 = s.amps[[0, 0]].norm_sqr();
        for m in 1..5 {
            let ratio = s.amps[[0, m]].norm_sqr() / s.amps[[0, m - 1]].norm_sqr();
            assert!((ratio - 0.5).abs() < 1e-12);
        }
        let col: f64 = (0..=40).map(|m| s.amps[[0, m]].norm_sqr()).sum();
        assert!((col / c00 - 2.0).abs() < 1e-10);
    }

    #[test]
    fn too_small_truncation() {
        let st = InitialState::from_mean_photons(5.0, 2.0);
        assert!(matches!(
            build_initial_state(&st, 12, 100),
            Err(OracleError::TruncationTooSmall(_))
        ));
        assert!(build_initial_state(&st, 40, 20).is_err());
    }

    #[test]
    fn diagonal_identity_and_unitarity() {
        let sys = System::new(
            ModelParams {
                kappa: 0.0,
                gamma: 0.0,
                ..ModelParams::default()
            },
            InitialState::from_mean_photons(5.0, 1.0),
        );
        let (n, m) = default_truncation(&sys.state);
        let s = build_initial_state(&sys.state, n, m).unwrap();
        assert_eq!(evolve_diagonal(&s, &sys, 0.0), s);
        let later = evolve_diagonal(&s, &sys, 777.0);
        assert!((later.norm_sqr() - s.norm_sqr()).abs() < 1e-12);
    }

    #[test]
    fn diagonal_matches_closed_form() {
        let sys = fig2a(1.0);
        let (n, m) = default_truncation(&sys.state);
        let s = build_initial_state(&sys.state, n, m).unwrap();
        for t in [10.0, 100.0, 389.0, 1000.0] {
            let evolved = evolve_diagonal(&s, &sys, t);
            let exact = amplitude_exact(&sys, t, &SeriesControl::default()).unwrap().value;
            assert!((evolved.mean_amplitude() - exact).norm() < 1e-10, "t = {t}");
            assert!((evolved.norm_sqr() - normalization(&sys, t)).abs() < 1e-12);
        }
    }

    #[test]
    fn superposition_state() {
        let s = FockState::superposition(3, 20, &[(0, 1), (1, 1)]).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
        assert!((s.mean_amplitude() - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        assert!(FockState::superposition(3, 20, &[(4, 0)]).is_err());
    }
}
