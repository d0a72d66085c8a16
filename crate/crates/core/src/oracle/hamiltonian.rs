use ndarray::{s, Array2, ArrayView2, ArrayViewMut2};
use num_complex::Complex64;

use super::fock::FockState;
use crate::error::OracleError;
use crate::model::energy_level;
use crate::{ModelParams, System};

/// Right-hand side generator: writes H ψ into `out`.
///
/// Closures `Fn(f64, ArrayView2, ArrayViewMut2)` implement this too, which is
/// convenient for one-off test Hamiltonians.
pub trait Hamiltonian: Sync {
    fn apply(&self, t: f64, psi: ArrayView2<Complex64>, out: ArrayViewMut2<Complex64>);
}

impl<F> Hamiltonian for F
where
    F: Fn(f64, ArrayView2<Complex64>, ArrayViewMut2<Complex64>) + Sync,
{
    fn apply(&self, t: f64, psi: ArrayView2<Complex64>, out: ArrayViewMut2<Complex64>) {
        self(t, psi, out)
    }
}

/// E_{n,m} − i(κn + γm)/2 on the diagonal.
#[derive(Debug, Clone)]
pub struct DiagonalHamiltonian {
    diag: Array2<Complex64>,
}

impl DiagonalHamiltonian {
    pub fn new(sys: &System, n_max: usize, m_max: usize) -> Self {
        let p = &sys.params;
        let diag = Array2::from_shape_fn((n_max + 1, m_max + 1), |(n, m)| {
            Complex64::new(
                energy_level(p, &sys.kerr, n as u32, m as u32),
                -0.5 * (p.kappa * n as f64 + p.gamma * m as f64),
            )
        });
        Self { diag }
    }
}

impl Hamiltonian for DiagonalHamiltonian {
    fn apply(&self, _t: f64, psi: ArrayView2<Complex64>, mut out: ArrayViewMut2<Complex64>) {
        ndarray::Zip::from(&mut out)
            .and(&psi)
            .and(&self.diag)
            .for_each(|o, &p, &d| *o = d * p);
    }
}

/// Half-width of the phonon band coupled by x³.
pub const BANDWIDTH: usize = 3;

/// H = ω_c a†a + Ω b†b − a†a [g1 x + (g2/2) x² + (g3/6) x³], x = b + b†.
///
/// The phonon operator is the projection P V P of the untruncated polynomial,
/// so its matrix elements are exact up to the cutoff.
#[derive(Debug, Clone)]
pub struct FullHamiltonian {
    omega_c: f64,
    omega: f64,
    /// P V P; only |m − m'| ≤ 3 is nonzero.
    coupling: Array2<f64>,
    /// Row m of `coupling` restricted to the band: (first column, entries).
    band: Vec<(usize, Vec<f64>)>,
}

impl FullHamiltonian {
    pub fn new(p: &ModelParams, m_max: usize) -> Self {
        let big = m_max + 1 + BANDWIDTH;
        let mut x = Array2::<f64>::zeros((big, big));
        for m in 0..big - 1 {
            let s = ((m + 1) as f64).sqrt();
            x[[m, m + 1]] = s;
            x[[m + 1, m]] = s;
        }
        let x2 = x.dot(&x);
        let x3 = x2.dot(&x);
        let v = &x * p.g1 + &x2 * (0.5 * p.g2) + &x3 * (p.g3 / 6.0);
        let coupling = v.slice(s![..=m_max, ..=m_max]).to_owned();
        let band = (0..=m_max)
            .map(|m| {
                let lo = m.saturating_sub(BANDWIDTH);
                let hi = (m + BANDWIDTH).min(m_max);
                (lo, (lo..=hi).map(|mp| coupling[[m, mp]]).collect())
            })
            .collect();
        Self {
            omega_c: p.omega_c,
            omega: p.omega,
            coupling,
            band,
        }
    }

    pub fn m_max(&self) -> usize {
        self.coupling.nrows() - 1
    }

    /// <n, m|H|n, m'>.
    pub fn element(&self, n: usize, m: usize, m_prime: usize) -> f64 {
        let free = if m == m_prime {
            self.omega_c * n as f64 + self.omega * m as f64
        } else {
            0.0
        };
        free - n as f64 * self.coupling[[m, m_prime]]
    }
}

impl Hamiltonian for FullHamiltonian {
    fn apply(&self, _t: f64, psi: ArrayView2<Complex64>, mut out: ArrayViewMut2<Complex64>) {
        assert_eq!(psi.ncols(), self.band.len(), "state and Hamiltonian phonon cutoffs differ");
        for (n, (row_in, mut row_out)) in psi.outer_iter().zip(out.outer_iter_mut()).enumerate() {
            let nf = n as f64;
            let (Some(row_in), Some(row_out)) = (row_in.as_slice(), row_out.as_slice_mut()) else {
                unreachable!("rows of a standard-layout state are contiguous")
            };
            for (m, ((lo, entries), o)) in self.band.iter().zip(row_out.iter_mut()).enumerate() {
                let acc: Complex64 = entries.iter().zip(&row_in[*lo..]).map(|(c, v)| c * v).sum();
                *o = (self.omega_c * nf + self.omega * m as f64) * row_in[m] - nf * acc;
            }
        }
    }
}

/// H ψ for the full Hamiltonian.
///
/// Fails when any of the top [`BANDWIDTH`] phonon columns holds more than 1e−12
/// of the norm, since H would couple that weight out of the truncated space.
pub fn apply_full_hamiltonian(state: &FockState, p: &ModelParams) -> Result<FockState, OracleError> {
    let m_max = state.m_max();
    if m_max < BANDWIDTH {
        return Err(OracleError::TruncationTooSmall(format!(
            "m_max = {m_max} leaves no slack for the cubic coupling"
        )));
    }
    let total = state.norm_sqr();
    let edge: f64 = state
        .amps
        .slice(s![.., m_max + 1 - BANDWIDTH..])
        .iter()
        .map(|c| c.norm_sqr())
        .sum();
    if edge > 1e-12 * total {
        return Err(OracleError::TruncationTooSmall(format!(
            "{:e} of the norm within {BANDWIDTH} levels of m_max = {m_max}",
            edge / total
        )));
    }
    let h = FullHamiltonian::new(p, m_max);
    let mut out = FockState::zeros(state.n_max(), m_max);
    h.apply(0.0, state.amps.view(), out.amps.view_mut());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_state(rng: &mut ChaCha8Rng, n_max: usize, m_max: usize) -> Array2<Complex64> {
        Array2::from_shape_fn((n_max + 1, m_max + 1), |_| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    fn inner(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Complex64 {
        a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
    }

    #[test]
    fn hermitian() {
        let p = ModelParams::default();
        let h = FullHamiltonian::new(&p, 25);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let phi = random_state(&mut rng, 6, 25);
            let psi = random_state(&mut rng, 6, 25);
            let mut h_phi = Array2::zeros(phi.dim());
            let mut h_psi = Array2::zeros(psi.dim());
            h.apply(0.0, phi.view(), h_phi.view_mut());
            h.apply(0.0, psi.view(), h_psi.view_mut());
            let lhs = inner(&phi, &h_psi);
            let rhs = inner(&h_phi, &psi);
            assert!((lhs - rhs).norm() < 1e-12 * lhs.norm().max(1.0));
        }
    }

    #[test]
    fn matrix_elements() {
        let p = ModelParams::default();
        let h = FullHamiltonian::new(&p, 20);
        for m in 0..=20 {
            // <m|x²|m> = 2m + 1, <m|x|m> = <m|x³|m> = 0
            let want = p.omega_c * 2.0 + p.omega * m as f64 - 2.0 * p.g2 * (m as f64 + 0.5);
            assert!((h.element(2, m, m) - want).abs() < 1e-14);
        }
        // <1|x³|0> = 3, <3|x³|0> = √6, <1|x|0> = 1
        let want = -(p.g1 + p.g3 / 6.0 * 3.0);
        assert!((h.element(1, 1, 0) - want).abs() < 1e-15);
        assert!((h.element(1, 3, 0) + p.g3 / 6.0 * 6f64.sqrt()).abs() < 1e-15);
        assert_eq!(h.element(1, 4, 0), 0.0);
        assert_eq!(h.element(0, 3, 0), 0.0);
    }

    #[test]
    fn edge_weight_rejected() {
        let p = ModelParams::default();
        let ok = FockState::superposition(2, 10, &[(1, 7)]).unwrap();
        assert!(apply_full_hamiltonian(&ok, &p).is_ok());
        let bad = FockState::superposition(2, 10, &[(1, 8)]).unwrap();
        assert!(matches!(
            apply_full_hamiltonian(&bad, &p),
            Err(OracleError::TruncationTooSmall(_))
        ));
    }

    #[test]
    fn diagonal_generator() {
        let sys = System::new(ModelParams::default(), crate::InitialState::from_mean_photons(1.0, 0.0));
        let h = DiagonalHamiltonian::new(&sys, 3, 4);
        let psi = FockState::superposition(3, 4, &[(2, 3)]).unwrap();
        let mut out = Array2::zeros(psi.amps.dim());
        h.apply(0.0, psi.amps.view(), out.view_mut());
        let e = energy_level(&sys.params, &sys.kerr, 2, 3);
        let want = Complex64::new(e, -0.5 * (2.0 * sys.params.kappa + 3.0 * sys.params.gamma));
        assert!((out[[2, 3]] - want).norm() < 1e-15);
    }
}
