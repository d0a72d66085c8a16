use ndarray::Array2;
use num_complex::Complex64;

use super::fock::{edge_population, lowering_element, FockState};
use super::hamiltonian::Hamiltonian;
use crate::dynamics::AmplitudeTrace;
use crate::error::OracleError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rk4Options {
    /// When set, the run is repeated at dt/2 and the largest amplitude change
    /// in the final state must stay below this.
    pub halving_tol: Option<f64>,
    /// Largest norm fraction allowed in the top photon row or phonon column.
    pub edge_tol: f64,
    /// Record <a> every this many steps (the final state is always recorded).
    pub record_every: usize,
}

impl Default for Rk4Options {
    fn default() -> Self {
        Self {
            halving_tol: Some(1e-9),
            edge_tol: 1e-12,
            record_every: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionResult {
    /// Normalized <a> and d<a>/dt at the recorded times.
    pub trace: AmplitudeTrace,
    /// <ψ|ψ> at the recorded times.
    pub norm: Vec<f64>,
    pub final_state: FockState,
    /// Final-state change under step halving, if it was checked.
    pub halving_change: Option<f64>,
}

struct Workspace {
    k: [Array2<Complex64>; 4],
    stage: Array2<Complex64>,
}

impl Workspace {
    fn new(dim: (usize, usize)) -> Self {
        Self {
            k: std::array::from_fn(|_| Array2::zeros(dim)),
            stage: Array2::zeros(dim),
        }
    }
}

const MINUS_I: Complex64 = Complex64 { re: 0.0, im: -1.0 };

/// ψ ← ψ + dt (k1 + 2k2 + 2k3 + k4)/6 for dψ/dt = −i H ψ. The k buffers hold
/// H ψ at each stage; the factor −i is applied when they are combined.
fn step<H: Hamiltonian + ?Sized>(h: &H, t: f64, dt: f64, psi: &mut Array2<Complex64>, ws: &mut Workspace) {
    let Workspace { k, stage } = ws;
    let [k1, k2, k3, k4] = k;
    let half = MINUS_I * (0.5 * dt);
    let full = MINUS_I * dt;
    let combine = |stage: &mut Array2<Complex64>, psi: &Array2<Complex64>, k: &Array2<Complex64>, c: Complex64| {
        for ((s, p), k) in flat_mut(stage).iter_mut().zip(flat(psi)).zip(flat(k)) {
            *s = p + c * k;
        }
    };

    h.apply(t, psi.view(), k1.view_mut());
    combine(stage, psi, k1, half);
    h.apply(t + 0.5 * dt, stage.view(), k2.view_mut());
    combine(stage, psi, k2, half);
    h.apply(t + 0.5 * dt, stage.view(), k3.view_mut());
    combine(stage, psi, k3, full);
    h.apply(t + dt, stage.view(), k4.view_mut());
    let w = full / 6.0;
    for ((((p, a), b), c), d) in flat_mut(psi).iter_mut().zip(flat(k1)).zip(flat(k2)).zip(flat(k3)).zip(flat(k4)) {
        *p += w * (a + 2.0 * (b + c) + d);
    }
}

fn flat(a: &Array2<Complex64>) -> &[Complex64] {
    a.as_slice().expect("RK4 buffers are standard layout")
}

fn flat_mut(a: &mut Array2<Complex64>) -> &mut [Complex64] {
    a.as_slice_mut().expect("RK4 buffers are standard layout")
}

struct Sample {
    value: Complex64,
    derivative: Complex64,
    norm: f64,
}

fn sample<H: Hamiltonian + ?Sized>(h: &H, t: f64, psi: &Array2<Complex64>, scratch: &mut Array2<Complex64>) -> Sample {
    h.apply(t, psi.view(), scratch.view_mut());
    scratch.mapv_inplace(|v| MINUS_I * v);
    let norm: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
    let num = lowering_element(psi.view(), psi.view());
    let d_num = lowering_element(scratch.view(), psi.view()) + lowering_element(psi.view(), scratch.view());
    let d_norm: f64 = 2.0 * psi.iter().zip(scratch.iter()).map(|(p, d)| (p.conj() * d).re).sum::<f64>();
    Sample {
        value: num / norm,
        derivative: d_num / norm - num * d_norm / (norm * norm),
        norm,
    }
}

fn step_count(t_final: f64, dt: f64) -> Result<usize, OracleError> {
    if !(dt > 0.0 && dt.is_finite() && t_final >= 0.0 && t_final.is_finite()) {
        return Err(OracleError::InvalidArgument(format!(
            "need dt > 0 and t_final >= 0, got dt = {dt}, t_final = {t_final}"
        )));
    }
    let steps = (t_final / dt).round();
    if (steps * dt - t_final).abs() > 1e-9 * t_final.max(1.0) {
        return Err(OracleError::InvalidArgument(format!(
            "t_final = {t_final} is not a multiple of dt = {dt}"
        )));
    }
    Ok(steps as usize)
}

fn integrate<H: Hamiltonian + ?Sized>(
    h: &H,
    initial: &FockState,
    dt: f64,
    steps: usize,
    record_every: Option<usize>,
    edge_tol: f64,
) -> Result<(Array2<Complex64>, AmplitudeTrace, Vec<f64>), OracleError> {
    let mut psi = initial.amps.clone();
    let mut ws = Workspace::new(psi.dim());
    let mut scratch = Array2::zeros(psi.dim());
    let mut trace = AmplitudeTrace::default();
    let mut norms = Vec::new();

    let check_edge = |psi: &Array2<Complex64>, t: f64| {
        let edge = edge_population(psi.view());
        if edge > edge_tol {
            Err(OracleError::TruncationTooSmall(format!(
                "edge population {edge:e} at t = {t} exceeds {edge_tol:e}"
            )))
        } else {
            Ok(())
        }
    };

    for j in 0..=steps {
        let t = j as f64 * dt;
        let due = match record_every {
            Some(every) => j % every == 0 || j == steps,
            None => j == steps,
        };
        if due {
            check_edge(&psi, t)?;
            if record_every.is_some() {
                let s = sample(h, t, &psi, &mut scratch);
                trace.tau.push(t);
                trace.value.push(s.value);
                trace.derivative.push(s.derivative);
                norms.push(s.norm);
            }
        }
        if j < steps {
            step(h, t, dt, &mut psi, &mut ws);
        }
    }
    Ok((psi, trace, norms))
}

/// Integrate dψ/dt = −i H ψ from t = 0 to `t_final` with classical RK4.
///
/// `t_final` must be an integer multiple of `dt`. With
/// [`Rk4Options::halving_tol`] set, a second run at dt/2 must agree with the
/// first to that tolerance in every amplitude; the returned trajectory is the
/// one at the requested `dt`.
pub fn evolve_rk4<H: Hamiltonian + ?Sized>(
    initial: &FockState,
    h: &H,
    t_final: f64,
    dt: f64,
    opts: &Rk4Options,
) -> Result<EvolutionResult, OracleError> {
    let steps = step_count(t_final, dt)?;
    if opts.record_every == 0 {
        return Err(OracleError::InvalidArgument("record_every must be at least 1".into()));
    }
    let (halved, main) = rayon::join(
        || {
            opts.halving_tol
                .map(|_| integrate(h, initial, 0.5 * dt, 2 * steps, None, opts.edge_tol))
        },
        || integrate(h, initial, dt, steps, Some(opts.record_every), opts.edge_tol),
    );
    let (psi, trace, norm) = main?;

    let halving_change = match (halved, opts.halving_tol) {
        (Some(run), Some(tol)) => {
            let (fine, _, _) = run?;
            let change = psi
                .iter()
                .zip(fine.iter())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            if change > tol {
                return Err(OracleError::StepNotConverged {
                    dt,
                    change,
                    tolerance: tol,
                });
            }
            Some(change)
        }
        _ => None,
    };

    Ok(EvolutionResult {
        trace,
        norm,
        final_state: FockState { amps: psi },
        halving_change,
    })
}
