use std::f64::consts::PI;

use crate::error::DynamicsError;
use crate::System;

/// Period 2π/(g2 + Λ2) of the thermal revival comb.
///
/// Errors with [`DynamicsError::DegenerateModel`] when g2 + Λ2 vanishes; the
/// error carries the Kerr comb period π/Λ1 instead. A negative g2 + Λ2 gives
/// the same comb as its magnitude.
pub fn revival_period(sys: &System) -> Result<f64, DynamicsError> {
    let rate = sys.params.g2 + sys.kerr.lambda2;
    if rate.abs() < 1e-15 {
        return Err(DynamicsError::DegenerateModel {
            kerr_period: PI / sys.kerr.lambda1,
        });
    }
    Ok(2.0 * PI / rate.abs())
}

/// t_k = 2kπ/(g2 + Λ2), k ≥ 1.
pub fn revival_times(sys: &System, k: usize) -> Result<f64, DynamicsError> {
    if k == 0 {
        return Err(DynamicsError::InvalidArgument(
            "revival index starts at 1".into(),
        ));
    }
    Ok(k as f64 * revival_period(sys)?)
}

/// exp(−2|α|² sin²(Λ1 t)) / sqrt(1 + 2m̄(1 + m̄)(1 − cos(g2 t))).
pub fn collapse_lhs(sys: &System, t: f64) -> f64 {
    let a2 = sys.state.mean_photons();
    let mbar = sys.state.mbar;
    let s = (sys.kerr.lambda1 * t).sin();
    let thermal = 1.0 + 2.0 * mbar * (1.0 + mbar) * (1.0 - (sys.params.g2 * t).cos());
    (-2.0 * a2 * s * s).exp() / thermal.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollapseTime {
    pub tau: f64,
    /// collapse_lhs(tau) − 1/2.
    pub residual: f64,
    /// Final bisection bracket; the residual changes sign across it.
    pub bracket: (f64, f64),
}

const SCAN_STEP: f64 = 0.5;
const RESIDUAL_TOL: f64 = 1e-10;

/// First τ > 0 where [`collapse_lhs`] falls to 1/2.
///
/// The crossing is bracketed by scanning in steps of 0.5 up to the first
/// revival time (or the Kerr period π/Λ1 when the thermal comb is degenerate)
/// and then refined by bisection.
pub fn collapse_time(sys: &System) -> Result<CollapseTime, DynamicsError> {
    if sys.state.alpha.norm() == 0.0 || sys.kerr.lambda1 <= 0.0 {
        return Err(DynamicsError::InvalidArgument(
            "collapse time needs |alpha| > 0 and lambda1 > 0".into(),
        ));
    }
    let horizon = match revival_period(sys) {
        Ok(t1) => t1,
        Err(DynamicsError::DegenerateModel { kerr_period }) => kerr_period,
        Err(e) => return Err(e),
    };
    let f = |t: f64| collapse_lhs(sys, t) - 0.5;

    let steps = (horizon / SCAN_STEP).ceil() as usize;
    let mut lo = 0.0;
    let mut hi = None;
    for j in 1..=steps {
        let t = (j as f64 * SCAN_STEP).min(horizon);
        if f(t) <= 0.0 {
            hi = Some(t);
            break;
        }
        lo = t;
    }
    let mut hi = hi.ok_or(DynamicsError::NoRoot { scanned_to: horizon })?;

    let mut mid = 0.5 * (lo + hi);
    let mut residual = f(mid);
    for _ in 0..200 {
        if residual.abs() < RESIDUAL_TOL {
            break;
        }
        if residual > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        mid = 0.5 * (lo + hi);
        residual = f(mid);
    }
    Ok(CollapseTime {
        tau: mid,
        residual,
        bracket: (lo, hi),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{InitialState, ModelParams};

    fn fig2a(mbar: f64) -> System {
        System::new(ModelParams::default(), InitialState::from_mean_photons(5.0, mbar))
    }

    #[test]
    fn revival_examples() {
        let sys = fig2a(1.0);
        assert!((revival_times(&sys, 1).unwrap() - 389.453_634_742_536_35).abs() < 1e-9);
        assert!((revival_times(&sys, 2).unwrap() - 2.0 * 389.453_634_742_536_35).abs() < 1e-9);
        let fig5 = System::new(
            ModelParams {
                g2: 0.02,
                ..ModelParams::default()
            },
            sys.state,
        );
        assert!((revival_times(&fig5, 1).unwrap() - 296.085_700_711_388_3).abs() < 1e-9);
        assert!(revival_times(&sys, 0).is_err());
    }

    #[test]
    fn degenerate_comb_reports_kerr_period() {
        let sys = System::new(
            ModelParams {
                g2: 0.0,
                g3: 0.0,
                ..ModelParams::default()
            },
            InitialState::from_mean_photons(5.0, 1.0),
        );
        match revival_times(&sys, 1) {
            Err(DynamicsError::DegenerateModel { kerr_period }) => {
                assert!((kerr_period - PI / 0.01).abs() < 1e-9)
            }
            other => panic!("unexpected {other:?}"),
        }
        // Collapse still has a Kerr-only answer.
        let c = collapse_time(&sys).unwrap();
        let want = (2f64.ln() / 10.0).sqrt().asin() / 0.01;
        assert!((c.tau - want).abs() < 1e-6);
    }

    #[test]
    fn lhs_at_zero_is_one() {
        assert_eq!(collapse_lhs(&fig2a(7.0), 0.0), 1.0);
    }

    #[test]
    fn zero_temperature_root_is_analytic() {
        let sys = fig2a(0.0);
        let c = collapse_time(&sys).unwrap();
        let want = (2f64.ln() / 10.0).sqrt().asin() / sys.kerr.lambda1;
        assert!((want - 25.234_558_534_549_38).abs() < 1e-9);
        assert!((c.tau - want).abs() < 1e-6);
        assert!(c.residual.abs() < 1e-10);
        let (lo, hi) = c.bracket;
        assert!(collapse_lhs(&sys, lo) - 0.5 >= 0.0 && collapse_lhs(&sys, hi) - 0.5 <= 0.0);
    }

    #[test]
    fn thermal_occupation_shortens_collapse() {
        let cold = collapse_time(&fig2a(0.0)).unwrap().tau;
        let mut previous = cold;
        for mbar in [1.0, 5.0, 20.0] {
            let t = collapse_time(&fig2a(mbar)).unwrap();
            assert!(t.tau < cold, "mbar = {mbar}");
            assert!(t.tau <= previous);
            assert!(t.residual.abs() < 1e-10);
            previous = t.tau;
        }
    }

    #[test]
    fn no_root_when_lhs_stays_high() {
        // Tiny photon number and m̄ = 0: the LHS never reaches 1/2.
        let sys = System::new(ModelParams::default(), InitialState::from_mean_photons(0.01, 0.0));
        assert!(matches!(collapse_time(&sys), Err(DynamicsError::NoRoot { .. })));
    }
}
