use rayon::prelude::*;

use crate::dynamics::{amplitude_with_derivative, SeriesControl};
use crate::error::{AnalysisError, Error};
use crate::{Complex64, System};

/// Stroboscopic samples (Re<a>, Re d<a>/dτ) at τ_j = t_start + j·period.
#[derive(Debug, Clone, PartialEq)]
pub struct PoincareSection {
    pub points: Vec<(f64, f64)>,
    pub taus: Vec<f64>,
    pub period: f64,
    pub t_start: f64,
    pub t_end: f64,
}

impl PoincareSection {
    /// sqrt(var x + var y) of the point cloud (population variances).
    pub fn dispersion(&self) -> f64 {
        dispersion(&self.points)
    }
}

pub fn dispersion(points: &[(f64, f64)]) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
    let (mx, my) = (sx / n, sy / n);
    let var: f64 = points
        .iter()
        .map(|p| (p.0 - mx).powi(2) + (p.1 - my).powi(2))
        .sum::<f64>()
        / n;
    var.sqrt()
}

/// floor((t_end − t_start)/period) + 1.
pub fn section_len(period: f64, t_start: f64, t_end: f64) -> usize {
    ((t_end - t_start) / period + 1e-9).floor() as usize + 1
}

/// Build a section from any generator returning (<a>, d<a>/dτ) at a time.
/// Samples are evaluated independently and in parallel; t_end = t_start gives
/// a single sample.
pub fn poincare_section_with<F, E>(generator: F, period: f64, t_start: f64, t_end: f64) -> Result<PoincareSection, E>
where
    F: Fn(f64) -> Result<(Complex64, Complex64), E> + Sync,
    E: Send + From<AnalysisError>,
{
    if !(period > 0.0 && period.is_finite()) {
        return Err(AnalysisError::InvalidArgument(format!("period must be positive, got {period}")).into());
    }
    if !(t_start >= 0.0 && t_end >= t_start && t_end.is_finite()) {
        return Err(AnalysisError::InvalidArgument(format!(
            "need 0 <= t_start <= t_end, got [{t_start}, {t_end}]"
        ))
        .into());
    }
    let taus: Vec<f64> = (0..section_len(period, t_start, t_end))
        .map(|j| t_start + j as f64 * period)
        .collect();
    let points = taus
        .par_iter()
        .map(|&t| generator(t).map(|(a, da)| (a.re, da.re)))
        .collect::<Result<_, E>>()?;
    Ok(PoincareSection {
        points,
        taus,
        period,
        t_start,
        t_end,
    })
}

/// Section of the closed-form trajectory, evaluated at the exact sample times.
pub fn poincare_section(
    sys: &System,
    control: &SeriesControl,
    period: f64,
    t_start: f64,
    t_end: f64,
) -> Result<PoincareSection, Error> {
    poincare_section_with(
        |t| {
            amplitude_with_derivative(sys, t, control)
                .map(|(a, da)| (a.value, da.value))
                .map_err(Error::from)
        },
        period,
        t_start,
        t_end,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{InitialState, ModelParams};
    use std::f64::consts::PI;

    #[test]
    fn constant_generator_collapses() {
        let s = poincare_section_with::<_, AnalysisError>(
            |_| Ok((Complex64::new(0.3, 0.1), Complex64::new(0.0, 0.0))),
            1.7,
            0.0,
            100.0,
        )
        .unwrap();
        assert_eq!(s.points.len(), section_len(1.7, 0.0, 100.0));
        assert_eq!(s.points.len(), 59);
        assert!(s.points.iter().all(|&p| p == (0.3, 0.0)));
        assert!(s.dispersion() < 1e-15);
    }

    #[test]
    fn free_rotation_is_a_single_point() {
        let params = ModelParams {
            g1: 0.0,
            g2: 0.0,
            g3: 0.0,
            kappa: 0.0,
            gamma: 0.0,
            delta: 2.0,
            ..ModelParams::default()
        };
        let sys = System::new(params, InitialState::from_mean_photons(5.0, 1.0));
        let s = poincare_section(&sys, &SeriesControl::default(), PI, 0.0, 500.0).unwrap();
        assert!(s.dispersion() < 1e-10);
        assert!((s.points[0].0 - 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn count_and_arguments() {
        assert_eq!(section_len(0.5, 1.0, 3.0), 5);
        assert_eq!(section_len(0.3, 0.0, 0.9), 4);
        let sys = System::new(ModelParams::default(), InitialState::from_mean_photons(5.0, 1.0));
        let c = SeriesControl::default();
        assert!(poincare_section(&sys, &c, 0.0, 0.0, 10.0).is_err());
        assert!(poincare_section(&sys, &c, 1.0, 10.0, 9.0).is_err());
        assert_eq!(poincare_section(&sys, &c, 1.0, 10.0, 10.0).unwrap().points.len(), 1);
        assert!(poincare_section(&sys, &c, 1.0, -1.0, 10.0).is_err());
    }

    #[test]
    fn dispersion_of_square() {
        let pts = [(1.0, 1.0), (-1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)];
        assert!((dispersion(&pts) - 2f64.sqrt()).abs() < 1e-15);
    }
}
