use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use crate::dynamics::AmplitudeTrace;
use crate::error::AnalysisError;

/// Minimum trace length accepted by [`harmonic_spectrum`].
pub const MIN_SAMPLES: usize = 256;

/// Symmetric Hann window of length `n`.
pub fn hann(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    let denom = (n - 1) as f64;
    (0..n)
        .map(|j| 0.5 * (1.0 - (2.0 * PI * j as f64 / denom).cos()))
        .collect()
}

/// Hann-windowed magnitude spectrum with angular frequencies in ascending
/// order.
///
/// A component c e^{−iωτ} shows up at +ω with magnitude ≈ |c|: the transform
/// runs in the e^{+iωτ} direction and is divided by the window sum. The
/// samples are zero-padded to `pad` times their length.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub frequency: Vec<f64>,
    pub magnitude: Vec<f64>,
    /// Bin spacing of the unpadded transform, 2π/(N dτ).
    pub resolution: f64,
}

impl Spectrum {
    pub fn new(samples: &[Complex64], d_tau: f64, pad: usize) -> Self {
        let n = samples.len();
        let len = n * pad.max(1);
        let window = hann(n);
        let window_sum: f64 = window.iter().sum();
        let mut buf: Vec<Complex64> = samples.iter().zip(&window).map(|(s, w)| s * w).collect();
        buf.resize(len, Complex64::new(0.0, 0.0));
        FftPlanner::new()
            .plan_fft(len, FftDirection::Inverse)
            .process(&mut buf);

        let step = 2.0 * PI / (len as f64 * d_tau);
        let half = len / 2;
        let (frequency, magnitude) = (0..len)
            .map(|i| {
                // fftshift: negative frequencies first.
                let k = (i + half) % len;
                let signed = if k >= len - half { k as f64 - len as f64 } else { k as f64 };
                (signed * step, buf[k].norm() / window_sum)
            })
            .unzip();
        Self {
            frequency,
            magnitude,
            resolution: 2.0 * PI / (n as f64 * d_tau),
        }
    }

    /// Largest magnitude within `half_width` of `freq`.
    pub fn max_near(&self, freq: f64, half_width: f64) -> f64 {
        self.frequency
            .iter()
            .zip(&self.magnitude)
            .filter(|(f, _)| (*f - freq).abs() <= half_width)
            .map(|(_, m)| *m)
            .fold(0.0, f64::max)
    }

    pub fn peak_magnitude(&self) -> f64 {
        self.magnitude.iter().copied().fold(0.0, f64::max)
    }

    /// Strongest line, refined by a three-point parabola through the log
    /// magnitudes.
    pub fn dominant_peak(&self) -> Option<SpectralPeak> {
        let mags = &self.magnitude;
        let top = (1..mags.len().saturating_sub(1)).max_by(|&a, &b| mags[a].total_cmp(&mags[b]))?;
        let (frequency, magnitude) = self.refine(top);

        let window = 4.0 * self.resolution;
        let rival = (1..mags.len() - 1)
            .filter(|&i| i != top && mags[i] > mags[i - 1] && mags[i] >= mags[i + 1])
            .filter(|&i| (self.frequency[i] - self.frequency[top]).abs() <= window)
            .filter(|&i| mags[i] >= 0.5 * mags[top])
            .max_by(|&a, &b| mags[a].total_cmp(&mags[b]))
            .map(|i| self.refine(i));
        Some(SpectralPeak {
            frequency,
            magnitude,
            rival,
        })
    }

    fn refine(&self, i: usize) -> (f64, f64) {
        let ln = |j: usize| self.magnitude[j].max(f64::MIN_POSITIVE).ln();
        let (a, b, c) = (ln(i - 1), ln(i), ln(i + 1));
        let curvature = a - 2.0 * b + c;
        if curvature >= 0.0 {
            return (self.frequency[i], self.magnitude[i]);
        }
        let offset = 0.5 * (a - c) / curvature;
        let df = self.frequency[i + 1] - self.frequency[i];
        (
            self.frequency[i] + offset * df,
            (b - 0.25 * (a - c) * offset).exp(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPeak {
    pub frequency: f64,
    pub magnitude: f64,
    /// Another local maximum at least half as strong within four unpadded
    /// bins, if any.
    pub rival: Option<(f64, f64)>,
}

/// Hann-windowed magnitude spectrum of <a>(τ) as (angular frequency, magnitude)
/// pairs in units of Ω, ascending in frequency.
///
/// `required_band` is the highest frequency the trace is expected to carry,
/// typically [`crate::System::spectral_band`].
pub fn harmonic_spectrum(trace: &AmplitudeTrace, required_band: f64) -> Result<Vec<(f64, f64)>, AnalysisError> {
    let spectrum = trace_spectrum(trace, required_band, 1)?;
    Ok(spectrum.frequency.into_iter().zip(spectrum.magnitude).collect())
}

/// [`harmonic_spectrum`] with zero padding, returned as a [`Spectrum`].
pub fn trace_spectrum(trace: &AmplitudeTrace, required_band: f64, pad: usize) -> Result<Spectrum, AnalysisError> {
    if trace.is_empty() {
        return Err(AnalysisError::EmptyTrace);
    }
    if trace.len() < MIN_SAMPLES {
        return Err(AnalysisError::TooFewSamples {
            required: MIN_SAMPLES,
            got: trace.len(),
        });
    }
    let d_tau = trace.uniform_step().ok_or(AnalysisError::NonUniformGrid)?;
    let nyquist = PI / d_tau;
    if nyquist < required_band {
        return Err(AnalysisError::GridTooCoarse {
            nyquist,
            required: required_band,
        });
    }
    Ok(Spectrum::new(&trace.value, d_tau, pad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{trace, Grid, SeriesControl};
    use crate::{InitialState, ModelParams, System};

    fn tone_trace(n: usize, d_tau: f64, tones: &[(f64, f64)]) -> AmplitudeTrace {
        let tau: Vec<f64> = (0..n).map(|j| j as f64 * d_tau).collect();
        let value = tau
            .iter()
            .map(|&t| tones.iter().map(|&(amp, w)| amp * Complex64::new(0.0, -w * t).exp()).sum())
            .collect();
        AmplitudeTrace {
            derivative: vec![Complex64::new(0.0, 0.0); n],
            tau,
            value,
        }
    }

    #[test]
    fn hann_shape() {
        let w = hann(5);
        assert_eq!(w[0], 0.0);
        assert!((w[2] - 1.0).abs() < 1e-15);
        assert!((w[1] - w[3]).abs() < 1e-15);
    }

    #[test]
    fn single_tone_sign_and_interpolation() {
        let delta = 1.0;
        let tr = tone_trace(4096, 0.1, &[(2.0, delta)]);
        let s = trace_spectrum(&tr, 1.5, 1).unwrap();
        let peak = s.dominant_peak().unwrap();
        assert!((peak.frequency - delta).abs() < 0.05 * s.resolution);
        assert!((peak.magnitude - 2.0).abs() < 0.02);
        assert!(peak.rival.is_none());
        let padded = trace_spectrum(&tr, 1.5, 4).unwrap().dominant_peak().unwrap();
        assert!((padded.frequency - delta).abs() < 0.002 * s.resolution);
        assert!((padded.magnitude - 2.0).abs() < 1e-3);
        assert!(s.max_near(-delta, s.resolution) < 1e-6);
    }

    #[test]
    fn close_tones_flag_a_rival() {
        let n = 2048;
        let d_tau = 0.5;
        let res = 2.0 * PI / (n as f64 * d_tau);
        let tr = tone_trace(n, d_tau, &[(1.0, 1.0), (0.9, 1.0 + 3.0 * res)]);
        let peak = trace_spectrum(&tr, 1.5, 4).unwrap().dominant_peak().unwrap();
        assert!(peak.rival.is_some());
    }

    #[test]
    fn input_checks() {
        assert_eq!(
            harmonic_spectrum(&AmplitudeTrace::default(), 1.0),
            Err(AnalysisError::EmptyTrace)
        );
        let short = tone_trace(100, 0.1, &[(1.0, 1.0)]);
        assert!(matches!(
            harmonic_spectrum(&short, 1.0),
            Err(AnalysisError::TooFewSamples { .. })
        ));
        let coarse = tone_trace(512, 4.0, &[(1.0, 1.0)]);
        assert!(matches!(
            harmonic_spectrum(&coarse, 1.0),
            Err(AnalysisError::GridTooCoarse { .. })
        ));
        let mut uneven = tone_trace(512, 0.1, &[(1.0, 1.0)]);
        uneven.tau[10] += 0.03;
        assert_eq!(harmonic_spectrum(&uneven, 1.0), Err(AnalysisError::NonUniformGrid));
    }

    #[test]
    fn zero_temperature_kerr_comb() {
        let params = ModelParams {
            kappa: 0.0,
            gamma: 0.0,
            ..ModelParams::default()
        };
        let sys = System::new(params, InitialState::from_mean_photons(5.0, 0.0));
        let tr = trace(&sys, &Grid::new(16383.0, 1.0), &SeriesControl::default()).unwrap();
        let s = trace_spectrum(&tr, sys.spectral_band(), 1).unwrap();
        let base = params.delta - 0.5 * params.g2 - sys.kerr.lambda1;
        let top = s.peak_magnitude();
        for n in 0..8 {
            let line = base - 2.0 * sys.kerr.lambda1 * n as f64;
            // Poisson weight e^{−5} 5^n / n! ≥ 6.7e−3 for these n.
            assert!(s.max_near(line, s.resolution) > 1e-3 * top, "line {n}");
        }
    }
}
