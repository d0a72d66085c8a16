use crate::dynamics::AmplitudeTrace;
use crate::error::AnalysisError;

/// Detected maxima of the |<a>| envelope.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PeakList {
    pub times: Vec<f64>,
    pub heights: Vec<f64>,
    pub prominence_floor: f64,
}

impl PeakList {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Centered moving maximum with `half` samples on each side.
fn moving_max(values: &[f64], half: usize) -> Vec<f64> {
    // Monotone deque over the sliding window.
    let n = values.len();
    let mut out = Vec::with_capacity(n);
    let mut deque = std::collections::VecDeque::new();
    let mut next = 0;
    for i in 0..n {
        let hi = (i + half).min(n - 1);
        while next <= hi {
            while deque.back().is_some_and(|&j: &usize| values[j] <= values[next]) {
                deque.pop_back();
            }
            deque.push_back(next);
            next += 1;
        }
        while deque.front().is_some_and(|&j| j + half < i) {
            deque.pop_front();
        }
        out.push(values[*deque.front().expect("window is never empty")]);
    }
    out
}

/// Height above the higher of the two bases, each base being the lowest point
/// between the peak and the nearest strictly higher sample on that side (or
/// the trace end).
fn prominence(env: &[f64], lo: usize, hi: usize) -> f64 {
    let h = env[lo];
    let mut left_min = h;
    for &v in env[..lo].iter().rev() {
        if v > h {
            break;
        }
        left_min = left_min.min(v);
    }
    let mut right_min = h;
    for &v in &env[hi + 1..] {
        if v > h {
            break;
        }
        right_min = right_min.min(v);
    }
    h - left_min.max(right_min)
}

/// Revival peaks of |<a>|.
///
/// The magnitude is first smoothed by a moving maximum of width 10% of
/// `spacing` (the shortest expected revival spacing), which turns each revival
/// into a plateau. Plateaus higher than both neighbours and not touching
/// either end of the trace are kept if their prominence reaches
/// `prominence_floor`; each is reported at the largest raw sample inside it.
pub fn find_revivals(trace: &AmplitudeTrace, prominence_floor: f64, spacing: f64) -> Result<PeakList, AnalysisError> {
    if trace.is_empty() {
        return Err(AnalysisError::EmptyTrace);
    }
    if prominence_floor.is_nan() || prominence_floor <= 0.0 {
        return Err(AnalysisError::InvalidArgument(format!(
            "prominence floor must be positive, got {prominence_floor}"
        )));
    }
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(AnalysisError::InvalidArgument(format!(
            "revival spacing must be positive, got {spacing}"
        )));
    }
    let mut peaks = PeakList {
        prominence_floor,
        ..PeakList::default()
    };
    if trace.len() < 3 {
        return Ok(peaks);
    }
    let step = trace.uniform_step().ok_or(AnalysisError::NonUniformGrid)?;
    let raw = trace.magnitudes();
    let half = ((0.05 * spacing / step).round() as usize).max(1);
    let env = moving_max(&raw, half);

    let n = env.len();
    let mut i = 1;
    while i < n - 1 {
        if env[i] <= env[i - 1] {
            i += 1;
            continue;
        }
        let lo = i;
        let mut hi = i;
        while hi + 1 < n && env[hi + 1] == env[lo] {
            hi += 1;
        }
        i = hi + 1;
        if hi + 1 >= n || env[hi + 1] > env[lo] {
            continue;
        }
        if prominence(&env, lo, hi) < prominence_floor {
            continue;
        }
        let at = (lo..=hi).max_by(|&a, &b| raw[a].total_cmp(&raw[b])).expect("plateau is nonempty");
        if raw[at] > 0.0 {
            peaks.times.push(trace.tau[at]);
            peaks.heights.push(raw[at]);
        }
    }
    Ok(peaks)
}

/// For each predicted time, the relative offset (d − p)/p to the nearest
/// detected time, or `None` when nothing was detected.
pub fn nearest_relative_offsets(predicted: &[f64], detected: &[f64]) -> Vec<Option<f64>> {
    predicted
        .iter()
        .map(|&p| {
            detected
                .iter()
                .min_by(|a, b| (*a - p).abs().total_cmp(&(*b - p).abs()))
                .map(|&d| (d - p) / p)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{revival_times, trace, Grid, SeriesControl};
    use crate::{Complex64, InitialState, ModelParams, System};
    use std::f64::consts::PI;

    fn real_trace(d_tau: f64, values: impl IntoIterator<Item = f64>) -> AmplitudeTrace {
        let value: Vec<Complex64> = values.into_iter().map(|v| Complex64::new(v, 0.0)).collect();
        AmplitudeTrace {
            tau: (0..value.len()).map(|j| j as f64 * d_tau).collect(),
            derivative: vec![Complex64::new(0.0, 0.0); value.len()],
            value,
        }
    }

    #[test]
    fn moving_max_window() {
        let v = [0.0, 3.0, 1.0, 0.0, 0.0, 2.0, 0.0];
        assert_eq!(moving_max(&v, 1), vec![3.0, 3.0, 3.0, 1.0, 2.0, 2.0, 2.0]);
        assert_eq!(moving_max(&v, 0), v.to_vec());
    }

    #[test]
    fn cosine_envelope() {
        let omega = 0.02;
        let d_tau = 0.1;
        let tr = real_trace(d_tau, (0..=20_000).map(|j| (omega * j as f64 * d_tau).cos()));
        let peaks = find_revivals(&tr, 0.1, PI / omega).unwrap();
        assert_eq!(peaks.len(), 12);
        for (k, t) in peaks.times.iter().enumerate() {
            assert!((t - (k + 1) as f64 * PI / omega).abs() <= d_tau, "{t}");
        }
        assert!(peaks.heights.iter().all(|&h| h > 0.999));
        assert!(peaks.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn constant_and_monotone_traces() {
        let flat = real_trace(1.0, std::iter::repeat_n(0.7, 500));
        assert!(find_revivals(&flat, 1e-3, 50.0).unwrap().is_empty());
        let falling = real_trace(1.0, (0..500).map(|j| (-0.01 * j as f64).exp()));
        assert!(find_revivals(&falling, 1e-3, 50.0).unwrap().is_empty());
    }

    #[test]
    fn prominence_floor_filters_ripples() {
        let tr = real_trace(1.0, (0..2000).map(|j| {
            let t = j as f64;
            0.5 + 0.01 * (0.05 * t).sin() + if (t - 1000.0).abs() < 3.0 { 0.5 } else { 0.0 }
        }));
        let peaks = find_revivals(&tr, 0.1, 100.0).unwrap();
        assert_eq!(peaks.len(), 1);
        assert!((peaks.times[0] - 1000.0).abs() <= 2.0);
        assert!(find_revivals(&tr, 1e-3, 100.0).unwrap().len() > 1);
    }

    #[test]
    fn argument_errors() {
        assert_eq!(
            find_revivals(&AmplitudeTrace::default(), 0.1, 1.0),
            Err(AnalysisError::EmptyTrace)
        );
        let tr = real_trace(1.0, [1.0, 2.0, 1.0]);
        assert!(find_revivals(&tr, 0.0, 1.0).is_err());
        assert!(find_revivals(&tr, 0.1, -1.0).is_err());
    }

    #[test]
    fn fig2a_revivals_near_prediction() {
        let sys = System::new(ModelParams::default(), InitialState::from_mean_photons(5.0, 1.0));
        let tr = trace(&sys, &Grid::new(1500.0, 0.1), &SeriesControl::default()).unwrap();
        let spacing = revival_times(&sys, 1).unwrap();
        let peaks = find_revivals(&tr, 1e-3, spacing).unwrap();
        let predicted: Vec<f64> = (1..=3).map(|k| revival_times(&sys, k).unwrap()).collect();
        for offset in nearest_relative_offsets(&predicted, &peaks.times) {
            assert!(offset.unwrap().abs() < 0.05, "{peaks:?}");
        }
    }

    #[test]
    fn nearest_offsets() {
        let got = nearest_relative_offsets(&[100.0, 200.0], &[95.0, 210.0, 400.0]);
        assert_eq!(got, vec![Some(-0.05), Some(0.05)]);
        assert_eq!(nearest_relative_offsets(&[1.0], &[]), vec![None]);
    }
}
