use std::f64::consts::PI;

use optomech::analysis::{poincare_section, Preset, PresetId};
use optomech::dynamics::SeriesControl;

#[test]
fn sub_window_reproduces_full_window_samples() {
    let preset = Preset::new(PresetId::Fig6Bottom);
    let sys = preset.system(preset.at_kappa(0.001), 1.0);
    let control = SeriesControl::default();
    let period = 2.0 * PI / sys.params.delta;
    let full = poincare_section(&sys, &control, period, 0.0, 600.0).unwrap();
    let skip = 17;
    let sub = poincare_section(&sys, &control, period, skip as f64 * period, 400.0).unwrap();
    assert_eq!(sub.points.len(), full.taus.iter().filter(|&&t| t <= 400.0).count() - skip);
    for (j, (p, q)) in sub.points.iter().zip(&full.points[skip..]).enumerate() {
        assert!((sub.taus[j] - full.taus[skip + j]).abs() < 1e-10);
        assert!((p.0 - q.0).abs() < 1e-10 && (p.1 - q.1).abs() < 1e-10, "sample {j}");
    }
}

#[test]
fn sections_are_deterministic() {
    let preset = Preset::new(PresetId::Fig6Top);
    let sys = preset.system(preset.base, 1.0);
    let control = SeriesControl::default();
    let a = poincare_section(&sys, &control, PI, 0.0, 2000.0).unwrap();
    let b = poincare_section(&sys, &control, PI, 0.0, 2000.0).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.points.len(), 637);
}
