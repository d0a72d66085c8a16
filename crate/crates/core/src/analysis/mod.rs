//! Post-processing of amplitude traces: revival detection, spectra,
//! stroboscopic sections, and the parameter presets the studies use.

pub mod poincare;
pub mod presets;
pub mod revivals;
pub mod spectrum;

pub use poincare::{dispersion, poincare_section, poincare_section_with, section_len, PoincareSection};
pub use presets::{preset, Preset, PresetId};
pub use revivals::{find_revivals, nearest_relative_offsets, PeakList};
pub use spectrum::{harmonic_spectrum, trace_spectrum, SpectralPeak, Spectrum};
