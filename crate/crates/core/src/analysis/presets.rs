use std::fmt;
use std::str::FromStr;

use crate::error::AnalysisError;
use crate::{InitialState, ModelParams, System};

/// Parameter sets behind the collapse/revival, approximation and Poincaré
/// studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PresetId {
    Fig2a,
    Fig2b,
    Fig3,
    Fig4,
    Fig5,
    Fig6Top,
    Fig6Bottom,
}

impl PresetId {
    pub const ALL: [PresetId; 7] = [
        PresetId::Fig2a,
        PresetId::Fig2b,
        PresetId::Fig3,
        PresetId::Fig4,
        PresetId::Fig5,
        PresetId::Fig6Top,
        PresetId::Fig6Bottom,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PresetId::Fig2a => "fig2a",
            PresetId::Fig2b => "fig2b",
            PresetId::Fig3 => "fig3",
            PresetId::Fig4 => "fig4",
            PresetId::Fig5 => "fig5",
            PresetId::Fig6Top => "fig6-top",
            PresetId::Fig6Bottom => "fig6-bottom",
        }
    }
}

impl fmt::Display for PresetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PresetId {
    type Err = AnalysisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PresetId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| AnalysisError::UnknownPreset(s.to_owned()))
    }
}

/// A base parameter set plus the κ and g3 values swept around it.
///
/// γ is tied to κ as γ = 0.01κ throughout. The mean phonon number is not part
/// of a preset and is supplied when building a [`System`].
#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub id: PresetId,
    /// Parameters at the first entries of `kappas` and `g3_values`.
    pub base: ModelParams,
    pub mean_photons: f64,
    pub kappas: Vec<f64>,
    pub g3_values: Vec<f64>,
}

fn with_kappa(p: ModelParams, kappa: f64) -> ModelParams {
    ModelParams {
        kappa,
        gamma: 0.01 * kappa,
        ..p
    }
}

impl Preset {
    pub fn new(id: PresetId) -> Self {
        let common = ModelParams {
            omega_c: 1.0,
            omega: 1.0,
            g1: 0.1,
            g2: 0.015,
            g3: 0.005,
            delta: 1.0,
            kappa: 0.01,
            gamma: 1e-4,
        };
        let (params, kappas, g3_values) = match id {
            PresetId::Fig2a => (common, vec![0.01, 0.0033, 0.0], vec![0.005]),
            PresetId::Fig2b => (
                ModelParams {
                    g2: 0.0,
                    g3: 0.0,
                    ..common
                },
                vec![0.01, 0.0033, 0.0],
                vec![0.0],
            ),
            PresetId::Fig3 => (common, vec![0.01], vec![0.005]),
            PresetId::Fig4 => (common, vec![0.01], vec![0.005, 0.0]),
            PresetId::Fig5 => (
                ModelParams { g2: 0.02, ..common },
                vec![0.01],
                vec![0.005, 0.0],
            ),
            PresetId::Fig6Top => (
                ModelParams {
                    g2: 0.0,
                    g3: 0.0,
                    delta: 2.0,
                    ..common
                },
                vec![0.01, 0.0033, 0.001],
                vec![0.0],
            ),
            PresetId::Fig6Bottom => (
                ModelParams { delta: 2.0, ..common },
                vec![0.01, 0.0033, 0.001],
                vec![0.005],
            ),
        };
        Self {
            id,
            base: ModelParams {
                g3: g3_values[0],
                ..with_kappa(params, kappas[0])
            },
            mean_photons: 5.0,
            kappas,
            g3_values,
        }
    }

    /// Base parameters at another κ (and γ = 0.01κ).
    pub fn at_kappa(&self, kappa: f64) -> ModelParams {
        with_kappa(self.base, kappa)
    }

    /// Every (κ, g3) combination of the sweep.
    pub fn variants(&self) -> Vec<ModelParams> {
        self.kappas
            .iter()
            .flat_map(|&k| {
                self.g3_values.iter().map(move |&g3| ModelParams {
                    g3,
                    ..self.at_kappa(k)
                })
            })
            .collect()
    }

    pub fn initial_state(&self, mbar: f64) -> InitialState {
        InitialState::from_mean_photons(self.mean_photons, mbar)
    }

    pub fn system(&self, params: ModelParams, mbar: f64) -> System {
        System::new(params, self.initial_state(mbar))
    }
}

pub fn preset(id: &str) -> Result<Preset, AnalysisError> {
    id.parse().map(Preset::new)
}
