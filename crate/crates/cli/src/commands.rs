use std::f64::consts::PI;

use rayon::prelude::*;
use serde_json::{json, Value as Json};

use optomech::analysis::{find_revivals, nearest_relative_offsets, poincare_section};
use optomech::dynamics::{
    amplitude_exact, approx_trace, collapse_time, revival_period, trace, Grid, SeriesControl,
};
use optomech::model::{blockade_detunings, spectrum};
use optomech::oracle::{
    build_initial_state, default_truncation, evolve_diagonal, evolve_rk4, validate_effective_spectrum,
    DiagonalHamiltonian, Rk4Options, SpectralOptions,
};
use optomech::{Complex64, DynamicsError, InitialState, KerrCoefficients, ModelParams, System};

use crate::config::{Command, RunConfig, Source};
use crate::output::{write_outputs, Cell, Csv};
use crate::CliError;

/// Largest |Δ<a>| between the diagonal Fock evolution and the closed form.
pub const DIAGONAL_TOL: f64 = 1e-9;
/// Largest |Δ<a>| between RK4 on the diagonal generator and the closed form.
pub const RK4_TOL: f64 = 1e-6;
/// Step-halving tolerance on the RK4 final state.
pub const RK4_HALVING_TOL: f64 = 1e-7;

/// JSON summary plus whether a validation threshold was missed.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub summary: Json,
    pub failed: Option<String>,
}

impl From<Json> for Report {
    fn from(summary: Json) -> Self {
        Self { summary, failed: None }
    }
}

pub fn execute(cfg: &RunConfig) -> Result<Report, CliError> {
    match cfg.command {
        Command::Kerr => kerr(cfg).map(Report::from),
        Command::Spectrum => levels(cfg).map(Report::from),
        Command::Evolve => evolve(cfg).map(Report::from),
        Command::Oracle => oracle(cfg),
        Command::Poincare => poincare(cfg).map(Report::from),
    }
}

fn model_params(cfg: &RunConfig) -> Result<ModelParams, CliError> {
    let p = ModelParams {
        omega_c: cfg.float("omega_c"),
        omega: cfg.float("omega"),
        g1: cfg.float("g1"),
        g2: cfg.float("g2"),
        g3: cfg.float("g3"),
        delta: cfg.float("delta"),
        kappa: cfg.float("kappa"),
        gamma: cfg.float("gamma"),
    };
    p.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(p)
}

fn initial_state(cfg: &RunConfig) -> Result<InitialState, CliError> {
    let mbar = cfg.float("mbar");
    if mbar < 0.0 {
        return Err(CliError::Config(format!("mbar must be nonnegative, got {mbar}")));
    }
    Ok(InitialState::new(
        Complex64::new(cfg.float("alpha_re"), cfg.float("alpha_im")),
        mbar,
    ))
}

fn series_control(cfg: &RunConfig) -> SeriesControl {
    SeriesControl {
        weight_tail_tol: cfg.float("weight_tail_tol"),
        term_tol: cfg.float("term_tol"),
        m_max_cap: cfg.auto_count("m_max_cap"),
    }
}

fn system(cfg: &RunConfig) -> Result<System, CliError> {
    Ok(System::new(model_params(cfg)?, initial_state(cfg)?))
}

fn positive(cfg: &RunConfig, name: &str) -> Result<f64, CliError> {
    let x = cfg.float(name);
    if x > 0.0 {
        Ok(x)
    } else {
        Err(CliError::Config(format!("{name} must be positive, got {x}")))
    }
}

fn kerr(cfg: &RunConfig) -> Result<Json, CliError> {
    let p = model_params(cfg)?;
    let k = KerrCoefficients::from_params(&p);
    let b = blockade_detunings(&p, &k);
    Ok(json!({
        "lambda1": k.lambda1,
        "lambda2": k.lambda2,
        "lambda3": k.lambda3,
        "blockade_cavity_ref": [b.cavity_ref.0, b.cavity_ref.1],
        "blockade_drive_ref": [b.drive_ref.0, b.drive_ref.1],
        "perturbative": p.is_perturbative(),
    }))
}

fn levels(cfg: &RunConfig) -> Result<Json, CliError> {
    let p = model_params(cfg)?;
    let k = KerrCoefficients::from_params(&p);
    let (n_max, m_max) = (cfg.count("n_max"), cfg.count("m_max"));
    let as_u32 = |name: &str, x: usize| {
        u32::try_from(x).map_err(|_| CliError::Config(format!("{name} = {x} is too large")))
    };
    let mut csv = Csv::new(&["n", "m", "energy"]);
    for e in spectrum(&p, &k, as_u32("n_max", n_max)?, as_u32("m_max", m_max)?) {
        csv.row(&[Cell::Int(e.n.into()), Cell::Int(e.m.into()), Cell::Float(e.energy)]);
    }
    let path = write_outputs(cfg, &csv)?;
    Ok(json!({
        "csv": path.display().to_string(),
        "rows": csv.rows(),
    }))
}

/// Multiples of `period` up to `tau_max`.
fn comb(period: f64, tau_max: f64) -> Vec<f64> {
    (1..)
        .map(|k| k as f64 * period)
        .take_while(|&t| t <= tau_max)
        .collect()
}

fn evolve(cfg: &RunConfig) -> Result<Json, CliError> {
    let sys = system(cfg)?;
    let control = series_control(cfg);
    let grid = Grid::new(cfg.float("tau_max"), positive(cfg, "d_tau")?);
    let tr = trace(&sys, &grid, &control)?;
    let approx = cfg.flag("approx").then(|| approx_trace(&sys, &grid));

    let mut header = vec!["tau", "re_a", "im_a", "abs_a", "re_dadt", "im_dadt"];
    if approx.is_some() {
        header.extend(["re_a_approx", "im_a_approx", "abs_a_approx"]);
    }
    let mut csv = Csv::new(&header);
    for j in 0..tr.len() {
        let (a, da) = (tr.value[j], tr.derivative[j]);
        let mut row = vec![
            Cell::Float(tr.tau[j]),
            Cell::Float(a.re),
            Cell::Float(a.im),
            Cell::Float(a.norm()),
            Cell::Float(da.re),
            Cell::Float(da.im),
        ];
        if let Some(ap) = &approx {
            row.extend([Cell::Float(ap[j].re), Cell::Float(ap[j].im), Cell::Float(ap[j].norm())]);
        }
        csv.row(&row);
    }
    let path = write_outputs(cfg, &csv)?;

    let tau_max = grid.tau_max;
    let lambda1 = sys.kerr.lambda1;
    let kerr_period = (lambda1 > 0.0).then(|| PI / lambda1);
    let thermal_period = match revival_period(&sys) {
        Ok(t) if sys.state.mbar > 0.0 => Some(t),
        Ok(_) | Err(DynamicsError::DegenerateModel { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let kerr_comb = thermal_period.is_none();
    let revival_pred = thermal_period.map(|t| comb(t, tau_max)).unwrap_or_default();
    let kerr_pred = kerr_period.map(|t| comb(t, tau_max)).unwrap_or_default();

    let floor = positive(cfg, "prominence_floor")?;
    let detected = match thermal_period.or(kerr_period) {
        Some(spacing) => find_revivals(&tr, floor, spacing).map_err(|e| CliError::Config(e.to_string()))?.times,
        None => Vec::new(),
    };
    let reference = if kerr_comb { &kerr_pred } else { &revival_pred };
    let offsets = nearest_relative_offsets(reference, &detected);

    let (collapse, residual) = match collapse_time(&sys) {
        Ok(c) => (Some(c.tau), Some(c.residual)),
        Err(e) => {
            log::info!("no collapse time: {e}");
            (None, None)
        }
    };

    Ok(json!({
        "csv": path.display().to_string(),
        "rows": csv.rows(),
        "revival_period": thermal_period,
        "revival_pred": revival_pred,
        "kerr_comb": kerr_comb,
        "kerr_period": kerr_period,
        "kerr_pred": kerr_pred,
        "revival_detected": detected,
        "revival_offsets": offsets,
        "prominence_floor": floor,
        "collapse_time": collapse,
        "collapse_residual": residual,
    }))
}

fn max_deviation(pairs: impl Iterator<Item = (f64, Complex64, Complex64)>) -> (f64, f64) {
    pairs.fold((0.0, 0.0), |(best, at), (t, a, b)| {
        let d = (a - b).norm();
        if d > best || d.is_nan() {
            (d, t)
        } else {
            (best, at)
        }
    })
}

fn oracle(cfg: &RunConfig) -> Result<Report, CliError> {
    let sys = system(cfg)?;
    let control = series_control(cfg);
    let scale = cfg.float("lambda2_scale");
    let analytic = System::with_kerr(
        sys.params,
        KerrCoefficients {
            lambda2: scale * sys.kerr.lambda2,
            ..sys.kerr
        },
        sys.state,
    );

    let (n_max, m_max) = default_truncation(&sys.state);
    let psi0 = build_initial_state(&sys.state, n_max, m_max)?;
    let step = positive(cfg, "oracle_step")?;
    let times = Grid::new(cfg.float("tau_max"), step).taus();
    let compared: Vec<(f64, Complex64, Complex64)> = times
        .par_iter()
        .map(|&t| {
            let exact = amplitude_exact(&analytic, t, &control)?.value;
            Ok((t, evolve_diagonal(&psi0, &sys, t).mean_amplitude(), exact))
        })
        .collect::<Result<_, DynamicsError>>()?;
    let (diag_dev, diag_at) = max_deviation(compared.into_iter());
    let diag_pass = diag_dev <= DIAGONAL_TOL;
    let mut failures = Vec::new();
    if !diag_pass {
        failures.push(format!("diagonal max_dev {diag_dev:e} > {DIAGONAL_TOL:e} at tau = {diag_at}"));
    }
    let mut report = json!({
        "truncation": {"n_max": n_max, "m_max": m_max},
        "lambda2_scale": scale,
        "diagonal": {
            "points": times.len(),
            "max_dev": diag_dev,
            "at_tau": diag_at,
            "threshold": DIAGONAL_TOL,
            "pass": diag_pass,
        },
        "max_dev": diag_dev,
    });

    if cfg.flag("rk4") {
        let dt = positive(cfg, "rk4_dt")?;
        let opts = Rk4Options {
            halving_tol: Some(RK4_HALVING_TOL),
            record_every: ((1.0 / dt).round() as usize).max(1),
            ..Rk4Options::default()
        };
        let h = DiagonalHamiltonian::new(&sys, n_max, m_max);
        let run = evolve_rk4(&psi0, &h, cfg.float("rk4_tau"), dt, &opts)?;
        let exact: Vec<Complex64> = run
            .trace
            .tau
            .par_iter()
            .map(|&t| amplitude_exact(&analytic, t, &control).map(|s| s.value))
            .collect::<Result<_, _>>()?;
        let (dev, at) = max_deviation(
            run.trace
                .tau
                .iter()
                .zip(&run.trace.value)
                .zip(exact)
                .map(|((&t, &a), b)| (t, a, b)),
        );
        let pass = dev <= RK4_TOL;
        if !pass {
            failures.push(format!("rk4 max_dev {dev:e} > {RK4_TOL:e} at tau = {at}"));
        }
        report["rk4"] = json!({
            "tau": cfg.float("rk4_tau"),
            "dt": dt,
            "points": run.trace.len(),
            "max_dev": dev,
            "at_tau": at,
            "halving_change": run.halving_change,
            "threshold": RK4_TOL,
            "pass": pass,
        });
    }

    if cfg.flag("spectrum_check") {
        let t_final = match cfg.auto_float("spectral_t_final") {
            Some(t) => t,
            None if sys.kerr.lambda1 > 0.0 => (10.0 / sys.kerr.lambda1).ceil(),
            None => {
                return Err(CliError::Config(
                    "spectral_t_final = auto needs lambda1 > 0; set it explicitly".into(),
                ))
            }
        };
        let opts = SpectralOptions::default();
        let t_final = (t_final / opts.dt).ceil() * opts.dt;
        let checks = validate_effective_spectrum(&sys.params, &[(0, 0), (0, 1)], t_final, &opts)?;
        let rel_tol = positive(cfg, "spectral_rel_tol")?;
        let rows: Vec<Json> = checks
            .iter()
            .map(|c| {
                let shift = c.analytic_freq - sys.params.omega_c;
                let rel = c.deviation.abs() / shift.abs();
                let pass = c.deviation.abs() <= rel_tol * shift.abs();
                if !pass {
                    failures.push(format!(
                        "transition {:?}->{:?}: deviation {:e} exceeds {rel_tol} of shift {shift:e}",
                        c.lower, c.upper, c.deviation
                    ));
                }
                json!({
                    "lower": [c.lower.0, c.lower.1],
                    "upper": [c.upper.0, c.upper.1],
                    "analytic_freq": c.analytic_freq,
                    "numeric_freq": c.numeric_freq,
                    "deviation": c.deviation,
                    "relative_to_shift": rel,
                    "pass": pass,
                })
            })
            .collect();
        report["spectrum"] = json!({"t_final": t_final, "rel_tol": rel_tol, "transitions": rows});
    }

    report["pass"] = failures.is_empty().into();
    Ok(Report {
        summary: report,
        failed: (!failures.is_empty()).then(|| failures.join("; ")),
    })
}

fn poincare(cfg: &RunConfig) -> Result<Json, CliError> {
    let sys = system(cfg)?;
    let control = series_control(cfg);
    let period = match cfg.auto_float("period") {
        Some(_) => positive(cfg, "period")?,
        None if sys.params.delta != 0.0 => 2.0 * PI / sys.params.delta.abs(),
        None => return Err(CliError::Config("period = auto needs a nonzero delta".into())),
    };
    let (t_start, t_end) = (cfg.float("t_start"), cfg.float("t_end"));
    let section = poincare_section(&sys, &control, period, t_start, t_end)?;

    let mut csv = Csv::new(&["tau", "re_a", "re_dadt"]);
    for (t, (x, y)) in section.taus.iter().zip(&section.points) {
        csv.row(&[Cell::Float(*t), Cell::Float(*x), Cell::Float(*y)]);
    }
    let path = write_outputs(cfg, &csv)?;

    let explicit_gamma = matches!(cfg.source("gamma"), Source::File | Source::Flag);
    let compare = cfg
        .list("compare_kappa")
        .iter()
        .map(|&kappa| {
            let gamma = if explicit_gamma { sys.params.gamma } else { 0.01 * kappa };
            let p = ModelParams {
                kappa,
                gamma,
                ..sys.params
            };
            p.validate().map_err(|e| CliError::Config(e.to_string()))?;
            let s = poincare_section(&System::new(p, sys.state), &control, period, t_start, t_end)?;
            Ok(json!({"kappa": kappa, "gamma": gamma, "dispersion": s.dispersion()}))
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    Ok(json!({
        "csv": path.display().to_string(),
        "rows": csv.rows(),
        "period": period,
        "t_start": t_start,
        "t_end": t_end,
        "kappa": sys.params.kappa,
        "dispersion": section.dispersion(),
        "compare": compare,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(cmd: Command, flags: &[(&'static str, &str)]) -> RunConfig {
        let flags: Vec<_> = flags.iter().map(|(k, v)| (*k, v.to_string())).collect();
        RunConfig::resolve(cmd, &[], &flags, None).unwrap()
    }

    #[test]
    fn kerr_report_fields() {
        let r = kerr(&cfg(Command::Kerr, &[])).unwrap();
        let l1 = r["lambda1"].as_f64().unwrap();
        assert!((l1 - 0.010_557_638_888_888_889).abs() < 1e-15);
        assert_eq!(r["blockade_drive_ref"][0].as_f64().unwrap(), 2.0 * l1);
        assert_eq!(r["perturbative"], true);
    }

    #[test]
    fn comb_stops_at_window() {
        assert_eq!(comb(2.0, 7.0), vec![2.0, 4.0, 6.0]);
        assert!(comb(10.0, 5.0).is_empty());
    }

    #[test]
    fn corrupted_lambda2_fails_oracle() {
        let base = [("tau_max", "300"), ("oracle_step", "10")];
        let ok = oracle(&cfg(Command::Oracle, &base)).unwrap();
        assert!(ok.failed.is_none(), "{}", ok.summary);
        let bad = oracle(&cfg(Command::Oracle, &[base[0], base[1], ("lambda2_scale", "1.1")])).unwrap();
        assert!(bad.failed.is_some());
        assert_eq!(bad.summary["pass"], false);
    }

    #[test]
    fn config_errors_map_to_exit_two() {
        let c = cfg(Command::Evolve, &[("d_tau", "0")]);
        assert_eq!(evolve(&c).unwrap_err().exit_code(), 2);
        let c = cfg(Command::Poincare, &[("delta", "0")]);
        assert_eq!(poincare(&c).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn series_cap_reports_non_convergence() {
        let c = cfg(Command::Evolve, &[("m_max_cap", "2"), ("mbar", "5"), ("tau_max", "10"), ("d_tau", "1")]);
        let err = evolve(&c).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        assert!(err.to_string().contains("tau"), "{err}");
    }
}
