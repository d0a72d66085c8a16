//! Run configuration: a flat table of typed keys filled from defaults, an
//! optional preset, an optional `key=value` file and command-line flags, in
//! increasing order of precedence.

use std::collections::BTreeMap;
use std::fmt;

use optomech::analysis::{Preset, PresetId};

use crate::CliError;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "OPTOMECH_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Command {
    Kerr,
    Spectrum,
    Evolve,
    Oracle,
    Poincare,
}

impl Command {
    pub const ALL: [Command; 5] = [
        Command::Kerr,
        Command::Spectrum,
        Command::Evolve,
        Command::Oracle,
        Command::Poincare,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Kerr => "kerr",
            Command::Spectrum => "spectrum",
            Command::Evolve => "evolve",
            Command::Oracle => "oracle",
            Command::Poincare => "poincare",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Float,
    /// Float or `auto`.
    AutoFloat,
    Count,
    /// Count or `auto`.
    AutoCount,
    Flag,
    /// Comma-separated floats, possibly empty.
    FloatList,
    Text,
    /// Text or `none`.
    OptText,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Float(f64),
    Count(usize),
    Flag(bool),
    List(Vec<f64>),
    Text(String),
    Auto,
    None,
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Float(x) => write!(f, "{x}"),
            Value::Count(n) => write!(f, "{n}"),
            Value::Flag(b) => write!(f, "{b}"),
            Value::List(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                f.write_str(&parts.join(","))
            }
            Value::Text(s) => f.write_str(s),
            Value::Auto => f.write_str("auto"),
            Value::None => f.write_str("none"),
        }
    }
}

impl Value {
    fn to_json(&self) -> serde_json::Value {
        use serde_json::json;
        match self {
            Value::Float(x) => json!(x),
            Value::Count(n) => json!(n),
            Value::Flag(b) => json!(b),
            Value::List(v) => json!(v),
            Value::Text(s) => json!(s),
            Value::Auto => json!("auto"),
            Value::None => serde_json::Value::Null,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Default,
    Env,
    Preset,
    /// Filled in from other keys (γ from κ).
    Derived,
    File,
    Flag,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Default => "default",
            Source::Env => "env",
            Source::Preset => "preset",
            Source::Derived => "derived",
            Source::File => "file",
            Source::Flag => "flag",
        }
    }
}

pub struct Key {
    pub name: &'static str,
    pub flag: &'static str,
    pub kind: Kind,
    pub default: &'static str,
    pub help: &'static str,
    /// Commands that take this key as a flag. Empty means all.
    pub commands: &'static [Command],
}

use Command::*;

const ALL: &[Command] = &[];
const SERIES: &[Command] = &[Evolve, Oracle, Poincare];

pub const KEYS: &[Key] = &[
    Key { name: "preset", flag: "preset", kind: Kind::OptText, default: "none", help: "Named parameter set (fig2a, fig2b, fig3, fig4, fig5, fig6-top, fig6-bottom)", commands: ALL },
    Key { name: "omega_c", flag: "omega-c", kind: Kind::Float, default: "1", help: "Cavity frequency (full Hamiltonian only)", commands: ALL },
    Key { name: "omega", flag: "omega", kind: Kind::Float, default: "1", help: "Mechanical frequency", commands: ALL },
    Key { name: "g1", flag: "g1", kind: Kind::Float, default: "0.1", help: "Linear coupling", commands: ALL },
    Key { name: "g2", flag: "g2", kind: Kind::Float, default: "0.015", help: "Quadratic coupling", commands: ALL },
    Key { name: "g3", flag: "g3", kind: Kind::Float, default: "0.005", help: "Cubic coupling", commands: ALL },
    Key { name: "delta", flag: "delta", kind: Kind::Float, default: "1", help: "Detuning", commands: ALL },
    Key { name: "kappa", flag: "kappa", kind: Kind::Float, default: "0.01", help: "Optical decay rate", commands: ALL },
    Key { name: "gamma", flag: "gamma", kind: Kind::AutoFloat, default: "auto", help: "Mechanical decay rate; auto is 0.01 kappa", commands: ALL },
    Key { name: "alpha_re", flag: "alpha-re", kind: Kind::Float, default: "2.23606797749979", help: "Real part of the coherent amplitude", commands: SERIES },
    Key { name: "alpha_im", flag: "alpha-im", kind: Kind::Float, default: "0", help: "Imaginary part of the coherent amplitude", commands: SERIES },
    Key { name: "mbar", flag: "mbar", kind: Kind::Float, default: "1", help: "Mean thermal phonon number", commands: SERIES },
    Key { name: "weight_tail_tol", flag: "weight-tail-tol", kind: Kind::Float, default: "1e-12", help: "Neglected thermal weight allowed in the series", commands: SERIES },
    Key { name: "term_tol", flag: "term-tol", kind: Kind::Float, default: "1e-14", help: "Last series term allowed", commands: SERIES },
    Key { name: "m_max_cap", flag: "m-max-cap", kind: Kind::AutoCount, default: "auto", help: "Hard cap on phonon terms in the series", commands: SERIES },
    Key { name: "tau_max", flag: "tau-max", kind: Kind::Float, default: "1500", help: "End of the time grid", commands: &[Evolve, Oracle] },
    Key { name: "d_tau", flag: "d-tau", kind: Kind::Float, default: "0.1", help: "Time grid step", commands: &[Evolve] },
    Key { name: "n_max", flag: "n-max", kind: Kind::Count, default: "3", help: "Highest photon number listed", commands: &[Spectrum] },
    Key { name: "m_max", flag: "m-max", kind: Kind::Count, default: "3", help: "Highest phonon number listed", commands: &[Spectrum] },
    Key { name: "approx", flag: "approx", kind: Kind::Flag, default: "false", help: "Add long-time approximation columns", commands: &[Evolve] },
    Key { name: "prominence_floor", flag: "prominence-floor", kind: Kind::Float, default: "1e-3", help: "Minimum prominence of a detected revival", commands: &[Evolve] },
    Key { name: "period", flag: "period", kind: Kind::AutoFloat, default: "auto", help: "Stroboscopic period; auto is 2 pi / delta", commands: &[Poincare] },
    Key { name: "t_start", flag: "t-start", kind: Kind::Float, default: "0", help: "First section time", commands: &[Poincare] },
    Key { name: "t_end", flag: "t-end", kind: Kind::Float, default: "2000", help: "Last section time", commands: &[Poincare] },
    Key { name: "compare_kappa", flag: "compare-kappa", kind: Kind::FloatList, default: "", help: "Extra kappa values whose dispersion is reported", commands: &[Poincare] },
    Key { name: "oracle_step", flag: "oracle-step", kind: Kind::Float, default: "1", help: "Spacing of the diagonal-oracle comparison times", commands: &[Oracle] },
    Key { name: "rk4", flag: "rk4", kind: Kind::Flag, default: "false", help: "Also integrate the diagonal generator with RK4", commands: &[Oracle] },
    Key { name: "rk4_tau", flag: "rk4-tau", kind: Kind::Float, default: "50", help: "RK4 integration time", commands: &[Oracle] },
    Key { name: "rk4_dt", flag: "rk4-dt", kind: Kind::Float, default: "0.001", help: "RK4 step", commands: &[Oracle] },
    Key { name: "spectrum_check", flag: "spectrum-check", kind: Kind::Flag, default: "false", help: "Also check the averaged spectrum against the full Hamiltonian", commands: &[Oracle] },
    Key { name: "spectral_t_final", flag: "spectral-t-final", kind: Kind::AutoFloat, default: "auto", help: "Integration time of the spectral check; auto is ceil(10 / lambda1)", commands: &[Oracle] },
    Key { name: "spectral_rel_tol", flag: "spectral-rel-tol", kind: Kind::Float, default: "0.2", help: "Allowed error of a transition shift, relative to the shift", commands: &[Oracle] },
    Key { name: "lambda2_scale", flag: "lambda2-scale", kind: Kind::Float, default: "1", help: "Factor applied to lambda2 on the analytic side only", commands: &[Oracle] },
    Key { name: "out_dir", flag: "out-dir", kind: Kind::Text, default: ".", help: "Output directory (default from OPTOMECH_OUT_DIR)", commands: &[Spectrum, Evolve, Poincare] },
    Key { name: "stem", flag: "stem", kind: Kind::OptText, default: "none", help: "Output file stem; default is [preset_]command", commands: &[Spectrum, Evolve, Poincare] },
];

const PHYSICAL: [&str; 8] = ["omega_c", "omega", "g1", "g2", "g3", "delta", "kappa", "gamma"];

pub fn key(name: &str) -> Option<&'static Key> {
    KEYS.iter().find(|k| k.name == name)
}

impl Key {
    pub fn applies_to(&self, cmd: Command) -> bool {
        self.commands.is_empty() || self.commands.contains(&cmd)
    }

    pub fn parse(&self, raw: &str) -> Result<Value, String> {
        let raw = raw.trim();
        let float = |s: &str| -> Result<f64, String> {
            let x: f64 = s.trim().parse().map_err(|_| format!("'{s}' is not a number"))?;
            if x.is_finite() {
                Ok(x)
            } else {
                Err(format!("'{s}' is not finite"))
            }
        };
        let count = |s: &str| -> Result<usize, String> {
            s.parse().map_err(|_| format!("'{s}' is not a nonnegative integer"))
        };
        match self.kind {
            Kind::Float => float(raw).map(Value::Float),
            Kind::AutoFloat if raw == "auto" => Ok(Value::Auto),
            Kind::AutoFloat => float(raw).map(Value::Float),
            Kind::Count => count(raw).map(Value::Count),
            Kind::AutoCount if raw == "auto" => Ok(Value::Auto),
            Kind::AutoCount => count(raw).map(Value::Count),
            Kind::Flag => match raw {
                "true" | "1" | "yes" => Ok(Value::Flag(true)),
                "false" | "0" | "no" => Ok(Value::Flag(false)),
                _ => Err(format!("'{raw}' is not a boolean")),
            },
            Kind::FloatList if raw.is_empty() => Ok(Value::List(Vec::new())),
            Kind::FloatList => raw.split(',').map(float).collect::<Result<_, _>>().map(Value::List),
            Kind::Text if raw.is_empty() => Err("value is empty".into()),
            Kind::Text => Ok(Value::Text(raw.to_owned())),
            Kind::OptText if raw == "none" || raw.is_empty() => Ok(Value::None),
            Kind::OptText => Ok(Value::Text(raw.to_owned())),
        }
    }
}

/// Parse a `key=value` file. Blank lines and `#` comments are skipped; keys
/// must be known and appear once.
pub fn parse_file(origin: &str, text: &str) -> Result<Vec<(&'static str, Value)>, CliError> {
    let mut out: Vec<(&'static str, Value)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let at = format!("{origin}:{}", i + 1);
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((name, raw)) = line.split_once('=') else {
            return Err(CliError::Config(format!("{at}: expected key=value, got '{line}'")));
        };
        let name = name.trim();
        let k = key(name).ok_or_else(|| CliError::Config(format!("{at}: unknown key '{name}'")))?;
        if out.iter().any(|(n, _)| *n == k.name) {
            return Err(CliError::Config(format!("{at}: key '{name}' given twice")));
        }
        let value = k
            .parse(raw)
            .map_err(|e| CliError::Config(format!("{at}: key '{name}': {e}")))?;
        out.push((k.name, value));
    }
    Ok(out)
}

/// Fully resolved configuration with the origin of every value.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    values: BTreeMap<&'static str, (Value, Source)>,
}

impl RunConfig {
    /// Layer defaults, environment, preset, file and flags.
    ///
    /// `flags` holds raw flag values keyed by config name; `file` holds the
    /// already parsed file entries.
    pub fn resolve(
        command: Command,
        file: &[(&'static str, Value)],
        flags: &[(&'static str, String)],
        env_out_dir: Option<&str>,
    ) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for k in KEYS {
            let v = k.parse(k.default).expect("defaults parse");
            values.insert(k.name, (v, Source::Default));
        }
        if let Some(dir) = env_out_dir.filter(|d| !d.is_empty()) {
            values.insert("out_dir", (Value::Text(dir.to_owned()), Source::Env));
        }

        let mut explicit: Vec<(&'static str, Value, Source)> =
            file.iter().map(|(n, v)| (*n, v.clone(), Source::File)).collect();
        for (name, raw) in flags {
            let k = key(name).ok_or_else(|| CliError::Config(format!("unknown key '{name}'")))?;
            let v = k
                .parse(raw)
                .map_err(|e| CliError::Config(format!("--{}: {e}", k.flag)))?;
            explicit.push((k.name, v, Source::Flag));
        }

        let preset = explicit
            .iter()
            .rev()
            .find(|(n, _, _)| *n == "preset")
            .map(|(_, v, _)| v.clone());
        if let Some(Value::Text(id)) = &preset {
            let id: PresetId = id
                .parse()
                .map_err(|e: optomech::AnalysisError| CliError::Config(format!("key 'preset': {e}")))?;
            let p = Preset::new(id);
            let b = p.base;
            for (name, x) in PHYSICAL.iter().zip([b.omega_c, b.omega, b.g1, b.g2, b.g3, b.delta, b.kappa, b.gamma]) {
                values.insert(name, (Value::Float(x), Source::Preset));
            }
            let alpha = p.initial_state(0.0).alpha;
            values.insert("alpha_re", (Value::Float(alpha.re), Source::Preset));
            values.insert("alpha_im", (Value::Float(alpha.im), Source::Preset));
        }
        // File entries come first in `explicit`, so flags win.
        for (name, v, src) in explicit {
            values.insert(name, (v, src));
        }

        let mut cfg = Self { command, values };
        if matches!(cfg.get("gamma"), Value::Auto) || cfg.source("gamma") == Source::Preset {
            let kappa = cfg.float("kappa");
            let src = if cfg.source("kappa") == Source::Preset {
                Source::Preset
            } else {
                Source::Derived
            };
            cfg.values.insert("gamma", (Value::Float(0.01 * kappa), src));
        }
        Ok(cfg)
    }

    pub fn get(&self, name: &str) -> &Value {
        &self.values.get(name).unwrap_or_else(|| panic!("no key {name}")).0
    }

    pub fn source(&self, name: &str) -> Source {
        self.values.get(name).unwrap_or_else(|| panic!("no key {name}")).1
    }

    pub fn float(&self, name: &str) -> f64 {
        match self.get(name) {
            Value::Float(x) => *x,
            other => panic!("{name} is not a number: {other:?}"),
        }
    }

    /// `None` for `auto`.
    pub fn auto_float(&self, name: &str) -> Option<f64> {
        match self.get(name) {
            Value::Auto => None,
            _ => Some(self.float(name)),
        }
    }

    pub fn count(&self, name: &str) -> usize {
        match self.get(name) {
            Value::Count(n) => *n,
            other => panic!("{name} is not a count: {other:?}"),
        }
    }

    pub fn auto_count(&self, name: &str) -> Option<usize> {
        match self.get(name) {
            Value::Auto => None,
            _ => Some(self.count(name)),
        }
    }

    pub fn flag(&self, name: &str) -> bool {
        matches!(self.get(name), Value::Flag(true))
    }

    pub fn list(&self, name: &str) -> &[f64] {
        match self.get(name) {
            Value::List(v) => v,
            other => panic!("{name} is not a list: {other:?}"),
        }
    }

    pub fn text(&self, name: &str) -> Option<&str> {
        match self.get(name) {
            Value::Text(s) => Some(s),
            _ => None,
        }
    }

    /// Values as a JSON object in key-table order.
    pub fn values_json(&self) -> serde_json::Value {
        KEYS.iter()
            .map(|k| (k.name.to_owned(), self.get(k.name).to_json()))
            .collect::<serde_json::Map<_, _>>()
            .into()
    }

    pub fn sources_json(&self) -> serde_json::Value {
        KEYS.iter()
            .map(|k| (k.name.to_owned(), self.source(k.name).as_str().into()))
            .collect::<serde_json::Map<_, _>>()
            .into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_table_is_consistent() {
        for (i, k) in KEYS.iter().enumerate() {
            assert_eq!(k.flag, k.name.replace('_', "-"));
            assert!(k.parse(k.default).is_ok(), "{}", k.name);
            assert!(KEYS[..i].iter().all(|o| o.name != k.name));
        }
    }

    #[test]
    fn defaults_match_reference_parameters() {
        let cfg = RunConfig::resolve(Command::Evolve, &[], &[], None).unwrap();
        let p = optomech::ModelParams::default();
        assert_eq!(cfg.float("g1"), p.g1);
        assert_eq!(cfg.float("g2"), p.g2);
        assert_eq!(cfg.float("g3"), p.g3);
        assert_eq!(cfg.float("kappa"), p.kappa);
        assert_eq!(cfg.float("gamma"), p.gamma);
        assert_eq!(cfg.source("gamma"), Source::Derived);
        assert_eq!(cfg.float("alpha_re"), 5f64.sqrt());
        assert_eq!(cfg.text("out_dir"), Some("."));
    }

    #[test]
    fn file_parsing() {
        let text = "# comment\n\ng1 = 0.2  # trailing\nrk4=true\ncompare_kappa = 0.01, 0.001\n";
        let got = parse_file("f", text).unwrap();
        assert_eq!(
            got,
            vec![
                ("g1", Value::Float(0.2)),
                ("rk4", Value::Flag(true)),
                ("compare_kappa", Value::List(vec![0.01, 0.001])),
            ]
        );
        let err = parse_file("f", "g1=0.1\nbogus=3\n").unwrap_err().to_string();
        assert!(err.contains("f:2") && err.contains("bogus"), "{err}");
        assert!(parse_file("f", "g1 0.1").is_err());
        assert!(parse_file("f", "g1=abc").unwrap_err().to_string().contains("g1"));
        assert!(parse_file("f", "g1=1\ng1=2").is_err());
        assert!(parse_file("f", "g1=inf").is_err());
    }

    #[test]
    fn precedence_and_preset() {
        let file = parse_file("f", "preset=fig5\ng1=0.2\nkappa=0.02").unwrap();
        let flags = [("g1", "0.3".to_string())];
        let cfg = RunConfig::resolve(Command::Evolve, &file, &flags, Some("/tmp/x")).unwrap();
        assert_eq!(cfg.float("g1"), 0.3);
        assert_eq!(cfg.source("g1"), Source::Flag);
        assert_eq!(cfg.float("g2"), 0.02);
        assert_eq!(cfg.source("g2"), Source::Preset);
        assert_eq!(cfg.float("kappa"), 0.02);
        assert!((cfg.float("gamma") - 2e-4).abs() < 1e-18);
        assert_eq!(cfg.text("out_dir"), Some("/tmp/x"));
        assert_eq!(cfg.source("out_dir"), Source::Env);

        let explicit = parse_file("f", "preset=fig5\ngamma=0.5").unwrap();
        let cfg = RunConfig::resolve(Command::Evolve, &explicit, &[], None).unwrap();
        assert_eq!(cfg.float("gamma"), 0.5);
    }

    #[test]
    fn bad_preset_and_flag() {
        let file = parse_file("f", "preset=fig9").unwrap();
        assert!(matches!(
            RunConfig::resolve(Command::Kerr, &file, &[], None),
            Err(CliError::Config(_))
        ));
        let err = RunConfig::resolve(Command::Kerr, &[], &[("g2", "x".into())], None).unwrap_err();
        assert!(err.to_string().contains("--g2"));
    }
}
