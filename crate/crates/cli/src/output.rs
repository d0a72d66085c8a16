use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::json;

use crate::config::RunConfig;
use crate::CliError;

/// 17 significant digits, round-trip exact.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV text with a fixed header, '.' decimals and LF line endings.
pub struct Csv {
    text: String,
    columns: usize,
    rows: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self {
            text: format!("{}\n", header.join(",")),
            columns: header.len(),
            rows: 0,
        }
    }

    pub fn row(&mut self, cells: &[Cell]) {
        debug_assert_eq!(cells.len(), self.columns);
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            match c {
                Cell::Int(n) => write!(self.text, "{n}").expect("write to String"),
                Cell::Float(x) => self.text.push_str(&fmt_f64(*x)),
            }
        }
        self.text.push('\n');
        self.rows += 1;
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

pub enum Cell {
    Int(u64),
    Float(f64),
}

/// `<out_dir>/<stem>`, stem defaulting to `[preset_]command`.
pub fn output_stem(cfg: &RunConfig) -> PathBuf {
    let dir = Path::new(cfg.text("out_dir").unwrap_or("."));
    let stem = match (cfg.text("stem"), cfg.text("preset")) {
        (Some(s), _) => s.to_owned(),
        (None, Some(p)) => format!("{p}_{}", cfg.command.name()),
        (None, None) => cfg.command.name().to_owned(),
    };
    dir.join(stem)
}

/// Write `<stem>.csv` and the `<stem>.meta.json` sidecar; returns the CSV path.
pub fn write_outputs(cfg: &RunConfig, csv: &Csv) -> Result<PathBuf, CliError> {
    let stem = output_stem(cfg);
    if let Some(dir) = stem.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    let csv_path = stem.with_extension("csv");
    fs::write(&csv_path, csv.as_str()).map_err(|e| CliError::Io(format!("{}: {e}", csv_path.display())))?;

    let created = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let meta = json!({
        "tool": "optomech",
        "version": env!("CARGO_PKG_VERSION"),
        "command": cfg.command.name(),
        "created_unix": created,
        "rows": csv.rows(),
        "config": cfg.values_json(),
        "sources": cfg.sources_json(),
    });
    let meta_path = stem.with_extension("meta.json");
    let text = serde_json::to_string_pretty(&meta).expect("meta is plain JSON") + "\n";
    fs::write(&meta_path, text).map_err(|e| CliError::Io(format!("{}: {e}", meta_path.display())))?;
    log::info!("wrote {} and {}", csv_path.display(), meta_path.display());
    Ok(csv_path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, -1.0 / 3.0, 5f64.sqrt(), 1e-300, 0.0] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            assert!(!s.contains(','));
        }
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn csv_layout() {
        let mut csv = Csv::new(&["n", "x"]);
        csv.row(&[Cell::Int(3), Cell::Float(0.5)]);
        assert_eq!(csv.as_str(), "n,x\n3,5.0000000000000000e-1\n");
        assert_eq!(csv.rows(), 1);
    }
}
