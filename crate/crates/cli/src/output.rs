//! CSV and JSON artifacts with an embedded config echo, written atomically.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::config::{ExperimentConfig, Format};
use crate::error::CliError;

/// Rows of one CSV artifact; cells are already formatted.
pub struct Table {
    pub header: &'static [&'static str],
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &'static [&'static str]) -> Self {
        Table {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

pub fn cell<T: std::fmt::Display>(v: T) -> String {
    v.to_string()
}

/// Shortest round-trip form, with an exponent for very small or large magnitudes.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

/// Empty for `None`.
pub fn opt_cell<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

/// First line `# config: <json>`, then the header and rows.
pub fn render_csv(cfg: &ExperimentConfig, table: &Table) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::validation("out", e);
    w.write_record(table.header).map_err(io)?;
    for row in &table.rows {
        w.write_record(row).map_err(io)?;
    }
    let body = w
        .into_inner()
        .map_err(|e| CliError::validation("out", e.error()))?;
    let mut text = format!("# config: {}\n", cfg.echo());
    text.push_str(std::str::from_utf8(&body).expect("csv output is utf-8"));
    Ok(text)
}

pub fn render_json<T: Serialize>(cfg: &ExperimentConfig, key: &str, result: &T) -> String {
    let mut doc = serde_json::Map::new();
    doc.insert(
        "config".into(),
        serde_json::to_value(cfg).expect("config serializes"),
    );
    doc.insert(
        key.into(),
        serde_json::to_value(result).expect("result serializes"),
    );
    let mut text = serde_json::to_string_pretty(&Value::Object(doc)).expect("json serializes");
    text.push('\n');
    text
}

/// Writes `bytes` to a temporary file beside `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let err = |e: &dyn std::fmt::Display| {
        CliError::validation("out", format!("cannot write {}: {e}", path.display()))
    };
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| err(&e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| err(&e))?;
    tmp.write_all(bytes).map_err(|e| err(&e))?;
    tmp.persist(path).map_err(|e| err(&e.error))?;
    Ok(())
}

/// Where artifacts go: files under a directory, or standard output.
pub enum Sink<'a> {
    Dir(PathBuf),
    Stdout(&'a mut dyn Write),
}

impl Sink<'_> {
    /// Emits one artifact named `stem` in the configured format.
    pub fn emit<T: Serialize>(
        &mut self,
        cfg: &ExperimentConfig,
        stem: &str,
        table: &Table,
        result: &T,
    ) -> Result<(), CliError> {
        let (ext, text) = match cfg.format {
            Format::Csv => ("csv", render_csv(cfg, table)?),
            Format::Json => ("json", render_json(cfg, "result", result)),
        };
        self.write(&format!("{stem}.{ext}"), &text)
    }

    pub fn write(&mut self, rel: &str, text: &str) -> Result<(), CliError> {
        match self {
            Sink::Dir(dir) => write_atomic(&dir.join(rel), text.as_bytes()),
            Sink::Stdout(w) => w
                .write_all(text.as_bytes())
                .map_err(|e| CliError::validation("out", format!("cannot write output: {e}"))),
        }
    }

    pub fn is_dir(&self) -> bool {
        matches!(self, Sink::Dir(_))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_starts_with_config_echo_then_header() {
        let cfg = ExperimentConfig::default();
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![cell(1), opt_cell::<f64>(None)]);
        assert_eq!(num(1.5e-13), "1.5e-13");
        let text = render_csv(&cfg, &t).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# config: {"));
        assert_eq!(&lines[1..], ["a,b", "1,"]);
    }

    #[test]
    fn atomic_write_replaces_and_leaves_no_temporaries() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested/out.csv");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "two");
        assert_eq!(
            std::fs::read_dir(path.parent().unwrap()).unwrap().count(),
            1
        );
    }
}
