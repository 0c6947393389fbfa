//! CSV result tables with a `#` provenance header, written atomically.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::config::Scenario;

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("row {row} has {got} values, table has {expected} columns")]
    NotRectangular { row: usize, expected: usize, got: usize },
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// Header lines identifying what produced a table.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub version: String,
    pub scenario: String,
    pub scenario_hash: String,
    pub conventions: String,
    /// Unix time of the run; omitted unless requested so bodies stay reproducible.
    pub timestamp: Option<u64>,
}

impl Provenance {
    pub fn for_scenario(scenario: &Scenario, with_timestamp: bool) -> Self {
        let timestamp = with_timestamp.then(|| {
            std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
        });
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            scenario: scenario.name.clone(),
            scenario_hash: scenario.hash(),
            conventions: scenario.convention_summary(),
            timestamp,
        }
    }
}

/// Named numeric columns, each name carrying its unit suffix.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub provenance: Option<Provenance>,
    /// Free-form `#` lines placed after the provenance block.
    pub notes: Vec<String>,
}

impl ResultTable {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
            provenance: None,
            notes: Vec::new(),
        }
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = Some(provenance);
        self
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.notes.push(line.into());
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<(), OutputError> {
        if row.len() != self.columns.len() {
            return Err(OutputError::NotRectangular {
                row: self.rows.len(),
                expected: self.columns.len(),
                got: row.len(),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// Column-name line followed by the numeric rows.
    pub fn body(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                let _ = write!(s, "{v:e}");
            }
            s.push('\n');
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        if let Some(p) = &self.provenance {
            let _ = writeln!(s, "# eitfiber {}", p.version);
            let _ = writeln!(s, "# scenario: {}", p.scenario);
            let _ = writeln!(s, "# scenario_sha256: {}", p.scenario_hash);
            let _ = writeln!(s, "# conventions: {}", p.conventions);
            if let Some(t) = p.timestamp {
                let _ = writeln!(s, "# unix_time: {t}");
            }
        }
        for n in &self.notes {
            let _ = writeln!(s, "# {n}");
        }
        s.push_str(&self.body());
        s
    }

    /// Write to `path` through a temporary file in the same directory.
    pub fn write(&self, path: &Path) -> Result<(), OutputError> {
        write_atomic(path, self.to_csv().as_bytes())
    }
}

/// Replace `path` with `contents` in one rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), OutputError> {
    let io = |source| OutputError::Io { path: path.to_path_buf(), source };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Gnuplot script plotting `y` columns of a CSV against column `x`.
pub fn gnuplot_script(csv: &str, table: &ResultTable, x: &str, y: &[&str]) -> Option<String> {
    let col = |name: &str| table.columns.iter().position(|c| c == name).map(|i| i + 1);
    let xi = col(x)?;
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set datafile commentschars '#'");
    let _ = writeln!(s, "set key autotitle columnhead");
    let _ = writeln!(s, "set xlabel '{x}'");
    let mut parts = Vec::new();
    for name in y {
        parts.push(format!("'{csv}' using {xi}:{} with lines", col(name)?));
    }
    let _ = writeln!(s, "plot {}", parts.join(", \\\n     "));
    Some(s)
}
