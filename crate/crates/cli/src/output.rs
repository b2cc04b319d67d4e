use crate::Common;
use serde::Serialize;
use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

#[derive(Debug)]
pub enum Failure {
    Parse(String),
    Unsupported(String),
    Invariant(String),
    Other(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Parse(_) => 2,
            Failure::Unsupported(_) => 3,
            Failure::Invariant(_) => 4,
            Failure::Other(_) => 1,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Failure::Parse(_) => "parse",
            Failure::Unsupported(_) => "unsupported",
            Failure::Invariant(_) => "invariant",
            Failure::Other(_) => "other",
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Parse(m) | Failure::Unsupported(m) | Failure::Invariant(m) | Failure::Other(m) => m,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} failure: {}", self.kind(), self.message())
    }
}

impl From<mexp::Error> for Failure {
    fn from(e: mexp::Error) -> Self {
        use mexp::Error::*;
        let msg = e.to_string();
        match e {
            Empty | Degenerate(..) | Overlap(..) | Parse(_) | Duplicate(_) => Failure::Parse(msg),
            Unsupported(_) => Failure::Unsupported(msg),
            IllConditioned { .. } | Infeasible(_) | DegenerateTuple(_) | NullElement => Failure::Invariant(msg),
            _ => Failure::Other(msg),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Other(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Other(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Other(e.to_string())
    }
}

/// Output directory plus the list of files written during the run.
pub struct Run {
    dir: PathBuf,
    files: Vec<String>,
    report: serde_json::Map<String, serde_json::Value>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    config: &'a Common,
    options: serde_json::Value,
    mexp_threads: Option<String>,
    status: &'a str,
    exit_code: u8,
    error: Option<String>,
    outputs: &'a [String],
    report: &'a serde_json::Map<String, serde_json::Value>,
}

/// Shortest round-trip text; scientific notation outside `[1e-4, 1e15)`.
pub fn fmt_f(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

impl Run {
    pub fn create(dir: &Path) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Run { dir: dir.to_path_buf(), files: Vec::new(), report: serde_json::Map::new() })
    }

    /// Adds a summary value to stdout and to the manifest.
    pub fn report(&mut self, key: &str, value: impl Serialize) -> Result<(), Failure> {
        let v = serde_json::to_value(value)?;
        println!("{key}: {v}");
        self.report.insert(key.to_string(), v);
        Ok(())
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), Failure> {
        let mut w = csv::Writer::from_path(self.dir.join(name))?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn json(&mut self, name: &str, value: &impl Serialize) -> Result<(), Failure> {
        let mut text = serde_json::to_string(value)?;
        text.push('\n');
        fs::write(self.dir.join(name), text)?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn write_manifest(
        &self,
        command: &str,
        config: &Common,
        options: serde_json::Value,
        failure: Option<&Failure>,
    ) -> io::Result<()> {
        let manifest = Manifest {
            command,
            version: mexp::VERSION,
            config,
            options,
            mexp_threads: std::env::var("MEXP_THREADS").ok(),
            status: if failure.is_some() { "error" } else { "ok" },
            exit_code: failure.map_or(0, Failure::code),
            error: failure.map(|f| f.to_string()),
            outputs: &self.files,
            report: &self.report,
        };
        let mut text = serde_json::to_string_pretty(&manifest).map_err(io::Error::other)?;
        text.push('\n');
        fs::write(self.dir.join("manifest.json"), text)
    }
}
