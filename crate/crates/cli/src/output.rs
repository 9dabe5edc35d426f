use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Debug)]
pub enum CliError {
    Core(witnessforge::Error),
    Usage(String),
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if !e.is_precondition() => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
        }
    }
}

impl From<witnessforge::Error> for CliError {
    fn from(e: witnessforge::Error) -> Self {
        CliError::Core(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub params: Map<String, Value>,
    pub seed: Option<u64>,
    pub output_path: Option<String>,
    pub format: &'static str,
}

#[derive(Serialize)]
struct Envelope<'a, R: Serialize> {
    tool: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    report: &'a R,
}

pub fn envelope_json<R: Serialize>(config: &RunConfig, report: &R) -> String {
    let env = Envelope {
        tool: "witnessforge",
        version: env!("CARGO_PKG_VERSION"),
        config,
        report,
    };
    let mut s = serde_json::to_string_pretty(&env).expect("report values are serializable");
    s.push('\n');
    s
}

/// One row per grid point; cells are JSON scalars.
#[derive(Debug, Serialize)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(csv_cell).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Number(n) if n.is_f64() => format!("{:.16e}", n.as_f64().unwrap()),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn write_output(path: Option<&Path>, contents: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, contents).map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => io::stdout()
            .write_all(contents.as_bytes())
            .map_err(|source| CliError::Io {
                path: PathBuf::from("<stdout>"),
                source,
            }),
    }
}

/// Where the JSON summary of a CSV output goes: next to the CSV file, or
/// stderr when the CSV goes to stdout.
pub fn write_summary(csv_path: Option<&Path>, contents: &str) -> CliResult<()> {
    match csv_path {
        Some(p) => {
            let mut name = p.as_os_str().to_owned();
            name.push(".summary.json");
            let target = PathBuf::from(name);
            fs::write(&target, contents).map_err(|source| CliError::Io {
                path: target,
                source,
            })
        }
        None => {
            eprint!("{contents}");
            Ok(())
        }
    }
}
