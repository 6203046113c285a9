use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use intwave::{NonDimParams, PhysicalParams};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// JSON document written by every subcommand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report<T> {
    pub command: String,
    pub versions: BTreeMap<String, String>,
    pub params: PhysicalParams,
    pub nondim: NonDimParams,
    pub seed: u64,
    pub options: serde_json::Value,
    pub result: T,
}

pub fn versions() -> BTreeMap<String, String> {
    BTreeMap::from([
        ("intwave".to_string(), intwave::VERSION.to_string()),
        ("intwave-cli".to_string(), env!("CARGO_PKG_VERSION").to_string()),
    ])
}

/// Column names plus rows of already formatted cells.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    /// Append a numeric row; `f64` display is the shortest round-trip form.
    pub fn push_numbers(&mut self, values: &[f64]) {
        self.rows.push(values.iter().map(|v| v.to_string()).collect());
    }

    pub fn push(&mut self, cells: Vec<String>) {
        self.rows.push(cells);
    }
}

/// `<command>-<unix millis>`, or just `<command>` when timestamps are off.
pub fn output_stem(command: &str, timestamp: bool) -> String {
    if !timestamp {
        return command.to_string();
    }
    let millis = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0);
    format!("{command}-{millis}")
}

/// Paths of the files one run produced.
#[derive(Clone, Debug, PartialEq)]
pub struct Written {
    pub json: PathBuf,
    pub csv: Option<PathBuf>,
}

pub fn write_outputs<T: Serialize>(
    dir: &Path,
    stem: &str,
    report: &Report<T>,
    table: Option<&Table>,
) -> CliResult<Written> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let json = dir.join(format!("{stem}.json"));
    let text = serde_json::to_string_pretty(report).map_err(|e| CliError::Io(e.to_string()))?;
    fs::write(&json, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", json.display())))?;
    let csv = match table {
        Some(t) => {
            let path = dir.join(format!("{stem}.csv"));
            write_table(&path, t)?;
            Some(path)
        }
        None => None,
    };
    Ok(Written { json, csv })
}

pub fn write_table(path: &Path, table: &Table) -> CliResult<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_report<T: DeserializeOwned>(path: &Path) -> CliResult<Report<T>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn read_table(path: &Path) -> CliResult<Table> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let header = r.headers()?.iter().map(str::to_string).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|rec| rec.iter().map(str::to_string).collect()))
        .collect::<Result<_, _>>()?;
    Ok(Table { header, rows })
}

/// Rows deserialized by column name.
pub fn read_csv<T: DeserializeOwned>(path: &Path) -> CliResult<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}
