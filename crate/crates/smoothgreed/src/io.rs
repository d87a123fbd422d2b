//! Reading inputs and writing CSV, JSON and JSON-lines outputs.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use smoothgreed_core::instances::SCHEMA_VERSION;
use smoothgreed_core::ScalarConcave;

use crate::{CliError, VERSION};

/// `# smoothgreed <version> schema=v1 command=<cmd> seed=<seed|-> flags=k=v,...`
pub fn provenance(command: &str, seed: Option<u64>, flags: &[(&str, String)]) -> String {
    let seed = seed.map_or_else(|| "-".to_string(), |s| s.to_string());
    let flags: Vec<String> = flags.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!("# smoothgreed {VERSION} schema={SCHEMA_VERSION} command={command} seed={seed} flags={}", flags.join(","))
}

/// Shortest representation that parses back to the same value; empty for NaN.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        v.to_string()
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(CliError::io(path))?))
}

pub fn write_csv(path: &Path, provenance: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut out = create(path)?;
    writeln!(out, "{provenance}").map_err(CliError::io(path))?;
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| CliError::Io { path: path.to_path_buf(), source: e.into() };
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row).map_err(csv_err)?;
    }
    w.flush().map_err(CliError::io(path))
}

/// Reads a CSV written by [`write_csv`]: comment lines are skipped.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>), CliError> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path).map_err(|e| CliError::BadInput(e.to_string()))?;
    let header = r.headers().map_err(|e| CliError::BadInput(e.to_string()))?.iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|rec| rec.iter().map(String::from).collect()))
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::BadInput(e.to_string()))?;
    Ok((header, rows))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e.into() })?;
    writeln!(out).map_err(CliError::io(path))?;
    out.flush().map_err(CliError::io(path))
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), CliError> {
    let mut out = create(path)?;
    for item in items {
        serde_json::to_writer(&mut out, item).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e.into() })?;
        writeln!(out).map_err(CliError::io(path))?;
    }
    out.flush().map_err(CliError::io(path))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    serde_json::from_str(&text).map_err(|e| CliError::BadInput(format!("{}: {e}", path.display())))
}

/// `prefix` with `suffix` appended to the file name.
pub fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// A scalar objective given as a catalog name, inline JSON, or a JSON file.
pub fn parse_scalar(spec: &str) -> Result<ScalarConcave, CliError> {
    let f = match spec {
        "cap" | "adwords" => ScalarConcave::cap(),
        "log1p" => ScalarConcave::log1p(),
        "sqrt" => ScalarConcave::sqrt(),
        "three_piece" | "fig1a" => ScalarConcave::three_piece(),
        "linear" => ScalarConcave::linear(1.0),
        s if s.trim_start().starts_with('{') => {
            serde_json::from_str(s).map_err(|e| CliError::BadInput(format!("objective: {e}")))?
        }
        name if !name.contains(['/', '\\', '.']) && !Path::new(name).exists() => {
            return Err(CliError::BadInput(format!("unknown objective {name:?}")))
        }
        path => read_json(Path::new(path))?,
    };
    f.validate()?;
    Ok(f)
}
