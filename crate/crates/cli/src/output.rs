//! CSV writers: `#`-prefixed `key=value` metadata, then a header row and data.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::Value;
use tmnoise::config::RunConfig;
use tmnoise::model::SystemParams;
use tmnoise::spectra::SpectrumResult;

pub const GIT_DESCRIBE: &str = env!("TMNOISE_GIT_DESCRIBE");

pub type Meta = Vec<(String, String)>;

pub fn kv(key: &str, value: impl ToString) -> (String, String) {
    (key.to_string(), value.to_string())
}

/// Shortest round-trip text of a float.
pub fn num(v: f64) -> String {
    format!("{v:e}")
}

pub struct OutDir {
    dir: PathBuf,
}

impl OutDir {
    pub fn create(dir: &Path) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Writes a table with a metadata header; returns the file path.
    pub fn table(&self, name: &str, meta: &Meta, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf, csv::Error> {
        let path = self.path(name);
        let mut file = BufWriter::new(File::create(&path)?);
        writeln!(file, "# git_describe={GIT_DESCRIBE}")?;
        for (k, v) in meta {
            writeln!(file, "# {k}={}", v.replace('\n', " "))?;
        }
        let mut w = csv::Writer::from_writer(file);
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        log::info!("wrote {}", path.display());
        Ok(path)
    }

    pub fn spectrum(&self, name: &str, spec: &SpectrumResult, extra: &Meta) -> Result<PathBuf, csv::Error> {
        let mut meta = spec.meta.pairs();
        meta.extend(extra.iter().cloned());
        let rows: Vec<Vec<String>> = spec
            .freq_hz()
            .iter()
            .zip(&spec.values)
            .map(|(f, v)| vec![num(*f), num(*v)])
            .collect();
        self.table(name, &meta, &["freq_hz", "psd_value"], &rows)
    }

    pub fn key_values(&self, name: &str, meta: &Meta, pairs: &Meta) -> Result<PathBuf, csv::Error> {
        let rows: Vec<Vec<String>> = pairs.iter().map(|(k, v)| vec![k.clone(), v.clone()]).collect();
        self.table(name, meta, &["key", "value"], &rows)
    }

    /// Sidecar `<stem>.meta.csv` with every resolved parameter.
    pub fn sidecar(&self, stem: &str, cfg: &RunConfig, params: &SystemParams, solver: &str, extra: &Meta) -> Result<PathBuf, csv::Error> {
        let mut pairs = vec![
            kv("git_describe", GIT_DESCRIBE),
            kv("version", env!("CARGO_PKG_VERSION")),
            kv("solver", solver),
            kv("convention", tmnoise::spectra::CONVENTION),
        ];
        pairs.extend(extra.iter().cloned());
        flatten("params", &serde_json::to_value(params).expect("parameters serialise"), &mut pairs);
        flatten("config", &serde_json::to_value(cfg).expect("config serialises"), &mut pairs);
        self.key_values(&format!("{stem}.meta.csv"), &Vec::new(), &pairs)
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Meta) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                flatten(&format!("{prefix}.{k}"), x, out);
            }
        }
        Value::Array(xs) => {
            for (i, x) in xs.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, out);
            }
        }
        Value::Null => {}
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

/// Rows of numbers from a CSV, skipping `#` lines and a non-numeric header.
pub fn read_numeric(path: &Path, columns: usize) -> Result<Vec<Vec<f64>>, String> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| format!("{}: {e}", path.display()))?;
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| format!("{}: {e}", path.display()))?;
        let parsed: Result<Vec<f64>, _> = rec.iter().take(columns).map(str::parse::<f64>).collect();
        match parsed {
            Ok(v) if v.len() == columns => rows.push(v),
            _ if i == 0 => continue,
            _ => return Err(format!("{}: line {} needs {columns} numeric columns", path.display(), i + 1)),
        }
    }
    if rows.is_empty() {
        return Err(format!("{}: no data rows", path.display()));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flatten_uses_dotted_paths() {
        let mut out = Vec::new();
        flatten("p", &serde_json::json!({"a": [1.5, {"b": "x"}], "n": null}), &mut out);
        assert_eq!(out, vec![kv("p.a[0]", "1.5"), kv("p.a[1].b", "x")]);
    }

    #[test]
    fn numeric_reader_skips_header_and_comments() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        fs::write(&path, "# note\nfreq_hz,psd_value\n1,2\n3e2,4\n").unwrap();
        assert_eq!(read_numeric(&path, 2).unwrap(), vec![vec![1.0, 2.0], vec![300.0, 4.0]]);
        fs::write(&path, "1,2\nx,4\n").unwrap();
        assert!(read_numeric(&path, 2).is_err());
    }
}
