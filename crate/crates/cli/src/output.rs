//! Result records and CSV artifacts.
//!
//! Everything is written into a hidden staging directory inside the output
//! directory and moved into place only once the record itself has been
//! written. A failed run leaves the output directory as it found it.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Map, Value};
use tempfile::TempDir;

use crate::error::CliError;

/// A number with its uncertainty. `source` names how the uncertainty was
/// obtained; `relative` marks uncertainties given as a fraction of `value`.
pub fn scalar(value: f64, uncertainty: f64, relative: bool, source: &str) -> Value {
    json!({
        "value": value,
        "uncertainty": uncertainty,
        "uncertainty_kind": if relative { "relative" } else { "absolute" },
        "source": source,
    })
}

/// Closed-form value; the uncertainty is floating point rounding.
pub fn exact(value: f64) -> Value {
    scalar(value, f64::EPSILON * value.abs(), false, "closed-form")
}

#[derive(Debug, Clone)]
pub struct Table {
    pub name: &'static str,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &'static str, header: &[&'static str]) -> Self {
        Self {
            name,
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

/// What a task hands back for persisting.
#[derive(Debug, Default)]
pub struct TaskOutput {
    pub results: Map<String, Value>,
    pub diagnostics: Map<String, Value>,
    pub warnings: Vec<String>,
    pub tables: Vec<Table>,
}

impl TaskOutput {
    pub fn result(&mut self, key: &str, v: Value) {
        self.results.insert(key.to_string(), v);
    }

    pub fn diag(&mut self, key: &str, v: impl Serialize) {
        self.diagnostics
            .insert(key.to_string(), serde_json::to_value(v).expect("serializable diagnostic"));
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Artifact {
    pub name: &'static str,
    /// Relative to the directory holding the record.
    pub file: String,
    pub columns: Vec<&'static str>,
    pub rows: usize,
}

pub struct Staging {
    dir: Option<TempDir>,
    out: PathBuf,
    created_out: bool,
    files: Vec<String>,
}

impl Staging {
    pub fn new(out: &Path) -> Result<Self, CliError> {
        let created_out = !out.exists();
        fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
        let dir = tempfile::Builder::new()
            .prefix(".polaron-lab-staging-")
            .tempdir_in(out)
            .map_err(|e| CliError::io(out, e))?;
        Ok(Self {
            dir: Some(dir),
            out: out.to_path_buf(),
            created_out,
            files: Vec::new(),
        })
    }

    fn staged(&self, file: &str) -> PathBuf {
        self.dir.as_ref().expect("staging alive").path().join(file)
    }

    pub fn write_table(&mut self, prefix: &str, t: &Table) -> Result<Artifact, CliError> {
        let file = format!("{prefix}-{}.csv", t.name);
        let path = self.staged(&file);
        let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::io(&path, e))?;
        w.write_record(&t.header).map_err(|e| CliError::io(&path, e))?;
        for r in &t.rows {
            w.write_record(r).map_err(|e| CliError::io(&path, e))?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))?;
        self.files.push(file.clone());
        Ok(Artifact {
            name: t.name,
            file,
            columns: t.header.clone(),
            rows: t.rows.len(),
        })
    }

    pub fn write_json(&mut self, file: &str, v: &Value) -> Result<(), CliError> {
        let path = self.staged(file);
        let mut text = serde_json::to_string_pretty(v).expect("record serializes");
        text.push('\n');
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        self.files.push(file.to_string());
        Ok(())
    }

    /// Move every staged file into the output directory.
    pub fn commit(mut self) -> Result<Vec<PathBuf>, CliError> {
        let mut done = Vec::new();
        for f in std::mem::take(&mut self.files) {
            let from = self.staged(&f);
            let to = self.out.join(&f);
            if let Err(e) = fs::rename(&from, &to) {
                for p in &done {
                    let _ = fs::remove_file(p);
                }
                return Err(CliError::io(&to, e));
            }
            done.push(to);
        }
        self.created_out = false;
        Ok(done)
    }
}

impl Drop for Staging {
    fn drop(&mut self) {
        drop(self.dir.take());
        if self.created_out {
            // Only removes the directory if nothing else landed in it.
            let _ = fs::remove_dir(&self.out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aborted_staging_leaves_nothing() {
        let root = tempfile::tempdir().unwrap();
        let out = root.path().join("fresh");
        {
            let mut s = Staging::new(&out).unwrap();
            let mut t = Table::new("x", &["a"]);
            t.push(vec!["1".into()]);
            s.write_table("t", &t).unwrap();
        }
        assert!(!out.exists());
    }

    #[test]
    fn committed_files_land_in_place() {
        let root = tempfile::tempdir().unwrap();
        let mut s = Staging::new(root.path()).unwrap();
        s.write_json("r.json", &json!({"a": 1})).unwrap();
        let files = s.commit().unwrap();
        assert_eq!(files, vec![root.path().join("r.json")]);
        let left: Vec<_> = fs::read_dir(root.path()).unwrap().collect();
        assert_eq!(left.len(), 1);
    }

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, -2.0403796461, 1e-300, 3.0] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }
}
