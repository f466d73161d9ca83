//! Files written for a preset run under `<out>/<preset>/`.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::experiments::{Outcome, Table};

pub const SUMMARY_SCHEMA: &str = "sgch.summary/1";
pub const RECORD_SCHEMA: &str = "sgch.record/1";
pub const TABLE_SCHEMA: &str = "sgch.table/1";

#[derive(Debug, thiserror::Error)]
#[error("cannot write {path}: {source}")]
pub struct OutputError {
    pub path: PathBuf,
    #[source]
    pub source: io::Error,
}

pub struct OutputDir {
    dir: PathBuf,
}

impl OutputDir {
    /// Creates `<root>/<preset>` and writes the config echo into it.
    pub fn create(root: &Path, preset: &str, config: &str) -> Result<Self, OutputError> {
        let out = Self { dir: root.join(preset) };
        fs::create_dir_all(&out.dir).map_err(|source| out.error(&out.dir, source))?;
        out.write("config.toml", |w| w.write_all(config.as_bytes()))?;
        Ok(out)
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    fn error(&self, path: &Path, source: io::Error) -> OutputError {
        OutputError {
            path: path.to_path_buf(),
            source,
        }
    }

    fn write(&self, name: &str, body: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> Result<(), OutputError> {
        let path = self.dir.join(name);
        let result = File::create(&path).and_then(|file| {
            let mut w = BufWriter::new(file);
            body(&mut w)?;
            w.flush()
        });
        result.map_err(|source| self.error(&path, source))
    }

    /// `summary.json`, `records.jsonl` and one CSV per table.
    pub fn write_outcome(&self, preset: &str, outcome: &Outcome, error: Option<&str>) -> Result<(), OutputError> {
        let mut summary = json!({
            "schema": SUMMARY_SCHEMA,
            "preset": preset,
            "passed": error.is_none() && outcome.passed(),
            "checks": outcome.checks,
        });
        if let Some(e) = error {
            summary["error"] = e.into();
        }
        self.write("summary.json", |w| {
            serde_json::to_writer_pretty(&mut *w, &summary)?;
            writeln!(w)
        })?;
        self.write("records.jsonl", |w| {
            for record in &outcome.records {
                let mut row = record.clone();
                if let Value::Object(map) = &mut row {
                    map.insert("schema".into(), RECORD_SCHEMA.into());
                }
                serde_json::to_writer(&mut *w, &row)?;
                writeln!(w)?;
            }
            Ok(())
        })?;
        for table in &outcome.tables {
            self.write(&format!("{}.csv", table.name), |w| write_csv(w, table))?;
        }
        Ok(())
    }
}

fn write_csv(w: &mut impl Write, table: &Table) -> io::Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    let header = std::iter::once("schema").chain(table.columns.iter().map(String::as_str));
    csv.write_record(header)?;
    for row in &table.rows {
        csv.write_record(std::iter::once(TABLE_SCHEMA).chain(row.iter().map(String::as_str)))?;
    }
    csv.flush()
}
