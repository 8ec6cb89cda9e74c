//! Convergence logs (CSV) and run summaries.

use std::fs::File;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{temp_path, write_atomic};
use crate::cpd::{ConvergenceRecord, StepRecord};
use crate::error::{Error, Result};

pub const LOG_HEADER: [&str; 7] = ["γ", "V", "compliance", "dual", "inner_iters", "change", "seconds"];

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::InvalidArgument(format!("csv error on {}: {other:?}", path.display())),
    }
}

fn row(step: &StepRecord) -> [String; 7] {
    [
        step.gamma.to_string(),
        step.volume.to_string(),
        step.compliance.to_string(),
        step.dual.to_string(),
        step.inner_iterations.to_string(),
        step.change.to_string(),
        step.seconds.to_string(),
    ]
}

/// Streams one CSV row per outer step into a temporary file that is renamed
/// into place by [`ConvergenceLog::finish`].
pub struct ConvergenceLog {
    path: PathBuf,
    temp: PathBuf,
    writer: csv::Writer<File>,
    rows: usize,
}

impl ConvergenceLog {
    pub fn create(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let temp = temp_path(&path);
        let file = File::create(&temp).map_err(|e| Error::io(&temp, e))?;
        let mut writer = csv::Writer::from_writer(file);
        writer.write_record(LOG_HEADER).map_err(|e| csv_err(&temp, e))?;
        Ok(ConvergenceLog {
            path,
            temp,
            writer,
            rows: 0,
        })
    }

    pub fn append(&mut self, step: &StepRecord) -> Result<()> {
        self.writer.write_record(row(step)).map_err(|e| csv_err(&self.temp, e))?;
        self.writer.flush().map_err(|e| Error::io(&self.temp, e))?;
        self.rows += 1;
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn finish(mut self) -> Result<PathBuf> {
        self.writer.flush().map_err(|e| Error::io(&self.temp, e))?;
        drop(self.writer);
        std::fs::rename(&self.temp, &self.path).map_err(|e| Error::io(&self.path, e))?;
        Ok(self.path)
    }
}

pub fn write_log(path: impl AsRef<Path>, record: &ConvergenceRecord) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(LOG_HEADER).map_err(|e| csv_err(path, e))?;
    for step in &record.steps {
        w.write_record(row(step)).map_err(|e| csv_err(path, e))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::io(path, e.into_error()))?;
    write_atomic(path, &bytes)
}

/// Log rows as raw strings, header excluded.
pub fn read_log(path: impl AsRef<Path>) -> Result<Vec<Vec<String>>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let header = r.headers().map_err(|e| csv_err(path, e))?.clone();
    if header.iter().ne(LOG_HEADER) {
        return Err(Error::Parse {
            line: 1,
            message: format!("unexpected header {:?}", header.iter().collect::<Vec<_>>()),
        });
    }
    r.records()
        .map(|rec| {
            rec.map(|x| x.iter().map(str::to_string).collect())
                .map_err(|e| csv_err(path, e))
        })
        .collect()
}

/// End-of-run figures written next to the density and log files.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub method: String,
    pub problem: String,
    pub elements: usize,
    pub compliance: f64,
    pub volume_fraction: f64,
    pub iterations: usize,
    pub seconds: f64,
    pub converged: bool,
}

pub fn write_summary(path: impl AsRef<Path>, summary: &RunSummary) -> Result<()> {
    let text = toml::to_string(summary)
        .map_err(|e| Error::InvalidArgument(format!("cannot serialize summary: {e}")))?;
    write_atomic(path.as_ref(), text.as_bytes())
}
