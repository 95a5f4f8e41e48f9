//! Report files. Everything is staged in temporary files inside the output
//! directory and renamed into place only after all of them were written.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use tempfile::NamedTempFile;

use spectral_core::inequalities::write_reports_csv;

use crate::error::CliError;
use crate::experiments::ExperimentResult;

pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub pass: bool,
    pub strict: bool,
    pub experiments: Vec<ExperimentResult>,
}

impl RunReport {
    pub fn new(mut experiments: Vec<ExperimentResult>, strict: bool) -> Self {
        for e in &mut experiments {
            e.grade(strict);
        }
        Self {
            pass: experiments.iter().all(|e| e.pass),
            strict,
            experiments,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Output {
        path: path.to_owned(),
        source,
    }
}

fn csv_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Output {
        path: path.to_owned(),
        source: std::io::Error::other(e.to_string()),
    }
}

/// File name and contents of every output, in a fixed order.
pub fn render(run: &RunReport) -> Result<Vec<(String, Vec<u8>)>, CliError> {
    let mut files = Vec::new();
    let mut json = serde_json::to_vec_pretty(run).map_err(|e| csv_err(Path::new(REPORT_FILE), e))?;
    json.push(b'\n');
    files.push((REPORT_FILE.to_owned(), json));
    for e in &run.experiments {
        let name = format!("{}.reports.csv", e.name);
        let mut buf = Vec::new();
        write_reports_csv(&e.reports, &mut buf).map_err(|err| csv_err(Path::new(&name), err))?;
        files.push((name, buf));

        for t in &e.tables {
            let name = format!("{}.{}.eigenvalues.csv", e.name, t.problem);
            let mut w = csv::Writer::from_writer(Vec::new());
            let fail = |err: csv::Error| csv_err(Path::new(&name), err);
            w.write_record(["index", "eigenvalue", "refinement_estimate"]).map_err(fail)?;
            for (i, v) in t.values.iter().enumerate() {
                let est = t.estimates.as_ref().and_then(|e| e.get(i)).map(f64::to_string).unwrap_or_default();
                w.write_record([(i + 1).to_string(), v.to_string(), est]).map_err(fail)?;
            }
            files.push((name.clone(), w.into_inner().map_err(|err| csv_err(Path::new(&name), err))?));
        }

        if let Some(p) = &e.plot {
            let name = format!("{}.plot.csv", e.name);
            let mut w = csv::Writer::from_writer(Vec::new());
            let fail = |err: csv::Error| csv_err(Path::new(&name), err);
            w.write_record(&p.columns).map_err(fail)?;
            for row in &p.rows {
                w.write_record(row.iter().map(f64::to_string)).map_err(fail)?;
            }
            files.push((name.clone(), w.into_inner().map_err(|err| csv_err(Path::new(&name), err))?));
        }
    }
    Ok(files)
}

/// Write all outputs into `dir`; on any error no output file is replaced.
pub fn write_outputs(dir: &Path, run: &RunReport) -> Result<Vec<PathBuf>, CliError> {
    let files = render(run)?;
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut staged = Vec::with_capacity(files.len());
    for (name, bytes) in files {
        let target = dir.join(name);
        let mut tmp = NamedTempFile::new_in(dir).map_err(io_err(dir))?;
        tmp.write_all(&bytes).map_err(io_err(&target))?;
        tmp.as_file().sync_all().map_err(io_err(&target))?;
        staged.push((tmp, target));
    }
    let mut written = Vec::with_capacity(staged.len());
    for (tmp, target) in staged {
        tmp.persist(&target).map_err(|e| CliError::Output {
            path: target.clone(),
            source: e.error,
        })?;
        written.push(target);
    }
    Ok(written)
}
