//! Report records and their JSON/CSV forms.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// The bound is undefined for these inputs (e.g. a negative discriminant).
    NotApplicable,
}

/// Everything needed to recompute a report: named scalars plus a value list
/// (eigenvalues or an auxiliary sequence, depending on the check).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportInputs {
    pub params: BTreeMap<String, f64>,
    pub values: Vec<f64>,
}

impl ReportInputs {
    pub fn new(values: Vec<f64>) -> Self {
        Self {
            params: BTreeMap::new(),
            values,
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_owned(), value);
        self
    }

    pub fn get(&self, key: &str) -> Result<f64> {
        self.params
            .get(key)
            .copied()
            .ok_or_else(|| Error::Domain(format!("report input `{key}` missing")))
    }

    /// Parameter stored as a float that must be a nonnegative integer.
    pub fn get_index(&self, key: &str) -> Result<usize> {
        let v = self.get(key)?;
        if v >= 0.0 && v.fract() == 0.0 && v < 1e15 {
            Ok(v as usize)
        } else {
            Err(Error::Domain(format!("report input `{key}` must be a nonnegative integer, got {v}")))
        }
    }
}

/// One checked inequality `lhs <= rhs`.
///
/// `pass` holds iff `lhs <= rhs + slack`. Strict bounds carry a negative
/// slack, so they demand a positive margin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub name: String,
    pub k: Option<usize>,
    #[serde(serialize_with = "finite_or_null", deserialize_with = "null_as_nan")]
    pub lhs: f64,
    #[serde(serialize_with = "finite_or_null", deserialize_with = "null_as_nan")]
    pub rhs: f64,
    #[serde(serialize_with = "finite_or_null", deserialize_with = "null_as_nan")]
    pub margin: f64,
    #[serde(serialize_with = "finite_or_null", deserialize_with = "null_as_nan")]
    pub slack: f64,
    pub pass: bool,
    pub status: Status,
    /// Failures of non-required reports do not fail a run.
    pub required: bool,
    pub note: String,
    pub inputs: ReportInputs,
}

impl InequalityReport {
    pub(crate) fn compare(name: &str, k: Option<usize>, lhs: f64, rhs: f64, slack: f64, inputs: ReportInputs) -> Self {
        let pass = lhs <= rhs + slack;
        Self {
            name: name.to_owned(),
            k,
            lhs,
            rhs,
            margin: rhs - lhs,
            slack,
            pass,
            status: if pass { Status::Pass } else { Status::Fail },
            required: true,
            note: String::new(),
            inputs,
        }
    }

    pub(crate) fn not_applicable(name: &str, k: Option<usize>, lhs: f64, note: String, inputs: ReportInputs) -> Self {
        Self {
            name: name.to_owned(),
            k,
            lhs,
            rhs: f64::NAN,
            margin: f64::NAN,
            slack: 0.0,
            pass: true,
            status: Status::NotApplicable,
            required: true,
            note,
            inputs,
        }
    }

    pub(crate) fn noted(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    pub fn is_required_failure(&self) -> bool {
        self.required && self.status == Status::Fail
    }

    /// Re-evaluate from the echoed inputs.
    pub fn recompute(&self) -> Result<InequalityReport> {
        let mut fresh = super::evaluate(&self.name, &self.inputs)?;
        fresh.required = self.required;
        Ok(fresh)
    }
}

fn finite_or_null<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else {
        s.serialize_none()
    }
}

fn null_as_nan<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

/// Pretty JSON array, one object per report.
pub fn reports_to_json(reports: &[InequalityReport]) -> Result<String> {
    Ok(serde_json::to_string_pretty(reports)?)
}

#[derive(Serialize)]
struct CsvRow<'a> {
    name: &'a str,
    k: Option<usize>,
    lhs: f64,
    rhs: f64,
    margin: f64,
    slack: f64,
    status: Status,
    required: bool,
    note: &'a str,
}

/// One summary row per report.
pub fn write_reports_csv<W: Write>(reports: &[InequalityReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in reports {
        w.serialize(CsvRow {
            name: &r.name,
            k: r.k,
            lhs: r.lhs,
            rhs: r.rhs,
            margin: r.margin,
            slack: r.slack,
            status: r.status,
            required: r.required,
            note: &r.note,
        })?;
    }
    w.flush()?;
    Ok(())
}
