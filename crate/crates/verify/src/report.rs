//! Campaign reports and their JSON form.
//!
//! Reports are written as a single compact JSON document. Every float is
//! printed in scientific notation with 17 significant digits, so parsing a
//! report back yields bit-identical numbers. Complex matrix entries are
//! `[re, im]` pairs in nested row arrays.

use std::collections::BTreeMap;
use std::io::{self, Write};
use std::path::Path;

use entgap_core::{CMatrix, Complex64};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::config::CampaignConfig;
use crate::error::VerifyError;

/// A complex matrix serialized as rows of `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessMatrix(pub CMatrix);

impl Serialize for WitnessMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let m = &self.0;
        let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
            .map(|i| {
                (0..m.ncols())
                    .map(|j| [m[(i, j)].re, m[(i, j)].im])
                    .collect()
            })
            .collect();
        rows.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for WitnessMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(deserializer)?;
        let n = rows.len();
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(D::Error::custom("ragged witness matrix"));
        }
        Ok(WitnessMatrix(CMatrix::from_fn(n, cols, |i, j| {
            Complex64::new(rows[i][j][0], rows[i][j][1])
        })))
    }
}

/// Inputs that produced a margin, enough to replay the sample.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Witness {
    pub sample: u64,
    pub matrices: BTreeMap<String, WitnessMatrix>,
    pub scalars: BTreeMap<String, f64>,
    pub labels: BTreeMap<String, String>,
}

impl Witness {
    pub fn new(sample: u64) -> Self {
        Self {
            sample,
            ..Self::default()
        }
    }

    pub fn matrix(mut self, name: &str, m: &CMatrix) -> Self {
        self.matrices
            .insert(name.to_string(), WitnessMatrix(m.clone()));
        self
    }

    pub fn scalar(mut self, name: &str, v: f64) -> Self {
        self.scalars.insert(name.to_string(), v);
        self
    }

    pub fn label(mut self, name: &str, v: &str) -> Self {
        self.labels.insert(name.to_string(), v.to_string());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleError {
    pub sample: u64,
    pub message: String,
}

/// Outcome of the local descent that follows C9's random search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exploration {
    /// `"witness_found"` when some margin fell below `−tolerance`,
    /// `"inconclusive"` otherwise.
    pub verdict: String,
    pub descent_steps: usize,
    pub accepted_steps: usize,
    pub start_margin: f64,
    pub refined_margin: f64,
    pub refined_witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub config: CampaignConfig,
    /// Signed slack per successful sample, in sample order. In relative
    /// mode each margin is already divided by `1 + ‖inputs‖_F`.
    pub margins: Vec<f64>,
    pub violations: usize,
    /// `None` only when every sample failed.
    pub worst_margin: Option<f64>,
    pub witness: Option<Witness>,
    pub errors: Vec<SampleError>,
    /// Campaign-specific side measurements (maxima over samples).
    pub auxiliary: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exploration: Option<Exploration>,
    /// Seconds; left out of emitted reports unless requested, so that
    /// identical configurations produce identical files.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<f64>,
}

impl CampaignReport {
    /// No violations and no per-sample errors. C9 witnesses are evidence,
    /// not failures, so an exploratory report passes on errors alone.
    pub fn passed(&self) -> bool {
        self.errors.is_empty() && (self.config.campaign.is_exploratory() || self.violations == 0)
    }

    /// Recounts violations and the worst margin from `margins`.
    pub fn recompute(&self) -> (usize, Option<f64>) {
        let tol = self.config.tolerance;
        let violations = self.margins.iter().filter(|&&m| m < -tol).count();
        let worst = self.margins.iter().copied().reduce(f64::min);
        (violations, worst)
    }
}

/// Several reports written as one document (`verify --all`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub reports: Vec<CampaignReport>,
}

/// Compact JSON with floats as `{:.16e}`.
struct FixedDigits;

impl serde_json::ser::Formatter for FixedDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        write!(writer, "{:.16e}", value as f64)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, VerifyError> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedDigits);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<(), VerifyError> {
    let text = to_json(value)?;
    std::fs::write(path, text).map_err(|source| VerifyError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn emit_report(report: &CampaignReport, path: &Path) -> Result<(), VerifyError> {
    write_json(report, path)
}

pub fn emit_suite(suite: &SuiteReport, path: &Path) -> Result<(), VerifyError> {
    write_json(suite, path)
}
