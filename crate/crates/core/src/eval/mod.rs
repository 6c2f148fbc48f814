//! Correlation benchmark: how well objective scores track MOS.
//!
//! PLCC and RMSE are computed after remapping predictions through a fitted
//! five-parameter logistic; SRCC and KRCC use the raw predictions (they
//! are invariant to the monotone remap). When records are grouped, every
//! group gets its own fit.

mod correlation;
mod logistic;

use std::collections::BTreeMap;
use std::io::Read;
use std::str::FromStr;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::output::Fixed;

pub use correlation::{average_ranks, krcc, plcc, rmse, srcc};
pub use logistic::{fit_logistic, logistic, FitParams, MAX_ITERATIONS, RESTARTS, TOLERANCE};

/// Smallest group that gets a report.
pub const MIN_GROUP_SIZE: usize = 5;

/// One scored video with its subset tags.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct EvalRecord {
    pub video_id: String,
    pub codec: String,
    pub level: String,
    pub pred: f64,
    pub mos: f64,
}

impl EvalRecord {
    /// Reads `video_id,codec,level,pred,mos` rows.
    pub fn read_csv<R: Read>(reader: R) -> Result<Vec<EvalRecord>> {
        let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut out = Vec::new();
        for (i, row) in csv.deserialize::<EvalRecord>().enumerate() {
            let record = row.map_err(|e| Error::Schema {
                file: "records".into(),
                row: i + 2,
                reason: e.to_string(),
            })?;
            if !(record.pred.is_finite() && record.mos.is_finite()) {
                return Err(Error::Schema {
                    file: "records".into(),
                    row: i + 2,
                    reason: "pred and mos must be finite".into(),
                });
            }
            out.push(record);
        }
        Ok(out)
    }
}

/// Tag used to split records into subsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GroupKey {
    Codec,
    Level,
}

impl FromStr for GroupKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "codec" => Ok(GroupKey::Codec),
            "level" => Ok(GroupKey::Level),
            other => Err(Error::DegenerateInput(format!(
                "unknown group key `{other}` (expected codec or level)"
            ))),
        }
    }
}

impl GroupKey {
    /// Parses a comma-separated list such as `codec,level`.
    pub fn parse_list(s: &str) -> Result<Vec<GroupKey>> {
        s.split(',')
            .filter(|p| !p.trim().is_empty())
            .map(str::parse)
            .collect()
    }

    fn label(self, record: &EvalRecord) -> String {
        match self {
            GroupKey::Codec => format!("codec={}", record.codec),
            GroupKey::Level => format!("level={}", record.level),
        }
    }
}

/// Correlation metrics for one set of records.
#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub n: usize,
    pub plcc: f64,
    pub srcc: f64,
    pub krcc: f64,
    pub rmse: f64,
    pub fit: FitParams,
}

impl Serialize for Metrics {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Json<'a> {
            n: usize,
            plcc: Fixed,
            srcc: Fixed,
            krcc: Fixed,
            rmse: Fixed,
            fit: &'a FitParams,
        }
        Json {
            n: self.n,
            plcc: Fixed(self.plcc),
            srcc: Fixed(self.srcc),
            krcc: Fixed(self.krcc),
            rmse: Fixed(self.rmse),
            fit: &self.fit,
        }
        .serialize(s)
    }
}

/// Metrics for predictions `pred` against subjective scores `mos`.
pub fn metrics(pred: &[f64], mos: &[f64]) -> Result<Metrics> {
    let fit = fit_logistic(pred, mos)?;
    let remapped = fit.remap(pred);
    Ok(Metrics {
        n: pred.len(),
        plcc: plcc(&remapped, mos)?,
        srcc: srcc(pred, mos)?,
        krcc: krcc(pred, mos)?,
        rmse: rmse(&remapped, mos)?,
        fit,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedGroup {
    pub group: String,
    pub n: usize,
    pub reason: String,
}

/// Overall and per-group metrics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub overall: Metrics,
    pub groups: BTreeMap<String, Metrics>,
    pub skipped: Vec<SkippedGroup>,
}

fn split(records: &[EvalRecord]) -> (Vec<f64>, Vec<f64>) {
    records.iter().map(|r| (r.pred, r.mos)).unzip()
}

/// Evaluates all records together and, when `group_by` is non-empty, each
/// subset. Groups that are too small or degenerate are skipped with a
/// warning; the overall set must be evaluable.
pub fn evaluate(records: &[EvalRecord], group_by: &[GroupKey]) -> Result<Report> {
    if records.len() < MIN_GROUP_SIZE {
        return Err(Error::GroupTooSmall {
            group: "overall".into(),
            n: records.len(),
            min: MIN_GROUP_SIZE,
        });
    }
    let (pred, mos) = split(records);
    let overall = metrics(&pred, &mos)?;

    let mut buckets: BTreeMap<String, Vec<EvalRecord>> = BTreeMap::new();
    if !group_by.is_empty() {
        for r in records {
            let label = group_by
                .iter()
                .map(|k| k.label(r))
                .collect::<Vec<_>>()
                .join(",");
            buckets.entry(label).or_default().push(r.clone());
        }
    }

    let mut groups = BTreeMap::new();
    let mut skipped = Vec::new();
    for (label, members) in buckets {
        if members.len() < MIN_GROUP_SIZE {
            let err = Error::GroupTooSmall {
                group: label.clone(),
                n: members.len(),
                min: MIN_GROUP_SIZE,
            };
            warn!("skipping group: {err}");
            skipped.push(SkippedGroup {
                group: label,
                n: members.len(),
                reason: err.to_string(),
            });
            continue;
        }
        let (p, m) = split(&members);
        match metrics(&p, &m) {
            Ok(metrics) => {
                groups.insert(label, metrics);
            }
            Err(err) => {
                warn!("skipping group {label}: {err}");
                skipped.push(SkippedGroup {
                    group: label,
                    n: members.len(),
                    reason: err.to_string(),
                });
            }
        }
    }
    Ok(Report {
        overall,
        groups,
        skipped,
    })
}
