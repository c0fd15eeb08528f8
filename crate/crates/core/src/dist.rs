//! Ratio vectors, the oracle ratio, dist scores and deviation degrees.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum DistError {
    #[error("execution times sum to zero or contain a negative or non-finite value")]
    ZeroVector,
    #[error("no seed was measured successfully")]
    NoSeedsMeasured,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("record has no ratio vector")]
    NotOk,
}

/// L1-normalized times, one entry per runtime in campaign order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioVector(pub Vec<f64>);

impl RatioVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn l1_normalize(times: &[f64]) -> Result<RatioVector, DistError> {
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(DistError::ZeroVector);
    }
    let total: f64 = times.iter().sum();
    if total <= 0.0 {
        return Err(DistError::ZeroVector);
    }
    Ok(RatioVector(times.iter().map(|t| t / total).collect()))
}

/// Median; the mean of the two middle values for even lengths.
pub fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return 0.0;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum RecordStatus {
    Ok,
    Failed { runtime: String, reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExecutionRecord {
    pub program_id: String,
    /// Runtime names in campaign order.
    pub runtimes: Vec<String>,
    pub raw_times: BTreeMap<String, Vec<f64>>,
    pub representative: BTreeMap<String, f64>,
    pub ratio_vector: Option<RatioVector>,
    pub status: RecordStatus,
}

impl ExecutionRecord {
    /// Builds an ok record from per-runtime timings given in `runtimes` order.
    pub fn from_times(program_id: &str, runtimes: &[String], raw: Vec<Vec<f64>>) -> Result<Self, DistError> {
        if raw.len() != runtimes.len() {
            return Err(DistError::DimensionMismatch { expected: runtimes.len(), got: raw.len() });
        }
        let reps: Vec<f64> = raw.iter().map(|r| median(r)).collect();
        let ratio = l1_normalize(&reps)?;
        Ok(ExecutionRecord {
            program_id: program_id.into(),
            runtimes: runtimes.to_vec(),
            raw_times: runtimes.iter().cloned().zip(raw).collect(),
            representative: runtimes.iter().cloned().zip(reps).collect(),
            ratio_vector: Some(ratio),
            status: RecordStatus::Ok,
        })
    }

    pub fn failed(program_id: &str, runtimes: &[String], runtime: &str, reason: &str) -> Self {
        ExecutionRecord {
            program_id: program_id.into(),
            runtimes: runtimes.to_vec(),
            raw_times: BTreeMap::new(),
            representative: BTreeMap::new(),
            ratio_vector: None,
            status: RecordStatus::Failed { runtime: runtime.into(), reason: reason.into() },
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == RecordStatus::Ok && self.ratio_vector.is_some()
    }

    fn ratio(&self) -> Result<&RatioVector, DistError> {
        match (&self.status, &self.ratio_vector) {
            (RecordStatus::Ok, Some(r)) => Ok(r),
            _ => Err(DistError::NotOk),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleRatio {
    pub vector: RatioVector,
    /// Seed programs the oracle was averaged over.
    pub derivation: Vec<String>,
}

/// Mean of the ok seed records' ratio vectors, renormalized.
pub fn oracle_ratio(seed_records: &[ExecutionRecord]) -> Result<OracleRatio, DistError> {
    let ok: Vec<&ExecutionRecord> = seed_records.iter().filter(|r| r.is_ok()).collect();
    let Some(first) = ok.first() else { return Err(DistError::NoSeedsMeasured) };
    let dim = first.ratio()?.len();
    let mut sum = alloc::vec![0.0; dim];
    for r in &ok {
        let v = r.ratio()?;
        if v.len() != dim {
            return Err(DistError::DimensionMismatch { expected: dim, got: v.len() });
        }
        for (s, x) in sum.iter_mut().zip(&v.0) {
            *s += x;
        }
    }
    let mean: Vec<f64> = sum.iter().map(|s| s / ok.len() as f64).collect();
    Ok(OracleRatio { vector: l1_normalize(&mean)?, derivation: ok.iter().map(|r| r.program_id.clone()).collect() })
}

/// Euclidean distance between two ratio vectors.
pub fn distance(ratio: &RatioVector, oracle: &RatioVector) -> Result<f64, DistError> {
    if ratio.len() != oracle.len() {
        return Err(DistError::DimensionMismatch { expected: oracle.len(), got: ratio.len() });
    }
    let sq: f64 = ratio.0.iter().zip(&oracle.0).map(|(r, o)| (r - o) * (r - o)).sum();
    Ok(libm::sqrt(sq))
}

pub fn dist_score(record: &ExecutionRecord, oracle: &OracleRatio) -> Result<f64, DistError> {
    distance(record.ratio()?, &oracle.vector)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub program_id: String,
    pub dist_score: f64,
    /// |ratio − oracle| per runtime, in campaign order.
    pub per_runtime_deviation: Vec<(String, f64)>,
    pub suspect: String,
}

/// Deviations closer than this count as tied.
pub const TIE_EPSILON: f64 = 1e-12;

/// Per-runtime deviations; the suspect is the largest, the first in order on ties.
pub fn deviation_degrees(record: &ExecutionRecord, oracle: &OracleRatio) -> Result<DeviationReport, DistError> {
    let ratio = record.ratio()?;
    let dist = distance(ratio, &oracle.vector)?;
    if record.runtimes.len() != ratio.len() {
        return Err(DistError::DimensionMismatch { expected: ratio.len(), got: record.runtimes.len() });
    }
    let devs: Vec<(String, f64)> = record
        .runtimes
        .iter()
        .zip(ratio.0.iter().zip(&oracle.vector.0))
        .map(|(name, (r, o))| (name.clone(), libm::fabs(r - o)))
        .collect();
    let mut best = 0;
    for (i, (_, d)) in devs.iter().enumerate() {
        if *d > devs[best].1 + TIE_EPSILON {
            best = i;
        }
    }
    Ok(DeviationReport {
        program_id: record.program_id.clone(),
        dist_score: dist,
        suspect: devs[best].0.clone(),
        per_runtime_deviation: devs,
    })
}
