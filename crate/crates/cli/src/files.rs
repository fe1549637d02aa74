//! JSON file formats: instances in, reports and assignments out.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use vecbal::{DiscrepancyReport, NormKind, SetSequence, VectorSequence};

use crate::Failure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InstanceKind {
    Sequence,
    Sets,
}

/// Input instance. `vectors` is present for sequences, `sets` for set sequences.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub kind: InstanceKind,
    pub d: usize,
    pub norm: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vectors: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sets: Option<Vec<Vec<Vec<f64>>>>,
}

impl InstanceFile {
    pub fn norm_kind(&self) -> Result<NormKind, Failure> {
        NormKind::from_name(&self.norm, self.weights.clone()).map_err(Failure::from)
    }

    /// Validated sequence plus the scale factor applied (1 unless rescaling).
    pub fn sequence(&self, rescale: bool) -> Result<(VectorSequence, f64), Failure> {
        let vectors = match (self.kind, &self.vectors) {
            (InstanceKind::Sequence, Some(v)) => v.clone(),
            _ => return Err(Failure::input("instance is not a vector sequence")),
        };
        let norm = self.norm_kind()?;
        Ok(if rescale {
            VectorSequence::rescaled(self.d, norm, vectors)?
        } else {
            (VectorSequence::new(self.d, norm, vectors)?, 1.0)
        })
    }

    pub fn set_sequence(&self, rescale: bool) -> Result<(SetSequence, f64), Failure> {
        let sets = match (self.kind, &self.sets) {
            (InstanceKind::Sets, Some(s)) => s.clone(),
            _ => return Err(Failure::input("instance is not a set sequence")),
        };
        let norm = self.norm_kind()?;
        Ok(if rescale {
            SetSequence::rescaled(self.d, norm, sets)?
        } else {
            (SetSequence::new(self.d, norm, sets)?, 1.0)
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorstPrefix {
    /// 1-based class.
    pub class: usize,
    /// Prefix length.
    pub k: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub norm: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Factor the input was multiplied by (present with `--rescale`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub zero_sum: bool,
}

/// Report plus the assignment that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub bound: f64,
    pub achieved: f64,
    pub per_class: Vec<f64>,
    pub worst_prefix: Option<WorstPrefix>,
    pub pass: bool,
    pub params: Params,
    /// 1-based class of every sequence element.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<usize>>,
    /// Member positions (0-based) chosen from each set, one per class.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi: Option<Vec<Vec<usize>>>,
    /// Member positions (0-based) of each `k`-subset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subsets: Option<Vec<Vec<usize>>>,
}

impl ReportFile {
    pub fn new(report: &DiscrepancyReport, params: Params) -> Self {
        ReportFile {
            bound: report.bound,
            achieved: report.achieved,
            per_class: report.per_class_max.clone(),
            worst_prefix: report.worst_prefix.map(|(class, k)| WorstPrefix {
                class: class + 1,
                k,
            }),
            pass: report.pass,
            params,
            labels: None,
            chi: None,
            subsets: None,
        }
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::input(format!("malformed {}: {e}", path.display())))
}

/// Writes JSON to `path` through a temporary file and rename, or to stdout.
pub fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    let Some(path) = path else {
        print!("{text}");
        return Ok(());
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| Failure::input(format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(text.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}
