use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::masking::LevelMask;
use crate::predictor::{BackboneKind, F1Report};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    Baseline,
    #[serde(rename = "BE")]
    BackwardElimination,
    #[serde(rename = "BPSO")]
    Bpso,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Baseline, Method::BackwardElimination, Method::Bpso];

    pub fn tag(self) -> &'static str {
        match self {
            Method::Baseline => "baseline",
            Method::BackwardElimination => "be",
            Method::Bpso => "bpso",
        }
    }

    pub fn code(self) -> u8 {
        self as u8
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Baseline => "Baseline",
            Method::BackwardElimination => "BE",
            Method::Bpso => "BPSO",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "baseline" => Ok(Method::Baseline),
            "be" => Ok(Method::BackwardElimination),
            "bpso" => Ok(Method::Bpso),
            _ => Err(Error::arg(format!("unknown method {s:?}"))),
        }
    }
}

/// A mask chosen by a selection run with its validation fitness and, when
/// measured, its held-out macro-F1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectedMask {
    pub mask: LevelMask,
    pub fitness: f64,
    pub test_f1: Option<f64>,
}

/// Outcome of one (dataset, backbone, method, horizon, repetition) cell.
///
/// `selected` holds the per-cardinality subsets (10 levels first) for BE, the
/// best distinct masks in rank order for BPSO, and the full mask for Baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub dataset_id: String,
    pub backbone: BackboneKind,
    pub method: Method,
    pub horizon: usize,
    pub repetition: usize,
    pub seed: u64,
    pub selected: Vec<SelectedMask>,
    pub evaluation_mask: LevelMask,
    pub test: F1Report,
    pub wall_seconds: Option<f64>,
}

impl RunRecord {
    pub fn check(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Format(format!("record {}: {m}", self.file_stem())));
        match self.method {
            Method::BackwardElimination => {
                let sizes: Vec<usize> = self.selected.iter().map(|s| s.mask.count()).collect();
                let expected: Vec<usize> = (0..sizes.len()).map(|i| 10 - i).collect();
                if sizes.is_empty() || sizes != expected {
                    return fail(format!("subset sizes {sizes:?} do not count down from 10"));
                }
            }
            Method::Bpso => {
                let n = self.selected.len();
                if !(1..=3).contains(&n) {
                    return fail(format!("{n} ranked masks"));
                }
                for (i, a) in self.selected.iter().enumerate() {
                    if self.selected[..i].iter().any(|b| b.mask == a.mask) {
                        return fail("ranked masks repeat".into());
                    }
                }
            }
            Method::Baseline => {}
        }
        Ok(())
    }

    /// Mask of the BE subset with `size` levels.
    pub fn subset(&self, size: usize) -> Option<LevelMask> {
        match self.method {
            Method::BackwardElimination => self
                .selected
                .iter()
                .find(|s| s.mask.count() == size)
                .map(|s| s.mask),
            _ => None,
        }
    }

    /// Mask of the BPSO solution with 1-based rank `rank`.
    pub fn ranked(&self, rank: usize) -> Option<LevelMask> {
        match self.method {
            Method::Bpso if rank >= 1 => self.selected.get(rank - 1).map(|s| s.mask),
            _ => None,
        }
    }

    pub fn file_stem(&self) -> String {
        format!(
            "{}__{}__{}__H{}__rep{}",
            self.dataset_id,
            self.backbone.tag(),
            self.method.tag(),
            self.horizon,
            self.repetition
        )
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn save(&self, dir: &Path) -> Result<std::path::PathBuf> {
        let path = dir.join(format!("{}.json", self.file_stem()));
        crate::experiment::write_atomic(&path, self.to_json()?.as_bytes())?;
        Ok(path)
    }
}

/// Loads every `*.json` record in `dir`, or in `dir/records` when present,
/// sorted by file name.
pub fn load_records(dir: &Path) -> Result<Vec<RunRecord>> {
    let nested = dir.join("records");
    let dir = if nested.is_dir() { nested } else { dir.to_path_buf() };
    let mut paths: Vec<_> = std::fs::read_dir(&dir)
        .map_err(|e| Error::io(&dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::NoRecords(dir));
    }
    paths
        .iter()
        .map(|p| {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            let record: RunRecord = serde_json::from_str(&text)
                .map_err(|e| Error::Format(format!("{}: {e}", p.display())))?;
            record.check()?;
            Ok(record)
        })
        .collect()
}
