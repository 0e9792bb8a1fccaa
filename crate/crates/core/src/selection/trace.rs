use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BpsoConfig, EliminationConfig, EliminationTrace, SwarmState};
use crate::error::Result;
use crate::masking::LevelMask;
use crate::predictor::{BackboneKind, TrainConfig};

/// Identifies a selection run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub dataset_id: String,
    pub backbone: BackboneKind,
    pub horizon: usize,
    pub window_length: usize,
    pub seed: u64,
    pub train: TrainConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum TraceBody {
    Bpso {
        config: BpsoConfig,
        state: SwarmState,
    },
    Elimination {
        config: EliminationConfig,
        trace: EliminationTrace,
    },
}

/// One JSON document per run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceDocument {
    pub metadata: RunMetadata,
    pub final_mask: LevelMask,
    pub body: TraceBody,
}

impl TraceDocument {
    pub fn bpso(metadata: RunMetadata, config: BpsoConfig, state: SwarmState) -> Self {
        Self {
            metadata,
            final_mask: state.global_best,
            body: TraceBody::Bpso { config, state },
        }
    }

    pub fn elimination(
        metadata: RunMetadata,
        config: EliminationConfig,
        trace: EliminationTrace,
    ) -> Self {
        let final_mask = trace
            .subsets
            .last()
            .map(|s| s.mask)
            .unwrap_or(LevelMask::NONE);
        Self {
            metadata,
            final_mask,
            body: TraceBody::Elimination { config, trace },
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        crate::experiment::write_atomic(path, self.to_json()?.as_bytes())
    }
}
