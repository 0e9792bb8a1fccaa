//! Measures how much predictive information each limit-order-book price level
//! carries for mid-price movement classification.
//!
//! The crate wraps two small gradient-trained classifiers in two level-granular
//! wrapper feature selection engines (backward elimination and binary particle
//! swarm optimization) and aggregates what they select across repeated seeded
//! runs.
//!
//! Layout:
//! - [`lob`]: event parsing, sliding windows, labels, normalization, day splits.
//! - [`masking`]: level subsets and their expansion to input masks.
//! - [`predictor`]: backbones, analytic gradients, training and macro-F1.
//! - [`selection`]: backward elimination and binary PSO over level masks.
//! - [`synth`]: synthetic order books with planted informative levels.
//! - [`report`]: consensus tables, performance summaries and charts.
//! - [`experiment`]: config-driven grid runner used by the CLI.

pub mod error;
pub mod experiment;
pub mod lob;
pub mod masking;
pub mod matrix;
pub mod predictor;
pub mod report;
pub mod selection;
pub mod synth;

pub use error::{Error, Result};
pub use lob::{Dataset, LobEvent, MovementLabel, SampleWindow};
pub use masking::{LevelMask, MaskMatrix};
pub use predictor::{BackboneKind, F1Report, ModelParams, TrainConfig};

/// Number of book levels per side.
pub const LEVELS: usize = 10;
/// Rows of one sample matrix: ask price, ask volume, bid price, bid volume per level.
pub const FEATURES: usize = 4 * LEVELS;
