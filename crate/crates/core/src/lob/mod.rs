//! Order-book events, sliding-window samples and the chronological day split.

mod dataset;
mod event;
mod normalize;
mod parse;
mod window;

pub use dataset::{split_dataset, Dataset, SplitConfig};
pub use event::LobEvent;
pub use normalize::{compute_stats, denormalize, normalize, NormStats};
pub use parse::{format_events, header, parse_events, read_events, validate_events_file, write_events, Violation};
pub use window::{build_windows, build_windows_with, label_midprice, MovementLabel, SampleWindow, WindowSpec};
