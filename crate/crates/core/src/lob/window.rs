use serde::{Deserialize, Serialize};

use super::LobEvent;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::FEATURES;

/// Three-class direction of the smoothed future mid-price.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MovementLabel {
    Up,
    Down,
    Stationary,
}

impl MovementLabel {
    pub const ALL: [MovementLabel; 3] = [Self::Up, Self::Down, Self::Stationary];

    /// Class index used by the classifiers: Up 0, Down 1, Stationary 2.
    pub fn index(self) -> usize {
        match self {
            Self::Up => 0,
            Self::Down => 1,
            Self::Stationary => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }
}

/// One 40×T input matrix with its label. Columns run oldest to newest and
/// the last column is the event at `time_index`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleWindow {
    pub matrix: Matrix,
    pub label: MovementLabel,
    pub day_index: usize,
    /// In-day index of the newest event in the window.
    pub time_index: usize,
}

/// Window construction parameters. `stride` thins the emitted windows
/// (every `stride`-th valid origin, starting at the first); 1 keeps all.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub length: usize,
    pub horizon: usize,
    pub alpha: f64,
    pub stride: usize,
}

impl WindowSpec {
    pub fn new(length: usize, horizon: usize, alpha: f64) -> Self {
        Self {
            length,
            horizon,
            alpha,
            stride: 1,
        }
    }

    fn check(&self) -> Result<()> {
        if self.length == 0 {
            return Err(Error::arg("window length T must be at least 1"));
        }
        if self.horizon == 0 {
            return Err(Error::arg("horizon H must be at least 1"));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::arg(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        if self.stride == 0 {
            return Err(Error::arg("window stride must be at least 1"));
        }
        Ok(())
    }
}

/// Label of the event at in-day index `t`: the mean mid-price over the next
/// `horizon` events against the current mid, with relative threshold `alpha`.
pub fn label_midprice(
    day: &[LobEvent],
    t: usize,
    horizon: usize,
    alpha: f64,
) -> Result<MovementLabel> {
    if horizon == 0 {
        return Err(Error::arg("horizon H must be at least 1"));
    }
    if t + horizon >= day.len() {
        return Err(Error::OutOfRange(format!(
            "label at {t} needs {horizon} future events, day has {}",
            day.len()
        )));
    }
    let current = day[t].mid_price();
    let future: f64 = day[t + 1..=t + horizon]
        .iter()
        .map(LobEvent::mid_price)
        .sum::<f64>()
        / horizon as f64;
    let change = future / current - 1.0;
    Ok(if change > alpha {
        MovementLabel::Up
    } else if change < -alpha {
        MovementLabel::Down
    } else {
        MovementLabel::Stationary
    })
}

pub fn build_windows(
    events: &[LobEvent],
    length: usize,
    horizon: usize,
    alpha: f64,
) -> Result<Vec<SampleWindow>> {
    build_windows_with(events, &WindowSpec::new(length, horizon, alpha))
}

/// Emits windows day by day. A day shorter than `length + horizon` events
/// contributes nothing.
pub fn build_windows_with(events: &[LobEvent], spec: &WindowSpec) -> Result<Vec<SampleWindow>> {
    spec.check()?;
    let mut out = Vec::new();
    for day in days(events) {
        if day.len() < spec.length + spec.horizon {
            continue;
        }
        let first = spec.length - 1;
        let last = day.len() - 1 - spec.horizon;
        for t in (first..=last).step_by(spec.stride) {
            let start = t + 1 - spec.length;
            let matrix = Matrix::from_fn(FEATURES, spec.length, |row, col| {
                day[start + col].feature(row)
            });
            out.push(SampleWindow {
                matrix,
                label: label_midprice(day, t, spec.horizon, spec.alpha)?,
                day_index: day[0].day_index,
                time_index: t,
            });
        }
    }
    Ok(out)
}

/// Contiguous runs of equal `day_index`.
pub(crate) fn days(events: &[LobEvent]) -> impl Iterator<Item = &[LobEvent]> {
    events.chunk_by(|a, b| a.day_index == b.day_index)
}
