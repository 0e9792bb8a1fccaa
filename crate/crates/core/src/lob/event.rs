use serde::{Deserialize, Serialize};

use crate::LEVELS;

/// One time-stamped ten-level book snapshot. Index 0 of each array is level 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LobEvent {
    /// Nanoseconds since the Unix epoch.
    pub timestamp: i64,
    /// Ordinal trading day, 0-based.
    pub day_index: usize,
    pub ask_price: [f64; LEVELS],
    pub ask_volume: [f64; LEVELS],
    pub bid_price: [f64; LEVELS],
    pub bid_volume: [f64; LEVELS],
}

impl LobEvent {
    pub fn mid_price(&self) -> f64 {
        (self.ask_price[0] + self.bid_price[0]) / 2.0
    }

    pub fn spread(&self) -> f64 {
        self.ask_price[0] - self.bid_price[0]
    }

    /// Feature `row` of the 40-row sample layout: four rows per level in the
    /// order ask price, ask volume, bid price, bid volume.
    #[inline]
    pub fn feature(&self, row: usize) -> f64 {
        let level = row / 4;
        match row % 4 {
            0 => self.ask_price[level],
            1 => self.ask_volume[level],
            2 => self.bid_price[level],
            _ => self.bid_volume[level],
        }
    }

    /// Checks the per-snapshot book invariants. On failure returns the
    /// offending 1-based level and a description.
    pub fn check(&self) -> Result<(), (usize, String)> {
        for k in 0..LEVELS {
            let level = k + 1;
            let fields = [
                self.ask_price[k],
                self.ask_volume[k],
                self.bid_price[k],
                self.bid_volume[k],
            ];
            if fields.iter().any(|v| !v.is_finite()) {
                return Err((level, "non-finite price or volume".into()));
            }
            if self.ask_volume[k] <= 0.0 || self.bid_volume[k] <= 0.0 {
                return Err((level, "volume must be positive".into()));
            }
            if k == 0 {
                if self.ask_price[0] <= self.bid_price[0] {
                    return Err((
                        level,
                        format!(
                            "crossed or locked book: ask {} <= bid {}",
                            self.ask_price[0], self.bid_price[0]
                        ),
                    ));
                }
            } else {
                if self.ask_price[k] <= self.ask_price[k - 1] {
                    return Err((
                        level,
                        format!(
                            "ask price {} not above level {} ask {}",
                            self.ask_price[k],
                            k,
                            self.ask_price[k - 1]
                        ),
                    ));
                }
                if self.bid_price[k] >= self.bid_price[k - 1] {
                    return Err((
                        level,
                        format!(
                            "bid price {} not below level {} bid {}",
                            self.bid_price[k],
                            k,
                            self.bid_price[k - 1]
                        ),
                    ));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
pub(crate) fn flat_event(day_index: usize, timestamp: i64, mid: f64) -> LobEvent {
    let mut e = LobEvent {
        timestamp,
        day_index,
        ask_price: [0.0; LEVELS],
        ask_volume: [100.0; LEVELS],
        bid_price: [0.0; LEVELS],
        bid_volume: [100.0; LEVELS],
    };
    for k in 0..LEVELS {
        e.ask_price[k] = mid + 0.01 * (k as f64 + 0.5);
        e.bid_price[k] = mid - 0.01 * (k as f64 + 0.5);
    }
    e
}
