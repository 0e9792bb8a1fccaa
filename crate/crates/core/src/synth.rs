//! Synthetic order-book streams with planted level informativeness.
//!
//! The mid-price is piecewise constant: a latent regime persists for a
//! geometric number of events (memoryless, configurable mean) and ends with a
//! multiplicative jump up or down. Shortly before a jump, informative levels
//! tilt their bid/ask volume imbalance towards the jump direction. Prices and
//! the remaining levels carry no information about the upcoming move, so a
//! classifier can only predict labels through the planted volume signal.

use std::collections::BTreeMap;

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lob::LobEvent;
use crate::masking::LevelMask;
use crate::LEVELS;

const MEAN_VOLUME: f64 = 500.0;
const VOLUME_SPREAD: f64 = 0.2;
const NOISE_SCALE: f64 = 0.5;
const MAX_IMBALANCE: f64 = 0.9;
/// Trading starts at 13:30 UTC.
const OPEN_NS: i64 = (13 * 3600 + 30 * 60) * 1_000_000_000;
const MAX_GAP_NS: i64 = 20_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub days: usize,
    pub events_per_day: usize,
    pub informative_levels: LevelMask,
    /// Imbalance weight of the strongest informative level, in `[0, 1]`.
    pub signal_strength: f64,
    /// Each further informative level (in level order) gets this multiple of
    /// the previous level's strength.
    pub signal_decay: f64,
    pub base_price: f64,
    pub tick: f64,
    /// Expected number of events between mid-price jumps.
    pub mean_run_length: f64,
    /// Relative size of a mid-price jump.
    pub jump_fraction: f64,
    /// How many events ahead of a jump the volume signal switches on.
    pub signal_lead: usize,
    /// First trading date; later days skip weekends.
    pub start_date: NaiveDate,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            days: 10,
            events_per_day: 2000,
            informative_levels: LevelMask::single(1).expect("level 1 is valid"),
            signal_strength: 0.9,
            signal_decay: 1.0,
            base_price: 100.0,
            tick: 0.01,
            mean_run_length: 25.0,
            jump_fraction: 0.025,
            signal_lead: 10,
            start_date: NaiveDate::from_ymd_opt(2015, 9, 22).expect("valid date"),
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::arg(format!("synthetic config: {m}")));
        if self.days == 0 || self.events_per_day == 0 {
            return bad("days and events_per_day must be positive");
        }
        if !(0.0..=1.0).contains(&self.signal_strength) {
            return bad("signal_strength must lie in [0, 1]");
        }
        if !(self.signal_decay > 0.0 && self.signal_decay <= 1.0) {
            return bad("signal_decay must lie in (0, 1]");
        }
        if !(self.tick > 0.0 && self.tick.is_finite()) {
            return bad("tick must be positive");
        }
        if !(self.base_price.is_finite() && self.base_price >= 100.0 * self.tick) {
            return bad("base_price must be at least 100 ticks");
        }
        if !(self.mean_run_length >= 1.0 && self.mean_run_length.is_finite()) {
            return bad("mean_run_length must be at least 1");
        }
        if !(self.jump_fraction > 0.0 && self.jump_fraction < 0.5) {
            return bad("jump_fraction must lie in (0, 0.5)");
        }
        if self.signal_lead == 0 {
            return bad("signal_lead must be positive");
        }
        Ok(())
    }

    /// Signal weight per level; zero for non-informative levels.
    pub fn level_strengths(&self) -> [f64; LEVELS] {
        let mut out = [0.0; LEVELS];
        let mut s = self.signal_strength;
        for level in self.informative_levels.levels() {
            out[level - 1] = s;
            s *= self.signal_decay;
        }
        out
    }

    /// Reads `key=value` pairs with keys relative to a prefix (for example
    /// `days` for `dataset.synthetic.synth.days`). Unknown keys are rejected.
    pub fn from_pairs(pairs: &BTreeMap<String, String>) -> Result<Self> {
        let mut c = SynthConfig::default();
        for (key, value) in pairs {
            let err = || Error::Config(format!("invalid value for synthetic key {key}: {value}"));
            match key.as_str() {
                "days" => c.days = value.parse().map_err(|_| err())?,
                "events_per_day" => c.events_per_day = value.parse().map_err(|_| err())?,
                "informative_levels" => c.informative_levels = parse_levels(value).ok_or_else(err)?,
                "signal_strength" => c.signal_strength = value.parse().map_err(|_| err())?,
                "signal_decay" => c.signal_decay = value.parse().map_err(|_| err())?,
                "base_price" => c.base_price = value.parse().map_err(|_| err())?,
                "tick" => c.tick = value.parse().map_err(|_| err())?,
                "mean_run_length" => c.mean_run_length = value.parse().map_err(|_| err())?,
                "jump_fraction" => c.jump_fraction = value.parse().map_err(|_| err())?,
                "signal_lead" => c.signal_lead = value.parse().map_err(|_| err())?,
                "start_date" => {
                    c.start_date = NaiveDate::parse_from_str(value, "%Y-%m-%d").map_err(|_| err())?
                }
                "seed" => c.seed = value.parse().map_err(|_| err())?,
                _ => return Err(Error::Config(format!("unknown synthetic key {key}"))),
            }
        }
        c.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(c)
    }
}

/// Accepts a 10-character mask or a list of levels such as `1|2|3` or `1 2 3`.
fn parse_levels(value: &str) -> Option<LevelMask> {
    if let Ok(mask) = value.parse::<LevelMask>() {
        return Some(mask);
    }
    let levels: Option<Vec<usize>> = value
        .split(|c: char| c == '|' || c == ' ' || c == ';')
        .filter(|s| !s.is_empty())
        .map(|s| s.trim().parse().ok())
        .collect();
    LevelMask::from_levels(levels?).ok()
}

fn trading_dates(start: NaiveDate, days: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(days);
    let mut d = start;
    while out.len() < days {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d += Duration::days(1);
    }
    out
}

pub fn generate(config: &SynthConfig) -> Result<Vec<LobEvent>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let strengths = config.level_strengths();
    let n = config.events_per_day;
    let mut events = Vec::with_capacity(config.days * n);

    for (day_index, date) in trading_dates(config.start_date, config.days)
        .into_iter()
        .enumerate()
    {
        // jump_after[u]: the mid-price moves between event u and u + 1.
        let quit = 1.0 / config.mean_run_length;
        let jump_after: Vec<bool> = (0..n).map(|_| rng.gen_bool(quit)).collect();
        let mut direction = Vec::with_capacity(n);
        let mut d = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        for &jump in &jump_after {
            direction.push(d);
            if jump {
                d = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            }
        }
        // Events until the next jump (1 when the jump follows this event).
        let mut until_jump = vec![usize::MAX; n];
        let mut next = usize::MAX;
        for u in (0..n).rev() {
            if jump_after[u] {
                next = 1;
            } else if next != usize::MAX {
                next += 1;
            }
            until_jump[u] = next;
        }

        let midnight = date
            .and_hms_opt(0, 0, 0)
            .expect("midnight exists")
            .and_utc()
            .timestamp_nanos_opt()
            .ok_or_else(|| Error::arg("start date out of range"))?;
        let mut timestamp = midnight + OPEN_NS;
        let min_ticks = 40i64;
        let mut ref_ticks = (config.base_price / config.tick).round() as i64;

        for u in 0..n {
            timestamp += rng.gen_range(1..=MAX_GAP_NS);
            let event = book_event(
                &mut rng,
                config,
                &strengths,
                ref_ticks,
                if until_jump[u] <= config.signal_lead {
                    direction[u]
                } else {
                    0.0
                },
                timestamp,
                day_index,
            );
            events.push(event);
            if jump_after[u] {
                let step = ((ref_ticks as f64) * config.jump_fraction).round().max(1.0) as i64;
                ref_ticks = (ref_ticks + direction[u] as i64 * step).max(min_ticks);
            }
        }
    }
    Ok(events)
}

fn book_event(
    rng: &mut ChaCha8Rng,
    config: &SynthConfig,
    strengths: &[f64; LEVELS],
    ref_ticks: i64,
    active: f64,
    timestamp: i64,
    day_index: usize,
) -> LobEvent {
    let price = |ticks: i64| ((ticks as f64) * config.tick * 1e8).round() / 1e8;
    let spread: i64 = rng.gen_range(1..=3);
    let mut bid = ref_ticks - spread / 2;
    let mut ask = bid + spread;

    let mut e = LobEvent {
        timestamp,
        day_index,
        ask_price: [0.0; LEVELS],
        ask_volume: [0.0; LEVELS],
        bid_price: [0.0; LEVELS],
        bid_volume: [0.0; LEVELS],
    };
    for k in 0..LEVELS {
        if k > 0 {
            ask += rng.gen_range(1..=2);
            bid -= rng.gen_range(1..=2);
        }
        e.ask_price[k] = price(ask);
        e.bid_price[k] = price(bid);

        let noise: f64 = rng.sample(StandardNormal);
        let s = strengths[k];
        let imbalance =
            (s * active + (1.0 - s) * NOISE_SCALE * noise).clamp(-MAX_IMBALANCE, MAX_IMBALANCE);
        let size: f64 = rng.sample(StandardNormal);
        let volume = MEAN_VOLUME * (VOLUME_SPREAD * size).exp();
        e.bid_volume[k] = volume * (1.0 + imbalance) / 2.0;
        e.ask_volume[k] = volume * (1.0 - imbalance) / 2.0;
    }
    e
}
