//! Comma-separated event files: a header line, then one snapshot per line with
//! `date,timestamp_ns` followed by `ask_price_k,ask_volume_k,bid_price_k,bid_volume_k`
//! for k = 1..10 (42 columns).

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use chrono::{DateTime, NaiveDate};

use super::LobEvent;
use crate::error::{Error, Result};
use crate::LEVELS;

const COLUMNS: usize = 2 + 4 * LEVELS;

/// One problem found by [`validate_events_file`]. `level` is 0 for row-level
/// problems that do not belong to a book level.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub line: usize,
    pub level: usize,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.level == 0 {
            write!(f, "line {}: {}", self.line, self.message)
        } else {
            write!(f, "line {}, level {}: {}", self.line, self.level, self.message)
        }
    }
}

pub fn header() -> String {
    let mut h = String::from("date,timestamp_ns");
    for k in 1..=LEVELS {
        let _ = write!(h, ",ask_price_{k},ask_volume_{k},bid_price_{k},bid_volume_{k}");
    }
    h
}

/// Parses an event file, stopping at the first malformed or invalid row.
pub fn parse_events(path: &Path) -> Result<Vec<LobEvent>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_events(BufReader::new(file))
}

pub fn read_events<R: BufRead>(reader: R) -> Result<Vec<LobEvent>> {
    let mut scanner = Scanner::default();
    let mut events = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if let Some(event) = scanner.feed(line_no, &line)? {
            events.push(event);
        }
    }
    if !scanner.seen_header {
        return Err(Error::Parse {
            line: 1,
            message: "missing header line".into(),
        });
    }
    Ok(events)
}

/// Scans the whole file and reports every violation instead of stopping at
/// the first one.
pub fn validate_events_file(path: &Path) -> Result<(usize, Vec<Violation>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut scanner = Scanner::default();
    let mut rows = 0;
    let mut violations = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        match scanner.feed(line_no, &line) {
            Ok(Some(_)) => rows += 1,
            Ok(None) => {}
            Err(Error::Parse { line, message }) => {
                rows += usize::from(scanner.seen_header && line > 1);
                violations.push(Violation { line, level: 0, message });
            }
            Err(Error::Validation { line, level, message }) => {
                rows += 1;
                violations.push(Violation { line, level, message });
            }
            Err(other) => return Err(other),
        }
    }
    if !scanner.seen_header {
        violations.push(Violation {
            line: 1,
            level: 0,
            message: "missing header line".into(),
        });
    }
    Ok((rows, violations))
}

/// Renders events in the file format. The date column is the UTC calendar
/// date of each timestamp.
pub fn format_events(events: &[LobEvent]) -> Result<String> {
    let mut out = header();
    out.push('\n');
    for e in events {
        let secs = e.timestamp.div_euclid(1_000_000_000);
        let nanos = e.timestamp.rem_euclid(1_000_000_000) as u32;
        let date = DateTime::from_timestamp(secs, nanos)
            .ok_or_else(|| Error::arg(format!("timestamp {} out of range", e.timestamp)))?
            .date_naive();
        let _ = write!(out, "{},{}", date.format("%Y-%m-%d"), e.timestamp);
        for k in 0..LEVELS {
            let _ = write!(
                out,
                ",{},{},{},{}",
                e.ask_price[k], e.ask_volume[k], e.bid_price[k], e.bid_volume[k]
            );
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn write_events(path: &Path, events: &[LobEvent]) -> Result<()> {
    crate::experiment::write_atomic(path, format_events(events)?.as_bytes())
}

#[derive(Default)]
struct Scanner {
    seen_header: bool,
    current_date: Option<NaiveDate>,
    day_index: usize,
    last_timestamp: i64,
}

impl Scanner {
    fn feed(&mut self, line_no: usize, line: &str) -> Result<Option<LobEvent>> {
        let line = line.trim_end_matches('\r');
        if !self.seen_header {
            self.seen_header = true;
            let cols = line.split(',').count();
            let first = line.split(',').next().unwrap_or("").trim();
            if cols != COLUMNS || !first.eq_ignore_ascii_case("date") {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected a {COLUMNS}-column header starting with 'date'"),
                });
            }
            return Ok(None);
        }
        if line.trim().is_empty() {
            return Ok(None);
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != COLUMNS {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected {COLUMNS} columns, found {}", fields.len()),
            });
        }
        let date = NaiveDate::parse_from_str(fields[0], "%Y-%m-%d").map_err(|_| Error::Parse {
            line: line_no,
            message: format!("bad date '{}'", fields[0]),
        })?;
        let timestamp: i64 = fields[1].parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("bad timestamp '{}'", fields[1]),
        })?;
        let mut values = [0.0f64; 4 * LEVELS];
        for (i, raw) in fields[2..].iter().enumerate() {
            values[i] = raw.parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("column {}: non-numeric value '{raw}'", i + 3),
            })?;
        }

        match self.current_date {
            Some(d) if date < d => {
                return Err(Error::Validation {
                    line: line_no,
                    level: 0,
                    message: format!("date {date} precedes {d}"),
                })
            }
            Some(d) if date > d => {
                self.day_index += 1;
                self.current_date = Some(date);
            }
            Some(_) => {
                if timestamp < self.last_timestamp {
                    return Err(Error::Validation {
                        line: line_no,
                        level: 0,
                        message: format!(
                            "timestamp {timestamp} precedes {} within the day",
                            self.last_timestamp
                        ),
                    });
                }
            }
            None => self.current_date = Some(date),
        }
        self.last_timestamp = timestamp;

        let mut event = LobEvent {
            timestamp,
            day_index: self.day_index,
            ask_price: [0.0; LEVELS],
            ask_volume: [0.0; LEVELS],
            bid_price: [0.0; LEVELS],
            bid_volume: [0.0; LEVELS],
        };
        for k in 0..LEVELS {
            event.ask_price[k] = values[4 * k];
            event.ask_volume[k] = values[4 * k + 1];
            event.bid_price[k] = values[4 * k + 2];
            event.bid_volume[k] = values[4 * k + 3];
        }
        event
            .check()
            .map_err(|(level, message)| Error::Validation {
                line: line_no,
                level,
                message,
            })?;
        Ok(Some(event))
    }
}
