use std::fmt::Write;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::consensus::{average_across_configs, ConsensusTable};
use crate::error::{Error, Result};
use crate::LEVELS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChartKind {
    /// BE subsets of one, two and three levels.
    EliminationCardinality,
    /// BPSO best, second-best and third-best masks.
    BpsoRanked,
}

impl ChartKind {
    fn title(self) -> &'static str {
        match self {
            ChartKind::EliminationCardinality => "Backward elimination: level appearance by subset size",
            ChartKind::BpsoRanked => "BPSO: level appearance in the best solutions",
        }
    }

    fn series_name(self, i: usize) -> String {
        match (self, i) {
            (ChartKind::EliminationCardinality, i) => format!("{}-element", i + 1),
            (ChartKind::BpsoRanked, 0) => "best".into(),
            (ChartKind::BpsoRanked, 1) => "second best".into(),
            (ChartKind::BpsoRanked, 2) => "third best".into(),
            (ChartKind::BpsoRanked, i) => format!("rank {}", i + 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartSeries {
    pub name: String,
    /// Percentage per level, level 1 first.
    pub values: [f64; LEVELS],
}

const PALETTE: [&str; 4] = ["#1f4e79", "#c55a11", "#548235", "#7f6000"];
const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 380.0;
const LEFT: f64 = 60.0;
const TOP: f64 = 40.0;
const PLOT_W: f64 = 660.0;
const PLOT_H: f64 = 280.0;

/// Grouped bar chart of cross-configuration mean appearance percentages, one
/// series per table.
pub fn selection_frequency_chart(tables: &[ConsensusTable], kind: ChartKind) -> Result<String> {
    if tables.is_empty() {
        return Err(Error::arg("no tables to chart"));
    }
    let series = tables
        .iter()
        .enumerate()
        .map(|(i, t)| {
            Ok(ChartSeries {
                name: kind.series_name(i),
                values: average_across_configs(t)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    render_chart(kind.title(), &series)
}

pub fn render_chart(title: &str, series: &[ChartSeries]) -> Result<String> {
    if series.is_empty() {
        return Err(Error::arg("no series to chart"));
    }
    if let Some(bad) = series
        .iter()
        .flat_map(|s| s.values)
        .find(|v| !(0.0..=100.0).contains(v))
    {
        return Err(Error::arg(format!("percentage {bad} outside [0, 100]")));
    }
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<title>{}</title>"#, escape(title));
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let base = TOP + PLOT_H;
    for tick in (0..=100).step_by(20) {
        let y = base - PLOT_H * tick as f64 / 100.0;
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{y}" x2="{}" y2="{y}" stroke="#dddddd"/><text x="{}" y="{}" text-anchor="end">{tick}%</text>"##,
            LEFT + PLOT_W,
            LEFT - 6.0,
            y + 4.0
        );
    }
    let group_w = PLOT_W / LEVELS as f64;
    let bar_w = group_w * 0.8 / series.len() as f64;
    for level in 1..=LEVELS {
        let x0 = LEFT + group_w * (level - 1) as f64 + group_w * 0.1;
        for (i, s) in series.iter().enumerate() {
            let v = s.values[level - 1];
            let h = PLOT_H * v / 100.0;
            let _ = writeln!(
                svg,
                r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{}" data-series="{}" data-level="{level}" data-value="{v}"/>"#,
                x0 + bar_w * i as f64,
                base - h,
                bar_w,
                h,
                PALETTE[i % PALETTE.len()],
                escape(&s.name)
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{:.3}" y="{}" text-anchor="middle">{level}</text>"#,
            x0 + group_w * 0.4,
            base + 16.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">Level</text>"#,
        LEFT + PLOT_W / 2.0,
        base + 34.0
    );
    for (i, s) in series.iter().enumerate() {
        let x = LEFT + 10.0 + 150.0 * i as f64;
        let y = HEIGHT - 16.0;
        let _ = writeln!(
            svg,
            r#"<rect x="{x}" y="{}" width="10" height="10" fill="{}"/><text x="{}" y="{y}">{}</text>"#,
            y - 9.0,
            PALETTE[i % PALETTE.len()],
            x + 14.0,
            escape(&s.name)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Recovers the bar values from a chart produced by [`render_chart`].
pub fn parse_chart(svg: &str) -> Result<Vec<ChartSeries>> {
    let re = Regex::new(r#"data-series="([^"]*)" data-level="(\d+)" data-value="([^"]+)""#)
        .expect("static pattern");
    let mut series: Vec<ChartSeries> = Vec::new();
    for cap in re.captures_iter(svg) {
        let name = unescape(&cap[1]);
        let level: usize = cap[2].parse().map_err(|_| Error::Format("bad level".into()))?;
        let value: f64 = cap[3].parse().map_err(|_| Error::Format("bad value".into()))?;
        if !(1..=LEVELS).contains(&level) {
            return Err(Error::Format(format!("level {level} in chart")));
        }
        let idx = match series.iter().position(|s| s.name == name) {
            Some(i) => i,
            None => {
                series.push(ChartSeries {
                    name,
                    values: [f64::NAN; LEVELS],
                });
                series.len() - 1
            }
        };
        series[idx].values[level - 1] = value;
    }
    if series.is_empty() || series.iter().any(|s| s.values.iter().any(|v| v.is_nan())) {
        return Err(Error::Format("chart has missing bars".into()));
    }
    Ok(series)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn unescape(s: &str) -> String {
    s.replace("&quot;", "\"")
        .replace("&gt;", ">")
        .replace("&lt;", "<")
        .replace("&amp;", "&")
}
