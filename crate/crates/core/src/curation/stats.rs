use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::sample::SampleRecord;
use crate::annotation::{LightPosition, UNKNOWN_POSITION};
use crate::error::Result;
use crate::io::write_text;

pub const HIST_BIN_WIDTH: u32 = 10;
/// Extents at or above this value land in the overflow bin.
pub const HIST_LIMIT: u32 = 128;

/// Fixed-width histogram over `[0, 128)` plus an overflow bin.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Histogram {
    /// One count per bin; the last entry is the overflow bin.
    pub counts: Vec<usize>,
}

impl Default for Histogram {
    fn default() -> Self {
        Self {
            counts: vec![0; HIST_LIMIT.div_ceil(HIST_BIN_WIDTH) as usize + 1],
        }
    }
}

impl Histogram {
    pub fn add(&mut self, value: f64) {
        let last = self.counts.len() - 1;
        let bin = if value >= HIST_LIMIT as f64 {
            last
        } else {
            (value.max(0.0) / HIST_BIN_WIDTH as f64) as usize
        };
        self.counts[bin.min(last)] += 1;
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// `(bin_start, bin_end, count)`; the overflow bin has no end.
    pub fn bins(&self) -> impl Iterator<Item = (u32, Option<u32>, usize)> + '_ {
        let last = self.counts.len() - 1;
        self.counts.iter().enumerate().map(move |(i, &c)| {
            let start = i as u32 * HIST_BIN_WIDTH;
            if i == last {
                (HIST_LIMIT, None, c)
            } else {
                (start, Some((start + HIST_BIN_WIDTH).min(HIST_LIMIT)), c)
            }
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LightStats {
    /// Samples per position, ordered front-left, front-right, rear-left, rear-right.
    pub per_position: [usize; 4],
    pub unknown_position: usize,
    pub total: usize,
    pub widths: Histogram,
    pub heights: Histogram,
}

impl LightStats {
    pub fn count(&self, p: LightPosition) -> usize {
        self.per_position[p.index()]
    }
}

/// Per-position counts and light width/height histograms.
///
/// Width is the spread of visible-corner x coordinates, height the spread of
/// visible-corner y coordinates; an axis with fewer than two visible corners
/// is left out of that histogram.
pub fn compute_stats(records: &[SampleRecord]) -> LightStats {
    let mut stats = LightStats::default();
    for r in records {
        match r.position {
            Some(p) => stats.per_position[p.index()] += 1,
            None => stats.unknown_position += 1,
        }
        stats.total += 1;
        let (w, h) = r.light_extent();
        if let Some(w) = w {
            stats.widths.add(w);
        }
        if let Some(h) = h {
            stats.heights.add(h);
        }
    }
    stats
}

/// `position,count` rows for every non-empty position, then a total row.
pub fn positions_csv(stats: &LightStats) -> String {
    let mut out = String::from("position,count\n");
    for p in LightPosition::ALL {
        if stats.count(p) > 0 {
            writeln!(out, "{p},{}", stats.count(p)).expect("string write");
        }
    }
    if stats.unknown_position > 0 {
        writeln!(out, "{UNKNOWN_POSITION},{}", stats.unknown_position).expect("string write");
    }
    if stats.total > 0 {
        writeln!(out, "total,{}", stats.total).expect("string write");
    }
    out
}

/// `bin_start,bin_end,count` rows; no rows when nothing was measured.
pub fn histogram_csv(hist: &Histogram) -> String {
    let mut out = String::from("bin_start,bin_end,count\n");
    if hist.total() == 0 {
        return out;
    }
    for (start, end, count) in hist.bins() {
        match end {
            Some(end) => writeln!(out, "{start},{end},{count}"),
            None => writeln!(out, "{start},inf,{count}"),
        }
        .expect("string write");
    }
    out
}

pub const POSITIONS_CSV: &str = "positions.csv";
pub const WIDTHS_CSV: &str = "width_histogram.csv";
pub const HEIGHTS_CSV: &str = "height_histogram.csv";

pub fn write_stats(stats: &LightStats, dir: &Path) -> Result<()> {
    write_text(&dir.join(POSITIONS_CSV), &positions_csv(stats))?;
    write_text(&dir.join(WIDTHS_CSV), &histogram_csv(&stats.widths))?;
    write_text(&dir.join(HEIGHTS_CSV), &histogram_csv(&stats.heights))
}
