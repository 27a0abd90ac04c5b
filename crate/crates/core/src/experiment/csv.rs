use std::fmt::Write as _;
use std::path::Path;

use super::ResultRow;
use crate::error::{Error, Result};
use crate::metrics::MetricKind;
use crate::olsr::Profile;
use crate::sim::SimStats;

/// Marker for undefined values.
pub const NA: &str = "NA";

/// Decimal rendering rounded to 6 significant digits.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_nan() { NA.to_string() } else { format!("{}", x) };
    }
    let rounded: f64 = format!("{x:.5e}").parse().expect("scientific output parses");
    format!("{rounded}")
}

fn cell(v: Option<f64>) -> String {
    v.map_or(NA.to_string(), format_sig6)
}

fn parse_cell(s: &str, line: usize) -> Result<Option<f64>> {
    if s == NA {
        return Ok(None);
    }
    s.parse()
        .map(Some)
        .map_err(|_| Error::parse(line, format!("bad number `{s}`")))
}

/// Per-seed performance as read back from a CSV or taken from a row.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedPerf {
    pub label: String,
    pub throughput: Option<f64>,
    pub e2ed: Option<f64>,
    pub nrl: Option<f64>,
}

/// Means and per-seed performance of one cell; the input of the trend
/// comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub profile: Profile,
    pub metric: MetricKind,
    pub rate: f64,
    pub throughput: Option<f64>,
    pub e2ed: Option<f64>,
    pub nrl: Option<f64>,
    pub seeds: Vec<SeedPerf>,
}

impl ResultRow {
    pub fn summary(&self) -> CellSummary {
        let seeds = self
            .seeds
            .iter()
            .map(|&seed| {
                let run = self.runs.iter().find(|r| r.seed == seed);
                SeedPerf {
                    label: seed.to_string(),
                    throughput: run.map(|r| r.performance.throughput),
                    e2ed: run.and_then(|r| r.performance.e2ed),
                    nrl: run.and_then(|r| r.performance.nrl),
                }
            })
            .collect();
        CellSummary {
            profile: self.profile,
            metric: self.metric,
            rate: self.rate,
            throughput: self.throughput_mean(),
            e2ed: self.e2ed_mean(),
            nrl: self.nrl_mean(),
            seeds,
        }
    }
}

type Counter = (&'static str, fn(&SimStats) -> u64);

const COUNTERS: [Counter; 12] = [
    ("data_sent_mean", |s| s.data_sent),
    ("data_delivered_mean", |s| s.data_delivered),
    ("in_flight_mean", |s| s.in_flight),
    ("drop_loss_mean", |s| s.drops.loss),
    ("drop_no_route_mean", |s| s.drops.no_route),
    ("drop_ttl_mean", |s| s.drops.ttl),
    ("drop_queue_mean", |s| s.drops.queue),
    ("hello_tx_mean", |s| s.hello_tx),
    ("tc_tx_mean", |s| s.tc_tx),
    ("tc_triggered_tx_mean", |s| s.tc_triggered_tx),
    ("probe_tx_mean", |s| s.probe_tx),
    ("mpr_changes_mean", |s| s.mpr_changes),
];

/// CSV text: one header line plus one line per row. Every row must have
/// the same number of seeds.
pub fn render_csv(rows: &[ResultRow]) -> Result<String> {
    let Some(first) = rows.first() else {
        return Err(Error::invalid("no rows to write"));
    };
    let n = first.seeds.len();
    if rows.iter().any(|r| r.seeds.len() != n) {
        return Err(Error::invalid("rows have different seed counts"));
    }
    let mut out = String::from("profile,metric,rate,throughput_mean,e2ed_mean,nrl_mean");
    for i in 1..=n {
        let _ = write!(out, ",seed{i}_throughput,seed{i}_e2ed,seed{i}_nrl");
    }
    for (name, _) in COUNTERS {
        out.push(',');
        out.push_str(name);
    }
    out.push_str(",status\n");

    for row in rows {
        let s = row.summary();
        let _ = write!(
            out,
            "{},{},{},{},{},{}",
            s.profile,
            s.metric,
            format_sig6(s.rate),
            cell(s.throughput),
            cell(s.e2ed),
            cell(s.nrl)
        );
        for p in &s.seeds {
            let _ = write!(out, ",{},{},{}", cell(p.throughput), cell(p.e2ed), cell(p.nrl));
        }
        for (_, f) in COUNTERS {
            let _ = write!(out, ",{}", cell(row.counter_mean(f)));
        }
        let status = match &row.error {
            None => "ok".to_string(),
            Some(e) => format!("error: {}", e.replace([',', '\n'], ";")),
        };
        let _ = writeln!(out, ",{status}");
    }
    Ok(out)
}

pub fn emit_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    let text = render_csv(rows)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Reads back the performance columns written by [`render_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<CellSummary>> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "empty CSV"))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.get(..6) != Some(&["profile", "metric", "rate", "throughput_mean", "e2ed_mean", "nrl_mean"][..]) {
        return Err(Error::parse(1, "unexpected header"));
    }
    let seeds = cols.iter().filter(|c| c.ends_with("_throughput")).count();
    let mut out = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != cols.len() {
            return Err(Error::parse(line_no, format!("expected {} fields, got {}", cols.len(), f.len())));
        }
        let mut seed_perf = Vec::with_capacity(seeds);
        for k in 0..seeds {
            let base = 6 + 3 * k;
            seed_perf.push(SeedPerf {
                label: format!("seed{}", k + 1),
                throughput: parse_cell(f[base], line_no)?,
                e2ed: parse_cell(f[base + 1], line_no)?,
                nrl: parse_cell(f[base + 2], line_no)?,
            });
        }
        out.push(CellSummary {
            profile: f[0].parse()?,
            metric: f[1].parse()?,
            rate: parse_cell(f[2], line_no)?.ok_or_else(|| Error::parse(line_no, "rate is NA"))?,
            throughput: parse_cell(f[3], line_no)?,
            e2ed: parse_cell(f[4], line_no)?,
            nrl: parse_cell(f[5], line_no)?,
            seeds: seed_perf,
        });
    }
    Ok(out)
}
