//! EOLSR-vs-OLSR comparison and the five expected trends.
//!
//! | id | claim                                                        | cells             |
//! |----|--------------------------------------------------------------|-------------------|
//! | a  | NRL(eolsr) < NRL(olsr-default), every metric                 | rate 16           |
//! | b  | E2ED(md) below every other metric, olsr-default              | rates >= 8        |
//! | c  | NRL(md) above every other metric, both profiles              | every rate        |
//! | d  | throughput(ml) >= throughput(etx), both profiles             | rates >= 10       |
//! | e  | throughput(eolsr) >= throughput(olsr-default), every metric  | rate 16           |

use std::fmt::{self, Write as _};

use super::CellSummary;
use crate::metrics::MetricKind;
use crate::olsr::Profile;

pub const HIGH_RATE: f64 = 16.0;
pub const DELAY_MIN_RATE: f64 = 8.0;
pub const ML_MIN_RATE: f64 = 10.0;
/// Trends that must hold for the suite to pass.
pub const REQUIRED_TRENDS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
    Tie,
    Na,
}

impl Sign {
    fn of(eolsr: Option<f64>, olsr: Option<f64>) -> Sign {
        match (eolsr, olsr) {
            (Some(a), Some(b)) if a > b => Sign::Plus,
            (Some(a), Some(b)) if a < b => Sign::Minus,
            (Some(_), Some(_)) => Sign::Tie,
            _ => Sign::Na,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
            Sign::Tie => "TIE",
            Sign::Na => "NA",
        }
    }
}

/// Sign of `eolsr - olsr-default` for one (metric, rate).
#[derive(Debug, Clone, PartialEq)]
pub struct SignRow {
    pub metric: MetricKind,
    pub rate: f64,
    pub throughput: Sign,
    pub e2ed: Sign,
    pub nrl: Sign,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrendStatus {
    Holds,
    Fails,
    Tie,
    Untestable,
}

impl TrendStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            TrendStatus::Holds => "HOLDS",
            TrendStatus::Fails => "FAILS",
            TrendStatus::Tie => "TIE",
            TrendStatus::Untestable => "UNTESTABLE",
        }
    }
}

impl fmt::Display for TrendStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrendResult {
    pub id: char,
    pub name: &'static str,
    pub status: TrendStatus,
    /// Mean comparisons that could be evaluated.
    pub comparisons: usize,
    /// One line per failed mean comparison, naming the seeds on which the
    /// per-seed comparison also failed.
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrendReport {
    pub signs: Vec<SignRow>,
    pub trends: Vec<TrendResult>,
}

impl TrendReport {
    pub fn holding(&self) -> usize {
        self.trends.iter().filter(|t| t.status == TrendStatus::Holds).count()
    }

    pub fn passes(&self) -> bool {
        self.holding() >= REQUIRED_TRENDS
    }

    pub fn trend(&self, id: char) -> Option<&TrendResult> {
        self.trends.iter().find(|t| t.id == id)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("sign of (eolsr - olsr-default)\nmetric  rate  throughput  e2ed  nrl\n");
        for r in &self.signs {
            let _ = writeln!(
                s,
                "{:<7} {:>4}  {:>10}  {:>4}  {:>3}",
                r.metric.as_str(),
                r.rate,
                r.throughput.as_str(),
                r.e2ed.as_str(),
                r.nrl.as_str()
            );
        }
        s.push('\n');
        for t in &self.trends {
            let _ = writeln!(s, "({}) {}: {} [{} comparisons]", t.id, t.name, t.status, t.comparisons);
            for f in &t.failures {
                let _ = writeln!(s, "    {f}");
            }
        }
        let _ = writeln!(
            s,
            "\n{} of {} trends hold; suite {}",
            self.holding(),
            self.trends.len(),
            if self.passes() { "PASSES" } else { "FAILS" }
        );
        s
    }

    /// `kind,...` lines: `sign,metric,rate,throughput,e2ed,nrl` and
    /// `trend,id,name,status,comparisons,failures`.
    pub fn to_machine(&self) -> String {
        let mut s = String::new();
        for r in &self.signs {
            let _ = writeln!(
                s,
                "sign,{},{},{},{},{}",
                r.metric,
                r.rate,
                r.throughput.as_str(),
                r.e2ed.as_str(),
                r.nrl.as_str()
            );
        }
        for t in &self.trends {
            let _ = writeln!(
                s,
                "trend,{},{},{},{},{}",
                t.id,
                t.name,
                t.status,
                t.comparisons,
                t.failures.len()
            );
        }
        s
    }
}

#[derive(Clone, Copy)]
enum Want {
    Less,
    Greater,
    AtLeast,
}

enum Outcome {
    Holds,
    Fails,
    Tie,
    Missing,
}

fn judge(lhs: Option<f64>, rhs: Option<f64>, want: Want) -> Outcome {
    let (Some(a), Some(b)) = (lhs, rhs) else {
        return Outcome::Missing;
    };
    match want {
        Want::Less if a < b => Outcome::Holds,
        Want::Greater if a > b => Outcome::Holds,
        Want::Less | Want::Greater if a == b => Outcome::Tie,
        Want::AtLeast if a >= b => Outcome::Holds,
        _ => Outcome::Fails,
    }
}

#[derive(Clone, Copy)]
enum Param {
    Throughput,
    E2ed,
    Nrl,
}

impl Param {
    fn mean(self, c: &CellSummary) -> Option<f64> {
        match self {
            Param::Throughput => c.throughput,
            Param::E2ed => c.e2ed,
            Param::Nrl => c.nrl,
        }
    }

    fn seed(self, c: &CellSummary, i: usize) -> Option<f64> {
        let s = c.seeds.get(i)?;
        match self {
            Param::Throughput => s.throughput,
            Param::E2ed => s.e2ed,
            Param::Nrl => s.nrl,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Param::Throughput => "throughput",
            Param::E2ed => "e2ed",
            Param::Nrl => "nrl",
        }
    }
}

struct Trend {
    id: char,
    name: &'static str,
    comparisons: usize,
    fails: usize,
    ties: usize,
    failures: Vec<String>,
}

impl Trend {
    fn new(id: char, name: &'static str) -> Self {
        Trend {
            id,
            name,
            comparisons: 0,
            fails: 0,
            ties: 0,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, lhs: &CellSummary, rhs: &CellSummary, param: Param, want: Want) {
        match judge(param.mean(lhs), param.mean(rhs), want) {
            Outcome::Missing => return,
            Outcome::Holds => {}
            Outcome::Tie => self.ties += 1,
            Outcome::Fails => {
                self.fails += 1;
                let seeds: Vec<&str> = (0..lhs.seeds.len().min(rhs.seeds.len()))
                    .filter(|&i| {
                        matches!(
                            judge(param.seed(lhs, i), param.seed(rhs, i), want),
                            Outcome::Fails | Outcome::Tie
                        )
                    })
                    .map(|i| lhs.seeds[i].label.as_str())
                    .collect();
                self.failures.push(format!(
                    "{} {} {} rate {} vs {} {}: {} vs {} (seeds: {})",
                    param.name(),
                    lhs.profile,
                    lhs.metric,
                    lhs.rate,
                    rhs.profile,
                    rhs.metric,
                    param.mean(lhs).unwrap_or(f64::NAN),
                    param.mean(rhs).unwrap_or(f64::NAN),
                    if seeds.is_empty() { "none".to_string() } else { seeds.join(" ") }
                ));
            }
        }
        self.comparisons += 1;
    }

    fn finish(self) -> TrendResult {
        let status = if self.comparisons == 0 {
            TrendStatus::Untestable
        } else if self.fails > 0 {
            TrendStatus::Fails
        } else if self.ties > 0 {
            TrendStatus::Tie
        } else {
            TrendStatus::Holds
        };
        TrendResult {
            id: self.id,
            name: self.name,
            status,
            comparisons: self.comparisons,
            failures: self.failures,
        }
    }
}

fn rates(cells: &[CellSummary]) -> Vec<f64> {
    let mut r: Vec<f64> = cells.iter().map(|c| c.rate).collect();
    r.sort_by(f64::total_cmp);
    r.dedup();
    r
}

pub fn compare_profiles(cells: &[CellSummary]) -> TrendReport {
    let find = |p: Profile, m: MetricKind, rate: f64| {
        cells
            .iter()
            .find(|c| c.profile == p && c.metric == m && c.rate == rate)
    };
    let rates = rates(cells);
    let (olsr, eolsr) = (Profile::OlsrDefault, Profile::Eolsr);

    let mut signs = Vec::new();
    for m in MetricKind::ALL {
        for &rate in &rates {
            if let (Some(e), Some(o)) = (find(eolsr, m, rate), find(olsr, m, rate)) {
                signs.push(SignRow {
                    metric: m,
                    rate,
                    throughput: Sign::of(e.throughput, o.throughput),
                    e2ed: Sign::of(e.e2ed, o.e2ed),
                    nrl: Sign::of(e.nrl, o.nrl),
                });
            }
        }
    }

    let mut a = Trend::new('a', "NRL-reduction");
    let mut e = Trend::new('e', "EOLSR-throughput");
    for m in MetricKind::ALL {
        if let (Some(ec), Some(oc)) = (find(eolsr, m, HIGH_RATE), find(olsr, m, HIGH_RATE)) {
            a.check(ec, oc, Param::Nrl, Want::Less);
            e.check(ec, oc, Param::Throughput, Want::AtLeast);
        }
    }

    let mut b = Trend::new('b', "MD-lowest-delay");
    for &rate in rates.iter().filter(|&&r| r >= DELAY_MIN_RATE) {
        let Some(md) = find(olsr, MetricKind::Md, rate) else {
            continue;
        };
        for other in [MetricKind::Etx, MetricKind::InvEtx, MetricKind::Ml] {
            if let Some(oc) = find(olsr, other, rate) {
                b.check(md, oc, Param::E2ed, Want::Less);
            }
        }
    }

    let mut c = Trend::new('c', "MD-highest-load");
    let mut d = Trend::new('d', "ML-throughput");
    for p in Profile::ALL {
        for &rate in &rates {
            if let Some(md) = find(p, MetricKind::Md, rate) {
                for other in [MetricKind::Etx, MetricKind::InvEtx, MetricKind::Ml] {
                    if let Some(oc) = find(p, other, rate) {
                        c.check(md, oc, Param::Nrl, Want::Greater);
                    }
                }
            }
            if rate >= ML_MIN_RATE {
                if let (Some(ml), Some(etx)) = (find(p, MetricKind::Ml, rate), find(p, MetricKind::Etx, rate)) {
                    d.check(ml, etx, Param::Throughput, Want::AtLeast);
                }
            }
        }
    }

    TrendReport {
        signs,
        trends: vec![a.finish(), b.finish(), c.finish(), d.finish(), e.finish()],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::SeedPerf;

    fn cell(p: Profile, m: MetricKind, rate: f64, thr: f64, e2ed: f64, nrl: f64) -> CellSummary {
        CellSummary {
            profile: p,
            metric: m,
            rate,
            throughput: Some(thr),
            e2ed: Some(e2ed),
            nrl: Some(nrl),
            seeds: vec![SeedPerf {
                label: "101".into(),
                throughput: Some(thr),
                e2ed: Some(e2ed),
                nrl: Some(nrl),
            }],
        }
    }

    /// A matrix in which every trend holds.
    fn ideal() -> Vec<CellSummary> {
        let mut v = Vec::new();
        for p in Profile::ALL {
            let eo = (p == Profile::Eolsr) as u8 as f64;
            for m in MetricKind::ALL {
                for rate in [8.0, 16.0] {
                    let (thr, e2ed, nrl) = match m {
                        MetricKind::Etx => (10.0, 2.0, 3.0),
                        MetricKind::InvEtx => (10.0, 2.0, 3.0),
                        MetricKind::Ml => (11.0, 2.0, 3.0),
                        MetricKind::Md => (9.0, 1.0, 6.0),
                    };
                    v.push(cell(p, m, rate, thr + eo, e2ed, nrl - eo));
                }
            }
        }
        v
    }

    #[test]
    fn all_trends_hold_on_ideal_matrix() {
        let r = compare_profiles(&ideal());
        for t in &r.trends {
            assert_eq!(t.status, TrendStatus::Holds, "{}", t.name);
        }
        assert!(r.passes());
        assert_eq!(r.signs.len(), 8);
        assert!(r.signs.iter().all(|s| s.nrl == Sign::Minus && s.throughput == Sign::Plus));
    }

    #[test]
    fn nrl_reduction_fails_and_names_seed() {
        let mut cells = ideal();
        for c in cells.iter_mut() {
            if c.profile == Profile::Eolsr && c.metric == MetricKind::Etx && c.rate == 16.0 {
                c.nrl = Some(4.0);
                c.seeds[0].nrl = Some(4.0);
            }
        }
        let r = compare_profiles(&cells);
        let a = r.trend('a').unwrap();
        assert_eq!(a.status, TrendStatus::Fails);
        assert_eq!(a.failures.len(), 1);
        assert!(a.failures[0].contains("seeds: 101"), "{}", a.failures[0]);
        assert_eq!(r.holding(), 4);
        assert!(r.passes());
    }

    #[test]
    fn equal_values_tie() {
        let mut cells = ideal();
        for c in cells.iter_mut() {
            if c.rate == 16.0 && c.profile == Profile::Eolsr {
                c.nrl = Some(3.0);
                if c.metric == MetricKind::Md {
                    c.nrl = Some(6.0);
                }
            }
        }
        assert_eq!(compare_profiles(&cells).trend('a').unwrap().status, TrendStatus::Tie);
    }

    #[test]
    fn missing_md_rows_are_untestable() {
        let cells: Vec<_> = ideal().into_iter().filter(|c| c.metric != MetricKind::Md).collect();
        let r = compare_profiles(&cells);
        assert_eq!(r.trend('b').unwrap().status, TrendStatus::Untestable);
        assert_eq!(r.trend('c').unwrap().status, TrendStatus::Untestable);
        assert_eq!(r.trend('d').unwrap().status, TrendStatus::Holds);
    }
}
