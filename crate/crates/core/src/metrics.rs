//! Link quality estimation and path metric algebra.
//!
//! Link estimates come from two sources: windowed HELLO reception counts
//! (forward and reverse delivery ratios) and MD probe one-way delays. Paths
//! are scored as
//!
//! | metric | per path                  | preferred |
//! |--------|---------------------------|-----------|
//! | ETX    | sum of `1 / (fd * rd)`    | lower     |
//! | InvETX | sum of `fd * rd`          | fewer hops, then higher |
//! | ML     | product of `fd * rd`      | higher    |
//! | MD     | sum of one-way delays     | lower     |

use std::cmp::Ordering;
use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MetricKind {
    Etx,
    InvEtx,
    Ml,
    Md,
}

impl MetricKind {
    pub const ALL: [MetricKind; 4] = [MetricKind::Etx, MetricKind::InvEtx, MetricKind::Ml, MetricKind::Md];

    pub fn as_str(self) -> &'static str {
        match self {
            MetricKind::Etx => "etx",
            MetricKind::InvEtx => "invetx",
            MetricKind::Ml => "ml",
            MetricKind::Md => "md",
        }
    }

    /// Whether the metric needs probe traffic in addition to HELLOs.
    pub fn uses_probes(self) -> bool {
        self == MetricKind::Md
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "etx" => Ok(MetricKind::Etx),
            "invetx" => Ok(MetricKind::InvEtx),
            "ml" => Ok(MetricKind::Ml),
            "md" => Ok(MetricKind::Md),
            _ => Err(Error::UnknownName {
                what: "metric",
                value: s.to_string(),
            }),
        }
    }
}

/// Sliding window of HELLO receipt times from one neighbor.
#[derive(Debug, Clone, PartialEq)]
pub struct HelloWindow {
    window: f64,
    expected: u32,
    receipts: VecDeque<f64>,
}

impl HelloWindow {
    /// Window of `window` seconds over HELLOs sent every `hello_interval`.
    pub fn new(window: f64, hello_interval: f64) -> Result<Self> {
        if !(window > 0.0) || !(hello_interval > 0.0) {
            return Err(Error::invalid("window and hello interval must be positive"));
        }
        let expected = (window / hello_interval).round();
        if expected < 1.0 || ((expected * hello_interval) - window).abs() > 1e-9 * window {
            return Err(Error::invalid(format!(
                "window {window}s is not a positive multiple of the hello interval {hello_interval}s"
            )));
        }
        Self::with_expected(window, expected as u32)
    }

    pub fn with_expected(window: f64, expected: u32) -> Result<Self> {
        if expected == 0 {
            return Err(Error::invalid("expected HELLO count must be positive"));
        }
        if !(window > 0.0) {
            return Err(Error::invalid("window must be positive"));
        }
        Ok(HelloWindow {
            window,
            expected,
            receipts: VecDeque::new(),
        })
    }

    pub fn window(&self) -> f64 {
        self.window
    }

    pub fn expected(&self) -> u32 {
        self.expected
    }

    /// Records a receipt at `t` and drops receipts older than the window.
    /// Timestamps must be strictly increasing; repeats are ignored.
    pub fn record(&mut self, t: f64) {
        if self.receipts.back().is_some_and(|&last| t <= last) {
            return;
        }
        self.receipts.push_back(t);
        self.prune(t);
    }

    pub fn prune(&mut self, now: f64) {
        let cutoff = now - self.window;
        while self.receipts.front().is_some_and(|&t| t < cutoff) {
            self.receipts.pop_front();
        }
    }

    /// Receipts within `[now - window, now]`.
    pub fn count(&self, now: f64) -> u32 {
        let cutoff = now - self.window;
        self.receipts
            .iter()
            .rev()
            .skip_while(|&&t| t > now)
            .take_while(|&&t| t >= cutoff)
            .count() as u32
    }

    /// Receipts in the window divided by the expected count, clamped to 1.
    pub fn delivery_ratio(&self, now: f64) -> f64 {
        (self.count(now) as f64 / self.expected as f64).min(1.0)
    }

    pub fn last_receipt(&self) -> Option<f64> {
        self.receipts.back().copied()
    }
}

/// A node's view of one directed link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkEstimate {
    pub fd: f64,
    pub rd: f64,
    /// One-way delay estimate in seconds (MD only).
    pub delay: Option<f64>,
}

impl LinkEstimate {
    pub const PERFECT: LinkEstimate = LinkEstimate {
        fd: 1.0,
        rd: 1.0,
        delay: None,
    };

    pub fn new(fd: f64, rd: f64) -> Self {
        LinkEstimate { fd, rd, delay: None }
    }

    pub fn with_delay(mut self, delay: f64) -> Self {
        self.delay = Some(delay);
        self
    }

    #[inline]
    pub fn product(&self) -> f64 {
        self.fd * self.rd
    }

    /// A link with zero delivery product in either direction is not used
    /// for routing.
    #[inline]
    pub fn usable(&self) -> bool {
        self.product() > 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathCost {
    pub kind: MetricKind,
    pub value: f64,
    pub hops: u32,
}

impl PathCost {
    /// Cost of the empty path (source = destination).
    pub fn empty(kind: MetricKind) -> Self {
        let value = match kind {
            MetricKind::Ml => 1.0,
            _ => 0.0,
        };
        PathCost { kind, value, hops: 0 }
    }

    /// Cost after appending `link` to the path.
    pub fn extend(&self, link: &LinkEstimate) -> Result<PathCost> {
        let value = match self.kind {
            MetricKind::Etx => {
                if !link.usable() {
                    return Err(Error::UnusableLink);
                }
                self.value + 1.0 / link.product()
            }
            MetricKind::InvEtx => {
                if !link.usable() {
                    return Err(Error::UnusableLink);
                }
                self.value + link.product()
            }
            MetricKind::Ml => self.value * link.product(),
            MetricKind::Md => self.value + link.delay.ok_or(Error::MissingDelay)?,
        };
        Ok(PathCost {
            kind: self.kind,
            value,
            hops: self.hops + 1,
        })
    }
}

fn fold_path(kind: MetricKind, links: &[LinkEstimate]) -> Result<PathCost> {
    links
        .iter()
        .try_fold(PathCost::empty(kind), |cost, link| cost.extend(link))
}

pub fn etx_path(links: &[LinkEstimate]) -> Result<PathCost> {
    fold_path(MetricKind::Etx, links)
}

pub fn invetx_path(links: &[LinkEstimate]) -> Result<PathCost> {
    fold_path(MetricKind::InvEtx, links)
}

pub fn ml_path(links: &[LinkEstimate]) -> PathCost {
    // ML never fails: zero-product links yield a zero path.
    fold_path(MetricKind::Ml, links).expect("ml extension is infallible")
}

pub fn md_path(links: &[LinkEstimate]) -> Result<PathCost> {
    fold_path(MetricKind::Md, links)
}

pub fn path_cost(kind: MetricKind, links: &[LinkEstimate]) -> Result<PathCost> {
    fold_path(kind, links)
}

/// Smoothing weight applied to new MD probe samples.
pub const DELAY_EWMA_ALPHA: f64 = 0.3;

pub fn update_delay_estimate(current: Option<f64>, sample: f64) -> Result<f64> {
    if !(sample >= 0.0) {
        return Err(Error::invalid(format!("negative delay sample {sample}")));
    }
    Ok(match current {
        None => sample,
        Some(c) => (1.0 - DELAY_EWMA_ALPHA) * c + DELAY_EWMA_ALPHA * sample,
    })
}

/// Preference order between two costs of the same metric. `Less` means `a`
/// is preferred. Equal metric values fall back to fewer hops.
pub fn compare(kind: MetricKind, a: &PathCost, b: &PathCost) -> Result<Ordering> {
    for c in [a, b] {
        if c.kind != kind {
            return Err(Error::MixedMetric {
                left: kind,
                right: c.kind,
            });
        }
    }
    let by_value = match kind {
        MetricKind::Etx | MetricKind::Md => a.value.total_cmp(&b.value),
        MetricKind::Ml => b.value.total_cmp(&a.value),
        MetricKind::InvEtx => a.hops.cmp(&b.hops).then(b.value.total_cmp(&a.value)),
    };
    Ok(by_value.then(a.hops.cmp(&b.hops)))
}

/// `a` is strictly preferred over `b`.
pub fn better(kind: MetricKind, a: &PathCost, b: &PathCost) -> Result<bool> {
    Ok(compare(kind, a, b)? == Ordering::Less)
}
