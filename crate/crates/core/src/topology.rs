//! Static node placement and the probabilistic link model.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Dense node index in `[0, N)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for NodeId {
    fn from(i: usize) -> Self {
        NodeId(i as u32)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Delivery probabilities of a directed link `(i, j)`: `fd` is `i -> j`,
/// `rd` is `j -> i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkQuality {
    pub fd: f64,
    pub rd: f64,
}

impl LinkQuality {
    pub const PERFECT: LinkQuality = LinkQuality { fd: 1.0, rd: 1.0 };

    pub fn reversed(self) -> LinkQuality {
        LinkQuality {
            fd: self.rd,
            rd: self.fd,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub quality: LinkQuality,
    /// Maximum achievable link rate in packets/s.
    pub capacity: f64,
}

/// Placement parameters for [`Topology::generate`].
#[derive(Debug, Clone, PartialEq)]
pub struct TopologyParams {
    pub nodes: usize,
    pub side: f64,
    pub radio_range: f64,
    pub seed: u64,
    /// Lower bound of the per-direction jitter factor applied to the
    /// distance-based delivery probability. `1.0` disables jitter.
    pub jitter_min: f64,
    pub capacity: f64,
}

impl TopologyParams {
    pub const DEFAULT_RADIO_RANGE: f64 = 250.0;
    pub const DEFAULT_CAPACITY: f64 = 100.0;

    pub fn new(nodes: usize, side: f64, radio_range: f64, seed: u64) -> Self {
        TopologyParams {
            nodes,
            side,
            radio_range,
            seed,
            jitter_min: 0.9,
            capacity: Self::DEFAULT_CAPACITY,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes < 2 {
            return Err(Error::invalid(format!(
                "need at least 2 nodes, got {}",
                self.nodes
            )));
        }
        if !(self.side > 0.0) || !(self.radio_range > 0.0) {
            return Err(Error::invalid("area side and radio range must be positive"));
        }
        if !(0.0..=1.0).contains(&self.jitter_min) {
            return Err(Error::invalid("jitter_min must lie in [0, 1]"));
        }
        if !(self.capacity > 0.0) {
            return Err(Error::invalid("link capacity must be positive"));
        }
        Ok(())
    }
}

/// Delivery probability of a single transmission over `distance` meters.
///
/// Perfect up to half the radio range, then linear decay to zero at the
/// range boundary.
pub fn link_delivery_probability(distance: f64, radio_range: f64) -> f64 {
    let half = 0.5 * radio_range;
    if distance <= half {
        1.0
    } else if distance >= radio_range {
        0.0
    } else {
        ((radio_range - distance) / half).clamp(0.0, 1.0)
    }
}

/// An immutable static network: positions plus a symmetric link set.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    positions: Vec<Position>,
    side: f64,
    radio_range: f64,
    links: BTreeMap<(NodeId, NodeId), Link>,
    adjacency: Vec<Vec<NodeId>>,
}

impl Topology {
    /// Places `params.nodes` nodes uniformly at random and links every pair
    /// within radio range.
    pub fn generate(params: &TopologyParams) -> Result<Topology> {
        params.validate()?;

        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let positions: Vec<Position> = (0..params.nodes)
            .map(|_| Position {
                x: rng.random::<f64>() * params.side,
                y: rng.random::<f64>() * params.side,
            })
            .collect();

        let jitter = |rng: &mut ChaCha8Rng| {
            if params.jitter_min < 1.0 {
                rng.random_range(params.jitter_min..=1.0)
            } else {
                1.0
            }
        };

        let mut links = Vec::new();
        for i in 0..params.nodes {
            for j in (i + 1)..params.nodes {
                let d = positions[i].distance(&positions[j]);
                if d > params.radio_range {
                    continue;
                }
                let p = link_delivery_probability(d, params.radio_range);
                let fd = (p * jitter(&mut rng)).clamp(0.0, 1.0);
                let rd = (p * jitter(&mut rng)).clamp(0.0, 1.0);
                links.push((NodeId::from(i), NodeId::from(j), LinkQuality { fd, rd }, params.capacity));
            }
        }
        Topology::from_parts(positions, params.side, params.radio_range, links)
    }

    /// Like [`Topology::generate`], but retries with `seed + 1, seed + 2, ...`
    /// until the link graph is connected. Returns the seed that succeeded.
    pub fn generate_connected(params: &TopologyParams, max_attempts: u32) -> Result<(Topology, u64)> {
        let mut p = params.clone();
        for _ in 0..max_attempts.max(1) {
            let topo = Topology::generate(&p)?;
            if topo.connectivity_check() {
                return Ok((topo, p.seed));
            }
            log::debug!("topology seed {} disconnected, retrying", p.seed);
            p.seed = p.seed.wrapping_add(1);
        }
        Err(Error::invalid(format!(
            "no connected topology within {max_attempts} attempts from seed {}",
            params.seed
        )))
    }

    /// Builds a topology from explicit parts. Each undirected link is given
    /// once as `(i, j, quality of i -> j, capacity)`.
    pub fn from_parts(
        positions: Vec<Position>,
        side: f64,
        radio_range: f64,
        links: impl IntoIterator<Item = (NodeId, NodeId, LinkQuality, f64)>,
    ) -> Result<Topology> {
        let n = positions.len();
        let mut map = BTreeMap::new();
        let mut adjacency = vec![Vec::new(); n];
        for (i, j, q, cap) in links {
            if i.index() >= n {
                return Err(Error::UnknownNode(i));
            }
            if j.index() >= n {
                return Err(Error::UnknownNode(j));
            }
            if i == j {
                return Err(Error::invalid(format!("self-link at node {i}")));
            }
            for p in [q.fd, q.rd] {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::invalid(format!("delivery probability {p} outside [0, 1]")));
                }
            }
            if !(cap > 0.0) {
                return Err(Error::invalid(format!("capacity of link {i}-{j} must be positive")));
            }
            if map.contains_key(&(i, j)) {
                return Err(Error::invalid(format!("duplicate link {i}-{j}")));
            }
            map.insert((i, j), Link { quality: q, capacity: cap });
            map.insert(
                (j, i),
                Link {
                    quality: q.reversed(),
                    capacity: cap,
                },
            );
            adjacency[i.index()].push(j);
            adjacency[j.index()].push(i);
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }
        Ok(Topology {
            positions,
            side,
            radio_range,
            links: map,
            adjacency,
        })
    }

    /// Same geometry and link set with every delivery probability set to 1.
    pub fn lossless(&self) -> Topology {
        let mut t = self.clone();
        for link in t.links.values_mut() {
            link.quality = LinkQuality::PERFECT;
        }
        t
    }

    pub fn node_count(&self) -> usize {
        self.positions.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.positions.len()).map(NodeId::from)
    }

    pub fn position(&self, node: NodeId) -> Option<Position> {
        self.positions.get(node.index()).copied()
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn radio_range(&self) -> f64 {
        self.radio_range
    }

    pub fn contains(&self, node: NodeId) -> bool {
        node.index() < self.positions.len()
    }

    /// Number of undirected links.
    pub fn link_count(&self) -> usize {
        self.links.len() / 2
    }

    /// Directed view of every link, both orientations.
    pub fn links(&self) -> impl Iterator<Item = (NodeId, NodeId, &Link)> + '_ {
        self.links.iter().map(|(&(i, j), l)| (i, j, l))
    }

    pub fn link(&self, from: NodeId, to: NodeId) -> Option<&Link> {
        self.links.get(&(from, to))
    }

    pub fn quality(&self, from: NodeId, to: NodeId) -> Option<LinkQuality> {
        self.link(from, to).map(|l| l.quality)
    }

    pub fn capacity(&self, from: NodeId, to: NodeId) -> Option<f64> {
        self.link(from, to).map(|l| l.capacity)
    }

    pub fn set_capacity(&mut self, a: NodeId, b: NodeId, capacity: f64) -> Result<()> {
        if !(capacity > 0.0) {
            return Err(Error::invalid("capacity must be positive"));
        }
        for key in [(a, b), (b, a)] {
            match self.links.get_mut(&key) {
                Some(l) => l.capacity = capacity,
                None => return Err(Error::invalid(format!("no link {a}-{b}"))),
            }
        }
        Ok(())
    }

    /// Sorted in-range neighbors of `node`.
    pub fn neighbors(&self, node: NodeId) -> &[NodeId] {
        &self.adjacency[node.index()]
    }

    pub fn degree(&self, node: NodeId) -> usize {
        self.adjacency[node.index()].len()
    }

    /// Breadth-first reachability from node 0 covers every node.
    pub fn connectivity_check(&self) -> bool {
        let n = self.positions.len();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for v in &self.adjacency[u] {
                if !seen[v.index()] {
                    seen[v.index()] = true;
                    count += 1;
                    queue.push_back(v.index());
                }
            }
        }
        count == n
    }

    /// Plain-text form: `N <id> <x> <y>` and `L <i> <j> <fd> <rd> <cap>`
    /// lines. Floats are written in shortest round-trip form.
    pub fn to_text(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let _ = writeln!(out, "# side={} radio_range={}", self.side, self.radio_range);
        for (i, p) in self.positions.iter().enumerate() {
            let _ = writeln!(out, "N {i} {} {}", p.x, p.y);
        }
        for (&(i, j), l) in &self.links {
            if i < j {
                let _ = writeln!(
                    out,
                    "L {i} {j} {} {} {}",
                    l.quality.fd, l.quality.rd, l.capacity
                );
            }
        }
        out
    }
}

impl FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Topology> {
        let mut side = None;
        let mut range = None;
        let mut positions: Vec<(usize, Position)> = Vec::new();
        let mut links = Vec::new();

        for (lineno, raw) in s.lines().enumerate() {
            let line = raw.trim();
            let lineno = lineno + 1;
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                for kv in comment.split_whitespace() {
                    match kv.split_once('=') {
                        Some(("side", v)) => side = v.parse::<f64>().ok(),
                        Some(("radio_range", v)) => range = v.parse::<f64>().ok(),
                        _ => {}
                    }
                }
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let num = |idx: usize| -> Result<f64> {
                fields
                    .get(idx)
                    .ok_or_else(|| Error::parse(lineno, "missing field"))?
                    .parse::<f64>()
                    .map_err(|e| Error::parse(lineno, e.to_string()))
            };
            let id = |idx: usize| -> Result<u32> {
                fields
                    .get(idx)
                    .ok_or_else(|| Error::parse(lineno, "missing field"))?
                    .parse::<u32>()
                    .map_err(|e| Error::parse(lineno, e.to_string()))
            };
            match fields[0] {
                "N" if fields.len() == 4 => {
                    positions.push((id(1)? as usize, Position { x: num(2)?, y: num(3)? }));
                }
                "L" if fields.len() == 6 => {
                    links.push((
                        NodeId(id(1)?),
                        NodeId(id(2)?),
                        LinkQuality { fd: num(3)?, rd: num(4)? },
                        num(5)?,
                    ));
                }
                other => {
                    return Err(Error::parse(lineno, format!("unrecognised record `{other}`")));
                }
            }
        }

        positions.sort_by_key(|(i, _)| *i);
        for (expect, (got, _)) in positions.iter().enumerate() {
            if expect != *got {
                return Err(Error::parse(0, format!("node ids not dense: expected {expect}, found {got}")));
            }
        }
        let positions: Vec<Position> = positions.into_iter().map(|(_, p)| p).collect();
        let side = side.unwrap_or_else(|| {
            positions
                .iter()
                .fold(0.0f64, |m, p| m.max(p.x).max(p.y))
        });
        let range = range.unwrap_or(TopologyParams::DEFAULT_RADIO_RANGE);
        Topology::from_parts(positions, side, range, links)
    }
}
