//! PE interconnection graphs and particle exchange maps.
//!
//! All indices are 0-based: PE `m` in `0..M`, slot `k` in `0..K`.

use std::collections::VecDeque;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("invalid topology argument: {0}")]
    InvalidArgument(String),
    #[error("degree sequence is not graphical (Erdos-Gallai fails at k = {k})")]
    NotGraphical { k: usize },
    #[error("could not connect the {degree}-regular graph on {m_pes} PEs: {reason}")]
    RepairFailed {
        m_pes: usize,
        degree: usize,
        reason: String,
    },
    #[error("PE {pe} needs {needed} exchange slots but only has {k_per_pe}")]
    CapacityExceeded {
        pe: usize,
        needed: usize,
        k_per_pe: usize,
    },
    #[error("exchange map is for {map_m}x{map_k}, filter is {m_pes}x{k_per_pe}")]
    DimensionMismatch {
        map_m: usize,
        map_k: usize,
        m_pes: usize,
        k_per_pe: usize,
    },
    #[error("exchange map is not a bijection: {0}")]
    NotBijective(String),
    #[error("csv export: {0}")]
    Io(#[from] std::io::Error),
}

/// Simple undirected graph over PEs with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeGraph {
    adjacency: Vec<Vec<usize>>,
}

impl PeGraph {
    pub fn from_edges(m_pes: usize, edges: &[(usize, usize)]) -> Result<Self, TopologyError> {
        let mut adjacency = vec![Vec::new(); m_pes];
        for &(a, b) in edges {
            if a >= m_pes || b >= m_pes {
                return Err(TopologyError::InvalidArgument(format!(
                    "edge ({a}, {b}) out of range for {m_pes} PEs"
                )));
            }
            if a == b {
                return Err(TopologyError::InvalidArgument(format!("self-loop at {a}")));
            }
            if adjacency[a].contains(&b) {
                return Err(TopologyError::InvalidArgument(format!(
                    "duplicate edge ({a}, {b})"
                )));
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Self { adjacency })
    }

    pub fn m_pes(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, pe: usize) -> &[usize] {
        &self.adjacency[pe]
    }

    pub fn degree(&self, pe: usize) -> usize {
        self.adjacency[pe].len()
    }

    pub fn regular_degree(&self) -> Option<usize> {
        let d = self.adjacency.first()?.len();
        self.adjacency.iter().all(|l| l.len() == d).then_some(d)
    }

    /// Edges `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (a, list) in self.adjacency.iter().enumerate() {
            out.extend(list.iter().filter(|&&b| a < b).map(|&b| (a, b)));
        }
        out
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    /// Component label per PE, labels in order of first appearance.
    pub fn components(&self) -> Vec<usize> {
        let n = self.m_pes();
        let mut label = vec![usize::MAX; n];
        let mut next = 0;
        for start in 0..n {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = next;
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for &w in &self.adjacency[v] {
                    if label[w] == usize::MAX {
                        label[w] = next;
                        queue.push_back(w);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn is_connected(&self) -> bool {
        self.components().iter().all(|&c| c == 0)
    }

    fn remove_edge(&mut self, a: usize, b: usize) {
        self.adjacency[a].retain(|&x| x != b);
        self.adjacency[b].retain(|&x| x != a);
    }

    fn add_edge(&mut self, a: usize, b: usize) {
        for (x, y) in [(a, b), (b, a)] {
            let list = &mut self.adjacency[x];
            let pos = list.binary_search(&y).unwrap_or_else(|p| p);
            list.insert(pos, y);
        }
    }

    fn reachable(&self, from: usize, to: usize) -> bool {
        let mut seen = vec![false; self.m_pes()];
        seen[from] = true;
        let mut queue = VecDeque::from([from]);
        while let Some(v) = queue.pop_front() {
            if v == to {
                return true;
            }
            for &w in &self.adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        false
    }

    /// First edge (lexicographic) inside `component` whose removal keeps it connected.
    fn non_bridge_edge(&mut self, labels: &[usize], component: usize) -> Option<(usize, usize)> {
        for (a, b) in self.edges() {
            if labels[a] != component {
                continue;
            }
            self.remove_edge(a, b);
            let ok = self.reachable(a, b);
            self.add_edge(a, b);
            if ok {
                return Some((a, b));
            }
        }
        None
    }

    pub fn write_edge_list<W: Write>(&self, out: W) -> Result<(), TopologyError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["pe_a", "pe_b"]).map_err(csv_io)?;
        for (a, b) in self.edges() {
            w.write_record([a.to_string(), b.to_string()]).map_err(csv_io)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_io(e: csv::Error) -> TopologyError {
    TopologyError::Io(std::io::Error::other(e))
}

/// Erdos-Gallai test; returns the first failing `k` (1-based) if any.
pub fn erdos_gallai_violation(degrees: &[usize]) -> Option<usize> {
    let mut d = degrees.to_vec();
    d.sort_unstable_by(|a, b| b.cmp(a));
    let n = d.len();
    if d.iter().sum::<usize>() % 2 == 1 {
        return Some(n.max(1));
    }
    let mut head = 0usize;
    for k in 1..=n {
        head += d[k - 1];
        let tail: usize = d[k..].iter().map(|&x| x.min(k)).sum();
        if head > k * (k - 1) + tail {
            return Some(k);
        }
    }
    None
}

/// Havel-Hakimi construction for an arbitrary graphical degree sequence.
///
/// Repeatedly takes the vertex with the largest residual degree and joins it
/// to the vertices with the next largest residual degrees. Ties go to the
/// lowest index, so the output is deterministic.
pub fn havel_hakimi(degrees: &[usize]) -> Result<PeGraph, TopologyError> {
    if let Some(k) = erdos_gallai_violation(degrees) {
        return Err(TopologyError::NotGraphical { k });
    }
    let n = degrees.len();
    let mut residual = degrees.to_vec();
    let mut edges = Vec::new();
    if n == 0 {
        return PeGraph::from_edges(0, &edges);
    }
    loop {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| residual[b].cmp(&residual[a]).then(a.cmp(&b)));
        let v = order[0];
        let need = residual[v];
        if need == 0 {
            break;
        }
        residual[v] = 0;
        for &u in order[1..].iter().take(need) {
            if residual[u] == 0 {
                return Err(TopologyError::NotGraphical { k: need });
            }
            residual[u] -= 1;
            edges.push((v, u));
        }
    }
    PeGraph::from_edges(n, &edges)
}

/// Connected `degree`-regular graph on `m_pes` PEs.
///
/// The raw Havel-Hakimi output may be disconnected; components are merged
/// with degree-preserving edge swaps `(a,b),(c,d) -> (a,c),(b,d)` using a
/// non-bridge edge from each of two components.
pub fn havel_hakimi_regular(m_pes: usize, degree: usize) -> Result<PeGraph, TopologyError> {
    if degree == 0 {
        return Err(TopologyError::InvalidArgument("degree must be at least 1".into()));
    }
    connect_by_edge_swaps(havel_hakimi(&vec![degree; m_pes])?)
}

/// Merges components two at a time, preserving every vertex degree.
pub fn connect_by_edge_swaps(mut graph: PeGraph) -> Result<PeGraph, TopologyError> {
    let m_pes = graph.m_pes();
    let degree = graph.regular_degree().unwrap_or(0);
    let repair_failed = |reason: &str| TopologyError::RepairFailed {
        m_pes,
        degree,
        reason: reason.into(),
    };
    for _ in 0..m_pes.max(1) {
        let labels = graph.components();
        if labels.iter().all(|&c| c == 0) {
            return Ok(graph);
        }
        let (a, b) = graph
            .non_bridge_edge(&labels, 0)
            .ok_or_else(|| repair_failed("component without a cycle"))?;
        let (c, d) = graph
            .non_bridge_edge(&labels, 1)
            .ok_or_else(|| repair_failed("component without a cycle"))?;
        graph.remove_edge(a, b);
        graph.remove_edge(c, d);
        graph.add_edge(a, c);
        graph.add_edge(b, d);
    }
    if graph.is_connected() {
        Ok(graph)
    } else {
        Err(repair_failed("iteration bound reached"))
    }
}

/// Neighbor count used for `m_pes` PEs: `max(1, M/4)`, raised to 2 when a
/// connected 1-regular graph cannot exist (`M > 2`), and raised by one more
/// when `M d` is odd, since no `d`-regular graph on `M` nodes exists then.
pub fn default_degree(m_pes: usize) -> usize {
    let mut d = (m_pes / 4).max(1);
    if d == 1 && m_pes > 2 {
        d = 2;
    }
    if (m_pes * d) % 2 == 1 {
        d += 1;
    }
    d
}

/// Particles exchanged with each neighbor so that about 90% of a PE's slots
/// travel: `floor(0.9 K / degree)`, which equals `floor(3.6 K / M)` when the
/// degree is `M/4`.
pub fn default_per_neighbor(k_per_pe: usize, degree: usize) -> usize {
    if degree == 0 {
        0
    } else {
        9 * k_per_pe / (10 * degree)
    }
}

/// Deterministic bijection on `(PE, slot)` pairs that preserves K per PE.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExchangeMap {
    m_pes: usize,
    k_per_pe: usize,
    /// `forward[m*K + k] = u*K + v`.
    forward: Vec<usize>,
}

impl ExchangeMap {
    pub fn identity(m_pes: usize, k_per_pe: usize) -> Self {
        Self {
            m_pes,
            k_per_pe,
            forward: (0..m_pes * k_per_pe).collect(),
        }
    }

    /// Builds a map from explicit targets, verifying bijectivity.
    pub fn from_targets(
        m_pes: usize,
        k_per_pe: usize,
        targets: &[(usize, usize)],
    ) -> Result<Self, TopologyError> {
        if targets.len() != m_pes * k_per_pe {
            return Err(TopologyError::NotBijective(format!(
                "{} targets for {} slots",
                targets.len(),
                m_pes * k_per_pe
            )));
        }
        let mut forward = Vec::with_capacity(targets.len());
        for &(u, v) in targets {
            if u >= m_pes || v >= k_per_pe {
                return Err(TopologyError::NotBijective(format!("target ({u}, {v}) out of range")));
            }
            forward.push(u * k_per_pe + v);
        }
        let map = Self {
            m_pes,
            k_per_pe,
            forward,
        };
        map.validate()?;
        Ok(map)
    }

    /// Example-style ring: slot 0 goes to the last slot of PE `m-1`, the last
    /// slot goes to slot 0 of PE `m+1` (both mod M); other slots stay.
    pub fn circular(m_pes: usize, k_per_pe: usize) -> Result<Self, TopologyError> {
        if m_pes < 2 || k_per_pe < 2 {
            return Err(TopologyError::InvalidArgument(format!(
                "circular map needs M >= 2 and K >= 2, got M = {m_pes}, K = {k_per_pe}"
            )));
        }
        let k_last = k_per_pe - 1;
        let mut map = Self::identity(m_pes, k_per_pe);
        for m in 0..m_pes {
            let prev = (m + m_pes - 1) % m_pes;
            let next = (m + 1) % m_pes;
            map.forward[m * k_per_pe] = prev * k_per_pe + k_last;
            map.forward[m * k_per_pe + k_last] = next * k_per_pe;
        }
        Ok(map)
    }

    /// Pairwise block swaps along graph edges.
    ///
    /// PE `m` dedicates slot block `[j*p, (j+1)*p)` to its `j`-th neighbor in
    /// sorted order. On edge `(m, u)` the two dedicated blocks are swapped
    /// element by element, so the map is an involution.
    pub fn block_exchange(
        graph: &PeGraph,
        k_per_pe: usize,
        per_neighbor: usize,
    ) -> Result<Self, TopologyError> {
        let m_pes = graph.m_pes();
        for pe in 0..m_pes {
            let needed = per_neighbor * graph.degree(pe);
            if needed > k_per_pe {
                return Err(TopologyError::CapacityExceeded {
                    pe,
                    needed,
                    k_per_pe,
                });
            }
        }
        let mut map = Self::identity(m_pes, k_per_pe);
        for m in 0..m_pes {
            for (j, &u) in graph.neighbors(m).iter().enumerate() {
                let i = graph
                    .neighbors(u)
                    .binary_search(&m)
                    .expect("adjacency is symmetric");
                for t in 0..per_neighbor {
                    map.forward[m * k_per_pe + j * per_neighbor + t] =
                        u * k_per_pe + i * per_neighbor + t;
                }
            }
        }
        map.validate()?;
        Ok(map)
    }

    pub fn m_pes(&self) -> usize {
        self.m_pes
    }

    pub fn k_per_pe(&self) -> usize {
        self.k_per_pe
    }

    pub fn apply(&self, m: usize, k: usize) -> (usize, usize) {
        let t = self.forward[m * self.k_per_pe + k];
        (t / self.k_per_pe, t % self.k_per_pe)
    }

    /// Flat target index of flat source index.
    pub fn target(&self, flat: usize) -> usize {
        self.forward[flat]
    }

    pub fn is_identity(&self) -> bool {
        self.forward.iter().enumerate().all(|(i, &t)| i == t)
    }

    /// Number of slots of PE `m` whose particle leaves the PE.
    pub fn outgoing(&self, m: usize) -> usize {
        (0..self.k_per_pe)
            .filter(|&k| self.apply(m, k).0 != m)
            .count()
    }

    /// Checks that every `(u, v)` is hit exactly once. Because targets are
    /// `(PE, slot)` pairs this also gives K arrivals per PE, with the arriving
    /// slots forming a permutation of `0..K`.
    pub fn validate(&self) -> Result<(), TopologyError> {
        let mut hit = vec![false; self.forward.len()];
        for (src, &t) in self.forward.iter().enumerate() {
            if t >= hit.len() {
                return Err(TopologyError::NotBijective(format!("slot {src} maps out of range")));
            }
            if std::mem::replace(&mut hit[t], true) {
                let (u, v) = (t / self.k_per_pe, t % self.k_per_pe);
                return Err(TopologyError::NotBijective(format!("({u}, {v}) hit twice")));
            }
        }
        Ok(())
    }

    pub fn check_dimensions(&self, m_pes: usize, k_per_pe: usize) -> Result<(), TopologyError> {
        if self.m_pes != m_pes || self.k_per_pe != k_per_pe {
            return Err(TopologyError::DimensionMismatch {
                map_m: self.m_pes,
                map_k: self.k_per_pe,
                m_pes,
                k_per_pe,
            });
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), TopologyError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["m", "k", "u", "v"]).map_err(csv_io)?;
        for m in 0..self.m_pes {
            for k in 0..self.k_per_pe {
                let (u, v) = self.apply(m, k);
                w.write_record([m, k, u, v].map(|x| x.to_string()))
                    .map_err(csv_io)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// How the exchange map of a filter is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum TopologyKind {
    Circular,
    #[default]
    HavelHakimi,
}

/// Exchange map for `m_pes x k_per_pe`. A single PE never exchanges.
/// `per_neighbor` defaults to [`default_per_neighbor`] and is ignored by the
/// circular map.
pub fn build_exchange_map(
    kind: TopologyKind,
    m_pes: usize,
    k_per_pe: usize,
    per_neighbor: Option<usize>,
) -> Result<ExchangeMap, TopologyError> {
    if m_pes <= 1 {
        return Ok(ExchangeMap::identity(m_pes, k_per_pe));
    }
    match kind {
        TopologyKind::Circular => ExchangeMap::circular(m_pes, k_per_pe),
        TopologyKind::HavelHakimi => {
            let degree = default_degree(m_pes);
            let graph = havel_hakimi_regular(m_pes, degree)?;
            let p = per_neighbor.unwrap_or_else(|| default_per_neighbor(k_per_pe, degree));
            ExchangeMap::block_exchange(&graph, k_per_pe, p)
        }
    }
}
