//! Time-stamped V2V communication events and their decomposition into
//! macroscopic communication graphs.
//!
//! Timestamps are integral milliseconds so ordering and the simultaneity
//! check are exact.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VehicleId(pub u32);

impl fmt::Display for VehicleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<u32> for VehicleId {
    fn from(v: u32) -> Self {
        VehicleId(v)
    }
}

/// A directed communication event from a serving car `src` to a non-serving
/// car `dst`, initiated at `t_ms`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TemporalEdge {
    pub label: u32,
    pub src: VehicleId,
    pub dst: VehicleId,
    pub t_ms: i64,
}

impl TemporalEdge {
    #[inline]
    pub fn touches(&self, v: VehicleId) -> bool {
        self.src == v || self.dst == v
    }

    /// Shares at least one vehicle with `other`.
    #[inline]
    pub fn shares_vehicle(&self, other: &TemporalEdge) -> bool {
        self.touches(other.src) || self.touches(other.dst)
    }
}

/// Raw `(src, dst, t_ms)` event as read from an edge list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawEvent {
    pub src: VehicleId,
    pub dst: VehicleId,
    pub t_ms: i64,
}

impl RawEvent {
    pub fn new(src: impl Into<VehicleId>, dst: impl Into<VehicleId>, t_ms: i64) -> Self {
        RawEvent { src: src.into(), dst: dst.into(), t_ms }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TemporalGraph {
    nodes: BTreeSet<VehicleId>,
    edges: Vec<TemporalEdge>,
}

impl TemporalGraph {
    /// Builds a graph from raw events. Edges are sorted by `(t, src, dst)`
    /// and labelled `0..len`.
    pub fn build(events: &[RawEvent]) -> Result<Self> {
        Self::build_with_nodes(events, std::iter::empty())
    }

    /// Like [`TemporalGraph::build`] but also registers vehicles that take
    /// part in no event.
    pub fn build_with_nodes(events: &[RawEvent], extra_nodes: impl IntoIterator<Item = VehicleId>) -> Result<Self> {
        let mut sorted = events.to_vec();
        sorted.sort_by_key(|e| (e.t_ms, e.src, e.dst));

        let mut busy: BTreeSet<(VehicleId, i64)> = BTreeSet::new();
        let mut nodes: BTreeSet<VehicleId> = extra_nodes.into_iter().collect();
        let mut edges = Vec::with_capacity(sorted.len());
        for (label, e) in sorted.iter().enumerate() {
            if e.src == e.dst {
                return Err(Error::SelfLoop(e.src));
            }
            for v in [e.src, e.dst] {
                if !busy.insert((v, e.t_ms)) {
                    return Err(Error::SimultaneousEvents { vehicle: v, t_ms: e.t_ms });
                }
            }
            nodes.insert(e.src);
            nodes.insert(e.dst);
            edges.push(TemporalEdge { label: label as u32, src: e.src, dst: e.dst, t_ms: e.t_ms });
        }
        Ok(TemporalGraph { nodes, edges })
    }

    pub fn nodes(&self) -> &BTreeSet<VehicleId> {
        &self.nodes
    }

    pub fn edges(&self) -> &[TemporalEdge] {
        &self.edges
    }

    pub fn raw_events(&self) -> Vec<RawEvent> {
        self.edges.iter().map(|e| RawEvent { src: e.src, dst: e.dst, t_ms: e.t_ms }).collect()
    }

    /// Keeps only events whose endpoints both lie in `keep`. Labels are
    /// reassigned.
    pub fn restrict_to(&self, keep: &BTreeSet<VehicleId>) -> TemporalGraph {
        let events: Vec<RawEvent> =
            self.raw_events().into_iter().filter(|e| keep.contains(&e.src) && keep.contains(&e.dst)).collect();
        // a subset of a valid event set is valid
        TemporalGraph::build_with_nodes(&events, keep.iter().copied()).expect("subset of a valid graph")
    }
}

/// Maximal set of edges chained by shared-vehicle adjacency within a time
/// constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MacroscopicGraph {
    edges: Vec<TemporalEdge>,
    t_constraint_ms: i64,
}

impl MacroscopicGraph {
    /// Wraps edges as a macroscopic graph without checking adjacency. Edges
    /// are sorted by label.
    pub fn from_edges(mut edges: Vec<TemporalEdge>, t_constraint_ms: i64) -> Self {
        edges.sort_by_key(|e| e.label);
        MacroscopicGraph { edges, t_constraint_ms }
    }

    pub fn edges(&self) -> &[TemporalEdge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn t_constraint_ms(&self) -> i64 {
        self.t_constraint_ms
    }

    pub fn vehicles(&self) -> BTreeSet<VehicleId> {
        self.edges.iter().flat_map(|e| [e.src, e.dst]).collect()
    }

    /// `(first, last)` timestamp, `None` when empty.
    pub fn time_span(&self) -> Option<(i64, i64)> {
        let first = self.edges.iter().map(|e| e.t_ms).min()?;
        let last = self.edges.iter().map(|e| e.t_ms).max()?;
        Some((first, last))
    }

    /// Every edge has a distinct neighbour sharing a vehicle within the time
    /// constraint.
    pub fn satisfies_neighbor_condition(&self) -> bool {
        self.edges.iter().enumerate().all(|(i, a)| {
            self.edges
                .iter()
                .enumerate()
                .any(|(j, b)| i != j && a.shares_vehicle(b) && (a.t_ms - b.t_ms).abs() <= self.t_constraint_ms)
        })
    }
}

struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet { parent: (0..n).collect(), rank: vec![0; n] }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}

/// Splits `graph` into macroscopic graphs: connected components (with at
/// least two edges) of the relation "share a vehicle and are at most
/// `t_constraint_ms` apart". Components are ordered by their smallest label.
pub fn decompose(graph: &TemporalGraph, t_constraint_ms: i64) -> Result<Vec<MacroscopicGraph>> {
    if t_constraint_ms <= 0 {
        return Err(Error::invalid(format!("time constraint must be positive, got {t_constraint_ms} ms")));
    }
    let edges = graph.edges();
    let mut sets = DisjointSet::new(edges.len());

    // Incident edges per vehicle in time order. Two edges on the same
    // vehicle within T are joined through every edge between them, so
    // linking consecutive pairs is enough.
    let mut incident: BTreeMap<VehicleId, Vec<usize>> = BTreeMap::new();
    for (i, e) in edges.iter().enumerate() {
        incident.entry(e.src).or_default().push(i);
        incident.entry(e.dst).or_default().push(i);
    }
    for list in incident.values() {
        for w in list.windows(2) {
            if edges[w[1]].t_ms - edges[w[0]].t_ms <= t_constraint_ms {
                sets.union(w[0], w[1]);
            }
        }
    }

    let mut components: BTreeMap<usize, Vec<TemporalEdge>> = BTreeMap::new();
    for (i, e) in edges.iter().enumerate() {
        let root = sets.find(i);
        components.entry(root).or_default().push(*e);
    }
    let mut out: Vec<MacroscopicGraph> = components
        .into_values()
        .filter(|c| c.len() >= 2)
        .map(|c| MacroscopicGraph::from_edges(c, t_constraint_ms))
        .collect();
    out.sort_by_key(|g| g.edges[0].label);
    Ok(out)
}

pub fn read_edge_list<R: Read>(reader: R, source_name: &str) -> Result<Vec<RawEvent>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.is_empty() {
        return Ok(Vec::new());
    }
    let expected = ["src", "dst", "t_ms"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::Parse {
            path: source_name.to_string(),
            line: 1,
            message: format!(
                "expected header `src,dst,t_ms`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut events = Vec::new();
    for (idx, rec) in rdr.deserialize::<RawEvent>().enumerate() {
        let rec =
            rec.map_err(|e| Error::Parse { path: source_name.to_string(), line: idx + 2, message: e.to_string() })?;
        events.push(rec);
    }
    Ok(events)
}

pub fn load_edge_list(path: &Path) -> Result<Vec<RawEvent>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_edge_list(std::io::BufReader::new(file), &path.display().to_string())
}

pub fn write_edge_list<W: Write>(writer: W, graph: &TemporalGraph) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["src", "dst", "t_ms"])?;
    for e in graph.edges() {
        wtr.write_record([e.src.to_string(), e.dst.to_string(), e.t_ms.to_string()])?;
    }
    wtr.flush().map_err(|e| Error::io("<edge list>", e))?;
    Ok(())
}
