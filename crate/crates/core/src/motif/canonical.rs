//! Canonical labelling of small directed structures.
//!
//! The label is the lexicographically smallest row-major bit string of the
//! 0/1 adjacency matrix (diagonal included) over all vertex orderings.
//! Multi-edges and timestamps collapse; only direction is kept.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::{BuildHasherDefault, Hasher};

use crate::error::{Error, Result};
use crate::temporal_graph::{TemporalEdge, VehicleId};

use super::EdgeSubgraph;

const MAX_NODES: usize = 8;

/// `n * n` bits, most significant first. Ordering is by vertex count, then
/// by the bit string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalLabel {
    n: u8,
    bits: u64,
}

impl CanonicalLabel {
    /// Canonical form of an `n`-vertex digraph; bit `j` of `rows[i]` is the
    /// arc `i -> j`. Diagonal bits are ignored.
    pub fn from_adjacency(rows: &[u8]) -> Self {
        let n = rows.len();
        assert!(n <= MAX_NODES, "at most {MAX_NODES} vertices supported");
        let mut rows = rows.to_vec();
        for (i, r) in rows.iter_mut().enumerate() {
            *r &= !(1u8 << i);
        }
        let mut perm: Vec<usize> = (0..n).collect();
        let mut best = encode(&rows, &perm);
        // Heap's algorithm, iterative form.
        let mut c = vec![0usize; n];
        let mut i = 1;
        while i < n {
            if c[i] < i {
                if i % 2 == 0 {
                    perm.swap(0, i);
                } else {
                    perm.swap(c[i], i);
                }
                best = best.min(encode(&rows, &perm));
                c[i] += 1;
                i = 1;
            } else {
                c[i] = 0;
                i += 1;
            }
        }
        CanonicalLabel { n: n as u8, bits: best }
    }

    /// Parses a label rendered by `Display`.
    pub fn parse(s: &str) -> Result<Self> {
        let len = s.len();
        let n = (len as f64).sqrt().round() as usize;
        if n * n != len || n > MAX_NODES || !s.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(Error::invalid(format!("`{s}` is not a square 0/1 adjacency string")));
        }
        let bits = s.bytes().fold(0u64, |acc, b| acc << 1 | u64::from(b - b'0'));
        Ok(CanonicalLabel { n: n as u8, bits })
    }

    pub fn num_nodes(&self) -> usize {
        self.n as usize
    }

    /// Whether arc `i -> j` is present in the canonical ordering.
    pub fn has_arc(&self, i: usize, j: usize) -> bool {
        let n = self.num_nodes();
        let pos = n * n - 1 - (i * n + j);
        self.bits >> pos & 1 == 1
    }
}

fn encode(rows: &[u8], perm: &[usize]) -> u64 {
    let mut code = 0u64;
    for &pi in perm {
        let row = rows[pi];
        for &pj in perm {
            code = code << 1 | u64::from(row >> pj & 1);
        }
    }
    code
}

impl fmt::Display for CanonicalLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let len = self.num_nodes() * self.num_nodes();
        for pos in (0..len).rev() {
            f.write_str(if self.bits >> pos & 1 == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Adjacency rows of the collapsed structure, vertices in ascending id order.
pub(crate) fn adjacency_rows(edges: &[&TemporalEdge]) -> (Vec<VehicleId>, Vec<u8>) {
    let mut vertices: Vec<VehicleId> = Vec::with_capacity(MAX_NODES);
    for e in edges {
        for v in [e.src, e.dst] {
            if let Err(pos) = vertices.binary_search(&v) {
                vertices.insert(pos, v);
            }
        }
    }
    let mut rows = vec![0u8; vertices.len()];
    for e in edges {
        let i = vertices.binary_search(&e.src).expect("present");
        let j = vertices.binary_search(&e.dst).expect("present");
        rows[i] |= 1 << j;
    }
    (vertices, rows)
}

pub fn canonical_label(subgraph: &EdgeSubgraph) -> CanonicalLabel {
    let refs: Vec<&TemporalEdge> = subgraph.edges().iter().collect();
    let (_, rows) = adjacency_rows(&refs);
    CanonicalLabel::from_adjacency(&rows)
}

/// Multiplicative hash for the memo's packed keys.
#[derive(Debug, Default, Clone, Copy)]
struct PackedHasher(u64);

impl Hasher for PackedHasher {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.write_u64(u64::from(b));
        }
    }

    fn write_u64(&mut self, x: u64) {
        self.0 = (self.0.rotate_left(29) ^ x).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    }

    fn write_u128(&mut self, x: u128) {
        self.write_u64(x as u64);
        self.write_u64((x >> 64) as u64);
    }
}

/// Memoizes canonical forms by raw adjacency. Raw keys use first-appearance
/// vertex order, so one class may own several keys.
#[derive(Debug, Default)]
pub struct LabelCache {
    memo: HashMap<u128, usize, BuildHasherDefault<PackedHasher>>,
    ids: HashMap<CanonicalLabel, usize>,
    labels: Vec<CanonicalLabel>,
}

impl LabelCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Dense id of the class of `edges`; ids count up from 0 in order of
    /// first sight.
    pub fn class_id(&mut self, edges: &[&TemporalEdge]) -> usize {
        let mut vertices = [VehicleId(0); MAX_NODES];
        let mut n = 0;
        let mut rows = [0u8; MAX_NODES];
        for e in edges {
            let mut slot = |v: VehicleId| match vertices[..n].iter().position(|&u| u == v) {
                Some(i) => i,
                None => {
                    assert!(n < MAX_NODES, "at most {MAX_NODES} vertices supported");
                    vertices[n] = v;
                    n += 1;
                    n - 1
                }
            };
            let i = slot(e.src);
            let j = slot(e.dst);
            rows[i] |= 1 << j;
        }
        let key = rows[..n].iter().fold(0u128, |acc, &r| acc << 8 | u128::from(r)) | (n as u128) << 64;
        if let Some(&id) = self.memo.get(&key) {
            return id;
        }
        let label = CanonicalLabel::from_adjacency(&rows[..n]);
        let next = self.labels.len();
        let id = *self.ids.entry(label).or_insert(next);
        if id == next {
            self.labels.push(label);
        }
        self.memo.insert(key, id);
        id
    }

    pub fn label_of(&self, id: usize) -> CanonicalLabel {
        self.labels[id]
    }

    pub fn label_edges(&mut self, edges: &[&TemporalEdge]) -> CanonicalLabel {
        let id = self.class_id(edges);
        self.labels[id]
    }

    pub fn label(&mut self, subgraph: &EdgeSubgraph) -> CanonicalLabel {
        let refs: Vec<&TemporalEdge> = subgraph.edges().iter().collect();
        self.label_edges(&refs)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructureClass {
    pub label: CanonicalLabel,
    pub k: usize,
    pub instances: Vec<EdgeSubgraph>,
}

impl StructureClass {
    /// Occurrence count.
    pub fn frequency(&self) -> usize {
        self.instances.len()
    }
}

/// Groups subgraphs by canonical label, classes ordered by label.
pub fn classify(subgraphs: Vec<EdgeSubgraph>) -> Result<Vec<StructureClass>> {
    let Some(k) = subgraphs.first().map(EdgeSubgraph::len) else {
        return Ok(Vec::new());
    };
    let mut cache = LabelCache::new();
    let mut groups: BTreeMap<CanonicalLabel, Vec<EdgeSubgraph>> = BTreeMap::new();
    for s in subgraphs {
        if s.len() != k {
            return Err(Error::invalid(format!("cannot classify subgraphs of mixed sizes ({k} and {})", s.len())));
        }
        groups.entry(cache.label(&s)).or_default().push(s);
    }
    Ok(groups.into_iter().map(|(label, instances)| StructureClass { label, k, instances }).collect())
}
