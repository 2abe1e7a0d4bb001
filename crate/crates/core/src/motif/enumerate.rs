//! Edge-extension search for connected k-edge subgraphs.
//!
//! Each search is seeded at an edge and only ever extends with edges whose
//! label is greater than the seed's. Candidates are drawn from the exclusive
//! neighbourhood of the newly added edge (neighbours of neither the current
//! subgraph nor already in it), which yields every connected edge set
//! exactly once.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::temporal_graph::{MacroscopicGraph, TemporalEdge, VehicleId};

use super::EdgeSubgraph;

/// Largest supported subgraph size; keeps the vertex count at or below 8.
pub const MAX_SUBGRAPH_EDGES: usize = 7;

struct Search<'a, F> {
    edges: &'a [TemporalEdge],
    neighbors: Vec<Vec<usize>>,
    k: usize,
    /// > 0 when the edge is in the current subgraph or adjacent to it.
    marks: Vec<u32>,
    current: Vec<usize>,
    picked: Vec<&'a TemporalEdge>,
    /// Extension lists of all open recursion levels, stacked.
    arena: Vec<usize>,
    visit: F,
}

impl<'a, F: FnMut(&[&TemporalEdge])> Search<'a, F> {
    fn push(&mut self, e: usize) {
        self.marks[e] += 1;
        for &u in &self.neighbors[e] {
            self.marks[u] += 1;
        }
        self.current.push(e);
        self.picked.push(&self.edges[e]);
    }

    fn pop(&mut self) {
        let e = self.current.pop().expect("non-empty");
        self.picked.pop();
        self.marks[e] -= 1;
        for &u in &self.neighbors[e] {
            self.marks[u] -= 1;
        }
    }

    /// Extends the current subgraph with the list `arena[start..end]`.
    fn extend(&mut self, seed: usize, start: usize, mut end: usize) {
        if self.current.len() + 1 == self.k {
            // last edge: every candidate closes a subgraph
            for i in (start..end).rev() {
                let w = self.arena[i];
                self.current.push(w);
                self.picked.push(&self.edges[w]);
                (self.visit)(&self.picked);
                self.picked.pop();
                self.current.pop();
            }
            return;
        }
        while end > start {
            end -= 1;
            let w = self.arena[end];
            let next = self.arena.len();
            self.arena.extend_from_within(start..end);
            for j in 0..self.neighbors[w].len() {
                let u = self.neighbors[w][j];
                if u > seed && self.marks[u] == 0 {
                    self.arena.push(u);
                }
            }
            let next_end = self.arena.len();
            self.push(w);
            self.extend(seed, next, next_end);
            self.pop();
            self.arena.truncate(next);
        }
    }
}

fn check_k(k: usize) -> Result<()> {
    if !(2..=MAX_SUBGRAPH_EDGES).contains(&k) {
        return Err(Error::invalid(format!("subgraph size must be in 2..={MAX_SUBGRAPH_EDGES}, got {k}")));
    }
    Ok(())
}

/// Calls `visit` once per connected `k`-edge subgraph of `graph`, with edges
/// in insertion order.
pub fn visit_subgraphs<F>(graph: &MacroscopicGraph, k: usize, visit: F) -> Result<()>
where
    F: FnMut(&[&TemporalEdge]),
{
    check_k(k)?;
    let edges = graph.edges();
    if k > edges.len() {
        return Ok(());
    }
    let n = edges.len();
    let mut incident: BTreeMap<VehicleId, Vec<usize>> = BTreeMap::new();
    for (i, e) in edges.iter().enumerate() {
        incident.entry(e.src).or_default().push(i);
        incident.entry(e.dst).or_default().push(i);
    }
    let neighbors: Vec<Vec<usize>> = edges
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let mut ns: Vec<usize> =
                incident[&e.src].iter().chain(&incident[&e.dst]).copied().filter(|&j| j != i).collect();
            ns.sort_unstable();
            ns.dedup();
            ns
        })
        .collect();

    let mut search = Search {
        edges,
        neighbors,
        k,
        marks: vec![0; n],
        current: Vec::with_capacity(k),
        picked: Vec::with_capacity(k),
        arena: Vec::new(),
        visit,
    };
    for seed in 0..n {
        search.arena.clear();
        for j in 0..search.neighbors[seed].len() {
            let u = search.neighbors[seed][j];
            if u > seed {
                search.arena.push(u);
            }
        }
        let end = search.arena.len();
        search.push(seed);
        search.extend(seed, 0, end);
        search.pop();
    }
    Ok(())
}

/// All connected `k`-edge subgraphs of `graph`, each exactly once.
pub fn enumerate_subgraphs(graph: &MacroscopicGraph, k: usize) -> Result<Vec<EdgeSubgraph>> {
    let mut out = Vec::new();
    visit_subgraphs(graph, k, |edges| {
        out.push(EdgeSubgraph::new(edges.iter().map(|&&e| e).collect()));
    })?;
    Ok(out)
}
