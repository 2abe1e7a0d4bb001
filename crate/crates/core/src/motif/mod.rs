//! Microscopic subgraph mining: edge-based enumeration, canonical labelling,
//! structure classes and Z-score motif detection.

mod canonical;
mod detect;
mod enumerate;
mod null_model;

use std::collections::BTreeSet;

use crate::temporal_graph::{TemporalEdge, VehicleId};

pub use canonical::{canonical_label, classify, CanonicalLabel, LabelCache, StructureClass};
pub use detect::{
    detect_motifs, read_motif_report, write_motif_report, z_score, CountMode, Motif, MotifDetector, MotifReportRow,
};
pub use enumerate::{enumerate_subgraphs, visit_subgraphs, MAX_SUBGRAPH_EDGES};
pub use null_model::{randomize_reference, NullModel, NullModelParams, ReferenceWindow};

/// A connected set of `k` edges taken from one macroscopic graph. Edges are
/// kept in label order with their original vehicle identities.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EdgeSubgraph {
    edges: Vec<TemporalEdge>,
}

impl EdgeSubgraph {
    pub fn new(mut edges: Vec<TemporalEdge>) -> Self {
        edges.sort_by_key(|e| e.label);
        EdgeSubgraph { edges }
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

    pub fn edge_labels(&self) -> Vec<u32> {
        self.edges.iter().map(|e| e.label).collect()
    }

    pub fn vehicles(&self) -> BTreeSet<VehicleId> {
        self.edges.iter().flat_map(|e| [e.src, e.dst]).collect()
    }

    /// Every edge reachable from every other through shared vehicles.
    pub fn is_edge_connected(&self) -> bool {
        let n = self.edges.len();
        if n == 0 {
            return false;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if !seen[j] && self.edges[i].shares_vehicle(&self.edges[j]) {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}
