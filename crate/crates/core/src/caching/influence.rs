//! Motif influence: which cars originate the most connections inside the
//! detected motifs.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::motif::{EdgeSubgraph, Motif};
use crate::temporal_graph::VehicleId;

/// Vehicle with the largest outdegree in the collapsed structure of `s`.
/// Ties: larger total degree, then smaller id.
pub fn influential_car(s: &EdgeSubgraph) -> VehicleId {
    let arcs: BTreeSet<(VehicleId, VehicleId)> = s.edges().iter().map(|e| (e.src, e.dst)).collect();
    let mut degree: BTreeMap<VehicleId, (usize, usize)> = BTreeMap::new();
    for &(a, b) in &arcs {
        let da = degree.entry(a).or_default();
        da.0 += 1;
        da.1 += 1;
        degree.entry(b).or_default().1 += 1;
    }
    degree
        .into_iter()
        .max_by(|(va, (oa, ta)), (vb, (ob, tb))| oa.cmp(ob).then(ta.cmp(tb)).then(vb.cmp(va)))
        .map(|(v, _)| v)
        .expect("non-empty subgraph")
}

/// Per-motif frequency normalization for `f_ij`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrequencyNormalization {
    /// Share of the motif's instances.
    #[default]
    Fraction,
    /// Raw number of instances.
    RawCount,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceTable {
    /// `f(j)` for every vehicle.
    pub scores: BTreeMap<VehicleId, f64>,
    /// `w_i` per motif, same order as the input.
    pub weights: Vec<f64>,
    /// `f_ij` per motif; vehicles absent from a motif are omitted.
    pub frequencies: Vec<BTreeMap<VehicleId, f64>>,
}

impl InfluenceTable {
    pub fn score(&self, v: VehicleId) -> f64 {
        self.scores.get(&v).copied().unwrap_or(0.0)
    }
}

/// Motif weights `Z_i / sum Z`. Infinite scores are left out of that sum
/// and given weight 1; all weights are then renormalized together.
fn motif_weights(z: &[f64]) -> Vec<f64> {
    let finite_sum: f64 = z.iter().filter(|v| v.is_finite()).sum();
    let raw: Vec<f64> = z
        .iter()
        .map(|&v| {
            if v.is_finite() {
                if finite_sum > 0.0 {
                    v / finite_sum
                } else {
                    0.0
                }
            } else {
                1.0
            }
        })
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Scores every vehicle in `vehicles` by its weighted frequency of being the
/// influential car of a motif instance.
pub fn influence_scores(
    motifs: &[Motif],
    vehicles: &BTreeSet<VehicleId>,
    normalization: FrequencyNormalization,
) -> Result<InfluenceTable> {
    if motifs.is_empty() {
        return Err(Error::NoMotifs);
    }
    if let Some(m) = motifs.iter().find(|m| !(m.z > 0.0) || m.instances.is_empty()) {
        return Err(Error::invalid(format!("motif {} needs a positive Z-score and at least one instance", m.label)));
    }
    let weights = motif_weights(&motifs.iter().map(|m| m.z).collect::<Vec<_>>());

    let mut scores: BTreeMap<VehicleId, f64> = vehicles.iter().map(|&v| (v, 0.0)).collect();
    let mut frequencies = Vec::with_capacity(motifs.len());
    for (m, &w) in motifs.iter().zip(&weights) {
        let mut counts: BTreeMap<VehicleId, f64> = BTreeMap::new();
        for inst in &m.instances {
            *counts.entry(influential_car(inst)).or_default() += 1.0;
        }
        let denom = match normalization {
            FrequencyNormalization::Fraction => m.instances.len() as f64,
            FrequencyNormalization::RawCount => 1.0,
        };
        for c in counts.values_mut() {
            *c /= denom;
        }
        for (&v, &f) in &counts {
            *scores.entry(v).or_default() += w * f;
        }
        frequencies.push(counts);
    }
    Ok(InfluenceTable { scores, weights, frequencies })
}

/// Top `c` vehicles by score; ties go to the smaller id.
pub fn select_serving_motif(table: &InfluenceTable, c: usize) -> Result<BTreeSet<VehicleId>> {
    let n = table.scores.len();
    if c == 0 || c >= n {
        return Err(Error::invalid(format!("serving count must be in 1..{n}, got {c}")));
    }
    let mut ranked: Vec<(VehicleId, f64)> = table.scores.iter().map(|(&v, &s)| (v, s)).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(ranked.into_iter().take(c).map(|(v, _)| v).collect())
}
