//! Motif detection by Z-score against randomized reference networks.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeds;
use crate::temporal_graph::{decompose, MacroscopicGraph};

use super::canonical::{classify, CanonicalLabel, LabelCache};
use super::enumerate::{enumerate_subgraphs, visit_subgraphs};
use super::null_model::{randomize_with, NullModelParams};
use super::EdgeSubgraph;

/// How occurrences are counted across macroscopic graphs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountMode {
    /// Every instance in every graph counts once.
    #[default]
    Global,
    /// Number of graphs containing at least one instance.
    PerGraph,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Motif {
    pub label: CanonicalLabel,
    pub k: usize,
    /// Observed count.
    pub f: f64,
    /// Mean count over the reference samples.
    pub f_ref: f64,
    /// Population standard deviation over the reference samples.
    pub sigma_ref: f64,
    pub z: f64,
    /// Observed instances, original vehicle ids retained.
    pub instances: Vec<EdgeSubgraph>,
}

/// `(f - f_ref) / sigma`. With zero spread the score is `+inf` above the
/// mean, `-inf` below it and `0` at it.
pub fn z_score(f: f64, f_ref: f64, sigma: f64) -> f64 {
    if sigma > 0.0 {
        (f - f_ref) / sigma
    } else if f > f_ref {
        f64::INFINITY
    } else if f < f_ref {
        f64::NEG_INFINITY
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotifDetector {
    pub k: usize,
    pub z_threshold: f64,
    pub null_model: NullModelParams,
    pub count_mode: CountMode,
}

impl Default for MotifDetector {
    fn default() -> Self {
        MotifDetector { k: 3, z_threshold: 2.0, null_model: NullModelParams::default(), count_mode: CountMode::Global }
    }
}

impl MotifDetector {
    fn validate(&self) -> Result<()> {
        self.null_model.validate()?;
        if !(self.z_threshold > 0.0) {
            return Err(Error::invalid(format!("Z threshold must be positive, got {}", self.z_threshold)));
        }
        Ok(())
    }

    /// Reference statistics for every observed structure class, in label
    /// order, regardless of threshold.
    pub fn class_statistics(&self, graphs: &[MacroscopicGraph]) -> Result<Vec<Motif>> {
        self.validate()?;

        let mut observed: BTreeMap<CanonicalLabel, (f64, Vec<EdgeSubgraph>)> = BTreeMap::new();
        for g in graphs {
            for class in classify(enumerate_subgraphs(g, self.k)?)? {
                let entry = observed.entry(class.label).or_insert((0.0, Vec::new()));
                entry.0 += match self.count_mode {
                    CountMode::Global => class.frequency() as f64,
                    CountMode::PerGraph => 1.0,
                };
                entry.1.extend(class.instances);
            }
        }
        if observed.is_empty() {
            return Ok(Vec::new());
        }

        let samples: Vec<BTreeMap<CanonicalLabel, f64>> = (0..self.null_model.samples)
            .into_par_iter()
            .map(|s| self.reference_counts(graphs, s as u64))
            .collect::<Result<_>>()?;

        let n = samples.len() as f64;
        Ok(observed
            .into_iter()
            .map(|(label, (f, instances))| {
                let counts: Vec<f64> = samples.iter().map(|m| m.get(&label).copied().unwrap_or(0.0)).collect();
                let mean = counts.iter().sum::<f64>() / n;
                let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / n;
                let sigma = var.sqrt();
                Motif { label, k: self.k, f, f_ref: mean, sigma_ref: sigma, z: z_score(f, mean, sigma), instances }
            })
            .collect())
    }

    fn reference_counts(&self, graphs: &[MacroscopicGraph], sample: u64) -> Result<BTreeMap<CanonicalLabel, f64>> {
        let mut cache = LabelCache::new();
        let mut totals: BTreeMap<CanonicalLabel, f64> = BTreeMap::new();
        for (gi, g) in graphs.iter().enumerate() {
            let mut rng = seeds::stream(self.null_model.rng_seed, "reference", &[sample, gi as u64]);
            let reference = randomize_with(g, &self.null_model, &mut rng)?;
            let mut local: Vec<f64> = Vec::new();
            for part in decompose(&reference, g.t_constraint_ms())? {
                visit_subgraphs(&part, self.k, |edges| {
                    let id = cache.class_id(edges);
                    if id >= local.len() {
                        local.resize(id + 1, 0.0);
                    }
                    local[id] += 1.0;
                })?;
            }
            for (id, c) in local.into_iter().enumerate().filter(|(_, c)| *c > 0.0) {
                let label = cache.label_of(id);
                *totals.entry(label).or_default() += match self.count_mode {
                    CountMode::Global => c,
                    CountMode::PerGraph => 1.0,
                };
            }
        }
        Ok(totals)
    }

    /// Classes with `z > z_threshold`, highest Z first.
    pub fn detect(&self, graphs: &[MacroscopicGraph]) -> Result<Vec<Motif>> {
        let mut motifs: Vec<Motif> =
            self.class_statistics(graphs)?.into_iter().filter(|m| m.z > self.z_threshold).collect();
        motifs.sort_by(|a, b| b.z.total_cmp(&a.z).then(a.label.cmp(&b.label)));
        Ok(motifs)
    }
}

pub fn detect_motifs(
    graphs: &[MacroscopicGraph],
    k: usize,
    z_threshold: f64,
    null_model: &NullModelParams,
) -> Result<Vec<Motif>> {
    MotifDetector { k, z_threshold, null_model: null_model.clone(), count_mode: CountMode::Global }.detect(graphs)
}

/// One row of the motif report CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotifReportRow {
    pub canonical_label: String,
    pub k: usize,
    pub f: f64,
    pub f_ref: f64,
    pub sigma_ref: f64,
    pub z: f64,
}

impl From<&Motif> for MotifReportRow {
    fn from(m: &Motif) -> Self {
        MotifReportRow {
            canonical_label: m.label.to_string(),
            k: m.k,
            f: m.f,
            f_ref: m.f_ref,
            sigma_ref: m.sigma_ref,
            z: m.z,
        }
    }
}

pub fn write_motif_report<W: Write>(writer: W, motifs: &[Motif]) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    wtr.write_record(["canonical_label", "k", "f", "f_ref", "sigma_ref", "z"])?;
    for m in motifs {
        wtr.serialize(MotifReportRow::from(m))?;
    }
    wtr.flush().map_err(|e| Error::io("<motif report>", e))?;
    Ok(())
}

pub fn read_motif_report<R: Read>(reader: R) -> Result<Vec<MotifReportRow>> {
    let mut rdr = csv::Reader::from_reader(reader);
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}
