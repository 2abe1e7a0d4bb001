//! Randomized reference networks.

use std::collections::HashSet;

use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::temporal_graph::{MacroscopicGraph, RawEvent, TemporalGraph, VehicleId};

const MAX_REDRAWS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NullModel {
    /// Endpoints uniform over ordered vehicle pairs, timestamps uniform.
    #[default]
    UniformEndpoints,
    /// Keeps each vehicle's out- and in-degree by shuffling destinations;
    /// timestamps uniform.
    DegreePreserving,
}

/// Time range from which reference timestamps are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ReferenceWindow {
    /// The observed graph's own `[first, last]` timestamps, widened to at
    /// least four milliseconds per edge.
    #[default]
    GraphSpan,
    Fixed {
        t_min_ms: i64,
        t_max_ms: i64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NullModelParams {
    pub samples: usize,
    pub rng_seed: u64,
    pub window: ReferenceWindow,
    pub model: NullModel,
}

impl Default for NullModelParams {
    fn default() -> Self {
        NullModelParams {
            samples: 100,
            rng_seed: 0,
            window: ReferenceWindow::GraphSpan,
            model: NullModel::UniformEndpoints,
        }
    }
}

impl NullModelParams {
    pub fn validate(&self) -> Result<()> {
        if self.samples < 2 {
            return Err(Error::invalid(format!("at least 2 reference samples are needed, got {}", self.samples)));
        }
        if let ReferenceWindow::Fixed { t_min_ms, t_max_ms } = self.window {
            if t_max_ms < t_min_ms {
                return Err(Error::invalid("reference window ends before it starts"));
            }
        }
        Ok(())
    }
}

/// One reference sample for `graph`, seeded by `params.rng_seed`.
pub fn randomize_reference(graph: &MacroscopicGraph, params: &NullModelParams) -> Result<TemporalGraph> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    randomize_with(graph, params, &mut rng)
}

pub(crate) fn randomize_with<R: Rng>(
    graph: &MacroscopicGraph,
    params: &NullModelParams,
    rng: &mut R,
) -> Result<TemporalGraph> {
    let vehicles: Vec<VehicleId> = graph.vehicles().into_iter().collect();
    if vehicles.len() < 2 {
        return Err(Error::invalid("a reference network needs at least 2 vehicles"));
    }
    let m = graph.len();
    let (t_min, t_max) = match params.window {
        ReferenceWindow::Fixed { t_min_ms, t_max_ms } => (t_min_ms, t_max_ms),
        ReferenceWindow::GraphSpan => {
            let (a, b) = graph.time_span().expect("non-empty graph");
            (a, b.max(a + 4 * m as i64))
        }
    };

    let pairs: Vec<(VehicleId, VehicleId)> = match params.model {
        NullModel::UniformEndpoints => (0..m)
            .map(|_| {
                let n = vehicles.len();
                let s = rng.random_range(0..n);
                let mut d = rng.random_range(0..n - 1);
                if d >= s {
                    d += 1;
                }
                (vehicles[s], vehicles[d])
            })
            .collect(),
        NullModel::DegreePreserving => shuffle_destinations(graph, rng),
    };

    let mut busy: HashSet<(VehicleId, i64)> = HashSet::with_capacity(2 * m);
    let mut events = Vec::with_capacity(m);
    for (src, dst) in pairs {
        let mut attempts = 0;
        let t = loop {
            let t = rng.random_range(t_min..=t_max);
            if !busy.contains(&(src, t)) && !busy.contains(&(dst, t)) {
                break t;
            }
            attempts += 1;
            if attempts >= MAX_REDRAWS {
                return Err(Error::invalid(format!(
                    "reference window [{t_min}, {t_max}] ms too narrow for {m} non-simultaneous events"
                )));
            }
        };
        busy.insert((src, t));
        busy.insert((dst, t));
        events.push(RawEvent { src, dst, t_ms: t });
    }
    TemporalGraph::build_with_nodes(&events, vehicles)
}

fn shuffle_destinations<R: Rng>(graph: &MacroscopicGraph, rng: &mut R) -> Vec<(VehicleId, VehicleId)> {
    let vehicles: Vec<VehicleId> = graph.vehicles().into_iter().collect();
    let srcs: Vec<VehicleId> = graph.edges().iter().map(|e| e.src).collect();
    let mut dsts: Vec<VehicleId> = graph.edges().iter().map(|e| e.dst).collect();
    let m = dsts.len();
    for i in (1..m).rev() {
        let j = rng.random_range(0..=i);
        dsts.swap(i, j);
    }
    // repair self-loops by swapping with a position that stays loop-free
    for i in 0..m {
        if srcs[i] != dsts[i] {
            continue;
        }
        let swapped = (0..MAX_REDRAWS).any(|_| {
            let j = rng.random_range(0..m);
            let ok = srcs[i] != dsts[j] && srcs[j] != dsts[i];
            if ok {
                dsts.swap(i, j);
            }
            ok
        });
        if !swapped {
            // no loop-free swap exists; give up this edge's in-degree
            let others: Vec<VehicleId> = vehicles.iter().copied().filter(|&v| v != srcs[i]).collect();
            dsts[i] = others[rng.random_range(0..others.len())];
        }
    }
    srcs.into_iter().zip(dsts).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::temporal_graph::decompose;
    use std::collections::BTreeMap;

    fn star(n: u32, edges: usize) -> MacroscopicGraph {
        // all vehicles 0..n appear; events spaced 10 ms apart
        let raw: Vec<RawEvent> = (0..edges)
            .map(|i| {
                let a = i as u32 % n;
                let b = (a + 1) % n;
                RawEvent::new(a, b, 10 * i as i64)
            })
            .collect();
        let g = TemporalGraph::build(&raw).unwrap();
        decompose(&g, 1_000_000).unwrap().remove(0)
    }

    #[test]
    fn preserves_counts_and_vehicles() {
        let g = star(5, 12);
        for seed in 0..20 {
            let p = NullModelParams { rng_seed: seed, ..Default::default() };
            let r = randomize_reference(&g, &p).unwrap();
            assert_eq!(r.edges().len(), g.len());
            assert_eq!(*r.nodes(), g.vehicles());
            assert!(r.edges().iter().all(|e| e.src != e.dst));
        }
    }

    #[test]
    fn deterministic_for_seed() {
        let g = star(5, 12);
        let p = NullModelParams { rng_seed: 42, ..Default::default() };
        assert_eq!(randomize_reference(&g, &p).unwrap(), randomize_reference(&g, &p).unwrap());
        let q = NullModelParams { rng_seed: 43, ..Default::default() };
        assert_ne!(randomize_reference(&g, &p).unwrap(), randomize_reference(&g, &q).unwrap());
    }

    #[test]
    fn fixed_window_is_respected() {
        let g = star(4, 8);
        let p =
            NullModelParams { window: ReferenceWindow::Fixed { t_min_ms: 1000, t_max_ms: 2000 }, ..Default::default() };
        let r = randomize_reference(&g, &p).unwrap();
        assert!(r.edges().iter().all(|e| (1000..=2000).contains(&e.t_ms)));
    }

    #[test]
    fn too_few_vehicles_or_samples() {
        let e = crate::temporal_graph::TemporalEdge { label: 0, src: VehicleId(0), dst: VehicleId(1), t_ms: 0 };
        let two =
            MacroscopicGraph::from_edges(vec![e, crate::temporal_graph::TemporalEdge { label: 1, t_ms: 5, ..e }], 10);
        assert!(randomize_reference(&two, &NullModelParams::default()).is_ok());
        let p = NullModelParams { samples: 1, ..Default::default() };
        assert!(randomize_reference(&two, &p).is_err());
        let lonely = MacroscopicGraph::from_edges(vec![], 10);
        assert!(randomize_reference(&lonely, &NullModelParams::default()).is_err());
    }

    #[test]
    fn degree_preserving_keeps_out_degrees() {
        let g = star(6, 18);
        let p = NullModelParams { model: NullModel::DegreePreserving, rng_seed: 3, ..Default::default() };
        let r = randomize_reference(&g, &p).unwrap();
        let out = |edges: &[crate::temporal_graph::TemporalEdge]| {
            let mut m: BTreeMap<VehicleId, usize> = BTreeMap::new();
            for e in edges {
                *m.entry(e.src).or_default() += 1;
            }
            m
        };
        assert_eq!(out(r.edges()), out(g.edges()));
    }

    #[test]
    fn pair_shares_are_uniform() {
        // oracle: each of the 20 ordered pairs has probability 1/20 per edge
        let g = star(5, 10);
        let mut counts: BTreeMap<(VehicleId, VehicleId), usize> = BTreeMap::new();
        let samples = 1000;
        for seed in 0..samples {
            let p = NullModelParams { rng_seed: 1000 + seed, ..Default::default() };
            for e in randomize_reference(&g, &p).unwrap().edges() {
                *counts.entry((e.src, e.dst)).or_default() += 1;
            }
        }
        assert_eq!(counts.len(), 20);
        let total = (samples as usize * g.len()) as f64;
        let p = 1.0 / 20.0;
        let se = (p * (1.0 - p) / total).sqrt();
        for (&pair, &c) in &counts {
            let share = c as f64 / total;
            assert!((share - p).abs() <= 3.0 * se, "{pair:?}: {share}");
        }
    }
}
