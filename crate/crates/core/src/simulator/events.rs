//! Poisson V2V communication events from a mobility trace.

use std::collections::{BTreeMap, BTreeSet};

use rand::RngExt;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeds;
use crate::simulator::trace::Trace;
use crate::temporal_graph::{RawEvent, TemporalGraph, VehicleId};

const MAX_REDRAWS: usize = 10_000;

/// `N_ij ~ Poisson(kappa / d_ij)` for every ordered pair with window-average
/// distance `d_ij` within `proximity_cutoff`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EventGenParams {
    /// Rate constant, m·events per window. `None` picks `5 · min d_ij`, so
    /// the densest pair expects five events.
    pub kappa: Option<f64>,
    /// Meters. `None` uses the channel's threshold range.
    pub proximity_cutoff: Option<f64>,
    pub window_start_s: f64,
    pub window_s: f64,
    pub rng_seed: u64,
}

impl Default for EventGenParams {
    fn default() -> Self {
        EventGenParams { kappa: None, proximity_cutoff: None, window_start_s: 0.0, window_s: 300.0, rng_seed: 0 }
    }
}

/// Distances below this are clamped when forming `kappa / d`.
const MIN_DISTANCE_M: f64 = 1.0;

/// Expected events of the densest pair when `kappa` is derived.
pub const DENSEST_PAIR_EVENTS: f64 = 5.0;

/// Window-average distance for every ordered pair.
pub fn pair_distances(trace: &Trace, window_start_s: f64, window_s: f64) -> BTreeMap<(VehicleId, VehicleId), f64> {
    let steps = trace.step_at(window_start_s)..trace.step_at(window_start_s + window_s) + 1;
    let ids: Vec<VehicleId> = trace.vehicles().into_iter().collect();
    let mut out = BTreeMap::new();
    for (i, &a) in ids.iter().enumerate() {
        for &b in &ids[i + 1..] {
            let d = trace.mean_distance(a, b, steps.clone()).max(MIN_DISTANCE_M);
            out.insert((a, b), d);
            out.insert((b, a), d);
        }
    }
    out
}

/// Rate constant and cutoff after defaults are applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedEventParams {
    pub kappa: f64,
    pub proximity_cutoff: f64,
}

pub fn resolve_event_params(
    distances: &BTreeMap<(VehicleId, VehicleId), f64>,
    p: &EventGenParams,
    default_cutoff: f64,
) -> Result<ResolvedEventParams> {
    let cutoff = p.proximity_cutoff.unwrap_or(default_cutoff);
    if !(cutoff > 0.0) {
        return Err(Error::invalid(format!("proximity cutoff must be positive, got {cutoff}")));
    }
    let kappa = match p.kappa {
        Some(k) => k,
        None => DENSEST_PAIR_EVENTS * distances.values().copied().fold(f64::INFINITY, f64::min).max(MIN_DISTANCE_M),
    };
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::invalid(format!("kappa must be positive, got {kappa}")));
    }
    Ok(ResolvedEventParams { kappa, proximity_cutoff: cutoff })
}

/// Draws the link events of one observation window. Every trace vehicle
/// is a node of the result even without events.
pub fn generate_link_events(trace: &Trace, p: &EventGenParams, default_cutoff: f64) -> Result<TemporalGraph> {
    if !(p.window_s > 0.0) {
        return Err(Error::invalid(format!("event window must be positive, got {}", p.window_s)));
    }
    let distances = pair_distances(trace, p.window_start_s, p.window_s);
    let resolved = resolve_event_params(&distances, p, default_cutoff)?;
    let t_min = (p.window_start_s * 1000.0).round() as i64;
    let t_max = ((p.window_start_s + p.window_s) * 1000.0).round() as i64;

    let mut busy: BTreeMap<VehicleId, BTreeSet<i64>> = BTreeMap::new();
    let mut events = Vec::new();
    for (&(a, b), &d) in &distances {
        if d > resolved.proximity_cutoff {
            continue;
        }
        let mut rng = seeds::stream(p.rng_seed, "events", &[u64::from(a.0), u64::from(b.0)]);
        let poisson = Poisson::new(resolved.kappa / d).map_err(|e| Error::invalid(e.to_string()))?;
        let n = poisson.sample(&mut rng) as u64;
        for _ in 0..n {
            let mut t = rng.random_range(t_min..=t_max);
            let mut tries = 0;
            while busy.get(&a).is_some_and(|s| s.contains(&t)) || busy.get(&b).is_some_and(|s| s.contains(&t)) {
                tries += 1;
                if tries > MAX_REDRAWS {
                    return Err(Error::invalid("event window too crowded to keep timestamps distinct"));
                }
                t = rng.random_range(t_min..=t_max);
            }
            busy.entry(a).or_default().insert(t);
            busy.entry(b).or_default().insert(t);
            events.push(RawEvent { src: a, dst: b, t_ms: t });
        }
    }
    TemporalGraph::build_with_nodes(&events, trace.vehicles())
}
