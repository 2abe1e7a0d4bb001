//! Nearest-server assignment and the location-based (k-median) baseline.

use std::collections::{BTreeMap, BTreeSet};

use crate::caching::combinations;
use crate::caching::objective::{evaluate, Scene};
use crate::error::{Error, Result};
use crate::geometry::Position;
use crate::temporal_graph::VehicleId;

/// Largest fleet for which the location baseline searches exhaustively.
pub const EXHAUSTIVE_LIMIT: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    pub serving: BTreeSet<VehicleId>,
    /// Requester to its nearest serving car.
    pub assignment: BTreeMap<VehicleId, VehicleId>,
    /// Average rate over non-serving cars, bit/s.
    pub objective: f64,
}

impl Placement {
    pub fn evaluate(serving: BTreeSet<VehicleId>, scene: &Scene<'_>) -> Result<Self> {
        let e = evaluate(&serving, scene)?;
        let assignment = e.requesters.iter().map(|(&a, o)| (a, o.server)).collect();
        Ok(Placement { serving, assignment, objective: e.average })
    }
}

fn position(positions: &BTreeMap<VehicleId, Position>, v: VehicleId) -> Result<Position> {
    positions.get(&v).copied().ok_or_else(|| Error::invalid(format!("vehicle {v} has no position")))
}

/// Maps every non-serving car to its nearest serving car (ties to the
/// smaller id).
pub fn assign_nearest(
    positions: &BTreeMap<VehicleId, Position>,
    serving: &BTreeSet<VehicleId>,
) -> Result<BTreeMap<VehicleId, VehicleId>> {
    if serving.is_empty() {
        return Err(Error::invalid("serving set is empty"));
    }
    let servers: Vec<(VehicleId, Position)> =
        serving.iter().map(|&c| position(positions, c).map(|p| (c, p))).collect::<Result<_>>()?;
    Ok(positions
        .iter()
        .filter(|(v, _)| !serving.contains(v))
        .map(|(&a, pa)| {
            let mut best = servers[0];
            let mut best_d = pa.distance(&best.1);
            for &(c, pc) in &servers[1..] {
                let d = pa.distance(&pc);
                if d < best_d {
                    best = (c, pc);
                    best_d = d;
                }
            }
            (a, best.0)
        })
        .collect())
}

/// Sum over non-serving cars of the distance to the nearest serving car.
pub fn distance_cost(positions: &BTreeMap<VehicleId, Position>, serving: &BTreeSet<VehicleId>) -> Result<f64> {
    let assignment = assign_nearest(positions, serving)?;
    Ok(assignment.iter().map(|(a, c)| positions[a].distance(&positions[c])).sum())
}

struct Distances {
    n: usize,
    d: Vec<f64>,
}

impl Distances {
    fn new(pos: &[Position]) -> Self {
        let n = pos.len();
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                d[i * n + j] = pos[i].distance(&pos[j]);
            }
        }
        Distances { n, d }
    }

    fn cost(&self, chosen: &[bool]) -> f64 {
        (0..self.n)
            .filter(|&a| !chosen[a])
            .map(|a| (0..self.n).filter(|&c| chosen[c]).map(|c| self.d[a * self.n + c]).fold(f64::INFINITY, f64::min))
            .sum()
    }
}

/// Serving set minimizing the sum of nearest-server distances. Exhaustive
/// up to [`EXHAUSTIVE_LIMIT`] cars, greedy seeding plus single-swap local
/// search beyond.
pub fn select_serving_location(positions: &BTreeMap<VehicleId, Position>, c: usize) -> Result<BTreeSet<VehicleId>> {
    let n = positions.len();
    if c == 0 || c >= n {
        return Err(Error::invalid(format!("serving count must be in 1..{n}, got {c}")));
    }
    let ids: Vec<VehicleId> = positions.keys().copied().collect();
    let pos: Vec<Position> = positions.values().copied().collect();
    let dist = Distances::new(&pos);
    let chosen = if n <= EXHAUSTIVE_LIMIT { exhaustive_k_median(&dist, c) } else { local_search(&dist, c) };
    Ok(ids.into_iter().zip(chosen).filter(|(_, s)| *s).map(|(v, _)| v).collect())
}

fn exhaustive_k_median(dist: &Distances, c: usize) -> Vec<bool> {
    let mut best: Option<(f64, Vec<bool>)> = None;
    let mut mask = vec![false; dist.n];
    combinations(dist.n, c, |idx| {
        mask.iter_mut().for_each(|m| *m = false);
        idx.iter().for_each(|&i| mask[i] = true);
        let cost = dist.cost(&mask);
        if best.as_ref().is_none_or(|(b, _)| cost < *b) {
            best = Some((cost, mask.clone()));
        }
    });
    best.expect("at least one combination").1
}

fn local_search(dist: &Distances, c: usize) -> Vec<bool> {
    let n = dist.n;
    let mut chosen = vec![false; n];
    for _ in 0..c {
        let mut best: Option<(f64, usize)> = None;
        for cand in 0..n {
            if chosen[cand] {
                continue;
            }
            chosen[cand] = true;
            let cost = dist.cost(&chosen);
            chosen[cand] = false;
            if best.is_none_or(|(b, _)| cost < b) {
                best = Some((cost, cand));
            }
        }
        chosen[best.expect("free candidate").1] = true;
    }
    let mut cost = dist.cost(&chosen);
    loop {
        let mut improved = false;
        for out in 0..n {
            if !chosen[out] {
                continue;
            }
            for inn in 0..n {
                if chosen[inn] {
                    continue;
                }
                chosen[out] = false;
                chosen[inn] = true;
                let trial = dist.cost(&chosen);
                if trial < cost * (1.0 - 1e-12) {
                    cost = trial;
                    improved = true;
                    break;
                }
                chosen[inn] = false;
                chosen[out] = true;
            }
            if improved {
                break;
            }
        }
        if !improved {
            return chosen;
        }
    }
}

/// Best serving set of size `c` by brute force over the objective. Ties go
/// to the lexicographically first set.
pub fn exhaustive_best_objective(scene: &Scene<'_>, c: usize) -> Result<(BTreeSet<VehicleId>, f64)> {
    let n = scene.positions.len();
    if c == 0 || c >= n {
        return Err(Error::invalid(format!("serving count must be in 1..{n}, got {c}")));
    }
    let ids: Vec<VehicleId> = scene.positions.keys().copied().collect();
    let mut best: Option<(BTreeSet<VehicleId>, f64)> = None;
    let mut failure = None;
    combinations(n, c, |idx| {
        if failure.is_some() {
            return;
        }
        let serving: BTreeSet<VehicleId> = idx.iter().map(|&i| ids[i]).collect();
        match evaluate(&serving, scene) {
            Ok(e) => {
                if best.as_ref().is_none_or(|(_, b)| e.average > *b) {
                    best = Some((serving, e.average));
                }
            }
            Err(e) => failure = Some(e),
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(best.expect("at least one combination")),
    }
}
