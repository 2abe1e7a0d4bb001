//! Average data rate of non-serving cars for a given serving set.

use std::collections::{BTreeMap, BTreeSet};

use crate::caching::demand::DemandModel;
use crate::caching::placement::assign_nearest;
use crate::error::{Error, Result};
use crate::geometry::Position;
use crate::radio::{
    feasibility, rate, sinr_in, ChannelParams, FadingField, GainField, LinkState, RadioMap, Transmitter,
};
use crate::temporal_graph::VehicleId;

/// Everything needed to evaluate one epoch: positions, channel, demand and
/// the fading realisation.
#[derive(Debug, Clone)]
pub struct Scene<'a> {
    pub positions: &'a BTreeMap<VehicleId, Position>,
    pub base_station: Position,
    pub params: &'a ChannelParams,
    pub demand: &'a DemandModel,
    pub fading: FadingField,
    pub epoch: u64,
}

impl Scene<'_> {
    fn radio(&self) -> RadioMap<'_> {
        RadioMap {
            positions: self.positions,
            base_station: self.base_station,
            params: self.params,
            fading: self.fading,
            epoch: self.epoch,
        }
    }
}

/// Gains from every transmitter to every requester, drawn once.
struct GainTable {
    gains: BTreeMap<(Transmitter, VehicleId), f64>,
}

impl GainTable {
    fn new(radio: &RadioMap<'_>, txs: impl IntoIterator<Item = Transmitter>, rxs: &[VehicleId]) -> Self {
        let mut gains = BTreeMap::new();
        for tx in txs {
            for &rx in rxs {
                gains.insert((tx, rx), radio.gain(tx, rx));
            }
        }
        GainTable { gains }
    }
}

impl GainField for GainTable {
    fn gain(&self, tx: Transmitter, rx: VehicleId) -> f64 {
        self.gains[&(tx, rx)]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RequesterOutcome {
    pub server: VehicleId,
    pub v2v_sinr: f64,
    pub v2v_feasible: bool,
    /// `R_{c,a}`, zero when the link misses the SINR threshold.
    pub v2v_rate: f64,
    /// `R_{b,a}`.
    pub bs_rate: f64,
    /// Demand-weighted rate of this requester.
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub requesters: BTreeMap<VehicleId, RequesterOutcome>,
    /// Mean of the per-requester rates, bit/s.
    pub average: f64,
}

impl Evaluation {
    pub fn rates(&self) -> impl Iterator<Item = (VehicleId, f64)> + '_ {
        self.requesters.iter().map(|(&v, o)| (v, o.rate))
    }
}

/// Evaluates the caching objective: every non-serving car fetches cached
/// files from its nearest serving car and the rest from the base station.
/// All serving-to-requester links (and, when some demand is uncached, all
/// base-station downlinks) are taken as simultaneous.
pub fn evaluate(serving: &BTreeSet<VehicleId>, scene: &Scene<'_>) -> Result<Evaluation> {
    scene.params.validate()?;
    scene.demand.validate()?;
    if serving.is_empty() {
        return Err(Error::invalid("serving set is empty"));
    }
    if serving.len() >= scene.positions.len() {
        return Err(Error::invalid("no non-serving cars: objective undefined"));
    }
    let assignment = assign_nearest(scene.positions, serving)?;
    let radio = scene.radio();
    let cached = scene.demand.cached_mass();
    let uncached = scene.demand.uncached_mass();

    let requester_ids: Vec<VehicleId> = assignment.keys().copied().collect();
    let txs = serving.iter().map(|&c| Transmitter::Vehicle(c)).chain(std::iter::once(Transmitter::BaseStation));
    let table = GainTable::new(&radio, txs, &requester_ids);
    let link =
        |tx: Transmitter, rx: VehicleId| LinkState { gain: table.gain(tx, rx), ..radio.link_without_gain(tx, rx) };

    let mut links: Vec<LinkState> = assignment.iter().map(|(&a, &c)| link(Transmitter::Vehicle(c), a)).collect();
    let n_v2v = links.len();
    if uncached > 0.0 {
        links.extend(requester_ids.iter().map(|&a| link(Transmitter::BaseStation, a)));
    }
    let resolved = feasibility(&links, &table, scene.params);

    let mut requesters = BTreeMap::new();
    for (i, (&a, &c)) in assignment.iter().enumerate() {
        let v2v = &resolved[i];
        let v2v_sinr = sinr_in(v2v, &resolved, &table, scene.params);
        let v2v_rate = if v2v.active { rate(v2v_sinr, scene.params.omega) } else { 0.0 };
        let bs_rate = if uncached > 0.0 {
            let bs = &resolved[n_v2v + i];
            rate(sinr_in(bs, &resolved, &table, scene.params), scene.params.omega)
        } else {
            0.0
        };
        let r = cached * v2v_rate + uncached * bs_rate;
        requesters
            .insert(a, RequesterOutcome { server: c, v2v_sinr, v2v_feasible: v2v.active, v2v_rate, bs_rate, rate: r });
    }
    let average = requesters.values().map(|o| o.rate).sum::<f64>() / requesters.len() as f64;
    Ok(Evaluation { requesters, average })
}

pub fn objective_value(serving: &BTreeSet<VehicleId>, scene: &Scene<'_>) -> Result<f64> {
    evaluate(serving, scene).map(|e| e.average)
}
