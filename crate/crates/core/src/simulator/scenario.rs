//! The two evaluation scenarios: a fixed fleet with a serving-count sweep,
//! and growing fleets with a fixed number of requesters.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;
use std::path::PathBuf;

use log::warn;
use rand::seq::IteratorRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::caching::{
    evaluate, influence_scores, select_serving_location, select_serving_motif, DemandModel, FrequencyNormalization,
    Scene,
};
use crate::error::{Error, Result};
use crate::geometry::Position;
use crate::motif::{CountMode, Motif, MotifDetector, NullModelParams};
use crate::radio::{ChannelParams, FadingField};
use crate::seeds;
use crate::simulator::cdf::{compute_cdf, dominance_order};
use crate::simulator::events::{
    generate_link_events, pair_distances, resolve_event_params, EventGenParams, ResolvedEventParams,
};
use crate::simulator::trace::{generate_synthetic_trace, load_trace, SyntheticTraceParams, Trace};
use crate::temporal_graph::{decompose, TemporalGraph, VehicleId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Motif,
    Location,
}

impl Strategy {
    pub const ALL: [Strategy; 2] = [Strategy::Motif, Strategy::Location];
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Motif => "motif",
            Strategy::Location => "location",
        })
    }
}

/// Everything a scenario run depends on besides the master seed.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// 1: fixed fleet, sweep the serving count. 2: sweep the fleet size with
    /// a fixed number of requesters.
    pub scenario: u8,
    pub n_vehicles: usize,
    pub serving_counts: Vec<usize>,
    pub car_sets: Vec<usize>,
    pub non_serving: usize,
    pub replications: usize,
    pub t_constraint_s: f64,
    pub z_threshold: f64,
    pub k: usize,
    pub null_model: NullModelParams,
    pub count_mode: CountMode,
    pub normalization: FrequencyNormalization,
    pub demand: DemandModel,
    pub channel: ChannelParams,
    /// Perpendicular distance of the base station from the road midpoint, m.
    pub bs_distance_m: f64,
    pub trace: SyntheticTraceParams,
    /// Replaces the synthetic trace when set.
    pub trace_path: Option<PathBuf>,
    /// Observation window; serving sets are chosen at its end.
    pub events: EventGenParams,
    /// Evaluation instants after the decision, and their spacing.
    pub eval_epochs: usize,
    pub eval_step_s: f64,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            scenario: 1,
            n_vehicles: 53,
            serving_counts: (1..=10).map(|i| 5 * i).collect(),
            car_sets: (31..=53).step_by(2).collect(),
            non_serving: 30,
            replications: 20,
            t_constraint_s: 100.0,
            z_threshold: 2.0,
            k: 3,
            null_model: NullModelParams::default(),
            count_mode: CountMode::Global,
            normalization: FrequencyNormalization::Fraction,
            demand: DemandModel::default(),
            channel: ChannelParams::default(),
            bs_distance_m: 10_000.0,
            trace: SyntheticTraceParams::default(),
            trace_path: None,
            events: EventGenParams::default(),
            eval_epochs: 10,
            eval_step_s: 10.0,
            seed: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if !matches!(self.scenario, 1 | 2) {
            return Err(Error::invalid(format!("scenario must be 1 or 2, got {}", self.scenario)));
        }
        if self.replications == 0 {
            return Err(Error::invalid("at least one replication is required"));
        }
        if !(self.t_constraint_s > 0.0) {
            return Err(Error::invalid("time constraint T must be positive"));
        }
        if self.eval_epochs == 0 || !(self.eval_step_s >= 0.0) {
            return Err(Error::invalid("need at least one evaluation epoch and a non-negative step"));
        }
        if !(self.bs_distance_m > 0.0) {
            return Err(Error::invalid("base-station distance must be positive"));
        }
        if self.scenario == 2 && self.car_sets.iter().any(|&s| s > self.n_vehicles) {
            return Err(Error::invalid("a car set is larger than the fleet"));
        }
        self.demand.validate()?;
        self.channel.validate()?;
        self.null_model.validate()?;
        if self.trace_path.is_none() {
            self.trace.validate()?;
            let needed = self.decision_time_s() + self.eval_step_s * (self.eval_epochs - 1) as f64;
            if self.trace.duration_s + 1e-9 < needed {
                return Err(Error::invalid(format!(
                    "synthetic trace lasts {} s but the run needs {needed} s",
                    self.trace.duration_s
                )));
            }
        }
        Ok(())
    }

    pub fn decision_time_s(&self) -> f64 {
        self.events.window_start_s + self.events.window_s
    }

    /// Sweep points and the serving count at each.
    pub fn sweep(&self) -> Vec<(usize, usize)> {
        match self.scenario {
            1 => self.serving_counts.iter().map(|&c| (c, c)).collect(),
            _ => self.car_sets.iter().map(|&s| (s, s.saturating_sub(self.non_serving))).collect(),
        }
    }

    pub fn base_station(&self, trace: &Trace) -> Position {
        Position::new(trace.road.length_m / 2.0, trace.road.width() / 2.0 + self.bs_distance_m)
    }

    pub fn detector(&self, rng_seed: u64) -> MotifDetector {
        MotifDetector {
            k: self.k,
            z_threshold: self.z_threshold,
            null_model: NullModelParams { rng_seed, ..self.null_model.clone() },
            count_mode: self.count_mode,
        }
    }
}

/// Named seeds of one replication. Sweep-point streams take the sweep
/// value as an extra index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReplicationSeeds {
    pub trace: u64,
    pub events: u64,
    master: u64,
    replication: u64,
}

impl ReplicationSeeds {
    pub fn new(master: u64, replication: usize) -> Self {
        let r = replication as u64;
        ReplicationSeeds {
            trace: seeds::derive_seed(master, "trace", &[r]),
            events: seeds::derive_seed(master, "events", &[r]),
            master,
            replication: r,
        }
    }

    pub fn subset(&self, point: usize) -> u64 {
        seeds::derive_seed(self.master, "subset", &[self.replication, point as u64])
    }

    pub fn null_model(&self, point: usize) -> u64 {
        seeds::derive_seed(self.master, "null", &[self.replication, point as u64])
    }

    pub fn fading(&self, point: usize) -> u64 {
        seeds::derive_seed(self.master, "fading", &[self.replication, point as u64])
    }
}

/// Result of one strategy at one sweep point of one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyOutcome {
    pub strategy: Strategy,
    pub serving: BTreeSet<VehicleId>,
    /// Per-car rate averaged over the evaluation epochs.
    pub per_car: BTreeMap<VehicleId, f64>,
    pub avg_rate_bps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointOutcome {
    pub replication: usize,
    pub sweep_point: usize,
    pub serving_count: usize,
    pub motifs_found: usize,
    /// The motif strategy fell back to location-based selection.
    pub fallback: bool,
    /// Event-generator settings the motifs were mined under.
    pub events: ResolvedEventParams,
    pub outcomes: Vec<StrategyOutcome>,
}

impl PointOutcome {
    pub fn outcome(&self, s: Strategy) -> &StrategyOutcome {
        self.outcomes.iter().find(|o| o.strategy == s).expect("both strategies evaluated")
    }
}

/// Mean rate per non-serving car of `serving` over the evaluation epochs.
pub fn evaluate_over_epochs(
    cfg: &ScenarioConfig,
    trace: &Trace,
    serving: &BTreeSet<VehicleId>,
    fading_seed: u64,
) -> Result<BTreeMap<VehicleId, f64>> {
    let base_station = cfg.base_station(trace);
    let fading = FadingField { seed: fading_seed, enabled: cfg.channel.rayleigh };
    let mut sums: BTreeMap<VehicleId, f64> = BTreeMap::new();
    for e in 0..cfg.eval_epochs {
        let step = trace.step_at(cfg.decision_time_s() + e as f64 * cfg.eval_step_s);
        let positions = trace.positions_at(step);
        let scene = Scene {
            positions: &positions,
            base_station,
            params: &cfg.channel,
            demand: &cfg.demand,
            fading,
            epoch: e as u64,
        };
        for (v, r) in evaluate(serving, &scene)?.rates() {
            *sums.entry(v).or_default() += r;
        }
    }
    let n = cfg.eval_epochs as f64;
    Ok(sums.into_iter().map(|(v, s)| (v, s / n)).collect())
}

/// Mines motifs of the observation window.
pub fn mine_window(cfg: &ScenarioConfig, graph: &TemporalGraph, null_seed: u64) -> Result<Vec<Motif>> {
    let t_ms = (cfg.t_constraint_s * 1000.0).round() as i64;
    let graphs = decompose(graph, t_ms)?;
    cfg.detector(null_seed).detect(&graphs)
}

/// Both strategies on one fleet at one serving count.
#[allow(clippy::too_many_arguments)]
pub fn run_point(
    cfg: &ScenarioConfig,
    trace: &Trace,
    motifs: &[Motif],
    replication: usize,
    sweep_point: usize,
    serving_count: usize,
    fading_seed: u64,
    events: ResolvedEventParams,
) -> Result<PointOutcome> {
    let vehicles = trace.vehicles();
    let decision = trace.positions_at(trace.step_at(cfg.decision_time_s()));
    let location = select_serving_location(&decision, serving_count)?;
    let (motif_set, fallback) = match influence_scores(motifs, &vehicles, cfg.normalization) {
        Ok(table) => (select_serving_motif(&table, serving_count)?, false),
        Err(Error::NoMotifs) => {
            warn!("replication {replication}, point {sweep_point}: no motifs; using location-based selection");
            (location.clone(), true)
        }
        Err(e) => return Err(e),
    };
    let mut outcomes = Vec::with_capacity(2);
    for (strategy, serving) in [(Strategy::Motif, motif_set), (Strategy::Location, location)] {
        let per_car = evaluate_over_epochs(cfg, trace, &serving, fading_seed)?;
        let avg = per_car.values().sum::<f64>() / per_car.len() as f64;
        outcomes.push(StrategyOutcome { strategy, serving, per_car, avg_rate_bps: avg });
    }
    Ok(PointOutcome { replication, sweep_point, serving_count, motifs_found: motifs.len(), fallback, events, outcomes })
}

fn replication_trace(cfg: &ScenarioConfig, seeds: &ReplicationSeeds) -> Result<Trace> {
    match &cfg.trace_path {
        Some(path) => load_trace(path, cfg.trace.road),
        None => generate_synthetic_trace(cfg.n_vehicles, &cfg.trace, seeds.trace),
    }
}

fn run_replication(cfg: &ScenarioConfig, replication: usize) -> Result<Vec<PointOutcome>> {
    let seeds = ReplicationSeeds::new(cfg.seed, replication);
    let trace = replication_trace(cfg, &seeds)?;
    let events = EventGenParams { rng_seed: seeds.events, ..cfg.events.clone() };
    let cutoff = cfg.channel.threshold_range();
    let resolved =
        resolve_event_params(&pair_distances(&trace, events.window_start_s, events.window_s), &events, cutoff)?;
    let graph = generate_link_events(&trace, &events, cutoff)?;

    let sweep = cfg.sweep();
    match cfg.scenario {
        1 => {
            let motifs = mine_window(cfg, &graph, seeds.null_model(0))?;
            sweep
                .par_iter()
                .filter(|&&(point, c)| {
                    let ok = c >= 1 && c < trace.num_vehicles();
                    if !ok {
                        warn!("skipping sweep point {point}: {c} serving cars of {}", trace.num_vehicles());
                    }
                    ok
                })
                .map(|&(point, c)| {
                    run_point(cfg, &trace, &motifs, replication, point, c, seeds.fading(point), resolved)
                })
                .collect()
        }
        _ => sweep
            .par_iter()
            .filter(|&&(point, c)| {
                let ok = c >= 1 && point <= trace.num_vehicles();
                if !ok {
                    warn!("skipping car set {point}: {c} serving cars");
                }
                ok
            })
            .map(|&(point, c)| {
                let mut rng = seeds::stream(seeds.subset(point), "subset", &[]);
                let keep: BTreeSet<VehicleId> =
                    trace.vehicles().into_iter().sample(&mut rng, point).into_iter().collect();
                let sub_trace = trace.restrict_to(&keep)?;
                let sub_graph = graph.restrict_to(&keep);
                let motifs = mine_window(cfg, &sub_graph, seeds.null_model(point))?;
                run_point(cfg, &sub_trace, &motifs, replication, point, c, seeds.fading(point), resolved)
            })
            .collect(),
    }
}

/// Row of the metrics CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricRow {
    pub scenario: u8,
    pub sweep_point: usize,
    pub strategy: Strategy,
    pub replication: usize,
    pub avg_rate_bps: f64,
}

/// Row of the CDF CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CdfRow {
    pub scenario: u8,
    pub serving_count: usize,
    pub strategy: Strategy,
    pub rate_bps: f64,
    pub cdf: f64,
}

/// Per-sweep-point comparison of the two strategies.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub sweep_point: usize,
    pub serving_count: usize,
    pub mean_motif_bps: f64,
    pub mean_location_bps: f64,
    /// `mean_motif / mean_location - 1`.
    pub advantage: f64,
    /// Direction of the pooled per-car rate distributions, motif vs location.
    pub dominance: std::cmp::Ordering,
    pub fallbacks: usize,
    /// Mean event rate constant over the replications, m·events.
    pub mean_kappa: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioReport {
    pub scenario: u8,
    pub points: Vec<PointOutcome>,
    pub metrics: Vec<MetricRow>,
    pub cdfs: Vec<CdfRow>,
    pub summary: Vec<SweepSummary>,
}

fn pooled_rates(points: &[&PointOutcome], s: Strategy) -> Vec<f64> {
    points.iter().flat_map(|p| p.outcome(s).per_car.values().copied()).collect()
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioReport> {
    cfg.validate()?;
    let mut points: Vec<PointOutcome> = (0..cfg.replications)
        .into_par_iter()
        .map(|r| run_replication(cfg, r))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    points.sort_by_key(|p| (p.sweep_point, p.replication));

    let mut metrics = Vec::new();
    for p in &points {
        for o in &p.outcomes {
            metrics.push(MetricRow {
                scenario: cfg.scenario,
                sweep_point: p.sweep_point,
                strategy: o.strategy,
                replication: p.replication,
                avg_rate_bps: o.avg_rate_bps,
            });
        }
    }

    let mut by_point: BTreeMap<usize, Vec<&PointOutcome>> = BTreeMap::new();
    for p in &points {
        by_point.entry(p.sweep_point).or_default().push(p);
    }
    let mut cdfs = Vec::new();
    let mut summary = Vec::new();
    for (&point, group) in &by_point {
        let serving_count = group[0].serving_count;
        let mut per_strategy = BTreeMap::new();
        for s in Strategy::ALL {
            let cdf = compute_cdf(&pooled_rates(group, s))?;
            for pt in &cdf {
                cdfs.push(CdfRow { scenario: cfg.scenario, serving_count, strategy: s, rate_bps: pt.x, cdf: pt.p });
            }
            per_strategy.insert(s, cdf);
        }
        let mean = |s: Strategy| group.iter().map(|p| p.outcome(s).avg_rate_bps).sum::<f64>() / group.len() as f64;
        let (m, l) = (mean(Strategy::Motif), mean(Strategy::Location));
        summary.push(SweepSummary {
            sweep_point: point,
            serving_count,
            mean_motif_bps: m,
            mean_location_bps: l,
            advantage: m / l - 1.0,
            dominance: dominance_order(&per_strategy[&Strategy::Motif], &per_strategy[&Strategy::Location]),
            fallbacks: group.iter().filter(|p| p.fallback).count(),
            mean_kappa: group.iter().map(|p| p.events.kappa).sum::<f64>() / group.len() as f64,
        });
    }
    Ok(ScenarioReport { scenario: cfg.scenario, points, metrics, cdfs, summary })
}

pub fn write_metrics_csv<W: Write>(writer: W, rows: &[MetricRow]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    for r in rows {
        wtr.serialize(r)?;
    }
    if rows.is_empty() {
        wtr.write_record(["scenario", "sweep_point", "strategy", "replication", "avg_rate_bps"])?;
    }
    wtr.flush().map_err(|e| Error::io("<metrics>", e))?;
    Ok(())
}

pub fn write_cdf_csv<W: Write>(writer: W, rows: &[CdfRow]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    for r in rows {
        wtr.serialize(r)?;
    }
    if rows.is_empty() {
        wtr.write_record(["scenario", "serving_count", "strategy", "rate_bps", "cdf"])?;
    }
    wtr.flush().map_err(|e| Error::io("<cdf>", e))?;
    Ok(())
}
