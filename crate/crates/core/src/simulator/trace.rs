//! Mobility traces: CSV ingestion and a synthetic multi-lane freeway.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::path::Path;

use rand::RngExt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Position;
use crate::seeds;
use crate::temporal_graph::VehicleId;

/// Straight freeway with `lanes_per_direction` lanes each way. `x` runs along
/// the road in `[0, length_m]`, `y` across it in `[0, road width]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RoadGeometry {
    pub length_m: f64,
    pub lane_width_m: f64,
    pub lanes_per_direction: u32,
}

impl Default for RoadGeometry {
    fn default() -> Self {
        RoadGeometry { length_m: 5000.0, lane_width_m: 3.5, lanes_per_direction: 3 }
    }
}

impl RoadGeometry {
    pub fn width(&self) -> f64 {
        2.0 * f64::from(self.lanes_per_direction) * self.lane_width_m
    }

    pub fn contains(&self, p: &Position) -> bool {
        const SLACK: f64 = 1e-9;
        (-SLACK..=self.length_m + SLACK).contains(&p.x) && (-SLACK..=self.width() + SLACK).contains(&p.y)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length_m > 0.0 && self.lane_width_m > 0.0 && self.lanes_per_direction > 0) {
            return Err(Error::invalid("road length, lane width and lane count must be positive"));
        }
        Ok(())
    }
}

/// Positions of every vehicle at uniformly spaced sample times.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    t0_s: f64,
    dt_s: f64,
    steps: usize,
    series: BTreeMap<VehicleId, Vec<Position>>,
    pub road: RoadGeometry,
}

impl Trace {
    pub fn new(t0_s: f64, dt_s: f64, series: BTreeMap<VehicleId, Vec<Position>>, road: RoadGeometry) -> Result<Self> {
        let steps = series.values().next().map_or(0, Vec::len);
        if series.is_empty() || steps == 0 {
            return Err(Error::invalid("trace has no vehicles"));
        }
        if let Some((v, s)) = series.iter().find(|(_, s)| s.len() != steps) {
            return Err(Error::invalid(format!("vehicle {v} has {} samples, expected {steps}", s.len())));
        }
        if steps > 1 && !(dt_s > 0.0) {
            return Err(Error::invalid("sampling interval must be positive"));
        }
        for (v, s) in &series {
            if let Some(p) = s.iter().find(|p| !road.contains(p)) {
                return Err(Error::invalid(format!("vehicle {v} leaves the road at ({}, {})", p.x, p.y)));
            }
        }
        Ok(Trace { t0_s, dt_s, steps, series, road })
    }

    pub fn vehicles(&self) -> BTreeSet<VehicleId> {
        self.series.keys().copied().collect()
    }

    pub fn num_vehicles(&self) -> usize {
        self.series.len()
    }

    pub fn num_steps(&self) -> usize {
        self.steps
    }

    pub fn num_samples(&self) -> usize {
        self.steps * self.series.len()
    }

    pub fn dt_s(&self) -> f64 {
        self.dt_s
    }

    pub fn time_at(&self, step: usize) -> f64 {
        self.t0_s + step as f64 * self.dt_s
    }

    pub fn start_s(&self) -> f64 {
        self.t0_s
    }

    pub fn end_s(&self) -> f64 {
        self.time_at(self.steps - 1)
    }

    /// Sample index closest to `t_s`, clamped to the trace.
    pub fn step_at(&self, t_s: f64) -> usize {
        if self.steps == 1 {
            return 0;
        }
        let k = ((t_s - self.t0_s) / self.dt_s).round();
        k.clamp(0.0, (self.steps - 1) as f64) as usize
    }

    pub fn series(&self, v: VehicleId) -> Option<&[Position]> {
        self.series.get(&v).map(Vec::as_slice)
    }

    pub fn positions_at(&self, step: usize) -> BTreeMap<VehicleId, Position> {
        self.series.iter().map(|(&v, s)| (v, s[step])).collect()
    }

    /// Same trace with only the vehicles in `keep`.
    pub fn restrict_to(&self, keep: &BTreeSet<VehicleId>) -> Result<Trace> {
        let series: BTreeMap<_, _> =
            self.series.iter().filter(|(v, _)| keep.contains(v)).map(|(&v, s)| (v, s.clone())).collect();
        Trace::new(self.t0_s, self.dt_s, series, self.road)
    }

    /// Mean distance between `a` and `b` over samples `steps`.
    pub fn mean_distance(&self, a: VehicleId, b: VehicleId, steps: std::ops::Range<usize>) -> f64 {
        let (sa, sb) = (&self.series[&a], &self.series[&b]);
        let n = steps.len().max(1) as f64;
        steps.map(|k| sa[k].distance(&sb[k])).sum::<f64>() / n
    }
}

#[derive(Debug, Deserialize)]
struct TraceRow {
    t_s: f64,
    vehicle_id: u32,
    x_m: f64,
    y_m: f64,
}

const TRACE_HEADER: [&str; 4] = ["t_s", "vehicle_id", "x_m", "y_m"];

/// Parses `t_s,vehicle_id,x_m,y_m` rows in any order.
pub fn read_trace<R: Read>(reader: R, source_name: &str, road: RoadGeometry) -> Result<Trace> {
    let parse_err = |line: usize, message: String| Error::Parse { path: source_name.to_string(), line, message };
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != TRACE_HEADER {
        return Err(parse_err(1, format!("expected header `{}`", TRACE_HEADER.join(","))));
    }

    let mut rows = Vec::new();
    for (idx, rec) in rdr.deserialize::<TraceRow>().enumerate() {
        let line = idx + 2;
        let row = rec.map_err(|e| parse_err(line, e.to_string()))?;
        if !(row.t_s.is_finite() && row.x_m.is_finite() && row.y_m.is_finite()) {
            return Err(parse_err(line, "non-finite value".into()));
        }
        if !road.contains(&Position::new(row.x_m, row.y_m)) {
            return Err(parse_err(line, format!("position ({}, {}) outside the road", row.x_m, row.y_m)));
        }
        rows.push((line, row));
    }
    if rows.is_empty() {
        return Err(parse_err(1, "trace has no vehicles".into()));
    }

    // sample times: distinct values, must be uniformly spaced
    let mut times: Vec<f64> = rows.iter().map(|(_, r)| r.t_s).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let t0 = times[0];
    let dt = if times.len() > 1 { times[1] - times[0] } else { 0.0 };
    let tol = 1e-6 * dt.max(1.0);
    for (k, &t) in times.iter().enumerate() {
        if (t - (t0 + k as f64 * dt)).abs() > tol {
            let line = rows.iter().find(|(_, r)| r.t_s == t).map_or(1, |(l, _)| *l);
            return Err(parse_err(line, format!("sample time {t} breaks the uniform {dt} s spacing")));
        }
    }
    let step_of = |t: f64| ((t - t0) / if dt > 0.0 { dt } else { 1.0 }).round() as usize;

    let mut series: BTreeMap<VehicleId, Vec<Option<Position>>> = BTreeMap::new();
    for (line, r) in &rows {
        let s = series.entry(VehicleId(r.vehicle_id)).or_insert_with(|| vec![None; times.len()]);
        let k = step_of(r.t_s);
        if s[k].is_some() {
            return Err(parse_err(*line, format!("duplicate sample for vehicle {} at t = {}", r.vehicle_id, r.t_s)));
        }
        s[k] = Some(Position::new(r.x_m, r.y_m));
    }
    let mut full = BTreeMap::new();
    for (v, s) in series {
        if let Some(k) = s.iter().position(Option::is_none) {
            let last_line = rows.iter().filter(|(_, r)| r.vehicle_id == v.0).map(|(l, _)| *l).max().unwrap_or(1);
            return Err(parse_err(last_line, format!("vehicle {v} has no sample at t = {}", t0 + k as f64 * dt)));
        }
        full.insert(v, s.into_iter().map(Option::unwrap).collect());
    }
    Trace::new(t0, dt, full, road)
}

pub fn load_trace(path: &Path, road: RoadGeometry) -> Result<Trace> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_trace(std::io::BufReader::new(file), &path.display().to_string(), road)
}

/// Writes rows ordered by time, then vehicle id.
pub fn write_trace<W: Write>(writer: W, trace: &Trace) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(TRACE_HEADER)?;
    for k in 0..trace.steps {
        let t = trace.time_at(k).to_string();
        for (v, s) in &trace.series {
            wtr.write_record([t.clone(), v.to_string(), s[k].x.to_string(), s[k].y.to_string()])?;
        }
    }
    wtr.flush().map_err(|e| Error::io("<trace>", e))?;
    Ok(())
}

pub fn save_trace(path: &Path, trace: &Trace) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_trace(std::io::BufWriter::new(file), trace)
}

/// Synthetic freeway: constant per-vehicle speeds, positions wrap at the
/// ends of the segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticTraceParams {
    pub duration_s: f64,
    pub dt_s: f64,
    pub min_speed_mps: f64,
    pub max_speed_mps: f64,
    /// Vehicles enter in platoons of up to this size; 1 places every
    /// vehicle independently.
    pub platoon_size: usize,
    /// Spread of in-platoon positions along the road, m.
    pub platoon_spread_m: f64,
    /// Spread of in-platoon speeds, m/s.
    pub platoon_speed_jitter_mps: f64,
    pub road: RoadGeometry,
}

impl Default for SyntheticTraceParams {
    fn default() -> Self {
        SyntheticTraceParams {
            duration_s: 400.0,
            dt_s: 1.0,
            min_speed_mps: 20.0,
            max_speed_mps: 35.0,
            platoon_size: 1,
            platoon_spread_m: 100.0,
            platoon_speed_jitter_mps: 1.0,
            road: RoadGeometry::default(),
        }
    }
}

impl SyntheticTraceParams {
    pub fn validate(&self) -> Result<()> {
        self.road.validate()?;
        if !(self.duration_s >= 0.0 && self.dt_s > 0.0) {
            return Err(Error::invalid("trace duration must be >= 0 and dt > 0"));
        }
        if !(0.0 <= self.min_speed_mps && self.min_speed_mps <= self.max_speed_mps) {
            return Err(Error::invalid("speed range must satisfy 0 <= min <= max"));
        }
        if self.platoon_size == 0 {
            return Err(Error::invalid("platoon size must be at least 1"));
        }
        if !(self.platoon_spread_m >= 0.0 && self.platoon_speed_jitter_mps >= 0.0) {
            return Err(Error::invalid("platoon spreads must be non-negative"));
        }
        Ok(())
    }
}

pub fn generate_synthetic_trace(n_vehicles: usize, params: &SyntheticTraceParams, seed: u64) -> Result<Trace> {
    params.validate()?;
    if n_vehicles < 2 {
        return Err(Error::invalid("synthetic trace needs at least 2 vehicles"));
    }
    let road = params.road;
    let lanes = 2 * road.lanes_per_direction;
    let steps = (params.duration_s / params.dt_s).floor() as usize + 1;
    let mut rng = seeds::stream(seed, "trace", &[]);

    let mut series = BTreeMap::new();
    let mut platoon = (0.0, 0.0, 0u32);
    for i in 0..n_vehicles {
        if i % params.platoon_size == 0 {
            let x0 = rng.random_range(0.0..road.length_m);
            let speed = if params.max_speed_mps > params.min_speed_mps {
                rng.random_range(params.min_speed_mps..params.max_speed_mps)
            } else {
                params.min_speed_mps
            };
            platoon = (x0, speed, rng.random_range(0..2u32));
        }
        let (mut x0, mut speed, dir) = platoon;
        if params.platoon_size > 1 {
            x0 += params.platoon_spread_m * rng.random_range(-0.5..0.5);
            speed = (speed + params.platoon_speed_jitter_mps * rng.random_range(-1.0..1.0)).max(0.0);
        }
        let lane = dir * road.lanes_per_direction + rng.random_range(0..road.lanes_per_direction);
        debug_assert!(lane < lanes);
        let y = (f64::from(lane) + 0.5) * road.lane_width_m;
        let sign = if dir == 0 { 1.0 } else { -1.0 };
        let s: Vec<Position> = (0..steps)
            .map(|k| {
                let x = (x0 + sign * speed * k as f64 * params.dt_s).rem_euclid(road.length_m);
                Position::new(x, y)
            })
            .collect();
        series.insert(VehicleId(i as u32), s);
    }
    Trace::new(0.0, params.dt_s, series, road)
}
