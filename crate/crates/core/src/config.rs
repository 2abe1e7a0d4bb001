//! TOML run configuration. Every key is optional; absent keys take the
//! defaults below. Power and threshold values are given in dBm/dB here and
//! converted to linear units once.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::caching::{DemandModel, FrequencyNormalization};
use crate::error::{Error, Result};
use crate::motif::{CountMode, NullModel, NullModelParams, ReferenceWindow};
use crate::radio::{db_to_linear, dbm_to_watts, ChannelParams};
use crate::simulator::{EventGenParams, RoadGeometry, ScenarioConfig, SyntheticTraceParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub scenario: ScenarioSection,
    pub motif: MotifSection,
    pub null_model: NullModelSection,
    pub channel: ChannelSection,
    pub demand: DemandModel,
    pub trace: TraceSection,
    pub events: EventsSection,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 0,
            out_dir: PathBuf::from("out"),
            scenario: ScenarioSection::default(),
            motif: MotifSection::default(),
            null_model: NullModelSection::default(),
            channel: ChannelSection::default(),
            demand: DemandModel::default(),
            trace: TraceSection::default(),
            events: EventsSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioSection {
    pub id: u8,
    pub n_vehicles: usize,
    pub serving_counts: Vec<usize>,
    pub car_sets: Vec<usize>,
    pub non_serving: usize,
    pub replications: usize,
    pub eval_epochs: usize,
    pub eval_step_s: f64,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        let d = ScenarioConfig::default();
        ScenarioSection {
            id: d.scenario,
            n_vehicles: d.n_vehicles,
            serving_counts: d.serving_counts,
            car_sets: d.car_sets,
            non_serving: d.non_serving,
            replications: d.replications,
            eval_epochs: d.eval_epochs,
            eval_step_s: d.eval_step_s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MotifSection {
    pub k: usize,
    pub z_threshold: f64,
    pub t_constraint_s: f64,
    pub count_mode: CountMode,
    pub normalization: FrequencyNormalization,
}

impl Default for MotifSection {
    fn default() -> Self {
        let d = ScenarioConfig::default();
        MotifSection {
            k: d.k,
            z_threshold: d.z_threshold,
            t_constraint_s: d.t_constraint_s,
            count_mode: d.count_mode,
            normalization: d.normalization,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NullModelSection {
    pub samples: usize,
    pub model: NullModel,
    pub window: ReferenceWindow,
}

impl Default for NullModelSection {
    fn default() -> Self {
        let d = NullModelParams::default();
        NullModelSection { samples: d.samples, model: d.model, window: d.window }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelSection {
    pub alpha: f64,
    pub noise_dbm: f64,
    pub bandwidth_hz: f64,
    pub p_max_dbm: f64,
    pub p_bs_w: f64,
    pub sinr_threshold_db: f64,
    pub rayleigh: bool,
    pub bs_distance_m: f64,
}

impl Default for ChannelSection {
    fn default() -> Self {
        ChannelSection {
            alpha: 3.0,
            noise_dbm: -94.0,
            bandwidth_hz: 75e6,
            p_max_dbm: 20.0,
            p_bs_w: 20.0,
            sinr_threshold_db: 10.0,
            rayleigh: true,
            bs_distance_m: 10_000.0,
        }
    }
}

impl ChannelSection {
    pub fn to_params(&self) -> ChannelParams {
        ChannelParams {
            alpha: self.alpha,
            sigma2: dbm_to_watts(self.noise_dbm),
            omega: self.bandwidth_hz,
            p_max: dbm_to_watts(self.p_max_dbm),
            p_bs: self.p_bs_w,
            gamma_bar: db_to_linear(self.sinr_threshold_db),
            rayleigh: self.rayleigh,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TraceSection {
    /// CSV trace to use instead of the synthetic freeway.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    pub duration_s: f64,
    pub dt_s: f64,
    pub min_speed_mps: f64,
    pub max_speed_mps: f64,
    pub platoon_size: usize,
    pub platoon_spread_m: f64,
    pub platoon_speed_jitter_mps: f64,
    pub road: RoadGeometry,
}

impl Default for TraceSection {
    fn default() -> Self {
        let d = SyntheticTraceParams::default();
        TraceSection {
            path: None,
            duration_s: d.duration_s,
            dt_s: d.dt_s,
            min_speed_mps: d.min_speed_mps,
            max_speed_mps: d.max_speed_mps,
            platoon_size: d.platoon_size,
            platoon_spread_m: d.platoon_spread_m,
            platoon_speed_jitter_mps: d.platoon_speed_jitter_mps,
            road: d.road,
        }
    }
}

impl TraceSection {
    pub fn synthetic(&self) -> SyntheticTraceParams {
        SyntheticTraceParams {
            duration_s: self.duration_s,
            dt_s: self.dt_s,
            min_speed_mps: self.min_speed_mps,
            max_speed_mps: self.max_speed_mps,
            platoon_size: self.platoon_size,
            platoon_spread_m: self.platoon_spread_m,
            platoon_speed_jitter_mps: self.platoon_speed_jitter_mps,
            road: self.road,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EventsSection {
    /// Omitted: derived from the densest pair.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    /// Omitted: the channel's threshold range.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub proximity_cutoff_m: Option<f64>,
    pub window_start_s: f64,
    pub window_s: f64,
}

impl Default for EventsSection {
    fn default() -> Self {
        let d = EventGenParams::default();
        EventsSection {
            kappa: d.kappa,
            proximity_cutoff_m: d.proximity_cutoff,
            window_start_s: d.window_start_s,
            window_s: d.window_s,
        }
    }
}

impl Config {
    pub fn from_toml_str(s: &str) -> Result<Config> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn channel_params(&self) -> ChannelParams {
        self.channel.to_params()
    }

    pub fn null_model_params(&self) -> NullModelParams {
        NullModelParams {
            samples: self.null_model.samples,
            rng_seed: self.seed,
            window: self.null_model.window,
            model: self.null_model.model,
        }
    }

    pub fn to_scenario(&self) -> Result<ScenarioConfig> {
        let cfg = ScenarioConfig {
            scenario: self.scenario.id,
            n_vehicles: self.scenario.n_vehicles,
            serving_counts: self.scenario.serving_counts.clone(),
            car_sets: self.scenario.car_sets.clone(),
            non_serving: self.scenario.non_serving,
            replications: self.scenario.replications,
            t_constraint_s: self.motif.t_constraint_s,
            z_threshold: self.motif.z_threshold,
            k: self.motif.k,
            null_model: self.null_model_params(),
            count_mode: self.motif.count_mode,
            normalization: self.motif.normalization,
            demand: self.demand,
            channel: self.channel_params(),
            bs_distance_m: self.channel.bs_distance_m,
            trace: self.trace.synthetic(),
            trace_path: self.trace.path.clone(),
            events: EventGenParams {
                kappa: self.events.kappa,
                proximity_cutoff: self.events.proximity_cutoff_m,
                window_start_s: self.events.window_start_s,
                window_s: self.events.window_s,
                rng_seed: self.seed,
            },
            eval_epochs: self.scenario.eval_epochs,
            eval_step_s: self.scenario.eval_step_s,
            seed: self.seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_table_defaults() {
        let c = Config::from_toml_str("").unwrap();
        assert_eq!(c, Config::default());
        let p = c.channel_params();
        assert_eq!(p, ChannelParams::default());
        assert_eq!(c.demand, DemandModel { m_total: 10, f_cached: 3, theta_r: 2.0 });
        assert_eq!(c.motif.t_constraint_s, 100.0);
        assert_eq!(c.trace.road.lane_width_m, 3.5);
        assert_eq!(c.channel.bs_distance_m, 10_000.0);
        assert_eq!(c.motif.z_threshold, 2.0);
        assert_eq!(c.motif.k, 3);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(Config::from_toml_str("sed = 3").is_err());
        assert!(Config::from_toml_str("[channel]\nnoise = -90").is_err());
        assert!(Config::from_toml_str("[trace.road]\nlanes = 2").is_err());
    }

    #[test]
    fn partial_override() {
        let c = Config::from_toml_str("seed = 9\n[channel]\nsinr_threshold_db = 3\n[demand]\nf_cached = 5\n").unwrap();
        assert_eq!(c.seed, 9);
        assert!((c.channel_params().gamma_bar - 10f64.powf(0.3)).abs() < 1e-12);
        assert_eq!(c.demand.f_cached, 5);
        assert_eq!(c.demand.m_total, 10);
        assert_eq!(c.channel.alpha, 3.0);
    }

    #[test]
    fn serialized_form_round_trips() {
        let c = Config { events: EventsSection { kappa: Some(40.0), ..Default::default() }, ..Default::default() };
        let text = c.to_toml_string().unwrap();
        assert_eq!(Config::from_toml_str(&text).unwrap(), c);
        assert!(text.contains("noise_dbm = -94"));
    }

    #[test]
    fn scenario_validation_runs() {
        assert!(Config::default().to_scenario().is_ok());
        let bad = Config { scenario: ScenarioSection { id: 4, ..Default::default() }, ..Default::default() };
        assert!(bad.to_scenario().is_err());
    }
}
