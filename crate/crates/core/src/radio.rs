//! Channel gains, SINR and achievable rates for V2V and base-station links.
//!
//! All quantities are linear (W, Hz, ratio); dB/dBm conversion happens at
//! the configuration boundary.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Position;
use crate::seeds;
use crate::temporal_graph::VehicleId;

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) / 1000.0
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * (w * 1000.0).log10()
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Path-loss exponent.
    pub alpha: f64,
    /// Noise power, W.
    pub sigma2: f64,
    /// Bandwidth, Hz.
    pub omega: f64,
    /// V2V transmit power, W.
    pub p_max: f64,
    /// Base-station transmit power, W.
    pub p_bs: f64,
    /// SINR threshold, linear.
    pub gamma_bar: f64,
    pub rayleigh: bool,
}

impl Default for ChannelParams {
    fn default() -> Self {
        ChannelParams {
            alpha: 3.0,
            sigma2: dbm_to_watts(-94.0),
            omega: 75e6,
            p_max: dbm_to_watts(20.0),
            p_bs: 20.0,
            gamma_bar: db_to_linear(10.0),
            rayleigh: true,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("alpha", self.alpha),
            ("sigma2", self.sigma2),
            ("omega", self.omega),
            ("p_max", self.p_max),
            ("p_bs", self.p_bs),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !(self.gamma_bar >= 0.0) {
            return Err(Error::invalid("SINR threshold must be non-negative"));
        }
        Ok(())
    }

    /// Distance at which an interference-free link at `p_max` reaches the
    /// SINR threshold under median fading.
    pub fn threshold_range(&self) -> f64 {
        let median_eta = if self.rayleigh { std::f64::consts::LN_2 } else { 1.0 };
        (self.p_max * median_eta / (self.sigma2 * self.gamma_bar)).powf(1.0 / self.alpha)
    }
}

/// Fading power gain of one link realisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingDraw {
    eta: f64,
}

impl FadingDraw {
    pub fn unit() -> Self {
        FadingDraw { eta: 1.0 }
    }

    pub fn new(eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::invalid(format!("fading gain must be positive, got {eta}")));
        }
        Ok(FadingDraw { eta })
    }

    /// Unit-mean exponential power gain (Rayleigh envelope).
    pub fn rayleigh<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let eta: f64 = Exp1.sample(rng);
            if eta > 0.0 {
                return FadingDraw { eta };
            }
        }
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }
}

/// `eta * d^-alpha`.
pub fn channel_gain(d: f64, params: &ChannelParams, fading: FadingDraw) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::invalid(format!("link distance must be positive, got {d}")));
    }
    Ok(fading.eta * d.powf(-params.alpha))
}

/// `omega * log2(1 + gamma)`.
pub fn rate(gamma: f64, omega: f64) -> f64 {
    omega * (1.0 + gamma).log2()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Transmitter {
    BaseStation,
    Vehicle(VehicleId),
}

impl Transmitter {
    fn stream_key(self) -> u64 {
        match self {
            Transmitter::BaseStation => u64::MAX,
            Transmitter::Vehicle(v) => u64::from(v.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkState {
    pub tx: Transmitter,
    pub rx: VehicleId,
    /// Transmit power, W.
    pub power: f64,
    /// Gain of the link itself.
    pub gain: f64,
    /// Feasibility indicator.
    pub active: bool,
}

impl LinkState {
    pub fn is_bs(&self) -> bool {
        self.tx == Transmitter::BaseStation
    }

    pub fn received_power(&self) -> f64 {
        self.power * self.gain
    }
}

/// Gain from any transmitter to any vehicle receiver.
pub trait GainField {
    fn gain(&self, tx: Transmitter, rx: VehicleId) -> f64;
}

/// Per-link fading source: one draw per `(tx, rx, epoch)` derived from a
/// seed, or `eta = 1` when fading is off.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FadingField {
    pub seed: u64,
    pub enabled: bool,
}

impl FadingField {
    pub fn off() -> Self {
        FadingField { seed: 0, enabled: false }
    }

    pub fn draw(&self, tx: Transmitter, rx: VehicleId, epoch: u64) -> FadingDraw {
        if !self.enabled {
            return FadingDraw::unit();
        }
        let mut rng = seeds::stream(self.seed, "fading", &[tx.stream_key(), u64::from(rx.0), epoch]);
        FadingDraw::rayleigh(&mut rng)
    }
}

/// Gains from positions, a base-station location and a fading field.
#[derive(Debug, Clone)]
pub struct RadioMap<'a> {
    pub positions: &'a BTreeMap<VehicleId, Position>,
    pub base_station: Position,
    pub params: &'a ChannelParams,
    pub fading: FadingField,
    pub epoch: u64,
}

impl RadioMap<'_> {
    fn position_of(&self, tx: Transmitter) -> Position {
        match tx {
            Transmitter::BaseStation => self.base_station,
            Transmitter::Vehicle(v) => self.positions[&v],
        }
    }

    pub fn link(&self, tx: Transmitter, rx: VehicleId) -> LinkState {
        LinkState { gain: self.gain(tx, rx), ..self.link_without_gain(tx, rx) }
    }

    /// Link at full power with the gain left at zero.
    pub fn link_without_gain(&self, tx: Transmitter, rx: VehicleId) -> LinkState {
        let power = match tx {
            Transmitter::BaseStation => self.params.p_bs,
            Transmitter::Vehicle(_) => self.params.p_max,
        };
        LinkState { tx, rx, power, gain: 0.0, active: true }
    }
}

impl GainField for RadioMap<'_> {
    fn gain(&self, tx: Transmitter, rx: VehicleId) -> f64 {
        // co-located transceivers are clamped to 1 m
        let d = self.position_of(tx).distance(&self.positions[&rx]).max(1.0);
        let fading = self.fading.draw(tx, rx, self.epoch);
        channel_gain(d, self.params, fading).expect("distance clamped positive")
    }
}

/// Interference at `rx` from active V2V links to other receivers. Links
/// sharing the transmitter `own_tx` are multiplexed by that transmitter and
/// do not count.
fn v2v_interference(rx: VehicleId, own_tx: Transmitter, v2v_links: &[LinkState], gains: &dyn GainField) -> f64 {
    v2v_links
        .iter()
        .filter(|l| l.active && !l.is_bs() && l.rx != rx && l.tx != Transmitter::Vehicle(rx) && l.tx != own_tx)
        .map(|l| l.power * gains.gain(l.tx, rx))
        .sum()
}

/// SINR of a V2V link. Base-station interference sums the active BS links
/// to other receivers; V2V interference sums active V2V links to other
/// receivers from other transmitters.
pub fn sinr_v2v(
    link: &LinkState,
    bs_links: &[LinkState],
    v2v_links: &[LinkState],
    gains: &dyn GainField,
    params: &ChannelParams,
) -> f64 {
    let bs_power: f64 = bs_links.iter().filter(|l| l.active && l.is_bs() && l.rx != link.rx).map(|l| l.power).sum();
    let i_bs = if bs_power > 0.0 { bs_power * gains.gain(Transmitter::BaseStation, link.rx) } else { 0.0 };
    let i_v2v = v2v_interference(link.rx, link.tx, v2v_links, gains);
    link.received_power() / (i_bs + i_v2v + params.sigma2)
}

/// SINR of a base-station downlink, interfered by active V2V links.
pub fn sinr_bs(link: &LinkState, v2v_links: &[LinkState], gains: &dyn GainField, params: &ChannelParams) -> f64 {
    link.received_power() / (v2v_interference(link.rx, link.tx, v2v_links, gains) + params.sigma2)
}

/// SINR of `link` within the mixed link set `links` (BS and V2V), using
/// each link's current `active` flag.
pub fn sinr_in(link: &LinkState, links: &[LinkState], gains: &dyn GainField, params: &ChannelParams) -> f64 {
    if link.is_bs() {
        sinr_bs(link, links, gains, params)
    } else {
        sinr_v2v(link, links, links, gains, params)
    }
}

/// Two-pass resolution of the feasibility indicators: interference-free
/// SNR first, then SINR against the first-pass survivors. Flags only ever
/// clear in the second pass.
pub fn feasibility(links: &[LinkState], gains: &dyn GainField, params: &ChannelParams) -> Vec<LinkState> {
    let first: Vec<LinkState> = links
        .iter()
        .map(|l| LinkState { active: l.received_power() / params.sigma2 >= params.gamma_bar, ..*l })
        .collect();
    first
        .iter()
        .map(|l| LinkState { active: l.active && sinr_in(l, &first, gains, params) >= params.gamma_bar, ..*l })
        .collect()
}
