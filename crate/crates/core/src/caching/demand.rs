use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Zipf request popularity over `m_total` equally sized files, of which the
/// `f_cached` most popular are held by serving cars.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DemandModel {
    pub m_total: usize,
    pub f_cached: usize,
    pub theta_r: f64,
}

impl Default for DemandModel {
    fn default() -> Self {
        DemandModel { m_total: 10, f_cached: 3, theta_r: 2.0 }
    }
}

impl DemandModel {
    pub fn new(m_total: usize, f_cached: usize, theta_r: f64) -> Result<Self> {
        let dm = DemandModel { m_total, f_cached, theta_r };
        dm.validate()?;
        Ok(dm)
    }

    pub fn validate(&self) -> Result<()> {
        if self.f_cached < 1 || self.f_cached > self.m_total {
            return Err(Error::invalid(format!(
                "cached files must satisfy 1 <= F <= M, got F = {}, M = {}",
                self.f_cached, self.m_total
            )));
        }
        if !(self.theta_r >= 0.0 && self.theta_r.is_finite()) {
            return Err(Error::invalid(format!("Zipf exponent must be >= 0, got {}", self.theta_r)));
        }
        Ok(())
    }

    fn normalizer(&self) -> f64 {
        // smallest terms first
        (1..=self.m_total).rev().map(|x| (x as f64).powf(-self.theta_r)).sum()
    }

    pub fn pmf(&self, m: usize) -> Result<f64> {
        if m < 1 || m > self.m_total {
            return Err(Error::invalid(format!("file rank {m} outside 1..={}", self.m_total)));
        }
        Ok((m as f64).powf(-self.theta_r) / self.normalizer())
    }

    /// Probabilities for ranks `1..=M`.
    pub fn pmf_vec(&self) -> Vec<f64> {
        let z = self.normalizer();
        (1..=self.m_total).map(|m| (m as f64).powf(-self.theta_r) / z).collect()
    }

    /// Request mass on the cached files.
    pub fn cached_mass(&self) -> f64 {
        self.pmf_vec()[..self.f_cached].iter().rev().sum()
    }

    /// Request mass on files only the base station holds.
    pub fn uncached_mass(&self) -> f64 {
        self.pmf_vec()[self.f_cached..].iter().rev().sum()
    }
}

pub fn zipf_pmf(m: usize, dm: &DemandModel) -> Result<f64> {
    dm.validate()?;
    dm.pmf(m)
}
