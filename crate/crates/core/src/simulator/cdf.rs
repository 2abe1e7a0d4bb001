use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{Error, Result};

/// One step of an empirical CDF: `P(X <= x) = p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CdfPoint {
    pub x: f64,
    pub p: f64,
}

/// Right-continuous empirical CDF, one point per distinct value.
pub fn compute_cdf(values: &[f64]) -> Result<Vec<CdfPoint>> {
    if values.is_empty() {
        return Err(Error::invalid("cannot build a CDF from no samples"));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::invalid("CDF samples contain NaN"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut out: Vec<CdfPoint> = Vec::new();
    for (i, &x) in sorted.iter().enumerate() {
        let p = (i + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.x == x => last.p = p,
            _ => out.push(CdfPoint { x, p }),
        }
    }
    Ok(out)
}

/// CDF value at `x`.
pub fn cdf_at(cdf: &[CdfPoint], x: f64) -> f64 {
    match cdf.partition_point(|pt| pt.x <= x) {
        0 => 0.0,
        i => cdf[i - 1].p,
    }
}

/// Smallest `x` with `P(X <= x) >= p`.
pub fn quantile(cdf: &[CdfPoint], p: f64) -> f64 {
    let i = cdf.partition_point(|pt| pt.p < p - 1e-12).min(cdf.len() - 1);
    cdf[i].x
}

/// Probability levels used to compare two distributions.
pub const DOMINANCE_LEVELS: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

/// Majority direction of the quantile gaps `a - b` at [`DOMINANCE_LEVELS`]:
/// `Greater` when `a` tends to lie to the right (stochastically larger).
pub fn dominance_order(a: &[CdfPoint], b: &[CdfPoint]) -> Ordering {
    let mut score = 0i32;
    for &p in &DOMINANCE_LEVELS {
        match quantile(a, p).partial_cmp(&quantile(b, p)) {
            Some(Ordering::Greater) => score += 1,
            Some(Ordering::Less) => score -= 1,
            _ => {}
        }
    }
    score.cmp(&0)
}
