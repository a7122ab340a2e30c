use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

use super::experiment::ErrorEstimate;
use crate::error::SimulationError;

/// Which points enter an exponent fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitOptions {
    /// Largest allowed width, in bits, of a point's interval on `-log2 beta`.
    pub ci_width_cap: f64,
    /// Discard the smallest blocklength (burn-in of the O(1/n) terms).
    pub drop_smallest: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { ci_width_cap: 4.0, drop_smallest: true }
    }
}

/// Least-squares line through `(n, -log2 beta)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentFit {
    pub k: usize,
    /// `(n, -(1/n) log2 beta_hat)` for every usable point.
    pub points: Vec<(usize, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub slope_ci: (f64, f64),
}

impl ExponentFit {
    pub fn slope_ci_width(&self) -> f64 {
        self.slope_ci.1 - self.slope_ci.0
    }

    pub fn slope_half_width(&self) -> f64 {
        (self.slope_ci.1 - self.slope_ci.0) / 2.0
    }
}

/// Ordinary least squares of `y` on `x`, plus a 95% half-width for the
/// slope that adds the known per-point variances `var_y` to the residual
/// scatter.
pub fn fit_line(x: &[f64], y: &[f64], var_y: &[f64]) -> (f64, f64, f64) {
    let m = x.len() as f64;
    let xm = x.iter().sum::<f64>() / m;
    let ym = y.iter().sum::<f64>() / m;
    let sxx: f64 = x.iter().map(|a| (a - xm).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - xm) * (b - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let var_resid = if x.len() > 2 { rss / (m - 2.0) / sxx } else { 0.0 };
    let var_known: f64 = x.iter().zip(var_y).map(|(a, v)| (a - xm).powi(2) * v).sum::<f64>() / (sxx * sxx);
    (slope, intercept, 1.96 * (var_resid + var_known).sqrt())
}

/// Empirical type-II exponent of center `k`: slope of `-log2 beta_hat`
/// against `n`.
pub fn fit_exponent(estimates: &[ErrorEstimate], k: usize, opts: &FitOptions) -> Result<ExponentFit, SimulationError> {
    let mut rows: Vec<&ErrorEstimate> = estimates.iter().filter(|e| e.k == k && e.hypothesis == 1).collect();
    rows.sort_by_key(|e| e.n);
    if rows.iter().all(|e| e.estimate == 0.0) {
        return Err(SimulationError::Unresolvable { k });
    }
    if opts.drop_smallest && !rows.is_empty() {
        rows.remove(0);
    }
    let usable: Vec<&ErrorEstimate> = rows
        .into_iter()
        .filter(|e| e.estimate > 0.0 && (e.trials == 0 || (e.ci_lo > 0.0 && (e.ci_hi / e.ci_lo).log2() <= opts.ci_width_cap)))
        .collect();
    if usable.len() < 3 {
        return Err(SimulationError::TooFewPoints { k, usable: usable.len() });
    }
    let x: Vec<f64> = usable.iter().map(|e| e.n as f64).collect();
    let y: Vec<f64> = usable.iter().map(|e| -e.estimate.log2()).collect();
    // delta method: Var(-log2 b) ~ (1 - b) / (m b ln^2 2)
    let v: Vec<f64> = usable
        .iter()
        .map(|e| if e.trials == 0 { 0.0 } else { (1.0 - e.estimate) / (e.trials as f64 * e.estimate * LN_2 * LN_2) })
        .collect();
    let (slope, intercept, half) = fit_line(&x, &y, &v);
    Ok(ExponentFit {
        k,
        points: usable.iter().zip(&y).map(|(e, &v)| (e.n, v / e.n as f64)).collect(),
        slope,
        intercept,
        slope_ci: (slope - half, slope + half),
    })
}
