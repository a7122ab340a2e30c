use serde::Serialize;

use super::experiment::{collect_traces, ErrorEstimate, ExperimentSpec, TraceSet};
use super::fit::{fit_exponent, ExponentFit};
use crate::error::SimulationError;

/// Bisection steps allowed per calibration.
pub const MAX_TUNING_STEPS: usize = 40;
/// Accepted distance between a calibrated type-I frequency and its target.
pub const TUNING_TOLERANCE: f64 = 0.02;

/// Calibrated slack factor of center `k` at one `(epsilon, n)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Calibration {
    pub k: usize,
    pub epsilon: f64,
    pub n: usize,
    /// Center `k` decides with slack `factor * mu`.
    pub factor: f64,
    pub alpha: ErrorEstimate,
    pub beta: ErrorEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub k: usize,
    pub epsilon: f64,
    /// `None` with a reason when the beta estimates cannot be fitted.
    pub fit: Option<ExponentFit>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    /// Sorted by `epsilon`, then `k`.
    pub rows: Vec<SweepRow>,
    pub calibrations: Vec<Calibration>,
}

impl SweepTable {
    pub fn row(&self, k: usize, epsilon: f64) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.k == k && r.epsilon == epsilon)
    }
}

/// Thresholds seen by center `k`: relays `1..k` forward at the protocol
/// slack `mu`, center `k` decides at `factor * mu`.
fn thresholds(mu: f64, k: usize, factor: f64) -> Vec<f64> {
    let mut th = vec![mu; k];
    th[k - 1] = factor * mu;
    th
}

/// Factor `c` whose type-I frequency at center `k` is within the tolerance
/// of `epsilon`, by bisection on `ln c`.
fn tune(h0: &TraceSet, k: usize, epsilon: f64) -> Result<f64, SimulationError> {
    let trials = h0.trials() as f64;
    let alpha = |c: f64| h0.randomized_rejections(k, &thresholds(h0.mu, k, c)) as f64 / trials;
    // at c = 2 / mu every finite deviation passes
    let (mut lo, mut hi) = ((1e-4f64).ln(), (2.0 / h0.mu).ln());
    let mut best = (f64::INFINITY, 1.0, f64::NAN);
    for _ in 0..MAX_TUNING_STEPS {
        let mid = 0.5 * (lo + hi);
        let a = alpha(mid.exp());
        if (a - epsilon).abs() < best.0 {
            best = ((a - epsilon).abs(), mid.exp(), a);
        }
        if best.0 <= TUNING_TOLERANCE {
            break;
        }
        if a > epsilon {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if best.0 > TUNING_TOLERANCE {
        return Err(SimulationError::UnattainableEpsilon { k, n: h0.n, epsilon, closest: best.2 });
    }
    Ok(best.1)
}

/// Type-II exponents with each center's decision slack tuned so that its
/// type-I frequency matches every target in `spec.epsilon_sweep`; relays
/// keep forwarding at the configured slack. Target 0 is the protocol
/// itself; other targets use randomized thresholds
/// ([`TraceSet::randomized_rejections`]). All targets reuse the same trials.
pub fn strong_converse_sweep(spec: &ExperimentSpec) -> Result<SweepTable, SimulationError> {
    spec.validate()?;
    if spec.epsilon_sweep.is_empty() {
        return Err(SimulationError::EmptySweep);
    }
    let mut targets = spec.epsilon_sweep.clone();
    targets.sort_by(f64::total_cmp);
    targets.dedup();
    let hops = spec.network.hops();
    let mut calibrations = Vec::new();
    for &n in &spec.blocklengths {
        let h0 = collect_traces(spec, n, 0)?;
        let h1 = collect_traces(spec, n, 1)?;
        for &eps in &targets {
            for k in 1..=hops {
                let c = if eps == 0.0 { 1.0 } else { tune(&h0, k, eps)? };
                let th = thresholds(h0.mu, k, c);
                let (a, b) = if eps == 0.0 {
                    (h0.rejections(k, &th), h1.trials() - h1.rejections(k, &th))
                } else {
                    (h0.randomized_rejections(k, &th), h1.trials() - h1.randomized_rejections(k, &th))
                };
                calibrations.push(Calibration {
                    k,
                    epsilon: eps,
                    n,
                    factor: c,
                    alpha: ErrorEstimate::from_counts(k, n, 0, a, h0.trials(), h0.mu),
                    beta: ErrorEstimate::from_counts(k, n, 1, b, h1.trials(), h1.mu),
                });
            }
        }
    }
    let mut rows = Vec::new();
    for &eps in &targets {
        for k in 1..=hops {
            let betas: Vec<ErrorEstimate> =
                calibrations.iter().filter(|c| c.k == k && c.epsilon == eps).map(|c| c.beta.clone()).collect();
            let (fit, note) = match fit_exponent(&betas, k, &spec.fit) {
                Ok(f) => (Some(f), String::new()),
                Err(e) => (None, e.to_string()),
            };
            rows.push(SweepRow { k, epsilon: eps, fit, note });
        }
    }
    Ok(SweepTable { rows, calibrations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probcore::ConditionalPmf;
    use crate::schemes::HopNetworkSpec;
    use crate::simulator::run_trials;

    fn spec() -> ExperimentSpec {
        let net = HopNetworkSpec::dsbs_chain(&[0.1, 0.1], vec![0.5, 0.5], vec![0.1, 0.1]).unwrap();
        let ch = vec![ConditionalPmf::bsc(0.2, "Y0", "U1"), ConditionalPmf::bsc(0.2, "Y1", "U2")];
        let mut s = ExperimentSpec::new(net, ch, vec![8, 12, 16, 20], 2000, 9);
        s.epsilon_sweep = vec![0.4, 0.0, 0.2];
        s.fit.ci_width_cap = 10.0;
        s
    }

    #[test]
    fn calibrations_hit_their_targets() {
        let s = spec();
        let t = strong_converse_sweep(&s).unwrap();
        let eps: Vec<f64> = t.rows.iter().map(|r| r.epsilon).collect();
        assert!(eps.windows(2).all(|w| w[0] <= w[1]));
        for c in t.calibrations.iter().filter(|c| c.epsilon > 0.0) {
            assert!((c.alpha.estimate - c.epsilon).abs() <= TUNING_TOLERANCE, "{c:?}");
        }
        // the zero target is the protocol itself
        let base = run_trials(&s, 1).unwrap();
        for c in t.calibrations.iter().filter(|c| c.epsilon == 0.0) {
            let b = base.iter().find(|e| e.k == c.k && e.n == c.n).unwrap();
            assert_eq!(b.errors, c.beta.errors);
        }
    }

    #[test]
    fn empty_sweep_rejected() {
        let mut s = spec();
        s.epsilon_sweep.clear();
        assert_eq!(strong_converse_sweep(&s), Err(SimulationError::EmptySweep));
    }
}
