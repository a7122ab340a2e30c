use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

use crate::error::{SchemeError, SimulationError};
use crate::probcore::{default_slack, ConditionalPmf, JointPmf};
use crate::schemes::{entry_count, message_bits, EnsembleCode, HopNetworkSpec, OpenTrace, Protocol, EXPLICIT_ENTRY_LIMIT};
use crate::seeding::derive_seed;

use super::fit::FitOptions;

const TAG_TRIAL: u64 = 0x7472_6961_6c;
const TAG_CODEBOOK: u64 = 0x636f_6465;
const TAG_TIE: u64 = 0x7469_65;

/// Width of the per-trial jitter used by randomized thresholds; far below
/// the 1/n spacing of type deviations.
pub const TIE_JITTER: f64 = 1e-7;

/// Which realization of the quantize-and-forward code the trials run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CodeMode {
    /// Explicit when every codebook has at most 2^16 entries.
    #[default]
    Auto,
    /// One seeded codebook per blocklength, searched exhaustively.
    Explicit,
    /// A fresh codebook per trial, sampled implicitly.
    Ensemble,
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub network: HopNetworkSpec,
    pub channels: Vec<ConditionalPmf>,
    pub blocklengths: Vec<usize>,
    /// Trials per hypothesis and blocklength.
    pub trials: usize,
    pub seed: u64,
    pub epsilon_sweep: Vec<f64>,
    /// Typicality slack; `None` means `n^{-1/3}` at each `n`.
    pub mu: Option<f64>,
    pub mode: CodeMode,
    pub fit: FitOptions,
}

impl ExperimentSpec {
    pub fn new(network: HopNetworkSpec, channels: Vec<ConditionalPmf>, blocklengths: Vec<usize>, trials: usize, seed: u64) -> Self {
        Self {
            network,
            channels,
            blocklengths,
            trials,
            seed,
            epsilon_sweep: Vec::new(),
            mu: None,
            mode: CodeMode::Auto,
            fit: FitOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<(), SimulationError> {
        if self.trials == 0 {
            return Err(SimulationError::NoTrials);
        }
        if self.blocklengths.is_empty() || self.blocklengths[0] == 0 || self.blocklengths.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SimulationError::BadBlocklengths);
        }
        if self.channels.len() != self.network.hops() {
            return Err(SchemeError::FieldLength {
                field: "channels",
                expected: self.network.hops(),
                got: self.channels.len(),
            }
            .into());
        }
        Ok(())
    }

    pub fn mu_at(&self, n: usize) -> f64 {
        self.mu.unwrap_or_else(|| default_slack(n))
    }

    /// Mode actually used at blocklength `n`.
    pub fn resolved_mode(&self, n: usize) -> CodeMode {
        match self.mode {
            CodeMode::Auto => {
                let small = self
                    .network
                    .rates()
                    .iter()
                    .all(|&r| entry_count(message_bits(n, r)).is_some_and(|e| e <= EXPLICIT_ENTRY_LIMIT));
                if small {
                    CodeMode::Explicit
                } else {
                    CodeMode::Ensemble
                }
            }
            m => m,
        }
    }

    /// Seed of the explicit codebooks at blocklength `n`.
    pub fn codebook_seed(&self, n: usize) -> u64 {
        derive_seed(&[self.seed, TAG_CODEBOOK, n as u64])
    }
}

/// Open traces of every trial at one `(n, hypothesis)`, trial-ordered.
#[derive(Debug, Clone)]
pub struct TraceSet {
    pub n: usize,
    pub hypothesis: u8,
    pub mu: f64,
    pub hops: usize,
    /// Decision deviations, trial-major: `deviations[t * K + k - 1]`.
    pub deviations: Vec<f64>,
    /// Per-trial uniforms in `[0, 1)` for randomized thresholds.
    pub ties: Vec<f64>,
}

impl TraceSet {
    pub fn trials(&self) -> usize {
        self.deviations.len() / self.hops
    }

    /// Number of trials in which center `k` guesses 1 when center `j <= k`
    /// uses threshold `thresholds[j - 1]`.
    pub fn rejections(&self, k: usize, thresholds: &[f64]) -> usize {
        self.deviations
            .chunks(self.hops)
            .filter(|d| d[..k].iter().zip(thresholds).any(|(&x, &t)| x > t))
            .count()
    }

    /// As [`TraceSet::rejections`], with each trial's deviations shifted by
    /// its own jitter in `[-TIE_JITTER/2, TIE_JITTER/2)`: a randomized test
    /// that splits trials tied at a threshold.
    pub fn randomized_rejections(&self, k: usize, thresholds: &[f64]) -> usize {
        self.deviations
            .chunks(self.hops)
            .zip(&self.ties)
            .filter(|(d, &v)| {
                let shift = TIE_JITTER * (v - 0.5);
                d[..k].iter().zip(thresholds).any(|(&x, &t)| x + shift > t)
            })
            .count()
    }

    /// Guess counts of the protocol itself (threshold `mu` everywhere).
    pub fn protocol_rejections(&self, k: usize) -> usize {
        self.rejections(k, &vec![self.mu; k])
    }
}

fn sampler(p: &JointPmf) -> WeightedIndex<f64> {
    WeightedIndex::new(p.mass().iter().copied()).expect("a normalized pmf has positive total weight")
}

/// Draw `n` i.i.d. symbols of `p` and split them into per-axis sequences.
fn draw(p: &JointPmf, dist: &WeightedIndex<f64>, n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let shape = p.shape();
    let mut out = vec![Vec::with_capacity(n); shape.len()];
    for _ in 0..n {
        let mut j = dist.sample(rng);
        for axis in (0..shape.len()).rev() {
            out[axis].push(j % shape[axis]);
            j /= shape[axis];
        }
    }
    out
}

/// Run every trial at `(n, hypothesis)` and keep the open traces. Trial `t`
/// draws its sources (and, in ensemble mode, its codebook) from a stream
/// keyed by `(seed, n, hypothesis, t)`, so the result does not depend on
/// scheduling.
pub fn collect_traces(spec: &ExperimentSpec, n: usize, hypothesis: u8) -> Result<TraceSet, SimulationError> {
    spec.validate()?;
    let mu = spec.mu_at(n);
    let law = if hypothesis == 0 { spec.network.p_joint().clone() } else { spec.network.independent() };
    let dist = sampler(&law);
    let k = spec.network.hops();
    let stream = |t: usize| ChaCha8Rng::seed_from_u64(derive_seed(&[spec.seed, TAG_TRIAL, n as u64, hypothesis as u64, t as u64]));

    let traces: Vec<OpenTrace> = match spec.resolved_mode(n) {
        CodeMode::Ensemble => {
            let code = EnsembleCode::new(&spec.network, &spec.channels, n, Some(mu))?;
            (0..spec.trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = stream(t);
                    let ys = draw(&law, &dist, n, &mut rng);
                    let refs: Vec<&[usize]> = ys.iter().map(Vec::as_slice).collect();
                    code.open_trace(&refs, &mut rng)
                })
                .collect::<Result<_, _>>()?
        }
        _ => {
            let code = Protocol::new(&spec.network, &spec.channels, n, spec.codebook_seed(n), Some(mu))?;
            (0..spec.trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = stream(t);
                    let ys = draw(&law, &dist, n, &mut rng);
                    let refs: Vec<&[usize]> = ys.iter().map(Vec::as_slice).collect();
                    code.open_trace(&refs)
                })
                .collect::<Result<_, _>>()?
        }
    };
    let mut deviations = Vec::with_capacity(spec.trials * k);
    for tr in traces {
        deviations.extend(tr.deviations);
    }
    let ties = (0..spec.trials)
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[spec.seed, TAG_TIE, n as u64, hypothesis as u64, t as u64]));
            rng.random::<f64>()
        })
        .collect();
    Ok(TraceSet { n, hypothesis, mu, hops: k, deviations, ties })
}

/// Exact (Clopper-Pearson) two-sided interval for a binomial proportion.
pub fn clopper_pearson(errors: usize, trials: usize, level: f64) -> (f64, f64) {
    assert!(trials > 0 && errors <= trials);
    let a = (1.0 - level) / 2.0;
    let (x, m) = (errors as f64, trials as f64);
    let lo = if errors == 0 { 0.0 } else { Beta::new(x, m - x + 1.0).expect("positive shapes").inverse_cdf(a) };
    let hi = if errors == trials { 1.0 } else { Beta::new(x + 1.0, m - x).expect("positive shapes").inverse_cdf(1.0 - a) };
    (lo, hi)
}

/// Empirical error frequency of center `k` at blocklength `n` under one
/// hypothesis: type-I (`alpha`) for H=0, type-II (`beta`) for H=1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorEstimate {
    pub k: usize,
    pub n: usize,
    pub hypothesis: u8,
    /// Zero marks an exact value with no sampling error.
    pub trials: usize,
    pub errors: usize,
    pub estimate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub mu: f64,
}

impl ErrorEstimate {
    pub fn from_counts(k: usize, n: usize, hypothesis: u8, errors: usize, trials: usize, mu: f64) -> Self {
        let (ci_lo, ci_hi) = clopper_pearson(errors, trials, 0.95);
        Self { k, n, hypothesis, trials, errors, estimate: errors as f64 / trials as f64, ci_lo, ci_hi, mu }
    }

    pub fn alpha_hat(&self) -> Option<f64> {
        (self.hypothesis == 0).then_some(self.estimate)
    }

    pub fn beta_hat(&self) -> Option<f64> {
        (self.hypothesis == 1).then_some(self.estimate)
    }
}

/// Estimates from a trace set at unit slack: the protocol's own errors.
pub fn estimates_from(traces: &TraceSet) -> Vec<ErrorEstimate> {
    let trials = traces.trials();
    (1..=traces.hops)
        .map(|k| {
            let rejected = traces.protocol_rejections(k);
            let errors = if traces.hypothesis == 0 { rejected } else { trials - rejected };
            ErrorEstimate::from_counts(k, traces.n, traces.hypothesis, errors, trials, traces.mu)
        })
        .collect()
}

/// Monte Carlo error frequencies for every center and blocklength.
pub fn run_trials(spec: &ExperimentSpec, hypothesis: u8) -> Result<Vec<ErrorEstimate>, SimulationError> {
    spec.validate()?;
    let mut out = Vec::new();
    for &n in &spec.blocklengths {
        out.extend(estimates_from(&collect_traces(spec, n, hypothesis)?));
    }
    Ok(out)
}
