use serde::{Deserialize, Serialize};

use super::enumerate::enumerate_region;
use super::measure::{delta_k, restricted_measure, DeltaReport, RestrictedMeasure};
use super::single::{chain_gap, lemma1_certificate, markov_gap, single_letterize, Lemma1Report, SingleLetterization};
use crate::error::{DiagnosticsError, Error};
use crate::exponents::eta;
use crate::probcore::{entropy, ConditionalPmf, JointPmf};
use crate::schemes::{HopCode, HopNetworkSpec};

/// Binary chain used by the regression fixtures: crossovers 0.1 on both
/// hops, rates 1/2, and per hop the `eta`-achieving channel at rate
/// `0.48` so that every codebook keeps a rate margin.
pub fn standard_chain() -> Result<(HopNetworkSpec, Vec<ConditionalPmf>), Error> {
    let spec = HopNetworkSpec::dsbs_chain(&[0.1, 0.1], vec![0.5, 0.5], vec![0.1, 0.1])?;
    let mut channels = Vec::new();
    for l in 1..=2 {
        channels.push(eta(&spec.hop_pair(l)?, 0.48, 3)?.channel);
    }
    Ok((spec, channels))
}

/// Everything the diagnostics compute for center `k` of one code.
#[derive(Debug, Clone)]
pub struct InstanceReport {
    pub k: usize,
    pub n: usize,
    pub mu: f64,
    pub region_cardinality: usize,
    pub delta: DeltaReport,
    pub measure: RestrictedMeasure,
    pub singles: Vec<SingleLetterization>,
    pub lemma: Lemma1Report,
    /// `(I(Y~_0..Y~_{k-2}; Y~_k | Y~_{k-1}), D(P~_{Y_T} || P))` when `k >= 2`.
    pub chain: Option<(f64, f64)>,
}

impl InstanceReport {
    /// `(1/n) H(P~) - H(P)`
    pub fn entropy_gap(&self) -> f64 {
        self.measure.entropy / self.n as f64 - entropy(&self.measure.base)
    }
}

/// Run the full exact pipeline on center `k` of `code`, with `p_joint` the
/// law of all `K+1` sources under H=0.
pub fn diagnose_code(
    code: &dyn HopCode,
    p_joint: &JointPmf,
    k: usize,
    mu: f64,
    rates: &[f64],
    cap: u64,
) -> Result<InstanceReport, DiagnosticsError> {
    let region = enumerate_region(code, k, cap)?;
    let axes: Vec<usize> = (0..=k).collect();
    let p = p_joint.marginalize(&axes)?;
    let delta = delta_k(&region, &p, mu)?;
    let measure = restricted_measure(&p, &delta, &region.space)?;
    let singles = (1..=k).map(|l| single_letterize(&measure, &region, l)).collect::<Result<Vec<_>, _>>()?;
    let lemma = lemma1_certificate(&singles, &delta, rates)?;
    let chain = if k >= 2 { Some(chain_gap(&measure, k)?) } else { None };
    Ok(InstanceReport {
        k,
        n: code.blocklength(),
        mu,
        region_cardinality: region.cardinality(),
        delta,
        measure,
        singles,
        lemma,
        chain,
    })
}

/// Regression record of one diagnosed instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticFixture {
    pub spec_hash: String,
    pub seed: u64,
    pub n: usize,
    pub k: usize,
    pub mu: f64,
    pub region_cardinality: usize,
    pub delta: f64,
    pub alpha: f64,
    pub beta: f64,
    pub kl: f64,
    pub entropy_gap: f64,
    pub markov_gaps: Vec<f64>,
    pub slack_i: Vec<f64>,
    pub slack_ii: Vec<f64>,
    pub slack_iii: f64,
    pub chain_cmi: Option<f64>,
    pub chain_kl: Option<f64>,
}

impl DiagnosticFixture {
    pub fn from_report(report: &InstanceReport, spec_hash: &str, seed: u64) -> Self {
        Self {
            spec_hash: spec_hash.to_string(),
            seed,
            n: report.n,
            k: report.k,
            mu: report.mu,
            region_cardinality: report.region_cardinality,
            delta: report.delta.delta,
            alpha: report.delta.alpha,
            beta: report.delta.beta,
            kl: report.measure.kl,
            entropy_gap: report.entropy_gap(),
            markov_gaps: report.singles.iter().map(markov_gap).collect(),
            slack_i: report.lemma.hops.iter().map(|h| h.slack_i).collect(),
            slack_ii: report.lemma.hops.iter().map(|h| h.slack_ii).collect(),
            slack_iii: report.lemma.slack_iii,
            chain_cmi: report.chain.map(|c| c.0),
            chain_kl: report.chain.map(|c| c.1),
        }
    }

    /// Same instance and every real field within `tol`.
    pub fn agrees_with(&self, other: &Self, tol: f64) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= tol;
        let close_all = |a: &[f64], b: &[f64]| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| close(*x, *y));
        let close_opt = |a: Option<f64>, b: Option<f64>| match (a, b) {
            (Some(x), Some(y)) => close(x, y),
            (None, None) => true,
            _ => false,
        };
        self.spec_hash == other.spec_hash
            && self.seed == other.seed
            && self.n == other.n
            && self.k == other.k
            && self.region_cardinality == other.region_cardinality
            && close(self.mu, other.mu)
            && close(self.delta, other.delta)
            && close(self.alpha, other.alpha)
            && close(self.beta, other.beta)
            && close(self.kl, other.kl)
            && close(self.entropy_gap, other.entropy_gap)
            && close_all(&self.markov_gaps, &other.markov_gaps)
            && close_all(&self.slack_i, &other.slack_i)
            && close_all(&self.slack_ii, &other.slack_ii)
            && close(self.slack_iii, other.slack_iii)
            && close_opt(self.chain_cmi, other.chain_cmi)
            && close_opt(self.chain_kl, other.chain_kl)
    }
}
