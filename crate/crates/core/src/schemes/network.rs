use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::SchemeError;
use crate::probcore::{Alphabet, ConditionalPmf, JointPmf};

/// K-hop network: source pmf of `(Y_0, ..., Y_K)` under H=0, per-hop rates
/// and type-I targets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HopNetworkSpec {
    k: usize,
    p_joint: JointPmf,
    rates: Vec<f64>,
    epsilons: Vec<f64>,
}

impl HopNetworkSpec {
    pub fn new(p_joint: JointPmf, rates: Vec<f64>, epsilons: Vec<f64>) -> Result<Self, SchemeError> {
        let rank = p_joint.rank();
        if rank < 2 {
            return Err(SchemeError::NoHops);
        }
        let k = rank - 1;
        if rates.len() != k {
            return Err(SchemeError::FieldLength { field: "rates", expected: k, got: rates.len() });
        }
        if epsilons.len() != k {
            return Err(SchemeError::FieldLength { field: "epsilons", expected: k, got: epsilons.len() });
        }
        for (i, &rate) in rates.iter().enumerate() {
            if !(rate >= 0.0) || !rate.is_finite() {
                return Err(SchemeError::InvalidRate { hop: i + 1, rate });
            }
        }
        for (i, &epsilon) in epsilons.iter().enumerate() {
            if !(0.0..1.0).contains(&epsilon) {
                return Err(SchemeError::InvalidEpsilon { hop: i + 1, epsilon });
            }
        }
        Ok(Self { k, p_joint, rates, epsilons })
    }

    /// Markov chain `Y_0 - Y_1 - ... - Y_K` of binary symmetric steps with
    /// uniform `Y_0`.
    pub fn dsbs_chain(crossovers: &[f64], rates: Vec<f64>, epsilons: Vec<f64>) -> Result<Self, SchemeError> {
        if crossovers.is_empty() {
            return Err(SchemeError::NoHops);
        }
        let mut joint = JointPmf::new(vec![Alphabet::binary("Y0")], vec![0.5, 0.5])?;
        for (l, &p) in crossovers.iter().enumerate() {
            let step = ConditionalPmf::bsc(p, &format!("Y{l}"), &format!("Y{}", l + 1));
            joint = step.extend(&joint, &[l])?;
        }
        Self::new(joint, rates, epsilons)
    }

    pub fn hops(&self) -> usize {
        self.k
    }

    pub fn p_joint(&self) -> &JointPmf {
        &self.p_joint
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn epsilons(&self) -> &[f64] {
        &self.epsilons
    }

    pub fn alphabet(&self, node: usize) -> &Alphabet {
        &self.p_joint.axes()[node]
    }

    pub fn alphabet_size(&self, node: usize) -> usize {
        self.alphabet(node).size()
    }

    /// `P_{Y_{l-1} Y_l}` for hop `l` in `1..=K`.
    pub fn hop_pair(&self, hop: usize) -> Result<JointPmf, SchemeError> {
        Ok(self.p_joint.marginalize(&[hop - 1, hop])?)
    }

    /// Law of `(Y_0, ..., Y_K)` under H=1: product of the marginals.
    pub fn independent(&self) -> JointPmf {
        self.p_joint.independent_marginals()
    }

    pub fn with_rates(&self, rates: Vec<f64>) -> Result<Self, SchemeError> {
        Self::new(self.p_joint.clone(), rates, self.epsilons.clone())
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("spec serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}
