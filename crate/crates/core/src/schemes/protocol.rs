use super::codebook::{
    build_codebooks, check_sequence, decision_deviation, encode_hop, Codebook, DecisionRule, HopMessage,
};
use super::network::HopNetworkSpec;
use crate::error::SchemeError;
use crate::probcore::{default_slack, ConditionalPmf};

/// Outcome of one run of a K-hop code on a tuple `(y_0^n, ..., y_K^n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    /// `messages[l-1] = M_l`, sent by node `l-1`.
    pub messages: Vec<HopMessage>,
    /// `guesses[k-1]` is the decision of center `k`.
    pub guesses: Vec<u8>,
}

/// Any K-hop code given by its encoders `phi` and deciders `g`.
pub trait HopCode: Sync {
    fn hops(&self) -> usize;

    fn blocklength(&self) -> usize;

    fn alphabet_size(&self, node: usize) -> usize;

    /// Budget `ceil(n R_l)` of the message on hop `l`.
    fn message_bits(&self, hop: usize) -> u32;

    /// `M_{node+1}` from node `node` given its observation and, except at
    /// the source (`node = 0`), its incoming message.
    fn encode(&self, node: usize, incoming: Option<&HopMessage>, y: &[usize]) -> Result<HopMessage, SchemeError>;

    /// Guess of center `k` in `1..=K`.
    fn decide(&self, k: usize, incoming: &HopMessage, y: &[usize]) -> Result<u8, SchemeError>;

    fn run(&self, ys: &[&[usize]]) -> Result<Trace, SchemeError> {
        let k = self.hops();
        if ys.len() != k + 1 {
            return Err(SchemeError::FieldLength { field: "sequences", expected: k + 1, got: ys.len() });
        }
        let mut messages = Vec::with_capacity(k);
        let mut guesses = Vec::with_capacity(k);
        messages.push(self.encode(0, None, ys[0])?);
        for c in 1..=k {
            guesses.push(self.decide(c, &messages[c - 1], ys[c])?);
            if c < k {
                let next = self.encode(c, Some(&messages[c - 1]), ys[c])?;
                messages.push(next);
            }
        }
        Ok(Trace { messages, guesses })
    }
}

/// Quantize-and-forward with explicit codebooks. A relay forwards REJECT
/// when its incoming message is REJECT or its own guess is 1.
#[derive(Debug, Clone)]
pub struct Protocol {
    spec: HopNetworkSpec,
    codebooks: Vec<Codebook>,
    rules: Vec<DecisionRule>,
    encode_mu: f64,
    n: usize,
}

/// Per-center decision deviations of a run in which relays forward
/// regardless of their own guess. Center `k` guesses 1 at slack `c * mu`
/// iff `cumulative[k-1] > c * mu`, which at `c = 1` reproduces the
/// protocol exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct OpenTrace {
    pub deviations: Vec<f64>,
    pub cumulative: Vec<f64>,
}

impl OpenTrace {
    pub(crate) fn from_deviations(deviations: Vec<f64>) -> Self {
        let mut acc = 0.0_f64;
        let cumulative = deviations
            .iter()
            .map(|&d| {
                acc = acc.max(d);
                acc
            })
            .collect();
        Self { deviations, cumulative }
    }

    pub fn guesses(&self, threshold: f64) -> Vec<u8> {
        self.cumulative.iter().map(|&d| u8::from(d > threshold)).collect()
    }
}

impl Protocol {
    /// Explicit protocol; `mu` defaults to `n^{-1/3}` for both encoding and
    /// deciding.
    pub fn new(
        spec: &HopNetworkSpec,
        channels: &[ConditionalPmf],
        n: usize,
        seed: u64,
        mu: Option<f64>,
    ) -> Result<Self, SchemeError> {
        let mu = mu.unwrap_or_else(|| default_slack(n));
        if !(mu > 0.0) {
            return Err(SchemeError::NonPositiveSlack { mu });
        }
        let codebooks = build_codebooks(spec, channels, n, seed)?
            .into_iter()
            .map(Codebook::materialize)
            .collect::<Result<Vec<_>, _>>()?;
        let rules = codebooks.iter().map(|c| DecisionRule::new(c, mu)).collect::<Result<Vec<_>, _>>()?;
        Ok(Self { spec: spec.clone(), codebooks, rules, encode_mu: mu, n })
    }

    pub fn spec(&self) -> &HopNetworkSpec {
        &self.spec
    }

    pub fn codebooks(&self) -> &[Codebook] {
        &self.codebooks
    }

    pub fn rules(&self) -> &[DecisionRule] {
        &self.rules
    }

    pub fn mu(&self) -> f64 {
        self.encode_mu
    }

    pub fn open_trace(&self, ys: &[&[usize]]) -> Result<OpenTrace, SchemeError> {
        let k = self.spec.hops();
        if ys.len() != k + 1 {
            return Err(SchemeError::FieldLength { field: "sequences", expected: k + 1, got: ys.len() });
        }
        let mut devs = Vec::with_capacity(k);
        let mut msg = encode_hop(ys[0], None, &self.codebooks[0], self.encode_mu)?;
        for c in 1..=k {
            devs.push(decision_deviation(ys[c], &msg, &self.codebooks[c - 1], &self.rules[c - 1])?);
            if c < k {
                msg = encode_hop(ys[c], Some(&msg), &self.codebooks[c], self.encode_mu)?;
            }
        }
        Ok(OpenTrace::from_deviations(devs))
    }
}

impl HopCode for Protocol {
    fn hops(&self) -> usize {
        self.spec.hops()
    }

    fn blocklength(&self) -> usize {
        self.n
    }

    fn alphabet_size(&self, node: usize) -> usize {
        self.spec.alphabet_size(node)
    }

    fn message_bits(&self, hop: usize) -> u32 {
        self.codebooks[hop - 1].bits()
    }

    fn encode(&self, node: usize, incoming: Option<&HopMessage>, y: &[usize]) -> Result<HopMessage, SchemeError> {
        let cb = &self.codebooks[node];
        if node > 0 {
            let m = incoming.ok_or(SchemeError::FieldLength { field: "incoming", expected: 1, got: 0 })?;
            if m.is_reject() || self.decide(node, m, y)? == 1 {
                return Ok(HopMessage::reject(cb.bits()));
            }
        }
        encode_hop(y, incoming, cb, self.encode_mu)
    }

    fn decide(&self, k: usize, incoming: &HopMessage, y: &[usize]) -> Result<u8, SchemeError> {
        let cb = &self.codebooks[k - 1];
        let rule = &self.rules[k - 1];
        Ok(u8::from(decision_deviation(y, incoming, cb, rule)? > rule.mu))
    }
}

/// Code whose every center always guesses `guess` and whose messages are
/// constant; the degenerate deciders `g = 0` and `g = 1`.
#[derive(Debug, Clone)]
pub struct ConstantCode {
    pub sizes: Vec<usize>,
    pub n: usize,
    pub guess: u8,
}

impl HopCode for ConstantCode {
    fn hops(&self) -> usize {
        self.sizes.len() - 1
    }

    fn blocklength(&self) -> usize {
        self.n
    }

    fn alphabet_size(&self, node: usize) -> usize {
        self.sizes[node]
    }

    fn message_bits(&self, _hop: usize) -> u32 {
        1
    }

    fn encode(&self, node: usize, _incoming: Option<&HopMessage>, y: &[usize]) -> Result<HopMessage, SchemeError> {
        check_sequence(node + 1, y, self.n, self.sizes[node])?;
        Ok(HopMessage::codeword(0, 1))
    }

    fn decide(&self, k: usize, _incoming: &HopMessage, y: &[usize]) -> Result<u8, SchemeError> {
        check_sequence(k, y, self.n, self.sizes[k])?;
        Ok(self.guess)
    }
}

/// Every node forwards its full observation (as a base-|Y| integer) and
/// every center accepts: the rate-saturated code.
#[derive(Debug, Clone)]
pub struct IdentityCode {
    pub sizes: Vec<usize>,
    pub n: usize,
}

impl HopCode for IdentityCode {
    fn hops(&self) -> usize {
        self.sizes.len() - 1
    }

    fn blocklength(&self) -> usize {
        self.n
    }

    fn alphabet_size(&self, node: usize) -> usize {
        self.sizes[node]
    }

    fn message_bits(&self, hop: usize) -> u32 {
        // one spare value beyond |Y|^n keeps REJECT representable
        ((self.sizes[hop - 1] as f64).powi(self.n as i32) + 1.0).log2().ceil() as u32
    }

    fn encode(&self, node: usize, _incoming: Option<&HopMessage>, y: &[usize]) -> Result<HopMessage, SchemeError> {
        let size = self.sizes[node];
        check_sequence(node + 1, y, self.n, size)?;
        let v = y.iter().fold(0u128, |acc, &s| acc * size as u128 + s as u128);
        Ok(HopMessage::codeword(v, self.message_bits(node + 1)))
    }

    fn decide(&self, k: usize, _incoming: &HopMessage, y: &[usize]) -> Result<u8, SchemeError> {
        check_sequence(k, y, self.n, self.sizes[k])?;
        Ok(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> (HopNetworkSpec, Vec<ConditionalPmf>) {
        let spec = HopNetworkSpec::dsbs_chain(&[0.1, 0.1], vec![0.5, 0.5], vec![0.1, 0.1]).unwrap();
        let ch = vec![ConditionalPmf::bsc(0.2, "Y0", "U1"), ConditionalPmf::bsc(0.2, "Y1", "U2")];
        (spec, ch)
    }

    #[test]
    fn open_trace_matches_protocol_at_unit_slack() {
        let (spec, ch) = chain();
        let p = Protocol::new(&spec, &ch, 8, 11, None).unwrap();
        let mut agree = 0;
        for t in 0u32..512 {
            let y0: Vec<usize> = (0..8).map(|i| ((t >> i) & 1) as usize).collect();
            let y1: Vec<usize> = (0..8).map(|i| ((t.wrapping_mul(2654435761) >> i) & 1) as usize).collect();
            let y2: Vec<usize> = (0..8).map(|i| ((t.wrapping_mul(40503) >> (i + 3)) & 1) as usize).collect();
            let ys = [&y0[..], &y1[..], &y2[..]];
            let run = p.run(&ys).unwrap();
            let open = p.open_trace(&ys).unwrap();
            assert_eq!(run.guesses, open.guesses(p.mu()));
            for (m, k) in run.messages.iter().zip(1..) {
                assert!(m.bits() <= p.message_bits(k));
            }
            if run.guesses[0] == 1 {
                assert_eq!(run.guesses[1], 1);
            }
            agree += usize::from(run.guesses[1] == 0);
        }
        assert!(agree > 0);
    }

    #[test]
    fn degenerate_codes() {
        let g0 = ConstantCode { sizes: vec![2, 2, 2], n: 3, guess: 0 };
        let y = [0usize, 1, 0];
        let t = g0.run(&[&y, &y, &y]).unwrap();
        assert_eq!(t.guesses, vec![0, 0]);
        let id = IdentityCode { sizes: vec![2, 2, 2], n: 3 };
        let t = id.run(&[&y, &y, &y]).unwrap();
        assert_eq!(t.messages[0].index(), Some(2));
        assert_eq!(id.message_bits(1), 4);
    }
}
