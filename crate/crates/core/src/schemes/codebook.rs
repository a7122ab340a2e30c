use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::network::HopNetworkSpec;
use crate::error::SchemeError;
use crate::probcore::{mutual_information, typicality_deviation, ConditionalPmf, JointPmf};
use crate::seeding::derive_seed;

/// Explicit codebooks are materialized only up to this many entries.
pub const EXPLICIT_ENTRY_LIMIT: u64 = 1 << 16;

/// Margin below which a warning is logged: encoding failures then decay
/// slowly or not at all.
pub const RECOMMENDED_RATE_MARGIN: f64 = 0.01;

/// `ceil(n R)`, the message budget of a hop in bits.
pub fn message_bits(n: usize, rate: f64) -> u32 {
    // absorb rounding in products like 20 * 0.55
    (n as f64 * rate - 1e-9).ceil().max(0.0) as u32
}

/// Codeword count `2^{bits-1}`: one index of the `2^bits` budget is
/// reserved for REJECT (and with zero bits only REJECT can be sent).
pub fn entry_count(bits: u32) -> Option<u64> {
    match bits {
        0 => Some(0),
        b if b <= 64 => Some(1u64 << (b - 1)),
        _ => None,
    }
}

/// A hop message: a codeword index or the reserved REJECT index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct HopMessage {
    index: Option<u128>,
    bits: u32,
}

impl HopMessage {
    pub fn reject(bits: u32) -> Self {
        Self { index: None, bits }
    }

    pub fn codeword(index: u128, bits: u32) -> Self {
        debug_assert!(bits >= 1 && (bits > 128 || index < 1u128 << (bits - 1)));
        Self { index: Some(index), bits }
    }

    pub fn is_reject(&self) -> bool {
        self.index.is_none()
    }

    pub fn index(&self) -> Option<u128> {
        self.index
    }

    /// Length on the wire, `ceil(n R)`.
    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Integer sent on the wire; REJECT is the value right after the last
    /// codeword. `None` when it does not fit in 128 bits.
    pub fn wire_value(&self) -> Option<u128> {
        match self.index {
            Some(i) => Some(i),
            None if self.bits == 0 => Some(0),
            None if self.bits <= 128 => Some(1u128 << (self.bits - 1)),
            None => None,
        }
    }

    /// Big-endian bit string of exactly `bits` characters.
    pub fn to_bit_string(&self) -> Option<String> {
        let v = self.wire_value()?;
        Some((0..self.bits).rev().map(|b| if b < 128 && (v >> b) & 1 == 1 { '1' } else { '0' }).collect())
    }
}

/// Reproducible handle for a codebook: spec hash plus seed, never entries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodebookDescriptor {
    pub spec_hash: String,
    pub seed: u64,
    pub hop: usize,
    pub n: usize,
    pub bits: u32,
}

/// Random quantization codebook of hop `l`: `2^{bits-1}` i.i.d. sequences
/// from `P_{U_l}`, generated entry by entry from the seed.
#[derive(Debug, Clone)]
pub struct Codebook {
    hop: usize,
    n: usize,
    bits: u32,
    seed: u64,
    channel: ConditionalPmf,
    marginal: Vec<f64>,
    cdf: Vec<f64>,
    /// `P_{U_l Y_{l-1}}`, U-major.
    enc_ref: Vec<f64>,
    /// `P_{U_l Y_l}`, U-major.
    dec_ref: Vec<f64>,
    ny_in: usize,
    ny_out: usize,
    descriptor: CodebookDescriptor,
    /// Materialized entries for explicit use, row per codeword.
    table: Option<Vec<u8>>,
}

/// Drop auxiliary symbols that carry no mass.
pub fn compact_channel(channel: &ConditionalPmf, input: &JointPmf) -> Result<ConditionalPmf, SchemeError> {
    let (rows, cols) = (channel.rows(), channel.cols());
    let px = input.mass();
    let mut pu = vec![0.0; cols];
    for x in 0..rows {
        for u in 0..cols {
            pu[u] += px[x] * channel.row(x)[u];
        }
    }
    let keep: Vec<usize> = (0..cols).filter(|&u| pu[u] > 1e-12).collect();
    let keep = if keep.is_empty() { vec![0] } else { keep };
    let mut kernel = Vec::with_capacity(rows * keep.len());
    for x in 0..rows {
        let row: Vec<f64> = keep.iter().map(|&u| channel.row(x)[u]).collect();
        let s: f64 = row.iter().sum();
        if s > 0.0 {
            kernel.extend(row.iter().map(|v| v / s));
        } else {
            kernel.extend((0..keep.len()).map(|u| if u == 0 { 1.0 } else { 0.0 }));
        }
    }
    let to = crate::probcore::Alphabet::indexed(channel.to_axes()[0].name(), keep.len())?;
    Ok(ConditionalPmf::new(channel.from_axes().to_vec(), vec![to], kernel)?)
}

impl Codebook {
    /// Codebook for `hop` (1-based) quantizing `Y_{hop-1}` through `channel`.
    pub fn new(spec: &HopNetworkSpec, hop: usize, channel: &ConditionalPmf, n: usize, seed: u64) -> Result<Self, SchemeError> {
        if n == 0 {
            return Err(SchemeError::ZeroBlocklength);
        }
        let k = spec.hops();
        if hop == 0 || hop > k {
            return Err(SchemeError::FieldLength { field: "channels", expected: k, got: hop });
        }
        let ny_in = spec.alphabet_size(hop - 1);
        if channel.rows() != ny_in || channel.from_axes().len() != 1 || channel.to_axes().len() != 1 {
            return Err(SchemeError::ChannelAlphabet { hop, prev: hop - 1, expected: ny_in, got: channel.rows() });
        }
        let pair = spec.hop_pair(hop)?;
        let py_in = pair.marginalize(&[0])?;
        let channel = compact_channel(channel, &py_in)?;
        let nu = channel.cols();
        let rate = spec.rates()[hop - 1];
        let bits = message_bits(n, rate);
        // joint (Y_{l-1}, Y_l, U) and the two references
        let joint = channel.extend(&pair, &[0])?;
        let info = mutual_information(&joint, &[2], &[0])?;
        if bits > 0 {
            let margin = rate - info;
            if margin <= 0.0 {
                return Err(SchemeError::NoRateMargin { hop, info, rate });
            }
            if margin < RECOMMENDED_RATE_MARGIN {
                log::warn!("hop {hop}: rate margin {margin:.4} bits is below {RECOMMENDED_RATE_MARGIN}");
            }
        }
        let enc_ref = joint.marginalize(&[0, 2])?.permute(&[1, 0])?.mass().to_vec();
        let dec_ref = joint.marginalize(&[1, 2])?.permute(&[1, 0])?.mass().to_vec();
        let marginal = joint.marginalize(&[2])?.mass().to_vec();
        let mut cdf = Vec::with_capacity(nu);
        let mut acc = 0.0;
        for &p in &marginal {
            acc += p;
            cdf.push(acc);
        }
        *cdf.last_mut().expect("nu >= 1") = 1.0;
        let descriptor = CodebookDescriptor { spec_hash: spec.hash(), seed, hop, n, bits };
        Ok(Self {
            hop,
            n,
            bits,
            seed,
            channel,
            marginal,
            cdf,
            enc_ref,
            dec_ref,
            ny_in,
            ny_out: spec.alphabet_size(hop),
            descriptor,
            table: None,
        })
    }

    /// Materialize every entry (explicit encoding).
    pub fn materialize(mut self) -> Result<Self, SchemeError> {
        let entries = entry_count(self.bits).filter(|&e| e <= EXPLICIT_ENTRY_LIMIT);
        let Some(entries) = entries else {
            return Err(SchemeError::CodebookTooLarge { hop: self.hop, bits: self.bits });
        };
        let mut table = Vec::with_capacity(entries as usize * self.n);
        for i in 0..entries {
            table.extend(self.generate(i).into_iter().map(|u| u as u8));
        }
        self.table = Some(table);
        Ok(self)
    }

    fn generate(&self, index: u64) -> Vec<usize> {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[self.seed, self.hop as u64, index]));
        (0..self.n)
            .map(|_| {
                let r: f64 = rng.random();
                self.cdf.iter().position(|&c| r < c).unwrap_or(self.cdf.len() - 1)
            })
            .collect()
    }

    /// Codeword `index`, generated on demand when not materialized.
    pub fn entry(&self, index: u64) -> Result<Vec<usize>, SchemeError> {
        let entries = self.entries().unwrap_or(u64::MAX);
        if index >= entries {
            return Err(SchemeError::MessageOutOfRange { hop: self.hop, index });
        }
        Ok(match &self.table {
            Some(t) => t[index as usize * self.n..(index as usize + 1) * self.n].iter().map(|&u| u as usize).collect(),
            None => self.generate(index),
        })
    }

    fn entry_into(&self, index: u64, buf: &mut Vec<usize>) {
        match &self.table {
            Some(t) => {
                buf.clear();
                buf.extend(t[index as usize * self.n..(index as usize + 1) * self.n].iter().map(|&u| u as usize));
            }
            None => *buf = self.generate(index),
        }
    }

    pub fn hop(&self) -> usize {
        self.hop
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Number of codewords, when it fits in 64 bits.
    pub fn entries(&self) -> Option<u64> {
        entry_count(self.bits)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn channel(&self) -> &ConditionalPmf {
        &self.channel
    }

    pub fn aux_size(&self) -> usize {
        self.marginal.len()
    }

    pub fn marginal(&self) -> &[f64] {
        &self.marginal
    }

    pub fn encoder_reference(&self) -> &[f64] {
        &self.enc_ref
    }

    pub fn decoder_reference(&self) -> &[f64] {
        &self.dec_ref
    }

    pub fn input_size(&self) -> usize {
        self.ny_in
    }

    pub fn output_size(&self) -> usize {
        self.ny_out
    }

    pub fn descriptor(&self) -> &CodebookDescriptor {
        &self.descriptor
    }

    pub fn is_materialized(&self) -> bool {
        self.table.is_some()
    }
}

/// Decision rule at center `k`: typicality of `(u_k^n, y_k^n)` under
/// `P_{U_k Y_k}` with slack `mu`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionRule {
    pub hop: usize,
    pub mu: f64,
    pub reference: Vec<f64>,
}

impl DecisionRule {
    pub fn new(codebook: &Codebook, mu: f64) -> Result<Self, SchemeError> {
        if !(mu > 0.0) {
            return Err(SchemeError::NonPositiveSlack { mu });
        }
        Ok(Self { hop: codebook.hop, mu, reference: codebook.dec_ref.clone() })
    }
}

pub(crate) fn check_sequence(hop: usize, y: &[usize], n: usize, size: usize) -> Result<(), SchemeError> {
    if y.len() != n {
        return Err(SchemeError::BlocklengthMismatch { hop, expected: n, got: y.len() });
    }
    if let Some(&symbol) = y.iter().find(|&&s| s >= size) {
        return Err(SchemeError::AlphabetMismatch { symbol, size });
    }
    Ok(())
}

/// Largest joint-type deviation of `(u, y)` from `reference` (U-major).
pub(crate) fn joint_deviation(u: &[usize], y: &[usize], ny: usize, reference: &[f64], counts: &mut Vec<u64>) -> f64 {
    counts.clear();
    counts.resize(reference.len(), 0);
    for (&a, &b) in u.iter().zip(y) {
        counts[a * ny + b] += 1;
    }
    typicality_deviation(counts, u.len(), reference)
}

/// Quantize `y = y_{l-1}^n`: the first codeword jointly `mu`-typical with
/// it, or REJECT. REJECT in gives REJECT out.
pub fn encode_hop(y: &[usize], incoming: Option<&HopMessage>, codebook: &Codebook, mu: f64) -> Result<HopMessage, SchemeError> {
    if !(mu > 0.0) {
        return Err(SchemeError::NonPositiveSlack { mu });
    }
    check_sequence(codebook.hop, y, codebook.n, codebook.ny_in)?;
    if incoming.is_some_and(HopMessage::is_reject) {
        return Ok(HopMessage::reject(codebook.bits));
    }
    let Some(entries) = codebook.entries() else {
        return Err(SchemeError::CodebookTooLarge { hop: codebook.hop, bits: codebook.bits });
    };
    if entries > EXPLICIT_ENTRY_LIMIT && !codebook.is_materialized() {
        return Err(SchemeError::CodebookTooLarge { hop: codebook.hop, bits: codebook.bits });
    }
    let mut buf = Vec::with_capacity(codebook.n);
    let mut counts = Vec::new();
    for i in 0..entries {
        codebook.entry_into(i, &mut buf);
        if joint_deviation(&buf, y, codebook.ny_in, &codebook.enc_ref, &mut counts) <= mu {
            return Ok(HopMessage::codeword(i as u128, codebook.bits));
        }
    }
    Ok(HopMessage::reject(codebook.bits))
}

/// Deviation behind [`decide_hop`]: `+inf` for REJECT.
pub fn decision_deviation(y: &[usize], incoming: &HopMessage, codebook: &Codebook, rule: &DecisionRule) -> Result<f64, SchemeError> {
    check_sequence(codebook.hop, y, codebook.n, codebook.ny_out)?;
    let Some(index) = incoming.index() else {
        return Ok(f64::INFINITY);
    };
    let index = u64::try_from(index).map_err(|_| SchemeError::MessageOutOfRange { hop: codebook.hop, index: u64::MAX })?;
    let u = codebook.entry(index)?;
    Ok(joint_deviation(&u, y, codebook.ny_out, &rule.reference, &mut Vec::new()))
}

/// Guess at center `k`: 0 iff the message is a codeword jointly typical
/// with `y_k^n`.
pub fn decide_hop(y: &[usize], incoming: &HopMessage, codebook: &Codebook, rule: &DecisionRule) -> Result<u8, SchemeError> {
    Ok(u8::from(decision_deviation(y, incoming, codebook, rule)? > rule.mu))
}

/// Codebooks for every hop. Channels must leave a positive rate margin,
/// except on hops whose message budget is zero bits.
pub fn build_codebooks(spec: &HopNetworkSpec, channels: &[ConditionalPmf], n: usize, seed: u64) -> Result<Vec<Codebook>, SchemeError> {
    if channels.len() != spec.hops() {
        return Err(SchemeError::FieldLength { field: "channels", expected: spec.hops(), got: channels.len() });
    }
    channels.iter().enumerate().map(|(i, c)| Codebook::new(spec, i + 1, c, n, seed)).collect()
}
