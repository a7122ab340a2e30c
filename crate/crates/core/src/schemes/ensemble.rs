//! Random-coding realization of the quantize-and-forward protocol for
//! codebooks too large to search (2^99 entries at n = 200, R = 1/2).
//!
//! Given `y^n`, an i.i.d. `P_U` codeword has, in each block of positions
//! where `y = b`, a multinomial `(n_b, P_U)` count vector, independently
//! across blocks. Joint typicality is a box on every count, so it factors
//! over blocks: `p_typ = prod_b p_b`. Over a fresh codebook the first
//! typical entry is therefore a draw of per-block counts restricted to the
//! box, placed at uniformly shuffled positions; none of the `N` entries is
//! typical with probability `(1 - p_typ)^N`.

use std::sync::OnceLock;

use rand::seq::SliceRandom;
use rand::Rng;

use super::codebook::{check_sequence, entry_count, joint_deviation, message_bits, Codebook, HopMessage};
use super::network::HopNetworkSpec;
use super::protocol::OpenTrace;
use crate::error::SchemeError;
use crate::probcore::{default_slack, ConditionalPmf};

#[derive(Debug)]
struct BlockTable {
    /// `ln p_b`, `-inf` for an empty box.
    log_mass: f64,
    cdf: Vec<f64>,
    counts: Vec<u16>,
}

#[derive(Debug)]
struct EnsembleHop {
    bits: u32,
    nu: usize,
    ny_in: usize,
    ny_out: usize,
    log_marginal: Vec<f64>,
    enc_ref: Vec<f64>,
    dec_ref: Vec<f64>,
    /// indexed by `b * (n + 1) + n_b`
    tables: Vec<OnceLock<BlockTable>>,
}

/// Per-trial ensemble sampler over all hops.
#[derive(Debug)]
pub struct EnsembleCode {
    hops: Vec<EnsembleHop>,
    n: usize,
    encode_mu: f64,
    decide_mu: f64,
    ln_factorial: Vec<f64>,
}

impl EnsembleCode {
    pub fn new(spec: &HopNetworkSpec, channels: &[ConditionalPmf], n: usize, mu: Option<f64>) -> Result<Self, SchemeError> {
        let mu = mu.unwrap_or_else(|| default_slack(n));
        if !(mu > 0.0) {
            return Err(SchemeError::NonPositiveSlack { mu });
        }
        if channels.len() != spec.hops() {
            return Err(SchemeError::FieldLength { field: "channels", expected: spec.hops(), got: channels.len() });
        }
        let mut hops = Vec::with_capacity(channels.len());
        for (i, ch) in channels.iter().enumerate() {
            // the seed is irrelevant: only the references are used
            let cb = Codebook::new(spec, i + 1, ch, n, 0)?;
            let ny_in = cb.input_size();
            hops.push(EnsembleHop {
                bits: message_bits(n, spec.rates()[i]),
                nu: cb.aux_size(),
                ny_in,
                ny_out: cb.output_size(),
                log_marginal: cb.marginal().iter().map(|p| p.ln()).collect(),
                enc_ref: cb.encoder_reference().to_vec(),
                dec_ref: cb.decoder_reference().to_vec(),
                tables: (0..ny_in * (n + 1)).map(|_| OnceLock::new()).collect(),
            });
        }
        let mut ln_factorial = vec![0.0; n + 1];
        for i in 1..=n {
            ln_factorial[i] = ln_factorial[i - 1] + (i as f64).ln();
        }
        Ok(Self { hops, n, encode_mu: mu, decide_mu: mu, ln_factorial })
    }

    pub fn mu(&self) -> f64 {
        self.decide_mu
    }

    pub fn hops(&self) -> usize {
        self.hops.len()
    }

    fn table<'a>(&self, hop: &'a EnsembleHop, b: usize, nb: usize) -> &'a BlockTable {
        hop.tables[b * (self.n + 1) + nb].get_or_init(|| self.build_table(hop, b, nb))
    }

    fn build_table(&self, hop: &EnsembleHop, b: usize, nb: usize) -> BlockTable {
        let (n, nu, ny) = (self.n, hop.nu, hop.ny_in);
        let nf = n as f64;
        // admissible counts for each u, with the same test as the explicit path
        let allowed: Vec<Vec<u16>> = (0..nu)
            .map(|u| {
                let p = hop.enc_ref[u * ny + b];
                (0..=nb)
                    .filter(|&c| if p == 0.0 { c == 0 } else { (c as f64 / nf - p).abs() <= self.encode_mu })
                    .map(|c| c as u16)
                    .collect()
            })
            .collect();
        let mut counts = Vec::new();
        let mut logs = Vec::new();
        let mut cur = vec![0u16; nu];
        self.enumerate(hop, &allowed, 0, nb, &mut cur, &mut counts, &mut logs, nb);
        if logs.is_empty() {
            return BlockTable { log_mass: f64::NEG_INFINITY, cdf: Vec::new(), counts };
        }
        let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut cdf = Vec::with_capacity(logs.len());
        let mut acc = 0.0;
        for l in &logs {
            acc += (l - top).exp();
            cdf.push(acc);
        }
        let log_mass = top + acc.ln();
        cdf.iter_mut().for_each(|c| *c /= acc);
        BlockTable { log_mass, cdf, counts }
    }

    #[allow(clippy::too_many_arguments)]
    fn enumerate(
        &self,
        hop: &EnsembleHop,
        allowed: &[Vec<u16>],
        u: usize,
        left: usize,
        cur: &mut Vec<u16>,
        counts: &mut Vec<u16>,
        logs: &mut Vec<f64>,
        nb: usize,
    ) {
        let nu = allowed.len();
        if u + 1 == nu {
            if allowed[u].binary_search(&(left as u16)).is_err() {
                return;
            }
            cur[u] = left as u16;
            let mut l = self.ln_factorial[nb];
            for (v, &c) in cur.iter().enumerate() {
                l -= self.ln_factorial[c as usize];
                if c > 0 {
                    l += c as f64 * hop.log_marginal[v];
                }
            }
            counts.extend_from_slice(cur);
            logs.push(l);
            return;
        }
        for &c in &allowed[u] {
            if c as usize > left {
                break;
            }
            cur[u] = c;
            self.enumerate(hop, allowed, u + 1, left - c as usize, cur, counts, logs, nb);
        }
    }

    /// First typical codeword of a fresh random codebook, or `None` when
    /// the whole codebook misses.
    fn sample_codeword<R: Rng>(&self, hop: &EnsembleHop, y: &[usize], rng: &mut R) -> Option<Vec<usize>> {
        let entries_log2 = match hop.bits {
            0 => return None,
            b => (b - 1) as f64,
        };
        let mut block_len = vec![0usize; hop.ny_in];
        for &s in y {
            block_len[s] += 1;
        }
        let mut log_p = 0.0;
        let mut tables = Vec::with_capacity(hop.ny_in);
        for (b, &nb) in block_len.iter().enumerate() {
            let t = self.table(hop, b, nb);
            log_p += t.log_mass;
            tables.push(t);
        }
        if log_p == f64::NEG_INFINITY {
            return None;
        }
        // P(no entry typical) = (1 - p)^N
        let ln_n = entries_log2 * std::f64::consts::LN_2;
        let p = log_p.exp();
        let log_miss = if p < 1e-12 { -(ln_n + log_p).exp() } else { (-p).ln_1p() * (ln_n).exp() };
        if rng.random::<f64>() < log_miss.exp() {
            return None;
        }
        let mut u = vec![0usize; y.len()];
        let mut symbols = Vec::new();
        for (b, t) in tables.iter().enumerate() {
            if block_len[b] == 0 {
                continue;
            }
            let r: f64 = rng.random();
            let i = t.cdf.partition_point(|&c| c <= r).min(t.cdf.len() - 1);
            symbols.clear();
            for (v, &c) in t.counts[i * hop.nu..(i + 1) * hop.nu].iter().enumerate() {
                symbols.extend(std::iter::repeat_n(v, c as usize));
            }
            symbols.shuffle(rng);
            let mut it = symbols.iter();
            for (pos, &s) in y.iter().enumerate() {
                if s == b {
                    u[pos] = *it.next().expect("counts sum to n_b");
                }
            }
        }
        Some(u)
    }

    /// One trial: decision deviations with relays forwarding regardless of
    /// their own guess (see [`OpenTrace`]).
    pub fn open_trace<R: Rng>(&self, ys: &[&[usize]], rng: &mut R) -> Result<OpenTrace, SchemeError> {
        let k = self.hops.len();
        if ys.len() != k + 1 {
            return Err(SchemeError::FieldLength { field: "sequences", expected: k + 1, got: ys.len() });
        }
        for (node, y) in ys.iter().enumerate() {
            let size = if node < k { self.hops[node].ny_in } else { self.hops[k - 1].ny_out };
            check_sequence(node.max(1), y, self.n, size)?;
        }
        let mut devs = Vec::with_capacity(k);
        let mut counts = Vec::new();
        let mut alive = true;
        for (c, hop) in self.hops.iter().enumerate() {
            let u = if alive { self.sample_codeword(hop, ys[c], rng) } else { None };
            match u {
                Some(u) => devs.push(joint_deviation(&u, ys[c + 1], hop.ny_out, &hop.dec_ref, &mut counts)),
                None => {
                    alive = false;
                    devs.push(f64::INFINITY);
                }
            }
        }
        Ok(OpenTrace::from_deviations(devs))
    }

    /// Message budget and REJECT message of hop `l`.
    pub fn reject(&self, hop: usize) -> HopMessage {
        HopMessage::reject(self.hops[hop - 1].bits)
    }

    /// Number of codewords on hop `l`, when it fits in 64 bits.
    pub fn entries(&self, hop: usize) -> Option<u64> {
        entry_count(self.hops[hop - 1].bits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probcore::{is_strongly_typical, JointPmf};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup() -> (HopNetworkSpec, Vec<ConditionalPmf>) {
        let spec = HopNetworkSpec::dsbs_chain(&[0.1, 0.1], vec![0.5, 0.5], vec![0.1, 0.1]).unwrap();
        (spec, vec![ConditionalPmf::bsc(0.12, "Y0", "U1"), ConditionalPmf::bsc(0.12, "Y1", "U2")])
    }

    #[test]
    fn sampled_codewords_are_typical() {
        let n = 60;
        let (spec, ch) = setup();
        let code = EnsembleCode::new(&spec, &ch, n, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let hop = &code.hops[0];
        let reference = JointPmf::from_shape(&[2, 2], hop.enc_ref.clone()).unwrap();
        let mut hits = 0;
        for _ in 0..200 {
            let y: Vec<usize> = (0..n).map(|_| rng.random_range(0..2)).collect();
            if let Some(u) = code.sample_codeword(hop, &y, &mut rng) {
                assert!(is_strongly_typical(&[&u, &y], &reference, code.encode_mu).unwrap());
                hits += 1;
            }
        }
        assert!(hits > 150);
    }

    #[test]
    fn block_mass_matches_direct_sum() {
        // binary U: p_b is a binomial tail sum over the admissible counts
        let n = 30;
        let (spec, ch) = setup();
        let code = EnsembleCode::new(&spec, &ch, n, Some(0.1)).unwrap();
        let hop = &code.hops[0];
        let nb = 14;
        let t = code.table(hop, 0, nb);
        let p0 = hop.log_marginal[0].exp();
        let mut direct = 0.0;
        for c in 0..=nb {
            let ok0 = (c as f64 / n as f64 - hop.enc_ref[0]).abs() <= 0.1;
            let ok1 = ((nb - c) as f64 / n as f64 - hop.enc_ref[2]).abs() <= 0.1;
            if ok0 && ok1 {
                let lc = code.ln_factorial[nb] - code.ln_factorial[c] - code.ln_factorial[nb - c];
                direct += (lc + c as f64 * p0.ln() + (nb - c) as f64 * (1.0 - p0).ln()).exp();
            }
        }
        assert!((t.log_mass.exp() - direct).abs() < 1e-12);
    }

    #[test]
    fn zero_rate_always_rejects() {
        let spec = HopNetworkSpec::dsbs_chain(&[0.1], vec![0.0], vec![0.1]).unwrap();
        let code = EnsembleCode::new(&spec, &[ConditionalPmf::bsc(0.5, "Y0", "U")], 10, None).unwrap();
        let y = vec![0usize; 10];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = code.open_trace(&[&y, &y], &mut rng).unwrap();
        assert_eq!(t.guesses(code.mu()), vec![1]);
    }
}
