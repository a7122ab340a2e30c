use std::cell::RefCell;
use std::collections::HashMap;

use serde::Serialize;

use super::enumerate::AcceptanceRegion;
use super::measure::{power_table, tuple_probability, DeltaReport, RestrictedMeasure, Sum};
use crate::error::DiagnosticsError;
use crate::probcore::{conditional_mutual_information, entropy, entropy_of, kl_divergence, neg_plogp, Alphabet, JointPmf};
use crate::schemes::message_bits;

/// Node sets whose conditional entropies given `U_l` are tracked:
/// `{l-1}`, `{l}`, `{l-1, l}`.
const SETS: usize = 3;

/// Single-letter view of the restricted measure around hop `l`: `T`
/// uniform on the positions and `U_l = (M~_l, Y~_0^{T-1}, ..., Y~_k^{T-1}, T)`.
///
/// The joint law of `(Y~_T, U_l)` has up to `n |A|^{n-1} |M|` values of
/// `U_l`, so it is not stored; the conditional entropies given `U_l` are
/// accumulated exactly in one pass instead. [`SingleLetterization::to_joint`]
/// materializes it for small instances.
#[derive(Debug, Clone, Serialize)]
pub struct SingleLetterization {
    pub n: usize,
    pub k: usize,
    pub ell: usize,
    /// `H(M~_l)`
    pub message_entropy: f64,
    /// `H(Y~_{l-1,T} | U)`, `H(Y~_{l,T} | U)`, `H(Y~_{l-1,T} Y~_{l,T} | U)`
    pub given_u: [f64; SETS],
    /// The same three entropies without conditioning.
    pub marginal: [f64; SETS],
    /// `(1/n) sum_t H(Y~_{l-1,t})`
    pub mean_time_entropy_prev: f64,
    #[serde(skip)]
    pub single: JointPmf,
}

impl SingleLetterization {
    /// `I(U_l; Y~_{l-1})`
    pub fn info_prev(&self) -> f64 {
        self.marginal[0] - self.given_u[0]
    }

    /// `I(U_l; Y~_l)`
    pub fn info_next(&self) -> f64 {
        self.marginal[1] - self.given_u[1]
    }

    /// `n I(T; Y~_{l-1,T})`: the exact slack between `n I(U_l; Y~_{l-1})` and
    /// `sum_t I(U_{l,t}; Y~_{l-1,t})`.
    pub fn time_sharing_residual(&self) -> f64 {
        self.n as f64 * (self.marginal[0] - self.mean_time_entropy_prev)
    }
}

/// Build the single-letterization of hop `l <= k` from the restricted
/// measure and the code tables of the region it came from.
pub fn single_letterize(
    measure: &RestrictedMeasure,
    region: &AcceptanceRegion,
    ell: usize,
) -> Result<SingleLetterization, DiagnosticsError> {
    let k = measure.k;
    if ell == 0 || ell > k {
        return Err(DiagnosticsError::NoSuchCenter { k: ell, hops: k });
    }
    let space = &measure.space;
    let (n, a) = (space.n, space.joint);
    let nm = region.tables.messages[ell - 1].len();
    let (s_prev, s_cur) = (space.sizes[ell - 1], space.sizes[ell]);
    let cards = [s_prev, s_cur, s_prev * s_cur];
    let key = |set: usize, sym: usize| -> usize {
        let (p, c) = (space.digit(sym, ell - 1), space.digit(sym, ell));
        match set {
            0 => p,
            1 => c,
            _ => p * s_cur + c,
        }
    };
    let tp = power_table(measure.base.mass(), n);

    struct State {
        acc: Vec<Vec<f64>>,
        touched: Vec<Vec<usize>>,
        h_m: Vec<Sum>,
        h_set: Vec<[Sum; SETS]>,
        msg: Vec<Sum>,
        tmp_m: Vec<f64>,
        tmp_set: [Vec<f64>; SETS],
    }
    let state = RefCell::new(State {
        acc: vec![vec![0.0; a * nm]; n],
        touched: vec![Vec::new(); n],
        h_m: vec![Sum::default(); n],
        h_set: vec![[Sum::default(); SETS]; n],
        msg: vec![Sum::default(); nm],
        tmp_m: vec![0.0; nm],
        tmp_set: [vec![0.0; nm * cards[0]], vec![0.0; nm * cards[1]], vec![0.0; nm * cards[2]]],
    });
    // close the block of every level whose fixed prefix just changed
    let flush = |st: &mut State, level: usize| {
        let State { acc, touched, h_m, h_set, tmp_m, tmp_set, .. } = st;
        let (acc, touched) = (&mut acc[level], &mut touched[level]);
        for &idx in touched.iter() {
            let (sym, m) = (idx / nm, idx % nm);
            tmp_m[m] += acc[idx];
            for (s, tmp) in tmp_set.iter_mut().enumerate() {
                tmp[m * cards[s] + key(s, sym)] += acc[idx];
            }
        }
        // indices sharing a key see the zeroed entry after the first, and
        // neg_plogp(0) = 0, so each key counts once
        for &idx in touched.iter() {
            let (sym, m) = (idx / nm, idx % nm);
            h_m[level].add(neg_plogp(tmp_m[m]));
            tmp_m[m] = 0.0;
            for (s, tmp) in tmp_set.iter_mut().enumerate() {
                let j = m * cards[s] + key(s, sym);
                h_set[level][s].add(neg_plogp(tmp[j]));
                tmp[j] = 0.0;
            }
            acc[idx] = 0.0;
        }
        touched.clear();
    };
    space.walk(
        |v| {
            if !measure.members.contains(v.index) {
                return;
            }
            let pt = tuple_probability(&tp, v.counts, n) / measure.delta;
            let m = region.tables.message(ell, v.node) as usize;
            let mut st = state.borrow_mut();
            st.msg[m].add(pt);
            for (level, &sym) in v.symbols.iter().enumerate() {
                let idx = sym * nm + m;
                if st.acc[level][idx] == 0.0 {
                    st.touched[level].push(idx);
                }
                st.acc[level][idx] += pt;
            }
        },
        |t| {
            let mut st = state.borrow_mut();
            for level in t + 1..n {
                flush(&mut st, level);
            }
        },
    );
    let mut st = state.into_inner();
    for level in 0..n {
        flush(&mut st, level);
    }
    let nf = n as f64;
    let mut given_u = [0.0; SETS];
    for s in 0..SETS {
        given_u[s] = (0..n).map(|l| st.h_set[l][s].value() - st.h_m[l].value()).sum::<f64>() / nf;
    }
    let single = measure.single_letter();
    let marg = |axes: &[usize]| entropy(&single.marginalize(axes).expect("valid axes"));
    let marginal = [marg(&[ell - 1]), marg(&[ell]), marg(&[ell - 1, ell])];
    let mean_time_entropy_prev = measure
        .time_marginals
        .iter()
        .map(|tm| {
            let mut m = vec![0.0; s_prev];
            for (sym, &x) in tm.iter().enumerate() {
                m[space.digit(sym, ell - 1)] += x;
            }
            entropy_of(&m)
        })
        .sum::<f64>()
        / nf;
    let message_entropy = st.msg.iter().map(|s| neg_plogp(s.value())).sum();
    Ok(SingleLetterization { n, k, ell, message_entropy, given_u, marginal, mean_time_entropy_prev, single })
}

impl SingleLetterization {
    /// Exact joint law of `(Y~_{0,T}, ..., Y~_{k,T}, U_l)`, with `U_l`
    /// labeled by its realized `(t, prefix, message)` values in first-seen
    /// order. Refused above `max_entries` entries.
    pub fn to_joint(
        measure: &RestrictedMeasure,
        region: &AcceptanceRegion,
        ell: usize,
        max_entries: usize,
    ) -> Result<JointPmf, DiagnosticsError> {
        let space = &measure.space;
        let (n, a) = (space.n, space.joint);
        let tp = power_table(measure.base.mass(), n);
        let mut ids: HashMap<(usize, usize, u32), usize> = HashMap::new();
        let mut cells: HashMap<(usize, usize), f64> = HashMap::new();
        let mut err = None;
        space.walk(
            |v| {
                if err.is_some() || !measure.members.contains(v.index) {
                    return;
                }
                let pt = tuple_probability(&tp, v.counts, n) / measure.delta;
                let m = region.tables.message(ell, v.node);
                let mut prefix = 0;
                for (t, &sym) in v.symbols.iter().enumerate() {
                    let next = ids.len();
                    let u = *ids.entry((t, prefix, m)).or_insert(next);
                    if ids.len() * a > max_entries {
                        err = Some(DiagnosticsError::CapExceeded { size: (ids.len() * a) as f64, cap: max_entries as u64 });
                        return;
                    }
                    *cells.entry((sym, u)).or_insert(0.0) += pt / n as f64;
                    prefix = prefix * a + sym;
                }
            },
            |_| {},
        );
        if let Some(e) = err {
            return Err(e);
        }
        let nu = ids.len();
        let mut mass = vec![0.0; a * nu];
        for ((sym, u), p) in cells {
            mass[sym * nu + u] = p;
        }
        let s: f64 = mass.iter().sum();
        mass.iter_mut().for_each(|x| *x /= s);
        let mut axes = measure.base.axes().to_vec();
        axes.push(Alphabet::indexed("U", nu)?);
        Ok(JointPmf::new(axes, mass)?)
    }
}

/// `I(U_l; Y~_l | Y~_{l-1})`, the finite-n Markov gap of hop `l`.
pub fn markov_gap(single: &SingleLetterization) -> f64 {
    (single.marginal[2] - single.marginal[0]) - (single.given_u[2] - single.given_u[0])
}

/// `(I(Y~_0 ... Y~_{l-2}; Y~_l | Y~_{l-1}), D(P~_{Y_T} || P))` for `l >= 2`.
/// The first never exceeds the second when `P` is a Markov chain.
pub fn chain_gap(measure: &RestrictedMeasure, ell: usize) -> Result<(f64, f64), DiagnosticsError> {
    if ell < 2 || ell > measure.k {
        return Err(DiagnosticsError::NoSuchCenter { k: ell, hops: measure.k });
    }
    let single = measure.single_letter();
    let past: Vec<usize> = (0..ell - 1).collect();
    let cmi = conditional_mutual_information(&single, &past, &[ell], &[ell - 1])?;
    let kl = kl_divergence(&single, &measure.base)?;
    Ok((cmi, kl))
}

/// One hop of a [`Lemma1Report`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HopCertificate {
    pub ell: usize,
    pub message_entropy: f64,
    /// `ceil(n R_l)`
    pub budget: f64,
    /// `n I(U_l; Y~_{l-1})`
    pub n_info_prev: f64,
    /// `n I(T; Y~_{l-1,T})`
    pub residual: f64,
    /// `budget - H(M~_l)`
    pub slack_i: f64,
    /// `H(M~_l) - n I(U_l; Y~_{l-1}) - log2 Delta + residual`
    pub slack_ii: f64,
    pub markov_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma1Report {
    pub k: usize,
    pub n: usize,
    pub delta: f64,
    pub hops: Vec<HopCertificate>,
    /// `-(1/n) log2 beta_k`
    pub exponent: f64,
    /// `sum_l I(U_l; Y~_l) + delta_n` with
    /// `delta_n = -((k+1)/n) log2 Delta + 1/n`
    pub exponent_bound: f64,
    pub slack_iii: f64,
}

impl Lemma1Report {
    /// All three inequalities, with `tol` absorbing rounding.
    pub fn holds(&self, tol: f64) -> bool {
        self.hops.iter().all(|h| h.slack_i >= -tol && h.slack_ii >= -tol) && self.slack_iii >= -tol
    }
}

/// Check at finite `n`, exactly:
/// (i) `H(M~_l) <= ceil(n R_l)`;
/// (ii) `H(M~_l) >= n I(U_l; Y~_{l-1}) + log2 Delta_k - n I(T; Y~_{l-1,T})`;
/// (iii) `-(1/n) log2 beta_k <= sum_l I(U_l; Y~_l) - ((k+1)/n) log2 Delta_k + 1/n`.
pub fn lemma1_certificate(
    singles: &[SingleLetterization],
    delta: &DeltaReport,
    rates: &[f64],
) -> Result<Lemma1Report, DiagnosticsError> {
    let (k, n) = (delta.k, delta.n);
    if singles.len() != k || rates.len() < k {
        return Err(DiagnosticsError::NoSuchCenter { k, hops: singles.len() });
    }
    if !(delta.delta > 0.0) {
        return Err(DiagnosticsError::ZeroDelta { k });
    }
    let nf = n as f64;
    let log_delta = delta.delta.log2();
    let hops: Vec<HopCertificate> = singles
        .iter()
        .zip(rates)
        .map(|(s, &r)| {
            let budget = message_bits(n, r) as f64;
            let n_info_prev = nf * s.info_prev();
            let residual = s.time_sharing_residual();
            HopCertificate {
                ell: s.ell,
                message_entropy: s.message_entropy,
                budget,
                n_info_prev,
                residual,
                slack_i: budget - s.message_entropy,
                slack_ii: s.message_entropy - n_info_prev - log_delta + residual,
                markov_gap: markov_gap(s),
            }
        })
        .collect();
    let exponent = -delta.beta.log2() / nf;
    let exponent_bound = singles.iter().map(SingleLetterization::info_next).sum::<f64>() - (k as f64 + 1.0) / nf * log_delta + 1.0 / nf;
    Ok(Lemma1Report { k, n, delta: delta.delta, hops, exponent, exponent_bound, slack_iii: exponent_bound - exponent })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::{delta_k, enumerate_region, restricted_measure};
    use crate::probcore::{ConditionalPmf, DEFAULT_ENUMERATION_CAP};
    use crate::schemes::{ConstantCode, HopNetworkSpec, IdentityCode, Protocol};

    fn chain_p() -> JointPmf {
        HopNetworkSpec::dsbs_chain(&[0.1, 0.2], vec![1.0, 1.0], vec![0.1, 0.1]).unwrap().p_joint().clone()
    }

    fn protocol(n: usize) -> (HopNetworkSpec, Protocol) {
        let spec = HopNetworkSpec::dsbs_chain(&[0.1, 0.2], vec![0.75, 0.75], vec![0.1, 0.1]).unwrap();
        let ch = vec![ConditionalPmf::bsc(0.15, "Y0", "U1"), ConditionalPmf::bsc(0.15, "Y1", "U2")];
        let p = Protocol::new(&spec, &ch, n, 3, None).unwrap();
        (spec, p)
    }

    #[test]
    fn streaming_entropies_match_the_materialized_law() {
        let (spec, code) = protocol(4);
        let p = spec.p_joint().clone();
        let region = enumerate_region(&code, 2, DEFAULT_ENUMERATION_CAP).unwrap();
        let d = delta_k(&region, &p, code.mu()).unwrap();
        let m = restricted_measure(&p, &d, &region.space).unwrap();
        for ell in 1..=2 {
            let s = single_letterize(&m, &region, ell).unwrap();
            let joint = SingleLetterization::to_joint(&m, &region, ell, 1 << 22).unwrap();
            let u = 3;
            let direct_gap = conditional_mutual_information(&joint, &[u], &[ell], &[ell - 1]).unwrap();
            assert!((markov_gap(&s) - direct_gap).abs() < 1e-10, "{} vs {direct_gap}", markov_gap(&s));
            let i_prev = crate::probcore::mutual_information(&joint, &[u], &[ell - 1]).unwrap();
            assert!((s.info_prev() - i_prev).abs() < 1e-10);
            let i_next = crate::probcore::mutual_information(&joint, &[u], &[ell]).unwrap();
            assert!((s.info_next() - i_next).abs() < 1e-10);
        }
    }

    #[test]
    fn constant_messages_have_no_gap() {
        let p = chain_p();
        let code = ConstantCode { sizes: vec![2, 2, 2], n: 4, guess: 0 };
        let region = enumerate_region(&code, 2, DEFAULT_ENUMERATION_CAP).unwrap();
        let d = delta_k(&region, &p, 0.5).unwrap();
        let m = restricted_measure(&p, &d, &region.space).unwrap();
        let singles: Vec<_> = (1..=2).map(|l| single_letterize(&m, &region, l).unwrap()).collect();
        for s in &singles {
            assert!(s.message_entropy.abs() < 1e-12);
        }
        let rep = lemma1_certificate(&singles, &d, &[0.5, 0.5]).unwrap();
        assert!(rep.holds(1e-9), "{rep:?}");
        let (cmi, kl) = chain_gap(&m, 2).unwrap();
        assert!(cmi <= kl + 1e-12);
    }

    #[test]
    fn identity_message_at_unit_length() {
        // n = 1, full region, message = y_0: gap is I(Y0; Y1 | Y0) = 0
        let p = JointPmf::dsbs(0.1).unwrap();
        let code = IdentityCode { sizes: vec![2, 2], n: 1 };
        let region = enumerate_region(&code, 1, DEFAULT_ENUMERATION_CAP).unwrap();
        let d = delta_k(&region, &p, 1.0).unwrap();
        let m = restricted_measure(&p, &d, &region.space).unwrap();
        let s = single_letterize(&m, &region, 1).unwrap();
        assert!(markov_gap(&s).abs() < 1e-12);
        // H(M) = H(Y0) = 1 bit sits at the 1-bit budget, plus the REJECT slot
        assert!((s.message_entropy - 1.0).abs() < 1e-12);
        let rep = lemma1_certificate(&[s], &d, &[2.0]).unwrap();
        assert!(rep.holds(1e-9), "{rep:?}");
    }

    #[test]
    fn protocol_certificate_holds() {
        for n in [4, 6] {
            let (spec, code) = protocol(n);
            let p = spec.p_joint().clone();
            let region = enumerate_region(&code, 2, DEFAULT_ENUMERATION_CAP).unwrap();
            let d = delta_k(&region, &p, code.mu()).unwrap();
            let m = restricted_measure(&p, &d, &region.space).unwrap();
            let singles: Vec<_> = (1..=2).map(|l| single_letterize(&m, &region, l).unwrap()).collect();
            let rep = lemma1_certificate(&singles, &d, spec.rates()).unwrap();
            assert!(rep.holds(1e-9), "{rep:?}");
            let (cmi, kl) = chain_gap(&m, 2).unwrap();
            assert!(cmi <= kl + 1e-12);
        }
    }
}
