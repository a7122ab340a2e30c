use serde::Serialize;

use super::enumerate::{AcceptanceRegion, TupleSet, TupleSpace};
use crate::error::DiagnosticsError;
use crate::error::ProbError;
use crate::probcore::{entropy, neg_plogp, typicality_deviation, JointPmf};

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Sum {
    s: f64,
    c: f64,
}

impl Sum {
    pub fn add(&mut self, x: f64) {
        let t = self.s + x;
        if self.s.abs() >= x.abs() {
            self.c += (self.s - t) + x;
        } else {
            self.c += (x - t) + self.s;
        }
        self.s = t;
    }

    pub fn value(&self) -> f64 {
        self.s + self.c
    }
}

/// `table[a * (n + 1) + c] = p(a)^c`, so a tuple probability is a product
/// over the joint alphabet instead of over time.
pub(crate) fn power_table(p: &[f64], n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(p.len() * (n + 1));
    for &x in p {
        let mut v = 1.0;
        for _ in 0..=n {
            out.push(v);
            v *= x;
        }
    }
    out
}

pub(crate) fn tuple_probability(table: &[f64], counts: &[u64], n: usize) -> f64 {
    counts.iter().enumerate().map(|(a, &c)| table[a * (n + 1) + c as usize]).product()
}

fn check_shape(space: &TupleSpace, p: &JointPmf) -> Result<(), DiagnosticsError> {
    if p.shape() != space.sizes {
        return Err(ProbError::ArityMismatch { expected: space.nodes(), got: p.rank() }.into());
    }
    Ok(())
}

/// `D_k = A_k ∩ T_mu` and its masses under both hypotheses.
#[derive(Debug, Clone)]
pub struct DeltaReport {
    pub k: usize,
    pub n: usize,
    pub mu: f64,
    /// `Delta_k = P^n(D_k)`
    pub delta: f64,
    /// Exact type-I error `P^n(A_k^c)`.
    pub alpha: f64,
    /// Exact type-II error `Q^n(A_k)` with `Q` the product of marginals.
    pub beta: f64,
    /// `P^n(T_mu)`
    pub typical_mass: f64,
    /// `Q^n(D_k)`
    pub q_delta: f64,
    /// `1 - alpha - |Y_0|...|Y_k| / (4 mu^2 n)`
    pub lower_bound: f64,
    pub members: TupleSet,
}

/// Exact `Delta_k` for the region of a code under `p = P_{Y_0...Y_k}`.
/// Fails if `Delta_k = 0` or if `Delta_k` falls below
/// `1 - alpha - |Y_0|...|Y_k| / (4 mu^2 n)`.
pub fn delta_k(region: &AcceptanceRegion, p: &JointPmf, mu: f64) -> Result<DeltaReport, DiagnosticsError> {
    if !(mu > 0.0) {
        return Err(ProbError::NonPositiveSlack { mu }.into());
    }
    let space = &region.space;
    check_shape(space, p)?;
    let n = space.n;
    let q = p.independent_marginals();
    let (tp, tq) = (power_table(p.mass(), n), power_table(q.mass(), n));
    let mut members = TupleSet::empty(space.len());
    let (mut delta, mut accept_p, mut accept_q, mut typical, mut q_delta) =
        (Sum::default(), Sum::default(), Sum::default(), Sum::default(), Sum::default());
    space.walk(
        |v| {
            let pp = tuple_probability(&tp, v.counts, n);
            let accepted = region.members.contains(v.index);
            let is_typical = typicality_deviation(v.counts, n, p.mass()) <= mu;
            if accepted {
                let pq = tuple_probability(&tq, v.counts, n);
                accept_p.add(pp);
                accept_q.add(pq);
                if is_typical {
                    q_delta.add(pq);
                }
            }
            if is_typical {
                typical.add(pp);
                if accepted {
                    delta.add(pp);
                    members.insert(v.index);
                }
            }
        },
        |_| {},
    );
    // compensated sums can still land an ulp outside [0, 1]
    let delta = delta.value().min(1.0);
    if delta <= 0.0 {
        return Err(DiagnosticsError::ZeroDelta { k: region.k });
    }
    let alpha = (1.0 - accept_p.value()).max(0.0);
    let lower_bound = 1.0 - alpha - space.joint as f64 / (4.0 * mu * mu * n as f64);
    if delta < lower_bound - 1e-12 {
        return Err(DiagnosticsError::Violated(format!(
            "Delta_{} = {delta} below its lower bound {lower_bound}",
            region.k
        )));
    }
    Ok(DeltaReport {
        k: region.k,
        n,
        mu,
        delta,
        alpha,
        beta: accept_q.value().clamp(0.0, 1.0),
        typical_mass: typical.value().min(1.0),
        q_delta: q_delta.value().clamp(0.0, 1.0),
        lower_bound,
        members,
    })
}

/// `P^n` restricted to `D_k` and renormalized by `Delta_k`, with the
/// quantities every later check needs, computed in one exact pass.
#[derive(Debug, Clone)]
pub struct RestrictedMeasure {
    pub k: usize,
    pub n: usize,
    pub mu: f64,
    pub base: JointPmf,
    pub delta: f64,
    pub members: TupleSet,
    pub space: TupleSpace,
    /// Total restricted mass (1 up to rounding).
    pub total: f64,
    /// `D(P~ || P^n)` in bits.
    pub kl: f64,
    /// `H(P~)` in bits.
    pub entropy: f64,
    /// `P~_{Y_t}` for every `t`, flat over the joint alphabet.
    pub time_marginals: Vec<Vec<f64>>,
}

impl RestrictedMeasure {
    pub fn probability(&self, index: usize) -> f64 {
        if !self.members.contains(index) {
            return 0.0;
        }
        let mut counts = vec![0u64; self.space.joint];
        let mut i = index;
        for _ in 0..self.n {
            counts[i % self.space.joint] += 1;
            i /= self.space.joint;
        }
        tuple_probability(&power_table(self.base.mass(), self.n), &counts, self.n) / self.delta
    }

    /// Law of `Y~_T` with `T` uniform on the `n` positions.
    pub fn single_letter(&self) -> JointPmf {
        let a = self.space.joint;
        let mut m = vec![0.0; a];
        for tm in &self.time_marginals {
            for (x, y) in m.iter_mut().zip(tm) {
                *x += y / self.n as f64;
            }
        }
        // renormalize away rounding so the pmf validates
        let s: f64 = m.iter().sum();
        m.iter_mut().for_each(|x| *x /= s);
        JointPmf::new(self.base.axes().to_vec(), m).expect("average of pmfs")
    }

    /// Largest `|P~_{Y_T}(a) - P(a)|`.
    pub fn single_letter_deviation(&self) -> f64 {
        self.single_letter().mass().iter().zip(self.base.mass()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// Normalized restriction of `P^n` to `D_k`.
pub fn restricted_measure(p: &JointPmf, d: &DeltaReport, space: &TupleSpace) -> Result<RestrictedMeasure, DiagnosticsError> {
    if !(d.delta > 0.0) {
        return Err(DiagnosticsError::ZeroDelta { k: d.k });
    }
    check_shape(space, p)?;
    let n = space.n;
    let a = space.joint;
    let tp = power_table(p.mass(), n);
    let (mut total, mut kl, mut h) = (Sum::default(), Sum::default(), Sum::default());
    let mut tm = vec![vec![Sum::default(); a]; n];
    space.walk(
        |v| {
            if !d.members.contains(v.index) {
                return;
            }
            let pp = tuple_probability(&tp, v.counts, n);
            let pt = pp / d.delta;
            total.add(pt);
            kl.add(pt * (pt / pp).log2());
            h.add(neg_plogp(pt));
            for (t, &s) in v.symbols.iter().enumerate() {
                tm[t][s].add(pt);
            }
        },
        |_| {},
    );
    Ok(RestrictedMeasure {
        k: d.k,
        n,
        mu: d.mu,
        base: p.clone(),
        delta: d.delta,
        members: d.members.clone(),
        space: space.clone(),
        total: total.value(),
        kl: kl.value(),
        entropy: h.value(),
        time_marginals: tm.into_iter().map(|r| r.iter().map(Sum::value).collect()).collect(),
    })
}

/// One blocklength of [`entropy_convergence`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyGap {
    pub n: usize,
    pub mu: f64,
    /// `(1/n) H(P~)`
    pub per_letter_entropy: f64,
    /// `|(1/n) H(P~) - H(P)|`
    pub gap: f64,
    /// `-(1/n) E log2 P^n - H(P)`: the cross-entropy part of the gap.
    pub cross_term: f64,
    /// `(1/n) log2 Delta`: the change-of-measure part of the gap.
    pub log_delta_term: f64,
    pub single_letter_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub rows: Vec<EntropyGap>,
    /// Gaps nonincreasing over all blocklengths.
    pub nonincreasing: bool,
    /// Gaps nonincreasing from the second blocklength on.
    pub nonincreasing_after_first: bool,
}

/// `|(1/n) H(P~) - H(P)|` over increasing `n`. Fails if a single-letter
/// marginal leaves the `mu` box, which `D_k ⊆ T_mu` rules out.
pub fn entropy_convergence(series: &[RestrictedMeasure]) -> Result<ConvergenceTable, DiagnosticsError> {
    if series.len() < 3 {
        return Err(DiagnosticsError::TooFewBlocklengths { got: series.len() });
    }
    let mut rows = Vec::with_capacity(series.len());
    for m in series {
        let hp = entropy(&m.base);
        let single = m.single_letter();
        let cross: f64 =
            single.mass().iter().zip(m.base.mass()).filter(|(_, &p)| p > 0.0).map(|(s, p)| -s * p.log2()).sum::<f64>();
        let dev = m.single_letter_deviation();
        if dev > m.mu + 1e-12 {
            return Err(DiagnosticsError::Violated(format!(
                "single-letter deviation {dev} exceeds mu = {} at n = {}",
                m.mu, m.n
            )));
        }
        let per = m.entropy / m.n as f64;
        rows.push(EntropyGap {
            n: m.n,
            mu: m.mu,
            per_letter_entropy: per,
            gap: (per - hp).abs(),
            cross_term: cross - hp,
            log_delta_term: m.delta.log2() / m.n as f64,
            single_letter_deviation: dev,
        });
    }
    let mono = |r: &[EntropyGap]| r.windows(2).all(|w| w[1].gap <= w[0].gap + 1e-12);
    Ok(ConvergenceTable {
        nonincreasing: mono(&rows),
        nonincreasing_after_first: mono(&rows[1..]),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::enumerate_region;
    use crate::probcore::{IidMeasure, DEFAULT_ENUMERATION_CAP};
    use crate::schemes::ConstantCode;

    fn dsbs_pair() -> JointPmf {
        JointPmf::dsbs(0.1).unwrap()
    }

    #[test]
    fn full_region_gives_typical_mass() {
        let g0 = ConstantCode { sizes: vec![2, 2], n: 6, guess: 0 };
        let r = enumerate_region(&g0, 1, DEFAULT_ENUMERATION_CAP).unwrap();
        let p = dsbs_pair();
        let mu = 0.3;
        let d = delta_k(&r, &p, mu).unwrap();
        let direct = IidMeasure::new(p.clone(), 6)
            .unwrap()
            .mass_where(|s| crate::probcore::is_strongly_typical(&[&s[0], &s[1]], &p, mu).unwrap())
            .unwrap();
        assert!((d.delta - direct).abs() < 1e-12);
        assert_eq!(d.alpha, 0.0);
        assert!((d.beta - 1.0).abs() < 1e-12);
        let m = restricted_measure(&p, &d, &r.space).unwrap();
        assert!((m.total - 1.0).abs() < 1e-12);
        assert!((m.kl + d.delta.log2()).abs() < 1e-10);
    }

    #[test]
    fn vacuous_typicality() {
        let g0 = ConstantCode { sizes: vec![2, 2], n: 4, guess: 0 };
        let r = enumerate_region(&g0, 1, DEFAULT_ENUMERATION_CAP).unwrap();
        let d = delta_k(&r, &dsbs_pair(), 1.0).unwrap();
        assert!((d.delta - (1.0 - d.alpha)).abs() < 1e-12);
        let m = restricted_measure(&dsbs_pair(), &d, &r.space).unwrap();
        // full space: P~ = P^n
        assert!((m.entropy - 4.0 * entropy(&dsbs_pair())).abs() < 1e-10);
        assert!(m.kl.abs() < 1e-12);
        assert!(m.single_letter_deviation() < 1e-12);
    }

    #[test]
    fn rejecting_everything_has_no_delta() {
        let g1 = ConstantCode { sizes: vec![2, 2], n: 4, guess: 1 };
        let r = enumerate_region(&g1, 1, DEFAULT_ENUMERATION_CAP).unwrap();
        assert!(matches!(delta_k(&r, &dsbs_pair(), 0.5), Err(DiagnosticsError::ZeroDelta { k: 1 })));
    }

    #[test]
    fn full_region_entropy_gap_is_the_delta_term() {
        let p = dsbs_pair();
        let series: Vec<RestrictedMeasure> = [2, 3, 4]
            .iter()
            .map(|&n| {
                let g0 = ConstantCode { sizes: vec![2, 2], n, guess: 0 };
                let r = enumerate_region(&g0, 1, DEFAULT_ENUMERATION_CAP).unwrap();
                let d = delta_k(&r, &p, 2.0).unwrap();
                restricted_measure(&p, &d, &r.space).unwrap()
            })
            .collect();
        let t = entropy_convergence(&series).unwrap();
        for row in &t.rows {
            assert!(row.gap < 1e-12);
        }
        assert!(entropy_convergence(&series[..2]).is_err());
    }
}
