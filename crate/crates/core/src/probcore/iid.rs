use super::pmf::{strides, JointPmf};
use crate::error::ProbError;

/// Default bound on the number of sequence tuples an exact enumeration may
/// visit.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 24;

/// The n-fold i.i.d. extension of a joint pmf. Never materialized: tuple
/// probabilities are evaluated pointwise or by bounded enumeration.
#[derive(Debug, Clone)]
pub struct IidMeasure {
    base: JointPmf,
    n: usize,
    cap: u64,
}

impl IidMeasure {
    pub fn new(base: JointPmf, n: usize) -> Result<Self, ProbError> {
        if n == 0 {
            return Err(ProbError::ZeroBlocklength);
        }
        Ok(Self { base, n, cap: DEFAULT_ENUMERATION_CAP })
    }

    pub fn with_cap(mut self, cap: u64) -> Self {
        self.cap = cap;
        self
    }

    pub fn base(&self) -> &JointPmf {
        &self.base
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    /// Number of sequence tuples, `|A|^n`, as a float (it may overflow u64).
    pub fn space_size(&self) -> f64 {
        (self.base.len() as f64).powi(self.n as i32)
    }

    /// Probability of one tuple, given as one length-n sequence per axis.
    pub fn probability(&self, seqs: &[&[usize]]) -> Result<f64, ProbError> {
        let shape = self.base.shape();
        if seqs.len() != shape.len() {
            return Err(ProbError::ArityMismatch { expected: shape.len(), got: seqs.len() });
        }
        for s in seqs {
            if s.len() != self.n {
                return Err(ProbError::LengthMismatch { first: self.n, other: s.len() });
            }
        }
        let st = strides(&shape);
        let mut p = 1.0;
        for t in 0..self.n {
            let mut flat = 0;
            for (axis, s) in seqs.iter().enumerate() {
                if s[t] >= shape[axis] {
                    return Err(ProbError::SymbolOutOfRange { symbol: s[t], size: shape[axis] });
                }
                flat += s[t] * st[axis];
            }
            p *= self.base.mass()[flat];
        }
        Ok(p)
    }

    fn check_cap(&self) -> Result<(), ProbError> {
        let size = self.space_size();
        if size > self.cap as f64 {
            return Err(ProbError::EnumerationCap { size, cap: self.cap });
        }
        Ok(())
    }

    /// Visit every tuple in time-major order. The callback receives the
    /// joint symbol (flat index into the base pmf) at each time and the
    /// tuple probability.
    pub fn for_each<F: FnMut(&[usize], f64)>(&self, mut f: F) -> Result<(), ProbError> {
        self.check_cap()?;
        let a = self.base.len();
        let mass = self.base.mass();
        let mut symbols = vec![0usize; self.n];
        // prefix products: prefix[t] = prob of symbols[..t]
        let mut prefix = vec![1.0; self.n + 1];
        for t in 0..self.n {
            prefix[t + 1] = prefix[t] * mass[0];
        }
        loop {
            f(&symbols, prefix[self.n]);
            let mut t = self.n;
            loop {
                if t == 0 {
                    return Ok(());
                }
                t -= 1;
                symbols[t] += 1;
                if symbols[t] < a {
                    break;
                }
                symbols[t] = 0;
            }
            for s in t..self.n {
                prefix[s + 1] = prefix[s] * mass[symbols[s]];
            }
        }
    }

    /// Split time-major joint symbols into one sequence per axis.
    pub fn split(&self, symbols: &[usize]) -> Vec<Vec<usize>> {
        let shape = self.base.shape();
        let st = strides(&shape);
        (0..shape.len())
            .map(|axis| symbols.iter().map(|&j| (j / st[axis]) % shape[axis]).collect())
            .collect()
    }

    /// Total mass of the tuples satisfying `pred`, by exact enumeration.
    pub fn mass_where<F: FnMut(&[Vec<usize>]) -> bool>(&self, mut pred: F) -> Result<f64, ProbError> {
        let mut terms = Vec::new();
        self.for_each(|symbols, p| {
            if pred(&self.split(symbols)) {
                terms.push(p);
            }
        })?;
        Ok(super::pmf::stable_sum(terms))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probcore::typical::{default_slack, is_strongly_typical};

    #[test]
    fn n_one_is_the_base_pmf() {
        let p = JointPmf::dsbs(0.1).unwrap();
        let m = IidMeasure::new(p.clone(), 1).unwrap();
        let mut seen = Vec::new();
        m.for_each(|_, q| seen.push(q)).unwrap();
        assert_eq!(seen, p.mass());
    }

    #[test]
    fn all_zero_tuple_probability() {
        let m = IidMeasure::new(JointPmf::dsbs(0.1).unwrap(), 3).unwrap();
        let z = [0usize; 3];
        let p = m.probability(&[&z, &z]).unwrap();
        assert!((p - 0.091125).abs() < 1e-15);
    }

    #[test]
    fn total_mass_is_one() {
        let m = IidMeasure::new(JointPmf::dsbs(0.1).unwrap(), 4).unwrap();
        let mass = m.mass_where(|_| true).unwrap();
        assert!((mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cap_is_enforced() {
        let m = IidMeasure::new(JointPmf::dsbs(0.1).unwrap(), 13).unwrap();
        assert!(matches!(m.for_each(|_, _| {}), Err(ProbError::EnumerationCap { .. })));
        assert!(IidMeasure::new(JointPmf::dsbs(0.1).unwrap(), 0).is_err());
    }

    #[test]
    fn enumeration_agrees_with_pointwise_probability() {
        let p = JointPmf::from_shape(&[2, 3], vec![0.1, 0.2, 0.05, 0.3, 0.15, 0.2]).unwrap();
        let m = IidMeasure::new(p, 3).unwrap();
        m.for_each(|symbols, q| {
            let seqs = m.split(symbols);
            let refs: Vec<&[usize]> = seqs.iter().map(Vec::as_slice).collect();
            assert!((m.probability(&refs).unwrap() - q).abs() < 1e-15);
        })
        .unwrap();
    }

    #[test]
    fn typical_set_mass_bound() {
        let p = JointPmf::dsbs(0.2).unwrap();
        for n in 2..=10 {
            let mu = default_slack(n);
            let m = IidMeasure::new(p.clone(), n).unwrap();
            let mass = m
                .mass_where(|seqs| is_strongly_typical(&[&seqs[0], &seqs[1]], &p, mu).unwrap())
                .unwrap();
            let bound = 1.0 - p.len() as f64 / (4.0 * mu * mu * n as f64);
            assert!(mass >= bound - 1e-12, "n={n}: {mass} < {bound}");
        }
    }
}
