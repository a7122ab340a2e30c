use super::alphabet::Alphabet;
use super::pmf::JointPmf;
use crate::error::ProbError;

/// Joint empirical type of a tuple of equal-length sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalType {
    axes: Vec<Alphabet>,
    counts: Vec<u64>,
    n: usize,
}

impl EmpiricalType {
    /// Joint type of `seqs` (one sequence per axis of `axes`).
    pub fn of(axes: &[Alphabet], seqs: &[&[usize]]) -> Result<Self, ProbError> {
        if seqs.len() != axes.len() {
            return Err(ProbError::ArityMismatch { expected: axes.len(), got: seqs.len() });
        }
        let n = seqs.first().map_or(0, |s| s.len());
        if n == 0 {
            return Err(ProbError::ZeroBlocklength);
        }
        for s in seqs {
            if s.len() != n {
                return Err(ProbError::LengthMismatch { first: n, other: s.len() });
            }
        }
        let shape: Vec<usize> = axes.iter().map(Alphabet::size).collect();
        let len: usize = shape.iter().product();
        let mut counts = vec![0u64; len];
        for t in 0..n {
            let mut flat = 0;
            for (seq, &size) in seqs.iter().zip(&shape) {
                let s = seq[t];
                if s >= size {
                    return Err(ProbError::SymbolOutOfRange { symbol: s, size });
                }
                flat = flat * size + s;
            }
            counts[flat] += 1;
        }
        Ok(Self { axes: axes.to_vec(), counts, n })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn axes(&self) -> &[Alphabet] {
        &self.axes
    }

    pub fn frequencies(&self) -> Vec<f64> {
        let n = self.n as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    pub fn to_pmf(&self) -> JointPmf {
        JointPmf::new(self.axes.clone(), self.frequencies()).expect("types are normalized")
    }
}

/// Largest entrywise gap `|c/n - p|`, or `+inf` when a count lands on a
/// zero of `p`. A tuple is mu-typical iff this is at most `mu`.
pub fn typicality_deviation(counts: &[u64], n: usize, p: &[f64]) -> f64 {
    let nf = n as f64;
    let mut worst = 0.0_f64;
    for (&c, &q) in counts.iter().zip(p) {
        if q == 0.0 {
            if c > 0 {
                return f64::INFINITY;
            }
            continue;
        }
        worst = worst.max((c as f64 / nf - q).abs());
    }
    worst
}

/// Strong typicality: every joint frequency within `mu` of `p`, with `p`'s
/// support respected.
pub fn is_strongly_typical(seqs: &[&[usize]], p: &JointPmf, mu: f64) -> Result<bool, ProbError> {
    if !(mu > 0.0) {
        return Err(ProbError::NonPositiveSlack { mu });
    }
    let ty = EmpiricalType::of(p.axes(), seqs)?;
    Ok(typicality_deviation(ty.counts(), ty.n(), p.mass()) <= mu)
}

/// The slack `n^{-1/3}` used by the converse construction.
pub fn default_slack(n: usize) -> f64 {
    (n as f64).powf(-1.0 / 3.0)
}
