use std::collections::HashMap;

use crate::error::DiagnosticsError;
use crate::schemes::{HopCode, HopMessage};

/// Tuples `(y_0^n, ..., y_k^n)` indexed in time-major order: the tuple with
/// joint symbols `a_0 .. a_{n-1}` (row-major over nodes) has index
/// `sum_t a_t A^{n-1-t}`. Node `l`'s sequence index is
/// `sum_t y_{l,t} |Y_l|^{n-1-t}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TupleSpace {
    pub n: usize,
    /// `|Y_0|, ..., |Y_k|`
    pub sizes: Vec<usize>,
    /// `A = prod |Y_l|`
    pub joint: usize,
    /// `digits[a * (k+1) + l]` is node `l`'s symbol inside joint symbol `a`.
    digits: Vec<usize>,
    /// `weights[l * n + t] = |Y_l|^{n-1-t}`
    weights: Vec<usize>,
}

/// Visitor state for one tuple.
pub(crate) struct Visit<'a> {
    pub index: usize,
    pub symbols: &'a [usize],
    pub node: &'a [usize],
    pub counts: &'a [u64],
}

impl TupleSpace {
    pub fn new(sizes: &[usize], n: usize, cap: u64) -> Result<Self, DiagnosticsError> {
        let joint: usize = sizes.iter().product();
        let size = (joint as f64).powi(n as i32);
        if size > cap as f64 {
            return Err(DiagnosticsError::CapExceeded { size, cap });
        }
        let r = sizes.len();
        let mut digits = vec![0; joint * r];
        for a in 0..joint {
            let mut rest = a;
            for l in (0..r).rev() {
                digits[a * r + l] = rest % sizes[l];
                rest /= sizes[l];
            }
        }
        let mut weights = vec![0; r * n];
        for l in 0..r {
            let mut w = 1;
            for t in (0..n).rev() {
                weights[l * n + t] = w;
                w *= sizes[l];
            }
        }
        Ok(Self { n, sizes: sizes.to_vec(), joint, digits, weights })
    }

    pub fn nodes(&self) -> usize {
        self.sizes.len()
    }

    pub fn len(&self) -> usize {
        self.joint.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of sequences of node `l`.
    pub fn node_len(&self, l: usize) -> usize {
        self.sizes[l].pow(self.n as u32)
    }

    pub fn digit(&self, a: usize, l: usize) -> usize {
        self.digits[a * self.nodes() + l]
    }

    /// Sequence of node `l` with index `idx`.
    pub fn node_sequence(&self, l: usize, idx: usize) -> Vec<usize> {
        (0..self.n).map(|t| (idx / self.weights[l * self.n + t]) % self.sizes[l]).collect()
    }

    /// Visit every tuple in index order. `on_carry(t)` runs before the
    /// visit of each tuple after the first, with `t` the earliest time
    /// whose symbol changed.
    pub(crate) fn walk<F, C>(&self, mut visit: F, mut on_carry: C)
    where
        F: FnMut(&Visit<'_>),
        C: FnMut(usize),
    {
        let (n, r, a) = (self.n, self.nodes(), self.joint);
        let mut symbols = vec![0usize; n];
        let mut node = vec![0usize; r];
        let mut counts = vec![0u64; a];
        counts[0] = n as u64;
        let mut index = 0usize;
        loop {
            visit(&Visit { index, symbols: &symbols, node: &node, counts: &counts });
            let mut t = n;
            loop {
                if t == 0 {
                    return;
                }
                t -= 1;
                let old = symbols[t];
                let new = if old + 1 < a { old + 1 } else { 0 };
                symbols[t] = new;
                counts[old] -= 1;
                counts[new] += 1;
                for l in 0..r {
                    let w = self.weights[l * n + t];
                    node[l] = node[l] - self.digits[old * r + l] * w + self.digits[new * r + l] * w;
                }
                if new != 0 {
                    break;
                }
            }
            index += 1;
            on_carry(t);
        }
    }
}

/// Fixed-size bit set over tuple indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TupleSet {
    words: Vec<u64>,
    len: usize,
}

impl TupleSet {
    pub fn empty(len: usize) -> Self {
        Self { words: vec![0; len.div_ceil(64)], len }
    }

    pub fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn contains(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Size of the universe.
    pub fn universe(&self) -> usize {
        self.len
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.contains(i))
    }
}

/// Encoders and deciders of a code tabulated over every sequence:
/// `first[y_0]` is the id of `M_1`; `forward[l-1][m * |Y_l|^n + y_l]` the id
/// of `M_{l+1}` sent by relay `l` on incoming id `m`; `decide[k-1][m *
/// |Y_k|^n + y_k]` the guess of center `k`.
#[derive(Debug, Clone)]
pub struct LevelTables {
    pub k: usize,
    pub n: usize,
    /// Distinct messages of hop `l` at `messages[l-1]`, indexed by id.
    pub messages: Vec<Vec<HopMessage>>,
    first: Vec<u32>,
    forward: Vec<Vec<u32>>,
    decide: Vec<Vec<u8>>,
    node_len: Vec<usize>,
}

fn intern(pool: &mut Vec<HopMessage>, ids: &mut HashMap<HopMessage, u32>, m: HopMessage) -> u32 {
    *ids.entry(m).or_insert_with(|| {
        pool.push(m);
        (pool.len() - 1) as u32
    })
}

impl LevelTables {
    /// Tabulate centers `1..=k` of `code`; only nodes `0..=k` are touched.
    pub fn build(code: &dyn HopCode, k: usize, space: &TupleSpace) -> Result<Self, DiagnosticsError> {
        if k == 0 || k > code.hops() {
            return Err(DiagnosticsError::NoSuchCenter { k, hops: code.hops() });
        }
        let n = space.n;
        let node_len: Vec<usize> = (0..=k).map(|l| space.node_len(l)).collect();
        let mut messages = Vec::with_capacity(k);
        let mut pool = Vec::new();
        let mut ids = HashMap::new();
        let mut first = Vec::with_capacity(node_len[0]);
        for y in 0..node_len[0] {
            let m = code.encode(0, None, &space.node_sequence(0, y))?;
            first.push(intern(&mut pool, &mut ids, m));
        }
        messages.push(pool);
        let mut forward = Vec::with_capacity(k - 1);
        for l in 1..k {
            let (mut pool, mut ids) = (Vec::new(), HashMap::new());
            let seqs: Vec<Vec<usize>> = (0..node_len[l]).map(|y| space.node_sequence(l, y)).collect();
            let mut table = Vec::with_capacity(messages[l - 1].len() * node_len[l]);
            for m in &messages[l - 1] {
                for y in &seqs {
                    table.push(intern(&mut pool, &mut ids, code.encode(l, Some(m), y)?));
                }
            }
            forward.push(table);
            messages.push(pool);
        }
        let mut decide = Vec::with_capacity(k);
        for c in 1..=k {
            let seqs: Vec<Vec<usize>> = (0..node_len[c]).map(|y| space.node_sequence(c, y)).collect();
            let mut table = Vec::with_capacity(messages[c - 1].len() * node_len[c]);
            for m in &messages[c - 1] {
                for y in &seqs {
                    table.push(code.decide(c, m, y)?);
                }
            }
            decide.push(table);
        }
        Ok(Self { k, n, messages, first, forward, decide, node_len })
    }

    /// Id of `M_l` for the tuple with node sequence indices `node`.
    pub fn message(&self, l: usize, node: &[usize]) -> u32 {
        let mut m = self.first[node[0]];
        for j in 1..l {
            m = self.forward[j - 1][m as usize * self.node_len[j] + node[j]];
        }
        m
    }

    /// Guess of center `c <= k`.
    pub fn guess(&self, c: usize, node: &[usize]) -> u8 {
        let m = self.message(c, node);
        self.decide[c - 1][m as usize * self.node_len[c] + node[c]]
    }
}

/// `A_k`: tuples on which center `k` guesses 0, for a concrete code at
/// blocklength `n`.
#[derive(Debug, Clone)]
pub struct AcceptanceRegion {
    pub k: usize,
    pub space: TupleSpace,
    pub tables: LevelTables,
    pub members: TupleSet,
}

impl AcceptanceRegion {
    pub fn cardinality(&self) -> usize {
        self.members.count()
    }

    pub fn contains(&self, seqs: &[&[usize]]) -> bool {
        let mut index = 0;
        for t in 0..self.space.n {
            let mut a = 0;
            for (l, s) in seqs.iter().enumerate() {
                a = a * self.space.sizes[l] + s[t];
            }
            index = index * self.space.joint + a;
        }
        self.members.contains(index)
    }
}

/// Exact acceptance region of center `k` over all tuples of nodes `0..=k`,
/// refused above `cap` tuples.
pub fn enumerate_region(code: &dyn HopCode, k: usize, cap: u64) -> Result<AcceptanceRegion, DiagnosticsError> {
    if k == 0 || k > code.hops() {
        return Err(DiagnosticsError::NoSuchCenter { k, hops: code.hops() });
    }
    let sizes: Vec<usize> = (0..=k).map(|l| code.alphabet_size(l)).collect();
    let space = TupleSpace::new(&sizes, code.blocklength(), cap)?;
    let tables = LevelTables::build(code, k, &space)?;
    let mut members = TupleSet::empty(space.len());
    space.walk(
        |v| {
            if tables.guess(k, v.node) == 0 {
                members.insert(v.index);
            }
        },
        |_| {},
    );
    Ok(AcceptanceRegion { k, space, tables, members })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probcore::DEFAULT_ENUMERATION_CAP;
    use crate::schemes::{ConstantCode, IdentityCode};

    #[test]
    fn walk_matches_direct_indexing() {
        let s = TupleSpace::new(&[2, 3], 3, 1 << 20).unwrap();
        let mut seen = 0;
        s.walk(
            |v| {
                assert_eq!(v.index, seen);
                let mut idx = 0;
                for &a in v.symbols {
                    idx = idx * s.joint + a;
                }
                assert_eq!(idx, v.index);
                for l in 0..2 {
                    let seq: Vec<usize> = v.symbols.iter().map(|&a| s.digit(a, l)).collect();
                    assert_eq!(s.node_sequence(l, v.node[l]), seq);
                }
                assert_eq!(v.counts.iter().sum::<u64>(), 3);
                seen += 1;
            },
            |_| {},
        );
        assert_eq!(seen, 216);
    }

    #[test]
    fn degenerate_deciders() {
        let g0 = ConstantCode { sizes: vec![2, 2, 2], n: 3, guess: 0 };
        let g1 = ConstantCode { sizes: vec![2, 2, 2], n: 3, guess: 1 };
        let r = enumerate_region(&g0, 2, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(r.cardinality(), 512);
        assert_eq!(enumerate_region(&g1, 1, DEFAULT_ENUMERATION_CAP).unwrap().cardinality(), 0);
        let id = IdentityCode { sizes: vec![2, 2], n: 2 };
        let r = enumerate_region(&id, 1, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(r.tables.messages[0].len(), 4);
        assert!(r.contains(&[&[1, 0], &[0, 1]]));
    }

    #[test]
    fn cap_and_center_checks() {
        let g0 = ConstantCode { sizes: vec![2, 2, 2], n: 9, guess: 0 };
        assert!(matches!(enumerate_region(&g0, 2, 1 << 24), Err(DiagnosticsError::CapExceeded { .. })));
        assert!(matches!(enumerate_region(&g0, 3, 1 << 24), Err(DiagnosticsError::NoSuchCenter { k: 3, hops: 2 })));
    }
}
