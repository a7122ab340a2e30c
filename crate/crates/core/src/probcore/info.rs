//! Entropies, mutual informations and divergences, all in bits.
//!
//! Conventions: `0 log 0 = 0` and `p log(p/0) = +inf`.

use super::pmf::{stable_sum, validate_axes, JointPmf};
use crate::error::ProbError;

/// `-p log2 p`, zero at `p = 0`.
#[inline]
pub fn neg_plogp(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

/// Binary entropy function in bits.
pub fn binary_entropy(p: f64) -> f64 {
    neg_plogp(p) + neg_plogp(1.0 - p)
}

/// Binary convolution `a * b = a(1-b) + b(1-a)`.
pub fn binary_convolution(a: f64, b: f64) -> f64 {
    a * (1.0 - b) + b * (1.0 - a)
}

/// Inverse of the binary entropy on `[0, 1/2]`.
pub fn binary_entropy_inverse(h: f64) -> f64 {
    if h <= 0.0 {
        return 0.0;
    }
    if h >= 1.0 {
        return 0.5;
    }
    let (mut lo, mut hi) = (0.0_f64, 0.5_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if binary_entropy(mid) < h {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Entropy of an unnormalized-safe probability slice.
pub fn entropy_of(mass: &[f64]) -> f64 {
    stable_sum(mass.iter().map(|&p| neg_plogp(p)))
}

pub fn entropy(p: &JointPmf) -> f64 {
    entropy_of(p.mass())
}

fn union(sets: &[&[usize]], rank: usize) -> Result<Vec<usize>, ProbError> {
    let mut all = Vec::new();
    for s in sets {
        validate_axes(s, rank)?;
        all.extend_from_slice(s);
    }
    validate_axes(&all, rank)?;
    Ok(all)
}

fn marginal_entropy(p: &JointPmf, axes: &[usize]) -> Result<f64, ProbError> {
    Ok(entropy(&p.marginalize(axes)?))
}

/// `H(target | given) = H(target, given) - H(given)`.
pub fn conditional_entropy(p: &JointPmf, target: &[usize], given: &[usize]) -> Result<f64, ProbError> {
    if given.is_empty() {
        validate_axes(target, p.rank())?;
        return marginal_entropy(p, target);
    }
    let all = union(&[target, given], p.rank())?;
    let h = marginal_entropy(p, &all)? - marginal_entropy(p, given)?;
    Ok(h.max(0.0))
}

/// `I(a; b) = H(a) + H(b) - H(a, b)`.
pub fn mutual_information(p: &JointPmf, a: &[usize], b: &[usize]) -> Result<f64, ProbError> {
    let all = union(&[a, b], p.rank())?;
    let i = marginal_entropy(p, a)? + marginal_entropy(p, b)? - marginal_entropy(p, &all)?;
    Ok(i.max(0.0))
}

/// `I(a; b | c) = H(a, c) + H(b, c) - H(a, b, c) - H(c)`. An empty `c`
/// reduces to [`mutual_information`].
pub fn conditional_mutual_information(p: &JointPmf, a: &[usize], b: &[usize], c: &[usize]) -> Result<f64, ProbError> {
    if c.is_empty() {
        return mutual_information(p, a, b);
    }
    let abc = union(&[a, b, c], p.rank())?;
    let ac = union(&[a, c], p.rank())?;
    let bc = union(&[b, c], p.rank())?;
    let i = marginal_entropy(p, &ac)? + marginal_entropy(p, &bc)? - marginal_entropy(p, &abc)? - marginal_entropy(p, c)?;
    Ok(i.max(0.0))
}

/// `sum p log2(p / q)` over aligned slices; `+inf` when `p` charges a zero
/// of `q`.
pub fn kl_divergence_slices(p: &[f64], q: &[f64]) -> f64 {
    let mut terms = Vec::with_capacity(p.len());
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b <= 0.0 {
                return f64::INFINITY;
            }
            terms.push(a * (a / b).log2());
        }
    }
    stable_sum(terms).max(0.0)
}

pub fn kl_divergence(p: &JointPmf, q: &JointPmf) -> Result<f64, ProbError> {
    if p.shape() != q.shape() {
        return Err(ProbError::ShapeMismatch { expected: p.len(), got: q.len() });
    }
    Ok(kl_divergence_slices(p.mass(), q.mass()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probcore::pmf::ConditionalPmf;
    use crate::probcore::Alphabet;
    use approx::assert_abs_diff_eq;

    fn h(p: f64) -> f64 {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }

    #[test]
    fn entropy_anchors() {
        let point = JointPmf::from_shape(&[3], vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(entropy(&point), 0.0);
        let uni = JointPmf::from_shape(&[4], vec![0.25; 4]).unwrap();
        assert_abs_diff_eq!(entropy(&uni), 2.0, epsilon = 1e-15);
        let b = JointPmf::bernoulli(0.1).unwrap();
        assert_abs_diff_eq!(entropy(&b), 0.4690, epsilon = 1e-4);
        assert_abs_diff_eq!(entropy(&b), h(0.1), epsilon = 1e-15);
    }

    #[test]
    fn conditional_entropy_anchors() {
        let x = JointPmf::from_shape(&[2], vec![0.3, 0.7]).unwrap();
        let y = JointPmf::from_shape(&[3], vec![0.2, 0.2, 0.6]).unwrap();
        let xy = x.product(&y);
        assert_abs_diff_eq!(conditional_entropy(&xy, &[0], &[1]).unwrap(), entropy(&x), epsilon = 1e-12);
        let same = JointPmf::from_shape(&[2, 2], vec![0.4, 0.0, 0.0, 0.6]).unwrap();
        assert_abs_diff_eq!(conditional_entropy(&same, &[0], &[1]).unwrap(), 0.0, epsilon = 1e-15);
        let d = JointPmf::dsbs(0.1).unwrap();
        assert_abs_diff_eq!(conditional_entropy(&d, &[0], &[1]).unwrap(), 0.4690, epsilon = 1e-4);
        assert!(matches!(conditional_entropy(&d, &[0], &[0]), Err(ProbError::OverlappingAxes { axis: 0 })));
    }

    #[test]
    fn mutual_information_anchors() {
        let x = JointPmf::from_shape(&[2], vec![0.3, 0.7]).unwrap();
        assert_abs_diff_eq!(mutual_information(&x.product(&x), &[0], &[1]).unwrap(), 0.0, epsilon = 1e-15);
        let copy = JointPmf::from_shape(&[2, 2], vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert_abs_diff_eq!(mutual_information(&copy, &[0], &[1]).unwrap(), 1.0, epsilon = 1e-15);
        let d = JointPmf::dsbs(0.1).unwrap();
        assert_abs_diff_eq!(mutual_information(&d, &[0], &[1]).unwrap(), 0.5310, epsilon = 1e-4);
        assert!(mutual_information(&d, &[1], &[1]).is_err());
    }

    #[test]
    fn cmi_of_markov_chain_vanishes() {
        let u = JointPmf::from_shape(&[3], vec![0.2, 0.5, 0.3]).unwrap();
        let k1 = ConditionalPmf::from_matrix(
            Alphabet::indexed("U", 3).unwrap(),
            Alphabet::binary("Y0"),
            vec![0.9, 0.1, 0.4, 0.6, 0.2, 0.8],
        )
        .unwrap();
        let k2 = ConditionalPmf::bsc(0.15, "Y0", "Y1");
        let uy0 = k1.joint_with(&u).unwrap();
        let uy0y1 = k2.extend(&uy0, &[1]).unwrap();
        let cmi = conditional_mutual_information(&uy0y1, &[0], &[2], &[1]).unwrap();
        assert_abs_diff_eq!(cmi, 0.0, epsilon = 1e-10);
        // data processing
        let i0 = mutual_information(&uy0y1, &[0], &[1]).unwrap();
        let i1 = mutual_information(&uy0y1, &[0], &[2]).unwrap();
        assert!(i1 <= i0 + 1e-10);
    }

    #[test]
    fn cmi_with_constant_condition_is_mi() {
        let p = JointPmf::from_shape(&[2, 2, 1], vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let cmi = conditional_mutual_information(&p, &[0], &[1], &[2]).unwrap();
        let mi = mutual_information(&p, &[0], &[1]).unwrap();
        assert_abs_diff_eq!(cmi, mi, epsilon = 1e-10);
    }

    #[test]
    fn cmi_matches_direct_definition() {
        let mass = [0.05, 0.15, 0.1, 0.2, 0.12, 0.08, 0.18, 0.12];
        let p = JointPmf::from_shape(&[2, 2, 2], mass.to_vec()).unwrap();
        // I(A;B|C) = sum p(abc) log p(abc)p(c) / (p(ac)p(bc)), evaluated independently
        let mut direct = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    let pabc = mass[a * 4 + b * 2 + c];
                    let pc: f64 = (0..4).map(|i| mass[i * 2 + c]).sum();
                    let pac: f64 = (0..2).map(|bb| mass[a * 4 + bb * 2 + c]).sum();
                    let pbc: f64 = (0..2).map(|aa| mass[aa * 4 + b * 2 + c]).sum();
                    direct += pabc * (pabc * pc / (pac * pbc)).log2();
                }
            }
        }
        let cmi = conditional_mutual_information(&p, &[0], &[1], &[2]).unwrap();
        assert_abs_diff_eq!(cmi, direct, epsilon = 1e-10);
    }

    #[test]
    fn kl_anchors() {
        let p = JointPmf::bernoulli(0.5).unwrap();
        let q = JointPmf::bernoulli(0.25).unwrap();
        assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
        assert_abs_diff_eq!(kl_divergence(&p, &q).unwrap(), 0.2075, epsilon = 1e-4);
        let z = JointPmf::bernoulli(0.0).unwrap();
        assert_eq!(kl_divergence(&p, &z).unwrap(), f64::INFINITY);
        let other = JointPmf::from_shape(&[3], vec![0.2, 0.3, 0.5]).unwrap();
        assert!(kl_divergence(&p, &other).is_err());
    }

    #[test]
    fn binary_entropy_inverse_roundtrip() {
        for &q in &[0.01, 0.11, 0.3, 0.5] {
            assert_abs_diff_eq!(binary_entropy_inverse(binary_entropy(q)), q, epsilon = 1e-12);
        }
    }
}
