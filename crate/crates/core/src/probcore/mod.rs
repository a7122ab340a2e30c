//! Exact finite-alphabet probability kernel: pmfs, kernels, information
//! measures and strong typicality.

mod alphabet;
mod iid;
mod info;
mod pmf;
mod typical;

pub use alphabet::Alphabet;
pub use iid::{IidMeasure, DEFAULT_ENUMERATION_CAP};
pub use info::{
    binary_convolution, binary_entropy, binary_entropy_inverse, conditional_entropy, conditional_mutual_information,
    entropy, entropy_of, kl_divergence, kl_divergence_slices, mutual_information, neg_plogp,
};
pub use pmf::{ConditionalPmf, JointPmf, NORMALIZATION_TOL};
pub use typical::{default_slack, is_strongly_typical, typicality_deviation, EmpiricalType};

#[cfg(test)]
mod properties {
    use super::*;
    use proptest::prelude::*;

    fn pmf_strategy(shape: Vec<usize>) -> impl Strategy<Value = JointPmf> {
        let len: usize = shape.iter().product();
        proptest::collection::vec(0.0f64..1.0, len).prop_map(move |w| {
            let w: Vec<f64> = w.into_iter().map(|x| if x < 0.15 { 0.0 } else { x }).collect();
            let s: f64 = w.iter().sum();
            let mass = if s == 0.0 { vec![1.0 / len as f64; len] } else { w.iter().map(|x| x / s).collect() };
            // the division can leave the sum a few ulps from 1
            let fix: f64 = mass.iter().sum::<f64>() - 1.0;
            let mut mass = mass;
            let i = mass.iter().position(|&x| x > fix.abs()).unwrap();
            mass[i] -= fix;
            JointPmf::from_shape(&shape, mass).unwrap()
        })
    }

    proptest! {
        #[test]
        fn chain_rule(p in pmf_strategy(vec![2, 3, 2]), split in 1usize..3) {
            let a: Vec<usize> = (0..split).collect();
            let b: Vec<usize> = (split..3).collect();
            let hab = entropy(&p);
            let ha = entropy(&p.marginalize(&a).unwrap());
            let hb_a = conditional_entropy(&p, &b, &a).unwrap();
            prop_assert!((hab - ha - hb_a).abs() < 1e-10);
        }

        #[test]
        fn nonnegativity(p in pmf_strategy(vec![2, 2, 3]), q in pmf_strategy(vec![2, 2, 3])) {
            prop_assert!(entropy(&p) >= -1e-12);
            prop_assert!(mutual_information(&p, &[0], &[1, 2]).unwrap() >= -1e-12);
            prop_assert!(conditional_mutual_information(&p, &[0], &[2], &[1]).unwrap() >= -1e-12);
            prop_assert!(kl_divergence(&p, &q).unwrap() >= -1e-12);
            prop_assert!(kl_divergence(&p, &p).unwrap().abs() < 1e-12);
        }

        #[test]
        fn mi_is_symmetric(p in pmf_strategy(vec![3, 2, 2])) {
            let ab = mutual_information(&p, &[0], &[1, 2]).unwrap();
            let ba = mutual_information(&p, &[1, 2], &[0]).unwrap();
            prop_assert!((ab - ba).abs() < 1e-12);
        }

        #[test]
        fn data_processing(u in pmf_strategy(vec![3]), k1 in pmf_strategy(vec![3, 2]), k2 in pmf_strategy(vec![2, 2])) {
            let c1 = k1.conditional(&[1], &[0]).unwrap();
            let c2 = k2.conditional(&[1], &[0]).unwrap();
            let joint = c2.extend(&c1.joint_with(&u).unwrap(), &[1]).unwrap();
            let i0 = mutual_information(&joint, &[0], &[1]).unwrap();
            let i1 = mutual_information(&joint, &[0], &[2]).unwrap();
            prop_assert!(i1 <= i0 + 1e-10);
            prop_assert!(conditional_mutual_information(&joint, &[0], &[2], &[1]).unwrap() < 1e-10);
        }
    }
}
