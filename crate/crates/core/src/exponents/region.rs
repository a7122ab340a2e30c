use super::eta::EtaCurve;
use crate::error::ExponentError;
use crate::schemes::HopNetworkSpec;

/// Outer bounds `theta_k^max = sum_{l <= k} eta_l(R_l)` for every center.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentRegion {
    pub k: usize,
    pub rates: Vec<f64>,
    /// `eta_l(R_l)` per hop.
    pub hop_values: Vec<f64>,
    pub bounds: Vec<f64>,
}

impl ExponentRegion {
    pub fn bound(&self, k: usize) -> f64 {
        self.bounds[k - 1]
    }
}

/// Region of the network from one curve per hop (in hop order).
pub fn exponent_region(spec: &HopNetworkSpec, curves: &[EtaCurve]) -> Result<ExponentRegion, ExponentError> {
    region_for_rates(spec.rates(), curves)
}

pub fn region_for_rates(rates: &[f64], curves: &[EtaCurve]) -> Result<ExponentRegion, ExponentError> {
    if curves.len() != rates.len() {
        return Err(ExponentError::CurveCountMismatch { expected: rates.len(), got: curves.len() });
    }
    let mut hop_values = Vec::with_capacity(rates.len());
    for (i, (c, &r)) in curves.iter().zip(rates).enumerate() {
        if c.hop_index != 0 && c.hop_index != i + 1 {
            return Err(ExponentError::CurveHopMismatch { position: i + 1, hop: c.hop_index });
        }
        hop_values.push(c.value_at(r)?);
    }
    let mut acc = 0.0;
    let bounds = hop_values
        .iter()
        .map(|v| {
            acc += v;
            acc
        })
        .collect();
    Ok(ExponentRegion { k: rates.len(), rates: rates.to_vec(), hop_values, bounds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::{EtaCurve, SolverOptions};
    use crate::probcore::{mutual_information, JointPmf};

    fn curves(spec: &HopNetworkSpec, rates: &[f64]) -> Vec<EtaCurve> {
        (1..=spec.hops())
            .map(|l| EtaCurve::tabulate(&spec.hop_pair(l).unwrap(), l, rates, 3, &SolverOptions::default()).unwrap())
            .collect()
    }

    #[test]
    fn zero_rates() {
        let spec = HopNetworkSpec::dsbs_chain(&[0.1, 0.2], vec![0.0, 0.0], vec![0.1, 0.1]).unwrap();
        let r = exponent_region(&spec, &curves(&spec, &[0.0, 1.0])).unwrap();
        assert_eq!(r.bounds, vec![0.0, 0.0]);
    }

    #[test]
    fn saturated_hops() {
        let spec = HopNetworkSpec::dsbs_chain(&[0.1, 0.2], vec![1.0, 2.0], vec![0.1, 0.1]).unwrap();
        let r = exponent_region(&spec, &curves(&spec, &[0.0, 1.0])).unwrap();
        let i1 = mutual_information(&JointPmf::dsbs(0.1).unwrap(), &[0], &[1]).unwrap();
        let i2 = mutual_information(&JointPmf::dsbs(0.2).unwrap(), &[0], &[1]).unwrap();
        assert!((r.bound(1) - i1).abs() < 1e-9);
        assert!((r.bound(2) - i1 - i2).abs() < 1e-9);
    }

    #[test]
    fn mismatched_curves() {
        let spec = HopNetworkSpec::dsbs_chain(&[0.1, 0.2], vec![0.5, 0.5], vec![0.1, 0.1]).unwrap();
        let c = curves(&spec, &[0.0, 1.0]);
        assert!(matches!(exponent_region(&spec, &c[..1]), Err(ExponentError::CurveCountMismatch { .. })));
        let swapped = vec![c[1].clone(), c[0].clone()];
        assert!(matches!(exponent_region(&spec, &swapped), Err(ExponentError::CurveHopMismatch { .. })));
    }
}
