//! Brute-force reference for `eta`: every channel on a uniform simplex grid.
//!
//! Only nested grids (e.g. 50, 100, 200 steps) are guaranteed to give
//! nondecreasing results; unrelated step counts sample different channels.

use super::pair::PairModel;
use crate::error::ExponentError;
use crate::probcore::{neg_plogp, JointPmf};

/// Evaluation budget above which the oracle refuses to run.
pub const ORACLE_EVALUATION_LIMIT: f64 = 2e9;

/// Grid maximum of `I(U;Y_l)` subject to `I(U;Y_{l-1}) <= rate`, with
/// `|U| = min(|Y_{l-1}| + 1, 4)`.
pub fn eta_oracle(pair: &JointPmf, rate: f64, grid_steps: usize) -> Result<f64, ExponentError> {
    let aux = (pair.shape().first().copied().unwrap_or(1) + 1).min(4);
    Ok(eta_oracle_many(pair, &[rate], grid_steps, aux)?[0])
}

/// Oracle values for several rates from a single pass over the grid.
pub fn eta_oracle_many(pair: &JointPmf, rates: &[f64], grid_steps: usize, aux_card: usize) -> Result<Vec<f64>, ExponentError> {
    for &r in rates {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(ExponentError::NegativeRate { rate: r });
        }
    }
    if aux_card == 0 {
        return Err(ExponentError::ZeroAuxCardinality);
    }
    if grid_steps == 0 {
        return Err(ExponentError::ZeroGridSteps);
    }
    let model = PairModel::new(pair)?;
    let (nx, ny, nu) = (model.nx, model.ny, aux_card);
    if nx > 3 || nu > 4 {
        return Err(ExponentError::OracleTooLarge { alphabet: nx, aux: nu });
    }

    let comps = compositions(grid_steps, nu);
    // relabeling U lets the first row be sorted in decreasing order
    let canon: Vec<usize> = (0..comps.len()).filter(|&i| comps[i].windows(2).all(|w| w[0] >= w[1])).collect();
    let evaluations = canon.len() as f64 * (comps.len() as f64).powi(nx as i32 - 1);
    if evaluations > ORACLE_EVALUATION_LIMIT {
        return Err(ExponentError::OracleGridTooLarge { evaluations, limit: ORACLE_EVALUATION_LIMIT });
    }
    let scale = grid_steps as f64;
    let rows: Vec<[f64; 4]> = comps
        .iter()
        .map(|c| {
            let mut r = [0.0; 4];
            for u in 0..nu {
                r[u] = c[u] as f64 / scale;
            }
            r
        })
        .collect();
    let row_entropy: Vec<f64> = rows.iter().map(|r| r.iter().map(|&p| neg_plogp(p)).sum()).collect();

    let mut best = vec![0.0_f64; rates.len()];
    let rate_cap = rates.iter().copied().fold(0.0, f64::max) + 1e-12;
    let mut chosen = [0usize; 3];
    let total = comps.len();
    let inner = total.pow(nx as u32 - 1);
    for &first in &canon {
        chosen[0] = first;
        for rest in 0..inner {
            let mut k = rest;
            for slot in chosen.iter_mut().take(nx).skip(1) {
                *slot = k % total;
                k /= total;
            }
            let mut pu = [0.0; 4];
            let mut hux = 0.0;
            for x in 0..nx {
                let r = &rows[chosen[x]];
                for u in 0..nu {
                    pu[u] += model.px[x] * r[u];
                }
                hux += model.px[x] * row_entropy[chosen[x]];
            }
            let hu: f64 = pu[..nu].iter().map(|&p| neg_plogp(p)).sum();
            let rate = hu - hux;
            if rate > rate_cap {
                continue;
            }
            let mut huy = 0.0;
            for u in 0..nu {
                if pu[u] == 0.0 {
                    continue;
                }
                for y in 0..ny {
                    let mut m = 0.0;
                    for x in 0..nx {
                        m += model.px[x] * rows[chosen[x]][u] * model.w[x * ny + y];
                    }
                    huy += neg_plogp(m);
                }
            }
            let value = (hu + model.hy - huy).clamp(0.0, rate.max(0.0));
            for (b, &r) in best.iter_mut().zip(rates) {
                if rate <= r + 1e-12 && value > *b {
                    *b = value;
                }
            }
        }
    }
    // only channels with I(U;Y_{l-1}) = 0 are feasible at rate 0
    for (b, &r) in best.iter_mut().zip(rates) {
        if r == 0.0 {
            *b = 0.0;
        }
    }
    Ok(best)
}

/// All ways of writing `total` as an ordered sum of `parts` nonnegative
/// integers.
pub(crate) fn compositions(total: usize, parts: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; parts];
    fn rec(i: usize, left: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i + 1 == cur.len() {
            cur[i] = left as u32;
            out.push(cur.clone());
            return;
        }
        for v in (0..=left).rev() {
            cur[i] = v as u32;
            rec(i + 1, left - v, cur, out);
        }
    }
    rec(0, total, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probcore::{binary_convolution, binary_entropy, binary_entropy_inverse};

    #[test]
    fn composition_count() {
        assert_eq!(compositions(4, 3).len(), 15);
        assert_eq!(compositions(3, 1), vec![vec![3]]);
    }

    #[test]
    fn zero_rate_and_independence() {
        let p = JointPmf::dsbs(0.1).unwrap();
        assert_eq!(eta_oracle(&p, 0.0, 40).unwrap(), 0.0);
        let x = JointPmf::from_shape(&[2], vec![0.3, 0.7]).unwrap();
        let y = JointPmf::from_shape(&[3], vec![0.2, 0.2, 0.6]).unwrap();
        assert!(eta_oracle(&x.product(&y), 0.5, 40).unwrap().abs() < 1e-9);
    }

    #[test]
    fn nested_grids_are_monotone() {
        let p = JointPmf::dsbs(0.2).unwrap();
        let a = eta_oracle_many(&p, &[0.3, 0.6], 20, 3).unwrap();
        let b = eta_oracle_many(&p, &[0.3, 0.6], 40, 3).unwrap();
        let c = eta_oracle_many(&p, &[0.3, 0.6], 80, 3).unwrap();
        for i in 0..2 {
            assert!(a[i] <= b[i] && b[i] <= c[i]);
        }
    }

    #[test]
    fn close_to_closed_form() {
        let p = JointPmf::dsbs(0.1).unwrap();
        let v = eta_oracle_many(&p, &[0.5], 100, 3).unwrap()[0];
        let q = binary_entropy_inverse(0.5);
        let exact = 1.0 - binary_entropy(binary_convolution(0.1, q));
        assert!(v <= exact + 1e-9 && v > exact - 5e-3, "{v} vs {exact}");
    }

    #[test]
    fn refuses_large_instances() {
        let p = JointPmf::from_shape(&[4, 2], vec![0.125; 8]).unwrap();
        assert!(matches!(eta_oracle(&p, 0.5, 10), Err(ExponentError::OracleTooLarge { .. })));
        let p = JointPmf::from_shape(&[3, 2], vec![1.0 / 6.0; 6]).unwrap();
        assert!(matches!(
            eta_oracle_many(&p, &[0.5], 200, 4),
            Err(ExponentError::OracleGridTooLarge { .. })
        ));
        assert!(matches!(eta_oracle(&JointPmf::dsbs(0.1).unwrap(), 0.5, 0), Err(ExponentError::ZeroGridSteps)));
    }
}
