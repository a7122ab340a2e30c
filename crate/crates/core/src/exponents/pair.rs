//! Dense view of a two-axis pmf `P_{XY}` used by the solvers: the marginal
//! of `X`, the kernel `P_{Y|X}` and helpers for evaluating test channels
//! `P_{U|X}` given as `|X| x |U|` row-major matrices.

use crate::error::ExponentError;
use crate::probcore::{entropy_of, JointPmf};

#[derive(Debug, Clone)]
pub(crate) struct PairModel {
    pub px: Vec<f64>,
    pub py: Vec<f64>,
    /// `w[x * ny + y] = P(y | x)`
    pub w: Vec<f64>,
    pub nx: usize,
    pub ny: usize,
    pub hx: f64,
    pub hy: f64,
}

impl PairModel {
    pub fn new(pair: &JointPmf) -> Result<Self, ExponentError> {
        if pair.rank() != 2 {
            return Err(ExponentError::NotAPair { rank: pair.rank() });
        }
        let shape = pair.shape();
        let (nx, ny) = (shape[0], shape[1]);
        let px = pair.marginalize(&[0])?.mass().to_vec();
        let py = pair.marginalize(&[1])?.mass().to_vec();
        let mut w = pair.mass().to_vec();
        for x in 0..nx {
            let row = &mut w[x * ny..(x + 1) * ny];
            if px[x] > 0.0 {
                row.iter_mut().for_each(|v| *v /= px[x]);
            } else {
                row.copy_from_slice(&py);
            }
        }
        let hx = entropy_of(&px);
        let hy = entropy_of(&py);
        Ok(Self { px, py, w, nx, ny, hx, hy })
    }

    pub fn mutual_information(&self) -> f64 {
        let mut joint = Vec::with_capacity(self.nx * self.ny);
        for x in 0..self.nx {
            joint.extend(self.w[x * self.ny..(x + 1) * self.ny].iter().map(|v| v * self.px[x]));
        }
        (self.hx + self.hy - entropy_of(&joint)).max(0.0)
    }

    /// `U`-marginal of a channel.
    pub fn pu(&self, q: &[f64], nu: usize) -> Vec<f64> {
        let mut pu = vec![0.0; nu];
        for x in 0..self.nx {
            for u in 0..nu {
                pu[u] += self.px[x] * q[x * nu + u];
            }
        }
        pu
    }

    /// `(I(U;X), I(U;Y))` in bits for the channel `q`.
    pub fn evaluate(&self, q: &[f64], nu: usize) -> (f64, f64) {
        let pu = self.pu(q, nu);
        let hu = entropy_of(&pu);
        let mut hu_x = 0.0;
        for x in 0..self.nx {
            if self.px[x] > 0.0 {
                hu_x += self.px[x] * entropy_of(&q[x * nu..(x + 1) * nu]);
            }
        }
        let mut puy = vec![0.0; nu * self.ny];
        for x in 0..self.nx {
            let px = self.px[x];
            if px == 0.0 {
                continue;
            }
            for u in 0..nu {
                let m = px * q[x * nu + u];
                if m == 0.0 {
                    continue;
                }
                for y in 0..self.ny {
                    puy[u * self.ny + y] += m * self.w[x * self.ny + y];
                }
            }
        }
        let rate = (hu - hu_x).max(0.0);
        // I(U;Y) <= I(U;X) holds exactly; rounding can push it a few ulps over
        let value = (hu + self.hy - entropy_of(&puy)).clamp(0.0, rate);
        (rate, value)
    }

    /// Classes of `x` (with positive mass) sharing the same row of
    /// `P_{Y|X}`; returns the class index of every `x` and the class count.
    pub fn sufficient_classes(&self) -> (Vec<usize>, usize) {
        let mut reps: Vec<usize> = Vec::new();
        let mut class = vec![0usize; self.nx];
        for x in 0..self.nx {
            if self.px[x] == 0.0 {
                continue;
            }
            let row = &self.w[x * self.ny..(x + 1) * self.ny];
            let found = reps.iter().position(|&r| {
                self.w[r * self.ny..(r + 1) * self.ny].iter().zip(row).all(|(a, b)| (a - b).abs() <= 1e-12)
            });
            class[x] = match found {
                Some(c) => c,
                None => {
                    reps.push(x);
                    reps.len() - 1
                }
            };
        }
        (class, reps.len().max(1))
    }
}
