use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::eta::{channel_from, SolverOptions};
use super::pair::PairModel;
use crate::error::ExponentError;
use crate::probcore::{conditional_entropy, ConditionalPmf, JointPmf};

/// Reconstruction maps are enumerated exhaustively up to this many.
pub const MAP_ENUMERATION_LIMIT: f64 = 1e6;

/// Per-symbol distortion `d(x, z)` and the allowed average `D`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistortionSpec {
    /// Row-major `|X| x |Z|` table.
    pub table: Vec<f64>,
    pub z_card: usize,
    pub max_distortion: f64,
}

impl DistortionSpec {
    pub fn new(table: Vec<f64>, z_card: usize, max_distortion: f64) -> Result<Self, ExponentError> {
        if z_card == 0 || table.len() % z_card != 0 {
            return Err(ExponentError::DistortionShape { expected: z_card.max(1), got: table.len() });
        }
        if table.iter().any(|d| !(*d >= 0.0) || !d.is_finite()) || !(max_distortion >= 0.0) || !max_distortion.is_finite() {
            return Err(ExponentError::InvalidDistortion);
        }
        Ok(Self { table, z_card, max_distortion })
    }

    /// Hamming distortion on a `size`-ary alphabet with `Z = X`.
    pub fn hamming(size: usize, max_distortion: f64) -> Result<Self, ExponentError> {
        let table = (0..size * size).map(|i| if i / size == i % size { 0.0 } else { 1.0 }).collect();
        Self::new(table, size, max_distortion)
    }

    pub fn x_card(&self) -> usize {
        self.table.len() / self.z_card
    }

    pub fn d(&self, x: usize, z: usize) -> f64 {
        self.table[x * self.z_card + z]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WynerZivSolution {
    /// `min I(X;S|Y)` in bits.
    pub rate: f64,
    pub test_channel: ConditionalPmf,
    /// `reconstruction[s * |Y| + y] = g(s, y)`.
    pub reconstruction: Vec<usize>,
    pub y_card: usize,
    pub achieved_distortion: f64,
}

impl WynerZivSolution {
    pub fn g(&self, s: usize, y: usize) -> usize {
        self.reconstruction[s * self.y_card + y]
    }
}

/// `H(X|Y)`, the smallest lossless rate with side information at the decoder.
pub fn lossless_bound(p_xy: &JointPmf) -> Result<f64, ExponentError> {
    if p_xy.rank() != 2 {
        return Err(ExponentError::NotAPair { rank: p_xy.rank() });
    }
    Ok(conditional_entropy(p_xy, &[0], &[1])?)
}

struct Problem<'a> {
    model: PairModel,
    dist: &'a DistortionSpec,
    ns: usize,
}

impl Problem<'_> {
    fn pxy(&self, x: usize, y: usize) -> f64 {
        self.model.px[x] * self.model.w[x * self.model.ny + y]
    }

    /// `(I(X;S|Y) in bits, E d(X, g(S,Y)))` for channel `c[x * ns + s]`.
    fn evaluate(&self, c: &[f64], g: &[usize]) -> (f64, f64) {
        let (nx, ny, ns) = (self.model.nx, self.model.ny, self.ns);
        let mut rate = 0.0;
        let mut dist = 0.0;
        for y in 0..ny {
            let py = self.model.py[y];
            if py == 0.0 {
                continue;
            }
            let mut qsy = vec![0.0; ns];
            for x in 0..nx {
                let pxy = self.pxy(x, y);
                for s in 0..ns {
                    qsy[s] += pxy * c[x * ns + s] / py;
                }
            }
            for x in 0..nx {
                let pxy = self.pxy(x, y);
                if pxy == 0.0 {
                    continue;
                }
                for s in 0..ns {
                    let cs = c[x * ns + s];
                    if cs > 0.0 {
                        rate += pxy * cs * (cs / qsy[s]).log2();
                        dist += pxy * cs * self.dist.d(x, g[s * ny + y]);
                    }
                }
            }
        }
        (rate.max(0.0), dist)
    }

    /// Smallest distortion any channel can reach with map `g`.
    fn min_distortion(&self, g: &[usize]) -> f64 {
        let (nx, ny) = (self.model.nx, self.model.ny);
        (0..nx)
            .map(|x| {
                (0..self.ns)
                    .map(|s| (0..ny).map(|y| self.pxy(x, y) * self.dist.d(x, g[s * ny + y])).sum::<f64>())
                    .fold(f64::INFINITY, f64::min)
            })
            .sum()
    }

    /// Alternating minimization of `I(X;S|Y) + lambda E d` (nats) for a
    /// fixed map; the problem is jointly convex in `(P_{S|X}, Q_{S|Y})`.
    fn alternate(&self, g: &[usize], lambda: f64, init: &[f64], opts: &SolverOptions) -> Vec<f64> {
        let (nx, ny, ns) = (self.model.nx, self.model.ny, self.ns);
        let mut c = init.to_vec();
        let mut prev = f64::INFINITY;
        let mut logq = vec![0.0; ny * ns];
        for _ in 0..opts.max_iter {
            for y in 0..ny {
                let py = self.model.py[y];
                for s in 0..ns {
                    let q: f64 = if py > 0.0 { (0..nx).map(|x| self.pxy(x, y) * c[x * ns + s]).sum::<f64>() / py } else { 0.0 };
                    logq[y * ns + s] = if q > 0.0 { q.ln() } else { f64::NEG_INFINITY };
                }
            }
            for x in 0..nx {
                let mut e = vec![0.0; ns];
                for (s, es) in e.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for y in 0..ny {
                        let w = self.model.w[x * ny + y];
                        if w > 0.0 {
                            acc += w * (logq[y * ns + s] - lambda * self.dist.d(x, g[s * ny + y]));
                        }
                    }
                    *es = acc;
                }
                let m = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let row = &mut c[x * ns..(x + 1) * ns];
                if m == f64::NEG_INFINITY {
                    continue;
                }
                let mut sum = 0.0;
                for s in 0..ns {
                    row[s] = (e[s] - m).exp();
                    sum += row[s];
                }
                row.iter_mut().for_each(|v| *v /= sum);
            }
            let (r, d) = self.evaluate(&c, g);
            let obj = r * std::f64::consts::LN_2 + lambda * d;
            if (prev - obj).abs() < 1e-13 {
                break;
            }
            prev = obj;
        }
        c
    }

    /// Lowest rate for map `g` meeting the distortion target, by bisection
    /// on the multiplier (log scale).
    fn solve_map(&self, g: &[usize], target: f64, init: &[f64], opts: &SolverOptions) -> Option<(f64, f64, Vec<f64>)> {
        if self.min_distortion(g) > target + 1e-9 {
            return None;
        }
        let feasible = |c: &[f64]| self.evaluate(c, g).1 <= target + 1e-9;
        let (mut lo, mut hi) = (-8.0_f64, 9.0_f64);
        let mut best = self.alternate(g, 10f64.powf(hi), init, opts);
        if !feasible(&best) {
            return None;
        }
        let zero = self.alternate(g, 10f64.powf(lo), init, opts);
        if feasible(&zero) {
            best = zero;
        } else {
            for _ in 0..opts.bisection_steps {
                let mid = 0.5 * (lo + hi);
                let c = self.alternate(g, 10f64.powf(mid), init, opts);
                if feasible(&c) {
                    hi = mid;
                    best = c;
                } else {
                    lo = mid;
                }
            }
        }
        let (r, d) = self.evaluate(&best, g);
        Some((r, d, best))
    }

    fn random_channel(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let ns = self.ns;
        let mut c: Vec<f64> = (0..self.model.nx * ns).map(|_| 0.05 + rng.random::<f64>()).collect();
        for row in c.chunks_mut(ns) {
            let s: f64 = row.iter().sum();
            row.iter_mut().for_each(|v| *v /= s);
        }
        c
    }

    /// Per-`(s, y)` distortion-minimizing reconstruction for a channel.
    fn greedy_map(&self, c: &[f64]) -> Vec<usize> {
        let (nx, ny, ns, nz) = (self.model.nx, self.model.ny, self.ns, self.dist.z_card);
        let mut g = vec![0; ns * ny];
        for s in 0..ns {
            for y in 0..ny {
                let cost = |z: usize| (0..nx).map(|x| self.pxy(x, y) * c[x * ns + s] * self.dist.d(x, z)).sum::<f64>();
                g[s * ny + y] = (0..nz).min_by(|&a, &b| cost(a).total_cmp(&cost(b))).unwrap_or(0);
            }
        }
        g
    }
}

/// Every map `S x Y -> Z` up to relabeling of `S`: the columns
/// `g(s, .)`, read as base-|Z| numbers, are nondecreasing in `s`.
fn canonical_maps(ns: usize, ny: usize, nz: usize) -> Vec<Vec<usize>> {
    let per_s = nz.pow(ny as u32);
    let mut out = Vec::new();
    let mut cols = vec![0usize; ns];
    loop {
        let mut g = vec![0; ns * ny];
        for s in 0..ns {
            let mut v = cols[s];
            for y in (0..ny).rev() {
                g[s * ny + y] = v % nz;
                v /= nz;
            }
        }
        out.push(g);
        // next nondecreasing sequence
        let mut i = ns;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cols[i] + 1 < per_s {
                cols[i] += 1;
                let v = cols[i];
                cols[i + 1..].iter_mut().for_each(|c| *c = v);
                break;
            }
        }
    }
}

pub fn wyner_ziv_rmin(p_xy: &JointPmf, dist: &DistortionSpec, s_card: usize) -> Result<WynerZivSolution, ExponentError> {
    wyner_ziv_rmin_with(p_xy, dist, s_card, &SolverOptions::default())
}

/// `R_min = min I(X;S|Y)` over `P_{S|X}` and deterministic `g: S x Y -> Z`
/// with `E d(X, g(S,Y)) <= D`.
pub fn wyner_ziv_rmin_with(
    p_xy: &JointPmf,
    dist: &DistortionSpec,
    s_card: usize,
    opts: &SolverOptions,
) -> Result<WynerZivSolution, ExponentError> {
    if s_card == 0 {
        return Err(ExponentError::ZeroAuxCardinality);
    }
    let model = PairModel::new(p_xy)?;
    if dist.x_card() != model.nx {
        return Err(ExponentError::DistortionShape { expected: model.nx * dist.z_card, got: dist.table.len() });
    }
    let (nx, ny, nz) = (model.nx, model.ny, dist.z_card);
    let target = dist.max_distortion;
    let from = p_xy.axes()[0].clone();
    let prob = Problem { model, dist, ns: s_card };

    // zero rate: S constant, Z chosen from Y alone
    let mut g0 = vec![0; s_card * ny];
    let mut d0 = 0.0;
    for y in 0..ny {
        let cost = |z: usize| (0..nx).map(|x| prob.pxy(x, y) * dist.d(x, z)).sum::<f64>();
        let z = (0..nz).min_by(|&a, &b| cost(a).total_cmp(&cost(b))).unwrap_or(0);
        d0 += cost(z);
        for s in 0..s_card {
            g0[s * ny + y] = z;
        }
    }
    if d0 <= target + 1e-9 {
        let mut c = vec![0.0; nx * s_card];
        for x in 0..nx {
            c[x * s_card] = 1.0;
        }
        return Ok(WynerZivSolution {
            rate: 0.0,
            test_channel: channel_from(&c, nx, s_card, &from.renamed(from.name())),
            reconstruction: g0,
            y_card: ny,
            achieved_distortion: d0,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x57a7);
    let mut best: Option<(f64, f64, Vec<f64>, Vec<usize>)> = None;
    let consider = |r: f64, d: f64, c: Vec<f64>, g: Vec<usize>, best: &mut Option<(f64, f64, Vec<f64>, Vec<usize>)>| {
        if best.as_ref().is_none_or(|b| r < b.0 - 1e-12) {
            *best = Some((r, d, c, g));
        }
    };
    let map_count = (nz as f64).powi((s_card * ny) as i32);
    if map_count <= MAP_ENUMERATION_LIMIT {
        let init = {
            let mut c = vec![0.0; nx * s_card];
            for (i, v) in c.iter_mut().enumerate() {
                *v = if i % s_card == (i / s_card) % s_card { 0.5 } else { 0.5 / (s_card.max(2) - 1) as f64 };
            }
            for row in c.chunks_mut(s_card) {
                let s: f64 = row.iter().sum();
                row.iter_mut().for_each(|v| *v /= s);
            }
            c
        };
        for g in canonical_maps(s_card, ny, nz) {
            if let Some((r, d, c)) = prob.solve_map(&g, target, &init, opts) {
                consider(r, d, c, g, &mut best);
            }
        }
    } else {
        for _ in 0..opts.restarts.max(1) {
            let mut c = prob.random_channel(&mut rng);
            let mut g = prob.greedy_map(&c);
            for _ in 0..50 {
                match prob.solve_map(&g, target, &c, opts) {
                    Some((r, d, next)) => {
                        consider(r, d, next.clone(), g.clone(), &mut best);
                        c = next;
                    }
                    None => break,
                }
                let ng = prob.greedy_map(&c);
                if ng == g {
                    break;
                }
                g = ng;
            }
        }
    }
    let (rate, achieved, c, g) = match best {
        Some(b) => b,
        None => {
            // the identity-like map S = X (if |S| allows) bounds what is reachable
            let floor = (0..nx)
                .map(|x| (0..ny).map(|y| prob.pxy(x, y)).sum::<f64>() * (0..nz).map(|z| dist.d(x, z)).fold(f64::INFINITY, f64::min))
                .sum::<f64>();
            return Err(ExponentError::InfeasibleDistortion { target, best: floor.min(d0) });
        }
    };
    Ok(WynerZivSolution {
        rate,
        test_channel: channel_from(&c, nx, s_card, &from.renamed(from.name())),
        reconstruction: g,
        y_card: ny,
        achieved_distortion: achieved,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn canonical_map_count() {
        // multisets of size 3 from 4 column patterns
        assert_eq!(canonical_maps(3, 2, 2).len(), 20);
        assert_eq!(canonical_maps(1, 2, 3).len(), 9);
    }

    #[test]
    fn lossless_anchors() {
        let same = JointPmf::from_shape(&[2, 2], vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert_eq!(lossless_bound(&same).unwrap(), 0.0);
        let ind = JointPmf::from_shape(&[2, 2], vec![0.25; 4]).unwrap();
        assert_abs_diff_eq!(lossless_bound(&ind).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(lossless_bound(&JointPmf::dsbs(0.1).unwrap()).unwrap(), 0.4690, epsilon = 1e-4);
    }

    #[test]
    fn large_distortion_needs_no_rate() {
        let p = JointPmf::dsbs(0.1).unwrap();
        let sol = wyner_ziv_rmin(&p, &DistortionSpec::hamming(2, 0.1).unwrap(), 3).unwrap();
        assert_eq!(sol.rate, 0.0);
        // Z = Y
        assert_eq!((sol.g(0, 0), sol.g(0, 1)), (0, 1));
    }

    #[test]
    fn zero_distortion_is_lossless() {
        let p = JointPmf::dsbs(0.1).unwrap();
        let sol = wyner_ziv_rmin(&p, &DistortionSpec::hamming(2, 0.0).unwrap(), 3).unwrap();
        assert_abs_diff_eq!(sol.rate, lossless_bound(&p).unwrap(), epsilon = 1e-3);
        assert!(sol.achieved_distortion <= 1e-9);
    }

    #[test]
    fn monotone_in_distortion() {
        let p = JointPmf::dsbs(0.1).unwrap();
        let mut prev = f64::INFINITY;
        for d in [0.0, 0.02, 0.05, 0.08] {
            let r = wyner_ziv_rmin(&p, &DistortionSpec::hamming(2, d).unwrap(), 3).unwrap().rate;
            assert!(r <= prev + 1e-6);
            prev = r;
        }
    }

    #[test]
    fn infeasible_target() {
        let p = JointPmf::dsbs(0.1).unwrap();
        let dist = DistortionSpec::new(vec![0.1, 1.0, 1.0, 0.1], 2, 0.05).unwrap();
        assert!(matches!(wyner_ziv_rmin(&p, &dist, 3), Err(ExponentError::InfeasibleDistortion { .. })));
        assert!(DistortionSpec::new(vec![0.0, -1.0], 2, 0.1).is_err());
        assert!(DistortionSpec::new(vec![0.0, 1.0, 1.0], 2, 0.1).is_err());
    }
}
