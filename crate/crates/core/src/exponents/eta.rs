use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::pair::PairModel;
use crate::error::ExponentError;
use crate::probcore::{entropy_of, neg_plogp, Alphabet, ConditionalPmf, JointPmf};

/// Knobs of the alternating solver behind [`eta`] and [`lagrangian_sweep`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub restarts: usize,
    pub max_iter: usize,
    /// Stop once the Lagrangian moves by less than this between iterations.
    pub tol: f64,
    pub seed: u64,
    /// Bisection steps on the multiplier when targeting a rate.
    pub bisection_steps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { restarts: 16, max_iter: 5000, tol: 1e-9, seed: 0x9e37_79b9_7f4a_7c15, bisection_steps: 48 }
    }
}

/// One point `(I(U;Y_{l-1}), I(U;Y_l))` with the channel achieving it.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaPoint {
    pub rate: f64,
    pub value: f64,
    pub channel: ConditionalPmf,
}

#[derive(Debug, Clone)]
struct Candidate {
    rate: f64,
    value: f64,
    q: Vec<f64>,
    nu: usize,
}

impl Candidate {
    fn constant(nx: usize, nu: usize) -> Self {
        let mut q = vec![0.0; nx * nu];
        for x in 0..nx {
            q[x * nu] = 1.0;
        }
        Self { rate: 0.0, value: 0.0, q, nu }
    }

    /// Lagrangian comparison with ties broken toward the smaller rate.
    fn beats(&self, other: &Candidate, lambda: f64) -> bool {
        let a = self.value - lambda * self.rate;
        let b = other.value - lambda * other.rate;
        if (a - b).abs() <= 1e-12 {
            self.rate < other.rate - 1e-12
        } else {
            a > b
        }
    }

    fn into_point(self, model: &PairModel, from: &Alphabet) -> EtaPoint {
        let channel = channel_from(&self.q, model.nx, self.nu, from);
        EtaPoint { rate: self.rate, value: self.value, channel }
    }
}

pub(crate) fn channel_from(q: &[f64], nx: usize, nu: usize, from: &Alphabet) -> ConditionalPmf {
    let mut kernel = q.to_vec();
    for row in kernel.chunks_mut(nu) {
        let s: f64 = row.iter().sum();
        if s > 0.0 {
            row.iter_mut().for_each(|v| *v /= s);
        } else {
            row.iter_mut().for_each(|v| *v = 0.0);
            row[0] = 1.0;
        }
    }
    debug_assert_eq!(kernel.len(), nx * nu);
    let to = Alphabet::indexed("U", nu).expect("nu >= 1");
    ConditionalPmf::from_matrix(from.renamed(from.name()), to, kernel).expect("rows normalized")
}

fn validate(rate: f64, aux_card: usize) -> Result<(), ExponentError> {
    if !(rate >= 0.0) || !rate.is_finite() {
        return Err(ExponentError::NegativeRate { rate });
    }
    if aux_card == 0 {
        return Err(ExponentError::ZeroAuxCardinality);
    }
    Ok(())
}

/// The channel `U = class(Y_{l-1})` merging inputs with identical rows of
/// `P_{Y_l|Y_{l-1}}`, when it fits in `nu` symbols.
fn saturation(model: &PairModel, nu: usize) -> Option<Candidate> {
    let (class, count) = model.sufficient_classes();
    if count > nu {
        return None;
    }
    let mut q = vec![0.0; model.nx * nu];
    for x in 0..model.nx {
        q[x * nu + class[x]] = 1.0;
    }
    let (rate, _) = model.evaluate(&q, nu);
    Some(Candidate { rate, value: model.mutual_information().min(rate), q, nu })
}

/// One pass of the self-consistent update
/// `q(u|x) ~ p(u) 2^{-beta D(P_{Y|x} || P_{Y|u})}`.
fn ib_step(model: &PairModel, q: &mut [f64], nu: usize, beta: f64) {
    let (nx, ny) = (model.nx, model.ny);
    let pu = model.pu(q, nu);
    let mut pyu = vec![0.0; nu * ny];
    for x in 0..nx {
        for u in 0..nu {
            let m = model.px[x] * q[x * nu + u];
            if m > 0.0 {
                for y in 0..ny {
                    pyu[u * ny + y] += m * model.w[x * ny + y];
                }
            }
        }
    }
    for u in 0..nu {
        if pu[u] > 0.0 {
            pyu[u * ny..(u + 1) * ny].iter_mut().for_each(|v| *v /= pu[u]);
        }
    }
    let mut logits = vec![0.0; nu];
    for x in 0..nx {
        let wx = &model.w[x * ny..(x + 1) * ny];
        let mut best = f64::NEG_INFINITY;
        for u in 0..nu {
            logits[u] = if pu[u] > 0.0 {
                let mut d = 0.0;
                for y in 0..ny {
                    let a = wx[y];
                    if a > 0.0 {
                        let b = pyu[u * ny + y];
                        d += if b > 0.0 { a * (a / b).log2() } else { f64::INFINITY };
                    }
                }
                pu[u].log2() - beta * d
            } else {
                f64::NEG_INFINITY
            };
            best = best.max(logits[u]);
        }
        let row = &mut q[x * nu..(x + 1) * nu];
        if best == f64::NEG_INFINITY {
            row.copy_from_slice(&pu);
            continue;
        }
        let mut s = 0.0;
        for u in 0..nu {
            row[u] = (logits[u] - best).exp2();
            s += row[u];
        }
        row.iter_mut().for_each(|v| *v /= s);
    }
}

fn initial_channel(nx: usize, nu: usize, restart: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut q = vec![0.0; nx * nu];
    if restart == 0 {
        for x in 0..nx {
            for u in 0..nu {
                q[x * nu + u] = if nu == 1 || u == x % nu { 0.6 } else { 0.4 / (nu - 1) as f64 };
            }
        }
        return normalize_rows(q, nu);
    }
    for v in q.iter_mut() {
        *v = -(1.0 - rng.random::<f64>()).ln();
    }
    normalize_rows(q, nu)
}

fn normalize_rows(mut q: Vec<f64>, nu: usize) -> Vec<f64> {
    for row in q.chunks_mut(nu) {
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|v| *v /= s);
    }
    q
}

/// Maximize `I(U;Y_l) - lambda I(U;Y_{l-1})` for `0 < lambda < 1`.
fn solve_lagrangian(model: &PairModel, lambda: f64, nu: usize, opts: &SolverOptions) -> Candidate {
    let beta = 1.0 / lambda;
    let mut best = Candidate::constant(model.nx, nu);
    let seed = opts.seed ^ lambda.to_bits().rotate_left(23) ^ (nu as u64) << 48;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for restart in 0..opts.restarts.max(1) {
        let mut q = initial_channel(model.nx, nu, restart, &mut rng);
        let mut prev = f64::NEG_INFINITY;
        for _ in 0..opts.max_iter {
            ib_step(model, &mut q, nu, beta);
            let (r, v) = model.evaluate(&q, nu);
            let obj = v - lambda * r;
            if (obj - prev).abs() < opts.tol {
                break;
            }
            prev = obj;
        }
        let (rate, value) = model.evaluate(&q, nu);
        let cand = Candidate { rate, value, q, nu };
        if cand.beats(&best, lambda) {
            best = cand;
        }
    }
    best
}

/// Point traced by the multiplier `lambda`, including the two limits.
fn lagrangian_point(model: &PairModel, lambda: f64, nu: usize, opts: &SolverOptions) -> Candidate {
    if lambda >= 1.0 || model.mutual_information() == 0.0 {
        return Candidate::constant(model.nx, nu);
    }
    if lambda <= 0.0 {
        if let Some(sat) = saturation(model, nu) {
            return sat;
        }
        return solve_lagrangian(model, 1e-6, nu, opts);
    }
    solve_lagrangian(model, lambda, nu, opts)
}

/// `eta(R) = max I(U;Y_l)` over channels `P_{U|Y_{l-1}}` with at most
/// `aux_card` symbols and `I(U;Y_{l-1}) <= R`, with default solver options.
pub fn eta(pair: &JointPmf, rate: f64, aux_card: usize) -> Result<EtaPoint, ExponentError> {
    eta_with(pair, rate, aux_card, &SolverOptions::default())
}

pub fn eta_with(pair: &JointPmf, rate: f64, aux_card: usize, opts: &SolverOptions) -> Result<EtaPoint, ExponentError> {
    validate(rate, aux_card)?;
    let model = PairModel::new(pair)?;
    let from = &pair.axes()[0];
    let nu = aux_card;
    let trivial = Candidate::constant(model.nx, nu);
    if rate == 0.0 || model.mutual_information() == 0.0 {
        return Ok(trivial.into_point(&model, from));
    }
    let sat = saturation(&model, nu);
    if let Some(s) = &sat {
        if s.rate <= rate + 1e-12 {
            return Ok(s.clone().into_point(&model, from));
        }
    }

    let mut best = trivial;
    let mut above = sat;
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..opts.bisection_steps {
        let mid = 0.5 * (lo + hi);
        let cand = solve_lagrangian(&model, mid, nu, opts);
        if cand.rate <= rate + 1e-9 {
            hi = mid;
            if cand.value > best.value + 1e-12 || (cand.value > best.value - 1e-12 && cand.rate < best.rate) {
                best = cand;
            }
        } else {
            lo = mid;
            if above.as_ref().is_none_or(|a| cand.rate < a.rate) {
                above = Some(cand);
            }
        }
    }

    // a rate gap left by the bisection is bridged by time sharing
    if let Some(up) = above {
        if up.rate > best.rate + 1e-9 && up.value > best.value {
            let theta = ((rate - best.rate) / (up.rate - best.rate)).clamp(0.0, 1.0);
            if let Some(mixed) = time_share(&model, &best, &up, theta, nu) {
                if mixed.rate <= rate + 1e-6 && mixed.value > best.value + 1e-12 {
                    best = mixed;
                }
            }
        }
    }
    Ok(best.into_point(&model, from))
}

/// Disjoint-union mixture of two channels, reduced back to `nu` symbols.
fn time_share(model: &PairModel, a: &Candidate, b: &Candidate, theta: f64, nu: usize) -> Option<Candidate> {
    let nx = model.nx;
    let total = a.nu + b.nu;
    let mut q = vec![0.0; nx * total];
    for x in 0..nx {
        for u in 0..a.nu {
            q[x * total + u] = (1.0 - theta) * a.q[x * a.nu + u];
        }
        for u in 0..b.nu {
            q[x * total + a.nu + u] = theta * b.q[x * b.nu + u];
        }
    }
    let q = reduce_support(model, &q, total, nu)?;
    let (rate, value) = model.evaluate(&q, nu);
    Some(Candidate { rate, value, q, nu })
}

/// Shrink the support of a channel to at most `nu` symbols while keeping
/// the input marginal and `I(U;X)` fixed and not lowering `I(U;Y)`.
pub(crate) fn reduce_support(model: &PairModel, q: &[f64], total: usize, nu: usize) -> Option<Vec<f64>> {
    let (nx, ny) = (model.nx, model.ny);
    let pu = model.pu(q, total);
    // atoms: weight and posterior over X
    let mut weights = Vec::new();
    let mut posts: Vec<Vec<f64>> = Vec::new();
    for u in 0..total {
        if pu[u] > 1e-300 {
            weights.push(pu[u]);
            posts.push((0..nx).map(|x| model.px[x] * q[x * total + u] / pu[u]).collect());
        }
    }
    let feature = |post: &[f64]| -> (Vec<f64>, f64) {
        let mut col = post.to_vec();
        col.push(entropy_of(post));
        let mut py = vec![0.0; ny];
        for x in 0..nx {
            for y in 0..ny {
                py[y] += post[x] * model.w[x * ny + y];
            }
        }
        (col, py.iter().map(|&p| neg_plogp(p)).sum())
    };
    let mut cols: Vec<(Vec<f64>, f64)> = posts.iter().map(|p| feature(p)).collect();
    while weights.len() > nx + 1 {
        let d = null_vector(&cols.iter().map(|c| c.0.clone()).collect::<Vec<_>>(), nx + 1)?;
        let slope: f64 = d.iter().zip(&cols).map(|(di, c)| di * c.1).sum();
        let d: Vec<f64> = if slope > 0.0 { d.iter().map(|v| -v).collect() } else { d };
        let mut step = f64::INFINITY;
        for (w, di) in weights.iter().zip(&d) {
            if *di < 0.0 {
                step = step.min(w / -di);
            }
        }
        if !step.is_finite() {
            return None;
        }
        let mut keep = Vec::new();
        for i in 0..weights.len() {
            weights[i] += step * d[i];
            if weights[i] > 1e-15 {
                keep.push(i);
            }
        }
        if keep.len() == weights.len() {
            // drop the atom that the step drove closest to zero
            let (imin, _) = weights.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).expect("nonempty");
            keep.retain(|&i| i != imin);
        }
        weights = keep.iter().map(|&i| weights[i]).collect();
        posts = keep.iter().map(|&i| posts[i].clone()).collect();
        cols = keep.iter().map(|&i| cols[i].clone()).collect();
    }
    if weights.len() > nu {
        return None;
    }
    let mut out = vec![0.0; nx * nu];
    for x in 0..nx {
        if model.px[x] > 0.0 {
            for (u, (w, post)) in weights.iter().zip(&posts).enumerate() {
                out[x * nu + u] = w * post[x] / model.px[x];
            }
        } else {
            out[x * nu] = 1.0;
        }
    }
    Some(normalize_rows(out, nu))
}

/// A nonzero vector in the kernel of the `rows x cols.len()` matrix whose
/// columns are `cols`, when one exists.
fn null_vector(cols: &[Vec<f64>], rows: usize) -> Option<Vec<f64>> {
    let n = cols.len();
    let mut m: Vec<Vec<f64>> = (0..rows).map(|r| cols.iter().map(|c| c[r]).collect()).collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..n {
        if row == rows {
            break;
        }
        let (p, &v) = m[row..]
            .iter()
            .map(|r| &r[col])
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .expect("rows remain");
        if v.abs() < 1e-12 {
            continue;
        }
        m.swap(row, row + p);
        let piv = m[row][col];
        m[row].iter_mut().for_each(|x| *x /= piv);
        for r in 0..rows {
            if r != row {
                let f = m[r][col];
                if f != 0.0 {
                    for c in 0..n {
                        m[r][c] -= f * m[row][c];
                    }
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    let free = (0..n).find(|c| !pivots.contains(c))?;
    let mut d = vec![0.0; n];
    d[free] = 1.0;
    for (r, &pc) in pivots.iter().enumerate() {
        d[pc] = -m[r][free];
    }
    Some(d)
}

/// Sampled graph of `eta_l`, kept as an upper concave envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaCurve {
    pub hop_index: usize,
    pub rate_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub channels: Vec<ConditionalPmf>,
    pub aux_cardinality: usize,
    /// `I(Y_{l-1};Y_l)`, the value the curve saturates at.
    pub ceiling: f64,
}

impl EtaCurve {
    /// Curve through direct [`eta`] solves at each of `rates`.
    pub fn tabulate(
        pair: &JointPmf,
        hop_index: usize,
        rates: &[f64],
        aux_card: usize,
        opts: &SolverOptions,
    ) -> Result<Self, ExponentError> {
        let ceiling = PairModel::new(pair)?.mutual_information();
        let mut pts = Vec::with_capacity(rates.len() + 1);
        for &r in rates {
            let p = eta_with(pair, r, aux_card, opts)?;
            pts.push((r, p));
        }
        let mut sorted = pts;
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        sorted.dedup_by(|a, b| a.0 == b.0);
        let mut curve = Self {
            hop_index,
            rate_grid: Vec::new(),
            values: Vec::new(),
            channels: Vec::new(),
            aux_cardinality: aux_card,
            ceiling,
        };
        // the true curve is nondecreasing; a solve at a larger rate never
        // reports less than one at a smaller rate
        let mut running = 0.0_f64;
        for (r, p) in sorted {
            running = running.max(p.value);
            curve.rate_grid.push(r);
            curve.values.push(running);
            curve.channels.push(p.channel);
        }
        Ok(curve)
    }

    /// Largest rate covered, or infinity once the curve has saturated.
    pub fn max_rate(&self) -> f64 {
        match (self.rate_grid.last(), self.values.last()) {
            (Some(_), Some(&v)) if v >= self.ceiling - 1e-9 => f64::INFINITY,
            (Some(&r), _) => r,
            _ => 0.0,
        }
    }

    /// Linear interpolation of the curve at `rate`.
    pub fn value_at(&self, rate: f64) -> Result<f64, ExponentError> {
        if !(rate >= 0.0) {
            return Err(ExponentError::NegativeRate { rate });
        }
        let grid = &self.rate_grid;
        let last = *grid.last().unwrap_or(&0.0);
        if rate > last {
            if self.max_rate().is_infinite() {
                return Ok(*self.values.last().expect("nonempty"));
            }
            return Err(ExponentError::RateOutOfRange { rate, max: last });
        }
        if rate < grid[0] {
            if grid[0] == 0.0 || rate > 0.0 {
                return Err(ExponentError::RateOutOfRange { rate, max: last });
            }
            return Ok(0.0);
        }
        let i = grid.partition_point(|&r| r <= rate);
        if i == grid.len() {
            return Ok(self.values[i - 1]);
        }
        let (r0, r1) = (grid[i - 1], grid[i]);
        let (v0, v1) = (self.values[i - 1], self.values[i]);
        Ok(v0 + (v1 - v0) * (rate - r0) / (r1 - r0))
    }
}

/// Trace the concave curve by maximizing `I(U;Y_l) - lambda I(U;Y_{l-1})`
/// for each multiplier (descending). Points off the upper envelope, which
/// can only come from local optima, are discarded.
pub fn lagrangian_sweep(
    pair: &JointPmf,
    lambdas: &[f64],
    aux_card: usize,
    opts: &SolverOptions,
) -> Result<EtaCurve, ExponentError> {
    if lambdas.is_empty() {
        return Err(ExponentError::EmptyLambdas);
    }
    if lambdas.iter().any(|l| l.is_nan() || *l < 0.0) || lambdas.windows(2).any(|w| w[0] < w[1]) {
        return Err(ExponentError::UnsortedLambdas);
    }
    if aux_card == 0 {
        return Err(ExponentError::ZeroAuxCardinality);
    }
    let model = PairModel::new(pair)?;
    let from = &pair.axes()[0];
    let mut pts = vec![Candidate::constant(model.nx, aux_card)];
    for &l in lambdas {
        pts.push(lagrangian_point(&model, l, aux_card, opts));
    }
    pts.sort_by(|a, b| a.rate.total_cmp(&b.rate).then(b.value.total_cmp(&a.value)));
    let mut mono: Vec<Candidate> = Vec::new();
    for p in pts {
        if mono.last().is_none_or(|m| p.value > m.value + 1e-12) {
            mono.push(p);
        }
    }
    let mut hull: Vec<Candidate> = Vec::new();
    for p in mono {
        while hull.len() >= 2 {
            let (a, b) = (&hull[hull.len() - 2], &hull[hull.len() - 1]);
            let cross = (b.rate - a.rate) * (p.value - a.value) - (b.value - a.value) * (p.rate - a.rate);
            if cross > 1e-15 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let ceiling = model.mutual_information();
    let mut curve = EtaCurve {
        hop_index: 0,
        rate_grid: Vec::new(),
        values: Vec::new(),
        channels: Vec::new(),
        aux_cardinality: aux_card,
        ceiling,
    };
    for c in hull {
        curve.rate_grid.push(c.rate);
        curve.values.push(c.value);
        curve.channels.push(c.into_point(&model, from).channel);
    }
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probcore::{binary_convolution, binary_entropy, binary_entropy_inverse, mutual_information};
    use approx::assert_abs_diff_eq;

    fn dsbs_eta(p: f64, r: f64) -> f64 {
        let q = binary_entropy_inverse(1.0 - r);
        1.0 - binary_entropy(binary_convolution(p, q))
    }

    #[test]
    fn zero_rate_gives_constant_channel() {
        let pt = eta(&JointPmf::dsbs(0.1).unwrap(), 0.0, 3).unwrap();
        assert_eq!(pt.value, 0.0);
        for x in 0..2 {
            assert_eq!(pt.channel.row(x), &[1.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn saturated_rate_gives_identity() {
        let p = JointPmf::dsbs(0.1).unwrap();
        let pt = eta(&p, 1.0, 3).unwrap();
        assert_abs_diff_eq!(pt.value, mutual_information(&p, &[0], &[1]).unwrap(), epsilon = 1e-12);
        assert_eq!(pt.channel.row(0), &[1.0, 0.0, 0.0]);
        assert_eq!(pt.channel.row(1), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn dsbs_half_bit() {
        let pt = eta(&JointPmf::dsbs(0.1).unwrap(), 0.5, 3).unwrap();
        assert!(pt.rate <= 0.5 + 1e-6);
        assert_abs_diff_eq!(pt.value, 0.3040, epsilon = 2e-3);
        assert_abs_diff_eq!(pt.value, dsbs_eta(0.1, 0.5), epsilon = 1e-4);
    }

    #[test]
    fn independent_pair_is_zero() {
        let x = JointPmf::from_shape(&[3], vec![0.2, 0.3, 0.5]).unwrap();
        let y = JointPmf::from_shape(&[2], vec![0.6, 0.4]).unwrap();
        let pt = eta(&x.product(&y), 0.7, 4).unwrap();
        assert_eq!(pt.value, 0.0);
    }

    #[test]
    fn errors() {
        let p = JointPmf::dsbs(0.1).unwrap();
        assert!(matches!(eta(&p, -0.1, 3), Err(ExponentError::NegativeRate { .. })));
        assert!(matches!(eta(&p, 0.1, 0), Err(ExponentError::ZeroAuxCardinality)));
        let opts = SolverOptions::default();
        assert!(matches!(lagrangian_sweep(&p, &[], 3, &opts), Err(ExponentError::EmptyLambdas)));
        assert!(matches!(lagrangian_sweep(&p, &[0.1, 0.5], 3, &opts), Err(ExponentError::UnsortedLambdas)));
    }

    #[test]
    fn sweep_limits_and_shape() {
        let p = JointPmf::dsbs(0.1).unwrap();
        let lambdas = [f64::INFINITY, 0.9, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1, 0.0];
        let c = lagrangian_sweep(&p, &lambdas, 3, &SolverOptions::default()).unwrap();
        assert_eq!((c.rate_grid[0], c.values[0]), (0.0, 0.0));
        assert_abs_diff_eq!(*c.rate_grid.last().unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(*c.values.last().unwrap(), c.ceiling, epsilon = 1e-12);
        for (r, v) in c.rate_grid.iter().zip(&c.values) {
            assert!(*v <= r.min(c.ceiling) + 1e-6);
            if *r > 0.0 && *r < 1.0 {
                assert_abs_diff_eq!(*v, dsbs_eta(0.1, *r), epsilon = 1e-4);
            }
        }
    }

    #[test]
    fn time_sharing_reaches_the_envelope() {
        // Z-channel-like pair whose curve has a linear piece
        let p = JointPmf::from_shape(&[3, 2], vec![0.3, 0.0, 0.0, 0.3, 0.2, 0.2]).unwrap();
        let a = eta(&p, 0.4, 4).unwrap();
        let b = eta(&p, 0.8, 4).unwrap();
        let mid = eta(&p, 0.6, 4).unwrap();
        assert!(mid.rate <= 0.6 + 1e-6);
        assert!(mid.value >= 0.5 * (a.value + b.value) - 1e-6);
    }

    #[test]
    fn curve_interpolation() {
        let p = JointPmf::dsbs(0.1).unwrap();
        let c = EtaCurve::tabulate(&p, 1, &[0.0, 0.5, 1.0], 3, &SolverOptions::default()).unwrap();
        assert_eq!(c.value_at(0.0).unwrap(), 0.0);
        let mid = c.value_at(0.25).unwrap();
        assert_abs_diff_eq!(mid, 0.5 * c.values[1], epsilon = 1e-12);
        assert_abs_diff_eq!(c.value_at(5.0).unwrap(), c.ceiling, epsilon = 1e-9);
        let partial = EtaCurve::tabulate(&p, 1, &[0.0, 0.5], 3, &SolverOptions::default()).unwrap();
        assert!(matches!(partial.value_at(0.7), Err(ExponentError::RateOutOfRange { .. })));
    }
}
