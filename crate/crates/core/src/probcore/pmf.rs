use serde::{Deserialize, Serialize};

use super::alphabet::Alphabet;
use crate::error::ProbError;

/// Normalization tolerance for pmfs and kernel rows.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Dense probability tensor over a product of finite alphabets, row-major
/// (the last axis varies fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointPmf {
    axes: Vec<Alphabet>,
    mass: Vec<f64>,
}

fn check_mass(mass: &[f64]) -> Result<(), ProbError> {
    for (index, &value) in mass.iter().enumerate() {
        if !value.is_finite() || value < 0.0 {
            return Err(ProbError::InvalidMass { index, value });
        }
    }
    Ok(())
}

/// Neumaier-compensated sum; tensors with millions of entries still
/// normalize to within 1e-12.
pub(crate) fn stable_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

pub(crate) fn validate_axes(axes: &[usize], rank: usize) -> Result<(), ProbError> {
    if axes.is_empty() {
        return Err(ProbError::EmptyAxisSet);
    }
    let mut seen = vec![false; rank];
    for &axis in axes {
        if axis >= rank {
            return Err(ProbError::InvalidAxis { axis, rank });
        }
        if seen[axis] {
            return Err(ProbError::OverlappingAxes { axis });
        }
        seen[axis] = true;
    }
    Ok(())
}

impl JointPmf {
    pub fn new(axes: Vec<Alphabet>, mass: Vec<f64>) -> Result<Self, ProbError> {
        let expected: usize = axes.iter().map(Alphabet::size).product();
        if axes.is_empty() || mass.len() != expected {
            return Err(ProbError::ShapeMismatch { expected, got: mass.len() });
        }
        check_mass(&mass)?;
        let sum = stable_sum(mass.iter().copied());
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(ProbError::NotNormalized { sum });
        }
        Ok(Self { axes, mass })
    }

    /// Pmf over indexed alphabets `Y0, Y1, ...` with the given sizes.
    pub fn from_shape(shape: &[usize], mass: Vec<f64>) -> Result<Self, ProbError> {
        let axes = shape
            .iter()
            .enumerate()
            .map(|(i, &s)| Alphabet::indexed(format!("Y{i}"), s))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(axes, mass)
    }

    pub fn uniform(axes: Vec<Alphabet>) -> Result<Self, ProbError> {
        let len: usize = axes.iter().map(Alphabet::size).product();
        Self::new(axes, vec![1.0 / len as f64; len])
    }

    /// Point mass at the given index tuple.
    pub fn point(axes: Vec<Alphabet>, at: &[usize]) -> Result<Self, ProbError> {
        let len: usize = axes.iter().map(Alphabet::size).product();
        let mut mass = vec![0.0; len];
        let shape: Vec<usize> = axes.iter().map(Alphabet::size).collect();
        mass[flat_index(&shape, at)?] = 1.0;
        Self::new(axes, mass)
    }

    /// Bernoulli(p) on `{0, 1}`.
    pub fn bernoulli(p: f64) -> Result<Self, ProbError> {
        Self::from_shape(&[2], vec![1.0 - p, p])
    }

    /// Doubly symmetric binary source with crossover `p`.
    pub fn dsbs(p: f64) -> Result<Self, ProbError> {
        let agree = (1.0 - p) / 2.0;
        let flip = p / 2.0;
        Self::new(
            vec![Alphabet::binary("X"), Alphabet::binary("Y")],
            vec![agree, flip, flip, agree],
        )
    }

    pub fn axes(&self) -> &[Alphabet] {
        &self.axes
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn rank(&self) -> usize {
        self.axes.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(Alphabet::size).collect()
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn get(&self, index: &[usize]) -> Result<f64, ProbError> {
        Ok(self.mass[flat_index(&self.shape(), index)?])
    }

    /// Sum over every axis not listed in `keep`. Kept axes stay in their
    /// original relative order regardless of the order in `keep`.
    pub fn marginalize(&self, keep: &[usize]) -> Result<JointPmf, ProbError> {
        validate_axes(keep, self.rank())?;
        let mut kept: Vec<usize> = keep.to_vec();
        kept.sort_unstable();
        let shape = self.shape();
        let out_shape: Vec<usize> = kept.iter().map(|&a| shape[a]).collect();
        let out_len: usize = out_shape.iter().product();
        let mut out = vec![0.0; out_len];

        // stride of each kept axis inside the output tensor
        let mut out_strides = vec![0usize; self.rank()];
        let mut stride = 1;
        for (pos, &axis) in kept.iter().enumerate().rev() {
            out_strides[axis] = stride;
            stride *= out_shape[pos];
        }
        let mut idx = vec![0usize; self.rank()];
        for &p in &self.mass {
            let target: usize = idx.iter().zip(&out_strides).map(|(i, s)| i * s).sum();
            out[target] += p;
            increment(&mut idx, &shape);
        }
        let axes = kept.iter().map(|&a| self.axes[a].clone()).collect();
        Ok(JointPmf { axes, mass: out })
    }

    /// Outer product `self ⊗ other`; axes of `other` follow those of `self`.
    pub fn product(&self, other: &JointPmf) -> JointPmf {
        let mut mass = Vec::with_capacity(self.len() * other.len());
        for &a in &self.mass {
            for &b in &other.mass {
                mass.push(a * b);
            }
        }
        let mut axes = self.axes.clone();
        axes.extend(other.axes.iter().cloned());
        JointPmf { axes, mass }
    }

    /// Product of the single-axis marginals (the law under independence).
    pub fn independent_marginals(&self) -> JointPmf {
        let mut out = self.marginalize(&[0]).expect("axis 0 exists");
        for axis in 1..self.rank() {
            out = out.product(&self.marginalize(&[axis]).expect("axis exists"));
        }
        out
    }

    /// Reorder axes: output axis `i` is input axis `order[i]`.
    pub fn permute(&self, order: &[usize]) -> Result<JointPmf, ProbError> {
        validate_axes(order, self.rank())?;
        if order.len() != self.rank() {
            return Err(ProbError::ShapeMismatch { expected: self.rank(), got: order.len() });
        }
        let shape = self.shape();
        let new_shape: Vec<usize> = order.iter().map(|&a| shape[a]).collect();
        let strides = strides(&shape);
        let mut mass = Vec::with_capacity(self.len());
        let mut idx = vec![0usize; self.rank()];
        for _ in 0..self.len() {
            let src: usize = idx.iter().zip(order).map(|(&i, &a)| i * strides[a]).sum();
            mass.push(self.mass[src]);
            increment(&mut idx, &new_shape);
        }
        let axes = order.iter().map(|&a| self.axes[a].clone()).collect();
        Ok(JointPmf { axes, mass })
    }

    /// Conditional kernel `P(to | from)`. Rows for zero-probability
    /// conditioning tuples are filled uniformly.
    pub fn conditional(&self, to: &[usize], from: &[usize]) -> Result<ConditionalPmf, ProbError> {
        let mut all: Vec<usize> = from.to_vec();
        all.extend_from_slice(to);
        validate_axes(&all, self.rank())?;
        validate_axes(to, self.rank())?;
        validate_axes(from, self.rank())?;
        let joint = self.marginalize(&all)?;
        // marginalize sorts; restore the (from, to) order
        let mut sorted = all.clone();
        sorted.sort_unstable();
        let order: Vec<usize> = all.iter().map(|a| sorted.iter().position(|s| s == a).unwrap()).collect();
        let joint = joint.permute(&order)?;
        let from_axes: Vec<Alphabet> = from.iter().map(|&a| self.axes[a].clone()).collect();
        let to_axes: Vec<Alphabet> = to.iter().map(|&a| self.axes[a].clone()).collect();
        let cols: usize = to_axes.iter().map(Alphabet::size).product();
        let mut kernel = joint.mass;
        for row in kernel.chunks_mut(cols) {
            let s: f64 = row.iter().sum();
            if s > 0.0 {
                row.iter_mut().for_each(|v| *v /= s);
            } else {
                row.iter_mut().for_each(|v| *v = 1.0 / cols as f64);
            }
        }
        Ok(ConditionalPmf { from_axes, to_axes, kernel })
    }
}

/// Row-stochastic kernel: one distribution over `to_axes` for every tuple of
/// `from_axes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalPmf {
    from_axes: Vec<Alphabet>,
    to_axes: Vec<Alphabet>,
    kernel: Vec<f64>,
}

impl ConditionalPmf {
    pub fn new(from_axes: Vec<Alphabet>, to_axes: Vec<Alphabet>, kernel: Vec<f64>) -> Result<Self, ProbError> {
        let rows: usize = from_axes.iter().map(Alphabet::size).product();
        let cols: usize = to_axes.iter().map(Alphabet::size).product();
        if from_axes.is_empty() || to_axes.is_empty() || kernel.len() != rows * cols {
            return Err(ProbError::ShapeMismatch { expected: rows * cols, got: kernel.len() });
        }
        check_mass(&kernel)?;
        for (row, chunk) in kernel.chunks(cols).enumerate() {
            let sum = stable_sum(chunk.iter().copied());
            if (sum - 1.0).abs() > NORMALIZATION_TOL {
                return Err(ProbError::RowNotNormalized { row, sum });
            }
        }
        Ok(Self { from_axes, to_axes, kernel })
    }

    /// Single-axis kernel from a `rows x cols` matrix.
    pub fn from_matrix(from: Alphabet, to: Alphabet, kernel: Vec<f64>) -> Result<Self, ProbError> {
        Self::new(vec![from], vec![to], kernel)
    }

    /// Binary symmetric channel with crossover `q`.
    pub fn bsc(q: f64, from: &str, to: &str) -> Self {
        Self::from_matrix(Alphabet::binary(from), Alphabet::binary(to), vec![1.0 - q, q, q, 1.0 - q])
            .expect("valid crossover")
    }

    pub fn from_axes(&self) -> &[Alphabet] {
        &self.from_axes
    }

    pub fn to_axes(&self) -> &[Alphabet] {
        &self.to_axes
    }

    pub fn kernel(&self) -> &[f64] {
        &self.kernel
    }

    pub fn rows(&self) -> usize {
        self.from_axes.iter().map(Alphabet::size).product()
    }

    pub fn cols(&self) -> usize {
        self.to_axes.iter().map(Alphabet::size).product()
    }

    pub fn row(&self, r: usize) -> &[f64] {
        let c = self.cols();
        &self.kernel[r * c..(r + 1) * c]
    }

    /// Joint law of `(from, to)` when `from ~ input`; output axes are the
    /// input's axes followed by `to_axes`.
    pub fn joint_with(&self, input: &JointPmf) -> Result<JointPmf, ProbError> {
        if input.len() != self.rows() {
            return Err(ProbError::ShapeMismatch { expected: self.rows(), got: input.len() });
        }
        let cols = self.cols();
        let mut mass = Vec::with_capacity(self.kernel.len());
        for (r, &p) in input.mass().iter().enumerate() {
            mass.extend(self.kernel[r * cols..(r + 1) * cols].iter().map(|k| p * k));
        }
        let mut axes = input.axes().to_vec();
        axes.extend(self.to_axes.iter().cloned());
        Ok(JointPmf { axes, mass })
    }

    /// Append `to_axes` to `joint`, drawing them from this kernel given the
    /// axes `given` of `joint` (in kernel input order).
    pub fn extend(&self, joint: &JointPmf, given: &[usize]) -> Result<JointPmf, ProbError> {
        validate_axes(given, joint.rank())?;
        let shape = joint.shape();
        let sizes: Vec<usize> = given.iter().map(|&a| shape[a]).collect();
        let expected: Vec<usize> = self.from_axes.iter().map(Alphabet::size).collect();
        if sizes != expected {
            return Err(ProbError::ShapeMismatch { expected: self.rows(), got: sizes.iter().product() });
        }
        let st = strides(&shape);
        let cols = self.cols();
        let mut mass = Vec::with_capacity(joint.len() * cols);
        for (flat, &p) in joint.mass().iter().enumerate() {
            let mut r = 0;
            for &a in given {
                r = r * shape[a] + (flat / st[a]) % shape[a];
            }
            mass.extend(self.kernel[r * cols..(r + 1) * cols].iter().map(|k| p * k));
        }
        let mut axes = joint.axes().to_vec();
        axes.extend(self.to_axes.iter().cloned());
        Ok(JointPmf { axes, mass })
    }

    /// Distribution of the output when the input has law `input`.
    pub fn push_forward(&self, input: &JointPmf) -> Result<JointPmf, ProbError> {
        let joint = self.joint_with(input)?;
        let keep: Vec<usize> = (input.rank()..joint.rank()).collect();
        joint.marginalize(&keep)
    }

    /// Composition `from -> to -> next` as a kernel `from -> next`.
    pub fn then(&self, next: &ConditionalPmf) -> Result<ConditionalPmf, ProbError> {
        if next.rows() != self.cols() {
            return Err(ProbError::ShapeMismatch { expected: self.cols(), got: next.rows() });
        }
        let (rows, mid, cols) = (self.rows(), self.cols(), next.cols());
        let mut kernel = vec![0.0; rows * cols];
        for r in 0..rows {
            for m in 0..mid {
                let w = self.kernel[r * mid + m];
                if w == 0.0 {
                    continue;
                }
                for c in 0..cols {
                    kernel[r * cols + c] += w * next.kernel[m * cols + c];
                }
            }
        }
        Ok(ConditionalPmf { from_axes: self.from_axes.clone(), to_axes: next.to_axes.clone(), kernel })
    }
}

pub(crate) fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; shape.len()];
    for i in (0..shape.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * shape[i + 1];
    }
    s
}

pub(crate) fn flat_index(shape: &[usize], index: &[usize]) -> Result<usize, ProbError> {
    if index.len() != shape.len() {
        return Err(ProbError::ArityMismatch { expected: shape.len(), got: index.len() });
    }
    let mut flat = 0;
    for (&i, &s) in index.iter().zip(shape) {
        if i >= s {
            return Err(ProbError::SymbolOutOfRange { symbol: i, size: s });
        }
        flat = flat * s + i;
    }
    Ok(flat)
}

/// Odometer increment of a mixed-radix index (last digit fastest).
pub(crate) fn increment(idx: &mut [usize], shape: &[usize]) {
    for d in (0..idx.len()).rev() {
        idx[d] += 1;
        if idx[d] < shape[d] {
            return;
        }
        idx[d] = 0;
    }
}
