//! Dense arithmetic in the truncated tensor algebra over a `d`-letter alphabet.
//!
//! Level `k` of a [`TruncatedTensor`] stores the `d^k` coefficients of the
//! words of length `k` in word-lexicographic order, so word `(i1, ..., ik)`
//! lives at offset `sum_j (i_j - 1) d^(k-j)`. Products, exponentials and
//! logarithms are exact finite sums because everything above the truncation
//! depth is discarded.

mod shuffle;
pub(crate) mod weights;
mod word;

use serde::{Deserialize, Serialize};

use crate::error::{shape, Error, Result};

pub use shuffle::WordPoly;
pub use weights::{MomentDistribution, WeightSequence};
pub use word::Word;

/// Hard cap on the truncation depth.
pub const MAX_DEPTH: usize = 16;
/// Hard cap on the size of the top level, `d^N`.
pub const MAX_LEVEL_SIZE: usize = 10_000_000;

/// Relative tolerance used by [`TruncatedTensor::approx_eq_default`].
pub const DEFAULT_REL_TOL: f64 = 1e-12;
/// Absolute floor used by [`TruncatedTensor::approx_eq_default`].
pub const DEFAULT_ABS_TOL: f64 = 1e-14;

/// Validates `(dim, depth)` against the storage guards.
pub fn check_shape(dim: usize, depth: usize) -> Result<()> {
    if dim == 0 {
        return Err(shape("alphabet dimension must be positive"));
    }
    if depth > MAX_DEPTH {
        return Err(Error::Resource(format!(
            "depth {depth} exceeds the cap of {MAX_DEPTH}"
        )));
    }
    let top = (dim as u128).checked_pow(depth as u32);
    match top {
        Some(n) if n <= MAX_LEVEL_SIZE as u128 => Ok(()),
        _ => Err(Error::Resource(format!(
            "level size {dim}^{depth} exceeds {MAX_LEVEL_SIZE} coefficients"
        ))),
    }
}

/// Element of the depth-`N` truncated tensor algebra over `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTensor", into = "RawTensor")]
pub struct TruncatedTensor {
    dim: usize,
    depth: usize,
    levels: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct RawTensor {
    d: usize,
    #[serde(rename = "N")]
    n: usize,
    levels: Vec<Vec<f64>>,
}

impl TryFrom<RawTensor> for TruncatedTensor {
    type Error = Error;

    fn try_from(raw: RawTensor) -> Result<Self> {
        TruncatedTensor::from_levels(raw.d, raw.n, raw.levels)
    }
}

impl From<TruncatedTensor> for RawTensor {
    fn from(t: TruncatedTensor) -> Self {
        RawTensor {
            d: t.dim,
            n: t.depth,
            levels: t.levels,
        }
    }
}

impl TruncatedTensor {
    pub fn zeros(dim: usize, depth: usize) -> Result<Self> {
        check_shape(dim, depth)?;
        let levels = (0..=depth).map(|k| vec![0.0; dim.pow(k as u32)]).collect();
        Ok(TruncatedTensor { dim, depth, levels })
    }

    /// The unit `(1, 0, ..., 0)`.
    pub fn unit(dim: usize, depth: usize) -> Result<Self> {
        let mut t = Self::zeros(dim, depth)?;
        t.levels[0][0] = 1.0;
        Ok(t)
    }

    pub fn from_levels(dim: usize, depth: usize, levels: Vec<Vec<f64>>) -> Result<Self> {
        check_shape(dim, depth)?;
        if levels.len() != depth + 1 {
            return Err(shape(format!(
                "expected {} levels, got {}",
                depth + 1,
                levels.len()
            )));
        }
        for (k, level) in levels.iter().enumerate() {
            let want = dim.pow(k as u32);
            if level.len() != want {
                return Err(shape(format!(
                    "level {k} has {} coefficients, expected {want}",
                    level.len()
                )));
            }
            if level.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "level {k} contains a non-finite coefficient"
                )));
            }
        }
        Ok(TruncatedTensor { dim, depth, levels })
    }

    /// Tensor with only level 1 populated.
    pub fn from_vector(v: &[f64], depth: usize) -> Result<Self> {
        let mut t = Self::zeros(v.len(), depth)?;
        if depth >= 1 {
            t.levels[1].copy_from_slice(v);
        }
        Ok(t)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn level(&self, k: usize) -> &[f64] {
        &self.levels[k]
    }

    pub fn level_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.levels[k]
    }

    pub fn levels(&self) -> &[Vec<f64>] {
        &self.levels
    }

    pub fn scalar(&self) -> f64 {
        self.levels[0][0]
    }

    /// All coefficients, level by level.
    pub fn flatten(&self) -> Vec<f64> {
        self.levels.iter().flatten().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_finite(&self) -> bool {
        self.levels.iter().flatten().all(|c| c.is_finite())
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim || self.depth != other.depth {
            return Err(shape(format!(
                "(d={}, N={}) vs (d={}, N={})",
                self.dim, self.depth, other.dim, other.depth
            )));
        }
        Ok(())
    }

    /// Coefficient of `word`.
    pub fn word_coeff(&self, word: &Word) -> Result<f64> {
        if word.len() > self.depth {
            return Err(Error::Domain(format!(
                "word of length {} beyond depth {}",
                word.len(),
                self.depth
            )));
        }
        word.validate(self.dim)?;
        Ok(self.levels[word.len()][word.level_index(self.dim)])
    }

    pub fn set_word_coeff(&mut self, word: &Word, value: f64) -> Result<()> {
        if word.len() > self.depth {
            return Err(Error::Domain(format!(
                "word of length {} beyond depth {}",
                word.len(),
                self.depth
            )));
        }
        word.validate(self.dim)?;
        self.levels[word.len()][word.level_index(self.dim)] = value;
        Ok(())
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.levels.iter_mut().flatten().for_each(|c| *c *= factor);
        out
    }

    /// Multiplies level `k` by `factor^k`, i.e. the image under the dilation
    /// of the underlying vector space.
    pub fn dilate(&self, factor: f64) -> Self {
        let mut out = self.clone();
        let mut f = 1.0;
        for level in out.levels.iter_mut() {
            level.iter_mut().for_each(|c| *c *= f);
            f *= factor;
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (a, b) in out.levels.iter_mut().zip(&other.levels) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (a, b) in out.levels.iter_mut().zip(&other.levels) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x -= y);
        }
        Ok(out)
    }

    /// Truncated tensor product: level `i` of the result is
    /// `sum_{l=0}^{i} a_l (x) b_{i-l}`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let d = self.dim;
        let mut out = Self::zeros(d, self.depth)?;
        for i in 0..=self.depth {
            let target = &mut out.levels[i];
            for l in 0..=i {
                let a = &self.levels[l];
                let b = &other.levels[i - l];
                let stride = b.len();
                for (ia, &av) in a.iter().enumerate() {
                    if av == 0.0 {
                        continue;
                    }
                    let row = &mut target[ia * stride..(ia + 1) * stride];
                    row.iter_mut().zip(b).for_each(|(t, &bv)| *t += av * bv);
                }
            }
        }
        Ok(out)
    }

    /// In-place right multiplication by `exp(increment)`, where `increment`
    /// is a level-1 vector. Uses a Horner evaluation per level, top level
    /// first so lower levels are still the old values when read.
    pub fn mul_exp_in_place(&mut self, increment: &[f64]) -> Result<()> {
        if increment.len() != self.dim {
            return Err(shape(format!(
                "increment of dimension {} against alphabet {}",
                increment.len(),
                self.dim
            )));
        }
        let mut scratch: Vec<f64> = Vec::new();
        let mut next: Vec<f64> = Vec::new();
        for k in (1..=self.depth).rev() {
            // B = S_0; B = B (x) v / (k - i + 1) + S_i for i = 1..=k
            scratch.clear();
            scratch.extend_from_slice(&self.levels[0]);
            for i in 1..=k {
                let c = 1.0 / (k - i + 1) as f64;
                next.clear();
                next.reserve(scratch.len() * self.dim);
                for &b in scratch.iter() {
                    let bc = b * c;
                    next.extend(increment.iter().map(|&v| bc * v));
                }
                next.iter_mut()
                    .zip(&self.levels[i])
                    .for_each(|(n, &s)| *n += s);
                std::mem::swap(&mut scratch, &mut next);
            }
            self.levels[k].copy_from_slice(&scratch);
        }
        Ok(())
    }

    /// Truncated exponential `sum_{k<=N} v^k / k!`. Requires a zero scalar
    /// level so the series is the exact truncated one.
    pub fn exp(&self) -> Result<GroupLike> {
        if self.scalar() != 0.0 {
            return Err(Error::Precondition(format!(
                "tensor_exp needs a zero scalar level, got {}",
                self.scalar()
            )));
        }
        // 1 + v(1 + v/2(1 + v/3(...)))
        let unit = Self::unit(self.dim, self.depth)?;
        let mut acc = unit.clone();
        for k in (1..=self.depth).rev() {
            acc = unit.add(&self.mul(&acc)?.scale(1.0 / k as f64))?;
        }
        Ok(GroupLike(acc))
    }

    /// `exp` of a level-1 vector via the outer-power closed form.
    pub fn exp_vector(v: &[f64], depth: usize) -> Result<GroupLike> {
        let mut t = Self::unit(v.len(), depth)?;
        t.mul_exp_in_place(v)?;
        Ok(GroupLike(t))
    }

    pub fn hs_inner(&self, other: &Self) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .levels
            .iter()
            .zip(&other.levels)
            .map(|(a, b)| dot(a, b))
            .sum())
    }

    /// Per-level Hilbert-Schmidt pairings `<a_k, b_k>`.
    pub fn level_inners(&self, other: &Self) -> Result<Vec<f64>> {
        self.check_same_shape(other)?;
        Ok(self
            .levels
            .iter()
            .zip(&other.levels)
            .map(|(a, b)| dot(a, b))
            .collect())
    }

    /// `sum_k phi(k) <a_k, b_k>`.
    pub fn phi_inner(&self, other: &Self, phi: &WeightSequence) -> Result<f64> {
        let inners = self.level_inners(other)?;
        let mut total = 0.0;
        for (k, v) in inners.into_iter().enumerate() {
            total += phi.weight(k)? * v;
        }
        Ok(total)
    }

    pub fn level_norm(&self, k: usize) -> f64 {
        dot(&self.levels[k], &self.levels[k]).sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .levels
            .iter()
            .flatten()
            .zip(other.levels.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Coefficient-wise `|a - b| <= max(abs, rel * max(|a|, |b|))`.
    pub fn approx_eq(&self, other: &Self, rel: f64, abs: f64) -> bool {
        if self.dim != other.dim || self.depth != other.depth {
            return false;
        }
        self.levels
            .iter()
            .flatten()
            .zip(other.levels.iter().flatten())
            .all(|(a, b)| (a - b).abs() <= abs.max(rel * a.abs().max(b.abs())))
    }

    pub fn approx_eq_default(&self, other: &Self) -> bool {
        self.approx_eq(other, DEFAULT_REL_TOL, DEFAULT_ABS_TOL)
    }

    /// Drops every level above `depth`.
    pub fn truncate(&self, depth: usize) -> Self {
        let depth = depth.min(self.depth);
        TruncatedTensor {
            dim: self.dim,
            depth,
            levels: self.levels[..=depth].to_vec(),
        }
    }

    /// Iterates `(word, coefficient)` in level then lexicographic order.
    pub fn iter_words(&self) -> impl Iterator<Item = (Word, f64)> + '_ {
        let d = self.dim;
        self.levels.iter().enumerate().flat_map(move |(k, level)| {
            level
                .iter()
                .enumerate()
                .map(move |(i, &c)| (Word::from_level_index(i, k, d), c))
        })
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A truncated tensor whose scalar level is exactly one, such as a
/// signature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TruncatedTensor", into = "TruncatedTensor")]
pub struct GroupLike(TruncatedTensor);

impl TryFrom<TruncatedTensor> for GroupLike {
    type Error = Error;

    fn try_from(t: TruncatedTensor) -> Result<Self> {
        GroupLike::new(t)
    }
}

impl From<GroupLike> for TruncatedTensor {
    fn from(g: GroupLike) -> Self {
        g.0
    }
}

impl GroupLike {
    pub fn new(t: TruncatedTensor) -> Result<Self> {
        if t.scalar() != 1.0 {
            return Err(Error::Precondition(format!(
                "group-like elements need scalar level 1, got {}",
                t.scalar()
            )));
        }
        Ok(GroupLike(t))
    }

    pub fn unit(dim: usize, depth: usize) -> Result<Self> {
        TruncatedTensor::unit(dim, depth).map(GroupLike)
    }

    pub fn tensor(&self) -> &TruncatedTensor {
        &self.0
    }

    pub fn into_tensor(self) -> TruncatedTensor {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn depth(&self) -> usize {
        self.0.depth
    }

    pub fn mul(&self, other: &GroupLike) -> Result<GroupLike> {
        self.0.mul(&other.0).map(GroupLike)
    }

    pub fn mul_exp_in_place(&mut self, increment: &[f64]) -> Result<()> {
        self.0.mul_exp_in_place(increment)
    }

    pub fn word_coeff(&self, word: &Word) -> Result<f64> {
        self.0.word_coeff(word)
    }

    /// Truncated logarithm `sum_{k=1}^{N} (-1)^(k+1) (g - 1)^k / k`.
    pub fn log(&self) -> Result<TruncatedTensor> {
        let t = &self.0;
        let unit = TruncatedTensor::unit(t.dim, t.depth)?;
        let x = t.sub(&unit)?;
        // x(1 - x(1/2 - x(1/3 - ...))), innermost coefficient first
        let mut acc = TruncatedTensor::zeros(t.dim, t.depth)?;
        for k in (1..=t.depth).rev() {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            let coeff = unit.scale(sign / k as f64);
            acc = coeff.add(&x.mul(&acc)?)?;
        }
        let mut out = x.mul(&acc)?;
        out.levels[0][0] = 0.0;
        Ok(out)
    }

    /// Inverse in the group: the signature of the reversed path.
    pub fn inverse(&self) -> Result<GroupLike> {
        self.log()?.scale(-1.0).exp()
    }
}
