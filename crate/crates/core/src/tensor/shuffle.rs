use std::collections::BTreeMap;

use crate::error::{shape, Error, Result};

use super::{TruncatedTensor, Word};

/// Sparse linear combination of words over a fixed alphabet: a linear
/// functional on the tensor algebra.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WordPoly {
    dim: usize,
    terms: BTreeMap<Word, f64>,
}

impl WordPoly {
    pub fn new(dim: usize) -> Self {
        WordPoly {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_word(dim: usize, word: Word) -> Result<Self> {
        let mut p = Self::new(dim);
        p.add_term(word, 1.0)?;
        Ok(p)
    }

    pub fn from_terms(dim: usize, terms: impl IntoIterator<Item = (Word, f64)>) -> Result<Self> {
        let mut p = Self::new(dim);
        for (w, c) in terms {
            p.add_term(w, c)?;
        }
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn add_term(&mut self, word: Word, coeff: f64) -> Result<()> {
        word.validate(self.dim)?;
        if coeff != 0.0 {
            let slot = self.terms.entry(word).or_insert(0.0);
            *slot += coeff;
            if *slot == 0.0 {
                self.terms.retain(|_, c| *c != 0.0);
            }
        }
        Ok(())
    }

    pub fn coeff(&self, word: &Word) -> f64 {
        self.terms.get(word).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, f64)> {
        self.terms.iter().map(|(w, &c)| (w, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_word_len(&self) -> usize {
        self.terms.keys().map(Word::len).max().unwrap_or(0)
    }

    pub fn scalar(&self) -> f64 {
        self.coeff(&Word::empty())
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(shape(format!(
                "alphabets of size {} and {}",
                self.dim, other.dim
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (w, c) in other.terms() {
            out.add_term(w.clone(), c)?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, factor: f64) -> Self {
        let terms = if factor == 0.0 {
            BTreeMap::new()
        } else {
            self.terms.iter().map(|(w, c)| (w.clone(), c * factor)).collect()
        };
        WordPoly {
            dim: self.dim,
            terms,
        }
    }

    /// Concatenation product, extended bilinearly.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        self.bilinear(other, |u, v| BTreeMap::from([(u.concat(v), 1)]))
    }

    /// Shuffle product with exact integer multiplicities.
    pub fn shuffle(&self, other: &Self) -> Result<Self> {
        self.bilinear(other, shuffle_words)
    }

    /// Half-shuffle `f < g`: the shuffles of `f` and `g` in which the first
    /// letter of `f` stays first. A scalar on the left gives zero, a scalar on
    /// the right scales.
    pub fn half_shuffle(&self, other: &Self) -> Result<Self> {
        self.bilinear(other, half_shuffle_words)
    }

    /// `area(f, g) = f < g - g < f`.
    pub fn area(&self, other: &Self) -> Result<Self> {
        self.half_shuffle(other)?.sub(&other.half_shuffle(self)?)
    }

    fn bilinear(
        &self,
        other: &Self,
        rule: impl Fn(&Word, &Word) -> BTreeMap<Word, u64>,
    ) -> Result<Self> {
        self.check_dim(other)?;
        let mut acc: BTreeMap<Word, f64> = BTreeMap::new();
        for (u, a) in self.terms() {
            for (v, b) in other.terms() {
                for (w, m) in rule(u, v) {
                    *acc.entry(w).or_insert(0.0) += a * b * m as f64;
                }
            }
        }
        acc.retain(|_, c| *c != 0.0);
        Ok(WordPoly {
            dim: self.dim,
            terms: acc,
        })
    }

    /// `sum_w c_w <tensor, w>`.
    pub fn pair(&self, tensor: &TruncatedTensor) -> Result<f64> {
        if tensor.dim() != self.dim {
            return Err(shape(format!(
                "functional over {} letters against tensor over {}",
                self.dim,
                tensor.dim()
            )));
        }
        self.terms()
            .map(|(w, c)| tensor.word_coeff(w).map(|x| c * x))
            .sum()
    }

    /// Dense representation at depth `depth`; errors when a term is longer.
    pub fn to_dense(&self, depth: usize) -> Result<TruncatedTensor> {
        let mut t = TruncatedTensor::zeros(self.dim, depth)?;
        for (w, c) in self.terms() {
            if w.len() > depth {
                return Err(Error::Domain(format!(
                    "word {w} longer than depth {depth}"
                )));
            }
            let level = t.level_mut(w.len());
            level[w.level_index(self.dim)] += c;
        }
        Ok(t)
    }

    pub fn from_dense(t: &TruncatedTensor) -> Self {
        let terms = t.iter_words().filter(|(_, c)| *c != 0.0).collect();
        WordPoly {
            dim: t.dim(),
            terms,
        }
    }

    /// Largest coefficient magnitude of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        Ok(self
            .sub(other)?
            .terms()
            .map(|(_, c)| c.abs())
            .fold(0.0, f64::max))
    }
}

/// Shuffles of two words, by the last-letter recursion
/// `ua ⧢ vb = (u ⧢ vb)a + (ua ⧢ v)b`.
pub(crate) fn shuffle_words(u: &Word, v: &Word) -> BTreeMap<Word, u64> {
    let (a, b) = (u.letters(), v.letters());
    // table[i][j] = shuffles of a[..i] and b[..j]
    let mut prev: Vec<BTreeMap<Vec<u32>, u64>> = Vec::with_capacity(b.len() + 1);
    for j in 0..=b.len() {
        prev.push(BTreeMap::from([(b[..j].to_vec(), 1)]));
    }
    for i in 1..=a.len() {
        let mut row: Vec<BTreeMap<Vec<u32>, u64>> = Vec::with_capacity(b.len() + 1);
        row.push(BTreeMap::from([(a[..i].to_vec(), 1)]));
        for j in 1..=b.len() {
            let mut cell: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
            for (w, m) in &prev[j] {
                let mut w = w.clone();
                w.push(a[i - 1]);
                *cell.entry(w).or_insert(0) += m;
            }
            for (w, m) in &row[j - 1] {
                let mut w = w.clone();
                w.push(b[j - 1]);
                *cell.entry(w).or_insert(0) += m;
            }
            row.push(cell);
        }
        prev = row;
    }
    prev.pop()
        .unwrap_or_default()
        .into_iter()
        .map(|(w, m)| (Word::new(w), m))
        .collect()
}

fn half_shuffle_words(u: &Word, v: &Word) -> BTreeMap<Word, u64> {
    let Some((&first, rest)) = u.letters().split_first() else {
        return BTreeMap::new();
    };
    shuffle_words(&Word::from(rest), v)
        .into_iter()
        .map(|(w, m)| (Word::letter(first).concat(&w), m))
        .collect()
}
