//! Lyndon words, the Lyndon basis of the free Lie algebra, and
//! log-signatures expressed in that basis.

use std::collections::HashMap;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{shape, Error, Result};
use crate::paths::Path;
use crate::signature::signature;
use crate::tensor::{check_shape, TruncatedTensor, Word, WordPoly};

/// All Lyndon words of length `1..=depth` over `{1, ..., dim}`, in
/// lexicographic order (Duval's generation order).
pub fn lyndon_words(dim: usize, depth: usize) -> Vec<Word> {
    let mut out = Vec::new();
    if dim == 0 || depth == 0 {
        return out;
    }
    let d = dim as u32;
    let mut w: Vec<u32> = vec![1];
    loop {
        out.push(Word::from(w.as_slice()));
        let m = w.len();
        while w.len() < depth {
            w.push(w[w.len() - m]);
        }
        while w.last() == Some(&d) {
            w.pop();
        }
        match w.last_mut() {
            Some(last) => *last += 1,
            None => break,
        }
    }
    out
}

/// `beta(d, N) = sum_{k=1}^{N} (1/k) sum_{i | k} mu(k/i) d^i`, the dimension
/// of the free Lie algebra truncated at depth `N`.
pub fn lie_dimension(dim: usize, depth: usize) -> usize {
    let mut total: i128 = 0;
    for k in 1..=depth {
        let mut necklaces: i128 = 0;
        for i in 1..=k {
            if k % i == 0 {
                necklaces += mobius(k / i) as i128 * (dim as i128).pow(i as u32);
            }
        }
        total += necklaces / k as i128;
    }
    total as usize
}

fn mobius(mut n: usize) -> i32 {
    let mut result = 1;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            result = -result;
        }
        p += 1;
    }
    if n > 1 {
        result = -result;
    }
    result
}

pub fn is_lyndon(word: &[u32]) -> bool {
    !word.is_empty() && (1..word.len()).all(|r| word < &word[r..] && {
        let mut rot = word[r..].to_vec();
        rot.extend_from_slice(&word[..r]);
        word < rot.as_slice()
    })
}

/// Standard factorisation `w = u v` with `v` the longest proper Lyndon
/// suffix. `None` for single letters.
pub fn standard_factorization(word: &Word) -> Option<(Word, Word)> {
    let l = word.letters();
    (1..l.len())
        .find(|&i| is_lyndon(&l[i..]))
        .map(|i| (Word::from(&l[..i]), Word::from(&l[i..])))
}

/// Expands the bracketing of Lyndon words, `P_a = a` and
/// `P_w = [P_u, P_v]` along the standard factorisation.
#[derive(Debug, Default)]
pub struct BracketExpander {
    dim: usize,
    cache: HashMap<Word, WordPoly>,
}

impl BracketExpander {
    pub fn new(dim: usize) -> Self {
        BracketExpander {
            dim,
            cache: HashMap::new(),
        }
    }

    pub fn expand(&mut self, word: &Word) -> Result<WordPoly> {
        if let Some(p) = self.cache.get(word) {
            return Ok(p.clone());
        }
        let poly = match standard_factorization(word) {
            None => WordPoly::from_word(self.dim, word.clone())?,
            Some((u, v)) => {
                let pu = self.expand(&u)?;
                let pv = self.expand(&v)?;
                pu.concat(&pv)?.sub(&pv.concat(&pu)?)?
            }
        };
        self.cache.insert(word.clone(), poly.clone());
        Ok(poly)
    }
}

/// Coordinates of a free Lie algebra element in the Lyndon basis, ordered
/// like [`lyndon_words`].
#[derive(Debug, Clone, PartialEq)]
pub struct LieElement {
    dim: usize,
    depth: usize,
    words: Vec<Word>,
    coeffs: Vec<f64>,
}

impl LieElement {
    pub fn new(dim: usize, depth: usize, coeffs: Vec<f64>) -> Result<Self> {
        let words = lyndon_words(dim, depth);
        if coeffs.len() != words.len() {
            return Err(shape(format!(
                "{} coefficients for a basis of size {}",
                coeffs.len(),
                words.len()
            )));
        }
        Ok(LieElement {
            dim,
            depth,
            words,
            coeffs,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, word: &Word) -> Option<f64> {
        self.words
            .binary_search(word)
            .ok()
            .map(|i| self.coeffs[i])
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Solves `sum_w c_w P_w = log` for a tensor in the free Lie algebra.
    ///
    /// `P_w` equals `w` plus words lexicographically greater than `w` of the
    /// same length, so sweeping each level in increasing order is a
    /// unitriangular solve.
    pub fn from_tensor(log: &TruncatedTensor) -> Result<Self> {
        let (dim, depth) = (log.dim(), log.depth());
        let words = lyndon_words(dim, depth);
        let mut expander = BracketExpander::new(dim);
        let mut residual: Vec<Vec<f64>> = log.levels().to_vec();
        let mut coeffs = Vec::with_capacity(words.len());
        for w in &words {
            let k = w.len();
            let c = residual[k][w.level_index(dim)];
            let p = expander.expand(w)?;
            debug_assert_eq!(p.coeff(w), 1.0);
            if c != 0.0 {
                for (u, m) in p.terms() {
                    residual[k][u.level_index(dim)] -= c * m;
                }
            }
            coeffs.push(c);
        }
        Ok(LieElement {
            dim,
            depth,
            words,
            coeffs,
        })
    }

    /// `sum_w c_w P_w` in the tensor basis.
    pub fn to_tensor(&self) -> Result<TruncatedTensor> {
        let mut t = TruncatedTensor::zeros(self.dim, self.depth)?;
        let mut expander = BracketExpander::new(self.dim);
        for (w, &c) in self.words.iter().zip(&self.coeffs) {
            if c == 0.0 {
                continue;
            }
            for (u, m) in expander.expand(w)?.terms() {
                t.level_mut(u.len())[u.level_index(self.dim)] += c * m;
            }
        }
        Ok(t)
    }
}

#[derive(Serialize, Deserialize)]
struct RawLie {
    d: usize,
    #[serde(rename = "N")]
    n: usize,
    coefficients: serde_json::Map<String, serde_json::Value>,
}

impl Serialize for LieElement {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let coefficients = self
            .words
            .iter()
            .zip(&self.coeffs)
            .map(|(w, &c)| (w.to_string(), serde_json::Value::from(c)))
            .collect();
        RawLie {
            d: self.dim,
            n: self.depth,
            coefficients,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for LieElement {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = RawLie::deserialize(deserializer)?;
        let words = lyndon_words(raw.d, raw.n);
        let mut coeffs = vec![0.0; words.len()];
        for (key, value) in raw.coefficients {
            let w: Word = key.parse().map_err(D::Error::custom)?;
            let i = words
                .binary_search(&w)
                .map_err(|_| D::Error::custom(format!("{key:?} is not a Lyndon basis word")))?;
            coeffs[i] = value
                .as_f64()
                .ok_or_else(|| D::Error::custom(format!("coefficient of {key:?} is not a number")))?;
        }
        LieElement::new(raw.d, raw.n, coeffs).map_err(D::Error::custom)
    }
}

/// Log-signature of `path` in the Lyndon basis.
pub fn log_signature(path: &Path, depth: usize) -> Result<LieElement> {
    if depth == 0 {
        return Err(Error::Precondition("log-signatures need depth >= 1".into()));
    }
    check_shape(path.dim(), depth)?;
    let log = signature(path, depth)?.log()?;
    LieElement::from_tensor(&log)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(letters: &[u32]) -> Word {
        Word::from(letters)
    }

    /// Brute-force oracle: every word, kept when strictly smaller than all
    /// its proper rotations.
    fn brute_force_lyndon(dim: usize, depth: usize) -> Vec<Word> {
        let mut out = Vec::new();
        for k in 1..=depth {
            for idx in 0..dim.pow(k as u32) {
                let word = Word::from_level_index(idx, k, dim);
                let l = word.letters();
                let minimal = (1..k).all(|r| {
                    let mut rot = l[r..].to_vec();
                    rot.extend_from_slice(&l[..r]);
                    l < rot.as_slice()
                });
                if minimal {
                    out.push(word);
                }
            }
        }
        out.sort();
        out
    }

    #[test]
    fn small_cases() {
        assert_eq!(lyndon_words(1, 3), vec![w(&[1])]);
        assert_eq!(
            lyndon_words(2, 3),
            vec![w(&[1]), w(&[1, 1, 2]), w(&[1, 2]), w(&[1, 2, 2]), w(&[2])]
        );
    }

    #[test]
    fn generation_matches_brute_force_and_mobius() {
        for d in 1..=4 {
            for n in 1..=6 {
                let words = lyndon_words(d, n);
                assert_eq!(words, brute_force_lyndon(d, n), "d={d} N={n}");
                assert_eq!(words.len(), lie_dimension(d, n), "d={d} N={n}");
            }
        }
    }

    #[test]
    fn standard_factorizations() {
        assert_eq!(standard_factorization(&w(&[1])), None);
        assert_eq!(
            standard_factorization(&w(&[1, 1, 2])),
            Some((w(&[1]), w(&[1, 2])))
        );
        assert_eq!(
            standard_factorization(&w(&[1, 2, 2])),
            Some((w(&[1, 2]), w(&[2])))
        );
        assert_eq!(
            standard_factorization(&w(&[1, 1, 2, 1, 2])),
            Some((w(&[1, 1, 2]), w(&[1, 2])))
        );
    }

    #[test]
    fn brackets_are_unitriangular() {
        let mut ex = BracketExpander::new(3);
        for word in lyndon_words(3, 5) {
            let p = ex.expand(&word).unwrap();
            assert_eq!(p.coeff(&word), 1.0);
            assert!(p.terms().all(|(u, _)| u.len() == word.len() && u >= &word));
        }
        let p = ex.expand(&w(&[1, 2])).unwrap();
        assert_eq!(p.coeff(&w(&[2, 1])), -1.0);
    }

    #[test]
    fn linear_path_log_signature() {
        let p = Path::linear(&[0.0, 0.0, 0.0], &[0.3, -1.0, 2.0], 0.0, 1.0).unwrap();
        let l = log_signature(&p, 4).unwrap();
        assert_eq!(l.len(), lie_dimension(3, 4));
        for (word, c) in l.words().iter().zip(l.coeffs()) {
            if word.len() == 1 {
                let want = [0.3, -1.0, 2.0][word.letters()[0] as usize - 1];
                assert!((c - want).abs() < 1e-14);
            } else {
                assert!(c.abs() < 1e-14, "{word}: {c}");
            }
        }
    }

    #[test]
    fn axis_path_area() {
        let p = Path::from_points(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let l = log_signature(&p, 2).unwrap();
        assert_eq!(l.coeff(&w(&[1])), Some(1.0));
        assert_eq!(l.coeff(&w(&[2])), Some(1.0));
        assert_eq!(l.coeff(&w(&[1, 2])), Some(0.5));
    }

    #[test]
    fn round_trip_through_exp() {
        let p = Path::from_points(vec![
            vec![0.0, 0.0, 0.0],
            vec![0.4, -0.2, 0.1],
            vec![-0.3, 0.5, 0.9],
            vec![0.2, 0.1, -0.6],
        ])
        .unwrap();
        let depth = 5;
        let l = log_signature(&p, depth).unwrap();
        let back = l.to_tensor().unwrap().exp().unwrap();
        let sig = signature(&p, depth).unwrap();
        assert!(back.tensor().approx_eq(sig.tensor(), 1e-10, 1e-12));
    }

    #[test]
    fn json_round_trip() {
        let p = Path::from_points(vec![vec![0.0, 0.0], vec![1.0, 0.5], vec![0.2, 2.0]]).unwrap();
        let l = log_signature(&p, 3).unwrap();
        let s = serde_json::to_string(&l).unwrap();
        assert!(s.starts_with(r#"{"d":2,"N":3,"coefficients":{"1":"#));
        let back: LieElement = serde_json::from_str(&s).unwrap();
        assert_eq!(back, l);
        assert!(serde_json::from_str::<LieElement>(r#"{"d":2,"N":2,"coefficients":{"2,1":1.0}}"#).is_err());
    }

    #[test]
    fn depth_zero_is_rejected() {
        let p = Path::from_points(vec![vec![0.0], vec![1.0]]).unwrap();
        assert!(log_signature(&p, 0).is_err());
    }
}
