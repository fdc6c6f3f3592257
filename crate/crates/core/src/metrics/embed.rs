//! Word-vector tables and sentence encoders for DM similarity.

use std::collections::HashMap;
use std::io::BufRead;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::text::{dm_key, is_punctuation, tokenize};

/// Word vectors of one fixed dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable<F> {
    dim: usize,
    vectors: HashMap<String, Vec<F>>,
}

impl<F: Float> EmbeddingTable<F> {
    pub fn new(dim: usize) -> Self {
        EmbeddingTable {
            dim,
            vectors: HashMap::new(),
        }
    }

    pub fn insert(&mut self, word: impl Into<String>, vector: Vec<F>) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::LengthMismatch {
                what: "vector vs table dimension",
                left: vector.len(),
                right: self.dim,
            });
        }
        self.vectors.insert(word.into(), vector);
        Ok(())
    }

    /// Text format: a `count dimension` header, then `word v1 ... vd`.
    pub fn read<R: BufRead>(reader: R, source: &str) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let header = match lines.next() {
            Some((_, l)) => l?,
            None => return Err(Error::parse(source, 1, "missing header")),
        };
        let nums: Vec<usize> = header
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::parse(source, 1, "header must be `count dimension`"))?;
        let [count, dim] = nums[..] else {
            return Err(Error::parse(source, 1, "header must be `count dimension`"));
        };
        let mut table = Self::new(dim);
        for (n, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let word = parts.next().unwrap_or_default();
            let vector = parts
                .map(|p| p.parse::<f64>().ok().and_then(F::from))
                .collect::<Option<Vec<F>>>()
                .ok_or_else(|| Error::parse(source, n + 1, "unparsable vector component"))?;
            if vector.len() != dim {
                return Err(Error::parse(
                    source,
                    n + 1,
                    format!("expected {dim} components, found {}", vector.len()),
                ));
            }
            table.vectors.insert(word.to_string(), vector);
        }
        if table.vectors.len() != count {
            return Err(Error::parse(
                source,
                1,
                format!("header announces {count} words, file has {}", table.vectors.len()),
            ));
        }
        Ok(table)
    }

    /// The small frozen table shipped for tests and demos.
    pub fn demo() -> Self {
        Self::read(crate::data::DEMO_VECTORS.as_bytes(), "demo_vectors.txt").expect("bundled vectors")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Exact lookup, then lowercase.
    pub fn get(&self, word: &str) -> Option<&[F]> {
        self.vectors
            .get(word)
            .or_else(|| self.vectors.get(&word.to_lowercase()))
            .map(Vec::as_slice)
    }

    /// Mean of the in-vocabulary token vectors; `None` when there are none.
    pub fn average(&self, text: &str) -> Option<Vec<F>> {
        let mut sum = vec![F::zero(); self.dim];
        let mut n = 0usize;
        for tok in tokenize(text).iter().filter(|t| !is_punctuation(t)) {
            if let Some(v) = self.get(tok) {
                for (s, x) in sum.iter_mut().zip(v) {
                    *s = *s + *x;
                }
                n += 1;
            }
        }
        let n = F::from(n)?;
        (n > F::zero()).then(|| sum.into_iter().map(|s| s / n).collect())
    }
}

/// Cosine similarity clamped to `[0, 1]`; zero vectors score 0.
pub fn cosine<F: Float>(a: &[F], b: &[F]) -> F {
    let (mut dot, mut na, mut nb) = (F::zero(), F::zero(), F::zero());
    for (&x, &y) in a.iter().zip(b) {
        dot = dot + x * y;
        na = na + x * x;
        nb = nb + y * y;
    }
    if na <= F::zero() || nb <= F::zero() {
        return F::zero();
    }
    (dot / (na.sqrt() * nb.sqrt())).max(F::zero()).min(F::one())
}

fn same_dm(a: &str, b: &str) -> bool {
    let a = dm_key(a);
    !a.is_empty() && a == dm_key(b)
}

/// Cosine of the averaged word vectors of the two DMs.
pub fn avg_vector_similarity<F: Float>(pred: &str, gold: &str, table: &EmbeddingTable<F>) -> F {
    if same_dm(pred, gold) {
        return F::one();
    }
    match (table.average(pred), table.average(gold)) {
        (Some(p), Some(g)) => cosine(&p, &g),
        _ => F::zero(),
    }
}

/// A text-embedding provider. `None` means the encoder cannot serve the
/// text, so any metric that depends on it must be left out.
pub trait SentenceEncoder<F>: Sync {
    fn name(&self) -> &str;
    fn encode(&self, text: &str) -> Option<Vec<F>>;
}

/// Cosine of the two encodings, or `None` when the encoder is unavailable.
pub fn sentence_similarity<F: Float>(pred: &str, gold: &str, enc: &dyn SentenceEncoder<F>) -> Option<F> {
    let p = enc.encode(pred)?;
    let g = enc.encode(gold)?;
    if pred.trim() == gold.trim() && !pred.trim().is_empty() {
        return Some(F::one());
    }
    Some(cosine(&p, &g))
}

/// Encodes a text as the average of its word vectors (zero if none).
pub struct TableEncoder<'a, F> {
    pub table: &'a EmbeddingTable<F>,
}

impl<F: Float + Sync + Send> SentenceEncoder<F> for TableEncoder<'_, F> {
    fn name(&self) -> &str {
        "avg-word-vectors"
    }

    fn encode(&self, text: &str) -> Option<Vec<F>> {
        Some(
            self.table
                .average(text)
                .unwrap_or_else(|| vec![F::zero(); self.table.dim()]),
        )
    }
}

/// Encodings computed elsewhere (e.g. by a sentence-embedding model) and
/// stored as `text<TAB>v1 v2 ...` lines.
#[derive(Debug, Clone, Default)]
pub struct PrecomputedEncoder<F> {
    vectors: HashMap<String, Vec<F>>,
}

impl<F: Float> PrecomputedEncoder<F> {
    pub fn read<R: BufRead>(reader: R, source: &str) -> Result<Self> {
        let mut vectors = HashMap::new();
        let mut dim = None;
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (text, vec) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(source, n + 1, "expected text<TAB>vector"))?;
            let v = vec
                .split_whitespace()
                .map(|p| p.parse::<f64>().ok().and_then(F::from))
                .collect::<Option<Vec<F>>>()
                .ok_or_else(|| Error::parse(source, n + 1, "unparsable vector component"))?;
            if *dim.get_or_insert(v.len()) != v.len() || v.is_empty() {
                return Err(Error::parse(source, n + 1, "inconsistent vector dimension"));
            }
            vectors.insert(dm_key(text), v);
        }
        Ok(PrecomputedEncoder { vectors })
    }
}

impl<F: Float + Sync + Send> SentenceEncoder<F> for PrecomputedEncoder<F> {
    fn name(&self) -> &str {
        "precomputed"
    }

    fn encode(&self, text: &str) -> Option<Vec<F>> {
        self.vectors.get(&dm_key(text)).cloned()
    }
}
