//! Needleman-Wunsch global alignment of token sequences and BIO label
//! projection across the resulting alignment.

use num_traits::{Num, Signed};
use serde::{Deserialize, Serialize};

use crate::bio::{LabelSequence, Tag};
use crate::error::{Error, Result};

/// Score type usable by the aligner.
pub trait Score: Num + Signed + Copy + PartialOrd {}

impl<T: Num + Signed + Copy + PartialOrd> Score for T {}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoringScheme<S> {
    pub match_score: S,
    pub mismatch: S,
    pub gap: S,
}

impl<S: Score> Default for ScoringScheme<S> {
    fn default() -> Self {
        ScoringScheme {
            match_score: S::one(),
            mismatch: -S::one(),
            gap: -S::one(),
        }
    }
}

impl<S: Score> ScoringScheme<S> {
    pub fn pair<T: AsRef<str>, U: AsRef<str>>(&self, a: T, b: U) -> S {
        if tokens_equal(a.as_ref(), b.as_ref()) {
            self.match_score
        } else {
            self.mismatch
        }
    }
}

/// Case-insensitive token equality.
pub fn tokens_equal(a: &str, b: &str) -> bool {
    a == b || a.to_lowercase() == b.to_lowercase()
}

/// One column of an alignment: an index into A, an index into B, or both.
pub type AlignedPair = (Option<usize>, Option<usize>);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alignment<S> {
    pub pairs: Vec<AlignedPair>,
    pub score: S,
    pub len_a: usize,
    pub len_b: usize,
}

impl<S: Score> Alignment<S> {
    /// The alignment of `0..n` with itself.
    pub fn identity(n: usize, scheme: &ScoringScheme<S>) -> Self {
        let mut score = S::zero();
        for _ in 0..n {
            score = score + scheme.match_score;
        }
        Alignment {
            pairs: (0..n).map(|i| (Some(i), Some(i))).collect(),
            score,
            len_a: n,
            len_b: n,
        }
    }

    /// Score of the pairs under `scheme`, independent of the stored total.
    pub fn rescore<A: AsRef<str>, B: AsRef<str>>(&self, a: &[A], b: &[B], scheme: &ScoringScheme<S>) -> S {
        self.pairs.iter().fold(S::zero(), |acc, p| {
            acc + match *p {
                (Some(i), Some(j)) => scheme.pair(a[i].as_ref(), b[j].as_ref()),
                _ => scheme.gap,
            }
        })
    }

    /// Same alignment with the roles of A and B exchanged.
    pub fn swapped(&self) -> Self {
        Alignment {
            pairs: self.pairs.iter().map(|&(a, b)| (b, a)).collect(),
            score: self.score,
            len_a: self.len_b,
            len_b: self.len_a,
        }
    }

    /// For each B index, the A index it is aligned to.
    pub fn b_to_a(&self) -> Vec<Option<usize>> {
        let mut out = vec![None; self.len_b];
        for &(a, b) in &self.pairs {
            if let Some(j) = b {
                out[j] = a;
            }
        }
        out
    }

    pub fn gap_count(&self) -> usize {
        self.pairs.iter().filter(|(a, b)| a.is_none() || b.is_none()).count()
    }

    /// Checks that each side's indices appear once, in increasing order.
    pub fn is_well_formed(&self) -> bool {
        let side = |pick: fn(&AlignedPair) -> Option<usize>, n: usize| {
            let idx: Vec<usize> = self.pairs.iter().filter_map(pick).collect();
            idx.len() == n && idx.iter().enumerate().all(|(k, &i)| k == i)
        };
        self.pairs.iter().all(|p| p.0.is_some() || p.1.is_some())
            && side(|p| p.0, self.len_a)
            && side(|p| p.1, self.len_b)
    }
}

const DIAG: u8 = 0;
const UP: u8 = 1; // A token against a gap
const LEFT: u8 = 2; // B token against a gap

/// Globally optimal alignment of `a` and `b`.
///
/// Scores are kept one row at a time; the traceback reads a full direction
/// matrix. Walking back from the end, ties prefer the diagonal, then a gap
/// in B, then a gap in A.
pub fn needleman_wunsch<A: AsRef<str>, B: AsRef<str>, S: Score>(
    a: &[A],
    b: &[B],
    scheme: &ScoringScheme<S>,
) -> Alignment<S> {
    let (n, m) = (a.len(), b.len());
    let a_keys: Vec<String> = a.iter().map(|t| t.as_ref().to_lowercase()).collect();
    let b_keys: Vec<String> = b.iter().map(|t| t.as_ref().to_lowercase()).collect();
    let width = m + 1;
    let mut dir = vec![LEFT; (n + 1) * width];
    let mut prev: Vec<S> = Vec::with_capacity(width);
    let mut acc = S::zero();
    prev.push(acc);
    for _ in 0..m {
        acc = acc + scheme.gap;
        prev.push(acc);
    }
    let mut cur = prev.clone();

    for i in 1..=n {
        cur[0] = prev[0] + scheme.gap;
        dir[i * width] = UP;
        for j in 1..=m {
            let pair = if a_keys[i - 1] == b_keys[j - 1] {
                scheme.match_score
            } else {
                scheme.mismatch
            };
            let diag = prev[j - 1] + pair;
            let up = prev[j] + scheme.gap;
            let left = cur[j - 1] + scheme.gap;
            let (mut best, mut d) = (diag, DIAG);
            if up > best {
                best = up;
                d = UP;
            }
            if left > best {
                best = left;
                d = LEFT;
            }
            cur[j] = best;
            dir[i * width + j] = d;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    let score = prev[m];

    let mut pairs = Vec::with_capacity(n + m);
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        match dir[i * width + j] {
            DIAG if i > 0 && j > 0 => {
                i -= 1;
                j -= 1;
                pairs.push((Some(i), Some(j)));
            }
            UP if i > 0 => {
                i -= 1;
                pairs.push((Some(i), None));
            }
            _ => {
                j -= 1;
                pairs.push((None, Some(j)));
            }
        }
    }
    pairs.reverse();
    Alignment {
        pairs,
        score,
        len_a: n,
        len_b: m,
    }
}

/// Label for B tokens that no A token aligns to.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum GapPolicy {
    /// Always `O`.
    StrictO,
    /// `I-t` when the token sits inside a span of type `t` on both sides,
    /// `O` otherwise.
    #[default]
    Contiguity,
}

/// Copies A labels onto B through `al`, then repairs the result into
/// valid BIO.
pub fn project_labels<S: Score>(al: &Alignment<S>, labels_a: &[Tag], policy: GapPolicy) -> Result<LabelSequence> {
    if labels_a.len() != al.len_a {
        return Err(Error::LengthMismatch {
            what: "labels vs aligned sequence",
            left: labels_a.len(),
            right: al.len_a,
        });
    }
    let b_to_a = al.b_to_a();
    let mut out: Vec<Tag> = b_to_a
        .iter()
        .map(|a| a.map(|i| labels_a[i].clone()).unwrap_or(Tag::O))
        .collect();

    if policy == GapPolicy::Contiguity {
        for j in 0..out.len() {
            if b_to_a[j].is_some() || j == 0 {
                continue;
            }
            let left = out[j - 1].label().map(str::to_string);
            let right = (j + 1..out.len()).find(|&k| b_to_a[k].is_some()).map(|k| &out[k]);
            if let (Some(l), Some(Tag::I(r))) = (left, right) {
                if l == *r {
                    out[j] = Tag::I(l);
                }
            }
        }
    }
    Ok(LabelSequence::new(out).repaired())
}
