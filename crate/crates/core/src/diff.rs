//! Longest-matching-block diff over token sequences.
//!
//! Same decomposition as a `SequenceMatcher` without junk heuristics: take
//! the longest common run, recurse on both sides, then merge adjacent runs.
//! Tokens compare case-insensitively.

use std::collections::HashMap;
use std::ops::Range;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchingBlock {
    pub a: usize,
    pub b: usize,
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OpCode {
    Equal(Range<usize>, Range<usize>),
    Replace(Range<usize>, Range<usize>),
    Delete(Range<usize>, Range<usize>),
    Insert(Range<usize>, Range<usize>),
}

impl OpCode {
    pub fn ranges(&self) -> (&Range<usize>, &Range<usize>) {
        match self {
            OpCode::Equal(a, b) | OpCode::Replace(a, b) | OpCode::Delete(a, b) | OpCode::Insert(a, b) => (a, b),
        }
    }
}

fn key(s: &str) -> String {
    s.to_lowercase()
}

struct Matcher<'a> {
    a: &'a [String],
    b2j: HashMap<&'a str, Vec<usize>>,
}

pub fn matching_blocks<S: AsRef<str>>(a: &[S], b: &[S]) -> Vec<MatchingBlock> {
    let a: Vec<String> = a.iter().map(|s| key(s.as_ref())).collect();
    let b: Vec<String> = b.iter().map(|s| key(s.as_ref())).collect();
    let mut b2j: HashMap<&str, Vec<usize>> = HashMap::new();
    for (j, t) in b.iter().enumerate() {
        b2j.entry(t.as_str()).or_default().push(j);
    }
    let m = Matcher { a: &a, b2j };

    let mut queue = vec![(0, a.len(), 0, b.len())];
    let mut blocks = Vec::new();
    while let Some((alo, ahi, blo, bhi)) = queue.pop() {
        let blk = m.longest_match(alo, ahi, blo, bhi);
        if blk.len > 0 {
            if alo < blk.a && blo < blk.b {
                queue.push((alo, blk.a, blo, blk.b));
            }
            if blk.a + blk.len < ahi && blk.b + blk.len < bhi {
                queue.push((blk.a + blk.len, ahi, blk.b + blk.len, bhi));
            }
            blocks.push(blk);
        }
    }
    blocks.sort_by_key(|b| (b.a, b.b));

    let mut merged: Vec<MatchingBlock> = Vec::new();
    for blk in blocks {
        match merged.last_mut() {
            Some(last) if last.a + last.len == blk.a && last.b + last.len == blk.b => last.len += blk.len,
            _ => merged.push(blk),
        }
    }
    merged.push(MatchingBlock {
        a: a.len(),
        b: b.len(),
        len: 0,
    });
    merged
}

impl Matcher<'_> {
    /// Longest common run in `a[alo..ahi]` x `b[blo..bhi]`; earliest in `a`,
    /// then earliest in `b`, on ties.
    fn longest_match(&self, alo: usize, ahi: usize, blo: usize, bhi: usize) -> MatchingBlock {
        let mut best = MatchingBlock { a: alo, b: blo, len: 0 };
        let mut lens: HashMap<usize, usize> = HashMap::new();
        for i in alo..ahi {
            let mut next: HashMap<usize, usize> = HashMap::new();
            if let Some(js) = self.b2j.get(self.a[i].as_str()) {
                for &j in js {
                    if j < blo {
                        continue;
                    }
                    if j >= bhi {
                        break;
                    }
                    let k = j.checked_sub(1).and_then(|p| lens.get(&p)).copied().unwrap_or(0) + 1;
                    next.insert(j, k);
                    if k > best.len {
                        best = MatchingBlock {
                            a: i + 1 - k,
                            b: j + 1 - k,
                            len: k,
                        };
                    }
                }
            }
            lens = next;
        }
        best
    }
}

pub fn opcodes<S: AsRef<str>>(a: &[S], b: &[S]) -> Vec<OpCode> {
    let mut ops = Vec::new();
    let (mut i, mut j) = (0, 0);
    for blk in matching_blocks(a, b) {
        let tag = match (i < blk.a, j < blk.b) {
            (true, true) => Some(OpCode::Replace(i..blk.a, j..blk.b)),
            (true, false) => Some(OpCode::Delete(i..blk.a, j..blk.b)),
            (false, true) => Some(OpCode::Insert(i..blk.a, j..blk.b)),
            (false, false) => None,
        };
        ops.extend(tag);
        if blk.len > 0 {
            ops.push(OpCode::Equal(blk.a..blk.a + blk.len, blk.b..blk.b + blk.len));
        }
        i = blk.a + blk.len;
        j = blk.b + blk.len;
    }
    ops
}
