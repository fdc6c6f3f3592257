//! CoNLL-style corpus files: one `token<TAB>tag` per line, blank lines
//! between sequences.

use std::io::{BufRead, Write};

use crate::bio::LabelSequence;
use crate::error::{Error, Result};
use crate::text::{normalize, TokenSequence};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledSequence {
    pub tokens: TokenSequence,
    pub labels: LabelSequence,
}

pub fn read_conll<R: BufRead>(reader: R, source: &str) -> Result<Vec<LabeledSequence>> {
    let mut out = Vec::new();
    let mut tokens = Vec::new();
    let mut tags = Vec::new();

    let mut flush = |tokens: &mut Vec<String>, tags: &mut Vec<String>| -> Result<()> {
        if !tokens.is_empty() {
            out.push(LabeledSequence {
                tokens: TokenSequence::new(std::mem::take(tokens))?,
                labels: LabelSequence::parse(&std::mem::take(tags))?,
            });
        }
        Ok(())
    };

    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            flush(&mut tokens, &mut tags)?;
            continue;
        }
        let (tok, tag) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(source, n + 1, "expected token<TAB>tag"))?;
        if tok.is_empty() || tag.contains('\t') {
            return Err(Error::parse(source, n + 1, "expected token<TAB>tag"));
        }
        tag.parse::<crate::bio::Tag>()
            .map_err(|e| Error::parse(source, n + 1, e.to_string()))?;
        tokens.push(normalize(tok));
        tags.push(tag.to_string());
    }
    flush(&mut tokens, &mut tags)?;
    Ok(out)
}

pub fn write_conll<W: Write>(mut w: W, seqs: &[LabeledSequence]) -> Result<()> {
    for (i, seq) in seqs.iter().enumerate() {
        if seq.tokens.len() != seq.labels.len() {
            return Err(Error::LengthMismatch {
                what: "tokens vs labels",
                left: seq.tokens.len(),
                right: seq.labels.len(),
            });
        }
        if i > 0 {
            writeln!(w)?;
        }
        for (tok, tag) in seq.tokens.iter().zip(seq.labels.iter()) {
            writeln!(w, "{tok}\t{tag}")?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "However\tO\n,\tO\nit\tB-Claim\nrains\tI-Claim\n.\tO\n\n\nYes\tB-Premise\n";

    #[test]
    fn reads_and_writes() {
        let seqs = read_conll(SAMPLE.as_bytes(), "sample").unwrap();
        assert_eq!(seqs.len(), 2);
        assert_eq!(seqs[0].tokens.len(), 5);
        assert_eq!(seqs[1].labels[0].to_string(), "B-Premise");

        let mut buf = Vec::new();
        write_conll(&mut buf, &seqs).unwrap();
        let again = read_conll(buf.as_slice(), "buf").unwrap();
        assert_eq!(again, seqs);
    }

    #[test]
    fn reports_line_numbers() {
        let err = read_conll("a\tO\nb O\n".as_bytes(), "bad.conll").unwrap_err();
        assert_eq!(err.to_string(), "bad.conll:2: expected token<TAB>tag");
        let err = read_conll("a\tQ-x\n".as_bytes(), "bad.conll").unwrap_err();
        assert!(err.to_string().starts_with("bad.conll:1:"));
    }
}
