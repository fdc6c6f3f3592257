//! Training pairs for DM augmentation models: Discovery-style sentence
//! pairs and PDTB-style annotated documents.

use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{capitalize_first, decapitalize_first, normalize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscoveryPair {
    pub s1: String,
    pub s2: String,
    pub y: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairRecord {
    pub input_text: String,
    pub output_text: String,
}

impl From<(String, String)> for PairRecord {
    fn from((input_text, output_text): (String, String)) -> Self {
        PairRecord {
            input_text,
            output_text,
        }
    }
}

const TERMINALS: [char; 3] = ['.', '!', '?'];

/// `s1` with its trailing terminal marks collapsed to exactly one.
fn terminate(s1: &str) -> String {
    let body = s1.trim_end_matches(|c: char| TERMINALS.contains(&c) || c.is_whitespace());
    let mark = s1
        .trim_end()
        .chars()
        .last()
        .filter(|c| TERMINALS.contains(c))
        .unwrap_or('.');
    format!("{body}{mark}")
}

/// Input `s1 s2` and output `s1 Y s2`, where `Y` is the capitalized DM and
/// `s2` loses its sentence-initial capital.
pub fn prepare_discovery_pair(d: &DiscoveryPair) -> Result<(String, String)> {
    let s1 = normalize(d.s1.trim());
    let s2 = normalize(d.s2.trim());
    let y = normalize(d.y.trim());
    if s1.is_empty() || s2.is_empty() {
        return Err(Error::InvalidInput("both sentences must be non-empty".into()));
    }
    if y.is_empty() {
        return Err(Error::InvalidInput("the DM must be non-empty".into()));
    }
    let s1 = terminate(&s1);
    let input = format!("{s1} {s2}");
    let output = format!("{s1} {} {}", capitalize_first(&y), decapitalize_first(&s2));
    Ok((input, output))
}

/// TSV with columns s1, s2, y; lines starting with `#` are skipped.
pub fn read_discovery_tsv<R: BufRead>(reader: R, source: &str) -> Result<Vec<DiscoveryPair>> {
    let mut out = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(Error::parse(
                source,
                n + 1,
                format!("expected 3 columns, found {}", cols.len()),
            ));
        }
        out.push(DiscoveryPair {
            s1: cols[0].to_string(),
            s2: cols[1].to_string(),
            y: cols[2].to_string(),
        });
    }
    Ok(out)
}

/// An explicit connective occupying `start..end` (character offsets).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplicitDm {
    pub start: usize,
    pub end: usize,
    pub connective: String,
}

/// An implicit relation whose connective belongs at `offset`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImplicitDm {
    pub offset: usize,
    pub connective: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PdtbRecord {
    pub text: String,
    #[serde(default)]
    pub explicit: Vec<ExplicitDm>,
    #[serde(default)]
    pub implicit: Vec<ImplicitDm>,
}

/// Characters after which a removed mid-sentence DM needs no comma.
const REPAIR_PUNCTUATION: [char; 6] = [',', ';', ':', '—', '(', '"'];

fn at_sentence_start(before: &str) -> bool {
    let t = before.trim_end().trim_end_matches(['"', '\'', ')', '”', '’']);
    t.is_empty() || t.ends_with(TERMINALS)
}

/// Byte offset of character offset `c` in `s`.
fn byte_at(s: &str, c: usize) -> Option<usize> {
    s.char_indices().map(|(b, _)| b).chain([s.len()]).nth(c)
}

struct Pieces {
    out: String,
    capitalize_next: bool,
}

impl Pieces {
    fn push(&mut self, seg: &str) {
        if self.capitalize_next && seg.chars().any(char::is_alphabetic) {
            self.out.push_str(&capitalize_first(seg));
            self.capitalize_next = false;
        } else {
            self.out.push_str(seg);
        }
    }
}

/// Input: the document with explicit DMs removed (comma substitution
/// mid-sentence, capitalization after a removed sentence opener). Output:
/// the document with implicit connectives inserted.
pub fn prepare_pdtb_pairs(doc: &PdtbRecord) -> Result<(String, String)> {
    let text = &doc.text;
    let nchars = text.chars().count();

    let mut explicit: Vec<(usize, usize, &ExplicitDm)> = Vec::new();
    for e in &doc.explicit {
        let (Some(s), Some(t)) = (byte_at(text, e.start), byte_at(text, e.end)) else {
            return Err(Error::InvalidInput(format!(
                "explicit span {}..{} exceeds {nchars} characters",
                e.start, e.end
            )));
        };
        if s >= t {
            return Err(Error::InvalidInput(format!("empty explicit span at {}", e.start)));
        }
        if !e.connective.is_empty() && text[s..t].to_lowercase() != e.connective.trim().to_lowercase() {
            return Err(Error::InvalidInput(format!(
                "explicit span {}..{} reads {:?}, not {:?}",
                e.start,
                e.end,
                &text[s..t],
                e.connective
            )));
        }
        explicit.push((s, t, e));
    }
    explicit.sort_by_key(|x| (x.0, x.1));
    for w in explicit.windows(2) {
        if w[1].0 < w[0].1 {
            return Err(Error::OverlappingAnnotations(format!(
                "explicit spans {}..{} and {}..{}",
                w[0].2.start, w[0].2.end, w[1].2.start, w[1].2.end
            )));
        }
    }
    let mut implicit: Vec<(usize, &ImplicitDm)> = Vec::new();
    for i in &doc.implicit {
        let b = byte_at(text, i.offset)
            .ok_or_else(|| Error::InvalidInput(format!("implicit offset {} exceeds {nchars} characters", i.offset)))?;
        if i.connective.trim().is_empty() {
            return Err(Error::InvalidInput(format!(
                "implicit relation at {} lacks a connective",
                i.offset
            )));
        }
        if let Some(e) = explicit.iter().find(|e| e.0 < b && b < e.1) {
            return Err(Error::OverlappingAnnotations(format!(
                "implicit offset {} falls inside explicit span {}..{}",
                i.offset, e.2.start, e.2.end
            )));
        }
        implicit.push((b, i));
    }
    implicit.sort_by_key(|x| x.0);
    if let Some(w) = implicit.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::OverlappingAnnotations(format!(
            "two implicit relations at offset {}",
            w[0].1.offset
        )));
    }

    // input: explicit DMs removed
    let mut p = Pieces {
        out: String::with_capacity(text.len()),
        capitalize_next: false,
    };
    let mut pos = 0;
    for &(s, e, _) in &explicit {
        p.push(&text[pos..s]);
        let mut rest = e;
        let skip_ws = |from: usize| from + (text[from..].len() - text[from..].trim_start().len());
        rest = skip_ws(rest);
        if text[rest..].starts_with(',') {
            rest = skip_ws(rest + 1);
        }
        if at_sentence_start(&p.out) {
            p.capitalize_next = true;
        } else {
            let trimmed = p.out.trim_end().len();
            p.out.truncate(trimmed);
            let last = p.out.chars().last();
            if last.is_some_and(|c| REPAIR_PUNCTUATION.contains(&c)) {
                let opening = matches!(last, Some('(')) || (last == Some('"') && p.out.matches('"').count() % 2 == 1);
                if !opening {
                    p.out.push(' ');
                }
            } else {
                p.out.push_str(", ");
            }
        }
        pos = rest;
    }
    p.push(&text[pos..]);
    let input = p.out;

    // output: implicit connectives inserted
    let mut out = String::with_capacity(text.len() + 16 * implicit.len());
    let mut pos = 0;
    let mut decap_next = false;
    for &(b, i) in &implicit {
        let seg = &text[pos..b];
        out.push_str(&if decap_next {
            decapitalize_first(seg)
        } else {
            seg.to_string()
        });
        let initial = at_sentence_start(&text[..b]);
        if !out.is_empty() && !out.ends_with(char::is_whitespace) && !out.ends_with(['(', '"']) {
            out.push(' ');
        }
        let conn = i.connective.trim();
        out.push_str(&if initial {
            capitalize_first(conn)
        } else {
            decapitalize_first(conn)
        });
        out.push(' ');
        pos = b + (text[b..].len() - text[b..].trim_start().len());
        decap_next = initial;
    }
    let seg = &text[pos..];
    out.push_str(&if decap_next {
        decapitalize_first(seg)
    } else {
        seg.to_string()
    });

    Ok((input, out))
}

/// One [`PdtbRecord`] per line.
pub fn read_pdtb_jsonl<R: BufRead>(reader: R, source: &str) -> Result<Vec<PdtbRecord>> {
    let mut out = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut rec: PdtbRecord =
            serde_json::from_str(&line).map_err(|e| Error::parse(source, n + 1, e.to_string()))?;
        rec.text = normalize(&rec.text);
        out.push(rec);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn explicit(text: &str, dm: &str) -> ExplicitDm {
        let b = text.find(dm).unwrap();
        let start = text[..b].chars().count();
        ExplicitDm {
            start,
            end: start + dm.chars().count(),
            connective: dm.to_string(),
        }
    }

    #[test]
    fn discovery_example() {
        let d = DiscoveryPair {
            s1: "The analysis results suggest that the HCI can identify incipient fan bearing failures and describe the bearing degradation process.".into(),
            s2: "The work presented in this paper provides a promising method for fan bearing health evaluation and prognosis.".into(),
            y: "overall,".into(),
        };
        let (input, output) = prepare_discovery_pair(&d).unwrap();
        assert_eq!(input, format!("{} {}", d.s1, d.s2));
        assert!(output.ends_with(
            "process. Overall, the work presented in this paper provides a promising method for fan bearing health evaluation and prognosis."
        ));
    }

    #[test]
    fn discovery_terminators_and_case() {
        let d = DiscoveryPair {
            s1: "it rained!!".into(),
            s2: "we stayed in".into(),
            y: "So".into(),
        };
        assert_eq!(
            prepare_discovery_pair(&d).unwrap(),
            (
                "it rained! we stayed in".to_string(),
                "it rained! So we stayed in".to_string()
            )
        );
        let d = DiscoveryPair {
            s1: "a".into(),
            s2: "b".into(),
            y: " ".into(),
        };
        assert!(prepare_discovery_pair(&d).is_err());
        let d = DiscoveryPair {
            s1: "".into(),
            s2: "b".into(),
            y: "so".into(),
        };
        assert!(prepare_discovery_pair(&d).is_err());
    }

    #[test]
    fn pdtb_comma_substitution() {
        let text = "this is a pleasant rally but it's very selective";
        let doc = PdtbRecord {
            text: text.into(),
            explicit: vec![explicit(text, "but")],
            implicit: vec![],
        };
        let (input, output) = prepare_pdtb_pairs(&doc).unwrap();
        assert_eq!(input, "this is a pleasant rally, it's very selective");
        assert_eq!(output, text);
    }

    #[test]
    fn pdtb_sentence_initial_and_punctuated() {
        let text = "However, prices rose. Sales fell; but profits held.";
        let doc = PdtbRecord {
            text: text.into(),
            explicit: vec![explicit(text, "However"), explicit(text, "but")],
            implicit: vec![],
        };
        assert_eq!(
            prepare_pdtb_pairs(&doc).unwrap().0,
            "Prices rose. Sales fell; profits held."
        );
    }

    #[test]
    fn pdtb_implicit_insertion() {
        let text = "Prices rose. Demand was high.";
        let doc = PdtbRecord {
            text: text.into(),
            explicit: vec![],
            implicit: vec![ImplicitDm {
                offset: 13,
                connective: "because".into(),
            }],
        };
        let (input, output) = prepare_pdtb_pairs(&doc).unwrap();
        assert_eq!(input, text);
        assert_eq!(output, "Prices rose. Because demand was high.");
    }

    #[test]
    fn pdtb_identity_and_overlap() {
        let doc = PdtbRecord {
            text: "Nothing here.".into(),
            ..Default::default()
        };
        assert_eq!(
            prepare_pdtb_pairs(&doc).unwrap(),
            ("Nothing here.".into(), "Nothing here.".into())
        );

        let text = "it rained but then it stopped";
        let mut doc = PdtbRecord {
            text: text.into(),
            explicit: vec![explicit(text, "but then"), explicit(text, "then")],
            implicit: vec![],
        };
        assert!(matches!(
            prepare_pdtb_pairs(&doc),
            Err(Error::OverlappingAnnotations(_))
        ));
        doc.explicit.pop();
        doc.implicit.push(ImplicitDm {
            offset: 16,
            connective: "so".into(),
        });
        assert!(matches!(
            prepare_pdtb_pairs(&doc),
            Err(Error::OverlappingAnnotations(_))
        ));
    }
}
