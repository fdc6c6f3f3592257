//! Tokenization and detokenization.
//!
//! The tokenizer is a small frozen rule set in the spirit of the Moses
//! tokenizer: whitespace splitting, then punctuation peeled off the edges of
//! each chunk and clitics split at the apostrophe (`don't` -> `don`, `'t`).
//! [`detokenize`] undoes it, so `tokenize(detokenize(tokenize(s)))` is
//! `tokenize(s)`.

use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

const OPENING: &[char] = &['(', '[', '{', '"', '\'', '“', '‘', '«', '`'];
const CLOSING: &[char] = &[
    ')', ']', '}', '"', '\'', '”', '’', '»', '.', ',', ';', ':', '!', '?', '%',
];
/// Quotes whose direction depends on whether a quotation is currently open.
const AMBIGUOUS_QUOTES: &[char] = &['"', '\''];
const APOSTROPHES: &[char] = &['\'', '’'];
const TERMINALS: &[char] = &['.', '!', '?'];

/// An ordered sequence of non-empty tokens.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct TokenSequence(Vec<String>);

impl TokenSequence {
    pub fn new<S: Into<String>>(tokens: impl IntoIterator<Item = S>) -> Result<Self> {
        let tokens: Vec<String> = tokens.into_iter().map(Into::into).collect();
        if let Some(i) = tokens.iter().position(|t| t.is_empty()) {
            return Err(Error::InvalidInput(format!("token {i} is empty")));
        }
        Ok(TokenSequence(tokens))
    }

    pub fn empty() -> Self {
        TokenSequence(Vec::new())
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<String> {
        self.0
    }

    /// Token texts in `range`, as borrowed strings.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Vec<&str> {
        self.0[range].iter().map(String::as_str).collect()
    }

    pub(crate) fn from_vec_unchecked(tokens: Vec<String>) -> Self {
        debug_assert!(tokens.iter().all(|t| !t.is_empty()));
        TokenSequence(tokens)
    }
}

impl Deref for TokenSequence {
    type Target = [String];

    fn deref(&self) -> &[String] {
        &self.0
    }
}

impl AsRef<[String]> for TokenSequence {
    fn as_ref(&self) -> &[String] {
        &self.0
    }
}

impl TryFrom<Vec<String>> for TokenSequence {
    type Error = Error;

    fn try_from(v: Vec<String>) -> Result<Self> {
        TokenSequence::new(v)
    }
}

impl From<TokenSequence> for Vec<String> {
    fn from(t: TokenSequence) -> Self {
        t.0
    }
}

impl fmt::Display for TokenSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&detokenize(self))
    }
}

/// NFC-normalizes `text`.
pub fn normalize(text: &str) -> String {
    text.nfc().collect()
}

pub fn tokenize(text: &str) -> TokenSequence {
    let text = normalize(text);
    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        split_chunk(chunk, &mut out);
    }
    TokenSequence::from_vec_unchecked(out)
}

fn split_chunk(chunk: &str, out: &mut Vec<String>) {
    let chars: Vec<char> = chunk.chars().collect();
    let mut lo = 0;
    let mut hi = chars.len();

    while lo < hi && OPENING.contains(&chars[lo]) {
        out.push(chars[lo].to_string());
        lo += 1;
    }

    let mut trailing = Vec::new();
    while lo < hi && CLOSING.contains(&chars[hi - 1]) {
        let c = chars[hi - 1];
        if c == '.' {
            let mut start = hi - 1;
            while start > lo && chars[start - 1] == '.' {
                start -= 1;
            }
            if hi - start == 1 && is_abbreviation(&chars[lo..start]) {
                break;
            }
            trailing.push(chars[start..hi].iter().collect::<String>());
            hi = start;
        } else {
            trailing.push(c.to_string());
            hi -= 1;
        }
    }

    split_clitics(&chars[lo..hi], out);
    out.extend(trailing.into_iter().rev());
}

/// `U.S`, `e.g`, `i.e`: dotted runs of one or two letters.
fn is_abbreviation(core: &[char]) -> bool {
    if !core.contains(&'.') {
        return false;
    }
    core.split(|&c| c == '.')
        .all(|piece| (1..=2).contains(&piece.len()) && piece.iter().all(|c| c.is_alphabetic()))
}

fn split_clitics(core: &[char], out: &mut Vec<String>) {
    if core.is_empty() {
        return;
    }
    let mut start = 0;
    for i in 1..core.len() {
        if APOSTROPHES.contains(&core[i])
            && core[i - 1].is_alphanumeric()
            && core.get(i + 1).is_some_and(|c| c.is_alphabetic())
        {
            out.push(core[start..i].iter().collect());
            start = i;
        }
    }
    out.push(core[start..].iter().collect());
}

fn is_opening_token(tok: &str) -> bool {
    !tok.is_empty()
        && tok
            .chars()
            .all(|c| OPENING.contains(&c) && !AMBIGUOUS_QUOTES.contains(&c))
}

fn is_closing_token(tok: &str) -> bool {
    !tok.is_empty()
        && tok
            .chars()
            .all(|c| CLOSING.contains(&c) && !AMBIGUOUS_QUOTES.contains(&c))
}

fn is_clitic(tok: &str) -> bool {
    let mut chars = tok.chars();
    matches!(chars.next(), Some(c) if APOSTROPHES.contains(&c)) && chars.next().is_some_and(|c| c.is_alphabetic())
}

fn ambiguous_quote(tok: &str) -> Option<char> {
    let mut chars = tok.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) if AMBIGUOUS_QUOTES.contains(&c) => Some(c),
        _ => None,
    }
}

/// Joins tokens with single spaces, except before closing punctuation and
/// clitics and after opening brackets. Straight quotes alternate between
/// opening and closing.
pub fn detokenize<S: AsRef<str>>(tokens: &[S]) -> String {
    let mut out = String::new();
    let mut attach_next = false;
    let mut open_double = false;
    let mut open_single = false;
    let mut prev: Option<&str> = None;

    for tok in tokens {
        let tok = tok.as_ref();
        let mut glue = prev.is_none() || attach_next;
        attach_next = false;

        if let Some(q) = ambiguous_quote(tok) {
            let open = if q == '"' { &mut open_double } else { &mut open_single };
            if *open {
                glue = true;
            } else {
                attach_next = true;
            }
            *open = !*open;
        } else if is_opening_token(tok) {
            attach_next = true;
        } else if is_closing_token(tok) {
            let dot_run = tok.starts_with('.')
                && prev.is_some_and(|p| p.ends_with('.') || is_abbreviation(&p.chars().collect::<Vec<_>>()));
            if !dot_run {
                glue = true;
            }
        } else if is_clitic(tok) {
            glue = true;
        }

        if !glue {
            out.push(' ');
        }
        out.push_str(tok);
        prev = Some(tok);
    }
    out
}

pub fn is_punctuation(tok: &str) -> bool {
    !tok.is_empty() && tok.chars().all(|c| !c.is_alphanumeric())
}

pub fn is_terminal(tok: &str) -> bool {
    !tok.is_empty() && tok.chars().all(|c| TERMINALS.contains(&c))
}

/// Start indices of sentences, split after terminal punctuation unless the
/// next word is lowercase. Closing quotes and brackets right after the
/// terminal stay with its sentence.
pub fn sentence_starts<S: AsRef<str>>(tokens: &[S]) -> Vec<usize> {
    let mut starts = Vec::new();
    if tokens.is_empty() {
        return starts;
    }
    starts.push(0);
    let mut open_quotes: Vec<char> = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let tok = tokens[i].as_ref();
        if let Some(q) = ambiguous_quote(tok) {
            toggle_quote(&mut open_quotes, q);
            i += 1;
        } else if is_terminal(tok) {
            let mut j = i + 1;
            while j < tokens.len() {
                let next = tokens[j].as_ref();
                match ambiguous_quote(next) {
                    Some(q) if open_quotes.contains(&q) => toggle_quote(&mut open_quotes, q),
                    Some(_) => break,
                    None if is_closing_token(next) => {}
                    None => break,
                }
                j += 1;
            }
            // a lowercase continuation ("?" she said) is not a new sentence
            let lower = j < tokens.len() && tokens[j].as_ref().chars().next().is_some_and(char::is_lowercase);
            if j < tokens.len() && !lower {
                starts.push(j);
            }
            i = j;
        } else {
            i += 1;
        }
    }
    starts
}

fn toggle_quote(open: &mut Vec<char>, q: char) {
    match open.iter().position(|&c| c == q) {
        Some(p) => {
            open.remove(p);
        }
        None => open.push(q),
    }
}

/// Uppercases the first alphabetic character.
pub fn capitalize_first(s: &str) -> String {
    map_first_alpha(s, |c| c.to_uppercase().collect())
}

/// Lowercases the first alphabetic character, leaving `I`, `I'm`-style
/// pronoun forms and all-caps acronyms alone.
pub fn decapitalize_first(s: &str) -> String {
    let word: String = s.chars().take_while(|c| c.is_alphanumeric()).collect();
    if word == "I" || (word.chars().count() > 1 && word.chars().all(|c| c.is_uppercase())) {
        return s.to_string();
    }
    map_first_alpha(s, |c| c.to_lowercase().collect())
}

fn map_first_alpha(s: &str, f: impl Fn(char) -> String) -> String {
    match s.char_indices().find(|(_, c)| c.is_alphabetic()) {
        Some((i, c)) => {
            let mut out = String::with_capacity(s.len());
            out.push_str(&s[..i]);
            out.push_str(&f(c));
            out.push_str(&s[i + c.len_utf8()..]);
            out
        }
        None => s.to_string(),
    }
}

/// Case-insensitive DM comparison key: trimmed, lowercased, trailing comma
/// stripped. Applying it twice gives the same key.
pub fn dm_key(dm: &str) -> String {
    let t = normalize(dm.trim()).to_lowercase();
    t.trim_end_matches(|c: char| c == ',' || c.is_whitespace()).to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(text: &str) -> Vec<String> {
        tokenize(text).into_inner()
    }

    #[test]
    fn splits_punctuation() {
        assert_eq!(toks("However, it rains."), ["However", ",", "it", "rains", "."]);
        assert!(toks("").is_empty());
        assert!(toks("  \t\n").is_empty());
    }

    #[test]
    fn splits_clitics() {
        assert_eq!(toks("don't stop"), ["don", "'t", "stop"]);
        assert_eq!(toks("it's very selective"), ["it", "'s", "very", "selective"]);
    }

    #[test]
    fn keeps_abbreviations_and_numbers() {
        assert_eq!(toks("the U.S. economy"), ["the", "U.S.", "economy"]);
        assert_eq!(toks("e.g., this"), ["e.g.", ",", "this"]);
        assert_eq!(toks("costs 5.50."), ["costs", "5.50", "."]);
        assert_eq!(toks("well... no"), ["well", "...", "no"]);
    }

    #[test]
    fn brackets_and_quotes() {
        assert_eq!(toks("(yes)"), ["(", "yes", ")"]);
        assert_eq!(toks("[...] rally"), ["[", "...", "]", "rally"]);
        assert_eq!(toks("he said \"hi\"."), ["he", "said", "\"", "hi", "\"", "."]);
    }

    #[test]
    fn detokenize_golden() {
        assert_eq!(detokenize(&["However", ",", "it", "rains", "."]), "However, it rains.");
        assert_eq!(detokenize::<&str>(&[]), "");
        assert_eq!(detokenize(&["(", "yes", ")"]), "(yes)");
        assert_eq!(detokenize(&["don", "'t", "stop"]), "don't stop");
        assert_eq!(detokenize(&["he", "said", "\"", "hi", "\"", "."]), "he said \"hi\".");
        assert_eq!(detokenize(&[".", "."]), ". .");
    }

    #[test]
    fn nfc_on_ingestion() {
        let decomposed = "cafe\u{301}";
        assert_eq!(toks(decomposed), ["caf\u{e9}"]);
    }

    #[test]
    fn sentence_splitting() {
        let t = toks("It rains. \"So what?\" she said. Fine");
        let starts = sentence_starts(&t);
        assert_eq!(starts, vec![0, 3, 11]);
        assert_eq!(sentence_starts::<&str>(&[]), Vec::<usize>::new());
    }

    #[test]
    fn case_helpers() {
        assert_eq!(capitalize_first("however"), "However");
        assert_eq!(capitalize_first("\"quoted"), "\"Quoted");
        assert_eq!(decapitalize_first("Humanity"), "humanity");
        assert_eq!(decapitalize_first("I"), "I");
        assert_eq!(decapitalize_first("NATO"), "NATO");
        assert_eq!(dm_key("On the other hand, "), "on the other hand");
        assert_eq!(dm_key("Moreover,"), "moreover");
    }

    #[test]
    fn rejects_empty_tokens() {
        assert!(TokenSequence::new(["a", ""]).is_err());
    }
}
