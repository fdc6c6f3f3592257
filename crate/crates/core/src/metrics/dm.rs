//! DM-level evaluation: explicit-DM accuracy, coverage, and sense confusion.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Float;
use serde::Serialize;

use super::embed::{avg_vector_similarity, sentence_similarity, EmbeddingTable, SentenceEncoder};
use super::sense::{sense_match, sense_of, SenseLexicon};
use crate::bio::DmSlot;
use crate::error::{Error, Result};

/// The resources each DM metric needs. Absent tables or encoders leave the
/// matching report field empty.
pub struct DmScorers<'a, F> {
    pub word: Option<&'a EmbeddingTable<F>>,
    pub retrofit: Option<&'a EmbeddingTable<F>>,
    pub sentence: Option<&'a dyn SentenceEncoder<F>>,
    pub arg_marker: &'a SenseLexicon,
    pub disc_rel: &'a SenseLexicon,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricScore<F> {
    pub mean: F,
    /// Occurrences that entered the mean.
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport<F> {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub word_embs: Option<MetricScore<F>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub retrofit_embs: Option<MetricScore<F>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sbert_embs: Option<MetricScore<F>>,
    pub arg_marker: MetricScore<F>,
    pub disc_rel: MetricScore<F>,
    /// Gold DMs without a sense in the respective lexicon.
    pub arg_marker_excluded: usize,
    pub disc_rel_excluded: usize,
    pub sequences: usize,
    pub occurrences: usize,
}

fn check_shape(gold: &[Vec<DmSlot>], pred: &[Vec<DmSlot>]) -> Result<()> {
    if gold.len() != pred.len() {
        return Err(Error::LengthMismatch {
            what: "gold vs predicted sequences",
            left: gold.len(),
            right: pred.len(),
        });
    }
    for (g, p) in gold.iter().zip(pred) {
        if g.len() != p.len() {
            return Err(Error::LengthMismatch {
                what: "gold vs predicted slots",
                left: g.len(),
                right: p.len(),
            });
        }
    }
    Ok(())
}

/// Sequence-level mean of per-sequence means; sequences with nothing to
/// score are skipped.
#[derive(Default)]
struct Averager {
    seq_sum: f64,
    seq_n: usize,
    cur_sum: f64,
    cur_n: usize,
    count: usize,
    absent: bool,
}

impl Averager {
    fn add(&mut self, x: Option<f64>) {
        match x {
            Some(x) => {
                self.cur_sum += x;
                self.cur_n += 1;
                self.count += 1;
            }
            None => self.absent = true,
        }
    }

    fn end_sequence(&mut self) {
        if self.cur_n > 0 {
            self.seq_sum += self.cur_sum / self.cur_n as f64;
            self.seq_n += 1;
        }
        self.cur_sum = 0.0;
        self.cur_n = 0;
    }

    fn finish<F: Float>(&self) -> MetricScore<F> {
        let mean = if self.seq_n == 0 {
            0.0
        } else {
            self.seq_sum / self.seq_n as f64
        };
        MetricScore {
            mean: F::from(mean).unwrap_or_else(F::zero),
            count: self.count,
        }
    }
}

/// Scores the prediction at every explicit gold slot. A missing prediction
/// scores 0; sense metrics skip gold DMs the lexicon cannot map.
pub fn explicit_accuracy_report<F: Float>(
    gold: &[Vec<DmSlot>],
    pred: &[Vec<DmSlot>],
    scorers: &DmScorers<'_, F>,
) -> Result<MetricReport<F>> {
    check_shape(gold, pred)?;
    let mut word = Averager::default();
    let mut retrofit = Averager::default();
    let mut sbert = Averager::default();
    let mut am = Averager::default();
    let mut dr = Averager::default();
    let (mut am_excluded, mut dr_excluded, mut occurrences) = (0, 0, 0);

    let to_f64 = |x: F| x.to_f64().unwrap_or(0.0);
    for (g_seq, p_seq) in gold.iter().zip(pred) {
        for (g, p) in g_seq.iter().zip(p_seq) {
            if !g.is_explicit() {
                continue;
            }
            occurrences += 1;
            let (g, p) = (g.text.as_str(), p.text.as_str());
            let missing = p.trim().is_empty();
            if let Some(t) = scorers.word {
                word.add(Some(to_f64(avg_vector_similarity(p, g, t))));
            }
            if let Some(t) = scorers.retrofit {
                retrofit.add(Some(to_f64(avg_vector_similarity(p, g, t))));
            }
            if let Some(enc) = scorers.sentence {
                sbert.add(if missing {
                    Some(0.0)
                } else {
                    sentence_similarity(p, g, enc).map(to_f64)
                });
            }
            match sense_match(p, g, scorers.arg_marker).score() {
                Some(s) => am.add(Some(s)),
                None => am_excluded += 1,
            }
            match sense_match(p, g, scorers.disc_rel).score() {
                Some(s) => dr.add(Some(s)),
                None => dr_excluded += 1,
            }
        }
        for a in [&mut word, &mut retrofit, &mut sbert, &mut am, &mut dr] {
            a.end_sequence();
        }
    }

    Ok(MetricReport {
        word_embs: scorers.word.map(|_| word.finish()),
        retrofit_embs: scorers.retrofit.map(|_| retrofit.finish()),
        sbert_embs: scorers.sentence.filter(|_| !sbert.absent).map(|_| sbert.finish()),
        arg_marker: am.finish(),
        disc_rel: dr.finish(),
        arg_marker_excluded: am_excluded,
        disc_rel_excluded: dr_excluded,
        sequences: gold.len(),
        occurrences,
    })
}

/// Fraction of slots (explicit or implicit) with a non-empty prediction,
/// per sequence, then averaged over sequences.
pub fn coverage_report(gold: &[Vec<DmSlot>], pred: &[Vec<DmSlot>]) -> Result<f64> {
    check_shape(gold, pred)?;
    let fractions: Vec<f64> = pred
        .iter()
        .filter(|p| !p.is_empty())
        .map(|p| p.iter().filter(|s| s.is_explicit()).count() as f64 / p.len() as f64)
        .collect();
    if fractions.is_empty() {
        return Ok(0.0);
    }
    Ok(fractions.iter().sum::<f64>() / fractions.len() as f64)
}

impl<F: Float + fmt::Display> fmt::Display for MetricReport<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cell = |s: &Option<MetricScore<F>>| match s {
            Some(s) => format!("{:.4} (n={})", s.mean, s.count),
            None => "-".to_string(),
        };
        writeln!(f, "{:<14} {}", "word_embs", cell(&self.word_embs))?;
        writeln!(f, "{:<14} {}", "retrofit_embs", cell(&self.retrofit_embs))?;
        writeln!(f, "{:<14} {}", "sbert_embs", cell(&self.sbert_embs))?;
        writeln!(
            f,
            "{:<14} {} excluded={}",
            "arg_marker",
            cell(&Some(self.arg_marker)),
            self.arg_marker_excluded
        )?;
        write!(
            f,
            "{:<14} {} excluded={}",
            "disc_rel",
            cell(&Some(self.disc_rel)),
            self.disc_rel_excluded
        )
    }
}

pub const NO_SENSE: &str = "none";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfusionRow {
    pub sequence: usize,
    pub adu_index: usize,
    pub gold_dm: String,
    pub pred_dm: String,
    pub gold_sense: String,
    pub pred_sense: String,
}

/// Gold sense against predicted sense over every explicit gold slot, with
/// the individual rows kept for error analysis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SenseConfusion {
    pub counts: BTreeMap<String, BTreeMap<String, usize>>,
    pub rows: Vec<ConfusionRow>,
}

impl SenseConfusion {
    pub fn count(&self, gold: &str, pred: &str) -> usize {
        self.counts.get(gold).and_then(|r| r.get(pred)).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.rows.len()
    }

    /// Share of rows whose senses agree, over rows with a gold sense.
    pub fn agreement(&self) -> f64 {
        let scored: Vec<&ConfusionRow> = self.rows.iter().filter(|r| r.gold_sense != NO_SENSE).collect();
        if scored.is_empty() {
            return 0.0;
        }
        scored.iter().filter(|r| r.gold_sense == r.pred_sense).count() as f64 / scored.len() as f64
    }
}

pub fn sense_confusion(gold: &[Vec<DmSlot>], pred: &[Vec<DmSlot>], lex: &SenseLexicon) -> Result<SenseConfusion> {
    check_shape(gold, pred)?;
    let mut counts: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
    let mut rows = Vec::new();
    for (n, (g_seq, p_seq)) in gold.iter().zip(pred).enumerate() {
        for (g, p) in g_seq.iter().zip(p_seq) {
            if !g.is_explicit() {
                continue;
            }
            let gs = sense_of(&g.text, lex).unwrap_or(NO_SENSE).to_string();
            let ps = sense_of(&p.text, lex).unwrap_or(NO_SENSE).to_string();
            *counts.entry(gs.clone()).or_default().entry(ps.clone()).or_default() += 1;
            rows.push(ConfusionRow {
                sequence: n,
                adu_index: g.adu_index,
                gold_dm: g.text.clone(),
                pred_dm: p.text.clone(),
                gold_sense: gs,
                pred_sense: ps,
            });
        }
    }
    Ok(SenseConfusion { counts, rows })
}

impl fmt::Display for SenseConfusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut cols: Vec<&String> = self.counts.values().flat_map(|r| r.keys()).collect();
        cols.sort();
        cols.dedup();
        write!(f, "{:<12}", "gold\\pred")?;
        for c in &cols {
            write!(f, " {c:>11}")?;
        }
        for (g, row) in &self.counts {
            write!(f, "\n{g:<12}")?;
            for c in &cols {
                write!(f, " {:>11}", row.get(*c).copied().unwrap_or(0))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn slots(xs: &[&str]) -> Vec<DmSlot> {
        xs.iter().enumerate().map(|(i, t)| DmSlot::new(i, *t)).collect()
    }

    #[test]
    fn coverage_examples() {
        let gold = vec![slots(&["", "However", "", "In my opinion"])];
        assert_eq!(coverage_report(&gold, &gold).unwrap(), 0.5);
        let pred = vec![slots(&["Indeed", "However", "Furthermore", "In fact"])];
        assert_eq!(coverage_report(&gold, &pred).unwrap(), 1.0);
        assert_eq!(coverage_report(&gold, &[slots(&["", "", "", ""])]).unwrap(), 0.0);
        assert!(coverage_report(&gold, &[slots(&[""])]).is_err());
    }

    #[test]
    fn confusion_counts() {
        let lex = SenseLexicon::arg_markers();
        let gold = vec![slots(&["because", "however", ""]), slots(&["zzqx"])];
        let pred = vec![slots(&["since", "because", "so"]), slots(&["however"])];
        let c = sense_confusion(&gold, &pred, &lex).unwrap();
        assert_eq!(c.total(), 3);
        assert_eq!(c.count("backward", "backward"), 1);
        assert_eq!(c.count("rebuttal", "backward"), 1);
        assert_eq!(c.count(NO_SENSE, "rebuttal"), 1);
        assert_eq!(c.agreement(), 0.5);
    }
}
