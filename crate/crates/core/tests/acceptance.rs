//! One line per acceptance criterion. Runs without the test harness so the
//! lines are always printed.

mod common;

use std::collections::{BTreeSet, HashMap};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use dmaug::align::{needleman_wunsch, project_labels, GapPolicy, ScoringScheme};
use dmaug::artificial::{generate_split, ArtificialSample, DmPolicy, RoleClass, Stance, DEFAULT_MASK};
use dmaug::augment::{RoleMap, RuleAugmenter};
use dmaug::bio::{slot_texts, DmSlot, Tag};
use dmaug::extract::{diff_predicted_dms, gold_dms_left_context, remove_explicit_dms, AnnotatedParagraph};
use dmaug::metrics::{cohens_kappa, coverage_report, pearson, sense_confusion, sense_of, span_f1, SenseLexicon};
use dmaug::text::{detokenize, dm_key, tokenize};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

struct Criterion {
    name: &'static str,
    /// Set when the criterion cannot hold as written; the line still
    /// reports FAIL but does not fail the run.
    known_deviation: bool,
    check: fn() -> Outcome,
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn both() -> BTreeSet<Stance> {
    [Stance::Original, Stance::Opposite].into()
}

fn counts() -> Outcome {
    let t = Instant::now();
    let cores = common::cores15();
    let policy = DmPolicy::default();
    let two = generate_split(&cores, &both(), &policy, DEFAULT_MASK).map_err(|e| e.to_string())?;
    let one = generate_split(&cores, &[Stance::Original].into(), &policy, DEFAULT_MASK).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    for core in &cores {
        let n2 = two.iter().filter(|s| s.core.copa_id == core.copa_id).count();
        let n1 = one.iter().filter(|s| s.core.copa_id == core.copa_id).count();
        ensure((n2, n1) == (40, 20), || {
            format!("{}: {n2} and {n1} samples", core.copa_id)
        })?;
    }
    ensure(two.len() == 600, || format!("{} samples with both stances", two.len()))?;
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "15 cores: {} / {} samples in {elapsed:.1?}",
        two.len(),
        one.len()
    ))
}

fn samples() -> Vec<ArtificialSample> {
    generate_split(&common::cores15(), &both(), &DmPolicy::default(), DEFAULT_MASK).unwrap()
}

fn template_structure() -> Outcome {
    let re = common::template_regex(&DmPolicy::default());
    let all = samples();
    for s in &all {
        ensure(re.is_match(&s.full_text), || format!("no match: {}", s.full_text))?;
    }
    Ok(format!("{}/{} rendered texts match", all.len(), all.len()))
}

fn dm_membership() -> Outcome {
    let policy = DmPolicy::default();
    let mut n = 0;
    for s in samples() {
        for adu in &s.adus {
            ensure(policy.contains(adu.role, adu.lead, &adu.dm), || {
                format!("{:?} (lead={}) drew {:?}", adu.role, adu.lead, adu.dm)
            })?;
            n += 1;
        }
    }
    Ok(format!("{n}/{n} gold DMs in their set"))
}

fn nw_oracle() -> Outcome {
    let t = Instant::now();
    let (m, mm, g) = (1, -1, -1);
    let scheme = ScoringScheme::<i64> {
        match_score: m,
        mismatch: mm,
        gap: g,
    };
    let mut cache: HashMap<(Vec<u8>, Vec<u8>), i64> = HashMap::new();
    let mut check = |a: &[u8], b: &[u8]| -> Result<(), String> {
        let want = *cache
            .entry(common::canonical_pair(a, b))
            .or_insert_with(|| common::brute_force_alignment_score(a, b, m, mm, g));
        let al = needleman_wunsch(&common::symbols(a), &common::symbols(b), &scheme);
        ensure(al.score == want && al.is_well_formed(), || {
            format!("{a:?} vs {b:?}: dp {} oracle {want}", al.score)
        })
    };
    let seqs: Vec<Vec<u8>> = (0..=6).flat_map(|l| common::all_sequences(3, l)).collect();
    let mut exhaustive = 0;
    for a in &seqs {
        for b in &seqs {
            check(a, b)?;
            exhaustive += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let draw = |rng: &mut ChaCha8Rng| -> Vec<u8> {
            let len = rng.gen_range(7..=8);
            (0..len).map(|_| rng.gen_range(0..3)).collect()
        };
        let (a, b) = (draw(&mut rng), draw(&mut rng));
        check(&a, &b)?;
    }
    let elapsed = t.elapsed();
    ensure(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{exhaustive} exhaustive + 1000 random pairs agree in {elapsed:.1?}"
    ))
}

fn projection_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for k in 0..500 {
        let (x, y, x_m) = common::random_insert_only_case(&mut rng);
        let al = needleman_wunsch(&x, &x_m, &ScoringScheme::<i32>::default());
        let y_m = project_labels(&al, &y, GapPolicy::Contiguity).map_err(|e| e.to_string())?;
        // the tagger returns the projected labels unchanged
        let z = project_labels(&al.swapped(), &y_m, GapPolicy::Contiguity).map_err(|e| e.to_string())?;
        ensure(z.tags() == &y[..], || format!("paragraph {k}: {x:?} -> {x_m:?}"))?;
    }
    Ok("500/500 paragraphs recover Y".into())
}

fn dm_recovery() -> Outcome {
    let mut gold = Vec::new();
    let mut pred = Vec::new();
    let (mut slots, mut exact) = (0, 0);
    for s in samples() {
        let p = AnnotatedParagraph::new(tokenize(&s.full_text), s.adu_spans.clone()).map_err(|e| e.to_string())?;
        let (tokens, adus) = remove_explicit_dms(&p, &gold_dms_left_context(&p)).map_err(|e| e.to_string())?;
        let stripped = AnnotatedParagraph::new(tokens, adus).map_err(|e| e.to_string())?;
        let aug = RuleAugmenter::new(DmPolicy::default(), RoleMap::artificial())
            .augment(&stripped)
            .map_err(|e| e.to_string())?;
        let candidates: Vec<usize> = stripped.adus.iter().map(|a| a.start).collect();
        let recovered = diff_predicted_dms(&stripped.tokens, &tokenize(&aug.text), &candidates);
        for (r, i) in recovered.iter().zip(&aug.inserted) {
            slots += 1;
            if r.adu_index == i.adu_index && dm_key(&r.text) == dm_key(&i.text) {
                exact += 1;
            }
        }
        gold.push(gold_dms_left_context(&p));
        pred.push(recovered);
    }
    let coverage = coverage_report(&gold, &pred).map_err(|e| e.to_string())?;
    ensure(exact == slots && coverage == 1.0, || {
        format!("{exact}/{slots} slots recovered, coverage {coverage}")
    })?;
    Ok(format!("{exact}/{slots} slots recovered, coverage {coverage:.1}"))
}

fn plants_golden() -> Outcome {
    let p = AnnotatedParagraph::from_bracketed(
        "[Claim:A great number of plants and animals died out] because \
         [Premise:they were unable to fit into the new environment].",
    )
    .map_err(|e| e.to_string())?;
    let (tokens, _) = remove_explicit_dms(&p, &gold_dms_left_context(&p)).map_err(|e| e.to_string())?;
    let got = detokenize(&tokens);
    let want = "A great number of plants and animals died out, they were unable to fit into the new environment.";
    ensure(got == want, || format!("got {got:?}"))?;
    Ok("byte-exact".into())
}

fn worked_example() -> Outcome {
    let p = AnnotatedParagraph::from_bracketed(
        "[MajorClaim:Cities should ban private cars from their centres]. \
         However, [Premise:many residents depend on cars for work]. \
         [Premise:Public transport covers most routes]. \
         In my opinion, [Claim:the benefits outweigh the costs].",
    )
    .map_err(|e| e.to_string())?;
    let gold = gold_dms_left_context(&p);
    ensure(slot_texts(&gold) == ["", "However", "", "In my opinion"], || {
        format!("gold slots {:?}", slot_texts(&gold))
    })?;
    let original = coverage_report(&[gold.clone()], &[gold.clone()]).map_err(|e| e.to_string())?;
    let predicted: Vec<DmSlot> = ["Indeed", "However", "Furthermore", "In fact"]
        .iter()
        .enumerate()
        .map(|(i, t)| DmSlot::new(i, *t))
        .collect();
    let augmented = coverage_report(&[gold], &[predicted.clone()]).map_err(|e| e.to_string())?;
    ensure(original == 0.5 && augmented == 1.0, || {
        format!("coverage {original} / {augmented}")
    })?;
    for lex in [SenseLexicon::arg_markers(), SenseLexicon::disc_relations()] {
        for d in &predicted {
            ensure(sense_of(&d.text, &lex).is_some(), || {
                format!("no {:?} sense for {}", lex.kind(), d.text)
            })?;
        }
    }
    Ok(format!(
        "coverage {original:.1} -> {augmented:.1}, 4/4 senses in both lexicons"
    ))
}

fn metric_hand_values() -> Outcome {
    let t = Instant::now();
    let kappa = cohens_kappa(&[1, 0, 1, 1], &[1, 1, 1, 1]).map_err(|e| e.to_string())?;
    let r: f64 = pearson(&[1.0, 2.0, 3.0, 4.0], &[2.0, 4.0, 5.0, 4.0]).map_err(|e| e.to_string())?;
    let tags = |s: &str| -> Vec<Tag> { s.split_whitespace().map(|t| t.parse().unwrap()).collect() };
    let f1 = span_f1(&[tags("B-C I-C O B-P I-P")], &[tags("B-C I-C O O O")])
        .map_err(|e| e.to_string())?
        .f1;
    ensure(kappa.abs() < 1e-12, || format!("kappa {kappa}"))?;
    ensure(f1 == 2.0 / 3.0, || format!("span F1 {f1}"))?;
    ensure(t.elapsed() < Duration::from_secs(1), || {
        format!("took {:?}", t.elapsed())
    })?;
    // sxy = 3.5, sxx = 5, syy = 4.75
    let by_definition = 3.5 / (5.0f64 * 4.75).sqrt();
    ensure((r - by_definition).abs() < 1e-12, || {
        format!("pearson {r}, definition gives {by_definition}")
    })?;
    ensure((r - 0.7746).abs() < 1e-4, || {
        format!("kappa 0 and span F1 2/3 hold; pearson = {r:.4} by definition, expected value 0.7746 is not")
    })?;
    Ok("kappa 0, pearson 0.7746, span F1 2/3".into())
}

/// Scores from trained taggers need licensed corpora and GPUs; the check
/// here is the sense-confusion report on held-out synthetic cores, with a
/// stance-blind baseline that always predicts supporting DMs.
fn sense_confusion_substitute() -> Outcome {
    let cores = common::cores15();
    let test = generate_split(&cores[10..], &both(), &DmPolicy::default(), DEFAULT_MASK).map_err(|e| e.to_string())?;
    let blind = DmPolicy::fixed("I think that", "since", "moreover", "since", "moreover");
    let lex = SenseLexicon::arg_markers();
    let mut gold = Vec::new();
    let mut pred = Vec::new();
    let mut attack = BTreeSet::new();
    for (n, s) in test.iter().enumerate() {
        gold.push(
            s.adus
                .iter()
                .enumerate()
                .map(|(i, a)| DmSlot::new(i, a.dm.clone()))
                .collect::<Vec<_>>(),
        );
        pred.push(
            s.adus
                .iter()
                .enumerate()
                .map(|(i, a)| {
                    let role = if a.role == RoleClass::Attack {
                        RoleClass::Support
                    } else {
                        a.role
                    };
                    DmSlot::new(i, blind.choose(role, a.lead, ""))
                })
                .collect::<Vec<_>>(),
        );
        attack.extend(
            s.adus
                .iter()
                .enumerate()
                .filter(|(_, a)| a.role == RoleClass::Attack)
                .map(|(i, _)| (n, i)),
        );
    }
    let c = sense_confusion(&gold, &pred, &lex).map_err(|e| e.to_string())?;
    ensure(c.total() == gold.iter().map(Vec::len).sum::<usize>(), || {
        "missing rows".into()
    })?;
    for row in &c.rows {
        let is_attack = attack.contains(&(row.sequence, row.adu_index));
        ensure(is_attack == (row.gold_sense == "rebuttal"), || format!("{row:?}"))?;
        if is_attack {
            ensure(row.pred_sense == "backward", || format!("{row:?}"))?;
        }
    }
    let attack_rows = c.rows.iter().filter(|r| r.gold_sense == "rebuttal").count();
    ensure(
        attack_rows > 0 && c.count("rebuttal", "backward") == attack_rows,
        || c.to_string(),
    )?;
    ensure(
        c.count("thesis", "thesis") == c.rows.iter().filter(|r| r.gold_sense == "thesis").count(),
        || c.to_string(),
    )?;
    Ok(format!(
        "trained-model scores not reproducible offline; stance-blind baseline on {} held-out samples: \
         {attack_rows}/{attack_rows} rebuttal slots confused as backward, sense agreement {:.3}",
        test.len(),
        c.agreement()
    ))
}

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            name: "artificial dataset counts",
            known_deviation: false,
            check: counts,
        },
        Criterion {
            name: "template structure",
            known_deviation: false,
            check: template_structure,
        },
        Criterion {
            name: "DM policy membership",
            known_deviation: false,
            check: dm_membership,
        },
        Criterion {
            name: "Needleman-Wunsch oracle equivalence",
            known_deviation: false,
            check: nw_oracle,
        },
        Criterion {
            name: "projection round trip",
            known_deviation: false,
            check: projection_round_trip,
        },
        Criterion {
            name: "DM recovery round trip",
            known_deviation: false,
            check: dm_recovery,
        },
        Criterion {
            name: "conversion golden test",
            known_deviation: false,
            check: plants_golden,
        },
        Criterion {
            name: "worked example",
            known_deviation: false,
            check: worked_example,
        },
        Criterion {
            name: "metric hand values",
            known_deviation: true,
            check: metric_hand_values,
        },
        Criterion {
            name: "model scores (sense-confusion substitute)",
            known_deviation: false,
            check: sense_confusion_substitute,
        },
    ];
    let mut unexpected = 0;
    let mut passed = 0;
    for c in &criteria {
        match (c.check)() {
            Ok(detail) => {
                passed += 1;
                println!("PASS  {}: {detail}", c.name);
            }
            Err(detail) if c.known_deviation => println!("FAIL  {}: {detail} [known deviation]", c.name),
            Err(detail) => {
                unexpected += 1;
                println!("FAIL  {}: {detail}", c.name);
            }
        }
    }
    println!("{passed}/{} criteria pass", criteria.len());
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
