mod common;

use std::collections::BTreeSet;

use dmaug::artificial::{
    generate_split, make_e2e_pair, render_sample, AduCount, DmPolicy, RoleClass, SampleRecord, Stance, DEFAULT_MASK,
};
use dmaug::text::tokenize;

fn both() -> BTreeSet<Stance> {
    [Stance::Original, Stance::Opposite].into()
}

fn one() -> BTreeSet<Stance> {
    [Stance::Original].into()
}

#[test]
fn split_sizes() {
    let policy = DmPolicy::default();
    let cores = common::cores15();
    assert_eq!(
        generate_split(&cores, &both(), &policy, DEFAULT_MASK).unwrap().len(),
        600
    );
    assert_eq!(
        generate_split(&cores, &one(), &policy, DEFAULT_MASK).unwrap().len(),
        300
    );
    assert_eq!(
        generate_split(&common::many_cores(38), &one(), &policy, DEFAULT_MASK)
            .unwrap()
            .len(),
        760
    );
    assert_eq!(
        generate_split(&common::many_cores(251), &one(), &policy, DEFAULT_MASK)
            .unwrap()
            .len(),
        5020
    );
}

#[test]
fn samples_follow_the_grammar() {
    let policy = DmPolicy::default();
    let re = common::template_regex(&policy);
    for s in generate_split(&common::cores15(), &both(), &policy, DEFAULT_MASK).unwrap() {
        let caps = re.captures(&s.full_text).unwrap_or_else(|| panic!("{}", s.full_text));
        assert_eq!(caps.name("dm3").is_some(), s.config.num_adus == AduCount::Three);
        // the ADU texts are the core texts
        for (k, adu) in s.adus.iter().enumerate() {
            let x = caps.name(&format!("x{}", k + 1)).unwrap().as_str();
            assert_eq!(x.to_lowercase(), adu.text.to_lowercase());
        }
    }
}

#[test]
fn drawn_dms_come_from_their_sets() {
    let policy = DmPolicy::default();
    for s in generate_split(&common::cores15(), &both(), &policy, DEFAULT_MASK).unwrap() {
        for adu in &s.adus {
            assert!(
                policy.contains(adu.role, adu.lead, &adu.dm),
                "{} ({:?})",
                adu.dm,
                adu.role
            );
            assert_eq!(adu.lead, adu.sentence == 1);
            if adu.role == RoleClass::Claim {
                assert!(!adu.lead);
            }
        }
        assert_eq!(s.masked_text.matches(DEFAULT_MASK).count(), 1);
        assert_eq!(s.unmask(&s.gold_dm), s.full_text);
    }
}

#[test]
fn seeds_control_the_draw() {
    let cores = common::cores15();
    let a = generate_split(&cores, &both(), &DmPolicy::with_seed(7), DEFAULT_MASK).unwrap();
    let b = generate_split(&cores, &both(), &DmPolicy::with_seed(7), DEFAULT_MASK).unwrap();
    let c = generate_split(&cores, &both(), &DmPolicy::with_seed(8), DEFAULT_MASK).unwrap();
    assert_eq!(a, b);
    assert!(a.iter().zip(&c).any(|(x, y)| x.full_text != y.full_text));
}

#[test]
fn e2e_output_contains_input() {
    let policy = DmPolicy::default();
    for s in generate_split(&common::cores15(), &one(), &policy, DEFAULT_MASK).unwrap() {
        let (input, output) = make_e2e_pair(&s);
        let inp = tokenize(&input);
        let out = tokenize(&output);
        let mut it = out.iter();
        for t in inp.iter() {
            assert!(
                it.any(|o| o.to_lowercase() == t.to_lowercase()),
                "{input:?} is not inside {output:?}"
            );
        }
    }
}

#[test]
fn records_round_trip_through_json() {
    let cores = common::cores15();
    let cfgs = dmaug::artificial::enumerate_configs(&both()).unwrap();
    let s = render_sample(&cores[3], &cfgs[17], &DmPolicy::default()).unwrap();
    let rec = SampleRecord::new("test", &s);
    let json = serde_json::to_string(&rec).unwrap();
    assert_eq!(serde_json::from_str::<SampleRecord>(&json).unwrap(), rec);
}
