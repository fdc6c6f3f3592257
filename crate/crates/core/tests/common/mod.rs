//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::thread;

use dmaug::artificial::{read_cores_tsv, CoreElements};
use dmaug::bio::{AduSpan, Tag};

pub fn cores15() -> Vec<CoreElements> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/cores15.tsv");
    let text = std::fs::read_to_string(path).unwrap();
    read_cores_tsv(text.as_bytes(), "cores15.tsv").unwrap()
}

/// `count` distinct cores made from numbered copies of the fixture.
pub fn many_cores(count: usize) -> Vec<CoreElements> {
    let base = cores15();
    (0..count)
        .map(|i| {
            let mut c = base[i % base.len()].clone();
            c.copa_id = format!("{}-{i}", c.copa_id);
            c
        })
        .collect()
}

/// Best global alignment score by enumerating every set of aligned
/// (matched or mismatched) pairs that is increasing on both sides. No
/// dynamic programming involved.
pub fn brute_force_alignment_score(a: &[u8], b: &[u8], m: i64, mm: i64, gap: i64) -> i64 {
    fn go(a: &[u8], b: &[u8], i0: usize, j0: usize, pairs: i64, k: usize, best: &mut i64, m: i64, mm: i64, gap: i64) {
        let total = pairs + gap * (a.len() + b.len() - 2 * k) as i64;
        if total > *best {
            *best = total;
        }
        for i in i0..a.len() {
            for j in j0..b.len() {
                let s = if a[i] == b[j] { m } else { mm };
                go(a, b, i + 1, j + 1, pairs + s, k + 1, best, m, mm, gap);
            }
        }
    }
    let mut best = i64::MIN;
    go(a, b, 0, 0, 0, 0, &mut best, m, mm, gap);
    best
}

/// Relabels symbols by first occurrence across `a` then `b`, so pairs that
/// differ only by a renaming of the alphabet share one key.
pub fn canonical_pair(a: &[u8], b: &[u8]) -> (Vec<u8>, Vec<u8>) {
    let mut map: HashMap<u8, u8> = HashMap::new();
    let mut relabel = |s: &[u8]| -> Vec<u8> {
        s.iter()
            .map(|c| {
                let next = map.len() as u8;
                *map.entry(*c).or_insert(next)
            })
            .collect()
    };
    let ca = relabel(a);
    let cb = relabel(b);
    (ca, cb)
}

/// All sequences over `0..alphabet` of length `len`.
pub fn all_sequences(alphabet: u8, len: usize) -> Vec<Vec<u8>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|s| {
                (0..alphabet).map(move |c| {
                    let mut t = s.clone();
                    t.push(c);
                    t
                })
            })
            .collect();
    }
    out
}

pub fn symbols(s: &[u8]) -> Vec<String> {
    s.iter()
        .map(|c| ["x", "y", "z", "w"][*c as usize].to_string())
        .collect()
}

/// Spans read off a tag sequence by checking every `(start, end, label)`
/// candidate against the tolerant BIO reading: a span opens on `B-t`, or on
/// `I-t` not continuing a `t` token, and runs over every following `I-t`.
pub fn brute_force_spans(tags: &[Tag]) -> BTreeSet<AduSpan> {
    let labels: BTreeSet<&str> = tags.iter().filter_map(Tag::label).collect();
    let mut out = BTreeSet::new();
    for s in 0..tags.len() {
        for e in s + 1..=tags.len() {
            for &l in &labels {
                let opens = match &tags[s] {
                    Tag::B(t) => t == l,
                    Tag::I(t) => t == l && (s == 0 || tags[s - 1].label() != Some(l)),
                    Tag::O => false,
                };
                let body = tags[s + 1..e].iter().all(|t| matches!(t, Tag::I(x) if x == l));
                let closed = e == tags.len() || !matches!(&tags[e], Tag::I(x) if x == l);
                if opens && body && closed {
                    out.insert(AduSpan::new(s, e, l));
                }
            }
        }
    }
    out
}

/// Response of the test service: status and body.
pub type Reply = (u16, String);

/// Starts a tiny HTTP server on a free local port; `handler` receives the
/// method, path and body of each request. Returns the base URL.
pub fn serve(handler: fn(&str, &str, &str) -> Reply) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            thread::spawn(move || {
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut request_line = String::new();
                if reader.read_line(&mut request_line).is_err() {
                    return;
                }
                let mut len = 0;
                loop {
                    let mut line = String::new();
                    if reader.read_line(&mut line).unwrap_or(0) == 0 || line == "\r\n" {
                        break;
                    }
                    if let Some((k, v)) = line.split_once(':') {
                        if k.eq_ignore_ascii_case("content-length") {
                            len = v.trim().parse().unwrap_or(0);
                        }
                    }
                }
                let mut body = vec![0; len];
                let _ = reader.read_exact(&mut body);
                let mut parts = request_line.split_whitespace();
                let method = parts.next().unwrap_or("");
                let path = parts.next().unwrap_or("");
                let (status, reply) = handler(method, path, &String::from_utf8_lossy(&body));
                let _ = write!(
                    stream,
                    "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{reply}",
                    reply.len()
                );
            });
        }
    });
    format!("http://{addr}")
}

/// Echoes `text` back as `augmented_text`, offers two fill candidates and
/// reports health.
pub fn echo_handler(method: &str, path: &str, body: &str) -> Reply {
    let text = || -> Option<String> {
        let v: serde_json::Value = serde_json::from_str(body).ok()?;
        Some(v.get("text")?.as_str()?.to_string())
    };
    match (method, path) {
        ("GET", "/v1/health") => (200, r#"{"model":"echo","ready":true}"#.into()),
        ("POST", "/v1/augment") => match text() {
            Some(t) => (200, serde_json::json!({ "augmented_text": t }).to_string()),
            None => (400, r#"{"error":"bad request"}"#.into()),
        },
        ("POST", "/v1/fill-mask") => (200, r#"{"candidates":["but","however"]}"#.into()),
        _ => (404, "{}".into()),
    }
}

/// A local address nothing listens on.
pub fn dead_endpoint() -> String {
    let l = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = l.local_addr().unwrap();
    drop(l);
    format!("http://{addr}")
}

fn alternation(dms: &[String], capital: bool) -> String {
    dms.iter()
        .map(|d| {
            let d = if capital {
                dmaug::text::capitalize_first(d)
            } else {
                d.clone()
            };
            regex::escape(&d)
        })
        .collect::<Vec<_>>()
        .join("|")
}

/// The two template shapes, `dm1 X1, dm2 X2.` and
/// `dm1 X1, dm2 X2. Dm3, X3.`, with DMs drawn from `policy`.
pub fn template_regex(policy: &dmaug::artificial::DmPolicy) -> regex::Regex {
    let mid: Vec<String> = [&policy.claim_dms, &policy.support_mid_dms, &policy.attack_mid_dms]
        .into_iter()
        .flatten()
        .cloned()
        .collect();
    let lead: Vec<String> = [&policy.support_lead_dms, &policy.attack_lead_dms]
        .into_iter()
        .flatten()
        .cloned()
        .collect();
    let (dm1, dm2, dm3) = (
        alternation(&mid, true),
        alternation(&mid, false),
        alternation(&lead, true),
    );
    let x = r"[a-zA-Z][a-zA-Z' -]*[a-z]";
    regex::Regex::new(&format!(
        r"^(?<dm1>{dm1}) (?<x1>{x}), (?<dm2>{dm2}) (?<x2>{x})\.(?: (?<dm3>{dm3}), (?<x3>{x})\.)?$"
    ))
    .unwrap()
}

/// A random paragraph over a small vocabulary that overlaps the DM words,
/// its BIO labels, and a copy with DM tokens inserted only outside ADUs.
pub fn random_insert_only_case(rng: &mut impl rand::Rng) -> (Vec<String>, Vec<Tag>, Vec<String>) {
    const VOCAB: [&str; 9] = ["we", "act", "now", "prices", "rose", "however", "that", "because", "."];
    const DMS: [&[&str]; 5] = [
        &["however", ","],
        &["because"],
        &["I", "think", "that"],
        &["moreover"],
        &["."],
    ];
    let labels = ["Claim", "Premise", "MajorClaim"];
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut x_m = Vec::new();
    for _ in 0..rng.gen_range(1..6) {
        // a stretch outside ADUs, then an ADU
        for _ in 0..rng.gen_range(0..3) {
            let w = VOCAB[rng.gen_range(0..VOCAB.len())].to_string();
            x.push(w.clone());
            y.push(Tag::O);
            x_m.push(w);
        }
        if rng.gen_bool(0.7) {
            x_m.extend(DMS[rng.gen_range(0..DMS.len())].iter().map(|s| s.to_string()));
        }
        let label = labels[rng.gen_range(0..labels.len())];
        for k in 0..rng.gen_range(1..5) {
            let w = VOCAB[rng.gen_range(0..VOCAB.len())].to_string();
            x.push(w.clone());
            y.push(if k == 0 {
                Tag::B(label.into())
            } else {
                Tag::I(label.into())
            });
            x_m.push(w);
        }
    }
    if rng.gen_bool(0.5) {
        x_m.push("indeed".into());
    }
    (x, y, x_m)
}
