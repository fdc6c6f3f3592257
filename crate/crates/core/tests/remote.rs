mod common;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use dmaug::augment::{RemoteClient, RemoteError};

#[test]
fn echo_round_trip() {
    let client = RemoteClient::new(common::serve(common::echo_handler));
    let text = "Prices rose. «Demand» stayed strong, they said.";
    assert_eq!(client.augment(text).unwrap(), text);
    assert_eq!(
        client.fill_mask("it rained, <mask> we stayed").unwrap(),
        ["but", "however"]
    );
    assert_eq!(client.health().unwrap()["model"], "echo");
}

#[test]
fn batch_keeps_order() {
    let client = RemoteClient::new(common::serve(common::echo_handler));
    let texts: Vec<String> = (0..20).map(|i| format!("text number {i}")).collect();
    let out = client.augment_batch(&texts);
    let out: Vec<String> = out.into_iter().map(Result::unwrap).collect();
    assert_eq!(out, texts);
}

fn status_handler(_: &str, path: &str, _: &str) -> common::Reply {
    match path {
        "/v1/augment" => (413, r#"{"error":"too long"}"#.into()),
        _ => (200, "not json".into()),
    }
}

#[test]
fn status_and_malformed_are_distinct() {
    let client = RemoteClient::new(common::serve(status_handler));
    match client.augment("x") {
        Err(RemoteError::Status { code: 413, body }) => assert!(body.contains("too long")),
        other => panic!("{other:?}"),
    }
    assert!(matches!(client.fill_mask("x"), Err(RemoteError::Malformed(_))));
}

static FLAKY_CALLS: AtomicUsize = AtomicUsize::new(0);

fn flaky_handler(_: &str, _: &str, body: &str) -> common::Reply {
    if FLAKY_CALLS.fetch_add(1, Ordering::SeqCst) == 0 {
        (503, "{}".into())
    } else {
        common::echo_handler("POST", "/v1/augment", body)
    }
}

#[test]
fn one_retry_on_server_error() {
    let client = RemoteClient::new(common::serve(flaky_handler));
    assert_eq!(client.augment("again").unwrap(), "again");
    assert_eq!(FLAKY_CALLS.load(Ordering::SeqCst), 2);
}

#[test]
fn unreachable_endpoint() {
    let client = RemoteClient::with_options(common::dead_endpoint(), Duration::from_secs(2), 1, 1);
    let err = client.augment("x").unwrap_err();
    assert!(matches!(err, RemoteError::Connect { .. }), "{err:?}");
}

fn slow_handler(_: &str, _: &str, _: &str) -> common::Reply {
    std::thread::sleep(Duration::from_millis(1500));
    (200, r#"{"augmented_text":"late"}"#.into())
}

#[test]
fn timeout_is_reported() {
    let client = RemoteClient::with_options(common::serve(slow_handler), Duration::from_millis(200), 0, 1);
    let start = Instant::now();
    let err = client.augment("x").unwrap_err();
    assert!(matches!(err, RemoteError::Timeout { .. }), "{err:?}");
    assert!(start.elapsed() < Duration::from_secs(1));
}
