use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use illusory_core::client::mock::{MockEndpoint, MockReply};
use illusory_core::client::{
    build_prompt, run_evaluation, ClientError, EndpointConfig, FailureReason, RunOptions, VlmClient,
};
use illusory_core::dataset::{
    builtin_labelset, load_predictions, LabelSet, Manifest, PredictionRecord, SampleKind, Variant,
};
use illusory_core::imaging::ImageBuffer;
use illusory_core::metrics::report::evaluate;
use illusory_testkit::fixture;
use rand::seq::SliceRandom;

fn config(mock: &MockEndpoint) -> EndpointConfig {
    EndpointConfig {
        base_url: mock.base_url(),
        model_name: "mock-vision".into(),
        timeout: 5.0,
        backoff_ms: 1,
        ..Default::default()
    }
}

fn pixel() -> ImageBuffer {
    ImageBuffer::filled(4, 4, &[10, 20, 30]).unwrap()
}

#[test]
fn passthrough_and_request_shape() {
    let mock = MockEndpoint::start(|_| MockReply::text("dog")).unwrap();
    let client = VlmClient::new(config(&mock), Some("sekret".into())).unwrap();
    let r = client.query_image("s1", &pixel(), "Which class?");
    assert_eq!(r.raw_text(), Some("dog"));
    assert_eq!(r.attempt_count, 1);
    let seen = &mock.transcript()[0];
    assert_eq!(seen.authorization.as_deref(), Some("Bearer sekret"));
    assert_eq!(seen.model, "mock-vision");
    assert_eq!(seen.prompt, "Which class?");
    let back = fixture::first_sample(&seen.image_url).unwrap();
    assert_eq!(back, 10);
}

#[test]
fn timeout_without_retries() {
    let mock =
        MockEndpoint::start(|_| MockReply::text("late").delayed(Duration::from_millis(1500)))
            .unwrap();
    let cfg = EndpointConfig {
        retry_limit: 0,
        timeout: 0.2,
        ..config(&mock)
    };
    let r = VlmClient::new(cfg, None)
        .unwrap()
        .query_image("s", &pixel(), "p");
    assert_eq!(r.failure_reason(), Some(&FailureReason::Timeout));
    assert_eq!(r.attempt_count, 1);
}

#[test]
fn rate_limits_are_retried() {
    let mock = MockEndpoint::start(|req| {
        if req.index < 2 {
            MockReply::status(429)
        } else {
            MockReply::text("cat")
        }
    })
    .unwrap();
    let r = VlmClient::new(config(&mock), None)
        .unwrap()
        .query_image("s", &pixel(), "p");
    assert_eq!(r.raw_text(), Some("cat"));
    assert_eq!(r.attempt_count, 3);
    assert_eq!(mock.request_count(), 3);
}

#[test]
fn retries_stop_at_the_limit() {
    let mock = MockEndpoint::start(|_| MockReply::status(503)).unwrap();
    let cfg = EndpointConfig {
        retry_limit: 2,
        ..config(&mock)
    };
    let r = VlmClient::new(cfg, None)
        .unwrap()
        .query_image("s", &pixel(), "p");
    assert_eq!(r.failure_reason(), Some(&FailureReason::Http(503)));
    assert_eq!((r.attempt_count, mock.request_count()), (3, 3));
}

#[test]
fn auth_errors_are_not_retried() {
    for status in [401, 403] {
        let mock = MockEndpoint::start(move |_| MockReply::status(status)).unwrap();
        let r = VlmClient::new(config(&mock), Some("bad".into()))
            .unwrap()
            .query_image("s", &pixel(), "p");
        assert!(matches!(
            r.failure_reason(),
            Some(FailureReason::AuthError(_))
        ));
        assert_eq!((r.attempt_count, mock.request_count()), (1, 1));
    }
}

#[test]
fn malformed_bodies_are_reported() {
    let mock = MockEndpoint::start(|_| MockReply::raw(200, "{\"nope\":1}")).unwrap();
    let r = VlmClient::new(config(&mock), None)
        .unwrap()
        .query_image("s", &pixel(), "p");
    assert!(matches!(
        r.failure_reason(),
        Some(FailureReason::MalformedResponse(_))
    ));
    assert_eq!(r.attempt_count, 1);
}

#[test]
fn missing_token_fails_before_any_request() {
    let mock = MockEndpoint::start(|_| MockReply::text("x")).unwrap();
    let cfg = EndpointConfig {
        auth_token_env: "ILLUSORY_TEST_UNSET_TOKEN_VAR".into(),
        ..config(&mock)
    };
    assert!(matches!(
        VlmClient::from_env(cfg),
        Err(ClientError::MissingToken(_))
    ));
    assert_eq!(mock.request_count(), 0);
}

#[test]
fn golden_prompts() {
    let animals = builtin_labelset("IllusionAnimals", true).unwrap();
    let golden = |name: &str| {
        std::fs::read_to_string(format!(
            "{}/tests/golden/prompts/{name}",
            env!("CARGO_MANIFEST_DIR")
        ))
        .unwrap()
    };
    let cls = SampleKind::Classification;
    assert_eq!(
        build_prompt(cls, Variant::Raw, Some(&animals)).unwrap(),
        golden("raw_class_animals.txt")
    );
    assert_eq!(
        build_prompt(cls, Variant::Illusion, Some(&animals)).unwrap(),
        golden("illusion_class_animals.txt")
    );
    assert_eq!(
        build_prompt(cls, Variant::Filtered, Some(&animals)).unwrap(),
        golden("illusion_class_animals.txt")
    );
    assert_eq!(
        build_prompt(SampleKind::Char, Variant::Raw, None).unwrap(),
        golden("raw_char.txt")
    );
    assert_eq!(
        build_prompt(SampleKind::Char, Variant::Illusion, None).unwrap(),
        golden("illusion_char.txt")
    );
    let mnist = builtin_labelset("IllusionMNIST", false).unwrap();
    assert!(build_prompt(cls, Variant::Raw, Some(&mnist))
        .unwrap()
        .starts_with("Which class is in the picture:"));
    assert!(matches!(
        build_prompt(cls, Variant::Raw, None),
        Err(ClientError::MissingLabels)
    ));
}

#[test]
fn empty_manifest_gives_empty_file() {
    let dir = tempfile::tempdir().unwrap();
    let mock = MockEndpoint::start(fixture::answer).unwrap();
    let client = VlmClient::new(config(&mock), None).unwrap();
    let manifest = Manifest::new(builtin_labelset("IllusionAnimals", true), vec![]).unwrap();
    let out = dir.path().join("out/preds.jsonl");
    let s = run_evaluation(
        &client,
        &manifest,
        Variant::Illusion,
        dir.path(),
        &out,
        &RunOptions::default(),
    )
    .unwrap();
    assert_eq!((s.total, s.queried), (0, 0));
    assert_eq!(std::fs::read_to_string(&out).unwrap(), "");
}

#[test]
fn ten_samples_match_the_transcript() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = fixture::write_set(dir.path(), 10);
    let mock = MockEndpoint::start(fixture::answer).unwrap();
    let client = VlmClient::new(config(&mock), None).unwrap();
    let out = dir.path().join("preds.jsonl");
    let s = run_evaluation(
        &client,
        &manifest,
        Variant::Illusion,
        dir.path(),
        &out,
        &RunOptions::default(),
    )
    .unwrap();
    assert_eq!((s.queried, s.succeeded, s.failures.len()), (10, 10, 0));

    let preds = load_predictions(&out).unwrap();
    let ids: Vec<&str> = preds.iter().map(|p| p.sample_id.as_str()).collect();
    let expected_ids: Vec<String> = (0..10).map(fixture::sample_id).collect();
    assert_eq!(ids, expected_ids);

    let transcript = mock.transcript();
    assert_eq!(transcript.len(), 10);
    let mut replies: Vec<String> = transcript.iter().map(fixture::expected_answer).collect();
    let mut written: Vec<String> = preds.iter().map(|p| p.raw_text.clone()).collect();
    replies.sort();
    written.sort();
    assert_eq!(written, replies);
    for req in &transcript {
        assert!(req.prompt.ends_with(
            "rooster, No illusion. Just choose the correct class without any extra explanation."
        ));
    }
    let report = evaluate(&manifest, &preds, None).unwrap();
    assert_eq!(
        report.classification.unwrap().report.unwrap().accuracy,
        100.0
    );
}

#[test]
fn concurrency_is_bounded() {
    for limit in [1, 3] {
        let dir = tempfile::tempdir().unwrap();
        let manifest = fixture::write_set(dir.path(), 12);
        let mock =
            MockEndpoint::start(|r| fixture::answer(r).delayed(Duration::from_millis(40))).unwrap();
        let cfg = EndpointConfig {
            max_concurrent: limit,
            ..config(&mock)
        };
        let client = VlmClient::new(cfg, None).unwrap();
        let out = dir.path().join("p.jsonl");
        run_evaluation(
            &client,
            &manifest,
            Variant::Illusion,
            dir.path(),
            &out,
            &RunOptions::default(),
        )
        .unwrap();
        assert_eq!(mock.request_count(), 12);
        assert!(
            mock.peak_in_flight() <= limit,
            "peak {} > {limit}",
            mock.peak_in_flight()
        );
        if limit > 1 {
            assert!(mock.peak_in_flight() > 1, "requests never overlapped");
        }
    }
}

#[test]
fn resume_skips_finished_and_retries_failed() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = fixture::write_set(dir.path(), 6);
    let out = dir.path().join("p.jsonl");

    // First pass: the third request always fails.
    let calls = Arc::new(AtomicUsize::new(0));
    let seen = Arc::clone(&calls);
    let flaky = MockEndpoint::start(move |r| {
        seen.fetch_add(1, Ordering::SeqCst);
        if fixture::first_sample(&r.image_url) == Some(2) {
            MockReply::status(400)
        } else {
            fixture::answer(r)
        }
    })
    .unwrap();
    let client = VlmClient::new(config(&flaky), None).unwrap();
    let s = run_evaluation(
        &client,
        &manifest,
        Variant::Illusion,
        dir.path(),
        &out,
        &RunOptions::default(),
    )
    .unwrap();
    assert_eq!((s.succeeded, s.failures.len()), (5, 1));
    assert_eq!(s.failures[0].0, fixture::sample_id(2));

    // Second pass only asks for the missing sample.
    let mock = MockEndpoint::start(fixture::answer).unwrap();
    let client = VlmClient::new(config(&mock), None).unwrap();
    let s = run_evaluation(
        &client,
        &manifest,
        Variant::Illusion,
        dir.path(),
        &out,
        &RunOptions::default(),
    )
    .unwrap();
    assert_eq!((s.skipped, s.queried, s.succeeded), (5, 1, 1));
    assert_eq!(mock.request_count(), 1);

    // Third pass has nothing to do.
    let s = run_evaluation(
        &client,
        &manifest,
        Variant::Illusion,
        dir.path(),
        &out,
        &RunOptions::default(),
    )
    .unwrap();
    assert_eq!(s.queried, 0);
    assert!(s.to_string().contains("0 new requests"));
    assert_eq!(mock.request_count(), 1);

    let preds = load_predictions(&out).unwrap();
    assert_eq!(preds.len(), 6);
    let unique: std::collections::HashSet<_> = preds.iter().map(|p| &p.sample_id).collect();
    assert_eq!(unique.len(), 6);
}

#[test]
fn filtered_variant_is_revealed_on_the_fly() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = fixture::write_set(dir.path(), 3);
    let mock = MockEndpoint::start(fixture::answer).unwrap();
    let client = VlmClient::new(config(&mock), None).unwrap();
    let out = dir.path().join("p.jsonl");
    let opts = RunOptions::default();
    run_evaluation(
        &client,
        &manifest,
        Variant::Filtered,
        dir.path(),
        &out,
        &opts,
    )
    .unwrap();
    // Constant images survive the filter, so answers still line up.
    let preds = load_predictions(&out).unwrap();
    let report = evaluate(&manifest, &preds, None).unwrap();
    assert_eq!(
        report.classification.unwrap().report.unwrap().accuracy,
        100.0
    );
    for req in mock.transcript() {
        assert!(req.prompt.starts_with("There might be an illusion"));
    }
}

#[test]
fn shuffled_predictions_score_identically() {
    let labels: LabelSet = builtin_labelset("IllusionAnimals", true).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let manifest = fixture::write_set(dir.path(), 40);
    let answers = [
        "dog",
        "It is a cat.",
        "no idea",
        "No illusion",
        "fish or snake",
        "rooster",
    ];
    let mut rng = illusory_testkit::rng(41);
    let preds: Vec<PredictionRecord> = manifest
        .records
        .iter()
        .enumerate()
        .map(|(i, r)| PredictionRecord {
            sample_id: r.id.clone(),
            raw_text: answers[i % answers.len()].into(),
        })
        .collect();
    let base = evaluate(&manifest, &preds, None).unwrap();
    assert_eq!(base.dataset, labels.name);
    let mut by_bytes = HashMap::new();
    for _ in 0..5 {
        let mut shuffled = preds.clone();
        shuffled.shuffle(&mut rng);
        let r = evaluate(&manifest, &shuffled, None).unwrap();
        assert_eq!(r, base);
        by_bytes.insert(r.to_canonical_json(), ());
    }
    assert_eq!(by_bytes.len(), 1);
}
