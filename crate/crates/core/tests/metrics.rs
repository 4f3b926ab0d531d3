use illusory_core::dataset::{Answer, LabelSet, Prediction};
use illusory_core::metrics::{
    build_confusion, cer_corpus, classification_report, coverage, levenshtein, seq_eval_report,
    wer_corpus, ConfusionMatrix, MetricsError,
};
use illusory_testkit as tk;
use proptest::prelude::*;
use rand::Rng;

fn chars(s: &str) -> Vec<char> {
    s.chars().collect()
}

fn lev(a: &str, b: &str) -> usize {
    levenshtein(&chars(a), &chars(b))
}

fn abc() -> LabelSet {
    LabelSet::new("t", vec!["A".into(), "B".into(), "C".into()], false).unwrap()
}

#[test]
fn levenshtein_examples() {
    assert_eq!(lev("", "abc"), 3);
    assert_eq!(lev("abc", "abc"), 0);
    assert_eq!(lev("kitten", "sitting"), 3);
    assert_eq!(
        tk::levenshtein_oracle(&chars("kitten"), &chars("sitting")),
        3
    );
}

#[test]
fn corpus_rates() {
    assert_eq!(cer_corpus(&["abc"], &["abc"]).unwrap().rate, 0.0);
    assert!((cer_corpus(&["abc"], &["abd"]).unwrap().rate - 100.0 / 3.0).abs() < 1e-9);
    assert_eq!(cer_corpus(&["ab"], &["abcdef"]).unwrap().rate, 200.0);
    assert_eq!(wer_corpus(&["a b c"], &["a b c"]).unwrap().rate, 0.0);
    assert!((wer_corpus(&["a b c"], &["a x c"]).unwrap().rate - 100.0 / 3.0).abs() < 1e-9);
    assert_eq!(wer_corpus(&["abc"], &["xyz"]).unwrap().rate, 100.0);
    // Sum of edits over sum of lengths, not a mean of ratios.
    let r = cer_corpus(&["a", "bcdefghij"], &["x", "bcdefghij"]).unwrap();
    assert_eq!((r.edits, r.reference_len), (1, 10));
    assert_eq!(r.rate, 10.0);
}

#[test]
fn wer_splits_on_whitespace_runs() {
    let r = wer_corpus(&["a  b\tc"], &[" a b c "]).unwrap();
    assert_eq!((r.edits, r.reference_len), (0, 3));
}

#[test]
fn corpus_errors() {
    assert!(matches!(
        cer_corpus(&["a", ""], &["a", "b"]),
        Err(MetricsError::EmptyReference { index: 1 })
    ));
    assert!(matches!(
        wer_corpus(&["a"], &["a", "b"]),
        Err(MetricsError::LengthMismatch { .. })
    ));
    let none: [&str; 0] = [];
    assert!(cer_corpus(&none, &none).is_err());
}

#[test]
fn seq_report_totals() {
    let r = seq_eval_report(&["ab cd", "efg"], &["ab", "efx"]).unwrap();
    assert_eq!((r.total_ref_words, r.total_word_edits), (3, 2));
    assert_eq!((r.total_ref_chars, r.total_char_edits), (8, 4));
    assert!((r.wer - 200.0 / 3.0).abs() < 1e-9);
    assert_eq!(r.cer, 50.0);
}

#[test]
fn confusion_tally() {
    let labels = LabelSet::new("t", vec!["A".into(), "B".into()], false).unwrap();
    let cm = build_confusion(&[("A", "A"), ("A", "B"), ("B", "B"), ("B", "B")], &labels).unwrap();
    assert_eq!(cm.counts, vec![vec![1, 1], vec![0, 2]]);
    let empty: [(&str, &str); 0] = [];
    assert_eq!(build_confusion(&empty, &labels).unwrap().total(), 0);
    assert!(matches!(
        build_confusion(&[("A", "Z")], &labels),
        Err(MetricsError::UnknownLabel(_))
    ));
}

#[test]
fn report_examples() {
    let cm = ConfusionMatrix {
        labels: vec!["A".into(), "B".into()],
        counts: vec![vec![1, 1], vec![0, 2]],
    };
    let r = classification_report(&cm).unwrap();
    assert!((r.accuracy - 75.0).abs() < 1e-9);
    assert!((r.macro_precision - 250.0 / 3.0).abs() < 1e-9);
    assert!((r.macro_recall - 75.0).abs() < 1e-9);
    assert!((r.macro_f1 - 220.0 / 3.0).abs() < 1e-9);

    let diag = ConfusionMatrix {
        labels: vec!["A".into(), "B".into()],
        counts: vec![vec![3, 0], vec![0, 5]],
    };
    let r = classification_report(&diag).unwrap();
    assert_eq!((r.accuracy, r.macro_f1), (100.0, 100.0));

    let cm = build_confusion(&[("A", "A"), ("B", "B")], &abc()).unwrap();
    let r = classification_report(&cm).unwrap();
    assert_eq!(r.per_class[2].f1, 0.0);
    assert!((r.macro_f1 - 200.0 / 3.0).abs() < 1e-9);

    let zero = ConfusionMatrix::zeros(&abc());
    assert!(matches!(
        classification_report(&zero),
        Err(MetricsError::EmptyMatrix)
    ));
}

#[test]
fn coverage_examples() {
    let p = |n: Answer| Prediction {
        sample_id: "x".into(),
        raw_text: String::new(),
        normalized: n,
    };
    let preds = [
        p(Answer::Label("a".into())),
        p(Answer::Label("b".into())),
        p(Answer::NotCovered),
    ];
    assert!((coverage(&preds).unwrap() - 200.0 / 3.0).abs() < 1e-9);
    assert_eq!(coverage(&preds[..2]).unwrap(), 100.0);
    // A reading-mode "No illusion" is a non-answer.
    assert_eq!(coverage(&[p(Answer::NoIllusion)]).unwrap(), 0.0);
    assert!(matches!(coverage(&[]), Err(MetricsError::EmptyInput)));
}

#[test]
fn confusion_recount_oracle() {
    let mut rng = tk::rng(31);
    let labels = abc();
    let names = ["A", "B", "C"];
    let pairs: Vec<(&str, &str)> = (0..1000)
        .map(|_| (names[rng.gen_range(0..3)], names[rng.gen_range(0..3)]))
        .collect();
    let cm = build_confusion(&pairs, &labels).unwrap();
    assert_eq!(cm.total(), 1000);
    for (i, name) in names.iter().enumerate() {
        assert_eq!(
            cm.row_sum(i),
            pairs.iter().filter(|p| p.0 == *name).count() as u64
        );
        assert_eq!(
            cm.col_sum(i),
            pairs.iter().filter(|p| p.1 == *name).count() as u64
        );
    }
}

fn small_string() -> impl Strategy<Value = String> {
    "[abc]{0,12}"
}

proptest! {
    #[test]
    fn levenshtein_matches_table(a in "[a-d]{0,20}", b in "[a-d]{0,20}") {
        prop_assert_eq!(lev(&a, &b), tk::levenshtein_oracle(&chars(&a), &chars(&b)));
    }

    #[test]
    fn levenshtein_is_a_metric(a in small_string(), b in small_string(), c in small_string()) {
        prop_assert_eq!(lev(&a, &b), lev(&b, &a));
        prop_assert_eq!(lev(&a, &b) == 0, a == b);
        prop_assert!(lev(&a, &c) <= lev(&a, &b) + lev(&b, &c));
        prop_assert!(lev(&a, &b) <= a.chars().count().max(b.chars().count()));
    }

    #[test]
    fn permuting_labels_keeps_macros(
        pairs in proptest::collection::vec((0usize..3, 0usize..3), 1..60),
        perm in Just(vec![0usize, 1, 2]).prop_shuffle(),
    ) {
        let names = ["A", "B", "C"];
        let named: Vec<(&str, &str)> = pairs.iter().map(|&(t, p)| (names[t], names[p])).collect();
        let base = classification_report(&build_confusion(&named, &abc()).unwrap()).unwrap();
        let permuted = abc().permuted(&perm);
        let other = classification_report(&build_confusion(&named, &permuted).unwrap()).unwrap();
        prop_assert!((base.accuracy - other.accuracy).abs() < 1e-9);
        prop_assert!((base.macro_precision - other.macro_precision).abs() < 1e-9);
        prop_assert!((base.macro_recall - other.macro_recall).abs() < 1e-9);
        prop_assert!((base.macro_f1 - other.macro_f1).abs() < 1e-9);
        for stats in &other.per_class {
            let orig = base.per_class.iter().find(|s| s.label == stats.label).unwrap();
            prop_assert_eq!(orig, stats);
        }
    }
}
