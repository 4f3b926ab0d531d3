use illusory_core::dataset::{load_manifest, NO_ILLUSION};
use illusory_core::imaging::{highband_energy, to_grayscale, ImageBuffer};
use illusory_core::pipeline::{low_pass, FilterConfig};
use illusory_core::synth::{
    compose_illusion, derive_seed, generate_sample, generate_set, oracle_classify, render_carrier,
    render_concept, run_study, SynthError, SynthSpec, TemplateBank, DEFAULT_CARRIER_SCALE,
    DEFAULT_THRESHOLD, GLYPH_NAMES,
};

#[test]
fn concept_and_carrier_are_deterministic() {
    assert_eq!(
        render_concept(3, 64, 9).unwrap(),
        render_concept(3, 64, 9).unwrap()
    );
    assert_eq!(
        render_carrier(64, DEFAULT_CARRIER_SCALE, 9).unwrap(),
        render_carrier(64, DEFAULT_CARRIER_SCALE, 9).unwrap()
    );
    assert_ne!(
        render_carrier(64, DEFAULT_CARRIER_SCALE, 9).unwrap(),
        render_carrier(64, DEFAULT_CARRIER_SCALE, 10).unwrap()
    );
    assert!(matches!(
        render_concept(10, 64, 0),
        Err(SynthError::BadClassId { .. })
    ));
    assert!(render_carrier(64, 0.0, 0).is_err());
}

#[test]
fn carrier_is_contrast_normalized() {
    for seed in 0..100 {
        let mean = render_carrier(128, DEFAULT_CARRIER_SCALE, derive_seed(7, seed))
            .unwrap()
            .mean();
        assert!((96.0..=160.0).contains(&mean), "seed {seed}: mean {mean}");
    }
}

#[test]
fn carrier_is_busier_than_every_concept() {
    let concept_max = (0..GLYPH_NAMES.len())
        .map(|c| highband_energy(&render_concept(c, 128, 5).unwrap()).unwrap())
        .fold(0.0, f64::max);
    for seed in 0..10 {
        let carrier = render_carrier(128, DEFAULT_CARRIER_SCALE, seed).unwrap();
        assert!(highband_energy(&to_grayscale(&carrier).unwrap()).unwrap() > concept_max);
    }
}

#[test]
fn templates_are_distinct() {
    let bank = TemplateBank::new(10).unwrap();
    for i in 0..10 {
        let scores = bank.scores(bank.template_image(i)).unwrap();
        assert!((scores[i] - 1.0).abs() < 1e-9);
        for (j, s) in scores.iter().enumerate() {
            if j != i {
                assert!(*s < 0.9, "{} vs {}: {s}", GLYPH_NAMES[i], GLYPH_NAMES[j]);
            }
        }
        assert_eq!(
            oracle_classify(bank.template_image(i), &bank, DEFAULT_THRESHOLD).unwrap(),
            GLYPH_NAMES[i]
        );
    }
    let flat = ImageBuffer::filled(32, 32, &[90, 90, 90]).unwrap();
    assert_eq!(
        oracle_classify(&flat, &bank, DEFAULT_THRESHOLD).unwrap(),
        NO_ILLUSION
    );
}

#[test]
fn compose_extremes() {
    let concept = render_concept(4, 64, 1).unwrap();
    let carrier = render_carrier(64, DEFAULT_CARRIER_SCALE, 1).unwrap();
    assert_eq!(compose_illusion(&concept, &carrier, 0.0).unwrap(), carrier);
    let pure = to_grayscale(&compose_illusion(&concept, &carrier, 1.0).unwrap()).unwrap();
    assert!(pure
        .data()
        .iter()
        .zip(concept.data())
        .all(|(a, b)| a.abs_diff(*b) <= 1));
    let small = render_carrier(32, DEFAULT_CARRIER_SCALE, 1).unwrap();
    assert!(matches!(
        compose_illusion(&concept, &small, 0.5),
        Err(SynthError::SizeMismatch(_))
    ));
}

#[test]
fn pure_concepts_are_always_recognized() {
    let bank = TemplateBank::new(10).unwrap();
    let spec = SynthSpec {
        alpha: 1.0,
        ..Default::default()
    };
    for i in 0..100 {
        let (label, img) = generate_sample(&spec, 100, i).unwrap();
        assert_eq!(
            oracle_classify(&img, &bank, DEFAULT_THRESHOLD).unwrap(),
            GLYPH_NAMES[label.unwrap()]
        );
    }
}

#[test]
fn generated_sets_are_balanced() {
    let dir = tempfile::tempdir().unwrap();
    let spec = SynthSpec {
        image_size: 32,
        ..Default::default()
    };
    let m = generate_set(&spec, 20, dir.path()).unwrap();
    for name in GLYPH_NAMES {
        assert_eq!(m.records.iter().filter(|r| r.true_label == name).count(), 2);
    }
    assert_eq!(load_manifest(dir.path().join("manifest.jsonl")).unwrap(), m);

    let half = SynthSpec {
        no_illusion_fraction: 0.5,
        ..spec
    };
    let m = generate_set(&half, 20, &dir.path().join("half")).unwrap();
    assert_eq!(
        m.records
            .iter()
            .filter(|r| r.true_label == NO_ILLUSION)
            .count(),
        10
    );

    assert!(generate_set(&spec, 5, &dir.path().join("small")).is_err());
}

#[test]
fn generated_sets_are_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let spec = SynthSpec {
        image_size: 48,
        seed: 99,
        no_illusion_fraction: 0.2,
        ..Default::default()
    };
    let ma = generate_set(&spec, 12, a.path()).unwrap();
    let mb = generate_set(&spec, 12, b.path()).unwrap();
    assert_eq!(ma, mb);
    for r in &ma.records {
        let x = std::fs::read(a.path().join(&r.image_path)).unwrap();
        let y = std::fs::read(b.path().join(&r.image_path)).unwrap();
        assert_eq!(x, y, "{}", r.id);
    }
    assert_eq!(
        std::fs::read(a.path().join("manifest.jsonl")).unwrap(),
        std::fs::read(b.path().join("manifest.jsonl")).unwrap()
    );
}

#[test]
fn low_pass_stages_calm_synthetic_images() {
    let spec = SynthSpec {
        no_illusion_fraction: 0.1,
        ..Default::default()
    };
    let cfg = FilterConfig::default();
    for i in 0..20 {
        let (_, img) = generate_sample(&spec, 20, i).unwrap();
        let before = highband_energy(&to_grayscale(&img).unwrap()).unwrap();
        let after =
            highband_energy(&to_grayscale(&low_pass(&img, &cfg).unwrap()).unwrap()).unwrap();
        assert!(after < before);
    }
}

#[test]
fn filtered_accuracy_rises_with_alpha() {
    let n = 60;
    let mut last = -1.0;
    for alpha in [0.0, 0.03, 0.06, 0.1, 0.2, 1.0] {
        let spec = SynthSpec {
            alpha,
            ..Default::default()
        };
        let study = run_study(&spec, n, &FilterConfig::default(), DEFAULT_THRESHOLD).unwrap();
        assert!(
            study.filtered.accuracy >= last,
            "alpha {alpha}: {} < {last}",
            study.filtered.accuracy
        );
        last = study.filtered.accuracy;
    }
    assert_eq!(last, 100.0);
}
