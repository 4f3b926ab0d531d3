//! Calibration sweep for the synthetic filter study.
//!
//! Prints oracle accuracy with and without the reveal filter for a range of
//! concept contrasts, and the lowest winning template score on pure-concept
//! images (which bounds the usable rejection threshold).
//!
//! ```text
//! cargo run --release -p illusory-core --example calibrate -- [samples] [carrier_scale]
//! ```

use illusory_core::pipeline::FilterConfig;
use illusory_core::synth::{
    generate_sample, run_study, SynthSpec, TemplateBank, DEFAULT_CARRIER_SCALE, DEFAULT_THRESHOLD,
};

fn main() {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(200);
    let carrier_scale: f64 = args
        .next()
        .and_then(|a| a.parse().ok())
        .unwrap_or(DEFAULT_CARRIER_SCALE);

    let bank = TemplateBank::new(10).expect("bank");
    let pure = SynthSpec {
        alpha: 1.0,
        carrier_scale,
        ..Default::default()
    };
    let mut lowest = f64::INFINITY;
    for i in 0..n {
        let (label, image) = generate_sample(&pure, n, i).expect("sample");
        let scores = bank.scores(&image).expect("scores");
        let best = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let winner = scores.iter().position(|&s| s == best).unwrap();
        if Some(winner) != label {
            println!("alpha=1 sample {i}: expected {label:?}, oracle picked {winner}");
        }
        lowest = lowest.min(best);
    }
    println!("lowest winning score at alpha=1 over {n} samples: {lowest:.4}");

    println!(
        "{:>6} {:>11} {:>9} {:>7}",
        "alpha", "unfiltered", "filtered", "gain"
    );
    for alpha in [
        0.0, 0.02, 0.04, 0.06, 0.08, 0.1, 0.12, 0.14, 0.16, 0.2, 0.3, 0.5, 1.0,
    ] {
        let spec = SynthSpec {
            alpha,
            carrier_scale,
            ..Default::default()
        };
        let study =
            run_study(&spec, n, &FilterConfig::default(), DEFAULT_THRESHOLD).expect("study");
        println!(
            "{alpha:>6.2} {:>11.2} {:>9.2} {:>7.2}",
            study.unfiltered.accuracy,
            study.filtered.accuracy,
            study.gain()
        );
    }
}
