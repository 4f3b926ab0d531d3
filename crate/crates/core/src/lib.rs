//! Illusion-revealing image filtering and illusory-VQA evaluation.
//!
//! The crate is organized around four jobs:
//!
//! - [`imaging`] and [`pipeline`]: deterministic blur, median, grayscale and
//!   sharpening primitives, and the fixed chain that composes them into
//!   [`pipeline::reveal`].
//! - [`dataset`] and [`metrics`]: manifests, label sets, answer
//!   normalization, and the accuracy / macro-F1 / WER / CER / coverage scores.
//! - [`client`]: a resumable, bounded-concurrency batch client for
//!   chat-completions style vision endpoints.
//! - [`synth`]: procedural illusions plus a template-matching oracle that
//!   makes the filter's effect measurable offline.
//!
//! ```
//! use illusory_core::imaging::ImageBuffer;
//! use illusory_core::pipeline::{reveal, FilterConfig};
//!
//! let img = ImageBuffer::filled(32, 32, &[200, 150, 100]).unwrap();
//! let out = reveal(&img, &FilterConfig::default()).unwrap();
//! assert!(out.data().iter().all(|&v| v == 159));
//! ```

pub mod client;
pub mod dataset;
pub mod imaging;
pub mod metrics;
pub mod pipeline;
pub mod synth;

// The guide's code blocks are compiled and run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/filters.md")]
    mod filters {}
    #[doc = include_str!("../../../book/src/pipeline.md")]
    mod pipeline {}
    #[doc = include_str!("../../../book/src/scoring.md")]
    mod scoring {}
    #[doc = include_str!("../../../book/src/synthetic.md")]
    mod synthetic {}
    #[doc = include_str!("../../../book/src/client.md")]
    mod client {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
