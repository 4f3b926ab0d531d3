pub mod evaluate;
pub mod filter;
pub mod query;
pub mod report;
pub mod synth;
