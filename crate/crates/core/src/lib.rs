//! Evaluation core for multi-object video object segmentation benchmarks.
//!
//! Covers mask I/O, per-frame J and F metrics, the ground-truth to proposal
//! assignment used by the unsupervised track, dataset-level evaluation, the
//! interactive scribble robot, and a synthetic dataset generator.

pub mod assignment;
pub mod codec;
pub mod dataset;
pub mod evaluator;
pub mod interactive;
pub mod mask;
pub mod metrics;
pub mod pairwise;
pub mod report;
pub mod rle;
pub mod synth;
