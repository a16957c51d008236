//! Multimodal top-K recommendation toolkit: corpus preparation, frozen
//! item-item graph enhancement, pairwise-ranking training with analytic
//! gradients, test-phase graph convolution, and objective diagnostics.

pub mod anatomy;
pub mod corpus;
pub mod dense;
pub mod error;
pub mod graphs;
pub mod inference;
pub mod metrics;
pub mod model;
pub mod sparse;
pub mod synthetic;

#[cfg(test)]
pub(crate) mod testutil;

pub use corpus::{DatasetSplit, FeatureMatrix, IdMap, InteractionTable, RawInteraction};
pub use dense::Dense;
pub use error::{Error, Result};
pub use graphs::{ItemItemGraph, ItemItemGraphSet, NormalizedBipartite};
pub use metrics::{MetricReport, SparsityBuckets};
pub use model::{
    GcnPhase, HyperParams, ItemEmbedMode, ItemGraphMode, ModelParams, TrainingLog,
};
