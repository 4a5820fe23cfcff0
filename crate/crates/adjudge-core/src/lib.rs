//! Evaluation harness for adjective-noun membership inferences ("Is a fake
//! watch still a watch?") judged against distributions of human Likert
//! ratings.
//!
//! The crate is organized around the experiment pipeline:
//!
//! - [`corpus`] loads the human judgment datasets (no-context ratings and
//!   expert-written biasing contexts) and derives per-bigram statistics and
//!   corpus-frequency bins.
//! - [`prompting`] assembles the question strings, few-shot prefixes and
//!   story-generation conversations, byte-identically across runs.
//! - [`backend`] scores answer candidates by log-probability and samples chat
//!   completions, against an HTTP inference server or a deterministic mock.
//! - [`metrics`] turns answer scores into ratings and distributions, and
//!   implements the within-1-SD accuracy, Jensen-Shannon divergence and the
//!   random/majority/uniform baselines.
//! - [`analogy`] predicts ratings for unseen bigrams from embedding-nearest
//!   neighbours with known ratings.
//! - [`contextgen`] drives multi-turn story generation and rates the
//!   inference inside each generated story.
//! - [`stats`] fits the cumulative-logit ordinal regression and the OLS
//!   model with dummy coding and interactions used in the analyses.

pub mod analogy;
pub mod backend;
pub mod contextgen;
pub mod corpus;
pub mod metrics;
pub mod prompting;
pub mod stats;

pub use corpus::{AdjectiveClass, BigramRecord, Dataset, FrequencyBin, HumanRatingSet, LikertRating};
pub use metrics::RatingDistribution;
