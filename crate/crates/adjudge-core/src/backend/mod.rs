//! Scoring and generation backends.
//!
//! A backend does two things: compute the log-probability of each of the
//! five candidate answers given a prompt, and sample chat completions for
//! story generation. [`HttpBackend`] talks to an inference server that
//! echoes per-token log-probabilities of supplied text; [`MockBackend`] is a
//! deterministic fixture-driven stand-in used by tests and offline runs.

mod http;
mod mock;

pub use http::HttpBackend;
pub use mock::MockBackend;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::LikertRating;
use crate::prompting::{PromptBundle, PromptMessage};

/// The scored log-probability of one candidate answer. `total_logprob` sums
/// the log-probabilities of the answer tokens only; prompt tokens are
/// excluded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerScore {
    pub answer: LikertRating,
    pub label: String,
    pub total_logprob: f64,
    pub token_count: usize,
}

/// How chat messages are rendered into a single completion prompt for
/// scoring. Pinned per model family in config and recorded in run metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRender {
    pub system_prefix: String,
    pub user_prefix: String,
    pub assistant_prefix: String,
    pub turn_separator: String,
    /// Appended after the last user turn so the answer continues an
    /// assistant turn.
    pub generation_suffix: String,
}

impl Default for ChatRender {
    fn default() -> Self {
        ChatRender {
            system_prefix: "System: ".into(),
            user_prefix: "User: ".into(),
            assistant_prefix: "Assistant: ".into(),
            turn_separator: "\n\n".into(),
            generation_suffix: "\n\nAssistant:".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendConfig {
    pub endpoint: String,
    pub model: String,
    pub timeout_secs: u64,
    pub max_concurrent: usize,
    pub retry_budget: u32,
    /// Base delay for exponential backoff between retries.
    pub retry_base_ms: u64,
    pub temperature: f64,
    pub seed: u64,
    /// Inserted between the rendered prompt and the answer text when
    /// scoring; the answer's log-probabilities include it.
    pub answer_separator: String,
    /// Divide each answer's total log-probability by its token count.
    /// Off by default; exposed for sensitivity analysis.
    pub length_normalize: bool,
    pub chat_render: ChatRender,
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig {
            endpoint: "http://localhost:8000".into(),
            model: "unknown".into(),
            timeout_secs: 120,
            max_concurrent: 4,
            retry_budget: 3,
            retry_base_ms: 250,
            temperature: 0.6,
            seed: 0,
            answer_separator: " ".into(),
            length_normalize: false,
            chat_render: ChatRender::default(),
        }
    }
}

impl BackendConfig {
    pub fn validate(&self) -> Result<(), BackendError> {
        if self.max_concurrent < 1 {
            return Err(BackendError::BadConfig("max_concurrent must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("invalid backend config: {0}")]
    BadConfig(String),
    #[error("endpoint unreachable: {0}")]
    Unreachable(String),
    #[error("endpoint returned status {status}: {body}")]
    HttpStatus { status: u16, body: String },
    #[error("endpoint does not expose input log-probabilities ({0}); model unusable for log-probability scoring")]
    NoLogprobs(String),
    #[error("token alignment failure: {0}")]
    TokenAlignment(String),
    #[error("generation returned empty output")]
    EmptyOutput,
    #[error("prompt must carry exactly five answer candidates, got {0}")]
    WrongCandidateCount(usize),
    #[error("mock fixture has no entry for {0:?}")]
    MissingFixture(String),
    #[error("invalid mock fixture: {0}")]
    BadFixture(String),
}

/// A scoring-and-generation backend. Scoring is read-only and idempotent;
/// generation is sampled and takes the conversation so far.
pub trait InferenceBackend: Send + Sync {
    /// One [`AnswerScore`] per candidate, in rating order 1..=5.
    fn score_answers(&self, prompt: &PromptBundle) -> Result<Vec<AnswerScore>, BackendError>;

    /// Sample the next assistant turn for a chat.
    fn generate(
        &self,
        messages: &[PromptMessage],
        temperature: f64,
        max_tokens: usize,
    ) -> Result<String, BackendError>;

    /// Stable identity for run manifests.
    fn identity(&self) -> String;
}

pub(crate) fn check_candidates(prompt: &PromptBundle) -> Result<(), BackendError> {
    if prompt.answer_candidates.len() != 5 {
        return Err(BackendError::WrongCandidateCount(prompt.answer_candidates.len()));
    }
    Ok(())
}
