//! Deterministic fixture-driven backend.
//!
//! Scores come from a JSON table keyed by the prompt's metadata
//! (`experiment/bigram` or `experiment/bigram/context_id`); generations are
//! scripted per bigram and per conversation turn, with optional variants
//! selected by a seeded RNG when the temperature is nonzero.

use std::collections::HashMap;
use std::path::Path;

use rand::Rng;
use serde::Deserialize;

use crate::corpus::LikertRating;
use crate::metrics::bigram_rng;
use crate::prompting::{PromptBundle, PromptMessage, Role};

use super::{check_candidates, AnswerScore, BackendError, InferenceBackend};

#[derive(Debug, Clone, Deserialize, Default)]
pub struct MockFixture {
    /// `"<experiment>/<bigram>"` or `"<experiment>/<bigram>/<context_id>"`
    /// to five per-answer log-probabilities in rating order.
    #[serde(default)]
    pub scores: HashMap<String, [f64; 5]>,
    /// Fallback scores for keys not listed.
    #[serde(default)]
    pub default_scores: Option<[f64; 5]>,
    /// Per bigram: one entry per assistant turn, each a list of variants.
    /// Variant 0 is used at temperature 0; otherwise a seeded pick.
    #[serde(default)]
    pub generations: HashMap<String, Vec<Vec<String>>>,
}

#[derive(Debug)]
pub struct MockBackend {
    fixture: MockFixture,
    seed: u64,
    name: String,
}

impl MockBackend {
    pub fn new(fixture: MockFixture, seed: u64) -> Self {
        MockBackend { fixture, seed, name: "mock".to_string() }
    }

    pub fn from_fixture_file(path: &Path, seed: u64) -> Result<Self, BackendError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BackendError::BadFixture(format!("{}: {e}", path.display())))?;
        let fixture: MockFixture =
            serde_json::from_str(&text).map_err(|e| BackendError::BadFixture(e.to_string()))?;
        Ok(MockBackend::new(fixture, seed))
    }

    fn lookup_scores(&self, prompt: &PromptBundle) -> Result<[f64; 5], BackendError> {
        let meta = &prompt.metadata;
        let with_context = meta
            .context_id
            .as_ref()
            .map(|c| format!("{}/{}/{}", meta.experiment, meta.bigram, c));
        if let Some(key) = &with_context {
            if let Some(v) = self.fixture.scores.get(key) {
                return Ok(*v);
            }
        }
        let base = format!("{}/{}", meta.experiment, meta.bigram);
        if let Some(v) = self.fixture.scores.get(&base) {
            return Ok(*v);
        }
        if let Some(v) = self.fixture.default_scores {
            return Ok(v);
        }
        Err(BackendError::MissingFixture(with_context.unwrap_or(base)))
    }

    /// The bigram under discussion, recovered from the scripted instruction
    /// turn (`... includes the phrase "<bigram>" ...`).
    fn bigram_from_conversation(messages: &[PromptMessage]) -> Result<String, BackendError> {
        for m in messages {
            if m.role != Role::User {
                continue;
            }
            if let Some(start) = m.text.find("includes the phrase \"") {
                let rest = &m.text[start + "includes the phrase \"".len()..];
                if let Some(end) = rest.find('"') {
                    return Ok(rest[..end].to_string());
                }
            }
        }
        Err(BackendError::MissingFixture("no bigram phrase found in conversation".into()))
    }
}

impl InferenceBackend for MockBackend {
    fn score_answers(&self, prompt: &PromptBundle) -> Result<Vec<AnswerScore>, BackendError> {
        check_candidates(prompt)?;
        let logprobs = self.lookup_scores(prompt)?;
        Ok(LikertRating::ALL
            .iter()
            .zip(logprobs)
            .map(|(&answer, total_logprob)| AnswerScore {
                answer,
                label: answer.label().to_string(),
                total_logprob,
                token_count: 1,
            })
            .collect())
    }

    fn generate(
        &self,
        messages: &[PromptMessage],
        temperature: f64,
        _max_tokens: usize,
    ) -> Result<String, BackendError> {
        let bigram = Self::bigram_from_conversation(messages)?;
        let turns = self
            .fixture
            .generations
            .get(&bigram)
            .ok_or_else(|| BackendError::MissingFixture(format!("generations for {bigram:?}")))?;
        let turn_index = messages.iter().filter(|m| m.role == Role::Assistant).count();
        let variants = turns.get(turn_index).ok_or_else(|| {
            BackendError::MissingFixture(format!("generation turn {turn_index} for {bigram:?}"))
        })?;
        if variants.is_empty() {
            return Err(BackendError::EmptyOutput);
        }
        let pick = if temperature == 0.0 || variants.len() == 1 {
            0
        } else {
            let mut rng = bigram_rng(self.seed ^ turn_index as u64, &bigram);
            rng.gen_range(0..variants.len())
        };
        Ok(variants[pick].clone())
    }

    fn identity(&self) -> String {
        format!("{}:seed={}", self.name, self.seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::ArticleTable;
    use crate::prompting::{build_bundle, build_story_prompt_sequence, PromptStyle};

    fn fixture() -> MockFixture {
        serde_json::from_str(
            r#"{
                "scores": {
                    "exp2/fake watch": [-5.0, -5.0, -1.0, -5.0, -5.0],
                    "exp1b/fake watch/privative": [-1.0, -2.0, -3.0, -4.0, -5.0]
                },
                "default_scores": [-2.0, -2.0, -2.0, -2.0, -2.0],
                "generations": {
                    "fake crowd": [
                        ["Story: Turn one.", "Story: Turn one, take two."],
                        ["Story: Turn two."]
                    ]
                }
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn scores_resolve_by_metadata_key() {
        let backend = MockBackend::new(fixture(), 1);
        let articles = ArticleTable::new();
        let bundle = build_bundle("exp2", "fake", "watch", &articles, None, PromptStyle::Completion, 5);
        let scores = backend.score_answers(&bundle).unwrap();
        assert_eq!(scores.len(), 5);
        assert_eq!(scores[2].total_logprob, -1.0);
        // context-specific key wins over the bigram key
        let bundle = build_bundle("exp1b", "fake", "watch", &articles, Some(("privative", "c")), PromptStyle::Chat, 5);
        let scores = backend.score_answers(&bundle).unwrap();
        assert_eq!(scores[0].total_logprob, -1.0);
        // unknown bigram falls back to defaults
        let bundle = build_bundle("exp2", "fake", "unknown", &articles, None, PromptStyle::Completion, 5);
        let scores = backend.score_answers(&bundle).unwrap();
        assert_eq!(scores[4].total_logprob, -2.0);
    }

    #[test]
    fn scoring_is_idempotent() {
        let backend = MockBackend::new(fixture(), 1);
        let articles = ArticleTable::new();
        let bundle = build_bundle("exp2", "fake", "watch", &articles, None, PromptStyle::Completion, 5);
        let a = backend.score_answers(&bundle).unwrap();
        let b = backend.score_answers(&bundle).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn generation_replays_script_and_respects_temperature() {
        let backend = MockBackend::new(fixture(), 42);
        let articles = ArticleTable::new();
        let turns = build_story_prompt_sequence("fake", "crowd", &articles);
        let mut messages = vec![PromptMessage::new(Role::User, turns[0].text.clone())];

        // temperature 0: deterministic first variant, independent of seed
        let t0 = backend.generate(&messages, 0.0, 256).unwrap();
        assert_eq!(t0, "Story: Turn one.");
        let other = MockBackend::new(fixture(), 7);
        assert_eq!(other.generate(&messages, 0.0, 256).unwrap(), t0);

        // fixed seed reproduces at nonzero temperature
        let a = backend.generate(&messages, 0.6, 256).unwrap();
        let b = backend.generate(&messages, 0.6, 256).unwrap();
        assert_eq!(a, b);

        // second turn keyed by assistant-message count
        messages.push(PromptMessage::new(Role::Assistant, a));
        messages.push(PromptMessage::new(Role::User, turns[1].text.clone()));
        assert_eq!(backend.generate(&messages, 0.0, 256).unwrap(), "Story: Turn two.");
    }
}
