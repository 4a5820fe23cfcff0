//! Prompt assembly: question strings, few-shot prefixes and the
//! story-generation conversation. All templates are shipped as text assets
//! and every builder is deterministic, so identical inputs produce
//! byte-identical prompts.

use serde::{Deserialize, Serialize};

use crate::corpus::{ArticleTable, LikertRating, LIKERT_LABELS};

const FEWSHOT_NO_CONTEXT: &str = include_str!("../assets/fewshot_no_context.txt");
const FEWSHOT_WITH_CONTEXT: &str = include_str!("../assets/fewshot_with_context.txt");
const STORY_INSTRUCTION: &str = include_str!("../assets/story_instruction.txt");
const STORY_FOLLOW_UP: &str = include_str!("../assets/story_follow_up.txt");
const STORY_TRIPLE_FOLLOW_UP: &str = include_str!("../assets/story_triple_follow_up.txt");

/// The scale enumeration that opens every question.
pub const SCALE_PREFIX: &str =
    "On a scale of \"Definitely not\", \"Probably not\", \"Unsure\", \"Probably yes\" or \"Definitely yes\"";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    System,
    User,
    Assistant,
    /// Raw completion text; never mixed with chat roles in one prompt.
    Plain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptMessage {
    pub role: Role,
    pub text: String,
}

impl PromptMessage {
    pub fn new(role: Role, text: impl Into<String>) -> Self {
        PromptMessage { role, text: text.into() }
    }
}

/// Identifies what a prompt asks about, for fixtures and run persistence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptMetadata {
    pub experiment: String,
    pub bigram: String,
    pub context_id: Option<String>,
    pub shots: u8,
}

/// A fully assembled prompt plus the five answer candidates in rating order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub messages: Vec<PromptMessage>,
    pub answer_candidates: [String; 5],
    pub metadata: PromptMetadata,
}

impl PromptBundle {
    pub fn answer_candidates() -> [String; 5] {
        LIKERT_LABELS.map(str::to_string)
    }

    /// True when the prompt uses chat roles rather than plain completion
    /// text.
    pub fn is_chat(&self) -> bool {
        self.messages.iter().any(|m| m.role != Role::Plain)
    }
}

/// Whether few-shot examples carry contexts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FewShotMode {
    NoContext,
    WithContext,
}

/// Chat-style prompts emit user/assistant turns; completion-style prompts
/// concatenate with "Question:"/"Answer:" labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptStyle {
    Chat,
    Completion,
}

/// One few-shot example parsed from the template assets.
#[derive(Debug, Clone, PartialEq)]
pub struct FewShotExample {
    pub context: Option<String>,
    pub question: String,
    pub answer: String,
}

fn parse_fewshot_asset(asset: &str) -> Vec<FewShotExample> {
    let mut examples = Vec::new();
    for block in asset.split("\n\n") {
        let block = block.trim_end_matches('\n');
        if block.is_empty() {
            continue;
        }
        let mut context = None;
        let mut question = None;
        let mut answer = None;
        for line in block.lines() {
            if let Some(rest) = line.strip_prefix("Context: ") {
                context = Some(rest.to_string());
            } else if let Some(rest) = line.strip_prefix("Question: ") {
                question = Some(rest.to_string());
            } else if let Some(rest) = line.strip_prefix("Answer: ") {
                answer = Some(rest.to_string());
            } else {
                panic!("unparseable few-shot template line: {line:?}");
            }
        }
        examples.push(FewShotExample {
            context,
            question: question.expect("template block missing Question"),
            answer: answer.expect("template block missing Answer"),
        });
    }
    examples
}

/// The five few-shot examples for the given mode, in template order.
pub fn fewshot_examples(mode: FewShotMode) -> Vec<FewShotExample> {
    match mode {
        FewShotMode::NoContext => parse_fewshot_asset(FEWSHOT_NO_CONTEXT),
        FewShotMode::WithContext => parse_fewshot_asset(FEWSHOT_WITH_CONTEXT),
    }
}

/// The question string for a bigram, without any few-shot prefix.
///
/// Without a context: `On a scale of ..., is a fake watch still a watch?`
/// With one, the question is asked about "the" bigram and gains the
/// "in this context," phrase (the surrounding `Context:` block is added at
/// message-assembly time).
pub fn build_question(adjective: &str, noun: &str, articles: &ArticleTable, with_context: bool) -> String {
    let verb = articles.verb_for(noun);
    let (noun_article, _) = articles.article_for(noun, noun);
    if with_context {
        format!(
            "{SCALE_PREFIX}, in this context, {verb} the {adjective} {noun} still {}{noun}?",
            noun_article.as_prefix()
        )
    } else {
        let (bigram_article, _) = articles.article_for(adjective, noun);
        format!(
            "{SCALE_PREFIX}, {verb} {}{adjective} {noun} still {}{noun}?",
            bigram_article.as_prefix(),
            noun_article.as_prefix()
        )
    }
}

fn user_content(example_context: Option<&str>, question: &str) -> String {
    match example_context {
        Some(c) => format!("Context: {c}\nQuestion: {question}"),
        None => question.to_string(),
    }
}

/// The few-shot prefix: alternating user/assistant turns in chat style, or a
/// single plain text block with "Answer:" labels in completion style.
/// `shots` must be 0 or 5; 0 yields an empty prefix.
pub fn build_fewshot(mode: FewShotMode, style: PromptStyle, shots: u8) -> Vec<PromptMessage> {
    assert!(shots == 0 || shots == 5, "shots must be 0 or 5, got {shots}");
    if shots == 0 {
        return Vec::new();
    }
    let examples = fewshot_examples(mode);
    match style {
        PromptStyle::Chat => {
            let mut messages = Vec::with_capacity(10);
            for ex in &examples {
                messages.push(PromptMessage::new(Role::User, user_content(ex.context.as_deref(), &ex.question)));
                messages.push(PromptMessage::new(Role::Assistant, ex.answer.clone()));
            }
            messages
        }
        PromptStyle::Completion => {
            let blocks: Vec<String> = examples
                .iter()
                .map(|ex| match &ex.context {
                    Some(c) => format!("Context: {c}\nQuestion: {}\nAnswer: {}", ex.question, ex.answer),
                    None => format!("Question: {}\nAnswer: {}", ex.question, ex.answer),
                })
                .collect();
            vec![PromptMessage::new(Role::Plain, format!("{}\n\n", blocks.join("\n\n")))]
        }
    }
}

/// Assemble the complete scoring prompt for one query.
#[allow(clippy::too_many_arguments)]
pub fn build_bundle(
    experiment: &str,
    adjective: &str,
    noun: &str,
    articles: &ArticleTable,
    context: Option<(&str, &str)>,
    style: PromptStyle,
    shots: u8,
) -> PromptBundle {
    let mode = if context.is_some() { FewShotMode::WithContext } else { FewShotMode::NoContext };
    let question = build_question(adjective, noun, articles, context.is_some());
    let target = user_content(context.map(|(_, text)| text), &question);

    let mut messages = build_fewshot(mode, style, shots);
    match style {
        PromptStyle::Chat => messages.push(PromptMessage::new(Role::User, target)),
        PromptStyle::Completion => {
            let prefix = match messages.pop() {
                Some(m) => m.text,
                None => String::new(),
            };
            let labelled = if context.is_some() {
                // the target already carries its Context:/Question: labels
                format!("{target}\nAnswer:")
            } else {
                format!("Question: {target}\nAnswer:")
            };
            messages = vec![PromptMessage::new(Role::Plain, format!("{prefix}{labelled}"))];
        }
    }

    PromptBundle {
        messages,
        answer_candidates: PromptBundle::answer_candidates(),
        metadata: PromptMetadata {
            experiment: experiment.to_string(),
            bigram: format!("{adjective} {noun}"),
            context_id: context.map(|(id, _)| id.to_string()),
            shots,
        },
    }
}

/// One user turn in the story-generation conversation and how many stories
/// it asks for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoryTurn {
    pub text: String,
    pub expected_stories: usize,
}

/// The story-generation conversation for a bigram: one instruction turn with
/// three example stories and the first request, two "write another" turns,
/// then three numbered three-story turns, for twelve stories in total.
pub fn build_story_prompt_sequence(adjective: &str, noun: &str, articles: &ArticleTable) -> Vec<StoryTurn> {
    let bigram = format!("{adjective} {noun}");
    let (article, _) = articles.article_for(adjective, noun);
    let fill = |template: &str| {
        template
            .trim_end_matches('\n')
            .replace("{a_an}", article.as_prefix())
            .replace("{bigram}", &bigram)
    };
    let mut turns = vec![StoryTurn { text: fill(STORY_INSTRUCTION), expected_stories: 1 }];
    for _ in 0..2 {
        turns.push(StoryTurn { text: fill(STORY_FOLLOW_UP), expected_stories: 1 });
    }
    for _ in 0..3 {
        turns.push(StoryTurn { text: fill(STORY_TRIPLE_FOLLOW_UP), expected_stories: 3 });
    }
    turns
}

/// The Likert label scored for a candidate answer, in rating order.
pub fn candidate_label(rating: LikertRating) -> &'static str {
    LIKERT_LABELS[rating.index()]
}
