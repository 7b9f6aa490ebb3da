//! Benchmark problems, prefix augmentation and prompt assembly.
//!
//! Problems come from line-oriented JSON files: either the GSM8K release
//! shape (`question`/`answer` with a `#### <gold>` marker) or this tool's
//! generic record shape. Prompt assembly perturbs the problem statement
//! only — the instruction template is never noised — and is deterministic
//! given (problem, strategy, spec).

use std::fmt;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::noise::{inject, CountPolicy, NoiseAlphabet, NoiseError, NoiseSpec};

pub const MATH_STANDARD_TEMPLATE: &str = include_str!("../assets/prompt_math_standard.txt");
pub const MATH_EXPLICIT_TEMPLATE: &str = include_str!("../assets/prompt_math_explicit.txt");
pub const CODE_STANDARD_TEMPLATE: &str = include_str!("../assets/prompt_code_standard.txt");

pub const PREFIX_P1: &str = include_str!("../assets/prefix_p1.txt");
pub const PREFIX_P2: &str = include_str!("../assets/prefix_p2.txt");
pub const PREFIX_P3: &str = include_str!("../assets/prefix_p3.txt");

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("io error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: invalid JSON record: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("line {line}: answer lacks the '#### ' gold marker")]
    MissingMarker { line: usize },
    #[error("line {line}: gold answer {text:?} is not an integer")]
    NonIntegerGold { line: usize, text: String },
    #[error("line {line}: statement is empty")]
    EmptyStatement { line: usize },
    #[error("no template bundled for {family} problems with the {strategy} strategy")]
    MissingTemplate {
        family: &'static str,
        strategy: &'static str,
    },
    #[error(transparent)]
    Noise(#[from] NoiseError),
}

/// Gold label: the integer answer for math items, or a marker for
/// judge-scored code tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gold {
    Integer(i64),
    CodeTask,
}

impl Serialize for Gold {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Gold::Integer(v) => s.serialize_i64(*v),
            Gold::CodeTask => s.serialize_str("code-task"),
        }
    }
}

impl<'de> Deserialize<'de> for Gold {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(v) => Ok(Gold::Integer(v)),
            Raw::Text(t) if t == "code-task" => Ok(Gold::CodeTask),
            Raw::Text(t) => Err(serde::de::Error::custom(format!(
                "gold must be an integer or \"code-task\", got {t:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    En,
    Zh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PrefixTier {
    #[default]
    None,
    P1,
    P2,
    P3,
}

impl PrefixTier {
    pub fn prefix_text(self) -> &'static str {
        match self {
            PrefixTier::None => "",
            PrefixTier::P1 => PREFIX_P1,
            PrefixTier::P2 => PREFIX_P2,
            PrefixTier::P3 => PREFIX_P3,
        }
    }
}

/// One benchmark item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    pub id: String,
    pub statement: String,
    pub gold: Gold,
    #[serde(default = "default_language")]
    pub language: Language,
    #[serde(default)]
    pub prefix_tier: PrefixTier,
}

fn default_language() -> Language {
    Language::En
}

/// Load GSM8K-shaped records: one JSON object per line with `question`
/// and `answer` fields, gold integer after the final `#### ` marker,
/// commas stripped.
pub fn load_gsm8k(path: &Path) -> Result<Vec<Problem>, CorpusError> {
    load_gsm8k_with_language(path, Language::En)
}

pub fn load_gsm8k_with_language(
    path: &Path,
    language: Language,
) -> Result<Vec<Problem>, CorpusError> {
    #[derive(Deserialize)]
    struct Record {
        question: String,
        answer: String,
    }

    let file = std::fs::File::open(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let reader = std::io::BufReader::new(file);
    let mut problems = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record: Record =
            serde_json::from_str(&line).map_err(|source| CorpusError::Json {
                line: line_no,
                source,
            })?;
        if record.question.is_empty() {
            return Err(CorpusError::EmptyStatement { line: line_no });
        }
        let gold = parse_gold_marker(&record.answer, line_no)?;
        problems.push(Problem {
            id: format!("gsm8k-{line_no}"),
            statement: record.question,
            gold: Gold::Integer(gold),
            language,
            prefix_tier: PrefixTier::None,
        });
    }
    Ok(problems)
}

fn parse_gold_marker(answer: &str, line: usize) -> Result<i64, CorpusError> {
    const MARKER: &str = "#### ";
    let pos = answer
        .rfind(MARKER)
        .ok_or(CorpusError::MissingMarker { line })?;
    let tail = answer[pos + MARKER.len()..].trim();
    let cleaned: String = tail.chars().filter(|&c| c != ',').collect();
    let valid = !cleaned.is_empty()
        && cleaned
            .strip_prefix('-')
            .unwrap_or(&cleaned)
            .chars()
            .all(|c| c.is_ascii_digit())
        && cleaned != "-";
    if !valid {
        return Err(CorpusError::NonIntegerGold {
            line,
            text: tail.to_string(),
        });
    }
    cleaned.parse().map_err(|_| CorpusError::NonIntegerGold {
        line,
        text: tail.to_string(),
    })
}

/// Load this tool's generic problem records (`id`, `statement`, `gold`,
/// optional `language` and `prefix_tier`).
pub fn load_problems(path: &Path) -> Result<Vec<Problem>, CorpusError> {
    let file = std::fs::File::open(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let reader = std::io::BufReader::new(file);
    let mut problems = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let problem: Problem =
            serde_json::from_str(&line).map_err(|source| CorpusError::Json {
                line: line_no,
                source,
            })?;
        if problem.statement.is_empty() {
            return Err(CorpusError::EmptyStatement { line: line_no });
        }
        problems.push(problem);
    }
    Ok(problems)
}

/// Prepend the verbatim contextual prefix for `tier` to the statement.
/// The gold answer is untouched; `PrefixTier::None` is the identity.
pub fn apply_prefix(problem: &Problem, tier: PrefixTier) -> Problem {
    let mut out = problem.clone();
    out.prefix_tier = tier;
    if tier != PrefixTier::None {
        out.statement = format!("{}{}", tier.prefix_text(), problem.statement);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    Standard,
    ExplicitInstruction,
    OneShot,
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StrategyKind::Standard => "standard",
            StrategyKind::ExplicitInstruction => "explicit_instruction",
            StrategyKind::OneShot => "one_shot",
        })
    }
}

/// In-context example for the one-shot strategy: an already-noised
/// problem plus an ideal response that first rewrites the clean text and
/// then solves it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Shot {
    pub noised_problem: String,
    pub ideal_response: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptStrategy {
    pub kind: StrategyKind,
    pub shot: Option<Shot>,
}

const SHOT_PROBLEM: &str = "A tray holds 4 cups and 9 plates. How many items are on the tray?";
const SHOT_SEED: u64 = 0x5348_4F54; // arbitrary fixed seed so the exemplar never varies

impl PromptStrategy {
    pub fn standard() -> Self {
        PromptStrategy {
            kind: StrategyKind::Standard,
            shot: None,
        }
    }

    pub fn explicit_instruction() -> Self {
        PromptStrategy {
            kind: StrategyKind::ExplicitInstruction,
            shot: None,
        }
    }

    pub fn one_shot(shot: Shot) -> Self {
        PromptStrategy {
            kind: StrategyKind::OneShot,
            shot: Some(shot),
        }
    }

    /// Built-in rewriting exemplar: a two-sentence arithmetic problem
    /// noised with one variation selector per character, answered by a
    /// response that rewrites the clean text before solving it.
    pub fn one_shot_default() -> Self {
        let spec = NoiseSpec::new(
            NoiseAlphabet::variation_selectors(16),
            CountPolicy::fixed(1),
            SHOT_SEED,
        );
        let noised = inject(SHOT_PROBLEM, &spec)
            .expect("exemplar text is clean")
            .perturbed;
        let ideal = format!(
            "We first remove the meaningless characters to recover the clean question. \
             The original text is: {SHOT_PROBLEM} Solution: the tray holds 4 cups and \
             9 plates, so 4 + 9 = 13 items. The answer is: \\boxed{{13}}"
        );
        Self::one_shot(Shot {
            noised_problem: noised,
            ideal_response: ideal,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::User,
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::Assistant,
            content: content.into(),
        }
    }
}

pub const DEFAULT_MAX_NEW_TOKENS: u32 = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecodingParams {
    pub temperature: f64,
    pub max_new_tokens: u32,
}

impl Default for DecodingParams {
    fn default() -> Self {
        DecodingParams {
            temperature: 0.0,
            max_new_tokens: DEFAULT_MAX_NEW_TOKENS,
        }
    }
}

/// A ready-to-send chat prompt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssembledPrompt {
    pub messages: Vec<ChatMessage>,
    pub decoding: DecodingParams,
    pub noise_spec_id: String,
}

/// Per-language instruction templates. `Default` is the bundled English
/// set; other languages load from user-supplied files.
#[derive(Debug, Clone)]
pub struct TemplateSet {
    pub math_standard: String,
    pub math_explicit: String,
    pub code_standard: String,
}

impl Default for TemplateSet {
    fn default() -> Self {
        TemplateSet {
            math_standard: MATH_STANDARD_TEMPLATE.to_string(),
            math_explicit: MATH_EXPLICIT_TEMPLATE.to_string(),
            code_standard: CODE_STANDARD_TEMPLATE.to_string(),
        }
    }
}

/// Assembles prompts for problems. Perturbs the statement only, picks the
/// template by (task family, strategy), and keeps everything
/// deterministic for a given spec.
#[derive(Debug, Clone)]
pub struct PromptBuilder {
    pub templates_en: TemplateSet,
    pub templates_zh: Option<TemplateSet>,
    /// When false, fenced ``` blocks inside the statement are exempt from
    /// perturbation (for code-task sample I/O).
    pub perturb_fenced: bool,
}

impl Default for PromptBuilder {
    fn default() -> Self {
        PromptBuilder {
            templates_en: TemplateSet::default(),
            templates_zh: None,
            perturb_fenced: true,
        }
    }
}

impl PromptBuilder {
    pub fn build(
        &self,
        problem: &Problem,
        strategy: &PromptStrategy,
        spec: &NoiseSpec,
        spec_id: &str,
    ) -> Result<AssembledPrompt, CorpusError> {
        let templates = match problem.language {
            Language::En => &self.templates_en,
            Language::Zh => self.templates_zh.as_ref().ok_or(CorpusError::MissingTemplate {
                family: "zh",
                strategy: "any",
            })?,
        };
        let template = match (problem.gold, strategy.kind) {
            (Gold::Integer(_), StrategyKind::ExplicitInstruction) => &templates.math_explicit,
            (Gold::Integer(_), _) => &templates.math_standard,
            (Gold::CodeTask, StrategyKind::Standard | StrategyKind::OneShot) => {
                &templates.code_standard
            }
            (Gold::CodeTask, StrategyKind::ExplicitInstruction) => {
                return Err(CorpusError::MissingTemplate {
                    family: "code",
                    strategy: "explicit_instruction",
                })
            }
        };

        let perturbed = self.perturb_statement(&problem.statement, spec)?;
        let mut messages = Vec::new();
        if let (StrategyKind::OneShot, Some(shot)) = (strategy.kind, strategy.shot.as_ref()) {
            messages.push(ChatMessage::user(format!(
                "{template}{}",
                shot.noised_problem
            )));
            messages.push(ChatMessage::assistant(shot.ideal_response.clone()));
        }
        messages.push(ChatMessage::user(format!("{template}{perturbed}")));

        Ok(AssembledPrompt {
            messages,
            decoding: DecodingParams::default(),
            noise_spec_id: spec_id.to_string(),
        })
    }

    fn perturb_statement(&self, statement: &str, spec: &NoiseSpec) -> Result<String, CorpusError> {
        if self.perturb_fenced {
            return Ok(inject(statement, spec)?.perturbed);
        }
        // Leave fenced blocks clean. Segments are delimited by lines that
        // start with ```; the fence lines themselves stay clean too so the
        // block structure survives for downstream extraction.
        let mut out = String::with_capacity(statement.len() * 2);
        let mut in_fence = false;
        let mut segment = String::new();
        let mut segment_idx = 0u64;
        for (i, line) in statement.split_inclusive('\n').enumerate() {
            let _ = i;
            if line.trim_end_matches(['\r', '\n']).starts_with("```") {
                if !segment.is_empty() {
                    let seg_spec = spec.with_seed(spec.seed ^ segment_idx);
                    out.push_str(&inject(&segment, &seg_spec)?.perturbed);
                    segment.clear();
                    segment_idx += 1;
                }
                out.push_str(line);
                in_fence = !in_fence;
            } else if in_fence {
                out.push_str(line);
            } else {
                segment.push_str(line);
            }
        }
        if !segment.is_empty() {
            let seg_spec = spec.with_seed(spec.seed ^ segment_idx);
            out.push_str(&inject(&segment, &seg_spec)?.perturbed);
        }
        Ok(out)
    }
}
