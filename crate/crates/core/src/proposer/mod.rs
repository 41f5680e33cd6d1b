//! Plan proposals: prompt construction, chat backends and scripted fixtures.

mod feedback;
mod fixtures;
mod prompt;
mod transport;

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{self, PlanTemplate};
use crate::task::TaskId;

pub use feedback::{build_feedback, FeedbackReport};
pub use fixtures::{builtin_fixture, FIXTURE_FLAVORS};
pub use prompt::{build_prompt, render_template_turn};
pub use transport::{ChatRequest, ChatTransport, HttpTransport, TransportError};

pub const DEFAULT_API_BASE: &str = "https://api.openai.com/v1";
pub const DEFAULT_MODEL: &str = "gpt-4o-mini-2024-07-18";
pub const API_KEY_VAR: &str = "MOPS_API_KEY";
pub const API_BASE_VAR: &str = "MOPS_API_BASE";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

impl Message {
    pub fn system(content: impl Into<String>) -> Self {
        Self { role: Role::System, content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self { role: Role::User, content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self { role: Role::Assistant, content: content.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProposerBackend {
    Llm {
        endpoint: String,
        model: String,
        temperature: f64,
        max_retries: usize,
    },
    /// Pops one fixture per turn.
    Scripted { name: String, turns: Vec<String> },
}

/// Settings for the chat backend; environment variables fill the gaps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LlmSettings {
    pub endpoint: Option<String>,
    pub model: String,
    pub temperature: f64,
    pub max_retries: usize,
}

impl Default for LlmSettings {
    fn default() -> Self {
        Self {
            endpoint: None,
            model: DEFAULT_MODEL.to_string(),
            temperature: 0.2,
            max_retries: 2,
        }
    }
}

impl ProposerBackend {
    /// Resolves `llm`, `scripted:<flavor>` (built-in fixtures) or
    /// `scripted:<directory>` (one `.mplan` per turn, in file-name order).
    pub fn from_spec(spec: &str, task: TaskId, llm: &LlmSettings) -> Result<Self, ProposerError> {
        if spec == "llm" {
            let endpoint = llm
                .endpoint
                .clone()
                .or_else(|| std::env::var(API_BASE_VAR).ok())
                .unwrap_or_else(|| DEFAULT_API_BASE.to_string());
            let backend = ProposerBackend::Llm {
                endpoint,
                model: llm.model.clone(),
                temperature: llm.temperature,
                max_retries: llm.max_retries,
            };
            backend.validate()?;
            return Ok(backend);
        }
        let Some(name) = spec.strip_prefix("scripted:") else {
            return Err(ProposerError::InvalidBackend(format!(
                "`{spec}` (expected `llm` or `scripted:<name>`)"
            )));
        };
        let turns = match builtin_fixture(task, name) {
            Some(turns) => turns.into_iter().map(str::to_string).collect(),
            None => load_fixture_dir(Path::new(name))?,
        };
        let backend = ProposerBackend::Scripted { name: name.to_string(), turns };
        backend.validate()?;
        Ok(backend)
    }

    pub fn validate(&self) -> Result<(), ProposerError> {
        match self {
            ProposerBackend::Llm { endpoint, temperature, .. } => {
                let rest = endpoint
                    .strip_prefix("https://")
                    .or_else(|| endpoint.strip_prefix("http://"));
                if !rest.is_some_and(|r| !r.is_empty() && !r.starts_with('/')) {
                    return Err(ProposerError::InvalidBackend(format!(
                        "endpoint `{endpoint}` is not an absolute URL"
                    )));
                }
                if !(temperature.is_finite() && *temperature >= 0.0) {
                    return Err(ProposerError::InvalidBackend("temperature must be non-negative".into()));
                }
                Ok(())
            }
            ProposerBackend::Scripted { name, turns } => {
                if turns.is_empty() {
                    return Err(ProposerError::InvalidBackend(format!("fixture `{name}` has no turns")));
                }
                Ok(())
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            ProposerBackend::Llm { model, .. } => format!("llm:{model}"),
            ProposerBackend::Scripted { name, .. } => format!("scripted:{name}"),
        }
    }
}

fn load_fixture_dir(dir: &Path) -> Result<Vec<String>, ProposerError> {
    let entries = std::fs::read_dir(dir).map_err(|e| {
        ProposerError::InvalidBackend(format!("no built-in fixture or directory `{}`: {e}", dir.display()))
    })?;
    let mut paths: Vec<_> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "mplan"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            std::fs::read_to_string(p)
                .map_err(|e| ProposerError::InvalidBackend(format!("{}: {e}", p.display())))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProposerError {
    #[error("chat service unavailable: {0}")]
    ServiceUnavailable(String),
    #[error("no usable plan template in the response: {0}")]
    UnparseableResponse(String),
    #[error("scripted fixtures exhausted after {0} turns")]
    FixturesExhausted(usize),
    #[error("environment variable {API_KEY_VAR} is not set")]
    MissingApiKey,
    #[error("invalid proposer backend: {0}")]
    InvalidBackend(String),
    #[error("unknown task `{0}`")]
    UnknownTask(String),
    #[error("the record holds no completed evaluation")]
    EmptyRecord,
}

/// A parsed proposal together with everything exchanged to obtain it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Proposal {
    pub template: PlanTemplate,
    /// The response the template was taken from.
    pub raw: String,
    /// Failed attempts and the error notes sent back, in order.
    pub retries: Vec<Message>,
}

/// First fenced code block, without its info string.
pub fn extract_fenced_block(text: &str) -> Option<&str> {
    let open = text.find("```")?;
    let after = &text[open + 3..];
    let body_start = after.find('\n')? + 1;
    let body = &after[body_start..];
    let close = body.find("```")?;
    Some(&body[..close])
}

pub struct Proposer {
    backend: ProposerBackend,
    transport: Option<Box<dyn ChatTransport + Send>>,
    turn: usize,
}

impl Proposer {
    /// Connects the llm backend over HTTPS; requires `MOPS_API_KEY`.
    pub fn new(backend: ProposerBackend) -> Result<Self, ProposerError> {
        backend.validate()?;
        let transport: Option<Box<dyn ChatTransport + Send>> = match &backend {
            ProposerBackend::Llm { endpoint, .. } => {
                let key = std::env::var(API_KEY_VAR).map_err(|_| ProposerError::MissingApiKey)?;
                Some(Box::new(HttpTransport::new(endpoint, &key)))
            }
            ProposerBackend::Scripted { .. } => None,
        };
        Ok(Self { backend, transport, turn: 0 })
    }

    pub fn with_transport(
        backend: ProposerBackend,
        transport: Box<dyn ChatTransport + Send>,
    ) -> Result<Self, ProposerError> {
        backend.validate()?;
        Ok(Self { backend, transport: Some(transport), turn: 0 })
    }

    pub fn backend(&self) -> &ProposerBackend {
        &self.backend
    }

    pub fn propose(&mut self, messages: &[Message]) -> Result<Proposal, ProposerError> {
        let proposal = match &self.backend {
            ProposerBackend::Scripted { turns, .. } => {
                let raw = turns
                    .get(self.turn)
                    .ok_or(ProposerError::FixturesExhausted(turns.len()))?
                    .clone();
                let template = dsl::parse(&raw)
                    .map_err(|e| ProposerError::UnparseableResponse(format!("fixture turn {}: {e}", self.turn)))?;
                Proposal { template, raw, retries: Vec::new() }
            }
            ProposerBackend::Llm { model, temperature, max_retries, .. } => {
                let transport = self
                    .transport
                    .as_mut()
                    .ok_or_else(|| ProposerError::ServiceUnavailable("no transport configured".into()))?;
                chat_propose(transport.as_mut(), model, *temperature, *max_retries, messages)?
            }
        };
        self.turn += 1;
        Ok(proposal)
    }
}

fn chat_propose(
    transport: &mut dyn ChatTransport,
    model: &str,
    temperature: f64,
    max_retries: usize,
    messages: &[Message],
) -> Result<Proposal, ProposerError> {
    let mut conversation = messages.to_vec();
    let mut retries = Vec::new();
    let mut last_error = ProposerError::ServiceUnavailable("no attempt made".into());
    for _ in 0..=max_retries {
        let request = ChatRequest {
            model: model.to_string(),
            temperature,
            messages: conversation.clone(),
        };
        let raw = match transport.complete(&request) {
            Ok(raw) => raw,
            Err(e) => {
                last_error = ProposerError::ServiceUnavailable(e.0);
                continue;
            }
        };
        let problem = match extract_fenced_block(&raw) {
            None => "the response contains no fenced code block".to_string(),
            Some(block) => match dsl::parse(block) {
                Ok(template) => return Ok(Proposal { template, raw, retries }),
                Err(e) => e.to_string(),
            },
        };
        last_error = ProposerError::UnparseableResponse(problem.clone());
        let note = Message::user(format!(
            "Your answer could not be used: {problem}. Reply with exactly one fenced code block \
             containing a complete plan template."
        ));
        for m in [Message::assistant(raw), note] {
            conversation.push(m.clone());
            retries.push(m);
        }
    }
    Err(last_error)
}
