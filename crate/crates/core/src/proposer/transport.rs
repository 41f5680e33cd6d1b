use std::time::Duration;

use serde::Serialize;

use super::Message;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChatRequest {
    pub model: String,
    pub temperature: f64,
    pub messages: Vec<Message>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportError(pub String);

/// One chat-completion round trip.
pub trait ChatTransport {
    fn complete(&mut self, request: &ChatRequest) -> Result<String, TransportError>;
}

/// OpenAI-compatible `POST {base}/chat/completions` with a bearer token.
pub struct HttpTransport {
    agent: ureq::Agent,
    url: String,
    auth: String,
}

impl HttpTransport {
    pub fn new(base: &str, api_key: &str) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(180)))
            .build()
            .into();
        Self {
            agent,
            url: format!("{}/chat/completions", base.trim_end_matches('/')),
            auth: format!("Bearer {api_key}"),
        }
    }
}

impl ChatTransport for HttpTransport {
    fn complete(&mut self, request: &ChatRequest) -> Result<String, TransportError> {
        let mut response = self
            .agent
            .post(&self.url)
            .header("Authorization", &self.auth)
            .send_json(request)
            .map_err(|e| TransportError(e.to_string()))?;
        let body: serde_json::Value = response
            .body_mut()
            .read_json()
            .map_err(|e| TransportError(e.to_string()))?;
        body["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| TransportError("response has no choices[0].message.content".into()))
    }
}
