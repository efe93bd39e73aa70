use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{ingest_samples, Rejection, SampleBatch, SampleError, SourceTag};
use crate::template::MdpTemplate;

/// Environment variable holding the bearer token for the endpoint.
pub const API_KEY_ENV: &str = "PROCFORGE_API_KEY";

const MAX_BACKOFF_MS: u64 = 30_000;

/// Remote text-generation endpoint.
///
/// `request_template` is the JSON body to POST; every string inside it has
/// `{{prompt}}` and `{{model}}` substituted. `response_path` is a JSON
/// pointer to the generated text in the response body.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndpointConfig {
    pub base_url: String,
    pub model: String,
    #[serde(default = "default_request_template")]
    pub request_template: serde_json::Value,
    #[serde(default = "default_response_path")]
    pub response_path: String,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default = "default_retries")]
    pub retries: u32,
    #[serde(default = "default_backoff")]
    pub backoff_ms: u64,
    /// Number of independent generation requests whose samples are pooled.
    #[serde(default = "one")]
    pub requests: usize,
    #[serde(default = "one")]
    pub parallelism: usize,
}

fn default_request_template() -> serde_json::Value {
    serde_json::json!({
        "model": "{{model}}",
        "messages": [{"role": "user", "content": "{{prompt}}"}]
    })
}
fn default_response_path() -> String {
    "/choices/0/message/content".into()
}
fn default_timeout() -> u64 {
    120
}
fn default_retries() -> u32 {
    3
}
fn default_backoff() -> u64 {
    500
}
fn one() -> usize {
    1
}

impl EndpointConfig {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into(),
            model: model.into(),
            request_template: default_request_template(),
            response_path: default_response_path(),
            timeout_secs: default_timeout(),
            retries: default_retries(),
            backoff_ms: default_backoff(),
            requests: 1,
            parallelism: 1,
        }
    }

    fn check(&self) -> Result<(), SampleError> {
        if self.requests == 0 || self.parallelism == 0 {
            return Err(SampleError::Config("requests and parallelism must be at least 1".into()));
        }
        if !self.response_path.is_empty() && !self.response_path.starts_with('/') {
            return Err(SampleError::Config(format!(
                "response_path `{}` is not a JSON pointer",
                self.response_path
            )));
        }
        Ok(())
    }

    fn body(&self, prompt: &str) -> serde_json::Value {
        substitute(&self.request_template, prompt, &self.model)
    }
}

fn substitute(v: &serde_json::Value, prompt: &str, model: &str) -> serde_json::Value {
    use serde_json::Value;
    match v {
        Value::String(s) => Value::String(s.replace("{{prompt}}", prompt).replace("{{model}}", model)),
        Value::Array(a) => Value::Array(a.iter().map(|x| substitute(x, prompt, model)).collect()),
        Value::Object(o) => Value::Object(
            o.iter()
                .map(|(k, x)| (k.clone(), substitute(x, prompt, model)))
                .collect(),
        ),
        other => other.clone(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FetchOutcome {
    pub batch: SampleBatch,
    /// Rejections per request, line numbers relative to that response.
    pub rejections: Vec<(usize, Rejection)>,
    /// Raw generated text per request, kept for audit.
    pub raw: Vec<String>,
}

/// Ask the endpoint for samples and validate them like [`ingest_samples`].
///
/// Requests run in waves of `parallelism`; results are concatenated in
/// request order regardless of completion order.
pub fn fetch_samples(
    cfg: &EndpointConfig,
    prompt: &str,
    tpl: &MdpTemplate,
    strict: bool,
) -> Result<FetchOutcome, SampleError> {
    cfg.check()?;
    let client = reqwest::blocking::Client::builder()
        .timeout(Duration::from_secs(cfg.timeout_secs))
        .build()
        .map_err(|e| SampleError::Config(e.to_string()))?;
    let api_key = std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty());
    let body = serde_json::to_vec(&cfg.body(prompt)).expect("request body serializes");

    let mut texts: Vec<String> = Vec::with_capacity(cfg.requests);
    let ids: Vec<usize> = (0..cfg.requests).collect();
    for wave in ids.chunks(cfg.parallelism) {
        let results: Vec<Result<String, SampleError>> = std::thread::scope(|scope| {
            let handles: Vec<_> = wave
                .iter()
                .map(|_| scope.spawn(|| request_text(&client, cfg, api_key.as_deref(), &body)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("request thread panicked"))
                .collect()
        });
        for r in results {
            texts.push(r?);
        }
    }

    let mut batch = SampleBatch::empty(tpl, SourceTag::Endpoint);
    let mut rejections = Vec::new();
    for (i, text) in texts.iter().enumerate() {
        let cleaned = strip_fences(text);
        let out = ingest_samples(cleaned.as_bytes(), tpl, SourceTag::Endpoint, strict)?;
        let nonblank = cleaned.lines().filter(|l| !l.trim().is_empty()).count();
        if out.batch.is_empty() && nonblank > 0 {
            return Err(SampleError::Unparseable {
                detail: format!("response {i} contained no valid sample lines"),
                raw: text.clone(),
            });
        }
        batch.samples.extend(out.batch.samples);
        rejections.extend(out.rejections.into_iter().map(|r| (i, r)));
    }
    Ok(FetchOutcome {
        batch,
        rejections,
        raw: texts,
    })
}

/// Drop markdown code-fence lines some generators wrap around JSONL.
fn strip_fences(text: &str) -> String {
    text.lines()
        .map(|l| if l.trim_start().starts_with("```") { "" } else { l })
        .collect::<Vec<_>>()
        .join("\n")
}

fn request_text(
    client: &reqwest::blocking::Client,
    cfg: &EndpointConfig,
    api_key: Option<&str>,
    body: &[u8],
) -> Result<String, SampleError> {
    let attempts = cfg.retries + 1;
    let mut last = String::new();
    for attempt in 0..attempts {
        if attempt > 0 {
            let wait = cfg
                .backoff_ms
                .saturating_mul(1u64 << (attempt - 1).min(16))
                .min(MAX_BACKOFF_MS);
            std::thread::sleep(Duration::from_millis(wait));
        }
        let mut req = client
            .post(&cfg.base_url)
            .header(reqwest::header::CONTENT_TYPE, "application/json")
            .body(body.to_vec());
        if let Some(key) = api_key {
            req = req.bearer_auth(key);
        }
        let resp = match req.send() {
            Ok(r) => r,
            Err(e) => {
                log::warn!("endpoint attempt {} failed: {e}", attempt + 1);
                last = e.to_string();
                continue;
            }
        };
        let status = resp.status().as_u16();
        let text = match resp.text() {
            Ok(t) => t,
            Err(e) => {
                last = e.to_string();
                continue;
            }
        };
        match status {
            200..=299 => return extract_text(&text, &cfg.response_path),
            401 | 403 => return Err(SampleError::Auth { status }),
            429 | 500..=599 => {
                log::warn!("endpoint attempt {} returned HTTP {status}", attempt + 1);
                last = format!("HTTP {status}");
            }
            _ => return Err(SampleError::Http { status, body: text }),
        }
    }
    Err(SampleError::Transport {
        attempts,
        detail: last,
    })
}

fn extract_text(body: &str, pointer: &str) -> Result<String, SampleError> {
    if pointer.is_empty() {
        return Ok(body.to_string());
    }
    let unparseable = |detail: String| SampleError::Unparseable {
        detail,
        raw: body.to_string(),
    };
    let v: serde_json::Value =
        serde_json::from_str(body).map_err(|e| unparseable(format!("response is not JSON: {e}")))?;
    match v.pointer(pointer) {
        Some(serde_json::Value::String(s)) => Ok(s.clone()),
        Some(_) => Err(unparseable(format!("`{pointer}` is not a string"))),
        None => Err(unparseable(format!("`{pointer}` not found in response"))),
    }
}
