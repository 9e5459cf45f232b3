//! HTTP-backed providers and bounded fan-out.
//!
//! All services speak small JSON request/response bodies over `POST`:
//!
//! | service    | request                          | response                 |
//! |------------|----------------------------------|--------------------------|
//! | refine     | `{prompt, candidates}`           | `{caption}`              |
//! | embedding  | `{input}`                        | `{embedding}`            |
//! | judge      | `{kind, text, context}`          | `{score}` or `{index}`   |
//! | corrector  | `{text, context}`                | `{text}`                 |
//!
//! The bearer token, when configured, is read from the environment variable
//! named by [`ServiceConfig::token_env`]; it never lives in config files.

use std::collections::BTreeSet;
use std::thread;
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::caption::Refiner;
use crate::embed::Embedder;
use crate::error::ProviderError;
use crate::reasoner::RelationTag;
use crate::reflection::{CaptionQuery, Correction, Corrector, Judge, RelationQuery};

pub const DEFAULT_TOKEN_ENV: &str = "SCENELANG_API_TOKEN";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub endpoint: String,
    pub token_env: Option<String>,
    pub timeout_ms: u64,
    /// Total attempts per request, including the first.
    pub attempts: u32,
    pub backoff_ms: u64,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            endpoint: String::new(),
            token_env: Some(DEFAULT_TOKEN_ENV.to_string()),
            timeout_ms: 30_000,
            attempts: 3,
            backoff_ms: 250,
        }
    }
}

impl ServiceConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            ..Default::default()
        }
    }
}

pub struct HttpService {
    cfg: ServiceConfig,
    agent: ureq::Agent,
    token: Option<String>,
}

impl HttpService {
    pub fn new(cfg: ServiceConfig) -> Self {
        let agent = ureq::AgentBuilder::new()
            .timeout(Duration::from_millis(cfg.timeout_ms))
            .build();
        let token = cfg
            .token_env
            .as_deref()
            .and_then(|var| std::env::var(var).ok())
            .filter(|t| !t.is_empty());
        Self { cfg, agent, token }
    }

    pub fn endpoint(&self) -> &str {
        &self.cfg.endpoint
    }

    fn post_once(&self, body: &Value) -> Result<Value, (ProviderError, bool)> {
        let mut req = self
            .agent
            .post(&self.cfg.endpoint)
            .set("Content-Type", "application/json");
        if let Some(tok) = &self.token {
            req = req.set("Authorization", &format!("Bearer {tok}"));
        }
        match req.send_json(body) {
            Ok(resp) => resp
                .into_json::<Value>()
                .map_err(|e| (ProviderError::Malformed(format!("response is not JSON: {e}")), false)),
            Err(ureq::Error::Status(status, resp)) => {
                let body = resp.into_string().unwrap_or_default();
                let retry = status >= 500 || status == 429;
                (Err((ProviderError::Status { status, body }, retry)))?
            }
            Err(ureq::Error::Transport(t)) => {
                let msg = t.to_string();
                if msg.contains("timed out") || msg.contains("timeout") {
                    Err((ProviderError::Timeout(self.cfg.timeout_ms), true))
                } else {
                    Err((ProviderError::Transport(msg), true))
                }
            }
        }
    }

    /// POST `body`, retrying transport failures, timeouts and 5xx/429
    /// responses with exponential backoff.
    pub fn post_json(&self, body: &Value) -> Result<Value, ProviderError> {
        let attempts = self.cfg.attempts.max(1);
        let mut delay = self.cfg.backoff_ms;
        let mut last = ProviderError::Transport("no attempt made".into());
        for attempt in 0..attempts {
            match self.post_once(body) {
                Ok(v) => return Ok(v),
                Err((e, retry)) => {
                    last = e;
                    if !retry || attempt + 1 == attempts {
                        break;
                    }
                    thread::sleep(Duration::from_millis(delay));
                    delay = delay.saturating_mul(2);
                }
            }
        }
        Err(last)
    }
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value, ProviderError> {
    v.get(key)
        .ok_or_else(|| ProviderError::Malformed(format!("missing field `{key}`")))
}

fn non_empty_string(v: &Value, key: &str) -> Result<String, ProviderError> {
    let s = field(v, key)?
        .as_str()
        .ok_or_else(|| ProviderError::Malformed(format!("`{key}` is not a string")))?
        .trim();
    if s.is_empty() {
        return Err(ProviderError::Malformed(format!("`{key}` is empty")));
    }
    Ok(s.to_string())
}

fn unit_score(v: &Value) -> Result<f64, ProviderError> {
    let s = field(v, "score")?
        .as_f64()
        .ok_or_else(|| ProviderError::Malformed("`score` is not a number".into()))?;
    if !(0.0..=1.0).contains(&s) {
        return Err(ProviderError::Malformed(format!("score {s} outside [0, 1]")));
    }
    Ok(s)
}

fn float_row(v: &Value) -> Result<Vec<f64>, ProviderError> {
    v.as_array()
        .ok_or_else(|| ProviderError::Malformed("embedding row is not an array".into()))?
        .iter()
        .map(|x| {
            x.as_f64()
                .filter(|f| f.is_finite())
                .ok_or_else(|| ProviderError::Malformed("embedding entry is not a finite number".into()))
        })
        .collect()
}

pub struct HttpRefiner(pub HttpService);

impl Refiner for HttpRefiner {
    fn refine(&self, object_label: &str, candidates: &[String]) -> Result<String, ProviderError> {
        let prompt = format!(
            "Merge the candidate descriptions of one {object_label} into a single accurate sentence. \
             Keep attributes that several candidates agree on and drop contradictions."
        );
        let v = self
            .0
            .post_json(&json!({ "prompt": prompt, "candidates": candidates }))?;
        non_empty_string(&v, "caption")
    }
}

pub struct HttpEmbedder(pub HttpService);

impl Embedder for HttpEmbedder {
    /// Accepts either a single vector (one row) or a matrix.
    fn embed_tokens(&self, text: &str) -> Result<Vec<Vec<f64>>, ProviderError> {
        let v = self.0.post_json(&json!({ "input": text }))?;
        let emb = field(&v, "embedding")?;
        let arr = emb
            .as_array()
            .ok_or_else(|| ProviderError::Malformed("`embedding` is not an array".into()))?;
        let rows = if arr.first().map(Value::is_array).unwrap_or(false) {
            arr.iter().map(float_row).collect::<Result<Vec<_>, _>>()?
        } else {
            vec![float_row(emb)?]
        };
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(ProviderError::Malformed("embedding rows are empty or ragged".into()));
        }
        Ok(rows)
    }
}

pub struct HttpJudge(pub HttpService);

impl Judge for HttpJudge {
    fn pick_object(&self, q: &CaptionQuery) -> Result<Option<usize>, ProviderError> {
        let v = self
            .0
            .post_json(&json!({ "kind": "caption_choice", "text": q.text, "context": q }))?;
        match field(&v, "index")? {
            Value::Null => Ok(None),
            idx => idx
                .as_u64()
                .map(|i| Some(i as usize))
                .ok_or_else(|| ProviderError::Malformed("`index` is not a non-negative integer".into())),
        }
    }

    fn score_caption(&self, q: &CaptionQuery) -> Result<f64, ProviderError> {
        let v = self
            .0
            .post_json(&json!({ "kind": "caption", "text": q.text, "context": q }))?;
        unit_score(&v)
    }

    fn score_relation(&self, q: &RelationQuery) -> Result<f64, ProviderError> {
        let v = self
            .0
            .post_json(&json!({ "kind": "relation", "text": q.text, "context": q }))?;
        unit_score(&v)
    }
}

pub struct HttpCorrector(pub HttpService);

impl Corrector for HttpCorrector {
    fn correct_caption(&self, q: &CaptionQuery) -> Result<String, ProviderError> {
        let v = self.0.post_json(&json!({ "text": q.text, "context": q }))?;
        non_empty_string(&v, "text")
    }

    /// The service returns prose only, so relation tags are left unchanged.
    fn correct_relation(&self, q: &RelationQuery) -> Result<Correction, ProviderError> {
        let v = self.0.post_json(&json!({ "text": q.text, "context": q }))?;
        Ok(Correction {
            text: non_empty_string(&v, "text")?,
            tags: None::<BTreeSet<RelationTag>>,
        })
    }
}

/// Map `f` over `items` with at most `cap` calls in flight, preserving order.
pub fn run_bounded<T, R, F>(items: &[T], cap: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    let cap = cap.max(1);
    if cap == 1 || items.len() <= 1 {
        return items.iter().map(f).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(cap).build() {
        Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
        Err(_) => items.iter().map(f).collect(),
    }
}
