//! Pipeline configuration (TOML). Command-line flags override file values,
//! which override the defaults below.
//!
//! ```toml
//! mode = "complex"
//!
//! [reasoner]
//! beta = 1.0
//! theta_tol_deg = 30.0
//!
//! [selection]
//! k1 = 20
//! k2 = 12
//! rounds = 2
//!
//! [reflection]
//! tau = 0.5
//! rounds = 1
//!
//! [providers]
//! refiner = "https://captions.example/v1/refine"
//! token_env = "SCENELANG_API_TOKEN"
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::caption::DEFAULT_TOP_N;
use crate::error::{Error, Result};
use crate::io;
use crate::projection::DEFAULT_MAX_VIEWS;
use crate::provider::{ServiceConfig, DEFAULT_TOKEN_ENV};
use crate::reasoner::ReasonerConfig;
use crate::reflection::{DEFAULT_TAU, MAX_ROUNDS};
use crate::scene_info::ExpressionMode;
use crate::selection::{DEFAULT_K1, DEFAULT_K2};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionConfig {
    pub k1: usize,
    pub k2: usize,
    /// 0 = no filtering, 1 = question only, 2 = question then image.
    pub rounds: u8,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            k1: DEFAULT_K1,
            k2: DEFAULT_K2,
            rounds: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReflectionConfig {
    pub tau: f64,
    pub rounds: u32,
}

impl Default for ReflectionConfig {
    fn default() -> Self {
        Self {
            tau: DEFAULT_TAU,
            rounds: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CaptionConfig {
    pub top_n: usize,
    pub max_views: usize,
}

impl Default for CaptionConfig {
    fn default() -> Self {
        Self {
            top_n: DEFAULT_TOP_N,
            max_views: DEFAULT_MAX_VIEWS,
        }
    }
}

/// Service endpoints. Any endpoint left unset runs offline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProvidersConfig {
    pub refiner: Option<String>,
    pub embedding: Option<String>,
    pub judge: Option<String>,
    pub corrector: Option<String>,
    pub token_env: String,
    pub timeout_ms: u64,
    pub attempts: u32,
    pub backoff_ms: u64,
    pub max_in_flight: usize,
}

impl Default for ProvidersConfig {
    fn default() -> Self {
        let s = ServiceConfig::default();
        Self {
            refiner: None,
            embedding: None,
            judge: None,
            corrector: None,
            token_env: DEFAULT_TOKEN_ENV.to_string(),
            timeout_ms: s.timeout_ms,
            attempts: s.attempts,
            backoff_ms: s.backoff_ms,
            max_in_flight: 4,
        }
    }
}

impl ProvidersConfig {
    pub fn service(&self, endpoint: &str) -> ServiceConfig {
        ServiceConfig {
            endpoint: endpoint.to_string(),
            token_env: Some(self.token_env.clone()),
            timeout_ms: self.timeout_ms,
            attempts: self.attempts,
            backoff_ms: self.backoff_ms,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub mode: ExpressionMode,
    pub reasoner: ReasonerConfig,
    pub selection: SelectionConfig,
    pub reflection: ReflectionConfig,
    pub captions: CaptionConfig,
    pub providers: ProvidersConfig,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.reasoner.validate()?;
        let s = &self.selection;
        if s.rounds > 2 {
            return Err(Error::Config(format!(
                "selection rounds must be 0, 1 or 2, got {}",
                s.rounds
            )));
        }
        if s.k1 == 0 || s.k2 == 0 {
            return Err(Error::Config("selection k1 and k2 must be at least 1".into()));
        }
        if s.rounds == 2 && s.k2 > s.k1 {
            return Err(Error::Config(format!("selection k2 ({}) exceeds k1 ({})", s.k2, s.k1)));
        }
        let r = &self.reflection;
        if !(0.0..=1.0).contains(&r.tau) {
            return Err(Error::Config(format!(
                "reflection tau must lie in [0, 1], got {}",
                r.tau
            )));
        }
        if !(1..=MAX_ROUNDS).contains(&r.rounds) {
            return Err(Error::Config(format!("reflection rounds must be 1..={MAX_ROUNDS}")));
        }
        if self.captions.top_n == 0 || self.captions.max_views == 0 {
            return Err(Error::Config("captions top_n and max_views must be at least 1".into()));
        }
        if self.providers.max_in_flight == 0 || self.providers.attempts == 0 {
            return Err(Error::Config(
                "providers max_in_flight and attempts must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

pub fn parse_config(text: &str) -> Result<PipelineConfig> {
    let cfg: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

/// The file's configuration, or the defaults when `path` is `None`.
pub fn load_config(path: Option<&Path>) -> Result<PipelineConfig> {
    match path {
        Some(p) => parse_config(&io::read_to_string(p)?),
        None => Ok(PipelineConfig::default()),
    }
}
