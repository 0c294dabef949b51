//! TOML run configuration for `summarize`.
//!
//! ```toml
//! corpus = "corpus.jsonl"
//! graph = "graph.dot"        # optional; derived from record callees otherwise
//! output_dir = "out"
//! seed = 0
//!
//! [knowledge]
//! api_set = "apis.txt"
//! api_docs = "api_docs.json"
//! retrieval = "kb.json"
//!
//! [backend]
//! kind = "mock"              # or "http"
//! budget_words = 40
//!
//! [metrics]
//! p_semantic = 0.2
//! ```
//!
//! Relative paths are resolved against the config file's directory.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use pseudosum_core::summarize::DEFAULT_BUDGET;
use pseudosum_core::MetricParams;
use serde::{Deserialize, Serialize};

use crate::{usage, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    #[default]
    Mock,
    Http,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendConfig {
    pub kind: BackendKind,
    pub url: Option<String>,
    pub model: Option<String>,
    /// Environment variable holding the bearer token.
    pub key_env: Option<String>,
    pub budget_words: usize,
    pub retries: usize,
    pub timeout_secs: u64,
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig {
            kind: BackendKind::Mock,
            url: None,
            model: None,
            key_env: None,
            budget_words: DEFAULT_BUDGET,
            retries: 2,
            timeout_secs: 120,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KnowledgeConfig {
    pub api_set: Option<PathBuf>,
    pub api_docs: Option<PathBuf>,
    pub retrieval: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub corpus: PathBuf,
    #[serde(default)]
    pub graph: Option<PathBuf>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub knowledge: KnowledgeConfig,
    #[serde(default)]
    pub backend: BackendConfig,
    #[serde(default)]
    pub metrics: MetricParams,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

pub(crate) fn read_input(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display())).map_err(usage)
}

impl RunConfig {
    pub fn parse(text: &str, base: &Path) -> anyhow::Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text)?;
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut cfg.corpus);
        resolve(&mut cfg.output_dir);
        for p in [&mut cfg.graph, &mut cfg.knowledge.api_set, &mut cfg.knowledge.api_docs, &mut cfg.knowledge.retrieval]
            .into_iter()
            .flatten()
        {
            resolve(p);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = read_input(path)?;
        let base = std::path::absolute(path.parent().unwrap_or(Path::new(""))).map_err(usage)?;
        Self::parse(&text, &base).with_context(|| format!("invalid config {}", path.display())).map_err(usage)
    }

    /// Checks that inputs exist and the backend section is complete.
    pub fn validate(&self) -> anyhow::Result<()> {
        let inputs = [Some(&self.corpus), self.graph.as_ref(), self.knowledge.api_set.as_ref()]
            .into_iter()
            .chain([self.knowledge.api_docs.as_ref(), self.knowledge.retrieval.as_ref()])
            .flatten();
        for p in inputs {
            if !p.is_file() {
                bail!("input file {} does not exist", p.display());
            }
        }
        if self.backend.budget_words == 0 {
            bail!("backend.budget_words must be at least 1");
        }
        if self.backend.kind == BackendKind::Http {
            if self.backend.url.is_none() || self.backend.model.is_none() {
                bail!("http backend needs both `url` and `model`");
            }
            if let Some(var) = &self.backend.key_env {
                std::env::var(var).map_err(|_| anyhow!("environment variable {var} is not set"))?;
            }
        }
        self.metrics.validate()?;
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config is always representable")
    }
}
