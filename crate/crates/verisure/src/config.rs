//! Global configuration: defaults, then environment, then a JSON file.

use std::path::Path;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimBackendKind {
    External,
    /// Replays `fixtures/sim` under each problem directory.
    Scripted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LlmBackendKind {
    Http,
    /// Replays `fixtures/llm` under each problem directory.
    Scripted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProverKind {
    Sby,
    Exhaustive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormalConfig {
    pub enabled: bool,
    pub prover: ProverKind,
    pub timeout_s: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub backend: SimBackendKind,
    pub timeout_s: u64,
    /// Extra mismatch regexes; group 1 is the failure time.
    pub mismatch_patterns: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmConfig {
    pub backend: LlmBackendKind,
    pub base_url: Option<String>,
    pub model: Option<String>,
    /// Never serialized back out.
    #[serde(skip_serializing)]
    pub api_key: Option<String>,
    pub temperature: f64,
    pub max_tokens: u32,
    /// Extra attempts per turn after a malformed response.
    pub retries: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalConfig {
    pub d_max: usize,
    #[serde(rename = "window_K")]
    pub window_k: u64,
    pub max_iterations: u32,
    pub formal: FormalConfig,
    pub sim: SimConfig,
    pub llm: LlmConfig,
    pub jobs: usize,
}

impl Default for GlobalConfig {
    fn default() -> Self {
        GlobalConfig {
            d_max: 3,
            window_k: 8,
            max_iterations: 10,
            formal: FormalConfig {
                enabled: true,
                prover: ProverKind::Sby,
                timeout_s: 120,
            },
            sim: SimConfig {
                backend: SimBackendKind::External,
                timeout_s: 60,
                mismatch_patterns: Vec::new(),
            },
            llm: LlmConfig {
                backend: LlmBackendKind::Http,
                base_url: None,
                model: None,
                api_key: None,
                temperature: 0.0,
                max_tokens: 4096,
                retries: 2,
            },
            jobs: 1,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {message}")]
    Read { path: String, message: String },
    #[error("config {path}: {message}")]
    Invalid { path: String, message: String },
}

// File layer: every key optional, unknown keys rejected.

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FormalFile {
    enabled: Option<bool>,
    prover: Option<ProverKind>,
    timeout_s: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimFile {
    backend: Option<SimBackendKind>,
    timeout_s: Option<u64>,
    mismatch_patterns: Option<Vec<String>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct LlmFile {
    backend: Option<LlmBackendKind>,
    base_url: Option<String>,
    model: Option<String>,
    api_key: Option<String>,
    temperature: Option<f64>,
    max_tokens: Option<u32>,
    retries: Option<u32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    d_max: Option<usize>,
    #[serde(rename = "window_K")]
    window_k: Option<u64>,
    max_iterations: Option<u32>,
    formal: Option<FormalFile>,
    sim: Option<SimFile>,
    llm: Option<LlmFile>,
    jobs: Option<usize>,
}

impl GlobalConfig {
    /// Defaults overlaid with `VERISURE_LLM_*` variables.
    pub fn from_env() -> Self {
        let mut c = GlobalConfig::default();
        let var = |k: &str| std::env::var(k).ok().filter(|v| !v.is_empty());
        c.llm.base_url = var("VERISURE_LLM_BASE_URL");
        c.llm.model = var("VERISURE_LLM_MODEL");
        c.llm.api_key = var("VERISURE_LLM_API_KEY");
        c
    }

    /// Environment layer plus the file at `path`, if any.
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let mut c = GlobalConfig::from_env();
        if let Some(p) = path {
            let text = std::fs::read_to_string(p).map_err(|e| ConfigError::Read {
                path: p.display().to_string(),
                message: e.to_string(),
            })?;
            c.apply_json(&text).map_err(|message| ConfigError::Invalid {
                path: p.display().to_string(),
                message,
            })?;
        }
        Ok(c)
    }

    /// Overlay a JSON document. Unknown keys and non-positive numbers are
    /// rejected.
    pub fn apply_json(&mut self, text: &str) -> Result<(), String> {
        let f: ConfigFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
        macro_rules! set {
            ($dst:expr, $src:expr) => {
                if let Some(v) = $src {
                    $dst = v;
                }
            };
        }
        set!(self.d_max, f.d_max);
        set!(self.window_k, f.window_k);
        set!(self.max_iterations, f.max_iterations);
        set!(self.jobs, f.jobs);
        if let Some(x) = f.formal {
            set!(self.formal.enabled, x.enabled);
            set!(self.formal.prover, x.prover);
            set!(self.formal.timeout_s, x.timeout_s);
        }
        if let Some(x) = f.sim {
            set!(self.sim.backend, x.backend);
            set!(self.sim.timeout_s, x.timeout_s);
            set!(self.sim.mismatch_patterns, x.mismatch_patterns);
        }
        if let Some(x) = f.llm {
            set!(self.llm.backend, x.backend);
            set!(self.llm.temperature, x.temperature);
            set!(self.llm.max_tokens, x.max_tokens);
            set!(self.llm.retries, x.retries);
            if x.base_url.is_some() {
                self.llm.base_url = x.base_url;
            }
            if x.model.is_some() {
                self.llm.model = x.model;
            }
            if x.api_key.is_some() {
                self.llm.api_key = x.api_key;
            }
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<(), String> {
        let checks = [
            ("d_max", self.d_max as u64),
            ("window_K", self.window_k),
            ("max_iterations", self.max_iterations as u64),
            ("jobs", self.jobs as u64),
            ("formal.timeout_s", self.formal.timeout_s),
            ("sim.timeout_s", self.sim.timeout_s),
            ("llm.max_tokens", self.llm.max_tokens as u64),
        ];
        for (k, v) in checks {
            if v == 0 {
                return Err(format!("`{k}` must be positive"));
            }
        }
        if !(self.llm.temperature >= 0.0) {
            return Err("`llm.temperature` must be non-negative".into());
        }
        for p in &self.sim.mismatch_patterns {
            regex::Regex::new(p).map_err(|e| format!("`sim.mismatch_patterns`: {e}"))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = GlobalConfig::default();
        assert_eq!((c.d_max, c.window_k, c.max_iterations, c.jobs), (3, 8, 10, 1));
        assert!(c.formal.enabled);
        assert_eq!(c.sim.backend, SimBackendKind::External);
    }

    #[test]
    fn overlay_and_rejections() {
        let mut c = GlobalConfig::default();
        c.apply_json(r#"{"d_max": 5, "formal": {"enabled": false}, "llm": {"model": "m"}}"#).unwrap();
        assert_eq!(c.d_max, 5);
        assert!(!c.formal.enabled);
        assert_eq!(c.llm.model.as_deref(), Some("m"));
        let e = GlobalConfig::default().apply_json(r#"{"depth": 2}"#).unwrap_err();
        assert!(e.contains("unknown field `depth`"), "{e}");
        let e = GlobalConfig::default().apply_json(r#"{"sim": {"bakend": "x"}}"#).unwrap_err();
        assert!(e.contains("bakend"));
        assert!(GlobalConfig::default().apply_json(r#"{"max_iterations": 0}"#).is_err());
    }

    #[test]
    fn api_key_not_serialized() {
        let mut c = GlobalConfig::default();
        c.llm.api_key = Some("secret".into());
        assert!(!serde_json::to_string(&c).unwrap().contains("secret"));
    }
}
