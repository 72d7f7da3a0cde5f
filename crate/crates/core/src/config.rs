//! Pipeline configuration (TOML).
//!
//! Every field is explicit and hashed into the config hash stamped on each
//! manifest. `${VAR}` interpolation is honoured only in the remote backend's
//! `endpoint` and `api_key` fields.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::canonical::{sha256_hex, to_canonical_string};
use crate::error::{Error, Result};
use crate::registry::{default_topic_names, ChartRegistry, ChartTypeDef, BASIC_CHART_TYPES};

pub const DEFAULT_SCRIPTS_PER_TYPE: usize = 400;
pub const DEFAULT_DATA_PER_TYPE: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    #[default]
    Offline,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub chart_types: Vec<String>,
    /// Render scripts per chart type (N).
    pub scripts_per_type: usize,
    /// Data files per chart type (M).
    pub data_per_type: usize,
    pub topics: Vec<String>,
    pub custom_chart_types: Vec<ChartTypeDef>,
    pub backend: BackendConfig,
    pub generation: GenerationConfig,
    pub render: RenderConfig,
    pub filter: FilterConfig,
    pub assemble: AssembleConfig,
    pub bench: BenchConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 0,
            chart_types: ChartRegistry::with_defaults()
                .names()
                .map(str::to_string)
                .collect(),
            scripts_per_type: DEFAULT_SCRIPTS_PER_TYPE,
            data_per_type: DEFAULT_DATA_PER_TYPE,
            topics: default_topic_names(),
            custom_chart_types: Vec::new(),
            backend: BackendConfig::default(),
            generation: GenerationConfig::default(),
            render: RenderConfig::default(),
            filter: FilterConfig::default(),
            assemble: AssembleConfig::default(),
            bench: BenchConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendConfig {
    pub kind: BackendKind,
    pub endpoint: String,
    pub api_key: String,
    pub model: String,
    pub temperature: f64,
    pub request_timeout_secs: u64,
    /// Transcript file; every remote exchange is appended here.
    pub replay_log: Option<PathBuf>,
    /// Serve remote requests from `replay_log` only, never the network.
    pub replay_only: bool,
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig {
            kind: BackendKind::Offline,
            endpoint: "${CHARTFORGE_ENDPOINT}".into(),
            api_key: "${CHARTFORGE_API_KEY}".into(),
            model: "gpt-4".into(),
            temperature: 0.7,
            request_timeout_secs: 120,
            replay_log: None,
            replay_only: false,
        }
    }
}

impl BackendConfig {
    pub fn resolved_endpoint(&self) -> Result<String> {
        interpolate_env(&self.endpoint)
    }

    pub fn resolved_api_key(&self) -> Result<String> {
        interpolate_env(&self.api_key)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct PromptPaths {
    pub template: Option<PathBuf>,
    pub data: Option<PathBuf>,
    pub code: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationConfig {
    /// Re-prompts allowed per candidate after the first attempt.
    pub max_retries: u32,
    /// Minimum fraction of M that must survive validation.
    pub data_floor: f64,
    /// Fraction of scripts drawn without numeric value labels.
    pub unannotated_fraction: f64,
    /// Plotting library requested from the code expert.
    pub plotting_library: String,
    pub prompts: PromptPaths,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            max_retries: 3,
            data_floor: 0.8,
            unannotated_fraction: 0.5,
            plotting_library: "matplotlib".into(),
            prompts: PromptPaths::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderConfig {
    /// Shim command prefix; empty means the bundled `chartforge-shim` next
    /// to the running executable.
    pub shim: Vec<String>,
    pub timeout_secs: f64,
    pub max_output_bytes: u64,
    pub stderr_limit: usize,
    pub min_ok_fraction: f64,
    pub env_allowlist: Vec<String>,
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig {
            shim: Vec::new(),
            timeout_secs: 30.0,
            max_output_bytes: 20 * 1024 * 1024,
            stderr_limit: 4096,
            min_ok_fraction: 0.7,
            env_allowlist: [
                "PATH",
                "LANG",
                "LC_ALL",
                "PYTHONPATH",
                "MPLCONFIGDIR",
                "SYSTEMROOT",
            ]
            .into_iter()
            .map(String::from)
            .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "engine", deny_unknown_fields)]
pub enum OcrConfig {
    /// Reads the `<image>.txt` sidecar written by bank scripts.
    Sidecar,
    /// Runs `command... <image>` and treats each stdout line as one string.
    Command { command: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    pub ocr_threshold: f64,
    pub ocr: OcrConfig,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            ocr_threshold: 0.6,
            ocr: OcrConfig::Sidecar,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlendWeights {
    pub general: f64,
    pub data_driven: f64,
    pub json_only: f64,
}

impl Default for BlendWeights {
    fn default() -> Self {
        BlendWeights {
            general: 2.0,
            data_driven: 1.0,
            json_only: 1.0,
        }
    }
}

pub const DEFAULT_EXTRACTION_INSTRUCTION: &str =
    "Extract the underlying data of this chart and output it as a JSON object that follows the chart's data template.";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AssembleConfig {
    pub weights: BlendWeights,
    pub extraction_instruction: String,
}

impl Default for AssembleConfig {
    fn default() -> Self {
        AssembleConfig {
            weights: BlendWeights::default(),
            extraction_instruction: DEFAULT_EXTRACTION_INSTRUCTION.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    /// Maximum images per chart type.
    pub quota_per_type: usize,
    /// Renderings kept per payload (style-variation group size).
    pub styles_per_group: usize,
    pub relaxed_tolerance: f64,
    pub basic_types: Vec<String>,
    /// Review decisions file; without one every leveled QA is admitted.
    pub decisions: Option<PathBuf>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            quota_per_type: 275,
            styles_per_group: 2,
            relaxed_tolerance: 0.05,
            basic_types: BASIC_CHART_TYPES.iter().map(|s| s.to_string()).collect(),
            decisions: None,
        }
    }
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config is serializable")
    }

    pub fn registry(&self) -> Result<ChartRegistry> {
        let mut reg = ChartRegistry::with_defaults();
        for def in &self.custom_chart_types {
            reg.register(def.clone())?;
        }
        Ok(reg)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.scripts_per_type < 1 {
            return fail("scripts_per_type (N) must be at least 1".into());
        }
        if self.data_per_type < 1 {
            return fail("data_per_type (M) must be at least 1".into());
        }
        if self.chart_types.is_empty() {
            return fail("chart_types is empty".into());
        }
        if self.topics.is_empty() {
            return fail("topics is empty".into());
        }
        let reg = self.registry()?;
        let mut seen = std::collections::HashSet::new();
        for t in &self.chart_types {
            reg.get(t)?;
            if !seen.insert(t) {
                return fail(format!("chart type `{t}` listed twice"));
            }
        }
        for (name, f) in [
            ("generation.data_floor", self.generation.data_floor),
            (
                "generation.unannotated_fraction",
                self.generation.unannotated_fraction,
            ),
            ("render.min_ok_fraction", self.render.min_ok_fraction),
        ] {
            if !(0.0..=1.0).contains(&f) {
                return fail(format!("{name} must lie in [0, 1], got {f}"));
            }
        }
        if self.filter.ocr_threshold < 0.0 || self.bench.relaxed_tolerance < 0.0 {
            return fail("thresholds must be non-negative".into());
        }
        if self.render.timeout_secs <= 0.0 {
            return fail("render.timeout_secs must be positive".into());
        }
        let w = self.assemble.weights;
        if [w.general, w.data_driven, w.json_only]
            .iter()
            .any(|x| *x < 0.0 || !x.is_finite())
        {
            return fail("blend weights must be finite and non-negative".into());
        }
        if self.bench.quota_per_type < 1 {
            return Err(Error::ZeroQuota);
        }
        if self.bench.styles_per_group < 1 {
            return fail("bench.styles_per_group must be at least 1".into());
        }
        Ok(())
    }

    /// Stable hash over every setting that influences stage outputs.
    /// Machine-local settings (shim location, credentials) are excluded.
    pub fn config_hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config is serializable");
        if let Some(obj) = v.as_object_mut() {
            if let Some(Value::Object(backend)) = obj.get_mut("backend") {
                backend.remove("api_key");
                backend.remove("endpoint");
                backend.remove("replay_log");
            }
            if let Some(Value::Object(render)) = obj.get_mut("render") {
                render.remove("shim");
                render.remove("env_allowlist");
            }
        }
        let mut full = sha256_hex(&["chartforge-config", &to_canonical_string(&v)]);
        full.truncate(16);
        full
    }
}

/// Expands `${VAR}` references from the environment.
pub fn interpolate_env(text: &str) -> Result<String> {
    let mut out = String::new();
    let mut rest = text;
    while let Some(start) = rest.find("${") {
        out.push_str(&rest[..start]);
        let after = &rest[start + 2..];
        let end = after
            .find('}')
            .ok_or_else(|| Error::Config(format!("unterminated `${{` in `{text}`")))?;
        let var = &after[..end];
        let value = std::env::var(var)
            .map_err(|_| Error::Config(format!("environment variable `{var}` is not set")))?;
        out.push_str(&value);
        rest = &after[end + 1..];
    }
    out.push_str(rest);
    Ok(out)
}
