//! Run configuration: one JSON document plus `--set key=value` overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use tg_core::evaluation::ConflationMode;
use tg_core::synthetic::{RaterDesign, ScorerDesign, WorldConfig};
use tg_core::ScoreKind;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub paths: Paths,
    #[serde(default)]
    pub window: Option<Window>,
    #[serde(default)]
    pub sampling: Option<SamplingConfig>,
    #[serde(default)]
    pub agreement: AgreementConfig,
    #[serde(default)]
    pub conflation_mode: ConflationMode,
    #[serde(default = "default_media")]
    pub medium_categories: Vec<String>,
    #[serde(default)]
    pub evaluation: EvaluationConfig,
    #[serde(default)]
    pub simulate: SimulateConfig,
    #[serde(default)]
    pub compat: Compat,
    #[serde(default)]
    pub fixture: Option<FixtureConfig>,
}

fn default_media() -> Vec<String> {
    ["text", "image", "video", "other"].map(String::from).to_vec()
}

/// Input and output locations, relative to the config file's directory.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    pub corpus: Option<PathBuf>,
    pub volumes: Option<PathBuf>,
    pub annotations: Option<PathBuf>,
    /// Classifier name to `guid,score` CSV.
    #[serde(default)]
    pub scores: BTreeMap<String, PathBuf>,
    /// `guid,flag` CSV used to stratify the expert sample.
    pub expert_flags: Option<PathBuf>,
    /// Defaults to `<out_dir>/sample/A.jsonl`.
    pub study_set: Option<PathBuf>,
    /// Defaults to `<out_dir>/weigh/weights.csv`.
    pub weights: Option<PathBuf>,
    /// Defaults to `<out_dir>/aggregate/aggregated_labels.csv`.
    pub aggregated_labels: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Window {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingConfig {
    pub target_size_b: usize,
    pub target_size_f: usize,
    #[serde(default)]
    pub expert: Option<ExpertConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpertConfig {
    pub n_pos: usize,
    pub n_neg: usize,
    /// `"k"` stratifies on the prefilter flag; any other name reads
    /// `paths.expert_flags`.
    #[serde(default = "default_flag")]
    pub flag: String,
    /// Restrict the pool to tweets with exactly this many crowd raters.
    #[serde(default)]
    pub pool_crowd_raters: Option<usize>,
}

fn default_flag() -> String {
    "k".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgreementConfig {
    #[serde(default = "three")]
    pub n_target: usize,
    #[serde(default = "default_jitter")]
    pub jitter: f64,
}

impl Default for AgreementConfig {
    fn default() -> Self {
        AgreementConfig {
            n_target: 3,
            jitter: default_jitter(),
        }
    }
}

fn three() -> usize {
    3
}

fn default_jitter() -> f64 {
    0.03
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationConfig {
    /// Crowd references use only tweets with exactly this many crowd raters.
    #[serde(default = "default_crowd_raters")]
    pub crowd_raters: Option<u32>,
    #[serde(default)]
    pub score_kind: ScoreKind,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        EvaluationConfig {
            crowd_raters: default_crowd_raters(),
            score_kind: ScoreKind::default(),
        }
    }
}

fn default_crowd_raters() -> Option<u32> {
    Some(3)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    /// Class distribution; estimated from the crowd annotations when absent.
    #[serde(default)]
    pub p: Option<[f64; 3]>,
    #[serde(default = "default_sim_tweets")]
    pub n_tweets: usize,
    #[serde(default = "default_sim_raters")]
    pub n_raters: u32,
    #[serde(default = "default_jitter")]
    pub jitter: f64,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            p: None,
            n_tweets: default_sim_tweets(),
            n_raters: default_sim_raters(),
            jitter: default_jitter(),
        }
    }
}

fn default_sim_tweets() -> usize {
    10_000
}

fn default_sim_raters() -> u32 {
    3
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Compat {
    /// Normalize the corpus flag rate over days instead of over k.
    #[serde(default)]
    pub eq19_as_printed: bool,
    #[serde(default)]
    pub vote_then_conflate: bool,
    #[serde(default)]
    pub weighted_agreement: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureConfig {
    pub world: WorldConfig,
    pub crowd: RaterDesign,
    pub expert: RaterDesign,
    pub scorers: Vec<ScorerDesign>,
}

/// A parsed config with the document it came from.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub base_dir: PathBuf,
    /// The document after overrides, used for hashing.
    pub document: Value,
}

pub fn load(path: &Path, overrides: &[String]) -> CliResult<LoadedConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let invalid = |message: String| CliError::Config {
        path: path.to_path_buf(),
        message,
    };
    let mut document: Value = serde_json::from_str(&text).map_err(|e| invalid(e.to_string()))?;
    for o in overrides {
        apply_override(&mut document, o).map_err(invalid)?;
    }
    let config: RunConfig = serde_json::from_value(document.clone()).map_err(|e| invalid(e.to_string()))?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(LoadedConfig {
        config,
        base_dir,
        document,
    })
}

/// `a.b.c=<json>`; a value that is not valid JSON is taken as a string.
fn apply_override(doc: &mut Value, spec: &str) -> Result<(), String> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| format!("override {spec:?} is not of the form key=value"))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(format!("bad override key {key:?}"));
    }
    let mut node = doc;
    for part in &parts[..parts.len() - 1] {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| format!("override {key:?} descends into a non-object"))?;
        node = obj
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    node.as_object_mut()
        .ok_or_else(|| format!("override {key:?} descends into a non-object"))?
        .insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// SHA-256 over the canonical config document and the seed.
pub fn config_hash(document: &Value, seed: Option<u64>) -> String {
    let mut h = Sha256::new();
    // serde_json maps are ordered by key, so this rendering is canonical
    h.update(serde_json::to_vec(document).expect("config serializes"));
    h.update(b"\nseed=");
    h.update(seed.map_or_else(|| "none".to_string(), |s| s.to_string()));
    hex(&h.finalize())
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
