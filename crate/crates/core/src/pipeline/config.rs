use std::path::{Path, PathBuf};

use anyhow::{bail, Context as _, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::Split;
use crate::evaluate::FunctionBins;
use crate::llm::ProviderConfig;
use crate::metrics::MetricsConfig;
use crate::sandbox::{ComparePolicy, ResourceLimits, Runner};
use crate::validator::DataType;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusPaths {
    pub train: Option<PathBuf>,
    pub valid: Option<PathBuf>,
    pub test: Option<PathBuf>,
}

impl CorpusPaths {
    pub fn get(&self, split: Split) -> Option<&PathBuf> {
        match split {
            Split::Train => self.train.as_ref(),
            Split::Valid => self.valid.as_ref(),
            Split::Test => self.test.as_ref(),
        }
    }

    fn iter_mut(&mut self) -> impl Iterator<Item = &mut PathBuf> {
        [&mut self.train, &mut self.valid, &mut self.test]
            .into_iter()
            .flatten()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub corpus: CorpusPaths,
    pub provider: ProviderConfig,
    pub limits: ResourceLimits,
    pub compare: ComparePolicy,
    /// Shell-style command; `{file}` is replaced by the program path.
    pub runner: String,
    pub keep_scratch: bool,
    pub dedup_threshold: f64,
    pub solution_cap: usize,
    pub data_types: Vec<DataType>,
    /// Ask for the outline and the final program in separate calls.
    pub two_call: bool,
    pub ks: Vec<u64>,
    pub per_level_mean: bool,
    pub function_bins: FunctionBins,
    pub metrics: MetricsConfig,
    pub max_reflection_rounds: usize,
    pub outdir: PathBuf,
    pub workers: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            corpus: CorpusPaths::default(),
            provider: ProviderConfig::default(),
            limits: ResourceLimits::default(),
            compare: ComparePolicy::default(),
            runner: "python3 {file}".into(),
            keep_scratch: false,
            dedup_threshold: 0.9,
            solution_cap: 100,
            data_types: vec![DataType::Mot, DataType::Clean],
            two_call: false,
            ks: vec![1],
            per_level_mean: false,
            function_bins: FunctionBins::default(),
            metrics: MetricsConfig::default(),
            max_reflection_rounds: crate::promptgen::DEFAULT_MAX_ROUNDS,
            outdir: PathBuf::from("out"),
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

impl PipelineConfig {
    /// Reads a JSON config. Relative paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: Self = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        self.corpus.iter_mut().for_each(fix);
        fix(&mut self.outdir);
        if let Some(c) = self.provider.cache_dir.as_mut() {
            fix(c);
        }
    }

    pub fn validate(&self) -> Result<()> {
        for split in [Split::Train, Split::Valid, Split::Test] {
            if let Some(p) = self.corpus.get(split) {
                if !p.is_file() {
                    bail!("{} corpus {} does not exist", split.as_str(), p.display());
                }
            }
        }
        if self.ks.is_empty() || self.ks[0] == 0 || self.ks.windows(2).any(|w| w[0] >= w[1]) {
            bail!(
                "ks must be positive and strictly ascending, got {:?}",
                self.ks
            );
        }
        if !(self.dedup_threshold > 0.0 && self.dedup_threshold <= 1.0) {
            bail!(
                "dedup_threshold must lie in (0, 1], got {}",
                self.dedup_threshold
            );
        }
        if self.solution_cap == 0 {
            bail!("solution_cap must be at least 1");
        }
        if self.max_reflection_rounds == 0 {
            bail!("max_reflection_rounds must be at least 1");
        }
        if self.workers == 0 {
            bail!("workers must be at least 1");
        }
        if self.function_bins.top == 0 {
            bail!("function_bins.top must be at least 1");
        }
        self.provider.validate()?;
        self.limits.validate()?;
        Runner::parse(&self.runner)?;
        Ok(())
    }

    pub fn runner(&self) -> Runner {
        Runner::parse(&self.runner)
            .expect("validated runner")
            .keep_scratch(self.keep_scratch)
    }

    /// sha256 of the config with the output directory left out.
    pub fn digest(&self) -> String {
        let mut c = self.clone();
        c.outdir = PathBuf::new();
        let bytes = serde_json::to_vec(&c).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }
}

/// Command-line flags; each one set wins over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub outdir: Option<PathBuf>,
    pub workers: Option<usize>,
    pub mock_provider: Option<PathBuf>,
    pub runner: Option<String>,
    pub keep_scratch: bool,
    pub max_rounds: Option<usize>,
    pub per_level_mean: bool,
    pub top_level_only: bool,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut PipelineConfig) -> Result<()> {
        if let Some(o) = &self.outdir {
            cfg.outdir = o.clone();
        }
        if let Some(w) = self.workers {
            cfg.workers = w;
            cfg.provider.max_inflight = w.max(1);
        }
        if let Some(r) = &self.runner {
            cfg.runner = r.clone();
        }
        if let Some(m) = self.max_rounds {
            cfg.max_reflection_rounds = m;
        }
        cfg.keep_scratch |= self.keep_scratch;
        cfg.per_level_mean |= self.per_level_mean;
        cfg.metrics.top_level_only |= self.top_level_only;
        if let Some(dir) = &self.mock_provider {
            if !dir.join("mock.json").is_file() {
                bail!("mock provider directory {} has no mock.json", dir.display());
            }
        }
        Ok(())
    }
}
