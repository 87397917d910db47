//! Command implementations behind the `mot-harness` binary.
//!
//! Every command reads one JSON [`PipelineConfig`] and writes under
//! `<outdir>/<command>/`, finishing with a `manifest.json`.

mod config;
mod evaluation;
mod reflection;
mod transform;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{Context as _, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::corpus::{load_corpus, Corpus, Split};
use crate::llm::{HttpProvider, LlmClient, MockProvider, Provider};
use crate::sandbox::{JudgeOptions, JudgePool};

pub use config::{CorpusPaths, Overrides, PipelineConfig};
pub use evaluation::{
    cmd_analyze, cmd_evaluate, read_results, CandidateSource, EvaluateSummary, RESULTS_FILE,
};
pub use reflection::{cmd_reflect, ComparisonRow, ReflectSummary};
pub use transform::{cmd_transform, AcceptedItem, RejectedItem, TransformSummary};

/// Fields whose values are wall-clock or memory readings.
pub const VOLATILE_FIELDS: &[&str] = &[
    "avg_time",
    "avg_peak_memory",
    "wall_time_used",
    "peak_memory",
];

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    command: &'a str,
    harness_version: &'a str,
    config_sha256: String,
    outputs: Vec<String>,
}

/// Shared state for one command invocation.
pub struct Context {
    pub config: PipelineConfig,
    pub overrides: Overrides,
}

impl Context {
    pub fn new(config: PipelineConfig, overrides: Overrides) -> Result<Self> {
        let mut config = config;
        overrides.apply(&mut config)?;
        config.validate()?;
        Ok(Self { config, overrides })
    }

    pub fn load(path: &Path, overrides: Overrides) -> Result<Self> {
        Self::new(PipelineConfig::load(path)?, overrides)
    }

    pub fn out_dir(&self, command: &str) -> Result<PathBuf> {
        let dir = self.config.outdir.join(command);
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(dir)
    }

    pub fn corpus(&self, split: Split) -> Result<Option<Corpus>> {
        let Some(path) = self.config.corpus.get(split) else {
            return Ok(None);
        };
        let loaded =
            load_corpus(path, split).with_context(|| format!("loading {}", path.display()))?;
        for d in &loaded.diagnostics {
            log::warn!("{}: skipped {d}", path.display());
        }
        Ok(Some(loaded.corpus))
    }

    pub fn required_corpus(&self, split: Split) -> Result<Corpus> {
        self.corpus(split)?
            .with_context(|| format!("config names no {} corpus", split.as_str()))
    }

    pub fn judge(&self) -> JudgePool {
        JudgePool::new(
            self.config.workers,
            self.config.runner(),
            self.config.limits,
            JudgeOptions {
                policy: self.config.compare,
                fail_fast: false,
            },
        )
    }

    pub fn client(&self) -> Result<LlmClient> {
        let provider: Arc<dyn Provider> = match &self.overrides.mock_provider {
            Some(dir) => Arc::new(MockProvider::from_dir(dir)?),
            None => Arc::new(HttpProvider::new(
                &self.config.provider.endpoint,
                std::time::Duration::from_secs_f64(self.config.provider.timeout_secs),
            )?),
        };
        Ok(LlmClient::new(provider, self.config.provider.clone())?)
    }

    /// Writes `manifest.json` listing every other file in `dir`.
    pub fn finish(&self, command: &str, dir: &Path) -> Result<()> {
        let mut outputs: Vec<String> = fs::read_dir(dir)?
            .filter_map(|e| e.ok())
            .filter(|e| e.path().is_file())
            .map(|e| e.file_name().to_string_lossy().into_owned())
            .filter(|n| n != "manifest.json")
            .collect();
        outputs.sort();
        let manifest = Manifest {
            command,
            harness_version: env!("CARGO_PKG_VERSION"),
            config_sha256: self.config.digest(),
            outputs,
        };
        write_json(&dir.join("manifest.json"), &manifest)
    }
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub(crate) fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut out = std::io::BufWriter::new(
        fs::File::create(path).with_context(|| format!("writing {}", path.display()))?,
    );
    for row in rows {
        serde_json::to_writer(&mut out, row)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub(crate) fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))
}

pub(crate) fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

fn mask_json(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Object(map) => {
            for (k, val) in map.iter_mut() {
                if VOLATILE_FIELDS.contains(&k.as_str()) {
                    *val = serde_json::Value::Null;
                } else {
                    mask_json(val);
                }
            }
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(mask_json),
        _ => {}
    }
}

fn mask_csv(text: &str) -> String {
    let mut lines = text.lines();
    let Some(header) = lines.next() else {
        return String::new();
    };
    let volatile: Vec<bool> = header
        .split(',')
        .map(|h| VOLATILE_FIELDS.contains(&h))
        .collect();
    let mut out = format!("{header}\n");
    for line in lines {
        let cells: Vec<&str> = line
            .split(',')
            .enumerate()
            .map(|(i, c)| {
                if volatile.get(i).copied().unwrap_or(false) {
                    "*"
                } else {
                    c
                }
            })
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// File contents with timing and memory readings blanked, for comparing runs.
pub fn masked_contents(path: &Path) -> Result<String> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    Ok(match ext {
        "json" => {
            let mut v: serde_json::Value = serde_json::from_str(&text)?;
            mask_json(&mut v);
            serde_json::to_string_pretty(&v)?
        }
        "jsonl" => {
            let mut out = String::new();
            for line in text.lines() {
                let mut v: serde_json::Value = serde_json::from_str(line)?;
                mask_json(&mut v);
                out.push_str(&serde_json::to_string(&v)?);
                out.push('\n');
            }
            out
        }
        "csv" => mask_csv(&text),
        _ => text,
    })
}

/// sha256 over every output file under `root`, volatile readings masked.
/// Keys are paths relative to `root`.
pub fn stable_digests(root: &Path) -> Result<Vec<(String, String)>> {
    let mut files = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir)? {
            let path = entry?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                files.push(path);
            }
        }
    }
    let mut out = Vec::with_capacity(files.len());
    for path in files {
        let rel = path.strip_prefix(root)?.to_string_lossy().into_owned();
        let digest = hex::encode(Sha256::digest(masked_contents(&path)?.as_bytes()));
        out.push((rel, digest));
    }
    out.sort();
    Ok(out)
}

pub fn cmd_stats(ctx: &Context) -> Result<()> {
    let dir = ctx.out_dir("stats")?;
    let mut w = csv_writer(&dir.join("stats.csv"))?;
    w.write_record(["split", "source", "difficulty", "problems"])?;
    let mut reports = serde_json::Map::new();
    for split in [Split::Train, Split::Valid, Split::Test] {
        let Some(corpus) = ctx.corpus(split)? else {
            continue;
        };
        let report = crate::corpus::corpus_stats(&corpus);
        println!(
            "{:<6} problems {:>6}  untestable {:>5}  solutions {:>7}  tests {:>7}",
            split.as_str(),
            report.problems,
            report.untestable,
            report.solutions,
            report.tests
        );
        for (key, count) in &report.partitions {
            w.write_record([
                key.split.as_str(),
                key.source.as_str(),
                key.difficulty.as_str(),
                &count.to_string(),
            ])?;
        }
        reports.insert(split.as_str().into(), serde_json::to_value(&report)?);
    }
    w.flush()?;
    write_json(&dir.join("stats.json"), &reports)?;
    ctx.finish("stats", &dir)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_masking_blanks_only_volatile_columns() {
        let text = "difficulty,passed_candidates,avg_time,avg_peak_memory\nall,2,0.013,9000\n";
        assert_eq!(
            mask_csv(text),
            "difficulty,passed_candidates,avg_time,avg_peak_memory\nall,2,*,*\n"
        );
    }

    #[test]
    fn json_masking_recurses() {
        let mut v = serde_json::json!({"a": [{"avg_time": 1.5, "passed": true}], "peak_memory": 3});
        mask_json(&mut v);
        assert_eq!(
            v,
            serde_json::json!({"a": [{"avg_time": null, "passed": true}], "peak_memory": null})
        );
    }
}
