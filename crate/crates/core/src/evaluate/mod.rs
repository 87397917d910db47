//! pass@k aggregation, analysis profiles and the self-reflection loop.

mod passk;
mod profiles;
mod reflect;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Difficulty, Problem};
use crate::metrics::CodeMetrics;
use crate::sandbox::{JudgeVerdict, RunStatus};

pub use passk::{pass_at_k, PassAtKError};
pub use profiles::{
    function_accuracy_profile, mi_profile, resource_profile, FunctionBinRow, FunctionBins, MiRow,
    ResourceRow,
};
pub use reflect::{self_reflect, ReflectionRound, ReflectionTrace};

/// Group label for rows that span every difficulty.
pub const ALL: &str = "all";

/// The parts of a judge verdict kept in result files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictSummary {
    pub passed: bool,
    pub matched: Vec<bool>,
    pub statuses: Vec<RunStatus>,
    pub first_failure: Option<usize>,
    /// Mean wall seconds per test.
    pub avg_time: f64,
    /// Mean peak resident bytes per test.
    pub avg_peak_memory: f64,
}

impl From<&JudgeVerdict> for VerdictSummary {
    fn from(v: &JudgeVerdict) -> Self {
        Self {
            passed: v.passed,
            matched: v.matched(),
            statuses: v.per_test.iter().map(|t| t.report.status).collect(),
            first_failure: v.first_failure,
            avg_time: v.avg_time,
            avg_peak_memory: v.avg_peak_memory,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub code: String,
    pub verdict: VerdictSummary,
    pub metrics: CodeMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub problem_id: String,
    pub candidates: Vec<Candidate>,
    pub n: usize,
    pub c: usize,
}

impl GenerationRecord {
    pub fn new(problem_id: impl Into<String>, candidates: Vec<Candidate>) -> Self {
        let c = candidates.iter().filter(|x| x.verdict.passed).count();
        Self {
            problem_id: problem_id.into(),
            n: candidates.len(),
            c,
            candidates,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassAtKRow {
    /// A difficulty, or `all`.
    pub group: String,
    pub k: u64,
    /// Problems with at least k candidates.
    pub problems: usize,
    /// Absent when no problem in the group has k candidates.
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub ks: Vec<u64>,
    pub per_level_mean: bool,
    pub pass_at_k: Vec<PassAtKRow>,
    pub function_profile: Vec<FunctionBinRow>,
    pub resource_profile: Vec<ResourceRow>,
    pub mi_profile: Vec<MiRow>,
}

impl EvalReport {
    pub fn pass_at(&self, group: &str, k: u64) -> Option<f64> {
        self.pass_at_k
            .iter()
            .find(|r| r.group == group && r.k == k)
            .and_then(|r| r.value)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("records reference unknown problem ids: {}", .0.join(", "))]
    UnknownProblems(Vec<String>),
    #[error("ks must be non-empty, positive and strictly ascending: {0:?}")]
    Ks(Vec<u64>),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AggregateOptions {
    /// `all` is the mean of the per-difficulty means instead of the mean
    /// over problems.
    pub per_level_mean: bool,
    pub bins: FunctionBins,
}

/// Records paired with their problems, sorted by problem id so sums do not
/// depend on record order.
pub(crate) fn resolve<'a>(
    corpus: &'a Corpus,
    records: &'a [GenerationRecord],
) -> Result<Vec<(&'a Problem, &'a GenerationRecord)>, EvalError> {
    let index: HashMap<&str, &Problem> = corpus.index();
    let mut unknown: Vec<String> = records
        .iter()
        .filter(|r| !index.contains_key(r.problem_id.as_str()))
        .map(|r| r.problem_id.clone())
        .collect();
    if !unknown.is_empty() {
        unknown.sort();
        unknown.dedup();
        return Err(EvalError::UnknownProblems(unknown));
    }
    let mut out: Vec<_> = records
        .iter()
        .map(|r| (index[r.problem_id.as_str()], r))
        .collect();
    out.sort_by(|a, b| a.1.problem_id.cmp(&b.1.problem_id));
    Ok(out)
}

pub(crate) fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

pub fn evaluate_corpus(
    corpus: &Corpus,
    records: &[GenerationRecord],
    ks: &[u64],
    options: &AggregateOptions,
) -> Result<EvalReport, EvalError> {
    if ks.is_empty() || ks[0] == 0 || ks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(EvalError::Ks(ks.to_vec()));
    }
    let pairs = resolve(corpus, records)?;
    let mut rows = Vec::new();
    for &k in ks {
        let mut by_level: BTreeMap<Difficulty, Vec<f64>> = BTreeMap::new();
        for (problem, r) in &pairs {
            if let Ok(v) = pass_at_k(r.n as u64, r.c as u64, k) {
                by_level.entry(problem.difficulty).or_default().push(v);
            }
        }
        let present: Vec<Difficulty> = {
            let mut d: Vec<Difficulty> = pairs.iter().map(|(p, _)| p.difficulty).collect();
            d.sort();
            d.dedup();
            d
        };
        let mut level_means = Vec::new();
        for d in present {
            let values = by_level.get(&d).map(Vec::as_slice).unwrap_or(&[]);
            let m = mean(values);
            if let Some(m) = m {
                level_means.push(m);
            }
            rows.push(PassAtKRow {
                group: d.as_str().into(),
                k,
                problems: values.len(),
                value: m,
            });
        }
        let all: Vec<f64> = by_level.values().flatten().copied().collect();
        rows.push(PassAtKRow {
            group: ALL.into(),
            k,
            problems: all.len(),
            value: if options.per_level_mean {
                mean(&level_means)
            } else {
                mean(&all)
            },
        });
    }
    Ok(EvalReport {
        ks: ks.to_vec(),
        per_level_mean: options.per_level_mean,
        pass_at_k: rows,
        function_profile: function_accuracy_profile(&pairs, options.bins),
        resource_profile: resource_profile(&pairs),
        mi_profile: mi_profile(&pairs),
    })
}
