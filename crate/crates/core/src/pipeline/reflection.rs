use std::collections::BTreeMap;

use anyhow::{bail, Result};
use rayon::prelude::*;
use serde::Serialize;

use super::evaluation::{read_results, RESULTS_FILE};
use super::{csv_writer, write_jsonl, Context};
use crate::corpus::{Difficulty, Split};
use crate::evaluate::{self_reflect, ReflectionTrace, ALL};
use crate::sandbox::SandboxError;

/// Solved problems per group before and after reflection. A problem counts
/// as solved before when any evaluated candidate passed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub group: String,
    pub problems: usize,
    pub solved_before: usize,
    pub solved_after: usize,
}

impl ComparisonRow {
    pub fn rate_before(&self) -> f64 {
        self.solved_before as f64 / self.problems.max(1) as f64
    }

    pub fn rate_after(&self) -> f64 {
        self.solved_after as f64 / self.problems.max(1) as f64
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReflectSummary {
    pub traces: Vec<ReflectionTrace>,
    pub comparison: Vec<ComparisonRow>,
}

pub fn cmd_reflect(ctx: &Context) -> Result<ReflectSummary> {
    let results_path = ctx.config.outdir.join("evaluate").join(RESULTS_FILE);
    if !results_path.is_file() {
        bail!(
            "no evaluate results at {}; run `evaluate` first",
            results_path.display()
        );
    }
    let records = read_results(&results_path)?;
    let corpus = ctx.required_corpus(Split::Test)?;
    let index = corpus.index();
    let mut unknown: Vec<&str> = records
        .iter()
        .map(|r| r.problem_id.as_str())
        .filter(|id| !index.contains_key(id))
        .collect();
    if !unknown.is_empty() {
        unknown.sort_unstable();
        bail!(
            "results reference unknown problem ids: {}",
            unknown.join(", ")
        );
    }
    let dir = ctx.out_dir("reflect")?;

    let failed: Vec<_> = records
        .iter()
        .filter(|r| r.c == 0)
        .map(|r| index[r.problem_id.as_str()])
        .collect();
    let traces: Vec<ReflectionTrace> = if failed.is_empty() {
        Vec::new()
    } else {
        let client = ctx.client()?;
        let judge = ctx.judge();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(ctx.config.workers)
            .build()
            .map_err(|e| SandboxError::Pool(e.to_string()))?;
        pool.install(|| {
            failed
                .par_iter()
                .map(|p| self_reflect(p, &client, &judge, ctx.config.max_reflection_rounds))
                .collect::<Result<Vec<_>, _>>()
        })?
    };

    let fixed: Vec<&str> = traces
        .iter()
        .filter(|t| t.solved())
        .map(|t| t.problem_id.as_str())
        .collect();
    let mut groups: BTreeMap<Option<Difficulty>, ComparisonRow> = BTreeMap::new();
    for r in &records {
        let d = index[r.problem_id.as_str()].difficulty;
        let before = r.c > 0;
        let after = before || fixed.contains(&r.problem_id.as_str());
        for key in [Some(d), None] {
            let row = groups.entry(key).or_insert_with(|| ComparisonRow {
                group: key.map_or(ALL, Difficulty::as_str).into(),
                problems: 0,
                solved_before: 0,
                solved_after: 0,
            });
            row.problems += 1;
            row.solved_before += usize::from(before);
            row.solved_after += usize::from(after);
        }
    }
    let mut comparison: Vec<(Option<Difficulty>, ComparisonRow)> = groups.into_iter().collect();
    comparison.sort_by_key(|(d, _)| (d.is_none(), *d));
    let comparison: Vec<ComparisonRow> = comparison.into_iter().map(|(_, r)| r).collect();

    write_jsonl(&dir.join("traces.jsonl"), &traces)?;
    let mut w = csv_writer(&dir.join("comparison.csv"))?;
    w.write_record([
        "group",
        "problems",
        "solved_before",
        "solved_after",
        "rate_before",
        "rate_after",
    ])?;
    println!(
        "{:<14} {:>9} {:>8} {:>8}",
        "group", "problems", "before", "after"
    );
    for r in &comparison {
        w.write_record([
            r.group.clone(),
            r.problems.to_string(),
            r.solved_before.to_string(),
            r.solved_after.to_string(),
            format!("{:.6}", r.rate_before()),
            format!("{:.6}", r.rate_after()),
        ])?;
        println!(
            "{:<14} {:>9} {:>7.2}% {:>7.2}%",
            r.group,
            r.problems,
            100.0 * r.rate_before(),
            100.0 * r.rate_after()
        );
    }
    w.flush()?;
    println!(
        "reflected on {} failed problem(s), {} fixed",
        traces.len(),
        fixed.len()
    );
    ctx.finish("reflect", &dir)?;
    Ok(ReflectSummary { traces, comparison })
}
