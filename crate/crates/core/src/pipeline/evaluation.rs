use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context as _, Result};
use serde::Serialize;

use super::{csv_writer, fmt_opt, write_json, write_jsonl, Context};
use crate::corpus::{select_solutions, Corpus, Split};
use crate::evaluate::{
    evaluate_corpus, AggregateOptions, Candidate, EvalReport, GenerationRecord, VerdictSummary,
};
use crate::metrics::analyze_with;

pub const RESULTS_FILE: &str = "results.jsonl";

#[derive(Debug, Clone)]
pub enum CandidateSource {
    /// JSON object mapping problem id to a list of programs.
    File(PathBuf),
    /// Each problem's own reference solutions, up to the solution cap.
    References,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvaluateSummary {
    pub problems: usize,
    pub candidates: usize,
    pub skipped_untestable: Vec<String>,
    pub report: EvalReport,
}

fn load_candidates(
    source: &CandidateSource,
    corpus: &Corpus,
    cap: usize,
) -> Result<BTreeMap<String, Vec<String>>> {
    match source {
        CandidateSource::File(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading candidates {}", path.display()))?;
            let map: BTreeMap<String, Vec<String>> = serde_json::from_str(&text)
                .with_context(|| format!("parsing candidates {}", path.display()))?;
            let index = corpus.index();
            let unknown: Vec<&str> = map
                .keys()
                .map(String::as_str)
                .filter(|k| !index.contains_key(k))
                .collect();
            if !unknown.is_empty() {
                bail!(
                    "candidates reference unknown problem ids: {}",
                    unknown.join(", ")
                );
            }
            Ok(map)
        }
        CandidateSource::References => Ok(corpus
            .problems
            .iter()
            .map(|p| (p.id.clone(), select_solutions(p, cap).to_vec()))
            .collect()),
    }
}

/// Judge every candidate against its problem, then aggregate.
pub fn evaluate_candidates(
    ctx: &Context,
    corpus: &Corpus,
    candidates: &BTreeMap<String, Vec<String>>,
) -> Result<(Vec<GenerationRecord>, Vec<String>)> {
    let judge = ctx.judge();
    let mut skipped = Vec::new();
    let mut jobs = Vec::new();
    for (id, programs) in candidates {
        let problem = corpus
            .get(id)
            .ok_or_else(|| anyhow!("unknown problem id {id}"))?;
        if problem.untestable || problem.tests.is_empty() {
            skipped.push(id.clone());
            continue;
        }
        for program in programs {
            jobs.push((id.as_str(), program.as_str(), problem));
        }
    }
    let pairs: Vec<_> = jobs.iter().map(|(_, code, p)| (*code, *p)).collect();
    let verdicts: Vec<_> = judge
        .judge_many(&pairs)?
        .into_iter()
        .collect::<Result<_, _>>()?;

    let mut grouped: BTreeMap<&str, Vec<Candidate>> = BTreeMap::new();
    for (id, programs) in candidates {
        if !skipped.contains(id) {
            grouped.insert(id.as_str(), Vec::with_capacity(programs.len()));
        }
    }
    for ((id, code, _), verdict) in jobs.iter().zip(verdicts) {
        grouped.get_mut(id).expect("grouped above").push(Candidate {
            code: code.to_string(),
            verdict: VerdictSummary::from(&verdict),
            metrics: analyze_with(code, &ctx.config.metrics),
        });
    }
    let records = grouped
        .into_iter()
        .map(|(id, cands)| GenerationRecord::new(id, cands))
        .collect();
    Ok((records, skipped))
}

fn options(ctx: &Context) -> AggregateOptions {
    AggregateOptions {
        per_level_mean: ctx.config.per_level_mean,
        bins: ctx.config.function_bins,
    }
}

pub fn cmd_evaluate(ctx: &Context, source: &CandidateSource) -> Result<EvaluateSummary> {
    let corpus = ctx.required_corpus(Split::Test)?;
    let candidates = load_candidates(source, &corpus, ctx.config.solution_cap)?;
    let dir = ctx.out_dir("evaluate")?;
    let (records, skipped) = evaluate_candidates(ctx, &corpus, &candidates)?;
    let report = evaluate_corpus(&corpus, &records, &ctx.config.ks, &options(ctx))?;

    write_jsonl(&dir.join(RESULTS_FILE), &records)?;
    write_json(&dir.join("report.json"), &report)?;
    let mut w = csv_writer(&dir.join("pass_at_k.csv"))?;
    w.write_record(["group", "k", "problems", "pass_at_k"])?;
    for r in &report.pass_at_k {
        w.write_record([
            r.group.clone(),
            r.k.to_string(),
            r.problems.to_string(),
            fmt_opt(r.value),
        ])?;
    }
    w.flush()?;

    println!(
        "{:<14} {:>4} {:>9} {:>10}",
        "group", "k", "problems", "pass@k"
    );
    for r in &report.pass_at_k {
        let v = r.value.map_or("-".into(), |v| format!("{:.2}%", 100.0 * v));
        println!("{:<14} {:>4} {:>9} {:>10}", r.group, r.k, r.problems, v);
    }
    if !skipped.is_empty() {
        println!("skipped {} untestable problem(s)", skipped.len());
    }
    ctx.finish("evaluate", &dir)?;
    Ok(EvaluateSummary {
        problems: records.len(),
        candidates: records.iter().map(|r| r.n).sum(),
        skipped_untestable: skipped,
        report,
    })
}

/// Reads `results.jsonl`; errors name the offending line.
pub fn read_results(path: &Path) -> Result<Vec<GenerationRecord>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading results {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let r: GenerationRecord = serde_json::from_str(line)
            .with_context(|| format!("{}: line {}: malformed record", path.display(), i + 1))?;
        let passed = r.candidates.iter().filter(|c| c.verdict.passed).count();
        if r.n != r.candidates.len() || r.c != passed {
            bail!(
                "{}: line {}: n = {}, c = {} disagree with the {} candidate(s) listed",
                path.display(),
                i + 1,
                r.n,
                r.c,
                r.candidates.len()
            );
        }
        out.push(r);
    }
    Ok(out)
}

pub fn cmd_analyze(ctx: &Context, results: Option<&Path>) -> Result<EvalReport> {
    let default = ctx.config.outdir.join("evaluate").join(RESULTS_FILE);
    let path = results.unwrap_or(&default);
    let records = read_results(path)?;
    let corpus = ctx.required_corpus(Split::Test)?;
    let report = evaluate_corpus(&corpus, &records, &ctx.config.ks, &options(ctx))?;
    let dir = ctx.out_dir("analyze")?;

    let mut w = csv_writer(&dir.join("function_profile.csv"))?;
    w.write_record(["difficulty", "bin", "count", "passed", "accuracy"])?;
    for r in &report.function_profile {
        w.write_record([
            r.difficulty.clone(),
            r.bin.clone(),
            r.count.to_string(),
            r.passed.to_string(),
            format!("{:.6}", r.accuracy),
        ])?;
    }
    w.flush()?;

    let mut w = csv_writer(&dir.join("resource_profile.csv"))?;
    w.write_record([
        "difficulty",
        "passed_candidates",
        "avg_time",
        "avg_peak_memory",
    ])?;
    for r in &report.resource_profile {
        w.write_record([
            r.difficulty.clone(),
            r.passed_candidates.to_string(),
            fmt_opt(r.avg_time),
            fmt_opt(r.avg_peak_memory),
        ])?;
    }
    w.flush()?;

    let mut w = csv_writer(&dir.join("mi_profile.csv"))?;
    w.write_record(["split", "difficulty", "passed_candidates", "mean_mi"])?;
    for r in &report.mi_profile {
        w.write_record([
            r.split.clone(),
            r.difficulty.clone(),
            r.passed_candidates.to_string(),
            fmt_opt(r.mean_mi),
        ])?;
    }
    w.flush()?;

    println!(
        "wrote {} function bins, {} resource rows, {} MI rows to {}",
        report.function_profile.len(),
        report.resource_profile.len(),
        report.mi_profile.len(),
        dir.display()
    );
    ctx.finish("analyze", &dir)?;
    Ok(report)
}
