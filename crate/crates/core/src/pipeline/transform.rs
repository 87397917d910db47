use anyhow::Result;
use serde::{Deserialize, Serialize};

use super::{write_json, write_jsonl, Context};
use crate::corpus::{dedup_against, select_solutions, Corpus, DedupReport, Problem, Split};
use crate::llm::{Completion, ProviderError};
use crate::promptgen::{
    build_clean_prompt, build_mot_prompt, build_mot_step1_prompt, build_mot_step2_prompt,
    join_two_call, parse_clean_response, Prompt,
};
use crate::validator::{
    assess_response, filter_pass_rate, functional_result, write_pass_rate_csv, AssessmentResult,
    DataType, FilterRecord, Marker, PassRateRow,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptedItem {
    pub problem_id: String,
    pub source: String,
    pub data_type: DataType,
    pub solution_index: usize,
    pub instruction: String,
    pub response: String,
    pub final_code: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectedItem {
    pub problem_id: String,
    pub source: String,
    pub data_type: DataType,
    pub solution_index: usize,
    /// Absent for provider or prompt failures, which are not counted in the
    /// filter rate.
    pub marker: Option<Marker>,
    pub detail: String,
    pub response: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformSummary {
    pub problems: usize,
    pub untestable_skipped: usize,
    pub dedup: DedupReport,
    pub items: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub failed: usize,
    pub filter_rate: Vec<PassRateRow>,
}

struct Item<'a> {
    problem: &'a Problem,
    index: usize,
    data_type: DataType,
    solution: &'a str,
}

enum Stage {
    Failed(String),
    Raw(String),
    Assessed {
        raw: String,
        result: AssessmentResult,
        program: Option<String>,
    },
}

fn first_prompt(item: &Item<'_>, two_call: bool) -> Result<Prompt, String> {
    let p = match (item.data_type, two_call) {
        (DataType::Mot, false) => build_mot_prompt(item.problem, item.solution),
        (DataType::Mot, true) => build_mot_step1_prompt(item.problem, item.solution),
        (DataType::Clean, _) => build_clean_prompt(item.problem, item.solution),
    };
    p.map_err(|e| format!("prompt: {e}"))
}

fn completed(r: Result<Completion, ProviderError>) -> Stage {
    match r {
        Ok(c) => Stage::Raw(c.text),
        Err(e) => Stage::Failed(format!("provider: {e}")),
    }
}

/// Sends every `Some` prompt in one batch and returns replies in order.
fn send(ctx_client: &crate::llm::LlmClient, prompts: Vec<Option<Prompt>>) -> Vec<Option<Stage>> {
    let batch: Vec<Prompt> = prompts.iter().flatten().cloned().collect();
    let mut replies = ctx_client.complete_batch(&batch).into_iter();
    prompts
        .into_iter()
        .map(|p| p.map(|_| completed(replies.next().expect("one reply per prompt"))))
        .collect()
}

fn structural(item: &Item<'_>, raw: String) -> Stage {
    match item.data_type {
        DataType::Mot => {
            let (sol, result) = assess_response(&raw);
            let program = sol.filter(|_| result.accepted()).map(|s| s.final_code);
            Stage::Assessed {
                raw,
                result,
                program,
            }
        }
        DataType::Clean => match parse_clean_response(&raw) {
            Ok(code) => Stage::Assessed {
                raw,
                result: AssessmentResult::accept(),
                program: Some(code),
            },
            Err(e) => Stage::Assessed {
                raw,
                result: AssessmentResult::reject(
                    Marker::M3MainCodeCount,
                    format!("{:?} at byte {}", e.kind, e.offset),
                ),
                program: None,
            },
        },
    }
}

/// Dedup the training corpus against every configured holdout split.
fn deduplicated(ctx: &Context) -> Result<(Corpus, DedupReport)> {
    let mut train = ctx.required_corpus(Split::Train)?;
    let mut report = DedupReport {
        threshold: ctx.config.dedup_threshold,
        examined: train.len(),
        removed: Vec::new(),
    };
    for split in [Split::Valid, Split::Test] {
        if let Some(holdout) = ctx.corpus(split)? {
            let (kept, r) = dedup_against(&train, &holdout, ctx.config.dedup_threshold)?;
            train = kept;
            report.removed.extend(r.removed);
        }
    }
    Ok((train, report))
}

pub fn cmd_transform(ctx: &Context) -> Result<TransformSummary> {
    let dir = ctx.out_dir("transform")?;
    let cfg = &ctx.config;
    let (train, dedup) = deduplicated(ctx)?;
    let client = ctx.client()?;
    let judge = ctx.judge();

    let untestable_skipped = train
        .problems
        .iter()
        .filter(|p| p.untestable || p.tests.is_empty())
        .count();
    let mut items = Vec::new();
    for problem in train
        .problems
        .iter()
        .filter(|p| !p.untestable && !p.tests.is_empty())
    {
        for (index, solution) in select_solutions(problem, cfg.solution_cap)
            .iter()
            .enumerate()
        {
            for &data_type in &cfg.data_types {
                items.push(Item {
                    problem,
                    index,
                    data_type,
                    solution,
                });
            }
        }
    }
    log::info!(
        "transform: {} items from {} problems",
        items.len(),
        train.len()
    );

    let (mut stages, mut prompts) = (
        Vec::with_capacity(items.len()),
        Vec::with_capacity(items.len()),
    );
    for item in &items {
        match first_prompt(item, cfg.two_call) {
            Ok(p) => {
                stages.push(Stage::Raw(String::new()));
                prompts.push(Some(p));
            }
            Err(e) => {
                stages.push(Stage::Failed(e));
                prompts.push(None);
            }
        }
    }
    for (stage, reply) in stages.iter_mut().zip(send(&client, prompts)) {
        if let Some(r) = reply {
            *stage = r;
        }
    }

    if cfg.two_call {
        let second: Vec<Option<Prompt>> = items
            .iter()
            .zip(&stages)
            .map(|(item, stage)| match (item.data_type, stage) {
                (DataType::Mot, Stage::Raw(outline)) => {
                    build_mot_step2_prompt(item.problem, item.solution, outline).ok()
                }
                _ => None,
            })
            .collect();
        for (stage, reply) in stages.iter_mut().zip(send(&client, second)) {
            match (reply, &*stage) {
                (Some(Stage::Raw(final_part)), Stage::Raw(outline)) => {
                    *stage = Stage::Raw(join_two_call(outline, &final_part));
                }
                (Some(failed), _) => *stage = failed,
                (None, _) => {}
            }
        }
    }

    let stages: Vec<Stage> = items
        .iter()
        .zip(stages)
        .map(|(item, stage)| match stage {
            Stage::Raw(raw) => structural(item, raw),
            other => other,
        })
        .collect();

    let jobs: Vec<(usize, &str, &Problem)> = stages
        .iter()
        .enumerate()
        .filter_map(|(i, s)| match s {
            Stage::Assessed {
                program: Some(p), ..
            } => Some((i, p.as_str(), items[i].problem)),
            _ => None,
        })
        .collect();
    let pairs: Vec<(&str, &Problem)> = jobs.iter().map(|(_, p, q)| (*p, *q)).collect();
    let verdicts = judge.judge_many(&pairs)?;
    let mut functional: Vec<Option<AssessmentResult>> = vec![None; items.len()];
    for ((i, _, _), v) in jobs.iter().zip(verdicts) {
        functional[*i] = Some(functional_result(&v?));
    }

    let (mut mot, mut clean, mut rejected, mut records) =
        (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut failed = 0;
    for ((item, stage), func) in items.iter().zip(stages).zip(functional) {
        let reject = |marker, detail, response| RejectedItem {
            problem_id: item.problem.id.clone(),
            source: item.problem.source.clone(),
            data_type: item.data_type,
            solution_index: item.index,
            marker,
            detail,
            response,
        };
        let (raw, result, program) = match stage {
            Stage::Failed(detail) => {
                failed += 1;
                rejected.push(reject(None, detail, None));
                continue;
            }
            Stage::Raw(_) => unreachable!("every reply was assessed"),
            Stage::Assessed {
                raw,
                result,
                program,
            } => (raw, func.unwrap_or(result), program),
        };
        records.push(FilterRecord {
            problem_id: item.problem.id.clone(),
            source: item.problem.source.clone(),
            data_type: item.data_type,
            solution_index: item.index,
            result: result.clone(),
        });
        if result.accepted() {
            let accepted = AcceptedItem {
                problem_id: item.problem.id.clone(),
                source: item.problem.source.clone(),
                data_type: item.data_type,
                solution_index: item.index,
                instruction: item.problem.statement.clone(),
                response: raw,
                final_code: program.unwrap_or_default(),
            };
            match item.data_type {
                DataType::Mot => mot.push(accepted),
                DataType::Clean => clean.push(accepted),
            }
        } else {
            rejected.push(reject(result.marker, result.detail, Some(raw)));
        }
    }

    let filter_rate = filter_pass_rate(&records);
    write_jsonl(&dir.join("mot.jsonl"), &mot)?;
    write_jsonl(&dir.join("clean.jsonl"), &clean)?;
    write_jsonl(&dir.join("rejected.jsonl"), &rejected)?;
    write_pass_rate_csv(
        &filter_rate,
        std::fs::File::create(dir.join("filter_rate.csv"))?,
    )?;
    let summary = TransformSummary {
        problems: train.len(),
        untestable_skipped,
        dedup,
        items: items.len(),
        accepted: mot.len() + clean.len(),
        rejected: rejected.len() - failed,
        failed,
        filter_rate,
    };
    write_json(&dir.join("summary.json"), &summary)?;
    print_filter_table(&summary);
    ctx.finish("transform", &dir)?;
    Ok(summary)
}

fn print_filter_table(s: &TransformSummary) {
    println!(
        "{:<16} {:<6} {:>8} {:>8} {:>6}",
        "source", "type", "pre", "post", "rate"
    );
    for r in &s.filter_rate {
        println!(
            "{:<16} {:<6} {:>8} {:>8} {:>6}",
            if r.source.is_empty() { "-" } else { &r.source },
            r.data_type.as_str(),
            r.pre,
            r.post,
            r.rate
                .map(|p| format!("{p}%"))
                .unwrap_or_else(|| "-".into())
        );
    }
    println!(
        "{} accepted, {} rejected, {} failed, {} removed by dedup, {} untestable skipped",
        s.accepted,
        s.rejected,
        s.failed,
        s.dedup.removed.len(),
        s.untestable_skipped
    );
}
