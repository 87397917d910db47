//! Rejection markers for transformed solutions and filter-rate tables.
//!
//! Checks run in a fixed order and the first marker that fires is reported:
//!
//! * `m1` the response does not follow outline-then-implementation: a
//!   step delimiter is missing, `### STEP 2` comes first, or a code block
//!   opens before `### STEP 1`;
//! * `m2` the outline has no sub-modules, an entry has no docstring, an
//!   entry has a body beyond its docstring (a lone `pass`/`...` is allowed),
//!   or the outline carries top-level code;
//! * `m3` the final section holds zero or several code blocks;
//! * `m4` the final program fails a test.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::Problem;
use crate::promptgen::{parse_mot_sections, ModularSolution, ParseErrorKind};
use crate::sandbox::{JudgePool, JudgeVerdict, RunStatus, SandboxError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Marker {
    M1StrategyDivergence,
    M2NoSubmodules,
    M3MainCodeCount,
    M4TestsFailed,
}

impl Marker {
    pub fn as_str(self) -> &'static str {
        match self {
            Marker::M1StrategyDivergence => "m1_strategy_divergence",
            Marker::M2NoSubmodules => "m2_no_submodules",
            Marker::M3MainCodeCount => "m3_main_code_count",
            Marker::M4TestsFailed => "m4_tests_failed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Accept,
    Reject,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssessmentResult {
    pub verdict: Verdict,
    pub marker: Option<Marker>,
    pub detail: String,
}

impl AssessmentResult {
    pub fn accept() -> Self {
        Self {
            verdict: Verdict::Accept,
            marker: None,
            detail: String::new(),
        }
    }

    pub fn reject(marker: Marker, detail: impl Into<String>) -> Self {
        Self {
            verdict: Verdict::Reject,
            marker: Some(marker),
            detail: detail.into(),
        }
    }

    pub fn accepted(&self) -> bool {
        self.verdict == Verdict::Accept
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataType {
    Mot,
    Clean,
}

impl DataType {
    pub fn as_str(self) -> &'static str {
        match self {
            DataType::Mot => "mot",
            DataType::Clean => "clean",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterRecord {
    pub problem_id: String,
    pub source: String,
    pub data_type: DataType,
    /// Position of the transformed solution among the problem's solutions.
    pub solution_index: usize,
    pub result: AssessmentResult,
}

fn structure_markers(sol: &ModularSolution) -> Option<AssessmentResult> {
    if sol.layout.fences_before_step1 > 0 {
        return Some(AssessmentResult::reject(
            Marker::M1StrategyDivergence,
            format!(
                "{} code block(s) before the outline",
                sol.layout.fences_before_step1
            ),
        ));
    }
    if sol.outline.is_empty() {
        return Some(AssessmentResult::reject(
            Marker::M2NoSubmodules,
            "outline has no sub-modules",
        ));
    }
    if let Some(m) = sol.outline.iter().find(|m| m.docstring.trim().is_empty()) {
        return Some(AssessmentResult::reject(
            Marker::M2NoSubmodules,
            format!("sub-module `{}` has no docstring", m.name),
        ));
    }
    if let Some(m) = sol.outline.iter().find(|m| !m.is_stub()) {
        return Some(AssessmentResult::reject(
            Marker::M2NoSubmodules,
            format!("sub-module `{}` is implemented in the outline", m.name),
        ));
    }
    if let Some(stmt) = sol.outline_extra.first() {
        return Some(AssessmentResult::reject(
            Marker::M2NoSubmodules,
            format!("outline contains top-level code: {stmt}"),
        ));
    }
    None
}

/// Markers 1 to 3 on an already parsed solution.
pub fn assess_structure(sol: &ModularSolution) -> AssessmentResult {
    if let Some(r) = structure_markers(sol) {
        return r;
    }
    let blocks = sol.layout.final_blocks.len();
    if blocks != 1 || sol.final_code.trim().is_empty() {
        return AssessmentResult::reject(
            Marker::M3MainCodeCount,
            format!("{blocks} final code block(s)"),
        );
    }
    AssessmentResult::accept()
}

/// Markers 1 to 3 straight from the raw response. Also returns the parsed
/// solution when the step layout could be read.
pub fn assess_response(raw: &str) -> (Option<ModularSolution>, AssessmentResult) {
    match parse_mot_sections(raw) {
        Ok(sol) => {
            let r = assess_structure(&sol);
            (Some(sol), r)
        }
        Err(e) => {
            let what = match e.kind {
                ParseErrorKind::MissingStep => "missing step delimiter",
                _ => "steps out of order",
            };
            (
                None,
                AssessmentResult::reject(
                    Marker::M1StrategyDivergence,
                    format!("{what} at byte {}", e.offset),
                ),
            )
        }
    }
}

/// Marker 4: run `program` against every test of `problem`.
pub fn assess_program(
    program: &str,
    problem: &Problem,
    judge: &JudgePool,
) -> Result<AssessmentResult, SandboxError> {
    Ok(functional_result(&judge.judge_one(program, problem)?))
}

/// Marker 4 from an existing verdict.
pub fn functional_result(verdict: &JudgeVerdict) -> AssessmentResult {
    match verdict.first_failing() {
        None => AssessmentResult::accept(),
        Some((i, outcome)) => {
            let status = outcome.report.status;
            let what = if status == RunStatus::Ok {
                "wrong_answer"
            } else {
                status.as_str()
            };
            AssessmentResult::reject(Marker::M4TestsFailed, format!("test {i}: {what}"))
        }
    }
}

pub fn assess_functional(
    sol: &ModularSolution,
    problem: &Problem,
    judge: &JudgePool,
) -> Result<AssessmentResult, SandboxError> {
    assess_program(&sol.final_code, problem, judge)
}

/// `round(100 * post / pre)` with halves rounded up; `None` when `pre` is 0.
pub fn whole_percent(post: usize, pre: usize) -> Option<u32> {
    if pre == 0 {
        return None;
    }
    Some(((200 * post as u128 + pre as u128) / (2 * pre as u128)) as u32)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PassRateRow {
    pub source: String,
    pub data_type: DataType,
    pub pre: usize,
    pub post: usize,
    /// Whole percent; absent when `pre` is 0.
    pub rate: Option<u32>,
}

/// One row per (source, data type), sorted by that key.
pub fn filter_pass_rate(records: &[FilterRecord]) -> Vec<PassRateRow> {
    let mut table: BTreeMap<(String, DataType), (usize, usize)> = BTreeMap::new();
    for r in records {
        let slot = table.entry((r.source.clone(), r.data_type)).or_default();
        slot.0 += 1;
        if r.result.accepted() {
            slot.1 += 1;
        }
    }
    table
        .into_iter()
        .map(|((source, data_type), (pre, post))| PassRateRow {
            source,
            data_type,
            pre,
            post,
            rate: whole_percent(post, pre),
        })
        .collect()
}

pub fn write_pass_rate_csv<W: std::io::Write>(rows: &[PassRateRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "source",
        "data_type",
        "pre_count",
        "post_count",
        "passing_rate",
    ])?;
    for r in rows {
        w.write_record([
            r.source.clone(),
            r.data_type.as_str().to_string(),
            r.pre.to_string(),
            r.post.to_string(),
            r.rate.map(|p| format!("{p}%")).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
