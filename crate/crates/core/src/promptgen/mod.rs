//! Prompt construction for the modular (two-step) transformation, the clean
//! rewrite, direct generation and self-reflection, plus response parsing.
//!
//! Wording lives in `templates/*.txt`; placeholders are `{{name}}`.

mod parse;

use serde::{Deserialize, Serialize};

use crate::corpus::Problem;
use crate::sandbox::{JudgeVerdict, RunStatus};

pub use parse::{
    extract_code, fenced_blocks, parse_clean_response, parse_mot_response, parse_mot_sections,
    Fence, ModularSolution, ParseError, ParseErrorKind, ResponseLayout, SubModule,
};

pub const STEP1: &str = "### STEP 1";
pub const STEP2: &str = "### STEP 2";
pub const DEFAULT_MAX_ROUNDS: usize = 5;
/// Test inputs and outputs quoted in feedback are cut to this many bytes.
pub const EXCERPT_LIMIT: usize = 2000;

const MOT_SYSTEM: &str = include_str!("../../templates/mot_system.txt");
const MOT_USER: &str = include_str!("../../templates/mot_user.txt");
const MOT_STEP1: &str = include_str!("../../templates/mot_step1.txt");
const MOT_STEP2: &str = include_str!("../../templates/mot_step2.txt");
const CLEAN_SYSTEM: &str = include_str!("../../templates/clean_system.txt");
const CLEAN_USER: &str = include_str!("../../templates/clean_user.txt");
const DIRECT_SYSTEM: &str = include_str!("../../templates/direct_system.txt");
const DIRECT_USER: &str = include_str!("../../templates/direct_user.txt");
const REFLECT_USER: &str = include_str!("../../templates/reflect_user.txt");
const ONE_SHOT_STATEMENT: &str = include_str!("../../templates/one_shot_statement.txt");
const ONE_SHOT_SOLUTION: &str = include_str!("../../templates/one_shot_solution.txt");
const ONE_SHOT_OUTPUT: &str = include_str!("../../templates/one_shot_output.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptTag {
    Mot,
    Clean,
    Reflect,
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prompt {
    pub system: String,
    pub user: String,
    /// Example (user, assistant) exchange sent ahead of `user`.
    pub one_shot: Option<(String, String)>,
    pub tag: PromptTag,
}

impl Prompt {
    pub fn messages(&self) -> Vec<Message> {
        let mut out = vec![Message {
            role: Role::System,
            content: self.system.clone(),
        }];
        if let Some((input, output)) = &self.one_shot {
            out.push(Message {
                role: Role::User,
                content: input.clone(),
            });
            out.push(Message {
                role: Role::Assistant,
                content: output.clone(),
            });
        }
        out.push(Message {
            role: Role::User,
            content: self.user.clone(),
        });
        out
    }

    /// Plain-text rendering of the whole conversation, one `[role]` header
    /// per message.
    pub fn transcript(&self) -> String {
        let mut s = String::new();
        for m in self.messages() {
            let role = match m.role {
                Role::System => "system",
                Role::User => "user",
                Role::Assistant => "assistant",
            };
            s.push_str(&format!("[{role}]\n{}\n", m.content.trim_end()));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PromptError {
    #[error("solution is empty")]
    EmptySolution,
    #[error("verdict passed; nothing to reflect on")]
    NothingToReflect,
    #[error("round {round} outside 1..={max_rounds}")]
    RoundOutOfRange { round: usize, max_rounds: usize },
}

/// Substitute `{{key}}` placeholders in one pass; inserted values are never
/// rescanned. Unknown placeholders are left as they are.
pub fn render_template(template: &str, vars: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(start) = rest.find("{{") {
        out.push_str(&rest[..start]);
        let after = &rest[start + 2..];
        match after.find("}}") {
            Some(end) => {
                let key = &after[..end];
                match vars.iter().find(|(k, _)| *k == key) {
                    Some((_, v)) => out.push_str(v),
                    None => out.push_str(&rest[start..start + 2 + end + 2]),
                }
                rest = &after[end + 2..];
            }
            None => {
                out.push_str(&rest[start..]);
                rest = "";
            }
        }
    }
    out.push_str(rest);
    out
}

fn body(s: &str) -> &str {
    s.trim_end_matches('\n')
}

fn one_shot() -> (String, String) {
    let input = render_template(
        MOT_USER,
        &[
            ("statement", body(ONE_SHOT_STATEMENT)),
            ("solution", body(ONE_SHOT_SOLUTION)),
        ],
    );
    (input, ONE_SHOT_OUTPUT.to_string())
}

fn check_solution(solution: &str) -> Result<(), PromptError> {
    if solution.trim().is_empty() {
        Err(PromptError::EmptySolution)
    } else {
        Ok(())
    }
}

/// Single-call modular transformation prompt.
pub fn build_mot_prompt(problem: &Problem, solution: &str) -> Result<Prompt, PromptError> {
    check_solution(solution)?;
    Ok(Prompt {
        system: body(MOT_SYSTEM).to_string(),
        user: render_template(
            MOT_USER,
            &[
                ("statement", body(&problem.statement)),
                ("solution", body(solution)),
            ],
        ),
        one_shot: Some(one_shot()),
        tag: PromptTag::Mot,
    })
}

/// First call of the two-call variant: outline only.
pub fn build_mot_step1_prompt(problem: &Problem, solution: &str) -> Result<Prompt, PromptError> {
    check_solution(solution)?;
    Ok(Prompt {
        system: body(MOT_SYSTEM).to_string(),
        user: render_template(
            MOT_STEP1,
            &[
                ("statement", body(&problem.statement)),
                ("solution", body(solution)),
            ],
        ),
        one_shot: Some(one_shot()),
        tag: PromptTag::Mot,
    })
}

/// Second call of the two-call variant, given the outline returned by the first.
pub fn build_mot_step2_prompt(
    problem: &Problem,
    solution: &str,
    outline: &str,
) -> Result<Prompt, PromptError> {
    check_solution(solution)?;
    Ok(Prompt {
        system: body(MOT_SYSTEM).to_string(),
        user: render_template(
            MOT_STEP2,
            &[
                ("statement", body(&problem.statement)),
                ("solution", body(solution)),
                ("outline", body(outline)),
            ],
        ),
        one_shot: Some(one_shot()),
        tag: PromptTag::Mot,
    })
}

/// Join the two responses of the two-call variant into the single-call
/// response format.
pub fn join_two_call(outline_response: &str, final_response: &str) -> String {
    let strip = |s: &str, delim: &str| {
        let t = s.trim();
        t.strip_prefix(delim)
            .map(str::trim_start)
            .unwrap_or(t)
            .to_string()
    };
    format!(
        "{STEP1}\n{}\n\n{STEP2}\n{}\n",
        strip(outline_response, STEP1),
        strip(final_response, STEP2)
    )
}

pub fn build_clean_prompt(problem: &Problem, solution: &str) -> Result<Prompt, PromptError> {
    check_solution(solution)?;
    Ok(Prompt {
        system: body(CLEAN_SYSTEM).to_string(),
        user: render_template(
            CLEAN_USER,
            &[
                ("statement", body(&problem.statement)),
                ("solution", body(solution)),
            ],
        ),
        one_shot: None,
        tag: PromptTag::Clean,
    })
}

pub fn build_direct_prompt(problem: &Problem) -> Prompt {
    Prompt {
        system: body(DIRECT_SYSTEM).to_string(),
        user: render_template(DIRECT_USER, &[("statement", body(&problem.statement))]),
        one_shot: None,
        tag: PromptTag::Direct,
    }
}

/// Cut `s` to at most `limit` bytes on a char boundary, marking the cut.
pub fn excerpt(s: &str, limit: usize) -> String {
    if s.len() <= limit {
        return s.to_string();
    }
    let mut end = limit;
    while !s.is_char_boundary(end) {
        end -= 1;
    }
    format!("{}\n... [truncated, {} bytes total]", &s[..end], s.len())
}

fn fenced(s: &str) -> String {
    format!("```\n{}\n```", body(&excerpt(s, EXCERPT_LIMIT)))
}

fn feedback(problem: &Problem, verdict: &JudgeVerdict) -> Option<String> {
    let (index, outcome) = verdict.first_failing()?;
    let input = problem
        .tests
        .get(index)
        .map(|t| t.input.as_str())
        .unwrap_or("");
    let expected = problem
        .tests
        .get(index)
        .map(|t| t.expected_output.as_str())
        .unwrap_or("");
    let report = &outcome.report;
    let number = index + 1;
    let text = match report.status {
        RunStatus::Ok => format!(
            "It produced a wrong answer on test {number}.\n\nInput:\n{}\n\nExpected output:\n{}\n\nGot:\n{}",
            fenced(input),
            fenced(expected),
            fenced(&report.stdout)
        ),
        RunStatus::Timeout => format!(
            "Time limit exceeded on test {number}: the program did not finish in time.\n\nInput:\n{}",
            fenced(input)
        ),
        RunStatus::Oom => format!(
            "Memory limit exceeded on test {number}.\n\nInput:\n{}",
            fenced(input)
        ),
        RunStatus::OutputOverflow => format!(
            "Output limit exceeded on test {number}: the program printed far too much.\n\nInput:\n{}",
            fenced(input)
        ),
        RunStatus::RuntimeError => format!(
            "Runtime error (crash, exit code {}) on test {number}.\n\nInput:\n{}\n\nError output:\n{}",
            report.exit_code,
            fenced(input),
            fenced(&report.stderr)
        ),
    };
    Some(text)
}

pub fn build_reflection_prompt(
    problem: &Problem,
    attempt: &str,
    verdict: &JudgeVerdict,
    round: usize,
    max_rounds: usize,
) -> Result<Prompt, PromptError> {
    if round == 0 || round > max_rounds {
        return Err(PromptError::RoundOutOfRange { round, max_rounds });
    }
    if verdict.passed {
        return Err(PromptError::NothingToReflect);
    }
    let feedback = feedback(problem, verdict).ok_or(PromptError::NothingToReflect)?;
    let round_s = round.to_string();
    let max_s = max_rounds.to_string();
    Ok(Prompt {
        system: body(DIRECT_SYSTEM).to_string(),
        user: render_template(
            REFLECT_USER,
            &[
                ("round", &round_s),
                ("max_rounds", &max_s),
                ("statement", body(&problem.statement)),
                ("attempt", body(attempt)),
                ("feedback", &feedback),
            ],
        ),
        one_shot: None,
        tag: PromptTag::Reflect,
    })
}
