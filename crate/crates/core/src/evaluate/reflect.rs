use serde::{Deserialize, Serialize};

use super::VerdictSummary;
use crate::corpus::Problem;
use crate::llm::LlmClient;
use crate::promptgen::{build_direct_prompt, build_reflection_prompt, extract_code};
use crate::sandbox::{JudgePool, SandboxError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReflectionRound {
    /// 0 for the initial generation, then one per reflection.
    pub round: usize,
    pub prompt: String,
    pub completion: String,
    pub code: String,
    pub verdict: VerdictSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReflectionTrace {
    pub problem_id: String,
    pub max_rounds: usize,
    pub rounds: Vec<ReflectionRound>,
    pub solved_at: Option<usize>,
    /// Provider or prompt failure that ended the loop early.
    pub error: Option<String>,
}

impl ReflectionTrace {
    /// Rounds after the initial generation.
    pub fn reflections(&self) -> usize {
        self.rounds.len().saturating_sub(1)
    }

    pub fn solved(&self) -> bool {
        self.solved_at.is_some()
    }
}

/// Generate, judge, and on failure reflect up to `max_rounds` times.
///
/// Provider failures end this problem's loop and are kept in the trace.
/// Sandbox infrastructure failures are returned as errors.
pub fn self_reflect(
    problem: &Problem,
    client: &LlmClient,
    judge: &JudgePool,
    max_rounds: usize,
) -> Result<ReflectionTrace, SandboxError> {
    let mut trace = ReflectionTrace {
        problem_id: problem.id.clone(),
        max_rounds,
        rounds: Vec::new(),
        solved_at: None,
        error: None,
    };
    let mut prompt = build_direct_prompt(problem);
    let mut round = 0;
    loop {
        let completion = match client.complete(&prompt) {
            Ok(c) => c,
            Err(e) => {
                trace.error = Some(e.to_string());
                break;
            }
        };
        let code = extract_code(&completion.text);
        let verdict = judge.judge_one(&code, problem)?;
        trace.rounds.push(ReflectionRound {
            round,
            prompt: prompt.transcript(),
            completion: completion.text,
            code: code.clone(),
            verdict: VerdictSummary::from(&verdict),
        });
        if verdict.passed {
            trace.solved_at = Some(round);
            break;
        }
        if round >= max_rounds {
            break;
        }
        round += 1;
        prompt = match build_reflection_prompt(problem, &code, &verdict, round, max_rounds) {
            Ok(p) => p,
            Err(e) => {
                trace.error = Some(e.to_string());
                break;
            }
        };
    }
    Ok(trace)
}
