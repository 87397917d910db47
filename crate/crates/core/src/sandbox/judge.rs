use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    compare_output, run_once, ComparePolicy, ExecutionReport, ResourceLimits, RunStatus, Runner,
    SandboxError,
};
use crate::corpus::Problem;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct JudgeOptions {
    pub policy: ComparePolicy,
    /// Stop at the first failing test.
    pub fail_fast: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub report: ExecutionReport,
    pub matched: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgeVerdict {
    pub per_test: Vec<TestOutcome>,
    pub passed: bool,
    pub first_failure: Option<usize>,
    /// Mean wall seconds over executed tests.
    pub avg_time: f64,
    /// Mean peak resident bytes over executed tests.
    pub avg_peak_memory: f64,
}

impl JudgeVerdict {
    fn from_outcomes(per_test: Vec<TestOutcome>) -> Self {
        let first_failure = per_test
            .iter()
            .position(|t| !t.matched || t.report.status != RunStatus::Ok);
        let n = per_test.len().max(1) as f64;
        let avg_time = per_test
            .iter()
            .map(|t| t.report.wall_time_used)
            .sum::<f64>()
            / n;
        let avg_peak_memory = per_test
            .iter()
            .map(|t| t.report.peak_memory as f64)
            .sum::<f64>()
            / n;
        Self {
            passed: first_failure.is_none() && !per_test.is_empty(),
            first_failure,
            per_test,
            avg_time,
            avg_peak_memory,
        }
    }

    pub fn matched(&self) -> Vec<bool> {
        self.per_test.iter().map(|t| t.matched).collect()
    }

    /// The failing test and its execution report, if any.
    pub fn first_failing(&self) -> Option<(usize, &TestOutcome)> {
        self.first_failure.map(|i| (i, &self.per_test[i]))
    }
}

/// Run `program` on every test of `problem`. A test passes when the run
/// ends with status `ok` and the output matches.
pub fn judge(
    runner: &Runner,
    program: &str,
    problem: &Problem,
    limits: &ResourceLimits,
    options: &JudgeOptions,
) -> Result<JudgeVerdict, SandboxError> {
    if problem.untestable || problem.tests.is_empty() {
        return Err(SandboxError::Untestable(problem.id.clone()));
    }
    let mut outcomes = Vec::with_capacity(problem.tests.len());
    for test in &problem.tests {
        let report = run_once(runner, program, &test.input, limits)?;
        let matched = report.status == RunStatus::Ok
            && compare_output(&test.expected_output, &report.stdout, options.policy);
        let failed = !matched;
        outcomes.push(TestOutcome { report, matched });
        if failed && options.fail_fast {
            break;
        }
    }
    Ok(JudgeVerdict::from_outcomes(outcomes))
}

/// Judges many (program, problem) pairs on a fixed number of worker threads.
/// Results come back in input order regardless of completion order.
#[derive(Debug, Clone)]
pub struct JudgePool {
    pub workers: usize,
    pub runner: Runner,
    pub limits: ResourceLimits,
    pub options: JudgeOptions,
}

impl JudgePool {
    pub fn new(
        workers: usize,
        runner: Runner,
        limits: ResourceLimits,
        options: JudgeOptions,
    ) -> Self {
        Self {
            workers: workers.max(1),
            runner,
            limits,
            options,
        }
    }

    pub fn judge_one(
        &self,
        program: &str,
        problem: &Problem,
    ) -> Result<JudgeVerdict, SandboxError> {
        judge(&self.runner, program, problem, &self.limits, &self.options)
    }

    pub fn judge_many(
        &self,
        jobs: &[(&str, &Problem)],
    ) -> Result<Vec<Result<JudgeVerdict, SandboxError>>, SandboxError> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| SandboxError::Pool(e.to_string()))?;
        Ok(pool.install(|| {
            jobs.par_iter()
                .map(|(program, problem)| self.judge_one(program, problem))
                .collect()
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Split, TestCase};

    fn problem(tests: Vec<TestCase>) -> Problem {
        Problem::new("p", "", Split::Test).with_tests(tests)
    }

    #[test]
    fn self_consistent_solution_passes() {
        let p = problem(vec![
            TestCase::new("2 3\n", "5\n"),
            TestCase::new("10 -4\n", "6\n"),
        ]);
        let v = judge(
            &Runner::default(),
            "a, b = map(int, input().split())\nprint(a + b)\n",
            &p,
            &ResourceLimits::default(),
            &JudgeOptions::default(),
        )
        .unwrap();
        assert!(v.passed);
        assert_eq!(v.first_failure, None);
        assert_eq!(v.matched(), vec![true, true]);
        assert!(v.avg_time > 0.0);
    }

    #[test]
    fn constant_program_fails_at_first_mismatch() {
        let p = problem(vec![
            TestCase::new("", "2\n"),
            TestCase::new("", "1\n"),
            TestCase::new("", "3\n"),
        ]);
        let v = judge(
            &Runner::default(),
            "print(1)\n",
            &p,
            &ResourceLimits::default(),
            &JudgeOptions::default(),
        )
        .unwrap();
        assert!(!v.passed);
        assert_eq!(v.first_failure, Some(0));
        assert_eq!(v.matched(), vec![false, true, false]);

        let ff = JudgeOptions {
            fail_fast: true,
            ..JudgeOptions::default()
        };
        let v = judge(
            &Runner::default(),
            "print(1)\n",
            &p,
            &ResourceLimits::default(),
            &ff,
        )
        .unwrap();
        assert_eq!(v.per_test.len(), 1);
    }

    #[test]
    fn untestable_problem_is_rejected() {
        let p = problem(vec![]);
        let err = judge(
            &Runner::default(),
            "print(1)",
            &p,
            &ResourceLimits::default(),
            &JudgeOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, SandboxError::Untestable(_)));
        assert!(!err.is_infrastructure());
    }
}
