//! Self-reflection: regenerate a failing program with the judge's feedback
//! until it passes or the round cap is reached. Needs `python3` on PATH.

use std::sync::Arc;

use mot_harness::corpus::{Problem, Split, TestCase};
use mot_harness::evaluate::self_reflect;
use mot_harness::llm::{LlmClient, ProviderConfig, Scripted, ScriptedProvider};
use mot_harness::sandbox::{JudgeOptions, JudgePool, ResourceLimits, Runner};

fn main() {
    let problem = Problem::new(
        "max",
        "Print the largest of the given integers.",
        Split::Test,
    )
    .with_tests(vec![
        TestCase::new("3 9 2\n", "9\n"),
        TestCase::new("-1 -7\n", "-1\n"),
    ]);
    let script = vec![
        Scripted::Reply("```python\nprint(input().split()[0])\n```".into()),
        Scripted::Reply("```python\nprint(sorted(input().split())[-1])\n```".into()),
        Scripted::Reply("```python\nprint(max(map(int, input().split())))\n```".into()),
    ];
    let client = LlmClient::new(
        Arc::new(ScriptedProvider::echo().with_script(script)),
        ProviderConfig::default(),
    )
    .unwrap();
    let judge = JudgePool::new(
        1,
        Runner::default(),
        ResourceLimits::default(),
        JudgeOptions::default(),
    );

    let trace = self_reflect(&problem, &client, &judge, 5).unwrap();
    for r in &trace.rounds {
        println!(
            "round {}: passed={} matched={:?}",
            r.round, r.verdict.passed, r.verdict.matched
        );
    }
    println!(
        "solved at {:?} after {} reflection(s)",
        trace.solved_at,
        trace.reflections()
    );
}
