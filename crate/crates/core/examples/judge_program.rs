//! Judge candidate programs against a problem's tests under resource limits.
//! Needs `python3` on PATH.

use std::time::Duration;

use mot_harness::corpus::{Problem, Split, TestCase};
use mot_harness::sandbox::{JudgeOptions, JudgePool, ResourceLimits, Runner, MIB};

fn main() {
    let problem = Problem::new("double", "Print twice the input.", Split::Test).with_tests(vec![
        TestCase::new("2\n", "4\n"),
        TestCase::new("21\n", "42\n"),
        TestCase::new("-5\n", "-10\n"),
    ]);
    let limits = ResourceLimits::default()
        .with_wall_time(Duration::from_secs(1))
        .with_memory(256 * MIB);
    let pool = JudgePool::new(2, Runner::default(), limits, JudgeOptions::default());

    let candidates = [
        ("correct", "print(2 * int(input()))"),
        ("wrong", "print(int(input()) + 2)"),
        ("crash", "print(1 // 0)"),
        ("spin", "while True:\n    pass"),
    ];
    for (name, code) in candidates {
        let v = pool.judge_one(code, &problem).unwrap();
        let statuses: Vec<&str> = v
            .per_test
            .iter()
            .map(|o| o.report.status.as_str())
            .collect();
        println!(
            "{name:<8} passed={:<5} matched={:?} statuses={statuses:?}",
            v.passed,
            v.matched()
        );
    }
}
