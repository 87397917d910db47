#![allow(dead_code)]

use std::path::PathBuf;

use mot_harness::corpus::{Problem, Split, TestCase};
use mot_harness::sandbox::{JudgeOptions, JudgePool, ResourceLimits, Runner};
use mot_harness::validator::{assess_functional, assess_response, AssessmentResult};

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(rel)
}

pub fn read_fixture(rel: &str) -> String {
    std::fs::read_to_string(fixture(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

pub fn add_problem() -> Problem {
    Problem::new(
        "add",
        "Read two integers a and b and print a + b.",
        Split::Train,
    )
    .with_tests(vec![
        TestCase::new("1 2\n", "3\n"),
        TestCase::new("-4 10\n", "6\n"),
    ])
    .with_solutions(vec![
        "a, b = map(int, input().split())\nprint(a + b)\n".into()
    ])
}

pub fn pool(workers: usize, wall_secs: f64) -> JudgePool {
    JudgePool::new(
        workers,
        Runner::default(),
        ResourceLimits::default().with_wall_time(std::time::Duration::from_secs_f64(wall_secs)),
        JudgeOptions::default(),
    )
}

/// Structure first, then execution, as the transform command does.
pub fn assess_file(name: &str) -> AssessmentResult {
    let raw = read_fixture(&format!("validator/{name}"));
    let (sol, result) = assess_response(&raw);
    if !result.accepted() {
        return result;
    }
    assess_functional(&sol.unwrap(), &add_problem(), &pool(2, 1.0)).unwrap()
}
