//! The unbiased pass@k estimator and its aggregation over a small corpus.

use mot_harness::corpus::{Corpus, Difficulty, Problem, Split};
use mot_harness::evaluate::{
    evaluate_corpus, pass_at_k, AggregateOptions, Candidate, GenerationRecord, VerdictSummary,
};
use mot_harness::metrics::analyze;

fn candidate(passed: bool) -> Candidate {
    Candidate {
        code: String::new(),
        verdict: VerdictSummary {
            passed,
            matched: vec![passed],
            statuses: Vec::new(),
            first_failure: (!passed).then_some(0),
            avg_time: 0.0,
            avg_peak_memory: 0.0,
        },
        metrics: analyze(""),
    }
}

fn main() {
    for (n, c, k) in [(10, 3, 1), (10, 3, 5), (5, 0, 2), (5, 4, 2)] {
        println!(
            "pass@{k} with n={n} c={c}: {:.4}",
            pass_at_k(n, c, k).unwrap()
        );
    }

    let problems = [
        ("a", Difficulty::Introductory),
        ("b", Difficulty::Introductory),
        ("c", Difficulty::Competition),
    ]
    .map(|(id, d)| Problem::new(id, format!("problem {id}"), Split::Test).with_difficulty(d));
    let corpus = Corpus::new(problems.to_vec(), "inline").unwrap();
    let records = vec![
        GenerationRecord::new("a", vec![candidate(true), candidate(true)]),
        GenerationRecord::new("b", vec![candidate(false), candidate(true)]),
        GenerationRecord::new("c", vec![candidate(false), candidate(false)]),
    ];
    let report = evaluate_corpus(&corpus, &records, &[1, 2], &AggregateOptions::default()).unwrap();
    for row in &report.pass_at_k {
        println!(
            "{:<14} k={} problems={} {:?}",
            row.group, row.k, row.problems, row.value
        );
    }
}
