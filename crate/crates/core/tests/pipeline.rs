mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use common::fixture;
use mot_harness::corpus::{problem_to_json_line, Difficulty, Problem, Split, TestCase};
use mot_harness::pipeline::{
    cmd_analyze, cmd_evaluate, cmd_reflect, cmd_transform, CandidateSource, Context, Overrides,
    PipelineConfig,
};
use mot_harness::validator::{DataType, Marker};
use serde_json::json;

const OUTLINE: &str = "```python\ndef solve(line):\n    \"\"\"Answer for one input line.\n\n    Args:\n        line (str)\n    Returns:\n        int\n    \"\"\"\n```\n";

fn mot_reply(expr: &str) -> String {
    let fin = format!(
        "```python\ndef solve(line):\n    \"\"\"Answer for one input line.\"\"\"\n    a, b = map(int, line.split())\n    return {expr}\n\n\nprint(solve(input()))\n```\n"
    );
    format!("### STEP 1\n{OUTLINE}\n### STEP 2\n{fin}")
}

struct Workspace {
    dir: tempfile::TempDir,
}

impl Workspace {
    fn new() -> Self {
        Self {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.dir.path().join(rel)
    }

    fn corpus(&self, name: &str, problems: &[Problem]) -> PathBuf {
        let text: String = problems
            .iter()
            .map(|p| problem_to_json_line(p) + "\n")
            .collect();
        let p = self.path(name);
        fs::write(&p, text).unwrap();
        p
    }

    fn mock(&self, rules: serde_json::Value) -> PathBuf {
        let d = self.path("mock");
        fs::create_dir_all(&d).unwrap();
        fs::write(d.join("mock.json"), json!({ "rules": rules }).to_string()).unwrap();
        d
    }

    fn context(&self, edit: impl FnOnce(&mut PipelineConfig)) -> Context {
        let mut cfg = PipelineConfig {
            outdir: self.path("out"),
            workers: 2,
            ..Default::default()
        };
        edit(&mut cfg);
        let overrides = Overrides {
            mock_provider: self
                .path("mock")
                .join("mock.json")
                .is_file()
                .then(|| self.path("mock")),
            ..Default::default()
        };
        Context::new(cfg, overrides).unwrap()
    }
}

fn arithmetic(id: &str, op: &str, difficulty: Difficulty, split: Split) -> Problem {
    let (sym, f, task): (&str, fn(i64, i64) -> i64, &str) = match op {
        "add" => ("+", |a, b| a + b, "read a and b, print their sum."),
        "sub" => (
            "-",
            |a, b| a - b,
            "subtract the second integer from the first and output the difference.",
        ),
        _ => (
            "*",
            |a, b| a * b,
            "multiply two whole numbers given on one line, writing the product.",
        ),
    };
    let tests = [(2, 3), (-4, 7)]
        .iter()
        .map(|&(a, b)| TestCase::new(format!("{a} {b}\n"), format!("{}\n", f(a, b))))
        .collect();
    Problem::new(id, format!("Task {id}: {task}"), split)
        .with_tests(tests)
        .with_solutions(vec![format!(
            "a, b = map(int, input().split())\nprint(a {sym} b)\n"
        )])
        .with_difficulty(difficulty)
        .with_source("apps")
}

fn three_train(ws: &Workspace) -> PathBuf {
    ws.corpus(
        "train.jsonl",
        &[
            arithmetic("A", "add", Difficulty::Introductory, Split::Train),
            arithmetic("B", "sub", Difficulty::Interview, Split::Train),
            arithmetic("C", "mul", Difficulty::Competition, Split::Train),
        ],
    )
}

fn lines(path: &Path) -> Vec<serde_json::Value> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn transform_all_valid() {
    let ws = Workspace::new();
    let train = three_train(&ws);
    ws.mock(json!([
        {"contains": ["Task A:"], "response": mot_reply("a + b")},
        {"contains": ["Task B:"], "response": mot_reply("a - b")},
        {"contains": ["Task C:"], "response": mot_reply("a * b")},
    ]));
    let ctx = ws.context(|c| {
        c.corpus.train = Some(train);
        c.data_types = vec![DataType::Mot];
    });
    let s = cmd_transform(&ctx).unwrap();
    assert_eq!((s.accepted, s.rejected, s.failed), (3, 0, 0));
    assert_eq!(lines(&ws.path("out/transform/mot.jsonl")).len(), 3);
    assert_eq!(s.filter_rate[0].rate, Some(100));
    let csv = fs::read_to_string(ws.path("out/transform/filter_rate.csv")).unwrap();
    assert_eq!(
        csv,
        "source,data_type,pre_count,post_count,passing_rate\napps,mot,3,3,100%\n"
    );
    assert!(ws.path("out/transform/manifest.json").is_file());
}

#[test]
fn transform_two_main_blocks_is_m3() {
    let ws = Workspace::new();
    let train = three_train(&ws);
    let doubled = mot_reply("a - b") + "\n```python\nprint(0)\n```\n";
    ws.mock(json!([
        {"contains": ["Task A:"], "response": mot_reply("a + b")},
        {"contains": ["Task B:"], "response": doubled},
        {"contains": ["Task C:"], "response": mot_reply("a * b")},
    ]));
    let ctx = ws.context(|c| {
        c.corpus.train = Some(train);
        c.data_types = vec![DataType::Mot];
    });
    let s = cmd_transform(&ctx).unwrap();
    assert_eq!((s.accepted, s.rejected), (2, 1));
    let rejected = lines(&ws.path("out/transform/rejected.jsonl"));
    assert_eq!(rejected[0]["problem_id"], "B");
    assert_eq!(rejected[0]["marker"], json!(Marker::M3MainCodeCount));
    assert_eq!(s.filter_rate[0].rate, Some(67));
}

#[test]
fn transform_two_call_and_clean() {
    let ws = Workspace::new();
    let train = ws.corpus(
        "train.jsonl",
        &[arithmetic(
            "A",
            "add",
            Difficulty::Introductory,
            Split::Train,
        )],
    );
    let fin = "```python\ndef solve(line):\n    \"\"\"Answer.\"\"\"\n    a, b = map(int, line.split())\n    return a + b\n\n\nprint(solve(input()))\n```\n";
    ws.mock(json!([
        {"contains": ["Task A:", "First, outline"], "response": OUTLINE},
        {"contains": ["Task A:", "Sub-module outline:"], "response": fin},
        {"contains": ["Task A:", "with these goals"], "response": "```python\n# sum\na, b = map(int, input().split())\nprint(a + b)\n```"},
    ]));
    let ctx = ws.context(|c| {
        c.corpus.train = Some(train);
        c.two_call = true;
    });
    let s = cmd_transform(&ctx).unwrap();
    assert_eq!((s.accepted, s.rejected, s.failed), (2, 0, 0), "{s:?}");
    let mot = lines(&ws.path("out/transform/mot.jsonl"));
    assert!(mot[0]["response"].as_str().unwrap().contains("### STEP 2"));
}

#[test]
fn transform_provider_failure_is_data() {
    let ws = Workspace::new();
    let train = ws.corpus(
        "train.jsonl",
        &[arithmetic(
            "A",
            "add",
            Difficulty::Introductory,
            Split::Train,
        )],
    );
    ws.mock(json!([]));
    let ctx = ws.context(|c| {
        c.corpus.train = Some(train);
        c.data_types = vec![DataType::Mot];
        c.provider.retry_limit = 0;
    });
    let s = cmd_transform(&ctx).unwrap();
    assert_eq!((s.accepted, s.failed), (0, 1));
    assert!(s.filter_rate.is_empty());
    assert_eq!(
        lines(&ws.path("out/transform/rejected.jsonl"))[0]["marker"],
        json!(null)
    );
}

#[test]
fn transform_empty_corpus() {
    let ws = Workspace::new();
    let train = ws.corpus("train.jsonl", &[]);
    ws.mock(json!([]));
    let ctx = ws.context(|c| c.corpus.train = Some(train));
    let s = cmd_transform(&ctx).unwrap();
    assert_eq!((s.items, s.accepted), (0, 0));
    for f in ["mot.jsonl", "clean.jsonl", "rejected.jsonl"] {
        assert_eq!(
            fs::read_to_string(ws.path("out/transform").join(f)).unwrap(),
            ""
        );
    }
}

#[test]
fn transform_drops_holdout_duplicates() {
    let ws = Workspace::new();
    let train = three_train(&ws);
    let mut dup = arithmetic("A", "add", Difficulty::Introductory, Split::Test);
    dup.id = "held".into();
    let test = ws.corpus("test.jsonl", &[dup]);
    ws.mock(json!([{"contains": ["Task"], "response": mot_reply("a * b")}]));
    let ctx = ws.context(|c| {
        c.corpus.train = Some(train);
        c.corpus.test = Some(test);
        c.data_types = vec![DataType::Mot];
    });
    let s = cmd_transform(&ctx).unwrap();
    assert_eq!(s.dedup.removed.len(), 1);
    assert_eq!(s.dedup.removed[0].train_id, "A");
    assert_eq!(s.items, 2);
}

#[test]
fn evaluate_references_self_consistent() {
    let ws = Workspace::new();
    let ctx = ws.context(|c| c.corpus.test = Some(fixture("selfcheck/test.jsonl")));
    let s = cmd_evaluate(&ctx, &CandidateSource::References).unwrap();
    assert_eq!(s.report.pass_at("all", 1), Some(1.0));
    assert_eq!(s.skipped_untestable, vec!["untestable-a", "untestable-b"]);
    assert_eq!(s.problems, 18);
}

#[test]
fn evaluate_unknown_ids_fail() {
    let ws = Workspace::new();
    let test = ws.corpus(
        "test.jsonl",
        &[arithmetic(
            "A",
            "add",
            Difficulty::Introductory,
            Split::Test,
        )],
    );
    let cands = ws.path("cands.json");
    fs::write(
        &cands,
        r#"{"A": ["print(5)"], "ghost": ["print(1)"], "phantom": []}"#,
    )
    .unwrap();
    let ctx = ws.context(|c| c.corpus.test = Some(test));
    let err = cmd_evaluate(&ctx, &CandidateSource::File(cands))
        .unwrap_err()
        .to_string();
    assert!(err.contains("ghost") && err.contains("phantom"), "{err}");
    let missing = cmd_evaluate(&ctx, &CandidateSource::File(ws.path("nope.json")));
    assert!(missing.is_err());
}

/// Four problems, one candidate each, the second and fourth wrong.
fn evaluated(ws: &Workspace, all_wrong: bool) -> Context {
    let problems = [
        arithmetic("A", "add", Difficulty::Introductory, Split::Test),
        arithmetic("B", "sub", Difficulty::Introductory, Split::Test),
        arithmetic("C", "mul", Difficulty::Competition, Split::Test),
        arithmetic("D", "add", Difficulty::Competition, Split::Test),
    ];
    let test = ws.corpus("test.jsonl", &problems);
    let good = |p: &Problem| p.solutions[0].clone();
    let cands = if all_wrong {
        json!({"A": ["print(0)"], "B": ["print(0)"], "C": ["print(0)"], "D": ["print(0)"]})
    } else {
        json!({"A": [good(&problems[0])], "B": ["print(0)"], "C": [good(&problems[2])], "D": ["print(0)"]})
    };
    fs::write(ws.path("cands.json"), cands.to_string()).unwrap();
    let ctx = ws.context(|c| {
        c.corpus.test = Some(test);
        c.max_reflection_rounds = 1;
    });
    let s = cmd_evaluate(&ctx, &CandidateSource::File(ws.path("cands.json"))).unwrap();
    let expect = if all_wrong { 0.0 } else { 0.5 };
    assert_eq!(s.report.pass_at("all", 1), Some(expect));
    ctx
}

#[test]
fn evaluate_report_matches_verdict_pattern() {
    let ws = Workspace::new();
    evaluated(&ws, false);
    let csv = fs::read_to_string(ws.path("out/evaluate/pass_at_k.csv")).unwrap();
    assert_eq!(
        csv,
        "group,k,problems,pass_at_k\nintroductory,1,2,0.500000\ncompetition,1,2,0.500000\nall,1,4,0.500000\n"
    );
}

#[test]
fn reflect_with_cap_one() {
    let ws = Workspace::new();
    ws.mock(json!([
        {"contains": ["Task B:", "Reflection round 1"], "response": "```python\na, b = map(int, input().split())\nprint(a - b)\n```"},
        {"contains": ["Task"], "response": "```python\nprint(0)\n```"},
    ]));
    let ctx = evaluated(&ws, false);
    let s = cmd_reflect(&ctx).unwrap();
    assert_eq!(s.traces.len(), 2);
    assert!(s.traces.iter().all(|t| t.rounds.len() <= 2));
    let b = s.traces.iter().find(|t| t.problem_id == "B").unwrap();
    assert_eq!(b.solved_at, Some(1));
    let all = s.comparison.last().unwrap();
    assert_eq!((all.solved_before, all.solved_after), (2, 3));
}

#[test]
fn reflect_noop_without_failures() {
    let ws = Workspace::new();
    let test = ws.corpus(
        "test.jsonl",
        &[arithmetic(
            "A",
            "add",
            Difficulty::Introductory,
            Split::Test,
        )],
    );
    let ctx = ws.context(|c| c.corpus.test = Some(test));
    cmd_evaluate(&ctx, &CandidateSource::References).unwrap();
    let s = cmd_reflect(&ctx).unwrap();
    assert!(s.traces.is_empty());
    assert_eq!(
        fs::read_to_string(ws.path("out/reflect/traces.jsonl")).unwrap(),
        ""
    );
}

#[test]
fn reflect_requires_evaluate_output() {
    let ws = Workspace::new();
    let test = ws.corpus("test.jsonl", &[]);
    let ctx = ws.context(|c| c.corpus.test = Some(test));
    assert!(cmd_reflect(&ctx).is_err());
}

#[test]
fn analyze_writes_three_profiles() {
    let ws = Workspace::new();
    let ctx = evaluated(&ws, false);
    cmd_analyze(&ctx, None).unwrap();
    let f = fs::read_to_string(ws.path("out/analyze/function_profile.csv")).unwrap();
    assert_eq!(
        f,
        "difficulty,bin,count,passed,accuracy\nintroductory,0,2,1,0.500000\ncompetition,0,2,1,0.500000\nall,0,4,2,0.500000\n"
    );
    let mi = fs::read_to_string(ws.path("out/analyze/mi_profile.csv")).unwrap();
    assert!(mi.starts_with("split,difficulty,passed_candidates,mean_mi\n"));
    let r = fs::read_to_string(ws.path("out/analyze/resource_profile.csv")).unwrap();
    assert_eq!(r.lines().count(), 4);
}

#[test]
fn analyze_without_passes_reports_absent_means() {
    let ws = Workspace::new();
    let ctx = evaluated(&ws, true);
    let report = cmd_analyze(&ctx, None).unwrap();
    assert!(report.mi_profile.iter().all(|r| r.mean_mi.is_none()));
    assert!(report.resource_profile.iter().all(|r| r.avg_time.is_none()));
    let r = fs::read_to_string(ws.path("out/analyze/resource_profile.csv")).unwrap();
    assert!(r.contains("all,0,,\n"), "{r}");
}

#[test]
fn analyze_rejects_malformed_results() {
    let ws = Workspace::new();
    let ctx = evaluated(&ws, false);
    let path = ws.path("out/evaluate/results.jsonl");
    let mut text = fs::read_to_string(&path).unwrap();
    text = text.replacen('\n', "\n{not json\n", 1);
    fs::write(&path, text).unwrap();
    let err = format!("{:#}", cmd_analyze(&ctx, None).unwrap_err());
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn cli_exit_codes() {
    let ws = Workspace::new();
    let test = ws.corpus(
        "test.jsonl",
        &[arithmetic(
            "A",
            "add",
            Difficulty::Introductory,
            Split::Test,
        )],
    );
    let cfg = ws.path("cfg.json");
    fs::write(
        &cfg,
        json!({"corpus": {"test": test}, "outdir": ws.path("out"), "workers": 1}).to_string(),
    )
    .unwrap();
    let bin = env!("CARGO_BIN_EXE_mot-harness");
    let run = |args: &[&str]| {
        Command::new(bin)
            .arg("--config")
            .arg(&cfg)
            .args(args)
            .output()
            .unwrap()
    };

    let missing = run(&["evaluate", "--candidates", "/nonexistent/candidates.json"]);
    assert!(!missing.status.success());
    assert!(String::from_utf8_lossy(&missing.stderr).contains("candidates"));

    let ok = run(&["evaluate", "--references"]);
    assert!(
        ok.status.success(),
        "{}",
        String::from_utf8_lossy(&ok.stderr)
    );
    assert!(String::from_utf8_lossy(&ok.stdout).contains("100.00%"));

    let stats = run(&["stats"]);
    assert!(stats.status.success());
    assert!(ws.path("out/stats/stats.csv").is_file());
}
