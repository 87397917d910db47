//! Problem corpora in the APPS/CodeContests JSONL layout.
//!
//! One problem per line:
//!
//! ```text
//! {"id": str, "question": str, "solutions": [str],
//!  "input_output": {"inputs": [str], "outputs": [str]},
//!  "difficulty": str, "source": str}
//! ```
//!
//! A missing `input_output` marks the problem untestable. The upstream APPS
//! dump stores `solutions` and `input_output` as JSON-encoded strings; both
//! spellings are accepted on load, and `save_corpus` always writes the
//! structured form.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

/// Default cap on reference solutions taken per problem.
pub const DEFAULT_SOLUTION_CAP: usize = 100;

/// Default token-Jaccard threshold for train/holdout deduplication.
pub const DEFAULT_DEDUP_THRESHOLD: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Difficulty {
    Introductory,
    Interview,
    Competition,
    Unknown,
}

impl Difficulty {
    pub const ALL: [Difficulty; 4] = [
        Difficulty::Introductory,
        Difficulty::Interview,
        Difficulty::Competition,
        Difficulty::Unknown,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Difficulty::Introductory => "introductory",
            Difficulty::Interview => "interview",
            Difficulty::Competition => "competition",
            Difficulty::Unknown => "unknown",
        }
    }

    /// Lenient parse: anything unrecognised is `Unknown`.
    pub fn parse_lenient(s: &str) -> Difficulty {
        match s.trim().to_ascii_lowercase().as_str() {
            "introductory" => Difficulty::Introductory,
            "interview" => Difficulty::Interview,
            "competition" => Difficulty::Competition,
            _ => Difficulty::Unknown,
        }
    }
}

impl fmt::Display for Difficulty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Valid,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Valid => "valid",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "valid" | "validation" => Ok(Split::Valid),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestCase {
    pub input: String,
    pub expected_output: String,
}

impl TestCase {
    pub fn new(input: impl Into<String>, expected_output: impl Into<String>) -> Self {
        Self {
            input: input.into(),
            expected_output: expected_output.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    pub id: String,
    pub statement: String,
    pub solutions: Vec<String>,
    pub tests: Vec<TestCase>,
    pub difficulty: Difficulty,
    pub source: String,
    pub split: Split,
    /// Set when the record carried no I/O tests.
    pub untestable: bool,
}

impl Problem {
    pub fn new(id: impl Into<String>, statement: impl Into<String>, split: Split) -> Self {
        Self {
            id: id.into(),
            statement: statement.into(),
            solutions: Vec::new(),
            tests: Vec::new(),
            difficulty: Difficulty::Unknown,
            source: String::new(),
            split,
            untestable: true,
        }
    }

    pub fn with_tests(mut self, tests: Vec<TestCase>) -> Self {
        self.untestable = tests.is_empty();
        self.tests = tests;
        self
    }

    pub fn with_solutions(mut self, solutions: Vec<String>) -> Self {
        self.solutions = solutions;
        self
    }

    pub fn with_difficulty(mut self, difficulty: Difficulty) -> Self {
        self.difficulty = difficulty;
        self
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = source.into();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Corpus {
    pub problems: Vec<Problem>,
    pub provenance: String,
}

impl Corpus {
    pub fn new(problems: Vec<Problem>, provenance: impl Into<String>) -> Result<Self, CorpusError> {
        let mut seen: HashMap<&str, usize> = HashMap::new();
        for (i, p) in problems.iter().enumerate() {
            if p.id.is_empty() {
                return Err(CorpusError::EmptyId { index: i });
            }
            if let Some(first) = seen.insert(p.id.as_str(), i) {
                return Err(CorpusError::DuplicateId {
                    id: p.id.clone(),
                    first_line: first + 1,
                    second_line: i + 1,
                });
            }
        }
        Ok(Self {
            problems,
            provenance: provenance.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.problems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.problems.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Problem> {
        self.problems.iter().find(|p| p.id == id)
    }

    /// Id → problem lookup table.
    pub fn index(&self) -> HashMap<&str, &Problem> {
        self.problems.iter().map(|p| (p.id.as_str(), p)).collect()
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read corpus {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("duplicate problem id `{id}` on lines {first_line} and {second_line}")]
    DuplicateId {
        id: String,
        first_line: usize,
        second_line: usize,
    },
    #[error("problem at position {index} has an empty id")]
    EmptyId { index: usize },
}

/// A line of the input that could not be turned into a problem.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LineDiagnostic {
    /// 1-based line number.
    pub line: usize,
    pub message: String,
}

impl fmt::Display for LineDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, Clone)]
pub struct LoadedCorpus {
    pub corpus: Corpus,
    pub diagnostics: Vec<LineDiagnostic>,
}

#[derive(Debug, Serialize, Deserialize)]
struct IoSpec {
    inputs: Vec<String>,
    outputs: Vec<String>,
}

#[derive(Debug, Serialize)]
struct ProblemRecord<'a> {
    id: &'a str,
    question: &'a str,
    solutions: &'a [String],
    #[serde(skip_serializing_if = "Option::is_none")]
    input_output: Option<IoSpec>,
    difficulty: &'static str,
    source: &'a str,
}

/// Accepts either a JSON value of type `T` or a string containing one.
fn decode_nested<T: serde::de::DeserializeOwned>(value: Value, field: &str) -> Result<T, String> {
    let value = match value {
        Value::String(s) => serde_json::from_str::<Value>(&s)
            .map_err(|e| format!("field `{field}` holds invalid embedded JSON: {e}"))?,
        v => v,
    };
    serde_json::from_value(value).map_err(|e| format!("field `{field}`: {e}"))
}

fn parse_problem_line(text: &str, split: Split) -> Result<Problem, String> {
    let value: Value = serde_json::from_str(text).map_err(|e| format!("invalid JSON: {e}"))?;
    let Value::Object(mut obj) = value else {
        return Err("expected a JSON object".into());
    };

    let id = match obj.remove("id") {
        Some(Value::String(s)) if !s.is_empty() => s,
        Some(Value::Number(n)) => n.to_string(),
        Some(Value::String(_)) => return Err("field `id` is empty".into()),
        Some(_) => return Err("field `id` must be a string".into()),
        None => return Err("missing field `id`".into()),
    };
    let statement = match obj.remove("question") {
        Some(Value::String(s)) => s,
        Some(_) => return Err("field `question` must be a string".into()),
        None => return Err("missing field `question`".into()),
    };
    let solutions: Vec<String> = match obj.remove("solutions") {
        None | Some(Value::Null) => Vec::new(),
        Some(Value::String(s)) if s.is_empty() => Vec::new(),
        Some(v) => decode_nested(v, "solutions")?,
    };
    let io: Option<IoSpec> = match obj.remove("input_output") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) if s.is_empty() => None,
        Some(v) => Some(decode_nested(v, "input_output")?),
    };
    let tests = match io {
        None => Vec::new(),
        Some(io) => {
            if io.inputs.len() != io.outputs.len() {
                return Err(format!(
                    "input_output has {} inputs but {} outputs",
                    io.inputs.len(),
                    io.outputs.len()
                ));
            }
            io.inputs
                .into_iter()
                .zip(io.outputs)
                .map(|(input, expected_output)| TestCase {
                    input,
                    expected_output,
                })
                .collect()
        }
    };
    let difficulty = match obj.remove("difficulty") {
        Some(Value::String(s)) => Difficulty::parse_lenient(&s),
        _ => Difficulty::Unknown,
    };
    let source = match obj.remove("source") {
        Some(Value::String(s)) => s,
        _ => String::new(),
    };

    Ok(Problem {
        id,
        statement,
        solutions,
        untestable: tests.is_empty(),
        tests,
        difficulty,
        source,
        split,
    })
}

/// Parse JSONL text. Malformed lines become diagnostics; a repeated id is fatal.
pub fn parse_corpus(
    text: &str,
    split: Split,
    provenance: &str,
) -> Result<LoadedCorpus, CorpusError> {
    let mut problems = Vec::new();
    let mut diagnostics = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();

    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        match parse_problem_line(line, split) {
            Ok(problem) => {
                if let Some(&first_line) = seen.get(&problem.id) {
                    return Err(CorpusError::DuplicateId {
                        id: problem.id,
                        first_line,
                        second_line: lineno,
                    });
                }
                seen.insert(problem.id.clone(), lineno);
                problems.push(problem);
            }
            Err(message) => diagnostics.push(LineDiagnostic {
                line: lineno,
                message,
            }),
        }
    }

    Ok(LoadedCorpus {
        corpus: Corpus {
            problems,
            provenance: provenance.to_string(),
        },
        diagnostics,
    })
}

pub fn load_corpus(path: &Path, split: Split) -> Result<LoadedCorpus, CorpusError> {
    let text = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_corpus(&text, split, &path.display().to_string())
}

/// Serialize one problem in the on-disk schema (no trailing newline).
pub fn problem_to_json_line(problem: &Problem) -> String {
    let io = (!problem.untestable).then(|| IoSpec {
        inputs: problem.tests.iter().map(|t| t.input.clone()).collect(),
        outputs: problem
            .tests
            .iter()
            .map(|t| t.expected_output.clone())
            .collect(),
    });
    let record = ProblemRecord {
        id: &problem.id,
        question: &problem.statement,
        solutions: &problem.solutions,
        input_output: io,
        difficulty: problem.difficulty.as_str(),
        source: &problem.source,
    };
    serde_json::to_string(&record).expect("problem record serializes")
}

pub fn write_corpus(corpus: &Corpus, out: &mut impl Write) -> std::io::Result<()> {
    for p in &corpus.problems {
        writeln!(out, "{}", problem_to_json_line(p))?;
    }
    Ok(())
}

pub fn save_corpus(corpus: &Corpus, path: &Path) -> Result<(), CorpusError> {
    let io_err = |source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = fs::File::create(path).map_err(io_err)?;
    let mut w = BufWriter::new(file);
    write_corpus(corpus, &mut w).map_err(io_err)?;
    w.flush().map_err(io_err)
}

/// The first `cap` reference solutions, in stored order.
pub fn select_solutions(problem: &Problem, cap: usize) -> &[String] {
    let cap = cap.max(1);
    &problem.solutions[..problem.solutions.len().min(cap)]
}

/// Lowercase, drop punctuation, collapse whitespace.
pub fn normalize_statement(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for word in text
        .chars()
        .filter(|c| !c.is_ascii_punctuation() && !is_unicode_punct(*c))
        .collect::<String>()
        .to_lowercase()
        .split_whitespace()
    {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

fn is_unicode_punct(c: char) -> bool {
    matches!(
        c,
        '\u{2018}'..='\u{201F}' | '\u{2013}' | '\u{2014}' | '\u{2026}' | '\u{00AB}' | '\u{00BB}'
    )
}

fn token_set(normalized: &str) -> HashSet<&str> {
    normalized.split(' ').filter(|t| !t.is_empty()).collect()
}

/// Word-set Jaccard similarity of two statements after normalization.
pub fn statement_similarity(a: &str, b: &str) -> f64 {
    let (na, nb) = (normalize_statement(a), normalize_statement(b));
    if na == nb {
        return 1.0;
    }
    let (sa, sb) = (token_set(&na), token_set(&nb));
    let inter = sa.intersection(&sb).count();
    let union = sa.len() + sb.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchKind {
    ExactNormalized,
    Jaccard,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DedupRemoval {
    pub train_id: String,
    pub holdout_id: String,
    pub similarity: f64,
    pub kind: MatchKind,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DedupReport {
    pub threshold: f64,
    pub examined: usize,
    pub removed: Vec<DedupRemoval>,
}

#[derive(Debug, Error)]
#[error("dedup threshold must lie in (0, 1], got {0}")]
pub struct ThresholdError(pub f64);

/// Drop every training problem that duplicates a holdout statement, either
/// exactly after normalization or with token Jaccard ≥ `threshold`.
pub fn dedup_against(
    train: &Corpus,
    holdout: &Corpus,
    threshold: f64,
) -> Result<(Corpus, DedupReport), ThresholdError> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(ThresholdError(threshold));
    }

    let normalized: Vec<String> = holdout
        .problems
        .iter()
        .map(|p| normalize_statement(&p.statement))
        .collect();
    let mut exact: HashMap<&str, usize> = HashMap::new();
    for (i, n) in normalized.iter().enumerate() {
        exact.entry(n.as_str()).or_insert(i);
    }
    let sets: Vec<HashSet<&str>> = normalized.iter().map(|n| token_set(n)).collect();
    let mut postings: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, set) in sets.iter().enumerate() {
        for tok in set {
            postings.entry(tok).or_default().push(i);
        }
    }

    let mut kept = Vec::with_capacity(train.problems.len());
    let mut report = DedupReport {
        threshold,
        examined: train.problems.len(),
        removed: Vec::new(),
    };

    for problem in &train.problems {
        let norm = normalize_statement(&problem.statement);
        if let Some(&h) = exact.get(norm.as_str()) {
            report.removed.push(DedupRemoval {
                train_id: problem.id.clone(),
                holdout_id: holdout.problems[h].id.clone(),
                similarity: 1.0,
                kind: MatchKind::ExactNormalized,
            });
            continue;
        }

        let set = token_set(&norm);
        let mut shared: HashMap<usize, usize> = HashMap::new();
        for tok in &set {
            if let Some(ids) = postings.get(tok) {
                for &h in ids {
                    *shared.entry(h).or_default() += 1;
                }
            }
        }
        // Highest similarity wins; ties go to the earliest holdout problem.
        let best = shared
            .into_iter()
            .map(|(h, inter)| {
                let union = set.len() + sets[h].len() - inter;
                (h, inter as f64 / union as f64)
            })
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));

        match best {
            Some((h, sim)) if sim >= threshold => report.removed.push(DedupRemoval {
                train_id: problem.id.clone(),
                holdout_id: holdout.problems[h].id.clone(),
                similarity: sim,
                kind: MatchKind::Jaccard,
            }),
            _ => kept.push(problem.clone()),
        }
    }

    Ok((
        Corpus {
            problems: kept,
            provenance: train.provenance.clone(),
        },
        report,
    ))
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StatsKey {
    pub source: String,
    pub difficulty: Difficulty,
    pub split: Split,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub problems: usize,
    pub untestable: usize,
    pub solutions: usize,
    pub tests: usize,
    /// Counts per (source, difficulty, split).
    pub partitions: Vec<(StatsKey, usize)>,
    pub by_difficulty: BTreeMap<Difficulty, usize>,
    pub by_source: BTreeMap<String, usize>,
}

pub fn corpus_stats(corpus: &Corpus) -> StatsReport {
    let mut parts: BTreeMap<StatsKey, usize> = BTreeMap::new();
    let mut report = StatsReport::default();
    for p in &corpus.problems {
        report.problems += 1;
        report.untestable += usize::from(p.untestable);
        report.solutions += p.solutions.len();
        report.tests += p.tests.len();
        *report.by_difficulty.entry(p.difficulty).or_default() += 1;
        *report.by_source.entry(p.source.clone()).or_default() += 1;
        *parts
            .entry(StatsKey {
                source: p.source.clone(),
                difficulty: p.difficulty,
                split: p.split,
            })
            .or_default() += 1;
    }
    report.partitions = parts.into_iter().collect();
    report
}
