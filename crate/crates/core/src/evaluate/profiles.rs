use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{mean, GenerationRecord, ALL};
use crate::corpus::{Difficulty, Problem, Split};

/// Function-count buckets `0, 1, ..., top - 1` and an overflow bucket `>=top`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionBins {
    pub top: usize,
}

impl Default for FunctionBins {
    fn default() -> Self {
        Self { top: 8 }
    }
}

impl FunctionBins {
    pub fn index(&self, functions: usize) -> usize {
        functions.min(self.top)
    }

    pub fn label(&self, index: usize) -> String {
        if index >= self.top {
            format!(">={}", self.top)
        } else {
            index.to_string()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionBinRow {
    pub difficulty: String,
    pub bin: String,
    pub count: usize,
    pub passed: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceRow {
    pub difficulty: String,
    pub passed_candidates: usize,
    pub avg_time: Option<f64>,
    pub avg_peak_memory: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiRow {
    pub split: String,
    pub difficulty: String,
    pub passed_candidates: usize,
    pub mean_mi: Option<f64>,
}

type Pairs<'a> = [(&'a Problem, &'a GenerationRecord)];

fn levels(pairs: &Pairs<'_>) -> Vec<Difficulty> {
    let mut d: Vec<Difficulty> = pairs.iter().map(|(p, _)| p.difficulty).collect();
    d.sort();
    d.dedup();
    d
}

pub fn function_accuracy_profile(pairs: &Pairs<'_>, bins: FunctionBins) -> Vec<FunctionBinRow> {
    let mut tally: BTreeMap<(Option<Difficulty>, usize), (usize, usize)> = BTreeMap::new();
    for (problem, record) in pairs {
        for c in &record.candidates {
            let bin = bins.index(c.metrics.function_count);
            for key in [(Some(problem.difficulty), bin), (None, bin)] {
                let e = tally.entry(key).or_default();
                e.0 += 1;
                e.1 += usize::from(c.verdict.passed);
            }
        }
    }
    // Difficulty rows first, then the `all` rows.
    let mut rows: Vec<_> = tally.into_iter().collect();
    rows.sort_by_key(|((d, bin), _)| (d.is_none(), *d, *bin));
    rows.into_iter()
        .map(|((d, bin), (count, passed))| FunctionBinRow {
            difficulty: d.map_or(ALL, Difficulty::as_str).into(),
            bin: bins.label(bin),
            count,
            passed,
            accuracy: passed as f64 / count as f64,
        })
        .collect()
}

pub fn resource_profile(pairs: &Pairs<'_>) -> Vec<ResourceRow> {
    let row = |label: &str, filter: &dyn Fn(Difficulty) -> bool| {
        let (times, mems): (Vec<f64>, Vec<f64>) = pairs
            .iter()
            .filter(|(p, _)| filter(p.difficulty))
            .flat_map(|(_, r)| r.candidates.iter())
            .filter(|c| c.verdict.passed)
            .map(|c| (c.verdict.avg_time, c.verdict.avg_peak_memory))
            .unzip();
        ResourceRow {
            difficulty: label.into(),
            passed_candidates: times.len(),
            avg_time: mean(&times),
            avg_peak_memory: mean(&mems),
        }
    };
    let mut out: Vec<ResourceRow> = levels(pairs)
        .into_iter()
        .map(|d| row(d.as_str(), &|x| x == d))
        .collect();
    if !pairs.is_empty() {
        out.push(row(ALL, &|_| true));
    }
    out
}

pub fn mi_profile(pairs: &Pairs<'_>) -> Vec<MiRow> {
    let row = |split: &str, difficulty: &str, filter: &dyn Fn(&Problem) -> bool| {
        let values: Vec<f64> = pairs
            .iter()
            .filter(|(p, _)| filter(p))
            .flat_map(|(_, r)| r.candidates.iter())
            .filter(|c| c.verdict.passed)
            .map(|c| c.metrics.maintainability)
            .collect();
        MiRow {
            split: split.into(),
            difficulty: difficulty.into(),
            passed_candidates: values.len(),
            mean_mi: mean(&values),
        }
    };
    let mut out: Vec<MiRow> = levels(pairs)
        .into_iter()
        .map(|d| row(ALL, d.as_str(), &|p| p.difficulty == d))
        .collect();
    let mut splits: Vec<Split> = pairs.iter().map(|(p, _)| p.split).collect();
    splits.sort();
    splits.dedup();
    out.extend(
        splits
            .into_iter()
            .map(|s| row(s.as_str(), ALL, &|p| p.split == s)),
    );
    if !pairs.is_empty() {
        out.push(row(ALL, ALL, &|_| true));
    }
    out
}

#[cfg(test)]
#[allow(clippy::redundant_closure)]
mod tests {
    use super::super::test_support::*;
    use super::super::{resolve, GenerationRecord};
    use super::*;
    use crate::corpus::Corpus;

    fn run<T>(
        corpus: &Corpus,
        records: &[GenerationRecord],
        f: impl Fn(&[(&Problem, &GenerationRecord)]) -> T,
    ) -> T {
        f(&resolve(corpus, records).unwrap())
    }

    #[test]
    fn single_bin_all_passing() {
        let c = corpus(&[("a", Difficulty::Interview)]);
        let recs = [GenerationRecord::new(
            "a",
            vec![candidate(true, 0, 1.0, 1.0, 100.0); 3],
        )];
        let rows = run(&c, &recs, |p| {
            function_accuracy_profile(p, FunctionBins::default())
        });
        let interview: Vec<_> = rows
            .iter()
            .filter(|r| r.difficulty == "interview")
            .collect();
        assert_eq!(interview.len(), 1);
        assert_eq!(
            (interview[0].bin.as_str(), interview[0].accuracy),
            ("0", 1.0)
        );
    }

    #[test]
    fn two_function_candidates_pass() {
        let c = corpus(&[("a", Difficulty::Interview), ("b", Difficulty::Interview)]);
        let recs = [
            GenerationRecord::new(
                "a",
                vec![
                    candidate(true, 2, 1.0, 1.0, 0.0),
                    candidate(false, 0, 1.0, 1.0, 0.0),
                ],
            ),
            GenerationRecord::new(
                "b",
                vec![
                    candidate(true, 2, 1.0, 1.0, 0.0),
                    candidate(false, 0, 1.0, 1.0, 0.0),
                ],
            ),
        ];
        let rows = run(&c, &recs, |p| {
            function_accuracy_profile(p, FunctionBins::default())
        });
        let get = |bin: &str| {
            rows.iter()
                .find(|r| r.difficulty == ALL && r.bin == bin)
                .unwrap()
                .accuracy
        };
        assert_eq!(get("2"), 1.0);
        assert_eq!(get("0"), 0.0);
    }

    #[test]
    fn overflow_bin() {
        let bins = FunctionBins { top: 3 };
        assert_eq!(bins.label(bins.index(11)), ">=3");
        assert_eq!(bins.label(bins.index(2)), "2");
    }

    #[test]
    fn empty_records() {
        let c = corpus(&[("a", Difficulty::Interview)]);
        assert!(run(&c, &[], |p| function_accuracy_profile(
            p,
            FunctionBins::default()
        ))
        .is_empty());
        assert!(run(&c, &[], |p| resource_profile(p)).is_empty());
        assert!(run(&c, &[], |p| mi_profile(p)).is_empty());
    }

    #[test]
    fn resources_over_passed_only() {
        let c = corpus(&[("a", Difficulty::Introductory)]);
        let recs = [GenerationRecord::new(
            "a",
            vec![
                candidate(true, 0, 1.0, 10e6, 0.0),
                candidate(false, 0, 50.0, 900e6, 0.0),
                candidate(true, 0, 3.0, 30e6, 0.0),
            ],
        )];
        let rows = run(&c, &recs, |p| resource_profile(p));
        assert_eq!(rows[0].avg_time, Some(2.0));
        assert_eq!(rows[0].avg_peak_memory, Some(20e6));
        assert_eq!(rows[0].passed_candidates, 2);
    }

    #[test]
    fn mi_means() {
        let c = corpus(&[("a", Difficulty::Interview), ("b", Difficulty::Competition)]);
        let recs = [
            GenerationRecord::new(
                "a",
                vec![
                    candidate(true, 0, 0.0, 0.0, 100.0),
                    candidate(true, 0, 0.0, 0.0, 150.0),
                ],
            ),
            GenerationRecord::new("b", vec![candidate(false, 0, 0.0, 0.0, 80.0)]),
        ];
        let rows = run(&c, &recs, |p| mi_profile(p));
        let get = |d: &str| {
            rows.iter()
                .find(|r| r.split == ALL && r.difficulty == d)
                .unwrap()
                .mean_mi
        };
        assert_eq!(get("interview"), Some(125.0));
        assert_eq!(get("competition"), None);
        assert!(rows
            .iter()
            .any(|r| r.split == "test" && r.difficulty == ALL));
    }

    #[test]
    fn single_candidate_mi() {
        let c = corpus(&[("a", Difficulty::Interview)]);
        let recs = [GenerationRecord::new(
            "a",
            vec![candidate(true, 0, 0.0, 0.0, 122.31)],
        )];
        let rows = run(&c, &recs, |p| mi_profile(p));
        assert_eq!(rows.last().unwrap().mean_mi, Some(122.31));
    }
}
