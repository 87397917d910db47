use serde::{Deserialize, Serialize};

pub const DEFAULT_FLOAT_TOLERANCE: f64 = 1e-6;

/// How a program's stdout is matched against the expected output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum ComparePolicy {
    /// Whitespace-separated tokens; tokens that both parse as reals compare
    /// with an absolute tolerance, everything else exactly.
    Tokens { float_tolerance: f64 },
    /// Byte equality after trimming trailing whitespace on each line and
    /// trailing blank lines.
    Exact,
}

impl Default for ComparePolicy {
    fn default() -> Self {
        ComparePolicy::Tokens {
            float_tolerance: DEFAULT_FLOAT_TOLERANCE,
        }
    }
}

fn parse_real(tok: &str) -> Option<f64> {
    // Rust accepts "inf"/"nan"; judges treat those as words.
    if !tok.bytes().any(|b| b.is_ascii_digit()) {
        return None;
    }
    tok.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn tokens_equal(expected: &str, actual: &str, tol: f64) -> bool {
    if expected == actual {
        return true;
    }
    match (parse_real(expected), parse_real(actual)) {
        (Some(a), Some(b)) => (a - b).abs() <= tol,
        _ => false,
    }
}

fn trimmed_lines(s: &str) -> Vec<&str> {
    let mut lines: Vec<&str> = s.lines().map(str::trim_end).collect();
    while lines.last().is_some_and(|l| l.is_empty()) {
        lines.pop();
    }
    lines
}

pub fn compare_output(expected: &str, actual: &str, policy: ComparePolicy) -> bool {
    match policy {
        ComparePolicy::Tokens { float_tolerance } => {
            let mut e = expected.split_whitespace();
            let mut a = actual.split_whitespace();
            loop {
                match (e.next(), a.next()) {
                    (None, None) => return true,
                    (Some(x), Some(y)) if tokens_equal(x, y, float_tolerance) => {}
                    _ => return false,
                }
            }
        }
        ComparePolicy::Exact => trimmed_lines(expected) == trimmed_lines(actual),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tokens(e: &str, a: &str) -> bool {
        compare_output(e, a, ComparePolicy::default())
    }

    #[test]
    fn trailing_whitespace_is_ignored() {
        assert!(tokens("1 2 3\n", "1 2 3"));
        assert!(tokens("1\n2\n", "1 2\n\n"));
    }

    #[test]
    fn float_tolerance() {
        // |0.5000001 - 0.5| = 1e-7 < 1e-6
        assert!(tokens("0.500000", "0.5000001"));
        assert!(!tokens("0.5", "0.50001"));
        assert!(tokens("3", "3.0000000"));
    }

    #[test]
    fn words_compare_exactly() {
        assert!(!tokens("yes", "no"));
        assert!(!tokens("YES", "yes"));
        assert!(!tokens("nan", "nan1"));
        assert!(tokens("inf", "inf"));
    }

    #[test]
    fn length_mismatch() {
        assert!(!tokens("1 2", "1 2 3"));
        assert!(!tokens("1 2 3", "1 2"));
        assert!(tokens("", "  \n"));
    }

    #[test]
    fn exact_policy() {
        assert!(compare_output("a b\n", "a b  \n\n", ComparePolicy::Exact));
        assert!(!compare_output("a b", "a  b", ComparePolicy::Exact));
    }
}
