use serde::{Deserialize, Serialize};

use super::lexer::{tokenize, TokenKind, TokenStream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineCounts {
    /// Lines holding at least one code token.
    pub sloc: usize,
    /// Comment-only lines plus lines covered only by docstrings.
    pub comment_lines: usize,
    pub total_lines: usize,
    /// `comment_lines / total_lines`, 0 for empty input.
    pub comment_density: f64,
}

#[derive(Clone, Copy, PartialEq)]
enum LineClass {
    Blank,
    Comment,
    Code,
}

/// Classify every physical line. A docstring is a statement consisting of
/// string literals only; its lines count as comment lines.
pub fn line_counts(stream: &TokenStream) -> LineCounts {
    let total = stream.total_lines;
    let mut class = vec![LineClass::Blank; total + 2];
    let mut mark = |from: usize, to: usize, c: LineClass| {
        for slot in class.iter_mut().take(to.min(total + 1) + 1).skip(from) {
            if c == LineClass::Code || *slot == LineClass::Blank {
                *slot = c;
            }
        }
    };

    for line in stream.logical_lines() {
        let docstring = line.tokens.iter().all(|t| t.kind == TokenKind::String);
        for tok in &line.tokens {
            let c = if docstring {
                LineClass::Comment
            } else {
                LineClass::Code
            };
            mark(tok.line, tok.end_line, c);
        }
    }
    for tok in stream.iter().filter(|t| t.kind == TokenKind::Comment) {
        mark(tok.line, tok.line, LineClass::Comment);
    }

    let slice = class.get(1..=total).unwrap_or(&[]);
    let sloc = slice.iter().filter(|c| **c == LineClass::Code).count();
    let comment_lines = slice.iter().filter(|c| **c == LineClass::Comment).count();
    LineCounts {
        sloc,
        comment_lines,
        total_lines: total,
        comment_density: if total == 0 {
            0.0
        } else {
            comment_lines as f64 / total as f64
        },
    }
}

pub fn sloc_and_comments(source: &str) -> LineCounts {
    line_counts(&tokenize(source))
}

/// Count `def` occurrences at any depth, or only at column 0.
pub fn function_count_in(stream: &TokenStream, top_level_only: bool) -> usize {
    stream
        .logical_lines()
        .iter()
        .map(|line| {
            line.tokens
                .iter()
                .filter(|t| t.is_kw("def"))
                .filter(|_| !top_level_only || line.indent == 0)
                .count()
        })
        .sum()
}

pub fn function_count(source: &str) -> usize {
    function_count_in(&tokenize(source), false)
}
