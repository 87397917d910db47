//! Cyclomatic complexity from the token stream.
//!
//! CC = 1 + decision points, where a decision point is one of:
//!
//! | construct                                   | counted token            |
//! |---------------------------------------------|--------------------------|
//! | `if` / `elif` statements                    | `if`, `elif`             |
//! | conditional expression `a if c else b`      | `if`                     |
//! | comprehension filter `[x for x in y if p]`  | `if`                     |
//! | `for` / `while` loops, comprehension `for`  | `for`, `while`           |
//! | `else` clause of a loop or `try`            | `else`                   |
//! | short-circuit boolean operators             | `and`, `or`              |
//! | exception handlers                          | `except`                 |
//! | assertions                                  | `assert`                 |
//! | `match` arms other than a bare capture/`_`  | `case`                   |
//!
//! `else` after `if`/`elif` adds nothing. These rules agree with radon's
//! module-level total for code without nested functions or classes.

use std::collections::BTreeMap;

use super::lexer::{tokenize, LogicalLine, TokenKind, TokenStream};

const COMPOUND: &[&str] = &[
    "if", "elif", "else", "for", "while", "try", "except", "finally", "with", "def", "class",
];

pub(crate) fn is_match_header(line: &LogicalLine<'_>) -> bool {
    let toks = &line.tokens;
    toks.len() >= 3
        && toks[0].is(TokenKind::Operand, "match")
        && toks.last().is_some_and(|t| t.is_op(":"))
        && !(toks[1].kind == TokenKind::Operator
            && !matches!(toks[1].text.as_str(), "(" | "[" | "{" | "-" | "*" | "~"))
}

pub(crate) fn is_case_clause(line: &LogicalLine<'_>) -> bool {
    let toks = &line.tokens;
    toks.len() >= 3 && toks[0].is(TokenKind::Operand, "case") && toks.iter().any(|t| t.is_op(":"))
}

/// `case _:` and `case name:` are irrefutable and add no path.
fn is_irrefutable_case(line: &LogicalLine<'_>) -> bool {
    let toks = &line.tokens;
    toks.len() >= 3
        && toks[1].kind == TokenKind::Operand
        && (toks[2].is_op(":") || toks[2].is_kw("if"))
}

/// The number of decision points in `stream`.
pub fn decision_points(stream: &TokenStream) -> usize {
    let mut decisions = 0;
    // Last compound-statement keyword seen at each indentation column.
    let mut headers: BTreeMap<usize, &str> = BTreeMap::new();
    // Indentation columns of enclosing `match` statements.
    let mut matches: Vec<usize> = Vec::new();

    for line in stream.logical_lines() {
        let indent = line.indent;
        headers.retain(|col, _| *col <= indent);
        matches.retain(|col| *col < indent);

        let mut first = line.first();
        if first.is_kw("async") && line.tokens.len() > 1 {
            first = line.tokens[1];
        }
        let in_match = !matches.is_empty();
        let case = in_match && is_case_clause(&line);

        if first.is_kw("else")
            && matches!(headers.get(&indent), Some(&("for" | "while" | "except")))
        {
            decisions += 1;
        }
        if first.kind == TokenKind::Keyword && COMPOUND.contains(&first.text.as_str()) {
            headers.insert(
                indent,
                COMPOUND[COMPOUND.iter().position(|k| *k == first.text).unwrap()],
            );
        } else {
            headers.remove(&indent);
        }

        if case {
            if !is_irrefutable_case(&line) {
                decisions += 1;
            }
            // Guards are not decision points of their own.
            let colon = line.tokens.iter().position(|t| t.is_op(":")).unwrap_or(0);
            decisions += line.tokens[colon..]
                .iter()
                .filter(|t| is_decision_token(t.kind, &t.text))
                .count();
            continue;
        }
        if is_match_header(&line) {
            matches.push(indent);
        }

        decisions += line
            .tokens
            .iter()
            .filter(|t| is_decision_token(t.kind, &t.text))
            .count();
    }
    decisions
}

fn is_decision_token(kind: TokenKind, text: &str) -> bool {
    kind == TokenKind::Keyword
        && matches!(
            text,
            "if" | "elif" | "for" | "while" | "and" | "or" | "except" | "assert"
        )
}

/// 1 + decision points; 0 when the stream holds no code at all.
pub fn cyclomatic_in(stream: &TokenStream) -> usize {
    if !stream.iter().any(|t| t.is_significant()) {
        return 0;
    }
    1 + decision_points(stream)
}

pub fn cyclomatic_complexity(source: &str) -> usize {
    cyclomatic_in(&tokenize(source))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straight_line() {
        assert_eq!(cyclomatic_complexity("a = 1\nprint(a)\n"), 1);
    }

    #[test]
    fn if_else_adds_one() {
        let src = "if a:\n    x = 1\nelse:\n    x = 2\n";
        assert_eq!(cyclomatic_complexity(src), 2);
    }

    #[test]
    fn if_and_while() {
        let src = "if a and b:\n    pass\nwhile c:\n    pass\n";
        assert_eq!(cyclomatic_complexity(src), 4);
    }

    #[test]
    fn loop_and_try_else_count() {
        let src = "for x in y:\n    pass\nelse:\n    pass\ntry:\n    pass\nexcept E:\n    pass\nexcept F:\n    pass\nelse:\n    pass\nfinally:\n    pass\n";
        // for, for-else, 2 except, try-else
        assert_eq!(cyclomatic_complexity(src), 6);
    }

    #[test]
    fn nested_else_binds_to_its_own_header() {
        let src = "for x in y:\n    if x:\n        pass\n    else:\n        pass\n";
        assert_eq!(cyclomatic_complexity(src), 3);
    }

    #[test]
    fn expressions() {
        assert_eq!(cyclomatic_complexity("v = [x for x in y if x]\n"), 3);
        assert_eq!(cyclomatic_complexity("v = a if b else c\n"), 2);
        assert_eq!(cyclomatic_complexity("assert x or y\n"), 3);
    }

    #[test]
    fn match_cases() {
        let src = "match cmd:\n    case 1:\n        pass\n    case [a, b]:\n        pass\n    case _:\n        pass\n";
        assert_eq!(cyclomatic_complexity(src), 3);
        let guarded = "match p:\n    case x if x > 0:\n        pass\n";
        assert_eq!(cyclomatic_complexity(guarded), 1);
    }

    #[test]
    fn empty_and_comment_only() {
        assert_eq!(cyclomatic_complexity(""), 0);
        assert_eq!(cyclomatic_complexity("# nothing\n"), 0);
    }
}
