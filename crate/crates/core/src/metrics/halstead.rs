use std::collections::{HashMap, HashSet};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::cyclomatic::{is_case_clause, is_match_header};
use super::expr::{Parser, Tally};
use super::lexer::{tokenize, LogicalLine, TokenKind, TokenStream};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HalsteadConvention {
    /// Operators are the arithmetic, bitwise, boolean, comparison and
    /// augmented-assignment operators; operands are their immediate
    /// sub-expressions, scoped per function. Matches radon.
    #[default]
    Reference,
    /// Every token is classified through [`ClassificationTable`].
    Classic,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HalsteadCounts {
    /// n1
    pub distinct_operators: usize,
    /// n2
    pub distinct_operands: usize,
    /// N1
    pub total_operators: usize,
    /// N2
    pub total_operands: usize,
}

impl HalsteadCounts {
    pub fn vocabulary(&self) -> usize {
        self.distinct_operators + self.distinct_operands
    }

    pub fn length(&self) -> usize {
        self.total_operators + self.total_operands
    }

    /// `N * log2(n)`, 0 when the vocabulary has fewer than two entries.
    pub fn volume(&self) -> f64 {
        let n = self.vocabulary();
        if n <= 1 {
            0.0
        } else {
            self.length() as f64 * (n as f64).log2()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LexemeClass {
    Operator,
    Operand,
    Ignore,
}

/// Lexeme classification for the classic convention, loaded from a
/// tab-separated `lexeme<TAB>class` table.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClassificationTable {
    entries: HashMap<String, LexemeClass>,
}

#[derive(Debug, thiserror::Error)]
#[error("classification table line {line}: {message}")]
pub struct TableError {
    pub line: usize,
    pub message: String,
}

impl ClassificationTable {
    pub fn parse(text: &str) -> Result<Self, TableError> {
        let mut entries = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            if raw.trim().is_empty() || raw.starts_with('#') {
                continue;
            }
            let (lexeme, class) = raw.split_once('\t').ok_or_else(|| TableError {
                line: i + 1,
                message: "expected `lexeme<TAB>class`".into(),
            })?;
            let class = match class.trim() {
                "operator" => LexemeClass::Operator,
                "operand" => LexemeClass::Operand,
                "ignore" => LexemeClass::Ignore,
                other => {
                    return Err(TableError {
                        line: i + 1,
                        message: format!("unknown class {other:?}"),
                    })
                }
            };
            entries.insert(lexeme.to_string(), class);
        }
        Ok(Self { entries })
    }

    /// The table shipped with the crate.
    pub fn builtin() -> &'static Self {
        static TABLE: OnceLock<ClassificationTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            Self::parse(include_str!("../../data/halstead_python.tsv"))
                .expect("builtin table parses")
        })
    }

    pub fn classify(&self, kind: TokenKind, text: &str) -> LexemeClass {
        if let Some(c) = self.entries.get(text) {
            return *c;
        }
        match kind {
            TokenKind::Operand | TokenKind::Number | TokenKind::String => LexemeClass::Operand,
            TokenKind::Operator | TokenKind::Keyword => LexemeClass::Operator,
            _ => LexemeClass::Ignore,
        }
    }
}

pub fn classic_counts(stream: &TokenStream, table: &ClassificationTable) -> HalsteadCounts {
    let mut ops = HashSet::new();
    let mut operands = HashSet::new();
    let mut counts = HalsteadCounts::default();
    for tok in stream.iter().filter(|t| t.is_significant()) {
        match table.classify(tok.kind, &tok.text) {
            LexemeClass::Operator => {
                counts.total_operators += 1;
                ops.insert(tok.text.as_str());
            }
            LexemeClass::Operand => {
                counts.total_operands += 1;
                operands.insert(tok.text.as_str());
            }
            LexemeClass::Ignore => {}
        }
    }
    counts.distinct_operators = ops.len();
    counts.distinct_operands = operands.len();
    counts
}

fn walk_line(line: &LogicalLine<'_>, tally: &mut Tally, ctx: Option<&str>, in_match: bool) {
    let toks = &line.tokens;
    let mut p = Parser::new(toks, tally, ctx);
    let first = toks[0];
    let lead = if first.is_kw("async") && toks.len() > 1 {
        toks[1]
    } else {
        first
    };
    let result = match lead.text.as_str() {
        _ if in_match && is_case_clause(line) => p.case_clause(),
        _ if is_match_header(line) => p.match_header(),
        _ if lead.kind != TokenKind::Keyword => p.simple_statements(),
        "if" | "elif" | "while" => p.condition_header(),
        "else" | "try" | "finally" => p.bare_header(),
        "for" => p.for_header(),
        "except" => p.except_header(),
        "with" => p.with_header(),
        "class" => p.class_header(),
        _ => p.simple_statements(),
    };
    // A statement the parser cannot follow contributes what it tallied so far.
    let _ = result;
}

/// Skip a `def` header and walk any inline body after its colon.
fn walk_def_body(line: &LogicalLine<'_>, tally: &mut Tally, ctx: Option<&str>) {
    let mut depth = 0usize;
    for (i, t) in line.tokens.iter().enumerate() {
        if t.kind != TokenKind::Operator {
            continue;
        }
        match t.text.as_str() {
            "(" | "[" | "{" => depth += 1,
            ")" | "]" | "}" => depth = depth.saturating_sub(1),
            ":" if depth == 0 => {
                let rest = &line.tokens[i + 1..];
                if !rest.is_empty() {
                    let _ = Parser::new(rest, tally, ctx).simple_statements();
                }
                return;
            }
            _ => {}
        }
    }
}

pub fn reference_counts(stream: &TokenStream) -> HalsteadCounts {
    let mut tally = Tally::default();
    // (indent, function name) of enclosing definitions.
    let mut scopes: Vec<(usize, Option<String>)> = Vec::new();
    let mut matches: Vec<usize> = Vec::new();
    let mut decorators: Vec<LogicalLine<'_>> = Vec::new();

    for line in stream.logical_lines() {
        if line.tokens.is_empty() {
            continue;
        }
        while scopes.last().is_some_and(|(col, _)| *col >= line.indent) {
            scopes.pop();
        }
        matches.retain(|col| *col < line.indent);
        let ctx = scopes.iter().rev().find_map(|(_, n)| n.clone());
        let ctx = ctx.as_deref();

        let first = line.first();
        if first.is_op("@") {
            decorators.push(line);
            continue;
        }
        let lead = if first.is_kw("async") && line.tokens.len() > 1 {
            line.tokens[1]
        } else {
            first
        };
        if lead.is_kw("def") {
            decorators.clear();
            let name = line
                .tokens
                .iter()
                .position(|t| t.is_kw("def"))
                .and_then(|i| line.tokens.get(i + 1))
                .map(|t| t.text.clone());
            walk_def_body(&line, &mut tally, name.as_deref());
            scopes.push((line.indent, name));
            continue;
        }
        for d in decorators.drain(..) {
            let _ = Parser::new(&d.tokens, &mut tally, ctx).decorator();
        }
        if lead.is_kw("class") {
            // Class bodies keep the enclosing function's scope.
            scopes.push((line.indent, None));
        }
        let in_match = !matches.is_empty();
        if (!in_match || !is_case_clause(&line)) && is_match_header(&line) {
            matches.push(line.indent);
        }
        walk_line(&line, &mut tally, ctx, in_match);
    }

    HalsteadCounts {
        distinct_operators: tally.operators_seen.len(),
        distinct_operands: tally.operands_seen.len(),
        total_operators: tally.operators,
        total_operands: tally.operands,
    }
}

pub fn halstead_counts(stream: &TokenStream, convention: HalsteadConvention) -> HalsteadCounts {
    match convention {
        HalsteadConvention::Reference => reference_counts(stream),
        HalsteadConvention::Classic => classic_counts(stream, ClassificationTable::builtin()),
    }
}

pub fn halstead_volume(source: &str, convention: HalsteadConvention) -> f64 {
    halstead_counts(&tokenize(source), convention).volume()
}
