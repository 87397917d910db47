//! Tolerant lexer for Python source.
//!
//! Produces a flat token list with indentation markers and logical/physical
//! newline tokens, close to what CPython's `tokenize` emits. Malformed input
//! yields `Error` tokens and lexing continues on the next character.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenKind {
    /// Punctuation and operator symbols, including brackets.
    Operator,
    /// Identifiers (soft keywords like `match` included).
    Operand,
    Keyword,
    Comment,
    String,
    Number,
    /// End of a logical line.
    Newline,
    /// A physical line break that does not end a statement: blank or
    /// comment-only lines, and breaks inside brackets.
    LineBreak,
    Indent,
    Dedent,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    /// 1-based line on which the token starts.
    pub line: usize,
    /// Byte column within the starting line.
    pub col: usize,
    /// 1-based line on which the token ends (differs for triple-quoted strings).
    pub end_line: usize,
}

impl Token {
    pub fn is(&self, kind: TokenKind, text: &str) -> bool {
        self.kind == kind && self.text == text
    }

    pub fn is_op(&self, text: &str) -> bool {
        self.is(TokenKind::Operator, text)
    }

    pub fn is_kw(&self, text: &str) -> bool {
        self.is(TokenKind::Keyword, text)
    }

    /// Tokens that carry program content (not layout or comments).
    pub fn is_significant(&self) -> bool {
        !matches!(
            self.kind,
            TokenKind::Comment
                | TokenKind::Newline
                | TokenKind::LineBreak
                | TokenKind::Indent
                | TokenKind::Dedent
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TokenStream {
    pub tokens: Vec<Token>,
    /// Number of physical lines in the source.
    pub total_lines: usize,
}

impl TokenStream {
    pub fn iter(&self) -> std::slice::Iter<'_, Token> {
        self.tokens.iter()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Significant tokens grouped by logical line, with the indentation
    /// column of the line.
    pub fn logical_lines(&self) -> Vec<LogicalLine<'_>> {
        let mut out = Vec::new();
        let mut current: Vec<&Token> = Vec::new();
        for tok in &self.tokens {
            match tok.kind {
                TokenKind::Newline => {
                    if !current.is_empty() {
                        out.push(LogicalLine::new(std::mem::take(&mut current)));
                    }
                }
                _ if tok.is_significant() => current.push(tok),
                _ => {}
            }
        }
        if !current.is_empty() {
            out.push(LogicalLine::new(current));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct LogicalLine<'a> {
    pub tokens: Vec<&'a Token>,
    pub indent: usize,
}

impl<'a> LogicalLine<'a> {
    fn new(tokens: Vec<&'a Token>) -> Self {
        let indent = tokens.first().map(|t| t.col).unwrap_or(0);
        Self { tokens, indent }
    }

    pub fn first(&self) -> &'a Token {
        self.tokens[0]
    }
}

pub const KEYWORDS: &[&str] = &[
    "False", "None", "True", "and", "as", "assert", "async", "await", "break", "class", "continue",
    "def", "del", "elif", "else", "except", "finally", "for", "from", "global", "if", "import",
    "in", "is", "lambda", "nonlocal", "not", "or", "pass", "raise", "return", "try", "while",
    "with", "yield",
];

const OPERATORS: &[&str] = &[
    "**=", "//=", ">>=", "<<=", "...", "**", "//", ">>", "<<", "<=", ">=", "==", "!=", "->", ":=",
    "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "@=", "+", "-", "*", "/", "%", "@", "&", "|",
    "^", "~", "<", ">", "(", ")", "[", "]", "{", "}", ",", ":", ".", ";", "=",
];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

fn is_string_prefix(word: &str) -> bool {
    matches!(
        word.to_ascii_lowercase().as_str(),
        "r" | "u" | "b" | "f" | "br" | "rb" | "fr" | "rf"
    )
}

fn is_ident_start(c: char) -> bool {
    c == '_' || c.is_alphabetic()
}

fn is_ident_continue(c: char) -> bool {
    c == '_' || c.is_alphanumeric()
}

struct Lexer<'s> {
    src: &'s str,
    pos: usize,
    line: usize,
    line_start: usize,
    depth: usize,
    indents: Vec<usize>,
    tokens: Vec<Token>,
    /// Whether the current physical line has produced a significant token.
    line_has_code: bool,
}

impl<'s> Lexer<'s> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(offset)
    }

    fn col(&self, pos: usize) -> usize {
        pos - self.line_start
    }

    fn push(&mut self, kind: TokenKind, start: usize, start_line: usize, start_col: usize) {
        let text = self.src[start..self.pos].to_string();
        if !matches!(
            kind,
            TokenKind::Comment | TokenKind::Newline | TokenKind::LineBreak
        ) {
            self.line_has_code = true;
        }
        self.tokens.push(Token {
            kind,
            text,
            line: start_line,
            col: start_col,
            end_line: self.line,
        });
    }

    fn push_marker(&mut self, kind: TokenKind, col: usize) {
        self.tokens.push(Token {
            kind,
            text: String::new(),
            line: self.line,
            col,
            end_line: self.line,
        });
    }

    fn advance_char(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.line_start = self.pos;
        }
        Some(c)
    }

    /// Handle indentation at the start of a physical line outside brackets.
    fn line_start_indent(&mut self) {
        let mut width = 0usize;
        let mut p = self.pos;
        let bytes = self.src.as_bytes();
        while p < bytes.len() {
            match bytes[p] {
                b' ' => width += 1,
                b'\t' => width = (width / 8 + 1) * 8,
                b'\x0c' => width = 0,
                _ => break,
            }
            p += 1;
        }
        let rest = &self.src[p..];
        let blank = rest.is_empty()
            || rest.starts_with('\n')
            || rest.starts_with("\r\n")
            || rest.starts_with('#')
            || rest.starts_with("\\\n");
        self.pos = p;
        if blank {
            return;
        }
        let col = self.col(p);
        let top = *self.indents.last().unwrap_or(&0);
        if width > top {
            self.indents.push(width);
            self.push_marker(TokenKind::Indent, col);
        } else if width < top {
            while self.indents.len() > 1 && *self.indents.last().unwrap() > width {
                self.indents.pop();
                self.push_marker(TokenKind::Dedent, col);
            }
            if *self.indents.last().unwrap() != width {
                // Inconsistent dedent: flag it and adopt the new level.
                self.push_marker(TokenKind::Error, col);
                self.indents.push(width);
            }
        }
    }

    fn lex_string(&mut self, start: usize, start_line: usize, start_col: usize) {
        let quote = self.advance_char().expect("quote");
        let triple = self.peek() == Some(quote) && self.peek_at(1) == Some(quote);
        if triple {
            self.advance_char();
            self.advance_char();
        }
        loop {
            match self.peek() {
                None => {
                    self.push(TokenKind::Error, start, start_line, start_col);
                    return;
                }
                Some('\\') => {
                    self.advance_char();
                    self.advance_char();
                }
                Some('\n') if !triple => {
                    self.push(TokenKind::Error, start, start_line, start_col);
                    return;
                }
                Some(c) if c == quote => {
                    if !triple {
                        self.advance_char();
                        break;
                    }
                    if self.peek_at(1) == Some(quote) && self.peek_at(2) == Some(quote) {
                        self.advance_char();
                        self.advance_char();
                        self.advance_char();
                        break;
                    }
                    self.advance_char();
                }
                Some(_) => {
                    self.advance_char();
                }
            }
        }
        self.push(TokenKind::String, start, start_line, start_col);
    }

    fn lex_number(&mut self, start: usize) {
        let col = self.col(start);
        let line = self.line;
        let bytes = self.src.as_bytes();
        let radix_prefix = bytes[self.pos] == b'0'
            && matches!(
                bytes.get(self.pos + 1),
                Some(b'x' | b'X' | b'o' | b'O' | b'b' | b'B')
            );
        if radix_prefix {
            self.pos += 2;
            while self.pos < bytes.len()
                && (bytes[self.pos].is_ascii_hexdigit() || bytes[self.pos] == b'_')
            {
                self.pos += 1;
            }
        } else {
            let digits = |lx: &mut Self| {
                while lx.pos < bytes.len()
                    && (bytes[lx.pos].is_ascii_digit() || bytes[lx.pos] == b'_')
                {
                    lx.pos += 1;
                }
            };
            digits(self);
            if self.pos < bytes.len() && bytes[self.pos] == b'.' {
                self.pos += 1;
                digits(self);
            }
            if self.pos < bytes.len() && matches!(bytes[self.pos], b'e' | b'E') {
                let save = self.pos;
                self.pos += 1;
                if self.pos < bytes.len() && matches!(bytes[self.pos], b'+' | b'-') {
                    self.pos += 1;
                }
                if self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
                    digits(self);
                } else {
                    self.pos = save;
                }
            }
            if self.pos < bytes.len() && matches!(bytes[self.pos], b'j' | b'J') {
                self.pos += 1;
            }
        }
        self.push(TokenKind::Number, start, line, col);
    }

    fn newline(&mut self, start: usize) {
        let col = self.col(start);
        let line = self.line;
        self.advance_char();
        let kind = if self.depth == 0 && self.line_has_code {
            TokenKind::Newline
        } else {
            TokenKind::LineBreak
        };
        self.tokens.push(Token {
            kind,
            text: "\n".into(),
            line,
            col,
            end_line: line,
        });
        self.line_has_code = false;
        if self.depth == 0 {
            self.line_start_indent();
        }
    }

    fn run(mut self) -> TokenStream {
        self.line_start_indent();
        while let Some(c) = self.peek() {
            let start = self.pos;
            let start_line = self.line;
            let start_col = self.col(start);
            match c {
                '\n' => self.newline(start),
                '\r' if self.peek_at(1) == Some('\n') => {
                    self.pos += 1;
                }
                ' ' | '\t' | '\x0c' | '\r' => {
                    self.pos += 1;
                }
                '#' => {
                    while let Some(ch) = self.peek() {
                        if ch == '\n' {
                            break;
                        }
                        self.advance_char();
                    }
                    let end = self.src[start..self.pos].trim_end_matches('\r').len() + start;
                    let saved = self.pos;
                    self.pos = end;
                    self.push(TokenKind::Comment, start, start_line, start_col);
                    self.pos = saved;
                }
                '\\' if matches!(self.peek_at(1), Some('\n')) => {
                    self.advance_char();
                    self.advance_char();
                }
                '\\' if self.peek_at(1) == Some('\r') && self.peek_at(2) == Some('\n') => {
                    self.pos += 2;
                    self.advance_char();
                }
                '"' | '\'' => self.lex_string(start, start_line, start_col),
                c if c.is_ascii_digit() => self.lex_number(start),
                '.' if self.peek_at(1).is_some_and(|d| d.is_ascii_digit()) => {
                    self.lex_number(start)
                }
                c if is_ident_start(c) => {
                    while self.peek().is_some_and(is_ident_continue) {
                        self.advance_char();
                    }
                    let word = &self.src[start..self.pos];
                    if is_string_prefix(word) && matches!(self.peek(), Some('"' | '\'')) {
                        self.lex_string(start, start_line, start_col);
                        // lex_string started at the quote; widen to the prefix.
                        if let Some(last) = self.tokens.last_mut() {
                            last.text = self.src[start..self.pos].to_string();
                            last.col = start_col;
                        }
                    } else {
                        let kind = if is_keyword(word) {
                            TokenKind::Keyword
                        } else {
                            TokenKind::Operand
                        };
                        self.push(kind, start, start_line, start_col);
                    }
                }
                _ => {
                    let rest = &self.src[start..];
                    if let Some(op) = OPERATORS.iter().find(|op| rest.starts_with(**op)) {
                        self.pos += op.len();
                        match *op {
                            "(" | "[" | "{" => self.depth += 1,
                            ")" | "]" | "}" => self.depth = self.depth.saturating_sub(1),
                            _ => {}
                        }
                        self.push(TokenKind::Operator, start, start_line, start_col);
                    } else {
                        self.advance_char();
                        self.push(TokenKind::Error, start, start_line, start_col);
                    }
                }
            }
        }
        if self.line_has_code {
            let col = self.col(self.pos);
            self.tokens.push(Token {
                kind: TokenKind::Newline,
                text: String::new(),
                line: self.line,
                col,
                end_line: self.line,
            });
        }
        while self.indents.len() > 1 {
            self.indents.pop();
            self.push_marker(TokenKind::Dedent, 0);
        }
        TokenStream {
            tokens: self.tokens,
            total_lines: self.src.lines().count(),
        }
    }
}

pub fn tokenize(source: &str) -> TokenStream {
    Lexer {
        src: source,
        pos: 0,
        line: 1,
        line_start: 0,
        depth: 0,
        indents: vec![0],
        tokens: Vec::new(),
        line_has_code: false,
    }
    .run()
}
