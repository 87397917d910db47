//! Expression-level operator/operand tally, following radon's Halstead
//! visitor: only binary, unary, boolean, comparison and augmented-assignment
//! operators count, and their operands are the immediate sub-expressions.
//!
//! Operand identity mirrors Python value equality of the AST payload: a name,
//! an attribute name and a string constant with the same text are the same
//! operand, `True` equals `1`, and any compound sub-expression is distinct
//! from every other. Operands are scoped by the innermost enclosing function.

use std::collections::HashSet;

use super::lexer::{tokenize, Token, TokenKind};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) enum OperandKey {
    Str(String),
    Bytes(Vec<u8>),
    Int(i64),
    Float(u64),
    Other(String),
    NoneConst,
    Ellipsis,
    Node(usize),
}

#[derive(Debug, Default)]
pub(crate) struct Tally {
    pub operators: usize,
    pub operands: usize,
    pub operators_seen: HashSet<&'static str>,
    pub operands_seen: HashSet<(Option<String>, OperandKey)>,
    next_node: usize,
}

impl Tally {
    fn key(&mut self, e: Ex) -> OperandKey {
        match e.0 {
            Some(k) => k,
            None => {
                self.next_node += 1;
                OperandKey::Node(self.next_node)
            }
        }
    }

    fn record(&mut self, ctx: Option<&str>, ops: &[&'static str], operands: Vec<Ex>) {
        self.operators += ops.len();
        self.operands += operands.len();
        self.operators_seen.extend(ops.iter().copied());
        for e in operands {
            let k = self.key(e);
            self.operands_seen.insert((ctx.map(str::to_owned), k));
        }
    }
}

/// Summary of a parsed expression: its operand key when it is a name,
/// attribute or constant, `None` for any compound node.
#[derive(Debug, Clone)]
pub(crate) struct Ex(Option<OperandKey>);

const NODE: Ex = Ex(None);

#[derive(Debug)]
pub(crate) struct Bail;

type R<T> = Result<T, Bail>;

pub(crate) struct Parser<'a, 't> {
    toks: &'a [&'t Token],
    pos: usize,
    tally: &'a mut Tally,
    ctx: Option<&'a str>,
}

fn augassign_op(text: &str) -> Option<&'static str> {
    Some(match text {
        "+=" => "Add",
        "-=" => "Sub",
        "*=" => "Mult",
        "/=" => "Div",
        "//=" => "FloorDiv",
        "%=" => "Mod",
        "**=" => "Pow",
        "@=" => "MatMult",
        "&=" => "BitAnd",
        "|=" => "BitOr",
        "^=" => "BitXor",
        "<<=" => "LShift",
        ">>=" => "RShift",
        _ => return None,
    })
}

impl<'a, 't> Parser<'a, 't> {
    pub fn new(toks: &'a [&'t Token], tally: &'a mut Tally, ctx: Option<&'a str>) -> Self {
        Self {
            toks,
            pos: 0,
            tally,
            ctx,
        }
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn peek(&self) -> Option<&'t Token> {
        self.toks.get(self.pos).copied()
    }

    fn peek_at(&self, n: usize) -> Option<&'t Token> {
        self.toks.get(self.pos + n).copied()
    }

    fn at_op(&self, s: &str) -> bool {
        self.peek().is_some_and(|t| t.is_op(s))
    }

    fn at_kw(&self, s: &str) -> bool {
        self.peek().is_some_and(|t| t.is_kw(s))
    }

    fn bump(&mut self) -> R<&'t Token> {
        let t = self.peek().ok_or(Bail)?;
        self.pos += 1;
        Ok(t)
    }

    fn expect_op(&mut self, s: &str) -> R<()> {
        if self.at_op(s) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Bail)
        }
    }

    fn expect_kw(&mut self, s: &str) -> R<()> {
        if self.at_kw(s) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Bail)
        }
    }

    fn record(&mut self, ops: &[&'static str], operands: Vec<Ex>) {
        self.tally.record(self.ctx, ops, operands);
    }

    fn can_start(&self) -> bool {
        let Some(t) = self.peek() else { return false };
        match t.kind {
            TokenKind::Operand | TokenKind::Number | TokenKind::String => true,
            TokenKind::Keyword => matches!(
                t.text.as_str(),
                "not" | "lambda" | "await" | "None" | "True" | "False" | "yield"
            ),
            TokenKind::Operator => matches!(
                t.text.as_str(),
                "(" | "[" | "{" | "-" | "+" | "~" | "*" | "..."
            ),
            _ => false,
        }
    }

    // ---- statements -------------------------------------------------------

    /// Simple statements separated by `;` until the end of the token slice.
    pub fn simple_statements(&mut self) -> R<()> {
        while !self.at_end() {
            self.simple_statement()?;
            if self.at_op(";") {
                self.pos += 1;
            } else if !self.at_end() {
                return Err(Bail);
            }
        }
        Ok(())
    }

    fn skip_statement(&mut self) {
        while !self.at_end() && !self.at_op(";") {
            self.pos += 1;
        }
    }

    fn simple_statement(&mut self) -> R<()> {
        let Some(first) = self.peek() else {
            return Ok(());
        };
        if first.kind == TokenKind::Keyword {
            match first.text.as_str() {
                "return" => {
                    self.pos += 1;
                    if self.can_start() {
                        self.star_expressions()?;
                    }
                    return Ok(());
                }
                "del" => {
                    self.pos += 1;
                    self.star_expressions()?;
                    return Ok(());
                }
                "assert" => {
                    self.pos += 1;
                    self.test()?;
                    if self.at_op(",") {
                        self.pos += 1;
                        self.test()?;
                    }
                    return Ok(());
                }
                "raise" => {
                    self.pos += 1;
                    if self.can_start() {
                        self.test()?;
                        if self.at_kw("from") {
                            self.pos += 1;
                            self.test()?;
                        }
                    }
                    return Ok(());
                }
                "global" | "nonlocal" | "import" | "from" | "pass" | "break" | "continue" => {
                    self.skip_statement();
                    return Ok(());
                }
                _ => {}
            }
        }

        let target = self.value()?;
        if let Some(op) = self
            .peek()
            .filter(|t| t.kind == TokenKind::Operator)
            .and_then(|t| augassign_op(&t.text))
        {
            self.pos += 1;
            let value = self.value()?;
            self.record(&[op], vec![target, value]);
        } else if self.at_op(":") {
            self.pos += 1;
            self.test()?;
            if self.at_op("=") {
                self.pos += 1;
                self.value()?;
            }
        } else {
            while self.at_op("=") {
                self.pos += 1;
                self.value()?;
            }
        }
        Ok(())
    }

    fn value(&mut self) -> R<Ex> {
        if self.at_kw("yield") {
            self.yield_expr()
        } else {
            self.star_expressions()
        }
    }

    /// `if`/`elif`/`while` header: keyword, condition, colon, inline body.
    pub fn condition_header(&mut self) -> R<()> {
        self.bump()?;
        self.namedexpr()?;
        self.expect_op(":")?;
        self.simple_statements()
    }

    pub fn bare_header(&mut self) -> R<()> {
        self.bump()?;
        self.expect_op(":")?;
        self.simple_statements()
    }

    pub fn for_header(&mut self) -> R<()> {
        if self.at_kw("async") {
            self.pos += 1;
        }
        self.expect_kw("for")?;
        self.targets()?;
        self.expect_kw("in")?;
        self.star_expressions()?;
        self.expect_op(":")?;
        self.simple_statements()
    }

    pub fn except_header(&mut self) -> R<()> {
        self.bump()?;
        if self.at_op("*") {
            self.pos += 1;
        }
        if self.can_start() {
            self.test()?;
            if self.at_kw("as") {
                self.pos += 2;
            }
        }
        self.expect_op(":")?;
        self.simple_statements()
    }

    pub fn with_header(&mut self) -> R<()> {
        if self.at_kw("async") {
            self.pos += 1;
        }
        self.expect_kw("with")?;
        let parenthesized = self.at_op("(") && {
            // `with (a as b, c):`: the group holds `as` at its own depth.
            let mut depth = 0usize;
            let mut has_as = false;
            let mut end_ok = false;
            for (i, t) in self.toks[self.pos..].iter().enumerate() {
                if t.kind == TokenKind::Operator && matches!(t.text.as_str(), "(" | "[" | "{") {
                    depth += 1;
                } else if t.kind == TokenKind::Operator
                    && matches!(t.text.as_str(), ")" | "]" | "}")
                {
                    depth -= 1;
                    if depth == 0 {
                        end_ok = self
                            .toks
                            .get(self.pos + i + 1)
                            .is_some_and(|n| n.is_op(":"));
                        break;
                    }
                } else if depth == 1 && t.is_kw("as") {
                    has_as = true;
                }
            }
            has_as && end_ok
        };
        if parenthesized {
            self.pos += 1;
        }
        loop {
            self.test()?;
            if self.at_kw("as") {
                self.pos += 1;
                self.targets()?;
            }
            if self.at_op(",") {
                self.pos += 1;
                if parenthesized && self.at_op(")") {
                    break;
                }
                continue;
            }
            break;
        }
        if parenthesized {
            self.expect_op(")")?;
        }
        self.expect_op(":")?;
        self.simple_statements()
    }

    pub fn class_header(&mut self) -> R<()> {
        self.expect_kw("class")?;
        self.bump()?;
        if self.at_op("(") {
            self.call_args()?;
        }
        self.expect_op(":")?;
        self.simple_statements()
    }

    pub fn decorator(&mut self) -> R<()> {
        self.expect_op("@")?;
        self.namedexpr()?;
        Ok(())
    }

    pub fn match_header(&mut self) -> R<()> {
        self.bump()?;
        self.star_expressions()?;
        self.expect_op(":")?;
        Ok(())
    }

    /// `case pattern [if guard]: body`; the pattern holds no operators.
    pub fn case_clause(&mut self) -> R<()> {
        let mut depth = 0usize;
        let mut guard = None;
        let mut colon = None;
        for (i, t) in self.toks.iter().enumerate().skip(1) {
            match t.text.as_str() {
                "(" | "[" | "{" if t.kind == TokenKind::Operator => depth += 1,
                ")" | "]" | "}" if t.kind == TokenKind::Operator => depth = depth.saturating_sub(1),
                "if" if t.kind == TokenKind::Keyword && depth == 0 && guard.is_none() => {
                    guard = Some(i)
                }
                ":" if t.kind == TokenKind::Operator && depth == 0 => {
                    colon = Some(i);
                    break;
                }
                _ => {}
            }
        }
        let colon = colon.ok_or(Bail)?;
        if let Some(g) = guard {
            self.pos = g + 1;
            self.namedexpr()?;
        }
        self.pos = colon + 1;
        self.simple_statements()
    }

    // ---- expressions ------------------------------------------------------

    pub fn star_expressions(&mut self) -> R<Ex> {
        let first = self.star_expression()?;
        if !self.at_op(",") {
            return Ok(first);
        }
        while self.at_op(",") {
            self.pos += 1;
            if !self.can_start() {
                break;
            }
            self.star_expression()?;
        }
        Ok(NODE)
    }

    fn star_expression(&mut self) -> R<Ex> {
        if self.at_op("*") {
            self.pos += 1;
            self.bitor()?;
            return Ok(NODE);
        }
        self.namedexpr()
    }

    fn namedexpr(&mut self) -> R<Ex> {
        if self.peek().is_some_and(|t| t.kind == TokenKind::Operand)
            && self.peek_at(1).is_some_and(|t| t.is_op(":="))
        {
            self.pos += 2;
            self.test()?;
            return Ok(NODE);
        }
        self.test()
    }

    fn test(&mut self) -> R<Ex> {
        if self.at_kw("lambda") {
            return self.lambdef();
        }
        let body = self.or_test()?;
        if self.at_kw("if") {
            self.pos += 1;
            self.or_test()?;
            self.expect_kw("else")?;
            self.test()?;
            return Ok(NODE);
        }
        Ok(body)
    }

    fn lambdef(&mut self) -> R<Ex> {
        self.expect_kw("lambda")?;
        while !self.at_op(":") {
            let t = self.bump()?;
            if t.is_op("=") {
                self.test()?;
            } else if !(t.kind == TokenKind::Operand
                || t.is_op(",")
                || t.is_op("*")
                || t.is_op("**")
                || t.is_op("/"))
            {
                return Err(Bail);
            }
        }
        self.expect_op(":")?;
        self.test()?;
        Ok(NODE)
    }

    fn or_test(&mut self) -> R<Ex> {
        let mut values = vec![self.and_test()?];
        while self.at_kw("or") {
            self.pos += 1;
            values.push(self.and_test()?);
        }
        if values.len() == 1 {
            return Ok(values.pop().unwrap());
        }
        self.record(&["Or"], values);
        Ok(NODE)
    }

    fn and_test(&mut self) -> R<Ex> {
        let mut values = vec![self.not_test()?];
        while self.at_kw("and") {
            self.pos += 1;
            values.push(self.not_test()?);
        }
        if values.len() == 1 {
            return Ok(values.pop().unwrap());
        }
        self.record(&["And"], values);
        Ok(NODE)
    }

    fn not_test(&mut self) -> R<Ex> {
        if self.at_kw("not") {
            self.pos += 1;
            let e = self.not_test()?;
            self.record(&["Not"], vec![e]);
            return Ok(NODE);
        }
        self.comparison()
    }

    fn compare_op(&mut self) -> Option<&'static str> {
        let t = self.peek()?;
        let op = match (t.kind, t.text.as_str()) {
            (TokenKind::Operator, "<") => "Lt",
            (TokenKind::Operator, ">") => "Gt",
            (TokenKind::Operator, "==") => "Eq",
            (TokenKind::Operator, ">=") => "GtE",
            (TokenKind::Operator, "<=") => "LtE",
            (TokenKind::Operator, "!=") => "NotEq",
            (TokenKind::Keyword, "in") => "In",
            (TokenKind::Keyword, "not") if self.peek_at(1).is_some_and(|n| n.is_kw("in")) => {
                self.pos += 1;
                "NotIn"
            }
            (TokenKind::Keyword, "is") if self.peek_at(1).is_some_and(|n| n.is_kw("not")) => {
                self.pos += 1;
                "IsNot"
            }
            (TokenKind::Keyword, "is") => "Is",
            _ => return None,
        };
        self.pos += 1;
        Some(op)
    }

    fn comparison(&mut self) -> R<Ex> {
        let left = self.bitor()?;
        let mut ops = Vec::new();
        let mut operands = vec![left];
        while let Some(op) = self.compare_op() {
            ops.push(op);
            operands.push(self.bitor()?);
        }
        if ops.is_empty() {
            return Ok(operands.pop().unwrap());
        }
        self.record(&ops, operands);
        Ok(NODE)
    }

    fn binary_level(
        &mut self,
        table: &[(&str, &'static str)],
        next: fn(&mut Self) -> R<Ex>,
    ) -> R<Ex> {
        let mut left = next(self)?;
        loop {
            let Some(op) = self
                .peek()
                .filter(|t| t.kind == TokenKind::Operator)
                .and_then(|t| table.iter().find(|(s, _)| *s == t.text).map(|(_, n)| *n))
            else {
                return Ok(left);
            };
            self.pos += 1;
            let right = next(self)?;
            self.record(&[op], vec![left, right]);
            left = NODE;
        }
    }

    fn bitor(&mut self) -> R<Ex> {
        self.binary_level(&[("|", "BitOr")], Self::bitxor)
    }

    fn bitxor(&mut self) -> R<Ex> {
        self.binary_level(&[("^", "BitXor")], Self::bitand)
    }

    fn bitand(&mut self) -> R<Ex> {
        self.binary_level(&[("&", "BitAnd")], Self::shift)
    }

    fn shift(&mut self) -> R<Ex> {
        self.binary_level(&[("<<", "LShift"), (">>", "RShift")], Self::arith)
    }

    fn arith(&mut self) -> R<Ex> {
        self.binary_level(&[("+", "Add"), ("-", "Sub")], Self::term)
    }

    fn term(&mut self) -> R<Ex> {
        self.binary_level(
            &[
                ("*", "Mult"),
                ("/", "Div"),
                ("//", "FloorDiv"),
                ("%", "Mod"),
                ("@", "MatMult"),
            ],
            Self::factor,
        )
    }

    fn factor(&mut self) -> R<Ex> {
        let op = match self.peek() {
            Some(t) if t.is_op("-") => "USub",
            Some(t) if t.is_op("+") => "UAdd",
            Some(t) if t.is_op("~") => "Invert",
            _ => return self.power(),
        };
        self.pos += 1;
        let e = self.factor()?;
        self.record(&[op], vec![e]);
        Ok(NODE)
    }

    fn power(&mut self) -> R<Ex> {
        let base = if self.at_kw("await") {
            self.pos += 1;
            self.primary()?;
            NODE
        } else {
            self.primary()?
        };
        if self.at_op("**") {
            self.pos += 1;
            let exp = self.factor()?;
            self.record(&["Pow"], vec![base, exp]);
            return Ok(NODE);
        }
        Ok(base)
    }

    fn primary(&mut self) -> R<Ex> {
        let mut e = self.atom()?;
        loop {
            if self.at_op(".") {
                self.pos += 1;
                let name = self.bump()?;
                if !matches!(name.kind, TokenKind::Operand | TokenKind::Keyword) {
                    return Err(Bail);
                }
                e = Ex(Some(OperandKey::Str(name.text.clone())));
            } else if self.at_op("(") {
                self.call_args()?;
                e = NODE;
            } else if self.at_op("[") {
                self.subscript()?;
                e = NODE;
            } else {
                return Ok(e);
            }
        }
    }

    fn call_args(&mut self) -> R<()> {
        self.expect_op("(")?;
        while !self.at_op(")") {
            if self.at_op("*") || self.at_op("**") {
                self.pos += 1;
                self.test()?;
            } else if self.peek().is_some_and(|t| t.kind == TokenKind::Operand)
                && self.peek_at(1).is_some_and(|t| t.is_op("="))
            {
                self.pos += 2;
                self.test()?;
            } else {
                self.namedexpr()?;
                if self.at_comprehension() {
                    self.comprehension()?;
                }
            }
            if self.at_op(",") {
                self.pos += 1;
            } else if !self.at_op(")") {
                return Err(Bail);
            }
        }
        self.expect_op(")")
    }

    fn subscript(&mut self) -> R<()> {
        self.expect_op("[")?;
        while !self.at_op("]") {
            if !self.at_op(":") {
                self.star_expression()?;
            }
            if self.at_op(":") {
                self.pos += 1;
                if self.can_start() {
                    self.test()?;
                }
                if self.at_op(":") {
                    self.pos += 1;
                    if self.can_start() {
                        self.test()?;
                    }
                }
            }
            if self.at_op(",") {
                self.pos += 1;
            } else if !self.at_op("]") {
                return Err(Bail);
            }
        }
        self.expect_op("]")
    }

    fn at_comprehension(&self) -> bool {
        self.at_kw("for")
            || (self.at_kw("async") && self.peek_at(1).is_some_and(|t| t.is_kw("for")))
    }

    fn comprehension(&mut self) -> R<()> {
        while self.at_comprehension() {
            if self.at_kw("async") {
                self.pos += 1;
            }
            self.expect_kw("for")?;
            self.targets()?;
            self.expect_kw("in")?;
            self.or_test()?;
            while self.at_kw("if") {
                self.pos += 1;
                self.or_test()?;
            }
        }
        Ok(())
    }

    fn targets(&mut self) -> R<()> {
        loop {
            if self.at_op("*") {
                self.pos += 1;
            }
            self.bitor()?;
            if self.at_op(",") {
                self.pos += 1;
                if self.can_start() {
                    continue;
                }
            }
            return Ok(());
        }
    }

    fn yield_expr(&mut self) -> R<Ex> {
        self.expect_kw("yield")?;
        if self.at_kw("from") {
            self.pos += 1;
            self.test()?;
        } else if self.can_start() {
            self.star_expressions()?;
        }
        Ok(NODE)
    }

    /// Elements of a `[...]`, `(...)` or `{...}` display after the opener.
    fn display(&mut self, close: &str, braces: bool) -> R<Ex> {
        if self.at_op(close) {
            self.pos += 1;
            return Ok(NODE);
        }
        let mut count = 0usize;
        let mut trailing_comma = false;
        let mut first = NODE;
        loop {
            if braces && self.at_op("**") {
                self.pos += 1;
                self.bitor()?;
            } else {
                let e = self.star_expression()?;
                if braces && self.at_op(":") {
                    self.pos += 1;
                    self.test()?;
                }
                if count == 0 {
                    first = e;
                }
            }
            count += 1;
            if count == 1 && self.at_comprehension() {
                self.comprehension()?;
                self.expect_op(close)?;
                return Ok(NODE);
            }
            if self.at_op(",") {
                self.pos += 1;
                trailing_comma = true;
                if self.at_op(close) {
                    break;
                }
                continue;
            }
            break;
        }
        self.expect_op(close)?;
        // A parenthesized single expression is the expression itself.
        if close == ")" && count == 1 && !trailing_comma {
            return Ok(first);
        }
        Ok(NODE)
    }

    fn atom(&mut self) -> R<Ex> {
        let t = self.bump()?;
        match t.kind {
            TokenKind::Operand => Ok(Ex(Some(OperandKey::Str(t.text.clone())))),
            TokenKind::Number => Ok(Ex(Some(number_key(&t.text)))),
            TokenKind::String => {
                let mut parts = vec![t];
                while let Some(n) = self.peek().filter(|n| n.kind == TokenKind::String) {
                    parts.push(n);
                    self.pos += 1;
                }
                Ok(self.string_atom(&parts))
            }
            TokenKind::Keyword => match t.text.as_str() {
                "None" => Ok(Ex(Some(OperandKey::NoneConst))),
                "True" => Ok(Ex(Some(OperandKey::Int(1)))),
                "False" => Ok(Ex(Some(OperandKey::Int(0)))),
                "yield" => {
                    self.pos -= 1;
                    self.yield_expr()
                }
                _ => Err(Bail),
            },
            TokenKind::Operator => match t.text.as_str() {
                "..." => Ok(Ex(Some(OperandKey::Ellipsis))),
                "(" => {
                    if self.at_kw("yield") {
                        self.yield_expr()?;
                        self.expect_op(")")?;
                        return Ok(NODE);
                    }
                    self.display(")", false)
                }
                "[" => self.display("]", false),
                "{" => self.display("}", true),
                _ => Err(Bail),
            },
            _ => Err(Bail),
        }
    }

    fn string_atom(&mut self, parts: &[&Token]) -> Ex {
        let decoded: Vec<StringLiteral> = parts.iter().map(|t| decode_string(&t.text)).collect();
        if decoded.iter().any(|s| s.formatted) {
            for (lit, tok) in decoded.iter().zip(parts) {
                if lit.formatted {
                    for field in fstring_fields(&raw_body(&tok.text)) {
                        self.nested_expression(&field);
                    }
                }
            }
            return NODE;
        }
        if decoded.iter().any(|s| s.bytes) {
            let bytes = decoded
                .iter()
                .flat_map(|s| s.value.chars().map(|c| c as u32 as u8))
                .collect();
            return Ex(Some(OperandKey::Bytes(bytes)));
        }
        Ex(Some(OperandKey::Str(
            decoded.into_iter().map(|s| s.value).collect(),
        )))
    }

    fn nested_expression(&mut self, text: &str) {
        let stream = tokenize(text);
        let toks: Vec<&Token> = stream.iter().filter(|t| t.is_significant()).collect();
        let mut inner = Parser::new(&toks, self.tally, self.ctx);
        let _ = inner.star_expressions();
    }
}

fn number_key(text: &str) -> OperandKey {
    let t: String = text.chars().filter(|c| *c != '_').collect();
    let lower = t.to_ascii_lowercase();
    if lower.ends_with('j') {
        return OperandKey::Other(format!("complex:{lower}"));
    }
    let radix = match lower.get(..2) {
        Some("0x") => Some(16),
        Some("0o") => Some(8),
        Some("0b") => Some(2),
        _ => None,
    };
    if let Some(r) = radix {
        return match i64::from_str_radix(&lower[2..], r) {
            Ok(v) => OperandKey::Int(v),
            Err(_) => OperandKey::Other(format!("int:{lower}")),
        };
    }
    if !lower.contains(['.', 'e']) {
        return match lower.parse::<i64>() {
            Ok(v) => OperandKey::Int(v),
            Err(_) => OperandKey::Other(format!("int:{}", lower.trim_start_matches('0'))),
        };
    }
    match lower.parse::<f64>() {
        Ok(v) if v.is_finite() && v.fract() == 0.0 && v.abs() < 9.0e15 => OperandKey::Int(v as i64),
        Ok(v) => OperandKey::Float(if v == 0.0 { 0 } else { v.to_bits() }),
        Err(_) => OperandKey::Other(lower),
    }
}

struct StringLiteral {
    value: String,
    bytes: bool,
    formatted: bool,
}

fn split_literal(text: &str) -> (&str, &str) {
    let q = text.find(['\'', '"']).unwrap_or(text.len());
    (&text[..q], &text[q..])
}

/// The characters between the quotes, undecoded.
fn raw_body(text: &str) -> String {
    let (_, quoted) = split_literal(text);
    let q = if quoted.starts_with("'''") || quoted.starts_with("\"\"\"") {
        3
    } else {
        1
    };
    if quoted.len() < 2 * q {
        return quoted.get(q.min(quoted.len())..).unwrap_or("").to_string();
    }
    quoted[q..quoted.len() - q].to_string()
}

fn decode_string(text: &str) -> StringLiteral {
    let (prefix, _) = split_literal(text);
    let prefix = prefix.to_ascii_lowercase();
    let raw = prefix.contains('r');
    let body = raw_body(text);
    StringLiteral {
        value: if raw { body } else { unescape(&body) },
        bytes: prefix.contains('b'),
        formatted: prefix.contains('f'),
    }
}

fn unescape(body: &str) -> String {
    let mut out = String::with_capacity(body.len());
    let mut chars = body.chars().peekable();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\n') => {}
            Some('n') => out.push('\n'),
            Some('t') => out.push('\t'),
            Some('r') => out.push('\r'),
            Some('0') => out.push('\0'),
            Some('a') => out.push('\x07'),
            Some('b') => out.push('\x08'),
            Some('f') => out.push('\x0c'),
            Some('v') => out.push('\x0b'),
            Some('x') => {
                let hex: String = (0..2).filter_map(|_| chars.next()).collect();
                match u32::from_str_radix(&hex, 16).ok().and_then(char::from_u32) {
                    Some(ch) => out.push(ch),
                    None => {
                        out.push_str("\\x");
                        out.push_str(&hex);
                    }
                }
            }
            Some(q @ ('\\' | '\'' | '"')) => out.push(q),
            Some(other) => {
                out.push('\\');
                out.push(other);
            }
            None => out.push('\\'),
        }
    }
    out
}

/// Replacement-field expressions of an f-string body, including fields
/// nested in format specs.
fn fstring_fields(body: &str) -> Vec<String> {
    let mut out = Vec::new();
    let chars: Vec<char> = body.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        match chars[i] {
            '{' if chars.get(i + 1) == Some(&'{') => i += 2,
            '}' if chars.get(i + 1) == Some(&'}') => i += 2,
            '{' => {
                let start = i + 1;
                let mut depth = 0i32;
                let mut j = start;
                let mut quote: Option<char> = None;
                let mut expr_end = None;
                while j < chars.len() {
                    let c = chars[j];
                    if let Some(q) = quote {
                        if c == q {
                            quote = None;
                        }
                    } else {
                        match c {
                            '\'' | '"' => quote = Some(c),
                            '(' | '[' | '{' => depth += 1,
                            ')' | ']' => depth -= 1,
                            '}' if depth > 0 => depth -= 1,
                            '}' => break,
                            '!' if depth == 0
                                && chars.get(j + 1) != Some(&'=')
                                && expr_end.is_none() =>
                            {
                                expr_end = Some(j)
                            }
                            ':' if depth == 0 && expr_end.is_none() => expr_end = Some(j),
                            _ => {}
                        }
                    }
                    j += 1;
                }
                let end = expr_end.unwrap_or(j);
                let mut expr: String = chars[start..end.min(chars.len())].iter().collect();
                let trimmed = expr.trim_end();
                if trimmed.ends_with('=')
                    && !["==", "!=", "<=", ">="]
                        .iter()
                        .any(|s| trimmed.ends_with(s))
                {
                    expr = trimmed[..trimmed.len() - 1].to_string();
                }
                out.push(expr);
                if let Some(e) = expr_end {
                    if chars.get(e) == Some(&':') && e + 1 < j {
                        let spec: String = chars[e + 1..j].iter().collect();
                        out.extend(fstring_fields(&spec));
                    }
                }
                i = j + 1;
            }
            _ => i += 1,
        }
    }
    out
}
