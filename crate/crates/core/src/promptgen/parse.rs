use serde::{Deserialize, Serialize};

use super::{STEP1, STEP2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseErrorKind {
    MissingStep,
    /// `### STEP 2` precedes `### STEP 1`.
    StepOrder,
    NoFinalCode,
    MultipleMain,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
#[error("{kind:?} at byte {offset}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    /// Byte offset of the violation in the raw response.
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fence {
    /// Byte offset of the opening fence line.
    pub start: usize,
    pub lang: String,
    pub code: String,
    pub closed: bool,
}

/// Every fenced block in `text`, in order. An unclosed block runs to the end.
pub fn fenced_blocks(text: &str) -> Vec<Fence> {
    let mut out = Vec::new();
    let mut open: Option<(usize, String, usize)> = None;
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let trimmed = line.trim();
        if let Some(rest) = trimmed.strip_prefix("```") {
            match open.take() {
                None => open = Some((offset, rest.trim().to_string(), offset + line.len())),
                Some((start, lang, from)) => out.push(Fence {
                    start,
                    lang,
                    code: text[from..offset].to_string(),
                    closed: true,
                }),
            }
        }
        offset += line.len();
    }
    if let Some((start, lang, from)) = open {
        out.push(Fence {
            start,
            lang,
            code: text[from.min(text.len())..].to_string(),
            closed: false,
        });
    }
    out
}

/// Code of the first fenced block, or the whole text when there is none.
pub fn extract_code(raw: &str) -> String {
    match fenced_blocks(raw).into_iter().next() {
        Some(f) => f.code,
        None => {
            let t = raw.trim();
            if t.is_empty() {
                String::new()
            } else {
                format!("{t}\n")
            }
        }
    }
}

/// The clean rewrite must come back as exactly one fenced block.
pub fn parse_clean_response(raw: &str) -> Result<String, ParseError> {
    let fences = fenced_blocks(raw);
    match fences.len() {
        0 => Err(ParseError {
            kind: ParseErrorKind::NoFinalCode,
            offset: raw.len(),
        }),
        1 => Ok(fences.into_iter().next().unwrap().code),
        _ => Err(ParseError {
            kind: ParseErrorKind::MultipleMain,
            offset: fences[1].start,
        }),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubModule {
    pub name: String,
    /// The `def` line(s) up to the colon.
    pub header: String,
    pub docstring: String,
    /// Statements after the docstring, dedented and trimmed.
    pub body: String,
}

impl SubModule {
    /// True when nothing but a `pass` or `...` placeholder follows the docstring.
    pub fn is_stub(&self) -> bool {
        self.body
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .all(|l| l == "pass" || l == "...")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseLayout {
    pub step1_offset: usize,
    pub step2_offset: usize,
    /// Fenced blocks opening before the `### STEP 1` line.
    pub fences_before_step1: usize,
    /// Start offsets of the fenced blocks after `### STEP 2`.
    pub final_blocks: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModularSolution {
    pub outline: Vec<SubModule>,
    /// Top-level statements in the outline other than defs, imports and decorators.
    pub outline_extra: Vec<String>,
    pub final_code: String,
    pub raw_response: String,
    pub layout: ResponseLayout,
}

impl ModularSolution {
    /// Canonical response text; `parse_mot_response` reads it back.
    pub fn render(&self) -> String {
        let mut s = format!("{STEP1}\n```python\n");
        for (i, m) in self.outline.iter().enumerate() {
            if i > 0 {
                s.push_str("\n\n");
            }
            s.push_str(&m.header);
            s.push('\n');
            s.push_str(&format!("    \"\"\"{}\"\"\"\n", m.docstring));
            for line in m.body.lines() {
                s.push_str(&format!("    {line}\n"));
            }
        }
        s.push_str(&format!("```\n\n{STEP2}\n```python\n{}", self.final_code));
        if !self.final_code.ends_with('\n') {
            s.push('\n');
        }
        s.push_str("```\n");
        s
    }
}

fn delimiter_offset(raw: &str, delim: &str) -> Option<usize> {
    let mut offset = 0;
    for line in raw.split_inclusive('\n') {
        if line.trim_start().starts_with(delim) {
            return Some(offset);
        }
        offset += line.len();
    }
    None
}

fn indent_of(line: &str) -> usize {
    line.len() - line.trim_start().len()
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    chars.next().is_some_and(|c| c == '_' || c.is_alphabetic())
        && chars.all(|c| c == '_' || c.is_alphanumeric())
}

/// `def name(` at the start of a trimmed line, returning `name`.
fn def_name(trimmed: &str) -> Option<&str> {
    let rest = trimmed
        .strip_prefix("async ")
        .map(str::trim_start)
        .unwrap_or(trimmed);
    let rest = rest.strip_prefix("def ")?.trim_start();
    let name = &rest[..rest.find('(')?];
    let name = name.trim_end();
    is_identifier(name).then_some(name)
}

fn split_docstring(body: &[&str]) -> (String, String) {
    let text = body.join("\n");
    let trimmed = text.trim_start();
    let quote = ["\"\"\"", "'''", "\"", "'"].into_iter().find(|q| {
        let t = trimmed.trim_start_matches(['r', 'R', 'u', 'U']);
        t.starts_with(q)
    });
    let Some(quote) = quote else {
        return (String::new(), dedent(&text));
    };
    let start = trimmed.find(quote).unwrap() + quote.len();
    let Some(len) = trimmed[start..].find(quote) else {
        return (dedent(&trimmed[start..]), String::new());
    };
    let doc = dedent(&trimmed[start..start + len]);
    let rest = dedent(&trimmed[start + len + quote.len()..]);
    (doc, rest)
}

fn dedent(text: &str) -> String {
    let lines: Vec<&str> = text.lines().collect();
    let first = lines.first().map(|l| l.trim()).unwrap_or("");
    let margin = lines
        .iter()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| indent_of(l))
        .min()
        .unwrap_or(0);
    let mut out = vec![first.to_string()];
    for l in lines.iter().skip(1) {
        out.push(l.get(margin..).unwrap_or("").trim_end().to_string());
    }
    out.join("\n").trim().to_string()
}

fn parse_outline(code: &str) -> (Vec<SubModule>, Vec<String>) {
    let lines: Vec<&str> = code.lines().collect();
    let margin = lines
        .iter()
        .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|l| indent_of(l))
        .min()
        .unwrap_or(0);
    let mut outline = Vec::new();
    let mut extra = Vec::new();
    let mut i = 0;
    while i < lines.len() {
        let line = lines[i];
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || indent_of(line) > margin {
            i += 1;
            continue;
        }
        let Some(name) = def_name(trimmed) else {
            let is_import = trimmed.starts_with("import ") || trimmed.starts_with("from ");
            if !is_import && !trimmed.starts_with('@') {
                extra.push(trimmed.to_string());
            }
            i += 1;
            continue;
        };
        let mut header = vec![line.trim_end()];
        let mut j = i;
        while !lines[j].trim_end().ends_with(':') && j + 1 < lines.len() {
            j += 1;
            header.push(lines[j].trim_end());
        }
        let mut body = Vec::new();
        j += 1;
        while j < lines.len() {
            let l = lines[j];
            if !l.trim().is_empty() && indent_of(l) <= margin {
                break;
            }
            body.push(l);
            j += 1;
        }
        let (docstring, rest) = split_docstring(&body);
        outline.push(SubModule {
            name: name.to_string(),
            header: header.join("\n").trim_start().to_string(),
            docstring,
            body: rest,
        });
        i = j;
    }
    (outline, extra)
}

/// Locate both steps and parse the outline without judging the final
/// section: `final_code` is the first block after `### STEP 2` (empty if
/// none) and `layout.final_blocks` lists every block there.
pub fn parse_mot_sections(raw: &str) -> Result<ModularSolution, ParseError> {
    let step1 = delimiter_offset(raw, STEP1);
    let step2 = delimiter_offset(raw, STEP2);
    let (step1, step2) = match (step1, step2) {
        (None, _) => {
            return Err(ParseError {
                kind: ParseErrorKind::MissingStep,
                offset: 0,
            })
        }
        (Some(_), None) => {
            return Err(ParseError {
                kind: ParseErrorKind::MissingStep,
                offset: raw.len(),
            })
        }
        (Some(a), Some(b)) if b < a => {
            return Err(ParseError {
                kind: ParseErrorKind::StepOrder,
                offset: b,
            })
        }
        (Some(a), Some(b)) => (a, b),
    };

    let fences = fenced_blocks(raw);
    let layout = ResponseLayout {
        step1_offset: step1,
        step2_offset: step2,
        fences_before_step1: fences.iter().filter(|f| f.start < step1).count(),
        final_blocks: Vec::new(),
    };

    let outline_fences: Vec<&Fence> = fences
        .iter()
        .filter(|f| f.start > step1 && f.start < step2)
        .collect();
    let outline_code = if outline_fences.is_empty() {
        let region = &raw[step1..step2];
        region
            .split_once('\n')
            .map(|(_, r)| r)
            .unwrap_or("")
            .to_string()
    } else {
        outline_fences
            .iter()
            .map(|f| f.code.as_str())
            .collect::<Vec<_>>()
            .join("\n")
    };
    let (outline, outline_extra) = parse_outline(&outline_code);

    let finals: Vec<&Fence> = fences.iter().filter(|f| f.start > step2).collect();
    Ok(ModularSolution {
        outline,
        outline_extra,
        final_code: finals.first().map(|f| f.code.clone()).unwrap_or_default(),
        raw_response: raw.to_string(),
        layout: ResponseLayout {
            final_blocks: finals.iter().map(|f| f.start).collect(),
            ..layout
        },
    })
}

/// Parse a two-step response: the outline between the `### STEP 1` and
/// `### STEP 2` lines, the final program as the one fenced block after
/// `### STEP 2`.
pub fn parse_mot_response(raw: &str) -> Result<ModularSolution, ParseError> {
    let sol = parse_mot_sections(raw)?;
    match sol.layout.final_blocks.as_slice() {
        [] => Err(ParseError {
            kind: ParseErrorKind::NoFinalCode,
            offset: sol.layout.step2_offset,
        }),
        [only] if sol.final_code.trim().is_empty() => Err(ParseError {
            kind: ParseErrorKind::NoFinalCode,
            offset: *only,
        }),
        [_] => Ok(sol),
        [_, second, ..] => Err(ParseError {
            kind: ParseErrorKind::MultipleMain,
            offset: *second,
        }),
    }
}
