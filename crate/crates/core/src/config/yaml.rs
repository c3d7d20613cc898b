//! Parser for the restricted YAML subset used by pipeline configs.
//!
//! Supported: block mappings (`key: value`), block sequences (`- item`,
//! including `- key: value` mapping items), flow sequences of scalars
//! (`[a, "b", 'c']`), plain and quoted scalars, `#` comments and CRLF line
//! endings. Nesting is by exactly two spaces; tabs in indentation are
//! rejected. Anchors, tags, flow mappings and multi-document streams are not
//! part of the subset.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum YamlError {
    #[error("syntax error at line {line}, column {col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("tab character used for indentation at line {line}")]
    TabIndentation { line: usize },
}

fn syntax(line: usize, col: usize, message: impl Into<String>) -> YamlError {
    YamlError::Syntax {
        line,
        col,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scalar {
    pub text: String,
    pub quoted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    /// Key present with nothing after the colon.
    Null,
    Scalar(Scalar),
    Seq(Vec<Node>),
    Map(Vec<(String, Node)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub value: Value,
    pub line: usize,
    pub col: usize,
}

impl Node {
    pub fn kind_name(&self) -> &'static str {
        match self.value {
            Value::Null => "empty value",
            Value::Scalar(_) => "scalar",
            Value::Seq(_) => "sequence",
            Value::Map(_) => "mapping",
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

struct Line {
    number: usize,
    indent: usize,
    text: String,
}

fn strip_comment(s: &str) -> &str {
    let mut in_single = false;
    let mut in_double = false;
    let mut prev_ws = true;
    let mut escaped = false;
    for (i, c) in s.char_indices() {
        if in_double {
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_double = false;
            }
        } else if in_single {
            if c == '\'' {
                in_single = false;
            }
        } else if c == '#' && prev_ws {
            return &s[..i];
        } else if c == '"' && prev_ws_or_token_start(s, i) {
            in_double = true;
        } else if c == '\'' && prev_ws_or_token_start(s, i) {
            in_single = true;
        }
        prev_ws = c.is_whitespace();
    }
    s
}

// quotes only open a quoted scalar at the start of a value or flow item
fn prev_ws_or_token_start(s: &str, i: usize) -> bool {
    match s[..i].trim_end().chars().last() {
        None => true,
        Some(c) => matches!(c, ':' | '-' | '[' | ','),
    }
}

fn lex(source: &str) -> Result<Vec<Line>, YamlError> {
    let source = source.strip_prefix('\u{feff}').unwrap_or(source);
    let mut lines = Vec::new();
    for (i, raw) in source.split('\n').enumerate() {
        let number = i + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        let indent = raw.len() - raw.trim_start_matches([' ', '\t']).len();
        if raw[..indent].contains('\t') {
            if raw.trim().is_empty() {
                continue;
            }
            return Err(YamlError::TabIndentation { line: number });
        }
        let body = strip_comment(&raw[indent..]).trim_end();
        if body.is_empty() {
            continue;
        }
        if body == "---" && lines.is_empty() {
            continue;
        }
        if indent % 2 != 0 {
            return Err(syntax(number, indent + 1, "indentation must be a multiple of two spaces"));
        }
        lines.push(Line {
            number,
            indent,
            text: body.to_string(),
        });
    }
    Ok(lines)
}

pub fn parse(source: &str) -> Result<Node, YamlError> {
    let mut lines = lex(source)?;
    if lines.is_empty() {
        return Ok(Node {
            value: Value::Map(Vec::new()),
            line: 1,
            col: 1,
        });
    }
    if lines[0].indent != 0 {
        return Err(syntax(lines[0].number, lines[0].indent + 1, "document must start at column 1"));
    }
    let mut parser = Parser {
        lines: &mut lines,
        pos: 0,
    };
    let node = parser.block(0)?;
    if let Some(l) = parser.lines.get(parser.pos) {
        return Err(syntax(l.number, l.indent + 1, "unexpected content after document"));
    }
    Ok(node)
}

struct Parser<'a> {
    lines: &'a mut Vec<Line>,
    pos: usize,
}

fn is_seq_item(text: &str) -> bool {
    text == "-" || text.starts_with("- ")
}

/// Splits `key: rest` when the line starts with a plain key.
fn split_key(text: &str) -> Option<(&str, &str)> {
    if text.starts_with(['"', '\'', '[', '{']) {
        return None;
    }
    let idx = text.find(": ").or_else(|| text.ends_with(':').then(|| text.len() - 1))?;
    let key = &text[..idx];
    if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
        return None;
    }
    Some((key, text[idx + 1..].trim_start()))
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Line> {
        self.lines.get(self.pos)
    }

    fn block(&mut self, indent: usize) -> Result<Node, YamlError> {
        let line = self.peek().expect("block called with remaining lines");
        if line.indent != indent {
            return Err(syntax(line.number, line.indent + 1, "unexpected indentation"));
        }
        if is_seq_item(&line.text) {
            self.sequence(indent)
        } else {
            self.mapping(indent)
        }
    }

    fn mapping(&mut self, indent: usize) -> Result<Node, YamlError> {
        let (start_line, start_col) = {
            let l = self.peek().unwrap();
            (l.number, l.indent + 1)
        };
        let mut entries: Vec<(String, Node)> = Vec::new();
        while let Some(line) = self.peek() {
            if line.indent < indent {
                break;
            }
            if line.indent > indent {
                return Err(syntax(line.number, line.indent + 1, "unexpected indentation"));
            }
            if is_seq_item(&line.text) {
                return Err(syntax(line.number, line.indent + 1, "sequence item inside a mapping"));
            }
            let number = line.number;
            let col = line.indent + 1;
            let text = line.text.clone();
            let (key, rest) = split_key(&text)
                .ok_or_else(|| syntax(number, col, "expected `key: value`"))?;
            if entries.iter().any(|(k, _)| k == key) {
                return Err(syntax(number, col, format!("duplicate key `{key}`")));
            }
            let value_col = col + text.len() - rest.len();
            self.pos += 1;
            let node = if rest.is_empty() {
                match self.peek() {
                    Some(next) if next.indent > indent => {
                        if next.indent != indent + 2 {
                            return Err(syntax(next.number, next.indent + 1, "nested blocks are indented by two spaces"));
                        }
                        self.block(indent + 2)?
                    }
                    Some(next) if next.indent == indent && is_seq_item(&next.text) => {
                        self.sequence(indent)?
                    }
                    _ => Node {
                        value: Value::Null,
                        line: number,
                        col: value_col,
                    },
                }
            } else {
                inline(rest, number, value_col)?
            };
            entries.push((key.to_string(), node));
        }
        Ok(Node {
            value: Value::Map(entries),
            line: start_line,
            col: start_col,
        })
    }

    fn sequence(&mut self, indent: usize) -> Result<Node, YamlError> {
        let (start_line, start_col) = {
            let l = self.peek().unwrap();
            (l.number, l.indent + 1)
        };
        let mut items = Vec::new();
        while let Some(line) = self.peek() {
            if line.indent < indent || (line.indent == indent && !is_seq_item(&line.text)) {
                break;
            }
            if line.indent > indent {
                return Err(syntax(line.number, line.indent + 1, "unexpected indentation"));
            }
            let number = line.number;
            let rest = line.text[1..].trim_start().to_string();
            let item_col = indent + 1 + (line.text.len() - rest.len());
            if rest.is_empty() {
                self.pos += 1;
                match self.peek() {
                    Some(next) if next.indent == indent + 2 => items.push(self.block(indent + 2)?),
                    _ => items.push(Node {
                        value: Value::Null,
                        line: number,
                        col: item_col,
                    }),
                }
            } else if split_key(&rest).is_some() {
                // `- key: value` opens a mapping whose entries sit at indent + 2
                let l = &mut self.lines[self.pos];
                l.indent = indent + 2;
                l.text = rest;
                items.push(self.mapping(indent + 2)?);
            } else {
                self.pos += 1;
                items.push(inline(&rest, number, item_col)?);
            }
        }
        Ok(Node {
            value: Value::Seq(items),
            line: start_line,
            col: start_col,
        })
    }
}

fn inline(text: &str, line: usize, col: usize) -> Result<Node, YamlError> {
    let value = if text.starts_with('[') {
        Value::Seq(flow_sequence(text, line, col)?)
    } else if text.starts_with('{') {
        return Err(syntax(line, col, "flow mappings are not supported"));
    } else {
        let (scalar, used) = scalar(text, line, col)?;
        if used != text.len() {
            return Err(syntax(line, col + used, "unexpected characters after quoted scalar"));
        }
        Value::Scalar(scalar)
    };
    Ok(Node { value, line, col })
}

fn flow_sequence(text: &str, line: usize, col: usize) -> Result<Vec<Node>, YamlError> {
    let inner_start = 1;
    let mut items = Vec::new();
    let mut i = inner_start;
    let bytes = text.as_bytes();
    loop {
        while i < text.len() && bytes[i] == b' ' {
            i += 1;
        }
        if i >= text.len() {
            return Err(syntax(line, col + i, "unterminated flow sequence"));
        }
        if bytes[i] == b']' {
            if !items.is_empty() {
                return Err(syntax(line, col + i, "trailing comma in flow sequence"));
            }
            i += 1;
            break;
        }
        let rest = &text[i..];
        let (item, used) = if rest.starts_with(['"', '\'']) {
            scalar(rest, line, col + i)?
        } else {
            let end = rest.find([',', ']']).ok_or_else(|| syntax(line, col + i, "unterminated flow sequence"))?;
            let raw = rest[..end].trim_end();
            if raw.is_empty() {
                return Err(syntax(line, col + i, "empty flow sequence item"));
            }
            if raw.starts_with('[') {
                return Err(syntax(line, col + i, "nested flow sequences are not supported"));
            }
            (
                Scalar {
                    text: raw.to_string(),
                    quoted: false,
                },
                end,
            )
        };
        items.push(Node {
            value: Value::Scalar(item),
            line,
            col: col + i,
        });
        i += used;
        while i < text.len() && bytes[i] == b' ' {
            i += 1;
        }
        match bytes.get(i) {
            Some(b',') => {
                i += 1;
                // a comma must be followed by another item
                let mut j = i;
                while j < text.len() && bytes[j] == b' ' {
                    j += 1;
                }
                if bytes.get(j) == Some(&b']') {
                    return Err(syntax(line, col + j, "trailing comma in flow sequence"));
                }
            }
            Some(b']') => {
                i += 1;
                break;
            }
            _ => return Err(syntax(line, col + i, "expected `,` or `]`")),
        }
    }
    if i != text.len() {
        return Err(syntax(line, col + i, "unexpected characters after flow sequence"));
    }
    Ok(items)
}

/// Parses one scalar at the start of `text`, returning it and the bytes consumed.
fn scalar(text: &str, line: usize, col: usize) -> Result<(Scalar, usize), YamlError> {
    let mut chars = text.char_indices();
    match chars.next() {
        Some((_, '"')) => {
            let mut out = String::new();
            let mut escaped = false;
            for (i, c) in chars {
                if escaped {
                    out.push(match c {
                        'n' => '\n',
                        't' => '\t',
                        'r' => '\r',
                        '0' => '\0',
                        '\\' => '\\',
                        '"' => '"',
                        '/' => '/',
                        _ => return Err(syntax(line, col + i, format!("unknown escape `\\{c}`"))),
                    });
                    escaped = false;
                } else if c == '\\' {
                    escaped = true;
                } else if c == '"' {
                    return Ok((Scalar { text: out, quoted: true }, i + 1));
                } else {
                    out.push(c);
                }
            }
            Err(syntax(line, col, "unterminated double-quoted string"))
        }
        Some((_, '\'')) => {
            let mut out = String::new();
            let mut iter = chars.peekable();
            while let Some((i, c)) = iter.next() {
                if c == '\'' {
                    if matches!(iter.peek(), Some((_, '\''))) {
                        iter.next();
                        out.push('\'');
                    } else {
                        return Ok((Scalar { text: out, quoted: true }, i + 1));
                    }
                } else {
                    out.push(c);
                }
            }
            Err(syntax(line, col, "unterminated single-quoted string"))
        }
        _ => {
            if text.starts_with(['&', '*', '!', '|', '>', '%', '@', '`']) {
                return Err(syntax(line, col, format!("unsupported YAML construct `{}`", &text[..1])));
            }
            Ok((
                Scalar {
                    text: text.to_string(),
                    quoted: false,
                },
                text.len(),
            ))
        }
    }
}

/// Double-quoted rendering that [`parse`] reads back to the same string.
pub fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            '\0' => out.push_str("\\0"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}
