//! Pattern DSL and its syntax tree.
//!
//! ```text
//! pattern  := element+                (whitespace separated)
//! element  := word                    token, lemmatized at normalization
//!           | '"' words '"'           literal token sequence, matched verbatim
//!           | '[' words ('|' words)* ']'   alternatives
//!           | '/' regex '/'           anchored regex over one token
//!           | '_'                     exactly one arbitrary token
//!           | '*'                     gap of zero or more tokens
//!           | '*{m,n}' | '*{m,}'      bounded / lower-bounded gap
//! ```

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use super::PatternError;
use crate::text;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Element {
    Token(String),
    Literal(Vec<String>),
    AnyOne,
    /// `max == None` is unbounded.
    Gap { min: u32, max: Option<u32> },
    Alternatives(Vec<Vec<String>>),
    Regex(String),
    /// Retracted alternatives; the id indexes the batch's class table.
    Class(u32),
}

impl Element {
    pub fn is_gap(&self) -> bool {
        matches!(self, Element::Gap { .. })
    }

    pub fn unbounded_gap() -> Self {
        Element::Gap { min: 0, max: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct PatternAst {
    pub elements: Vec<Element>,
}

impl PatternAst {
    pub fn new(elements: Vec<Element>) -> Self {
        PatternAst { elements }
    }
}

impl fmt::Display for PatternAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.elements.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            match e {
                Element::Token(t) => f.write_str(t)?,
                Element::Literal(ws) => write!(f, "\"{}\"", ws.join(" "))?,
                Element::AnyOne => f.write_str("_")?,
                Element::Gap { min, max } => match max {
                    None if *min == 0 => f.write_str("*")?,
                    None => write!(f, "*{{{min},}}")?,
                    Some(m) => write!(f, "*{{{min},{m}}}")?,
                },
                Element::Alternatives(alts) => {
                    f.write_str("[")?;
                    for (j, a) in alts.iter().enumerate() {
                        if j > 0 {
                            f.write_str("|")?;
                        }
                        f.write_str(&a.join(" "))?;
                    }
                    f.write_str("]")?;
                }
                Element::Regex(r) => write!(f, "/{r}/")?,
                Element::Class(c) => write!(f, "<class{c}>")?,
            }
        }
        Ok(())
    }
}

/// A pattern as authored, before parsing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternSource {
    pub pattern_id: String,
    pub text: String,
}

impl PatternSource {
    pub fn new(pattern_id: impl Into<String>, text: impl Into<String>) -> Self {
        PatternSource { pattern_id: pattern_id.into(), text: text.into() }
    }
}

fn syntax(offset: usize, message: &str) -> PatternError {
    PatternError::Syntax { offset, message: message.to_string() }
}

fn is_special(c: char) -> bool {
    matches!(c, '[' | ']' | '|' | '"' | '/')
}

/// Tokenizes a bare word chunk; rejects characters reserved by the DSL.
fn word_tokens(chunk: &str, offset: usize) -> Result<Vec<String>, PatternError> {
    if let Some(pos) = chunk.find(is_special) {
        return Err(syntax(offset + pos, "unexpected reserved character"));
    }
    Ok(text::token_strings(chunk))
}

fn push_element(out: &mut Vec<Element>, e: Element) {
    if let (Some(Element::Gap { min: a, max: am }), Element::Gap { min: b, max: bm }) = (out.last_mut(), &e) {
        *a += *b;
        *am = match (*am, *bm) {
            (Some(x), Some(y)) => Some(x + y),
            _ => None,
        };
        return;
    }
    out.push(e);
}

fn parse_gap(chunk: &str, offset: usize) -> Result<Element, PatternError> {
    let body = chunk
        .strip_prefix("*{")
        .and_then(|b| b.strip_suffix('}'))
        .ok_or_else(|| syntax(offset, "malformed gap"))?;
    let (lo, hi) = body.split_once(',').ok_or_else(|| syntax(offset, "malformed gap"))?;
    let min: u32 = lo.trim().parse().map_err(|_| syntax(offset, "malformed gap bound"))?;
    let max = match hi.trim() {
        "" => None,
        h => Some(h.parse::<u32>().map_err(|_| syntax(offset, "malformed gap bound"))?),
    };
    if max.is_some_and(|m| m < min) {
        return Err(syntax(offset, "gap maximum below minimum"));
    }
    Ok(Element::Gap { min, max })
}

/// Parses one DSL pattern. Tokens are lowercased but not lemmatized.
pub fn parse_pattern(text: &str) -> Result<PatternAst, PatternError> {
    if text.trim().is_empty() {
        return Err(syntax(0, "empty pattern"));
    }
    let mut out = Vec::new();
    let mut i = 0;
    let bytes = text.as_bytes();
    while i < text.len() {
        let c = text[i..].chars().next().unwrap();
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        match c {
            '[' => {
                let close = text[i + 1..].find(']').ok_or_else(|| syntax(i, "unterminated alternatives"))?;
                let body = &text[i + 1..i + 1 + close];
                if body.contains('[') {
                    return Err(syntax(i + 1 + body.find('[').unwrap(), "nested alternatives"));
                }
                let mut alts = Vec::new();
                let mut off = i + 1;
                for member in body.split('|') {
                    let toks = word_tokens(member, off)?;
                    if toks.is_empty() {
                        return Err(syntax(off, "empty alternative"));
                    }
                    if toks.iter().any(|t| t == "_" || t == "*") {
                        return Err(syntax(off, "wildcards are not allowed inside alternatives"));
                    }
                    alts.push(toks);
                    off += member.len() + 1;
                }
                push_element(&mut out, Element::Alternatives(alts));
                i += close + 2;
            }
            '"' => {
                let close = text[i + 1..].find('"').ok_or_else(|| syntax(i, "unterminated literal"))?;
                let toks = text::token_strings(&text[i + 1..i + 1 + close]);
                if toks.is_empty() {
                    return Err(syntax(i, "empty literal"));
                }
                push_element(&mut out, Element::Literal(toks));
                i += close + 2;
            }
            '/' => {
                let mut j = i + 1;
                let mut src = String::new();
                loop {
                    if j >= bytes.len() {
                        return Err(syntax(i, "unterminated regex"));
                    }
                    let ch = text[j..].chars().next().unwrap();
                    if ch == '\\' && text[j + 1..].starts_with('/') {
                        src.push('/');
                        j += 2;
                        continue;
                    }
                    if ch == '/' {
                        break;
                    }
                    src.push(ch);
                    j += ch.len_utf8();
                }
                if src.is_empty() {
                    return Err(syntax(i, "empty regex"));
                }
                if let Err(e) = super::symbols::compile_token_regex(&src) {
                    return Err(PatternError::Syntax { offset: i, message: e });
                }
                push_element(&mut out, Element::Regex(src));
                i = j + 1;
            }
            ']' | '|' => return Err(syntax(i, "unexpected delimiter")),
            _ => {
                let end = text[i..]
                    .find(|ch: char| ch.is_whitespace() || ch == '[' || ch == '"')
                    .map_or(text.len(), |e| i + e);
                let chunk = &text[i..end];
                match chunk {
                    "*" => push_element(&mut out, Element::unbounded_gap()),
                    "_" => push_element(&mut out, Element::AnyOne),
                    _ if chunk.starts_with("*{") => push_element(&mut out, parse_gap(chunk, i)?),
                    _ => {
                        for t in word_tokens(chunk, i)? {
                            push_element(&mut out, Element::Token(t));
                        }
                    }
                }
                i = end;
            }
        }
    }
    if out.is_empty() {
        return Err(syntax(0, "pattern has no elements"));
    }
    Ok(PatternAst::new(out))
}
