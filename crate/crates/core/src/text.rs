//! Surface tokenization shared by pattern compilation, evidence extraction and
//! persona style detection.
//!
//! Text is lowercased and split into word tokens (alphanumerics with inner
//! apostrophes), emoticon tokens, and single-character punctuation tokens.

use alloc::string::String;
use alloc::vec::Vec;

/// Emoticons recognized as single tokens, longest first.
pub const EMOTICONS: &[&str] = &[
    ":-)", ":-(", ":-d", ":-p", ";-)", ":')", ":)", ":(", ":d", ":p", ";)", ":/", "<3", "^^", "^_^",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Word,
    Emoticon,
    Punct,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub kind: TokenKind,
    /// Byte offset of the token in the lowercased input.
    pub offset: usize,
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

/// Splits `input` into lowercase tokens.
pub fn tokenize(input: &str) -> Vec<Token> {
    let lower = input.to_lowercase();
    let mut out = Vec::new();
    let bytes = lower.as_str();
    let mut i = 0;
    'outer: while i < bytes.len() {
        let rest = &bytes[i..];
        let c = rest.chars().next().unwrap();
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        for emo in EMOTICONS {
            if rest.starts_with(emo) {
                // ":p" / ":d" followed by a letter is more likely a word fragment ("re:peat").
                let after = rest[emo.len()..].chars().next();
                if emo.ends_with(|ch: char| ch.is_alphabetic()) && after.is_some_and(is_word_char) {
                    continue;
                }
                out.push(Token { text: String::from(*emo), kind: TokenKind::Emoticon, offset: i });
                i += emo.len();
                continue 'outer;
            }
        }
        if is_word_char(c) {
            let start = i;
            let mut end = i;
            let mut chars = rest.char_indices().peekable();
            while let Some((off, ch)) = chars.next() {
                if is_word_char(ch) {
                    end = i + off + ch.len_utf8();
                } else if ch == '\'' || ch == '\u{2019}' {
                    // Keep inner apostrophes ("don't"), drop trailing ones.
                    match chars.peek() {
                        Some(&(_, nx)) if is_word_char(nx) => {
                            end = i + off + ch.len_utf8();
                        }
                        _ => break,
                    }
                } else {
                    break;
                }
            }
            let mut word = String::from(&bytes[start..end]);
            if word.contains('\u{2019}') {
                word = word.replace('\u{2019}', "'");
            }
            out.push(Token { text: word, kind: TokenKind::Word, offset: start });
            i = end;
            continue;
        }
        out.push(Token { text: String::from(c), kind: TokenKind::Punct, offset: i });
        i += c.len_utf8();
    }
    out
}

/// Token strings only.
pub fn token_strings(input: &str) -> Vec<String> {
    tokenize(input).into_iter().map(|t| t.text).collect()
}

/// Number of word tokens (emoticons and punctuation excluded).
pub fn word_count(input: &str) -> usize {
    tokenize(input).iter().filter(|t| t.kind == TokenKind::Word).count()
}

/// Splits text into sentences on terminal punctuation, keeping the terminator.
pub fn sentences(input: &str) -> Vec<Vec<Token>> {
    let mut out = Vec::new();
    let mut cur: Vec<Token> = Vec::new();
    let mut toks = tokenize(input).into_iter().peekable();
    while let Some(t) = toks.next() {
        let terminal = t.kind == TokenKind::Punct && matches!(t.text.as_str(), "." | "!" | "?");
        cur.push(t);
        if terminal {
            // Runs like "!!" or "?!" stay in one sentence.
            while let Some(nx) = toks.peek() {
                if nx.kind == TokenKind::Punct && matches!(nx.text.as_str(), "." | "!" | "?") {
                    cur.push(toks.next().unwrap());
                } else if nx.kind == TokenKind::Emoticon {
                    cur.push(toks.next().unwrap());
                } else {
                    break;
                }
            }
            out.push(core::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}
