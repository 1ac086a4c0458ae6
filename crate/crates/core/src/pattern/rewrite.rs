//! Batch rewriting ahead of automaton construction: alternatives factoring,
//! retraction of large alternatives into class tokens, and duplicate removal.
//! Prefix and suffix sharing across patterns happens in the element trie
//! built by the NFA stage.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::ast::{Element, PatternAst};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RewriteOptions {
    pub dedup: bool,
    /// Alternatives with at least this many single-token members become a class token.
    pub retract_threshold: Option<usize>,
    pub factor: bool,
}

impl Default for RewriteOptions {
    fn default() -> Self {
        RewriteOptions { dedup: true, retract_threshold: Some(8), factor: true }
    }
}

impl RewriteOptions {
    /// Every rewrite disabled; used to check that rewriting preserves the language.
    pub const NONE: RewriteOptions = RewriteOptions { dedup: false, retract_threshold: None, factor: false };
}

/// One surviving pattern and the original pattern indices it accepts for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewrittenPattern {
    pub ast: PatternAst,
    pub labels: Vec<u32>,
}

/// Class token member sets, as lemmas; indexed by the id in `Element::Class`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClassSets {
    pub classes: Vec<Vec<String>>,
}

fn common_prefix(members: &[Vec<String>]) -> usize {
    let min = members.iter().map(Vec::len).min().unwrap_or(0);
    (0..min).take_while(|&i| members.iter().all(|m| m[i] == members[0][i])).count()
}

fn common_suffix(members: &[Vec<String>], skip: usize) -> usize {
    let min = members.iter().map(|m| m.len() - skip).min().unwrap_or(0);
    (0..min)
        .take_while(|&i| {
            let a = &members[0][members[0].len() - 1 - i];
            members.iter().all(|m| &m[m.len() - 1 - i] == a)
        })
        .count()
}

/// `[x a y|x b y]` becomes `x [a|b] y`.
fn factor_alternatives(members: &[Vec<String>], out: &mut Vec<Element>) {
    let mut uniq: Vec<Vec<String>> = Vec::with_capacity(members.len());
    for m in members {
        if !uniq.contains(m) {
            uniq.push(m.clone());
        }
    }
    if uniq.len() == 1 {
        out.extend(uniq[0].iter().cloned().map(Element::Token));
        return;
    }
    let pre = common_prefix(&uniq);
    let suf = common_suffix(&uniq, pre);
    out.extend(uniq[0][..pre].iter().cloned().map(Element::Token));
    let inner: Vec<Vec<String>> = uniq.iter().map(|m| m[pre..m.len() - suf].to_vec()).collect();
    out.push(Element::Alternatives(inner));
    let first = &uniq[0];
    out.extend(first[first.len() - suf..].iter().cloned().map(Element::Token));
}

/// Rewrites a normalized batch. Pattern `i` of the input carries label `i`.
pub fn rewrite_batch(patterns: &[PatternAst], opts: RewriteOptions) -> (Vec<RewrittenPattern>, ClassSets) {
    let mut classes = ClassSets::default();
    let mut class_ids: BTreeMap<Vec<String>, u32> = BTreeMap::new();
    let mut survivors: Vec<RewrittenPattern> = Vec::with_capacity(patterns.len());
    let mut seen: BTreeMap<PatternAst, usize> = BTreeMap::new();

    for (label, ast) in patterns.iter().enumerate() {
        let mut elements = Vec::with_capacity(ast.elements.len());
        for e in &ast.elements {
            match e {
                Element::Alternatives(members) if opts.factor => factor_alternatives(members, &mut elements),
                other => elements.push(other.clone()),
            }
        }
        if let Some(threshold) = opts.retract_threshold {
            for e in elements.iter_mut() {
                let Element::Alternatives(members) = e else { continue };
                if members.len() < threshold || members.iter().any(|m| m.len() != 1) {
                    continue;
                }
                let mut set: Vec<String> = members.iter().map(|m| m[0].clone()).collect();
                set.sort();
                set.dedup();
                let next = class_ids.len() as u32;
                let id = *class_ids.entry(set.clone()).or_insert_with(|| {
                    classes.classes.push(set);
                    next
                });
                *e = Element::Class(id);
            }
        }
        let ast = PatternAst::new(elements);
        if opts.dedup {
            if let Some(&i) = seen.get(&ast) {
                survivors[i].labels.push(label as u32);
                continue;
            }
            seen.insert(ast.clone(), survivors.len());
        }
        survivors.push(RewrittenPattern { ast, labels: alloc::vec![label as u32] });
    }
    (survivors, classes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::ast::parse_pattern;
    use alloc::string::ToString;
    use alloc::vec;

    fn p(s: &str) -> PatternAst {
        parse_pattern(s).unwrap()
    }

    #[test]
    fn duplicates_collapse() {
        let (out, _) = rewrite_batch(&[p("a b"), p("c"), p("a b")], RewriteOptions::default());
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].labels, vec![0, 2]);
        assert_eq!(out[1].labels, vec![1]);
    }

    #[test]
    fn large_alternatives_retracted() {
        let colors = "red orange yellow green blue indigo violet purple pink brown black white gray cyan \
                      magenta teal navy maroon olive beige";
        let words: Vec<&str> = colors.split_whitespace().collect();
        assert_eq!(words.len(), 20);
        let src = alloc::format!("favorite [{}]", words.join("|"));
        let (out, classes) = rewrite_batch(&[p(&src), p(&src.replace("favorite", "like"))], RewriteOptions::default());
        assert_eq!(out[0].ast.elements[1], Element::Class(0));
        assert_eq!(out[1].ast.elements[1], Element::Class(0));
        assert_eq!(classes.classes.len(), 1);
        assert_eq!(classes.classes[0].len(), 20);
    }

    #[test]
    fn small_alternatives_kept() {
        let (out, classes) = rewrite_batch(&[p("[a|b|c]")], RewriteOptions::default());
        assert!(classes.classes.is_empty());
        assert!(matches!(out[0].ast.elements[0], Element::Alternatives(_)));
    }

    #[test]
    fn alternatives_prefix_suffix_factored() {
        let (out, _) = rewrite_batch(&[p("[make a decision|reach a decision|make a call]")], RewriteOptions::default());
        // no prefix shared by all three; suffix none either
        assert_eq!(out[0].ast.elements.len(), 1);
        let (out, _) = rewrite_batch(&[p("[make a big decision|make a hard decision]")], RewriteOptions::default());
        assert_eq!(
            out[0].ast.elements,
            vec![
                Element::Token("make".to_string()),
                Element::Token("a".to_string()),
                Element::Alternatives(vec![vec!["big".to_string()], vec!["hard".to_string()]]),
                Element::Token("decision".to_string()),
            ]
        );
    }

    #[test]
    fn disabled_rewrites_keep_everything() {
        let (out, classes) = rewrite_batch(&[p("a"), p("a")], RewriteOptions::NONE);
        assert_eq!(out.len(), 2);
        assert!(classes.classes.is_empty());
    }
}
