use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::ast::{Element, PatternAst};
use super::lemma::Lemmatizer;

/// How many wildcard tokens are implicitly allowed between authored elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapPolicy {
    /// `None` disables implicit gaps: authored elements must be adjacent.
    pub max_gap: Option<u32>,
}

impl GapPolicy {
    pub const CONTIGUOUS: GapPolicy = GapPolicy { max_gap: None };

    pub fn bounded(max_gap: u32) -> Self {
        GapPolicy { max_gap: Some(max_gap) }
    }
}

impl Default for GapPolicy {
    fn default() -> Self {
        GapPolicy::bounded(3)
    }
}

/// Lemmatizes tokens and inserts implicit gaps between adjacent non-gap elements.
/// Literals are left untouched. Idempotent on its own output.
pub fn normalize(ast: &PatternAst, lemmatizer: Lemmatizer, policy: GapPolicy) -> PatternAst {
    let mut out: Vec<Element> = Vec::with_capacity(ast.elements.len() * 2);
    for e in &ast.elements {
        let e = match e {
            Element::Token(t) => Element::Token(lemmatizer.lemma(t)),
            Element::Alternatives(alts) => {
                let mut members: Vec<Vec<_>> = Vec::with_capacity(alts.len());
                for m in alts {
                    let m: Vec<_> = m.iter().map(|t| lemmatizer.lemma(t)).collect();
                    if !members.contains(&m) {
                        members.push(m);
                    }
                }
                Element::Alternatives(members)
            }
            other => other.clone(),
        };
        if let (Some(g), Some(prev)) = (policy.max_gap, out.last()) {
            if g > 0 && !prev.is_gap() && !e.is_gap() {
                out.push(Element::Gap { min: 0, max: Some(g) });
            }
        }
        out.push(e);
    }
    PatternAst::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::ast::parse_pattern;
    use alloc::string::ToString;
    use alloc::vec;

    fn tok(s: &str) -> Element {
        Element::Token(s.to_string())
    }

    const G3: Element = Element::Gap { min: 0, max: Some(3) };

    #[test]
    fn lemmatizes_and_inserts_gaps() {
        let ast = PatternAst::new(vec![tok("making"), tok("decisions")]);
        let n = normalize(&ast, Lemmatizer::Rules, GapPolicy::default());
        assert_eq!(n.elements, vec![tok("make"), G3, tok("decision")]);
    }

    #[test]
    fn literals_exempt() {
        let ast = PatternAst::new(vec![Element::Literal(vec!["we".into(), "will".into()])]);
        assert_eq!(normalize(&ast, Lemmatizer::Rules, GapPolicy::default()), ast);
    }

    #[test]
    fn how_many_apply() {
        let n = normalize(&parse_pattern("how many apply").unwrap(), Lemmatizer::Rules, GapPolicy::default());
        assert_eq!(n.elements, vec![tok("how"), G3, tok("many"), G3, tok("apply")]);
    }

    #[test]
    fn authored_gaps_suppress_insertion() {
        let n = normalize(&parse_pattern("share * views").unwrap(), Lemmatizer::Rules, GapPolicy::default());
        assert_eq!(n.elements, vec![tok("share"), Element::unbounded_gap(), tok("view")]);
    }

    #[test]
    fn contiguous_policy() {
        let n = normalize(&parse_pattern("a b").unwrap(), Lemmatizer::Rules, GapPolicy::CONTIGUOUS);
        assert_eq!(n.elements, vec![tok("a"), tok("b")]);
    }

    #[test]
    fn idempotent() {
        for src in ["making decisions _ quickly", "\"we will\" [ran|runs] *", "a *{1,2} b /x+/"] {
            let once = normalize(&parse_pattern(src).unwrap(), Lemmatizer::Rules, GapPolicy::default());
            assert_eq!(normalize(&once, Lemmatizer::Rules, GapPolicy::default()), once);
        }
    }
}
