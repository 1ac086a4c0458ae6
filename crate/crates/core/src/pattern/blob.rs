//! Versioned binary encoding of a compiled matcher. All integers are
//! little-endian u32; strings are a length followed by UTF-8 bytes.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::dfa::Dfa;
use super::lemma::Lemmatizer;
use super::matcher::{CompiledMatcher, MatcherStats};
use super::symbols::{ClassTable, TokenInterner};
use super::PatternError;

pub const MAGIC: &[u8; 8] = b"REPFSM1\0";

struct Writer(Vec<u8>);

impl Writer {
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }

    fn len(&mut self, n: usize) {
        self.u32(n as u32);
    }

    fn str(&mut self, s: &str) {
        self.len(s.len());
        self.0.extend_from_slice(s.as_bytes());
    }

    fn strs(&mut self, v: &[String]) {
        self.len(v.len());
        for s in v {
            self.str(s);
        }
    }

    fn u32s(&mut self, v: &[u32]) {
        self.len(v.len());
        for &x in v {
            self.u32(x);
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

fn bad(msg: &str) -> PatternError {
    PatternError::Blob(msg.to_string())
}

impl Reader<'_> {
    fn u32(&mut self) -> Result<u32, PatternError> {
        let b = self.buf.get(self.pos..self.pos + 4).ok_or_else(|| bad("truncated"))?;
        self.pos += 4;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    /// Reads a count, refusing counts that cannot fit in the remaining bytes.
    fn len(&mut self, unit: usize) -> Result<usize, PatternError> {
        let n = self.u32()? as usize;
        if n.saturating_mul(unit) > self.buf.len() - self.pos {
            return Err(bad("count exceeds blob size"));
        }
        Ok(n)
    }

    fn str(&mut self) -> Result<String, PatternError> {
        let n = self.len(1)?;
        let b = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        String::from_utf8(b.to_vec()).map_err(|_| bad("invalid utf-8"))
    }

    fn strs(&mut self) -> Result<Vec<String>, PatternError> {
        let n = self.len(4)?;
        (0..n).map(|_| self.str()).collect()
    }

    fn u32s(&mut self) -> Result<Vec<u32>, PatternError> {
        let n = self.len(4)?;
        (0..n).map(|_| self.u32()).collect()
    }
}

pub fn to_bytes(m: &CompiledMatcher) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(MAGIC);
    let i = &m.interner;
    w.u32(i.lemmatizer().code());
    w.strs(i.regex_sources());
    w.strs(i.lemmas());
    w.strs(i.literals());
    w.len(m.classes.len());
    for c in m.classes.iter() {
        w.u32s(c);
    }
    w.u32(m.dfa.n_cols);
    w.u32s(&m.col_of);
    w.u32(m.dfa.start);
    w.u32s(&m.dfa.default);
    w.u32s(&m.dfa.edge_off);
    w.len(m.dfa.edges.len());
    for &(c, t) in &m.dfa.edges {
        w.u32(c);
        w.u32(t);
    }
    w.u32s(&m.dfa.accept);
    w.len(m.dfa.accept_sets.len());
    for a in &m.dfa.accept_sets {
        w.u32s(a);
    }
    w.strs(&m.pattern_ids);
    let s = m.stats;
    for v in [s.patterns, s.unique_patterns, s.classes, s.nfa_states, s.dfa_states, s.min_states, s.columns] {
        w.u32(v);
    }
    w.0
}

pub fn from_bytes(buf: &[u8]) -> Result<CompiledMatcher, PatternError> {
    if buf.len() < MAGIC.len() || &buf[..MAGIC.len()] != MAGIC {
        return Err(bad("bad magic"));
    }
    let mut r = Reader { buf, pos: MAGIC.len() };
    let lemmatizer = Lemmatizer::from_code(r.u32()?).ok_or_else(|| bad("unknown lemmatizer"))?;
    let regexes = r.strs()?;
    if regexes.len() > super::matcher::MAX_REGEXES {
        return Err(bad("too many regexes"));
    }
    let lemmas = r.strs()?;
    let literals = r.strs()?;
    let interner = TokenInterner::new(lemmatizer, regexes, lemmas, literals).map_err(|e| bad(&e))?;
    let n_classes = r.len(4)?;
    let classes = ClassTable::new((0..n_classes).map(|_| r.u32s()).collect::<Result<_, _>>()?);
    let n_cols = r.u32()?;
    let col_of = r.u32s()?;
    let start = r.u32()?;
    let default = r.u32s()?;
    let edge_off = r.u32s()?;
    let n_edges = r.len(8)?;
    let mut edges = Vec::with_capacity(n_edges);
    for _ in 0..n_edges {
        edges.push((r.u32()?, r.u32()?));
    }
    let accept = r.u32s()?;
    let n_sets = r.len(4)?;
    let accept_sets = (0..n_sets).map(|_| r.u32s()).collect::<Result<Vec<_>, _>>()?;
    let pattern_ids = r.strs()?;
    let mut s = [0u32; 7];
    for v in s.iter_mut() {
        *v = r.u32()?;
    }
    if r.pos != buf.len() {
        return Err(bad("trailing bytes"));
    }

    let n = default.len();
    let ok = n > 0
        && (start as usize) < n
        && col_of.len() == interner.len()
        && col_of.iter().all(|&c| c < n_cols)
        && edge_off.len() == n + 1
        && edge_off.windows(2).all(|w| w[0] <= w[1])
        && edge_off[0] == 0
        && edge_off[n] as usize == edges.len()
        && default.iter().all(|&t| (t as usize) < n)
        && edges.iter().all(|&(c, t)| c < n_cols && (t as usize) < n)
        && accept.len() == n
        && accept.iter().all(|&a| (a as usize) < accept_sets.len())
        && accept_sets.iter().flatten().all(|&p| (p as usize) < pattern_ids.len())
        && classes.iter().flatten().all(|&t| (t as usize) < interner.len());
    if !ok {
        return Err(bad("inconsistent tables"));
    }
    let dfa = Dfa { n_cols, start, default, edge_off, edges, accept, accept_sets };
    let stats = MatcherStats {
        patterns: s[0],
        unique_patterns: s[1],
        classes: s[2],
        nfa_states: s[3],
        dfa_states: s[4],
        min_states: s[5],
        columns: s[6],
    };
    Ok(CompiledMatcher::assemble(interner, classes, col_of, dfa, pattern_ids, stats))
}
