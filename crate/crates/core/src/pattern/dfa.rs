//! Subset construction and minimization over an alphabet of token columns.
//!
//! A state stores a default target (taken on every column without an explicit
//! edge) and a sorted list of explicit `(column, target)` exceptions. Wildcard
//! gaps make the default the common case, which keeps tables sparse.

use alloc::vec;
use alloc::vec::Vec;

use super::nfa::{Alphabet, Nfa, WILD};
use super::symbols::FxMap;
use super::PatternError;

pub const DEAD: u32 = 0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dfa {
    pub n_cols: u32,
    pub start: u32,
    pub default: Vec<u32>,
    pub edge_off: Vec<u32>,
    pub edges: Vec<(u32, u32)>,
    /// Index into `accept_sets` per state; set 0 is empty.
    pub accept: Vec<u32>,
    pub accept_sets: Vec<Vec<u32>>,
}

impl Dfa {
    pub fn state_count(&self) -> usize {
        self.default.len()
    }

    pub fn explicit(&self, s: u32) -> &[(u32, u32)] {
        &self.edges[self.edge_off[s as usize] as usize..self.edge_off[s as usize + 1] as usize]
    }

    #[inline]
    pub fn next(&self, s: u32, col: u32) -> u32 {
        let row = self.explicit(s);
        if row.len() <= 8 {
            for &(c, t) in row {
                if c == col {
                    return t;
                }
            }
            self.default[s as usize]
        } else {
            match row.binary_search_by_key(&col, |&(c, _)| c) {
                Ok(i) => row[i].1,
                Err(_) => self.default[s as usize],
            }
        }
    }

    pub fn accepts(&self, s: u32) -> &[u32] {
        &self.accept_sets[self.accept[s as usize] as usize]
    }
}

struct Closure {
    mark: Vec<u32>,
    gen: u32,
    stack: Vec<u32>,
}

impl Closure {
    fn new(n: usize) -> Self {
        Closure { mark: vec![0; n], gen: 0, stack: Vec::new() }
    }

    /// Epsilon closure of `seeds`, sorted.
    fn run(&mut self, nfa: &Nfa, seeds: &[u32], out: &mut Vec<u32>) {
        self.gen += 1;
        out.clear();
        for &s in seeds {
            if self.mark[s as usize] != self.gen {
                self.mark[s as usize] = self.gen;
                self.stack.push(s);
            }
        }
        while let Some(s) = self.stack.pop() {
            out.push(s);
            for &t in &nfa.eps[s as usize] {
                if self.mark[t as usize] != self.gen {
                    self.mark[t as usize] = self.gen;
                    self.stack.push(t);
                }
            }
        }
        out.sort_unstable();
    }
}

struct SetInterner {
    ids: FxMap<Vec<u32>, u32>,
    sets: Vec<Vec<u32>>,
}

impl SetInterner {
    fn new() -> Self {
        let mut s = SetInterner { ids: FxMap::default(), sets: Vec::new() };
        s.get(&[]);
        s
    }

    fn get(&mut self, set: &[u32]) -> u32 {
        if let Some(&id) = self.ids.get(set) {
            return id;
        }
        let id = self.sets.len() as u32;
        self.ids.insert(set.to_vec(), id);
        self.sets.push(set.to_vec());
        id
    }
}

/// Subset construction. State 0 is the dead state; fails once `max_states` is exceeded.
pub fn determinize(nfa: &Nfa, alphabet: &Alphabet, max_states: usize) -> Result<Dfa, PatternError> {
    let mut states = SetInterner::new();
    let mut accept_sets = SetInterner::new();
    let mut closure = Closure::new(nfa.state_count());
    let mut buf = Vec::new();

    let start = if nfa.accept.iter().all(Vec::is_empty) {
        DEAD
    } else {
        closure.run(nfa, &[nfa.start], &mut buf);
        states.get(&buf)
    };

    let mut default = Vec::new();
    let mut edge_off = vec![0u32];
    let mut edges: Vec<(u32, u32)> = Vec::new();
    let mut accept = Vec::new();

    let mut wild_targets = Vec::new();
    let mut labeled: Vec<(u32, u32)> = Vec::new();
    let mut seeds = Vec::new();
    let mut acc = Vec::new();
    let mut next = 0usize;
    while next < states.sets.len() {
        if states.sets.len() > max_states {
            return Err(PatternError::Capacity { states: states.sets.len(), limit: max_states });
        }
        let set = core::mem::take(&mut states.sets[next]);
        wild_targets.clear();
        labeled.clear();
        acc.clear();
        for &s in &set {
            acc.extend_from_slice(&nfa.accept[s as usize]);
            for &(l, t) in &nfa.edges[s as usize] {
                if l == WILD {
                    wild_targets.push(t);
                } else {
                    for &c in &alphabet.label_cols[l as usize] {
                        labeled.push((c, t));
                    }
                }
            }
        }
        acc.sort_unstable();
        acc.dedup();
        accept.push(accept_sets.get(&acc));

        closure.run(nfa, &wild_targets, &mut buf);
        let d = states.get(&buf);
        default.push(d);

        labeled.sort_unstable();
        labeled.dedup();
        let mut i = 0;
        while i < labeled.len() {
            let col = labeled[i].0;
            seeds.clear();
            seeds.extend_from_slice(&wild_targets);
            while i < labeled.len() && labeled[i].0 == col {
                seeds.push(labeled[i].1);
                i += 1;
            }
            closure.run(nfa, &seeds, &mut buf);
            let t = states.get(&buf);
            if t != d {
                edges.push((col, t));
            }
        }
        edge_off.push(edges.len() as u32);
        states.sets[next] = set;
        next += 1;
    }
    Ok(Dfa { n_cols: alphabet.n_cols, start, default, edge_off, edges, accept, accept_sets: accept_sets.sets })
}

/// Refinable partition over `0..n`.
struct Partition {
    elems: Vec<u32>,
    loc: Vec<u32>,
    block_of: Vec<u32>,
    first: Vec<u32>,
    end: Vec<u32>,
    marked: Vec<u32>,
}

impl Partition {
    fn new(keys: &[u32]) -> Self {
        let n = keys.len();
        let mut elems: Vec<u32> = (0..n as u32).collect();
        elems.sort_by_key(|&s| (keys[s as usize], s));
        let mut loc = vec![0; n];
        let mut block_of = vec![0; n];
        let mut first = Vec::new();
        let mut end = Vec::new();
        for (i, &s) in elems.iter().enumerate() {
            loc[s as usize] = i as u32;
            if i == 0 || keys[s as usize] != keys[elems[i - 1] as usize] {
                if i > 0 {
                    end.push(i as u32);
                }
                first.push(i as u32);
            }
            block_of[s as usize] = (first.len() - 1) as u32;
        }
        if n > 0 {
            end.push(n as u32);
        }
        let marked = vec![0; first.len()];
        Partition { elems, loc, block_of, first, end, marked }
    }

    fn len(&self) -> usize {
        self.first.len()
    }

    fn size(&self, b: u32) -> u32 {
        self.end[b as usize] - self.first[b as usize]
    }

    fn members(&self, b: u32) -> &[u32] {
        &self.elems[self.first[b as usize] as usize..self.end[b as usize] as usize]
    }

    fn mark(&mut self, s: u32, touched: &mut Vec<u32>) {
        let b = self.block_of[s as usize] as usize;
        let i = self.loc[s as usize];
        let m = self.first[b] + self.marked[b];
        if i < m {
            return;
        }
        if self.marked[b] == 0 {
            touched.push(b as u32);
        }
        let other = self.elems[m as usize];
        self.elems.swap(i as usize, m as usize);
        self.loc[other as usize] = i;
        self.loc[s as usize] = m;
        self.marked[b] += 1;
    }

    /// Splits every touched block into marked / unmarked parts; calls `on_split(old, new)`.
    fn split(&mut self, touched: &mut Vec<u32>, mut on_split: impl FnMut(&Self, u32, u32)) {
        for b in touched.drain(..) {
            let bu = b as usize;
            let m = self.marked[bu];
            self.marked[bu] = 0;
            if m == self.end[bu] - self.first[bu] {
                continue;
            }
            let nb = self.first.len() as u32;
            let f = self.first[bu];
            self.first.push(f);
            self.end.push(f + m);
            self.first[bu] = f + m;
            self.marked.push(0);
            for i in f..f + m {
                let s = self.elems[i as usize];
                self.block_of[s as usize] = nb;
            }
            on_split(self, b, nb);
        }
    }
}

/// Hopcroft minimization. The initial partition separates states by accept set;
/// the result is renumbered canonically (breadth-first from the start, dead = 0).
pub fn minimize(dfa: &Dfa) -> Dfa {
    let n = dfa.state_count();
    let mut part = Partition::new(&dfa.accept);

    // reverse default edges, reverse explicit edges grouped by column
    let mut inv_default: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut inv_explicit: Vec<Vec<(u32, u32)>> = vec![Vec::new(); n];
    for s in 0..n as u32 {
        inv_default[dfa.default[s as usize] as usize].push(s);
        for &(c, t) in dfa.explicit(s) {
            inv_explicit[t as usize].push((c, s));
        }
    }

    let mut in_work = vec![false; part.len()];
    let mut work: Vec<u32> = Vec::new();
    if part.len() > 1 {
        let largest = (0..part.len() as u32).max_by_key(|&b| (part.size(b), core::cmp::Reverse(b))).unwrap();
        for b in 0..part.len() as u32 {
            if b != largest {
                work.push(b);
                in_work[b as usize] = true;
            }
        }
    }

    let mut touched = Vec::new();
    let mut splitter: Vec<u32> = Vec::new();
    let mut in_splitter = vec![false; n];
    let mut in_ld = vec![false; n];
    let mut ld: Vec<u32> = Vec::new();
    let mut exceptions: Vec<(u32, u32)> = Vec::new();

    let on_split = |p: &Partition, old: u32, new: u32, in_work: &mut Vec<bool>, work: &mut Vec<u32>| {
        in_work.resize(p.len(), false);
        if in_work[old as usize] {
            in_work[new as usize] = true;
            work.push(new);
        } else {
            let pick = if p.size(new) <= p.size(old) { new } else { old };
            in_work[pick as usize] = true;
            work.push(pick);
        }
    };

    while let Some(b) = work.pop() {
        in_work[b as usize] = false;
        splitter.clear();
        splitter.extend_from_slice(part.members(b));
        for &s in &splitter {
            in_splitter[s as usize] = true;
        }

        // states whose default target lies in the splitter
        ld.clear();
        for &t in &splitter {
            for &s in &inv_default[t as usize] {
                ld.push(s);
                in_ld[s as usize] = true;
            }
        }
        // columns where a state's behaviour differs from its default w.r.t. the splitter
        exceptions.clear();
        for &s in &ld {
            for &(c, t) in dfa.explicit(s) {
                if !in_splitter[t as usize] {
                    exceptions.push((c, s));
                }
            }
        }
        for &t in &splitter {
            for &(c, s) in &inv_explicit[t as usize] {
                if !in_ld[s as usize] {
                    exceptions.push((c, s));
                }
            }
        }
        for &s in &ld {
            in_ld[s as usize] = false;
        }
        for &s in &splitter {
            in_splitter[s as usize] = false;
        }

        // column 0 never carries explicit edges, so its preimage is exactly `ld`
        for &s in &ld {
            part.mark(s, &mut touched);
        }
        part.split(&mut touched, |p, o, nw| on_split(p, o, nw, &mut in_work, &mut work));

        // after the split above every block lies inside or outside `ld`, so splitting by
        // ld xor E_c is the same as splitting by E_c
        exceptions.sort_unstable();
        let mut i = 0;
        while i < exceptions.len() {
            let c = exceptions[i].0;
            while i < exceptions.len() && exceptions[i].0 == c {
                part.mark(exceptions[i].1, &mut touched);
                i += 1;
            }
            part.split(&mut touched, |p, o, nw| on_split(p, o, nw, &mut in_work, &mut work));
        }
    }

    quotient(dfa, &part)
}

fn quotient(dfa: &Dfa, part: &Partition) -> Dfa {
    let nb = part.len();
    let rep: Vec<u32> = (0..nb as u32).map(|b| part.members(b)[0]).collect();
    let block = |s: u32| part.block_of[s as usize];

    let mut new_id = vec![u32::MAX; nb];
    let mut order: Vec<u32> = Vec::with_capacity(nb);
    let dead_block = block(DEAD);
    new_id[dead_block as usize] = 0;
    order.push(dead_block);
    let start_block = block(dfa.start);
    if new_id[start_block as usize] == u32::MAX {
        new_id[start_block as usize] = order.len() as u32;
        order.push(start_block);
    }
    let mut head = 1;
    while head < order.len() {
        let r = rep[order[head] as usize];
        let mut visit = |t: u32, order: &mut Vec<u32>| {
            let tb = block(t) as usize;
            if new_id[tb] == u32::MAX {
                new_id[tb] = order.len() as u32;
                order.push(tb as u32);
            }
        };
        visit(dfa.default[r as usize], &mut order);
        for &(_, t) in dfa.explicit(r) {
            visit(t, &mut order);
        }
        head += 1;
    }

    let mut accept_sets = SetInterner::new();
    let mut default = Vec::with_capacity(order.len());
    let mut edge_off = vec![0u32];
    let mut edges = Vec::new();
    let mut accept = Vec::with_capacity(order.len());
    for &b in &order {
        let r = rep[b as usize];
        let d = new_id[block(dfa.default[r as usize]) as usize];
        default.push(d);
        for &(c, t) in dfa.explicit(r) {
            let t = new_id[block(t) as usize];
            if t != d {
                edges.push((c, t));
            }
        }
        edge_off.push(edges.len() as u32);
        accept.push(accept_sets.get(dfa.accepts(r)));
    }
    Dfa {
        n_cols: dfa.n_cols,
        start: new_id[start_block as usize],
        default,
        edge_off,
        edges,
        accept,
        accept_sets: accept_sets.sets,
    }
}
