//! Sparse structure tables shared by bimodules and morphisms.
//!
//! A table maps `(generator, input sequence)` to a GF(2) span of
//! `algebra element (x) generator` outputs. Keys order by sequence length,
//! then generator, then sequence.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashSet};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Key {
    pub gen: usize,
    pub seq: Vec<usize>,
}

impl Key {
    pub fn new(gen: usize, seq: Vec<usize>) -> Key {
        Key { gen, seq }
    }

    pub fn arity(&self) -> usize {
        self.seq.len()
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.seq.len(), self.gen, &self.seq).cmp(&(other.seq.len(), other.gen, &other.seq))
    }
}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// One output term `alg (x) gen`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Out {
    pub alg: usize,
    pub gen: usize,
}

pub type Span = BTreeSet<Out>;

/// Nonzero entries only.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Table {
    entries: BTreeMap<Key, Span>,
}

impl Table {
    pub fn new() -> Table {
        Table::default()
    }

    pub fn toggle(&mut self, key: Key, out: Out) {
        match self.entries.get_mut(&key) {
            Some(span) => {
                if !span.remove(&out) {
                    span.insert(out);
                }
                if span.is_empty() {
                    self.entries.remove(&key);
                }
            }
            None => {
                self.entries.insert(key, BTreeSet::from([out]));
            }
        }
    }

    pub fn add_span(&mut self, key: &Key, span: &Span) {
        for &out in span {
            self.toggle(key.clone(), out);
        }
    }

    pub fn add(&mut self, other: &Table) {
        for (k, span) in &other.entries {
            self.add_span(k, span);
        }
    }

    pub fn sum(&self, other: &Table) -> Table {
        let mut t = self.clone();
        t.add(other);
        t
    }

    pub fn get(&self, key: &Key) -> Option<&Span> {
        self.entries.get(key)
    }

    pub fn contains(&self, key: &Key, out: &Out) -> bool {
        self.entries.get(key).is_some_and(|s| s.contains(out))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Key, &Span)> {
        self.entries.iter()
    }

    /// Every `(key, out)` term in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (&Key, Out)> {
        self.entries.iter().flat_map(|(k, s)| s.iter().map(move |&o| (k, o)))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn term_count(&self) -> usize {
        self.entries.values().map(BTreeSet::len).sum()
    }

    /// Largest input length with a nonzero entry; zero for the zero table.
    pub fn arity(&self) -> usize {
        self.entries.keys().next_back().map_or(0, Key::arity)
    }

    pub fn first(&self) -> Option<(&Key, &Span)> {
        self.entries.iter().next()
    }

    /// Entries grouped by generator.
    pub fn by_gen(&self, gens: usize) -> ByGen<'_> {
        let mut rows = vec![Vec::new(); gens];
        for (k, s) in &self.entries {
            rows[k.gen].push((k.seq.as_slice(), s));
        }
        ByGen { rows }
    }

    pub fn map_keys_and_outputs(
        &self,
        gen_map: impl Fn(usize) -> usize,
        out_gen_map: impl Fn(usize) -> usize,
    ) -> Table {
        let mut t = Table::new();
        for (k, o) in self.terms() {
            t.toggle(
                Key::new(gen_map(k.gen), k.seq.clone()),
                Out {
                    alg: o.alg,
                    gen: out_gen_map(o.gen),
                },
            );
        }
        t
    }
}

impl FromIterator<(Key, Out)> for Table {
    fn from_iter<T: IntoIterator<Item = (Key, Out)>>(iter: T) -> Self {
        let mut acc = Accumulator::new();
        for (k, o) in iter {
            acc.toggle(k, o);
        }
        acc.finish()
    }
}

/// Table entries indexed by source generator.
pub struct ByGen<'a> {
    rows: Vec<Vec<(&'a [usize], &'a Span)>>,
}

impl<'a> ByGen<'a> {
    pub fn from(&self, gen: usize) -> &[(&'a [usize], &'a Span)] {
        &self.rows[gen]
    }
}

/// Hash-based GF(2) accumulator for scatter-style evaluation.
#[derive(Debug, Default)]
pub struct Accumulator {
    set: HashSet<(Key, Out)>,
}

impl Accumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn toggle(&mut self, key: Key, out: Out) {
        let term = (key, out);
        if !self.set.remove(&term) {
            self.set.insert(term);
        }
    }

    pub fn merge(&mut self, other: Accumulator) {
        for (k, o) in other.set {
            self.toggle(k, o);
        }
    }

    pub fn finish(self) -> Table {
        let mut entries: BTreeMap<Key, Span> = BTreeMap::new();
        for (k, o) in self.set {
            entries.entry(k).or_default().insert(o);
        }
        Table { entries }
    }
}
