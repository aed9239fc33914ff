//! Morphisms of type DA bimodules.
//!
//! A morphism `F: M -> N` is a table `F(x, a_1 .. a_j)` of spans of
//! `b (x) y` with `x` a generator of `M` and `y` a generator of `N`.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::algebra::DgAlgebra;
use crate::bimodule::{chain_end, concat, same_algebra, scatter_bar, Bimodule, BimoduleError, Generator};
use crate::f2::{F2Matrix, F2Vector, HomologyBasis};
use crate::table::{Accumulator, Key, Out, Span, Table};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MorphismError {
    #[error("bimodule mismatch: {0}")]
    BimoduleMismatch(String),
    #[error("morphism `{name}` is not closed; first nonzero entry of its differential at {witness}")]
    NotClosed { name: String, witness: String },
    #[error("idempotent mismatch: {0}")]
    IdempotentMismatch(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("arity-zero boundary of `{0}` does not square to zero")]
    NotAComplex(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HomotopyError {
    #[error(transparent)]
    Morphism(#[from] MorphismError),
    #[error("no homotopy with input length at most {cap}")]
    NotWithinCap { cap: usize },
}

#[derive(Clone)]
pub struct Morphism {
    name: String,
    source: Arc<Bimodule>,
    target: Arc<Bimodule>,
    table: Table,
}

impl PartialEq for Morphism {
    fn eq(&self, other: &Self) -> bool {
        same_bimodule(&self.source, &other.source)
            && same_bimodule(&self.target, &other.target)
            && self.table == other.table
    }
}

impl Eq for Morphism {}

impl fmt::Debug for Morphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Morphism")
            .field("name", &self.name)
            .field("source", &self.source.name())
            .field("target", &self.target.name())
            .field("terms", &self.table.term_count())
            .finish()
    }
}

pub fn same_bimodule(a: &Arc<Bimodule>, b: &Arc<Bimodule>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl Morphism {
    pub fn new(
        name: impl Into<String>,
        source: Arc<Bimodule>,
        target: Arc<Bimodule>,
        table: Table,
    ) -> Result<Self, MorphismError> {
        if !same_algebra(source.left_algebra(), target.left_algebra())
            || !same_algebra(source.right_algebra(), target.right_algebra())
        {
            return Err(MorphismError::BimoduleMismatch(format!(
                "`{}` and `{}` are over different algebras",
                source.name(),
                target.name()
            )));
        }
        let a1 = source.left_algebra();
        let a2 = source.right_algebra();
        for (k, o) in table.terms() {
            if k.gen >= source.generators().len() {
                return Err(MorphismError::UnknownSymbol(format!("source generator #{}", k.gen)));
            }
            if o.gen >= target.generators().len() {
                return Err(MorphismError::UnknownSymbol(format!("target generator #{}", o.gen)));
            }
            if let Some(&a) = k.seq.iter().find(|&&a| a >= a2.dim()) {
                return Err(MorphismError::UnknownSymbol(format!("input #{a}")));
            }
            if o.alg >= a1.dim() {
                return Err(MorphismError::UnknownSymbol(format!("output #{}", o.alg)));
            }
            if a1.left_idempotent(o.alg) != source.generator(k.gen).left
                || a1.right_idempotent(o.alg) != target.generator(o.gen).left
            {
                return Err(MorphismError::IdempotentMismatch(format!(
                    "output {} : {} of {} is not compatible",
                    a1.basis_name(o.alg),
                    target.generator(o.gen).name,
                    source.display_key(k)
                )));
            }
        }
        Ok(Morphism {
            name: name.into(),
            source,
            target,
            table,
        })
    }

    pub fn zero(source: Arc<Bimodule>, target: Arc<Bimodule>) -> Result<Self, MorphismError> {
        Self::new("0", source, target, Table::new())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn source(&self) -> &Arc<Bimodule> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Bimodule> {
        &self.target
    }

    pub fn table(&self) -> &Table {
        &self.table
    }

    pub fn arity(&self) -> usize {
        self.table.arity()
    }

    pub fn is_zero(&self) -> bool {
        self.table.is_zero()
    }

    pub(crate) fn with_table(&self, name: impl Into<String>, table: Table) -> Morphism {
        Morphism {
            name: name.into(),
            source: self.source.clone(),
            target: self.target.clone(),
            table,
        }
    }

    fn check_parallel(&self, other: &Morphism) -> Result<(), MorphismError> {
        if same_bimodule(&self.source, &other.source) && same_bimodule(&self.target, &other.target) {
            Ok(())
        } else {
            Err(MorphismError::BimoduleMismatch(format!(
                "`{}` and `{}` have different sources or targets",
                self.name, other.name
            )))
        }
    }

    pub fn sum(&self, other: &Morphism) -> Result<Morphism, MorphismError> {
        self.check_parallel(other)?;
        Ok(self.with_table(
            format!("{}+{}", self.name, other.name),
            self.table.sum(&other.table),
        ))
    }

    /// `dH`, as a morphism with the same source and target.
    pub fn differential(&self) -> Morphism {
        self.with_table(format!("d({})", self.name), morphism_differential(self))
    }

    /// First nonzero entry of `dF`, if any.
    pub fn closedness_witness(&self) -> Option<(Key, Span)> {
        let d = morphism_differential(self);
        d.first().map(|(k, s)| (k.clone(), s.clone()))
    }

    pub fn is_closed(&self) -> bool {
        morphism_differential(self).is_zero()
    }

    fn require_closed(&self) -> Result<(), MorphismError> {
        match self.closedness_witness() {
            None => Ok(()),
            Some((k, _)) => Err(MorphismError::NotClosed {
                name: self.name.clone(),
                witness: self.source.display_key(&k),
            }),
        }
    }

    pub fn display_span(&self, span: &Span) -> String {
        Bimodule::display_span(self.source.left_algebra(), &self.target, span)
    }
}

/// Terms `D_1^M(x, a) ∋ b (x) y` indexed by the output generator `y`.
fn entries_into(m: &Bimodule) -> Vec<Vec<(usize, Vec<usize>, usize)>> {
    let mut into = vec![Vec::new(); m.generators().len()];
    for (k, o) in m.table().terms() {
        into[o.gen].push((k.gen, k.seq.clone(), o.alg));
    }
    into
}

fn entries_from(t: &Table, gens: usize) -> Vec<Vec<(Vec<usize>, Vec<Out>)>> {
    let mut from = vec![Vec::new(); gens];
    for (k, s) in t.iter() {
        from[k.gen].push((k.seq.clone(), s.iter().copied().collect()));
    }
    from
}

/// Everything needed to scatter single terms of a table from `M` to `N`
/// through the morphism differential.
struct DiffContext<'a> {
    a1: &'a DgAlgebra,
    a2: &'a DgAlgebra,
    m_into: Vec<Vec<(usize, Vec<usize>, usize)>>,
    n_from: Vec<Vec<(Vec<usize>, Vec<Out>)>>,
}

impl<'a> DiffContext<'a> {
    fn new(m: &'a Bimodule, n: &'a Bimodule) -> Self {
        DiffContext {
            a1: m.left_algebra(),
            a2: m.right_algebra(),
            m_into: entries_into(m),
            n_from: entries_from(n.table(), n.generators().len()),
        }
    }

    /// Adds `d` of the single term `b (x) y` at `(x, seq)`.
    fn scatter(&self, x: usize, seq: &[usize], o: Out, acc: &mut Accumulator) {
        for c in self.a1.diff(o.alg).iter() {
            acc.toggle(Key::new(x, seq.to_vec()), Out { alg: c, gen: o.gen });
        }
        for (seq2, outs) in &self.n_from[o.gen] {
            for o2 in outs {
                for c in self.a1.mul(o.alg, o2.alg).iter() {
                    acc.toggle(Key::new(x, concat(seq, seq2)), Out { alg: c, gen: o2.gen });
                }
            }
        }
        for (x0, seq0, b0) in &self.m_into[x] {
            for c in self.a1.mul(*b0, o.alg).iter() {
                acc.toggle(Key::new(*x0, concat(seq0, seq)), Out { alg: c, gen: o.gen });
            }
        }
        scatter_bar(self.a2, x, seq, o, acc);
    }
}

/// The differential of the morphism complex:
/// `dH = ∂H + μ_2(H, D_1^N) + μ_2(D_1^M, H) + H ∘ m`, where `m` is the bar
/// differential on input sequences.
pub fn morphism_differential(h: &Morphism) -> Table {
    let ctx = DiffContext::new(&h.source, &h.target);
    let terms: Vec<(&Key, Out)> = h.table.terms().collect();
    terms
        .par_chunks(64)
        .map(|chunk| {
            let mut acc = Accumulator::new();
            for (k, o) in chunk {
                ctx.scatter(k.gen, &k.seq, *o, &mut acc);
            }
            acc.finish()
        })
        .reduce(Table::new, |a, b| a.sum(&b))
}

/// `G ∘ F`: outputs of `F` feed `G` on the remaining inputs and the
/// left-algebra outputs are multiplied.
pub fn compose(g: &Morphism, f: &Morphism) -> Result<Morphism, MorphismError> {
    if !same_bimodule(&f.target, &g.source) {
        return Err(MorphismError::BimoduleMismatch(format!(
            "target of `{}` is not the source of `{}`",
            f.name, g.name
        )));
    }
    let a1 = f.source.left_algebra();
    let g_from = entries_from(&g.table, g.source.generators().len());
    let mut acc = Accumulator::new();
    for (k, o) in f.table.terms() {
        for (seq2, outs) in &g_from[o.gen] {
            for o2 in outs {
                for c in a1.mul(o.alg, o2.alg).iter() {
                    acc.toggle(Key::new(k.gen, concat(&k.seq, seq2)), Out { alg: c, gen: o2.gen });
                }
            }
        }
    }
    Ok(Morphism {
        name: format!("{}.{}", g.name, f.name),
        source: f.source.clone(),
        target: g.target.clone(),
        table: acc.finish(),
    })
}

/// `F(x, []) = ι_L(x) ⊗ x`.
pub fn identity_morphism(m: &Arc<Bimodule>) -> Morphism {
    let table: Table = m
        .generators()
        .iter()
        .enumerate()
        .map(|(x, g)| (Key::new(x, vec![]), Out { alg: g.left, gen: x }))
        .collect();
    Morphism {
        name: format!("id({})", m.name()),
        source: m.clone(),
        target: m.clone(),
        table,
    }
}

/// The mapping cone of `F: M -> N`: generators of `M` followed by those of
/// `N`, with `D_1 = D_1^M + D_1^N + F`. A valid bimodule when `F` is closed.
pub fn mapping_cone(f: &Morphism, name: impl Into<String>) -> Result<Bimodule, BimoduleError> {
    let m = &f.source;
    let n = &f.target;
    let shift = m.generators().len();
    let mut gens = m.generators().to_vec();
    for g in n.generators() {
        gens.push(Generator {
            name: format!("{}'", g.name),
            ..g.clone()
        });
    }
    let mut table = m.table().clone();
    table.add(&n.table().map_keys_and_outputs(|g| g + shift, |g| g + shift));
    table.add(&f.table.map_keys_and_outputs(|g| g, |g| g + shift));
    Bimodule::new(name, m.left_algebra().clone(), m.right_algebra().clone(), gens, table)
}

#[derive(Debug, Clone)]
pub struct HomotopyWitness {
    pub h: Morphism,
    pub cap: usize,
    /// Number of unknowns in the search space.
    pub unknowns: usize,
}

fn chain_supported_table(m: &Bimodule, n: &Bimodule, t: &Table) -> bool {
    let a2 = m.right_algebra();
    t.terms()
        .all(|(k, o)| chain_end(a2, m.generator(k.gen).right, &k.seq) == Some(n.generator(o.gen).right))
}

/// Candidate terms `(x, a) -> b (x) y` of a homotopy with `|a| <= cap`.
fn homotopy_unknowns(m: &Bimodule, n: &Bimodule, cap: usize, chains_only: bool) -> Vec<(Key, Out)> {
    let a1 = m.left_algebra();
    let a2 = m.right_algebra();
    let mut unknowns = Vec::new();
    for (x, gx) in m.generators().iter().enumerate() {
        let mut seqs: Vec<(Vec<usize>, Option<usize>)> = vec![(vec![], Some(gx.right))];
        let mut frontier = seqs.clone();
        for _ in 0..cap {
            let mut next = Vec::new();
            for (s, end) in &frontier {
                let choices: Vec<usize> = if chains_only {
                    a2.starting_at(end.expect("chains have ends")).to_vec()
                } else {
                    (0..a2.dim()).collect()
                };
                for a in choices {
                    let mut t = s.clone();
                    t.push(a);
                    next.push((t, end.and_then(|e| chain_end(a2, e, &[a]))));
                }
            }
            seqs.extend(next.iter().cloned());
            frontier = next;
        }
        for (s, end) in seqs {
            for (y, gy) in n.generators().iter().enumerate() {
                if chains_only && end != Some(gy.right) {
                    continue;
                }
                for &b in a1.starting_at(gx.left) {
                    if a1.right_idempotent(b) == gy.left {
                        unknowns.push((Key::new(x, s.clone()), Out { alg: b, gen: y }));
                    }
                }
            }
        }
    }
    unknowns.sort();
    unknowns
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Searches for `H` with `dH = F + G` among tables of input length at most
/// `cap`. When both bimodules and `F + G` are chain-supported the search
/// runs over chain-supported `H` only; the morphism complex splits along
/// that condition, so nothing is lost.
pub fn is_homotopic(f: &Morphism, g: &Morphism, cap: usize) -> Result<HomotopyWitness, HomotopyError> {
    f.check_parallel(g)?;
    f.require_closed()?;
    g.require_closed()?;
    let m = &*f.source;
    let n = &*f.target;
    let rhs = f.table.sum(&g.table);
    let zero = || f.with_table("0", Table::new());
    if rhs.is_zero() {
        return Ok(HomotopyWitness {
            h: zero(),
            cap,
            unknowns: 0,
        });
    }
    let chains_only = m.is_chain_supported() && n.is_chain_supported() && chain_supported_table(m, n, &rhs);
    let unknowns = homotopy_unknowns(m, n, cap, chains_only);
    let ctx = DiffContext::new(m, n);
    let columns: Vec<Vec<(Key, Out)>> = unknowns
        .par_iter()
        .map(|(k, o)| {
            let mut acc = Accumulator::new();
            ctx.scatter(k.gen, &k.seq, *o, &mut acc);
            acc.finish().terms().map(|(k, o)| (k.clone(), o)).collect()
        })
        .collect();

    let mut row_index: HashMap<(Key, Out), usize> = HashMap::new();
    let mut col_rows: Vec<Vec<usize>> = Vec::with_capacity(columns.len());
    for col in columns {
        let rows = col
            .into_iter()
            .map(|t| {
                let next = row_index.len();
                *row_index.entry(t).or_insert(next)
            })
            .collect();
        col_rows.push(rows);
    }
    let mut rhs_rows = Vec::new();
    for (k, o) in rhs.terms() {
        match row_index.get(&(k.clone(), o)) {
            Some(&r) => rhs_rows.push(r),
            None => return Err(HomotopyError::NotWithinCap { cap }),
        }
    }

    // Components over unknowns and rows: row r is node `unknowns.len() + r`.
    let nu = unknowns.len();
    let mut uf = UnionFind::new(nu + row_index.len());
    for (u, rows) in col_rows.iter().enumerate() {
        for &r in rows {
            uf.union(u, nu + r);
        }
    }
    let mut wanted: Vec<usize> = rhs_rows.iter().map(|&r| uf.find(nu + r)).collect();
    wanted.sort_unstable();
    wanted.dedup();
    let mut members: HashMap<usize, (Vec<usize>, Vec<usize>)> = wanted.iter().map(|&c| (c, (vec![], vec![]))).collect();
    for u in 0..nu {
        if let Some(entry) = members.get_mut(&uf.find(u)) {
            entry.0.push(u);
        }
    }
    for r in 0..row_index.len() {
        if let Some(entry) = members.get_mut(&uf.find(nu + r)) {
            entry.1.push(r);
        }
    }
    let rhs_set: std::collections::HashSet<usize> = rhs_rows.iter().copied().collect();
    let solutions: Vec<Result<Vec<usize>, ()>> = wanted
        .par_iter()
        .map(|c| {
            let (cols, rows) = &members[c];
            let local_row: HashMap<usize, usize> = rows.iter().enumerate().map(|(i, &r)| (r, i)).collect();
            let columns: Vec<F2Vector> = cols
                .iter()
                .map(|&u| col_rows[u].iter().map(|r| local_row[r]).collect())
                .collect();
            let matrix = F2Matrix::from_columns(rows.len(), &columns).expect("local rows fit");
            let target: F2Vector = rows
                .iter()
                .enumerate()
                .filter(|(_, r)| rhs_set.contains(r))
                .map(|(i, _)| i)
                .collect();
            match matrix.solve(&target) {
                Ok(x) => Ok(x.iter().map(|i| cols[i]).collect()),
                Err(_) => Err(()),
            }
        })
        .collect();
    let mut h_table = Table::new();
    for s in solutions {
        match s {
            Ok(us) => {
                for u in us {
                    let (k, o) = &unknowns[u];
                    h_table.toggle(k.clone(), *o);
                }
            }
            Err(()) => return Err(HomotopyError::NotWithinCap { cap }),
        }
    }
    let h = f.with_table(format!("H({},{})", f.name, g.name), h_table);
    assert_eq!(
        morphism_differential(&h),
        rhs,
        "homotopy witness failed re-verification"
    );
    Ok(HomotopyWitness { h, cap, unknowns: nu })
}

/// The chain map induced on arity-zero complexes.
pub fn arity_zero_map(f: &Morphism) -> F2Matrix {
    let a1 = f.source.left_algebra();
    let cm = f.source.arity_zero_complex();
    let cn = f.target.arity_zero_complex();
    let columns: Vec<F2Vector> = cm
        .basis
        .iter()
        .map(|&(b, x)| {
            let mut col = F2Vector::zero();
            if let Some(span) = f.table.get(&Key::new(x, vec![])) {
                for o in span {
                    for c in a1.mul(b, o.alg).iter() {
                        col.toggle(cn.index_of(c, o.gen).expect("compatible output"));
                    }
                }
            }
            col
        })
        .collect();
    F2Matrix::from_columns(cn.basis.len(), &columns).expect("columns fit")
}

/// Matrix of `F` on arity-zero homology, in the bases chosen by
/// [`HomologyBasis`].
pub fn induced_on_homology(f: &Morphism) -> Result<F2Matrix, MorphismError> {
    f.require_closed()?;
    let cm = f.source.arity_zero_complex();
    let cn = f.target.arity_zero_complex();
    let hm = HomologyBasis::new(&cm.boundary, &cm.boundary)
        .map_err(|_| MorphismError::NotAComplex(f.source.name().to_string()))?;
    let hn = HomologyBasis::new(&cn.boundary, &cn.boundary)
        .map_err(|_| MorphismError::NotAComplex(f.target.name().to_string()))?;
    let phi = arity_zero_map(f);
    let columns: Vec<F2Vector> = hm
        .representatives()
        .iter()
        .map(|z| hn.class_of(&phi.mul_vec(z)).expect("chain maps send cycles to cycles"))
        .collect();
    Ok(F2Matrix::from_columns(hn.dim(), &columns).expect("columns fit"))
}

/// Closed morphism inducing an isomorphism on arity-zero homology. This is
/// a weak, naive stand-in for quasi-isomorphism.
pub fn is_naive_quasi_iso(f: &Morphism) -> Result<bool, MorphismError> {
    let m = induced_on_homology(f)?;
    Ok(m.rows() == m.cols() && m.is_invertible())
}

#[cfg(test)]
mod tests;
