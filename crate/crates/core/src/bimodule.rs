//! Type DA bimodules, stored as their `D_1` table.
//!
//! `D_1(x, a_1 .. a_j)` is a span of `b (x) y` with `b` in the left algebra.
//! The higher products are `m_{j+1}(b (x) x, a) = b * D_1(x, a)`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::algebra::DgAlgebra;
use crate::f2::{homology_dim, F2Error, F2Matrix, F2Vector};
use crate::table::{Accumulator, Key, Out, Span, Table};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BimoduleError {
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("duplicate generator `{0}`")]
    DuplicateName(String),
    #[error("idempotent mismatch: {0}")]
    IdempotentMismatch(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Generator {
    pub name: String,
    /// Idempotent of the left algebra.
    pub left: usize,
    /// Idempotent of the right algebra.
    pub right: usize,
}

/// How a bimodule was built; used to flatten nested box products.
#[derive(Debug, Clone)]
pub enum Origin {
    Atom,
    Identity,
    /// `left ⊠ right`; generator `i` is `pairs[i]`.
    Box {
        left: Arc<Bimodule>,
        right: Arc<Bimodule>,
        pairs: Vec<(usize, usize)>,
    },
}

#[derive(Clone)]
pub struct Bimodule {
    name: String,
    left_alg: Arc<DgAlgebra>,
    right_alg: Arc<DgAlgebra>,
    gens: Vec<Generator>,
    index: HashMap<String, usize>,
    table: Table,
    origin: Origin,
}

impl PartialEq for Bimodule {
    fn eq(&self, other: &Self) -> bool {
        same_algebra(&self.left_alg, &other.left_alg)
            && same_algebra(&self.right_alg, &other.right_alg)
            && self.gens == other.gens
            && self.table == other.table
    }
}

impl Eq for Bimodule {}

impl fmt::Debug for Bimodule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Bimodule")
            .field("name", &self.name)
            .field("over", &(self.left_alg.name(), self.right_alg.name()))
            .field("gens", &self.gens.len())
            .field("terms", &self.table.term_count())
            .finish()
    }
}

pub fn same_algebra(a: &Arc<DgAlgebra>, b: &Arc<DgAlgebra>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// `D_n` values: spans of `(b_1 .. b_n) (x) y`.
pub type ChainSpan = BTreeSet<(Vec<usize>, usize)>;

fn toggle_chain(span: &mut ChainSpan, item: (Vec<usize>, usize)) {
    if !span.remove(&item) {
        span.insert(item);
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureReport {
    /// Highest input length at which the relation can be nonzero, `2K`.
    pub bound: usize,
    /// First nonzero value of the structure relation.
    pub relation: Option<(Key, Span)>,
    /// First entry violating strict unitality, with the actual value.
    pub unitality: Option<(Key, Span)>,
}

impl StructureReport {
    pub fn passed(&self) -> bool {
        self.relation.is_none() && self.unitality.is_none()
    }
}

/// The arity-zero chain complex: pairs `(b, x)` with `b * ι_L(x) = b`.
#[derive(Debug, Clone)]
pub struct ArityZeroComplex {
    pub basis: Vec<(usize, usize)>,
    pub boundary: F2Matrix,
}

impl ArityZeroComplex {
    pub fn index_of(&self, b: usize, x: usize) -> Option<usize> {
        self.basis.binary_search_by_key(&(x, b), |&(b2, x2)| (x2, b2)).ok()
    }
}

impl Bimodule {
    pub fn new(
        name: impl Into<String>,
        left_alg: Arc<DgAlgebra>,
        right_alg: Arc<DgAlgebra>,
        gens: Vec<Generator>,
        table: Table,
    ) -> Result<Self, BimoduleError> {
        Self::with_origin(name, left_alg, right_alg, gens, table, Origin::Atom)
    }

    pub(crate) fn with_origin(
        name: impl Into<String>,
        left_alg: Arc<DgAlgebra>,
        right_alg: Arc<DgAlgebra>,
        gens: Vec<Generator>,
        table: Table,
        origin: Origin,
    ) -> Result<Self, BimoduleError> {
        let mut index = HashMap::new();
        for (i, g) in gens.iter().enumerate() {
            if index.insert(g.name.clone(), i).is_some() {
                return Err(BimoduleError::DuplicateName(g.name.clone()));
            }
            if g.left >= left_alg.dim() || !left_alg.is_idempotent(g.left) {
                return Err(BimoduleError::IdempotentMismatch(format!(
                    "left idempotent of `{}` is not an idempotent of {}",
                    g.name,
                    left_alg.name()
                )));
            }
            if g.right >= right_alg.dim() || !right_alg.is_idempotent(g.right) {
                return Err(BimoduleError::IdempotentMismatch(format!(
                    "right idempotent of `{}` is not an idempotent of {}",
                    g.name,
                    right_alg.name()
                )));
            }
        }
        for (k, o) in table.terms() {
            if k.gen >= gens.len() || o.gen >= gens.len() {
                return Err(BimoduleError::UnknownSymbol(format!("generator #{}", k.gen.max(o.gen))));
            }
            if let Some(&a) = k.seq.iter().find(|&&a| a >= right_alg.dim()) {
                return Err(BimoduleError::UnknownSymbol(format!("input #{a}")));
            }
            if o.alg >= left_alg.dim() {
                return Err(BimoduleError::UnknownSymbol(format!("output #{}", o.alg)));
            }
            if left_alg.left_idempotent(o.alg) != gens[k.gen].left
                || left_alg.right_idempotent(o.alg) != gens[o.gen].left
            {
                return Err(BimoduleError::IdempotentMismatch(format!(
                    "output {} (x) {} of D1({}, ...) is not compatible",
                    left_alg.basis_name(o.alg),
                    gens[o.gen].name,
                    gens[k.gen].name
                )));
            }
        }
        Ok(Bimodule {
            name: name.into(),
            left_alg,
            right_alg,
            gens,
            index,
            table,
            origin,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn left_algebra(&self) -> &Arc<DgAlgebra> {
        &self.left_alg
    }

    pub fn right_algebra(&self) -> &Arc<DgAlgebra> {
        &self.right_alg
    }

    pub fn generators(&self) -> &[Generator] {
        &self.gens
    }

    pub fn generator(&self, i: usize) -> &Generator {
        &self.gens[i]
    }

    pub fn lookup(&self, name: &str) -> Result<usize, BimoduleError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| BimoduleError::UnknownSymbol(name.to_string()))
    }

    pub fn table(&self) -> &Table {
        &self.table
    }

    pub fn origin(&self) -> &Origin {
        &self.origin
    }

    /// `K`, the largest input length with a nonzero `D_1` entry.
    pub fn arity(&self) -> usize {
        self.table.arity()
    }

    pub fn d1(&self, x: usize, seq: &[usize]) -> Option<&Span> {
        self.table.get(&Key::new(x, seq.to_vec()))
    }

    /// Every nonzero `D_1(x, a)` has `a` composable starting at `ι_R(x)` and
    /// ending at `ι_R(y)` for each output generator `y`.
    pub fn is_chain_supported(&self) -> bool {
        self.table
            .terms()
            .all(|(k, o)| chain_end(&self.right_alg, self.gens[k.gen].right, &k.seq) == Some(self.gens[o.gen].right))
    }

    /// `D_n(x, a)` by the recursion that peels off the last `D_1`.
    pub fn compute_dn(&self, x: usize, seq: &[usize], n: usize) -> ChainSpan {
        assert!(n >= 1, "D_n needs n >= 1");
        let mut out = ChainSpan::new();
        if n == 1 {
            if let Some(span) = self.d1(x, seq) {
                for o in span {
                    out.insert((vec![o.alg], o.gen));
                }
            }
            return out;
        }
        for j in 0..=seq.len() {
            for (bs, y) in self.compute_dn(x, &seq[..j], n - 1) {
                if let Some(span) = self.d1(y, &seq[j..]) {
                    for o in span {
                        let mut chain = bs.clone();
                        chain.push(o.alg);
                        toggle_chain(&mut out, (chain, o.gen));
                    }
                }
            }
        }
        out
    }

    /// Checks the structure relation
    /// `(∂ ⊗ I) D_1 + (μ_2 ⊗ I) D_2 + D_1 (I ⊗ m) = 0` together with strict
    /// unitality: `D_1(x, [ι]) = ι_L(x) ⊗ x` when `ι = ι_R(x)` and zero for
    /// other idempotents, and `D_1` vanishes on longer inputs containing an
    /// idempotent.
    pub fn check_structure(&self) -> StructureReport {
        let relation = self.structure_relation();
        StructureReport {
            bound: 2 * self.arity(),
            relation: relation.first().map(|(k, s)| (k.clone(), s.clone())),
            unitality: self.unitality_violation(),
        }
    }

    /// Every nonzero value of the structure relation, computed by scattering
    /// each table term to the inputs it contributes to.
    pub fn structure_relation(&self) -> Table {
        let a1 = &*self.left_alg;
        let a2 = &*self.right_alg;
        let by_gen = self.table.by_gen(self.gens.len());
        let parts: Vec<Table> = (0..self.gens.len())
            .into_par_iter()
            .map(|x| {
                let mut acc = Accumulator::new();
                for &(seq, span) in by_gen.from(x) {
                    for o in span {
                        for c in a1.diff(o.alg).iter() {
                            acc.toggle(Key::new(x, seq.to_vec()), Out { alg: c, gen: o.gen });
                        }
                        for &(seq2, span2) in by_gen.from(o.gen) {
                            for o2 in span2 {
                                for c in a1.mul(o.alg, o2.alg).iter() {
                                    acc.toggle(Key::new(x, concat(seq, seq2)), Out { alg: c, gen: o2.gen });
                                }
                            }
                        }
                        scatter_bar(a2, x, seq, *o, &mut acc);
                    }
                }
                acc.finish()
            })
            .collect();
        let mut total = Table::new();
        for p in parts {
            total.add(&p);
        }
        total
    }

    fn unitality_violation(&self) -> Option<(Key, Span)> {
        let a2 = &*self.right_alg;
        let mut worst: Option<(Key, Span)> = None;
        let mut consider = |k: Key, s: Span| {
            if worst.as_ref().is_none_or(|(w, _)| k < *w) {
                worst = Some((k, s));
            }
        };
        for (x, g) in self.gens.iter().enumerate() {
            for &i in a2.idempotents() {
                let key = Key::new(x, vec![i]);
                let actual = self.table.get(&key).cloned().unwrap_or_default();
                let expected: Span = if i == g.right {
                    BTreeSet::from([Out { alg: g.left, gen: x }])
                } else {
                    Span::new()
                };
                if actual != expected {
                    consider(key, actual);
                }
            }
        }
        for (k, s) in self.table.iter() {
            if k.arity() >= 2 && k.seq.iter().any(|&a| a2.is_idempotent(a)) {
                consider(k.clone(), s.clone());
            }
        }
        worst
    }

    pub fn arity_zero_complex(&self) -> ArityZeroComplex {
        let a1 = &*self.left_alg;
        let mut basis = Vec::new();
        for (x, g) in self.gens.iter().enumerate() {
            for &b in a1.ending_at(g.left) {
                basis.push((b, x));
            }
        }
        basis.sort_by_key(|&(b, x)| (x, b));
        let pos: HashMap<(usize, usize), usize> = basis.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        let columns: Vec<F2Vector> = basis
            .iter()
            .map(|&(b, x)| {
                let mut col = F2Vector::zero();
                for c in a1.diff(b).iter() {
                    col.toggle(pos[&(c, x)]);
                }
                if let Some(span) = self.d1(x, &[]) {
                    for o in span {
                        for c in a1.mul(b, o.alg).iter() {
                            col.toggle(pos[&(c, o.gen)]);
                        }
                    }
                }
                col
            })
            .collect();
        let boundary = F2Matrix::from_columns(basis.len(), &columns).expect("columns fit");
        ArityZeroComplex { basis, boundary }
    }

    pub fn homology(&self) -> Result<usize, F2Error> {
        let c = self.arity_zero_complex();
        homology_dim(&c.boundary, &c.boundary)
    }

    pub fn display_key(&self, k: &Key) -> String {
        format!(
            "{} [{}]",
            self.gens[k.gen].name,
            k.seq
                .iter()
                .map(|&a| self.right_alg.basis_name(a))
                .collect::<Vec<_>>()
                .join(" ")
        )
    }

    /// Displays outputs whose generators belong to `target`.
    pub fn display_span(left_alg: &DgAlgebra, target: &Bimodule, span: &Span) -> String {
        if span.is_empty() {
            return "0".to_string();
        }
        span.iter()
            .map(|o| format!("{} : {}", left_alg.basis_name(o.alg), target.gens[o.gen].name))
            .collect::<Vec<_>>()
            .join(" + ")
    }

    /// The same bimodule with generators reordered: new generator `i` is old
    /// generator `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Bimodule {
        let mut inverse = vec![usize::MAX; self.gens.len()];
        for (new, &old) in order.iter().enumerate() {
            inverse[old] = new;
        }
        let gens = order.iter().map(|&o| self.gens[o].clone()).collect();
        let table = self.table.map_keys_and_outputs(|g| inverse[g], |g| inverse[g]);
        Bimodule::with_origin(
            self.name.clone(),
            self.left_alg.clone(),
            self.right_alg.clone(),
            gens,
            table,
            Origin::Atom,
        )
        .expect("permutation preserves validity")
    }
}

/// The identity bimodule of `a`: one generator per idempotent and
/// `D_1(ι, [a]) = a ⊗ ι_R(a)` for `ι = ι_L(a)`.
pub fn identity_bimodule(a: &Arc<DgAlgebra>) -> Bimodule {
    let gen_of: HashMap<usize, usize> = a.idempotents().iter().enumerate().map(|(g, &i)| (i, g)).collect();
    let gens = a
        .idempotents()
        .iter()
        .map(|&i| Generator {
            name: a.basis_name(i).to_string(),
            left: i,
            right: i,
        })
        .collect();
    let table: Table = (0..a.dim())
        .map(|x| {
            (
                Key::new(gen_of[&a.left_idempotent(x)], vec![x]),
                Out {
                    alg: x,
                    gen: gen_of[&a.right_idempotent(x)],
                },
            )
        })
        .collect();
    Bimodule::with_origin(
        format!("I({})", a.name()),
        a.clone(),
        a.clone(),
        gens,
        table,
        Origin::Identity,
    )
    .expect("identity tables are compatible")
}

pub(crate) fn concat(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut v = Vec::with_capacity(a.len() + b.len());
    v.extend_from_slice(a);
    v.extend_from_slice(b);
    v
}

/// End idempotent of a composable chain starting at `start`.
pub(crate) fn chain_end(a: &DgAlgebra, start: usize, seq: &[usize]) -> Option<usize> {
    let mut cur = start;
    for &x in seq {
        if a.left_idempotent(x) != cur {
            return None;
        }
        cur = a.right_idempotent(x);
    }
    Some(cur)
}

/// Scatters a term `out` at `(x, seq)` through the bar differential: it
/// contributes to every input whose bar differential contains `seq`.
pub(crate) fn scatter_bar(a2: &DgAlgebra, x: usize, seq: &[usize], out: Out, acc: &mut Accumulator) {
    for i in 0..seq.len() {
        for &p in a2.diff_preimages(seq[i]) {
            let mut s = seq.to_vec();
            s[i] = p;
            acc.toggle(Key::new(x, s), out);
        }
        for &(p, q) in a2.factorizations(seq[i]) {
            let mut s = Vec::with_capacity(seq.len() + 1);
            s.extend_from_slice(&seq[..i]);
            s.push(p);
            s.push(q);
            s.extend_from_slice(&seq[i + 1..]);
            acc.toggle(Key::new(x, s), out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pmc::PointedMatchedCircle;
    use crate::strand::build_dga;

    fn torus_alg() -> Arc<DgAlgebra> {
        Arc::new(build_dga(&PointedMatchedCircle::torus(), "A_T"))
    }

    /// Literal evaluation of the structure relation at one input.
    fn relation_at(m: &Bimodule, x: usize, seq: &[usize]) -> Span {
        let a1 = m.left_algebra();
        let a2 = m.right_algebra();
        let mut acc = Accumulator::new();
        let key = Key::new(x, seq.to_vec());
        if let Some(span) = m.d1(x, seq) {
            for o in span {
                for c in a1.diff(o.alg).iter() {
                    acc.toggle(key.clone(), Out { alg: c, gen: o.gen });
                }
            }
        }
        for (chain, y) in m.compute_dn(x, seq, 2) {
            for c in a1.mul(chain[0], chain[1]).iter() {
                acc.toggle(key.clone(), Out { alg: c, gen: y });
            }
        }
        for i in 0..seq.len() {
            for d in a2.diff(seq[i]).iter() {
                let mut s = seq.to_vec();
                s[i] = d;
                for &o in m.d1(x, &s).into_iter().flatten() {
                    acc.toggle(key.clone(), o);
                }
            }
            if i + 1 < seq.len() {
                for p in a2.mul(seq[i], seq[i + 1]).iter() {
                    let s = [&seq[..i], &[p], &seq[i + 2..]].concat();
                    for &o in m.d1(x, &s).into_iter().flatten() {
                        acc.toggle(key.clone(), o);
                    }
                }
            }
        }
        acc.finish().get(&key).cloned().unwrap_or_default()
    }

    fn all_sequences(n: usize, len: usize) -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        for _ in 0..len {
            out = out
                .into_iter()
                .flat_map(|s| {
                    (0..n).map(move |a| {
                        let mut t = s.clone();
                        t.push(a);
                        t
                    })
                })
                .collect();
        }
        out
    }

    #[test]
    fn identity_bimodule_examples() {
        let a = torus_alg();
        let i = identity_bimodule(&a);
        let i0 = i.lookup("h(1 3)").unwrap();
        let i1 = i.lookup("h(2 4)").unwrap();
        let r1 = a.lookup("r[1-2]").unwrap();
        let r2 = a.lookup("r[2-3]").unwrap();
        assert_eq!(i.d1(i0, &[r1]).unwrap(), &BTreeSet::from([Out { alg: r1, gen: i1 }]));
        assert!(i.d1(i0, &[r2]).is_none());
        assert_eq!(
            i.compute_dn(i0, &[r1, r2], 2),
            BTreeSet::from([(vec![r1, r2], i0)])
        );
        assert_eq!(i.arity(), 1);
        let report = i.check_structure();
        assert!(report.passed(), "{report:?}");
        assert_eq!(report.bound, 2);
        assert!(i.is_chain_supported());
    }

    #[test]
    fn scatter_matches_literal_enumeration() {
        let a = torus_alg();
        let i = identity_bimodule(&a);
        let mut broken = i.table().clone();
        let x = i.lookup("h(1 3)h(2 4)").unwrap();
        let b = a.lookup("r[1-4]r[2-3]").unwrap();
        let seq = vec![b];
        broken.toggle(Key::new(x, seq), Out { alg: b, gen: x });
        for table in [i.table().clone(), broken] {
            let m = Bimodule::new("m", a.clone(), a.clone(), i.generators().to_vec(), table).unwrap();
            let scattered = m.structure_relation();
            let mut literal = Table::new();
            for len in 0..=2 * m.arity() {
                for seq in all_sequences(a.dim(), len) {
                    for x in 0..m.generators().len() {
                        let v = relation_at(&m, x, &seq);
                        literal.add_span(&Key::new(x, seq.clone()), &v);
                    }
                }
            }
            assert_eq!(scattered, literal);
        }
    }

    #[test]
    fn d1_with_nonclosed_output_fails_at_arity_one() {
        let a = torus_alg();
        let i = identity_bimodule(&a);
        let x = i.lookup("h(1 3)h(2 4)").unwrap();
        let b = a.lookup("r[1-4]r[2-3]").unwrap();
        let c = a.lookup("r[1-3]r[2-4]").unwrap();
        let mut t = Table::new();
        t.toggle(Key::new(x, vec![c]), Out { alg: b, gen: x });
        for &e in a.idempotents() {
            let g = i.lookup(a.basis_name(e)).unwrap();
            t.toggle(Key::new(g, vec![e]), Out { alg: e, gen: g });
        }
        let m = Bimodule::new("m", a.clone(), a.clone(), i.generators().to_vec(), t).unwrap();
        let report = m.check_structure();
        let (key, _) = report.relation.unwrap();
        assert_eq!(key.arity(), 1);
        assert_eq!(key, Key::new(x, vec![c]));
    }

    #[test]
    fn left_and_right_recursions_agree() {
        let a = torus_alg();
        let i = identity_bimodule(&a);
        // D_n by peeling off the first D_1.
        fn dn_first(m: &Bimodule, x: usize, seq: &[usize], n: usize) -> ChainSpan {
            if n == 1 {
                return m.compute_dn(x, seq, 1);
            }
            let mut out = ChainSpan::new();
            for j in 0..=seq.len() {
                for o in m.d1(x, &seq[..j]).into_iter().flatten() {
                    for (rest, y) in dn_first(m, o.gen, &seq[j..], n - 1) {
                        let mut chain = vec![o.alg];
                        chain.extend(rest);
                        toggle_chain(&mut out, (chain, y));
                    }
                }
            }
            out
        }
        for seq in all_sequences(a.dim(), 3) {
            for x in 0..i.generators().len() {
                for n in 1..=3 {
                    assert_eq!(i.compute_dn(x, &seq, n), dn_first(&i, x, &seq, n));
                }
            }
        }
    }

    #[test]
    fn empty_and_incompatible() {
        let a = torus_alg();
        let m = Bimodule::new("z", a.clone(), a.clone(), vec![], Table::new()).unwrap();
        assert!(m.check_structure().passed());
        assert_eq!(m.homology().unwrap(), 0);
        let i = identity_bimodule(&a);
        let x = i.lookup("h(1 3)").unwrap();
        let r2 = a.lookup("r[2-3]").unwrap();
        let mut t = i.table().clone();
        t.toggle(Key::new(x, vec![]), Out { alg: r2, gen: x });
        let err = Bimodule::new("bad", a.clone(), a.clone(), i.generators().to_vec(), t);
        assert!(matches!(err, Err(BimoduleError::IdempotentMismatch(_))));
        let again = Bimodule::new("copy", a.clone(), a, i.generators().to_vec(), i.table().clone()).unwrap();
        assert_eq!(again, i);
    }

    #[test]
    fn identity_complex_is_the_algebra() {
        let a = torus_alg();
        let i = identity_bimodule(&a);
        let c = i.arity_zero_complex();
        assert_eq!(c.basis.len(), a.dim());
        for (col, &(b, _)) in c.basis.iter().enumerate() {
            let image: BTreeSet<usize> = c.boundary.column(col).iter().map(|r| c.basis[r].0).collect();
            let expected: BTreeSet<usize> = a.diff(b).iter().collect();
            assert_eq!(image, expected);
        }
        assert!(c.boundary.mul(&c.boundary).unwrap().is_zero());
        assert_eq!(i.homology().unwrap(), 10);
    }
}
