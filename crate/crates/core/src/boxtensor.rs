//! Box tensor products of type DA bimodules and their morphisms.
//!
//! For `N` over `(A1, A2)` and `M` over `(A2, A3)`, generators of `N ⊠ M`
//! are pairs `(x, y)` with `ι_R(x) = ι_L(y)`, and
//! `D_1((x, y), a) = Σ_k D_1^N(x, chain of D_k^M(y, a))`: the algebra outputs
//! of `M`'s iterated structure map are fed to a single application of `N`.

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::bimodule::{concat, same_algebra, Bimodule, Generator, Origin};
use crate::morphism::{compose, Morphism, MorphismError};
use crate::table::{Accumulator, Key, Out, Span, Table};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoxError {
    #[error("middle algebras differ: {0}")]
    MiddleAlgebraMismatch(String),
    #[error("iteration exceeded the step budget of {budget}")]
    NonConverging { budget: usize },
    #[error("idempotent mismatch: {0}")]
    IdempotentMismatch(String),
    #[error(transparent)]
    Morphism(#[from] MorphismError),
}

/// Generators of `n ⊠ m` in lexicographic order of pairs.
pub fn product_generators(n: &Bimodule, m: &Bimodule) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for (x, gx) in n.generators().iter().enumerate() {
        for (y, gy) in m.generators().iter().enumerate() {
            if gx.right == gy.left {
                pairs.push((x, y));
            }
        }
    }
    pairs
}

/// Default step budget: `|basis(A_2)| * |χ_M| * (cap + 1)`.
pub fn default_budget(m: &Bimodule, cap: usize) -> usize {
    m.left_algebra().dim() * m.generators().len().max(1) * (cap + 1)
}

fn entries_from(t: &Table, gens: usize) -> Vec<Vec<(Vec<usize>, Vec<Out>)>> {
    let mut from = vec![Vec::new(); gens];
    for (k, s) in t.iter() {
        from[k.gen].push((k.seq.clone(), s.iter().copied().collect()));
    }
    from
}

/// One state of the walk along `M`'s structure map.
struct Walk {
    cur: usize,
    consumed: Vec<usize>,
    chain: Vec<usize>,
}

/// Walks every way `D_k^M(y, ·)` can produce a chain of length at most
/// `max_chain`, calling `visit` on each state. Empty-input steps are counted
/// against `budget`.
fn walk_chains(
    m_from: &[Vec<(Vec<usize>, Vec<Out>)>],
    start: usize,
    max_chain: usize,
    budget: usize,
    visit: &mut dyn FnMut(&Walk),
) -> Result<(), BoxError> {
    let mut steps = 0usize;
    let mut stack = vec![Walk {
        cur: start,
        consumed: vec![],
        chain: vec![],
    }];
    while let Some(w) = stack.pop() {
        visit(&w);
        if w.chain.len() == max_chain {
            continue;
        }
        for (seq, outs) in &m_from[w.cur] {
            if seq.is_empty() {
                steps += outs.len();
                if steps > budget {
                    return Err(BoxError::NonConverging { budget });
                }
            }
            for o in outs {
                let mut chain = w.chain.clone();
                chain.push(o.alg);
                stack.push(Walk {
                    cur: o.gen,
                    consumed: concat(&w.consumed, seq),
                    chain,
                });
            }
        }
    }
    Ok(())
}

fn pair_index(pairs: &[(usize, usize)]) -> HashMap<(usize, usize), usize> {
    pairs.iter().enumerate().map(|(i, &p)| (p, i)).collect()
}

fn lookup_pair(index: &HashMap<(usize, usize), usize>, n: &Bimodule, m: &Bimodule, p: (usize, usize)) -> Result<usize, BoxError> {
    index.get(&p).copied().ok_or_else(|| {
        BoxError::IdempotentMismatch(format!(
            "output pair ({}, {}) is not a generator of the product",
            n.generator(p.0).name,
            m.generator(p.1).name
        ))
    })
}

fn check_middle(n: &Bimodule, m: &Bimodule) -> Result<(), BoxError> {
    if same_algebra(n.right_algebra(), m.left_algebra()) {
        Ok(())
    } else {
        Err(BoxError::MiddleAlgebraMismatch(format!(
            "`{}` is over {} on the right, `{}` is over {} on the left",
            n.name(),
            n.right_algebra().name(),
            m.name(),
            m.left_algebra().name()
        )))
    }
}

fn product_shell(n: &Arc<Bimodule>, m: &Arc<Bimodule>) -> (Vec<(usize, usize)>, Vec<Generator>) {
    let pairs = product_generators(n, m);
    let gens = pairs
        .iter()
        .map(|&(x, y)| Generator {
            name: format!("{}~{}", n.generator(x).name, m.generator(y).name),
            left: n.generator(x).left,
            right: m.generator(y).right,
        })
        .collect();
    (pairs, gens)
}

pub fn box_bimodules(n: &Arc<Bimodule>, m: &Arc<Bimodule>) -> Result<Bimodule, BoxError> {
    box_bimodules_with_budget(n, m, default_budget(m, n.arity()))
}

pub fn box_bimodules_with_budget(n: &Arc<Bimodule>, m: &Arc<Bimodule>, budget: usize) -> Result<Bimodule, BoxError> {
    check_middle(n, m)?;
    let (pairs, gens) = product_shell(n, m);
    let index = pair_index(&pairs);
    let m_from = entries_from(m.table(), m.generators().len());
    let n_from = table_spans(n.table());
    let mut acc = Accumulator::new();
    let mut error = None;
    let mut by_start: HashMap<usize, Vec<(usize, usize)>> = HashMap::new();
    for (g, &(x, y)) in pairs.iter().enumerate() {
        by_start.entry(y).or_default().push((g, x));
    }
    let mut starts: Vec<_> = by_start.into_iter().collect();
    starts.sort();
    for (y, sources) in starts {
        walk_chains(&m_from, y, n.arity(), budget, &mut |w| {
            for &(g, x) in &sources {
                let Some(span) = n_from.get(&(x, w.chain.clone())) else {
                    continue;
                };
                for o in span {
                    match lookup_pair(&index, n, m, (o.gen, w.cur)) {
                        Ok(t) => acc.toggle(Key::new(g, w.consumed.clone()), Out { alg: o.alg, gen: t }),
                        Err(e) => error = Some(e),
                    }
                }
            }
        })?;
    }
    if let Some(e) = error {
        return Err(e);
    }
    Ok(Bimodule::with_origin(
        format!("{}*{}", n.name(), m.name()),
        n.left_algebra().clone(),
        m.right_algebra().clone(),
        gens,
        acc.finish(),
        Origin::Box {
            left: n.clone(),
            right: m.clone(),
            pairs,
        },
    )
    .expect("product outputs are compatible"))
}

fn table_spans(t: &Table) -> HashMap<(usize, Vec<usize>), Span> {
    t.iter().map(|(k, s)| ((k.gen, k.seq.clone()), s.clone())).collect()
}

/// `F ⊠ I_M` for `F: N -> N'`.
pub fn box_morphism_left(f: &Morphism, m: &Arc<Bimodule>) -> Result<Morphism, BoxError> {
    let n = f.source();
    let n2 = f.target();
    let source = Arc::new(box_bimodules(n, m)?);
    let target = Arc::new(box_bimodules(n2, m)?);
    box_morphism_left_between(f, m, source, target)
}

pub(crate) fn box_morphism_left_between(
    f: &Morphism,
    m: &Arc<Bimodule>,
    source: Arc<Bimodule>,
    target: Arc<Bimodule>,
) -> Result<Morphism, BoxError> {
    let n = f.source();
    let n2 = f.target();
    check_middle(n, m)?;
    let pairs = product_generators(n, m);
    let target_pairs = product_generators(n2, m);
    let index = pair_index(&target_pairs);
    let m_from = entries_from(m.table(), m.generators().len());
    let f_spans = table_spans(f.table());
    let budget = default_budget(m, f.arity());
    let mut acc = Accumulator::new();
    let mut error = None;
    for (g, &(x, y)) in pairs.iter().enumerate() {
        walk_chains(&m_from, y, f.arity(), budget, &mut |w| {
            let Some(span) = f_spans.get(&(x, w.chain.clone())) else {
                return;
            };
            for o in span {
                match lookup_pair(&index, n2, m, (o.gen, w.cur)) {
                    Ok(t) => acc.toggle(Key::new(g, w.consumed.clone()), Out { alg: o.alg, gen: t }),
                    Err(e) => error = Some(e),
                }
            }
        })?;
    }
    if let Some(e) = error {
        return Err(e);
    }
    Ok(Morphism::new(format!("{}*I", f.name()), source, target, acc.finish())?)
}

/// `I_N ⊠ G` for `G: M -> M'`.
pub fn box_morphism_right(n: &Arc<Bimodule>, g: &Morphism) -> Result<Morphism, BoxError> {
    let source = Arc::new(box_bimodules(n, g.source())?);
    let target = Arc::new(box_bimodules(n, g.target())?);
    box_morphism_right_between(n, g, source, target)
}

pub(crate) fn box_morphism_right_between(
    n: &Arc<Bimodule>,
    g: &Morphism,
    source: Arc<Bimodule>,
    target: Arc<Bimodule>,
) -> Result<Morphism, BoxError> {
    let m = g.source();
    let m2 = g.target();
    check_middle(n, m)?;
    let pairs = product_generators(n, m);
    let target_pairs = product_generators(n, m2);
    let index = pair_index(&target_pairs);
    let m_from = entries_from(m.table(), m.generators().len());
    let m2_from = entries_from(m2.table(), m2.generators().len());
    let g_from = entries_from(g.table(), m.generators().len());
    let n_spans = table_spans(n.table());
    let max_chain = n.arity();
    let budget = default_budget(m, max_chain);
    let mut acc = Accumulator::new();
    let mut error = None;
    for (p, &(x, y)) in pairs.iter().enumerate() {
        if max_chain == 0 {
            break;
        }
        // Chains through M, then exactly one G term, then chains through M'.
        let mut before = Vec::new();
        walk_chains(&m_from, y, max_chain.saturating_sub(1), budget, &mut |w| {
            before.push((w.cur, w.consumed.clone(), w.chain.clone()));
        })?;
        for (cur, consumed, chain) in before {
            for (seq, outs) in &g_from[cur] {
                for o in outs {
                    let prefix_consumed = concat(&consumed, seq);
                    let mut prefix_chain = chain.clone();
                    prefix_chain.push(o.alg);
                    let remaining = max_chain - prefix_chain.len();
                    walk_chains(&m2_from, o.gen, remaining, budget, &mut |w| {
                        let full_chain = concat(&prefix_chain, &w.chain);
                        let Some(span) = n_spans.get(&(x, full_chain)) else {
                            return;
                        };
                        for o2 in span {
                            match lookup_pair(&index, n, m2, (o2.gen, w.cur)) {
                                Ok(t) => acc.toggle(
                                    Key::new(p, concat(&prefix_consumed, &w.consumed)),
                                    Out { alg: o2.alg, gen: t },
                                ),
                                Err(e) => error = Some(e),
                            }
                        }
                    })?;
                }
            }
        }
    }
    if let Some(e) = error {
        return Err(e);
    }
    Ok(Morphism::new(format!("I*{}", g.name()), source, target, acc.finish())?)
}

/// `F ⊠ G = (I ⊠ G) ∘ (F ⊠ I)` for `F: N -> N'` and `G: M -> M'`.
pub fn box_morphisms(f: &Morphism, g: &Morphism) -> Result<Morphism, BoxError> {
    let n = f.source();
    let n2 = f.target();
    let m = g.source();
    let m2 = g.target();
    let nm = Arc::new(box_bimodules(n, m)?);
    let n2m = Arc::new(box_bimodules(n2, m)?);
    let n2m2 = Arc::new(box_bimodules(n2, m2)?);
    let left = box_morphism_left_between(f, m, nm, n2m.clone())?;
    let right = box_morphism_right_between(n2, g, n2m, n2m2)?;
    Ok(compose(&right, &left)?.renamed(format!("{}*{}", f.name(), g.name())))
}

#[cfg(test)]
mod tests;
