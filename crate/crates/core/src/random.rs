//! Seeded random tables for property tests and benchmarks.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::bimodule::{chain_end, Bimodule};
use crate::clf::{AbstractClf, ClfExpr, CycleLabel, Letter, Word};
use crate::morphism::{identity_morphism, Morphism};
use crate::table::{Key, Out, Table};

/// Shape of a random morphism table.
#[derive(Debug, Clone, Copy)]
pub struct TableShape {
    pub max_arity: usize,
    pub terms: usize,
    /// Inputs form a composable chain from `ι_R(x)` to `ι_R(y)`.
    pub chains_only: bool,
}

/// A random table of idempotent-compatible terms from `m` to `n`.
pub fn random_table(m: &Bimodule, n: &Bimodule, shape: TableShape, rng: &mut impl Rng) -> Table {
    let a1 = m.left_algebra();
    let a2 = m.right_algebra();
    let mut table = Table::new();
    let mut attempts = 0;
    while table.term_count() < shape.terms && attempts < 50 * shape.terms.max(1) {
        attempts += 1;
        if m.generators().is_empty() || n.generators().is_empty() {
            break;
        }
        let x = rng.gen_range(0..m.generators().len());
        let len = rng.gen_range(0..=shape.max_arity);
        let mut seq = Vec::with_capacity(len);
        let mut end = m.generator(x).right;
        let mut ok = true;
        for _ in 0..len {
            let a = if shape.chains_only {
                match a2.starting_at(end).choose(rng) {
                    Some(&a) => a,
                    None => {
                        ok = false;
                        break;
                    }
                }
            } else {
                rng.gen_range(0..a2.dim())
            };
            end = chain_end(a2, end, &[a]).unwrap_or(end);
            seq.push(a);
        }
        if !ok {
            continue;
        }
        let ys: Vec<usize> = (0..n.generators().len())
            .filter(|&y| !shape.chains_only || n.generator(y).right == end)
            .collect();
        let Some(&y) = ys.choose(rng) else { continue };
        let bs: Vec<usize> = a1
            .starting_at(m.generator(x).left)
            .iter()
            .copied()
            .filter(|&b| a1.right_idempotent(b) == n.generator(y).left)
            .collect();
        let Some(&b) = bs.choose(rng) else { continue };
        table.toggle(Key::new(x, seq), Out { alg: b, gen: y });
    }
    table
}

pub fn random_morphism(
    m: &Arc<Bimodule>,
    n: &Arc<Bimodule>,
    shape: TableShape,
    rng: &mut impl Rng,
) -> Morphism {
    Morphism::new("R", m.clone(), n.clone(), random_table(m, n, shape, rng)).expect("random tables are compatible")
}

/// `id + dH` for a random `H`; closed by construction.
pub fn random_closed_endomorphism(m: &Arc<Bimodule>, shape: TableShape, rng: &mut impl Rng) -> Morphism {
    let h = random_morphism(m, m, shape, rng);
    identity_morphism(m)
        .sum(&h.differential())
        .expect("parallel morphisms")
        .renamed("C")
}

/// A random word of length at most `max_len` over `letters` and their inverses.
pub fn random_word(letters: &[&str], max_len: usize, rng: &mut impl Rng) -> Word {
    let len = rng.gen_range(0..=max_len);
    Word::new((0..len).map(|_| {
        let l = Letter::gen(letters.choose(rng).expect("nonempty alphabet"));
        if rng.gen_bool(0.5) {
            l.inverse()
        } else {
            l
        }
    }))
}

fn random_label(rng: &mut impl Rng) -> CycleLabel {
    let mut prefix = random_word(&["a", "b"], 2, rng);
    if rng.gen_bool(0.3) {
        let inner = CycleLabel::bare(["x", "y"].choose(rng).expect("nonempty"));
        prefix = inner.twist().then_after(&prefix);
    }
    CycleLabel::new(prefix, ["x", "y", "z"].choose(rng).expect("nonempty"))
}

/// A random well-formed expression with at most `max_leaves` leaves.
/// Vertical compositions are made composable by padding the top with an
/// identity leaf.
pub fn random_clf(max_leaves: usize, rng: &mut impl Rng) -> ClfExpr {
    let max_leaves = max_leaves.max(1);
    if max_leaves == 1 || rng.gen_bool(0.25) {
        return if rng.gen_bool(0.6) {
            ClfExpr::crit(AbstractClf::new(
                random_word(&["a", "b"], 2, rng),
                random_word(&["a", "b"], 2, rng),
                random_label(rng),
            ))
        } else {
            ClfExpr::id(random_word(&["a", "b"], 3, rng))
        };
    }
    if max_leaves >= 3 && rng.gen_bool(0.4) {
        let bottom_leaves = rng.gen_range(1..=max_leaves - 2);
        let bottom = random_clf(bottom_leaves, rng);
        let top = random_clf(max_leaves - bottom_leaves - 1, rng);
        let pad = top.initial().inverse().then_after(&bottom.resulting());
        let top = ClfExpr::H(Box::new(ClfExpr::id(pad)), Box::new(top));
        return ClfExpr::V(Box::new(bottom), Box::new(top));
    }
    let left_leaves = rng.gen_range(1..max_leaves);
    ClfExpr::H(
        Box::new(random_clf(left_leaves, rng)),
        Box::new(random_clf(max_leaves - left_leaves, rng)),
    )
}
