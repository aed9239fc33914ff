//! Canonical forms of nested box products.
//!
//! A product is flattened into its atomic factors, identity bimodules are
//! dropped, and the result is rebuilt as a left-nested product. The
//! relabeling is accepted only if it carries the table over exactly.

use std::collections::HashMap;
use std::sync::Arc;

use crate::bimodule::{identity_bimodule, Bimodule, Origin};
use crate::boxtensor::{box_bimodules, BoxError};
use crate::morphism::{Morphism, MorphismError};
use crate::table::Table;

/// Atomic factors of a product and, per generator, its tuple of factor
/// generators.
#[derive(Debug, Clone)]
pub struct Flattened {
    pub factors: Vec<Arc<Bimodule>>,
    pub tuples: Vec<Vec<usize>>,
}

pub fn flatten(m: &Arc<Bimodule>) -> Flattened {
    match m.origin() {
        Origin::Atom => Flattened {
            factors: vec![m.clone()],
            tuples: (0..m.generators().len()).map(|g| vec![g]).collect(),
        },
        Origin::Identity => Flattened {
            factors: vec![],
            tuples: vec![vec![]; m.generators().len()],
        },
        Origin::Box { left, right, pairs } => {
            let l = flatten(left);
            let r = flatten(right);
            let tuples = pairs
                .iter()
                .map(|&(x, y)| {
                    let mut t = l.tuples[x].clone();
                    t.extend_from_slice(&r.tuples[y]);
                    t
                })
                .collect();
            let mut factors = l.factors;
            factors.extend(r.factors);
            Flattened { factors, tuples }
        }
    }
}

/// A canonical representative and the generator map into it.
#[derive(Debug, Clone)]
pub struct Canonical {
    pub bimodule: Arc<Bimodule>,
    /// Generator `g` of the original maps to generator `map[g]`.
    pub map: Vec<usize>,
}

impl Canonical {
    fn trivial(m: &Arc<Bimodule>) -> Canonical {
        Canonical {
            bimodule: m.clone(),
            map: (0..m.generators().len()).collect(),
        }
    }
}

pub fn relabel_table(t: &Table, map: &[usize]) -> Table {
    t.map_keys_and_outputs(|g| map[g], |g| map[g])
}

/// Canonical form of `m`. Falls back to `m` itself when the flattened
/// product does not reproduce `m`'s table exactly.
pub fn canonicalize(m: &Arc<Bimodule>) -> Result<Canonical, BoxError> {
    if matches!(m.origin(), Origin::Atom) {
        return Ok(Canonical::trivial(m));
    }
    let flat = flatten(m);
    let (canon, index): (Arc<Bimodule>, HashMap<Vec<usize>, usize>) = match flat.factors.len() {
        0 => {
            if !crate::bimodule::same_algebra(m.left_algebra(), m.right_algebra()) {
                return Ok(Canonical::trivial(m));
            }
            let id = Arc::new(identity_bimodule(m.left_algebra()));
            let index = id
                .generators()
                .iter()
                .enumerate()
                .map(|(i, g)| (vec![g.left], i))
                .collect();
            (id, index)
        }
        _ => {
            let mut acc = flat.factors[0].clone();
            for f in &flat.factors[1..] {
                acc = Arc::new(box_bimodules(&acc, f)?);
            }
            let fl = flatten(&acc);
            let index = fl.tuples.into_iter().enumerate().map(|(i, t)| (t, i)).collect();
            (acc, index)
        }
    };
    let map: Option<Vec<usize>> = (0..m.generators().len())
        .map(|g| {
            let key = if flat.factors.is_empty() {
                vec![m.generator(g).left]
            } else {
                flat.tuples[g].clone()
            };
            index.get(&key).copied()
        })
        .collect();
    let Some(map) = map else {
        return Ok(Canonical::trivial(m));
    };
    let bijective = {
        let mut seen = vec![false; canon.generators().len()];
        map.len() == seen.len() && map.iter().all(|&t| !std::mem::replace(&mut seen[t], true))
    };
    let gens_match = bijective
        && map.iter().enumerate().all(|(g, &t)| {
            m.generator(g).left == canon.generator(t).left && m.generator(g).right == canon.generator(t).right
        });
    if gens_match && relabel_table(m.table(), &map) == *canon.table() {
        Ok(Canonical { bimodule: canon, map })
    } else {
        Ok(Canonical::trivial(m))
    }
}

/// Moves a morphism along the canonical forms of its source and target.
pub fn transport(f: &Morphism, source: &Canonical, target: &Canonical) -> Result<Morphism, MorphismError> {
    let table = f
        .table()
        .map_keys_and_outputs(|g| source.map[g], |g| target.map[g]);
    Morphism::new(f.name(), source.bimodule.clone(), target.bimodule.clone(), table)
}
