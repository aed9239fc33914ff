//! Finite-dimensional differential graded algebras over GF(2).
//!
//! An algebra is a named basis with a multiplication table, a differential
//! table and a complete set of orthogonal idempotents. Every basis element
//! carries a left and right idempotent with `left * a * right = a`.

use std::collections::HashMap;
use std::fmt;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::f2::F2Vector;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("unknown basis element `{0}`")]
    UnknownSymbol(String),
    #[error("duplicate basis element `{0}`")]
    DuplicateName(String),
    #[error("`{0}` is not an idempotent")]
    NotAnIdempotent(String),
    #[error("table size mismatch: {0}")]
    Shape(String),
}

static ZERO: F2Vector = F2Vector::zero();

/// A DGA with explicit sparse tables.
#[derive(Clone)]
pub struct DgAlgebra {
    name: String,
    names: Vec<String>,
    index: HashMap<String, usize>,
    idempotents: Vec<usize>,
    is_idempotent: Vec<bool>,
    left: Vec<usize>,
    right: Vec<usize>,
    diff: Vec<F2Vector>,
    mult: HashMap<(usize, usize), F2Vector>,
    starting_at: HashMap<usize, Vec<usize>>,
    ending_at: HashMap<usize, Vec<usize>>,
    factorizations: Vec<Vec<(usize, usize)>>,
    diff_preimages: Vec<Vec<usize>>,
}

impl PartialEq for DgAlgebra {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names
            && self.idempotents == other.idempotents
            && self.left == other.left
            && self.right == other.right
            && self.diff == other.diff
            && self.mult == other.mult
    }
}

impl Eq for DgAlgebra {}

impl fmt::Debug for DgAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DgAlgebra")
            .field("name", &self.name)
            .field("dim", &self.names.len())
            .finish()
    }
}

/// Raw tables for [`DgAlgebra::new`].
#[derive(Debug, Clone, Default)]
pub struct AlgebraTables {
    pub names: Vec<String>,
    pub idempotents: Vec<usize>,
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    pub diff: Vec<F2Vector>,
    pub mult: Vec<((usize, usize), F2Vector)>,
}

impl DgAlgebra {
    pub fn new(name: impl Into<String>, tables: AlgebraTables) -> Result<Self, AlgebraError> {
        let AlgebraTables {
            names,
            idempotents,
            left,
            right,
            diff,
            mult,
        } = tables;
        let n = names.len();
        if left.len() != n || right.len() != n || diff.len() != n {
            return Err(AlgebraError::Shape(format!(
                "{n} names but {} left, {} right, {} differential entries",
                left.len(),
                right.len(),
                diff.len()
            )));
        }
        let mut index = HashMap::new();
        for (i, name) in names.iter().enumerate() {
            if index.insert(name.clone(), i).is_some() {
                return Err(AlgebraError::DuplicateName(name.clone()));
            }
        }
        let mut is_idempotent = vec![false; n];
        for &i in &idempotents {
            if i >= n {
                return Err(AlgebraError::Shape(format!("idempotent index {i} out of range")));
            }
            is_idempotent[i] = true;
        }
        for (i, (&l, &r)) in left.iter().zip(&right).enumerate() {
            for e in [l, r] {
                if e >= n || !is_idempotent[e] {
                    return Err(AlgebraError::NotAnIdempotent(
                        names.get(e).cloned().unwrap_or_else(|| format!("#{e} (for {})", names[i])),
                    ));
                }
            }
        }
        let check_vec = |v: &F2Vector| -> Result<(), AlgebraError> {
            match v.max_index() {
                Some(m) if m >= n => Err(AlgebraError::Shape(format!("basis index {m} out of range"))),
                _ => Ok(()),
            }
        };
        for v in &diff {
            check_vec(v)?;
        }
        let mut mult_map = HashMap::new();
        for ((a, b), v) in mult {
            if a >= n || b >= n {
                return Err(AlgebraError::Shape(format!("product ({a}, {b}) out of range")));
            }
            check_vec(&v)?;
            let slot: &mut F2Vector = mult_map.entry((a, b)).or_default();
            slot.add_assign(&v);
        }
        mult_map.retain(|_, v: &mut F2Vector| !v.is_zero());
        let mut starting_at: HashMap<usize, Vec<usize>> = HashMap::new();
        let mut ending_at: HashMap<usize, Vec<usize>> = HashMap::new();
        for i in 0..n {
            starting_at.entry(left[i]).or_default().push(i);
            ending_at.entry(right[i]).or_default().push(i);
        }
        let mut factorizations = vec![Vec::new(); n];
        let mut keys: Vec<_> = mult_map.keys().copied().collect();
        keys.sort_unstable();
        for (a, b) in keys {
            for c in mult_map[&(a, b)].iter() {
                factorizations[c].push((a, b));
            }
        }
        let mut diff_preimages = vec![Vec::new(); n];
        for (a, d) in diff.iter().enumerate() {
            for c in d.iter() {
                diff_preimages[c].push(a);
            }
        }
        Ok(DgAlgebra {
            name: name.into(),
            names,
            index,
            idempotents,
            is_idempotent,
            left,
            right,
            diff,
            mult: mult_map,
            starting_at,
            ending_at,
            factorizations,
            diff_preimages,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn basis_name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn lookup(&self, name: &str) -> Result<usize, AlgebraError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| AlgebraError::UnknownSymbol(name.to_string()))
    }

    pub fn idempotents(&self) -> &[usize] {
        &self.idempotents
    }

    pub fn is_idempotent(&self, i: usize) -> bool {
        self.is_idempotent[i]
    }

    pub fn left_idempotent(&self, i: usize) -> usize {
        self.left[i]
    }

    pub fn right_idempotent(&self, i: usize) -> usize {
        self.right[i]
    }

    /// Basis elements whose left idempotent is `idem`.
    pub fn starting_at(&self, idem: usize) -> &[usize] {
        self.starting_at.get(&idem).map_or(&[], Vec::as_slice)
    }

    /// Basis elements whose right idempotent is `idem`.
    pub fn ending_at(&self, idem: usize) -> &[usize] {
        self.ending_at.get(&idem).map_or(&[], Vec::as_slice)
    }

    pub fn mul(&self, a: usize, b: usize) -> &F2Vector {
        self.mult.get(&(a, b)).unwrap_or(&ZERO)
    }

    pub fn diff(&self, a: usize) -> &F2Vector {
        &self.diff[a]
    }

    /// Nonzero products, in no particular order.
    pub fn products(&self) -> impl Iterator<Item = (&(usize, usize), &F2Vector)> {
        self.mult.iter()
    }

    /// All `(p, q)` whose product contains `c`.
    pub fn factorizations(&self, c: usize) -> &[(usize, usize)] {
        &self.factorizations[c]
    }

    /// All `a` whose differential contains `c`.
    pub fn diff_preimages(&self, c: usize) -> &[usize] {
        &self.diff_preimages[c]
    }

    pub fn mul_vec(&self, x: &F2Vector, y: &F2Vector) -> F2Vector {
        let mut out = F2Vector::zero();
        for a in x.iter() {
            for b in y.iter() {
                out.add_assign(self.mul(a, b));
            }
        }
        out
    }

    pub fn diff_vec(&self, x: &F2Vector) -> F2Vector {
        let mut out = F2Vector::zero();
        for a in x.iter() {
            out.add_assign(&self.diff[a]);
        }
        out
    }

    /// Sum of all idempotents.
    pub fn unit(&self) -> F2Vector {
        self.idempotents.iter().copied().collect()
    }

    pub fn display_vec(&self, v: &F2Vector) -> String {
        if v.is_zero() {
            return "0".to_string();
        }
        v.iter()
            .map(|i| self.names[i].as_str())
            .collect::<Vec<_>>()
            .join(" + ")
    }

    fn composable_pairs_from(&self, a: usize) -> &[usize] {
        self.starting_at(self.right[a])
    }
}

/// How a relation was checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckMode {
    Exhaustive { instances: usize },
    Sampled { instances: usize, population: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub mode: CheckMode,
    /// Offending basis elements of the first failure in canonical order.
    pub witness: Option<Vec<String>>,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.witness.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DgaReport {
    pub checks: Vec<CheckOutcome>,
}

impl DgaReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckOutcome::passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub const CHECK_D_SQUARED: &str = "d^2 = 0";
pub const CHECK_LEIBNIZ: &str = "leibniz";
pub const CHECK_ASSOCIATIVITY: &str = "associativity";
pub const CHECK_IDEMPOTENTS: &str = "idempotents";
pub const CHECK_SUPPORT: &str = "idempotent support";

/// Seed for the sampled checks; fixed so reports are reproducible.
pub const DEFAULT_SAMPLE_SEED: u64 = 0x0005_eed0_fa19_eb2a;

/// Checks the DGA axioms.
///
/// `d^2 = 0`, the idempotent axioms and idempotent support of both tables
/// are always checked exhaustively. Leibniz and associativity run over all
/// pairs (triples) when `dim^2` (`dim^3`) fits in `sample_budget`; otherwise
/// `sample_budget` instances are drawn uniformly from the idempotent-composable
/// ones, the rest being forced by the support check.
pub fn verify_dga(a: &DgAlgebra, sample_budget: usize) -> DgaReport {
    verify_dga_seeded(a, sample_budget, DEFAULT_SAMPLE_SEED)
}

pub fn verify_dga_seeded(a: &DgAlgebra, sample_budget: usize, seed: u64) -> DgaReport {
    let names = |ids: &[usize]| ids.iter().map(|&i| a.names[i].clone()).collect::<Vec<_>>();
    let n = a.dim();

    let d_squared = (0..n)
        .into_par_iter()
        .find_first(|&x| !a.diff_vec(a.diff(x)).is_zero())
        .map(|x| names(&[x]));

    let support = check_support(a).map(|ids| names(&ids));
    let idempotents = check_idempotents(a).map(|ids| names(&ids));

    let leibniz_ok = |&(x, y): &(usize, usize)| {
        let lhs = a.diff_vec(a.mul(x, y));
        let mut rhs = a.mul_vec(a.diff(x), &F2Vector::unit(y));
        rhs.add_assign(&a.mul_vec(&F2Vector::unit(x), a.diff(y)));
        lhs == rhs
    };
    let assoc_ok = |&(x, y, z): &(usize, usize, usize)| {
        let left = a.mul_vec(a.mul(x, y), &F2Vector::unit(z));
        let right = a.mul_vec(&F2Vector::unit(x), a.mul(y, z));
        left == right
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let pair_population: usize = (0..n).map(|x| a.composable_pairs_from(x).len()).sum();
    let (pairs, pair_mode) = if n * n <= sample_budget {
        let all: Vec<(usize, usize)> = (0..n).flat_map(|x| (0..n).map(move |y| (x, y))).collect();
        (all, CheckMode::Exhaustive { instances: n * n })
    } else {
        (
            sample_pairs(a, sample_budget, &mut rng),
            CheckMode::Sampled {
                instances: sample_budget,
                population: pair_population,
            },
        )
    };
    let leibniz = pairs
        .par_iter()
        .find_first(|p| !leibniz_ok(p))
        .map(|&(x, y)| names(&[x, y]));

    let triple_population: usize = (0..n)
        .map(|y| a.ending_at(a.left[y]).len() * a.starting_at(a.right[y]).len())
        .sum();
    let (triples, triple_mode) = if n.saturating_mul(n).saturating_mul(n) <= sample_budget {
        let all: Vec<(usize, usize, usize)> = (0..n)
            .flat_map(|x| (0..n).flat_map(move |y| (0..n).map(move |z| (x, y, z))))
            .collect();
        (all, CheckMode::Exhaustive { instances: n * n * n })
    } else {
        (
            sample_triples(a, sample_budget, &mut rng),
            CheckMode::Sampled {
                instances: sample_budget,
                population: triple_population,
            },
        )
    };
    let associativity = triples
        .par_iter()
        .find_first(|t| !assoc_ok(t))
        .map(|&(x, y, z)| names(&[x, y, z]));

    DgaReport {
        checks: vec![
            CheckOutcome {
                name: CHECK_D_SQUARED,
                mode: CheckMode::Exhaustive { instances: n },
                witness: d_squared,
            },
            CheckOutcome {
                name: CHECK_LEIBNIZ,
                mode: pair_mode,
                witness: leibniz,
            },
            CheckOutcome {
                name: CHECK_ASSOCIATIVITY,
                mode: triple_mode,
                witness: associativity,
            },
            CheckOutcome {
                name: CHECK_IDEMPOTENTS,
                mode: CheckMode::Exhaustive {
                    instances: a.idempotents.len() * a.idempotents.len() + n,
                },
                witness: idempotents,
            },
            CheckOutcome {
                name: CHECK_SUPPORT,
                mode: CheckMode::Exhaustive {
                    instances: n + a.mult.len(),
                },
                witness: support,
            },
        ],
    }
}

fn sample_pairs(a: &DgAlgebra, count: usize, rng: &mut impl Rng) -> Vec<(usize, usize)> {
    let weights: Vec<usize> = (0..a.dim()).map(|x| a.composable_pairs_from(x).len()).collect();
    let Ok(dist) = WeightedIndex::new(&weights) else {
        return Vec::new();
    };
    (0..count)
        .map(|_| {
            let x = dist.sample(rng);
            let ys = a.composable_pairs_from(x);
            (x, ys[rng.gen_range(0..ys.len())])
        })
        .collect()
}

fn sample_triples(a: &DgAlgebra, count: usize, rng: &mut impl Rng) -> Vec<(usize, usize, usize)> {
    let weights: Vec<usize> = (0..a.dim())
        .map(|y| a.ending_at(a.left[y]).len() * a.starting_at(a.right[y]).len())
        .collect();
    let Ok(dist) = WeightedIndex::new(&weights) else {
        return Vec::new();
    };
    (0..count)
        .map(|_| {
            let y = dist.sample(rng);
            let xs = a.ending_at(a.left[y]);
            let zs = a.starting_at(a.right[y]);
            (xs[rng.gen_range(0..xs.len())], y, zs[rng.gen_range(0..zs.len())])
        })
        .collect()
}

/// Every product and differential term respects idempotents.
fn check_support(a: &DgAlgebra) -> Option<Vec<usize>> {
    for x in 0..a.dim() {
        for t in a.diff(x).iter() {
            if a.left[t] != a.left[x] || a.right[t] != a.right[x] {
                return Some(vec![x]);
            }
        }
    }
    let mut keys: Vec<_> = a.mult.keys().copied().collect();
    keys.sort_unstable();
    for (x, y) in keys {
        if a.right[x] != a.left[y] {
            return Some(vec![x, y]);
        }
        for t in a.mult[&(x, y)].iter() {
            if a.left[t] != a.left[x] || a.right[t] != a.right[y] {
                return Some(vec![x, y]);
            }
        }
    }
    None
}

fn check_idempotents(a: &DgAlgebra) -> Option<Vec<usize>> {
    for &i in &a.idempotents {
        for &j in &a.idempotents {
            let p = a.mul(i, j);
            let expect = if i == j { F2Vector::unit(i) } else { F2Vector::zero() };
            if *p != expect {
                return Some(vec![i, j]);
            }
        }
        if !a.diff(i).is_zero() {
            return Some(vec![i]);
        }
    }
    let unit = a.unit();
    for x in 0..a.dim() {
        let e = F2Vector::unit(x);
        if a.mul_vec(&unit, &e) != e || a.mul_vec(&e, &unit) != e {
            return Some(vec![x]);
        }
        if *a.mul(a.left[x], x) != e || *a.mul(x, a.right[x]) != e {
            return Some(vec![x]);
        }
    }
    None
}
