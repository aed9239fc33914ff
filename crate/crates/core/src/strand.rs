//! Strand algebras of pointed matched circles.
//!
//! A basis diagram has moving strands `s -> t` (`s < t`) and horizontal
//! matched pairs. Sources are distinct points on distinct pairs, targets are
//! distinct points on distinct pairs, and horizontal pairs avoid every pair
//! that carries a source or a target. A point may be both a source and a
//! target.
//!
//! Products and differentials are computed on primitive diagrams, where each
//! horizontal pair is replaced by a horizontal strand at one of its two
//! points, and the result is regrouped.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::algebra::{AlgebraTables, DgAlgebra};
use crate::f2::F2Vector;
use crate::pmc::{Pair, PointedMatchedCircle};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StrandError {
    #[error("cannot parse strand diagram `{0}`")]
    Syntax(String),
    #[error("invalid strand diagram `{0}`: {1}")]
    Invalid(String, &'static str),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StrandDiagram {
    /// Sorted by source.
    strands: Vec<(u8, u8)>,
    /// Sorted.
    horizontals: Vec<Pair>,
}

/// A partial bijection with `t >= s`, sorted by source.
type Primitive = Vec<(u8, u8)>;

impl StrandDiagram {
    pub fn new(
        c: &PointedMatchedCircle,
        strands: &[(u8, u8)],
        horizontals: &[(u8, u8)],
    ) -> Result<Self, StrandError> {
        let mut strands = strands.to_vec();
        strands.sort_unstable();
        let mut horizontals: Vec<Pair> = horizontals.iter().map(|&(a, b)| Pair::new(a, b)).collect();
        horizontals.sort_unstable();
        let d = StrandDiagram { strands, horizontals };
        d.check(c).map_err(|why| StrandError::Invalid(d.to_string(), why))?;
        Ok(d)
    }

    pub fn idempotent(c: &PointedMatchedCircle, mask: u32) -> Self {
        let horizontals = c
            .pairs()
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, p)| *p)
            .collect();
        StrandDiagram {
            strands: Vec::new(),
            horizontals,
        }
    }

    fn check(&self, c: &PointedMatchedCircle) -> Result<(), &'static str> {
        let n = c.points() as u8;
        let mut src = 0u32;
        let mut tgt = 0u32;
        let mut sources = BTreeSet::new();
        let mut targets = BTreeSet::new();
        for &(s, t) in &self.strands {
            if s == 0 || t > n || s >= t {
                return Err("strands must run upward between points of the circle");
            }
            if !sources.insert(s) || !targets.insert(t) {
                return Err("strand endpoints collide");
            }
            let (ps, pt) = (c.pair_index(s), c.pair_index(t));
            if src >> ps & 1 == 1 || tgt >> pt & 1 == 1 {
                return Err("two sources or two targets share a matched pair");
            }
            src |= 1 << ps;
            tgt |= 1 << pt;
        }
        let mut hor = 0u32;
        for h in &self.horizontals {
            let Some(i) = c.pairs().iter().position(|p| p == h) else {
                return Err("horizontal pair is not a matched pair");
            };
            if (src | tgt | hor) >> i & 1 == 1 {
                return Err("horizontal pair meets an occupied pair");
            }
            hor |= 1 << i;
        }
        Ok(())
    }

    pub fn strands(&self) -> &[(u8, u8)] {
        &self.strands
    }

    pub fn horizontals(&self) -> &[Pair] {
        &self.horizontals
    }

    pub fn is_idempotent(&self) -> bool {
        self.strands.is_empty()
    }

    fn horizontal_mask(&self, c: &PointedMatchedCircle) -> u32 {
        self.horizontals
            .iter()
            .map(|h| 1u32 << c.pair_index(h.0))
            .fold(0, |a, b| a | b)
    }

    /// Occupied pairs on the source side, as a bitmask over `c.pairs()`.
    pub fn source_mask(&self, c: &PointedMatchedCircle) -> u32 {
        self.strands
            .iter()
            .fold(self.horizontal_mask(c), |m, &(s, _)| m | 1 << c.pair_index(s))
    }

    pub fn target_mask(&self, c: &PointedMatchedCircle) -> u32 {
        self.strands
            .iter()
            .fold(self.horizontal_mask(c), |m, &(_, t)| m | 1 << c.pair_index(t))
    }

    pub fn occupied(&self) -> usize {
        self.strands.len() + self.horizontals.len()
    }

    fn order_key(&self) -> (usize, &[(u8, u8)], &[Pair]) {
        (self.occupied(), &self.strands, &self.horizontals)
    }

    /// Every way of choosing one point from each horizontal pair.
    fn lifts(&self) -> Vec<Primitive> {
        let h = self.horizontals.len();
        (0..1u32 << h)
            .map(|choice| {
                let mut p = self.strands.clone();
                for (i, pair) in self.horizontals.iter().enumerate() {
                    let x = if choice >> i & 1 == 0 { pair.0 } else { pair.1 };
                    p.push((x, x));
                }
                p.sort_unstable();
                p
            })
            .collect()
    }

    /// Parses the display form, e.g. `r[1-3]h(2 4)` or `h()`.
    pub fn parse(c: &PointedMatchedCircle, text: &str) -> Result<Self, StrandError> {
        let syntax = || StrandError::Syntax(text.to_string());
        let mut strands = Vec::new();
        let mut horizontals = Vec::new();
        let mut rest = text.trim();
        if rest == "h()" {
            return Self::new(c, &[], &[]);
        }
        while !rest.is_empty() {
            if let Some(r) = rest.strip_prefix("r[") {
                let end = r.find(']').ok_or_else(syntax)?;
                let (s, t) = r[..end].split_once('-').ok_or_else(syntax)?;
                strands.push((
                    s.trim().parse().map_err(|_| syntax())?,
                    t.trim().parse().map_err(|_| syntax())?,
                ));
                rest = &r[end + 1..];
            } else if let Some(r) = rest.strip_prefix("h(") {
                let end = r.find(')').ok_or_else(syntax)?;
                let mut it = r[..end].split_whitespace();
                let a = it.next().ok_or_else(syntax)?.parse().map_err(|_| syntax())?;
                let b = it.next().ok_or_else(syntax)?.parse().map_err(|_| syntax())?;
                if it.next().is_some() {
                    return Err(syntax());
                }
                horizontals.push((a, b));
                rest = &r[end + 1..];
            } else {
                return Err(syntax());
            }
        }
        Self::new(c, &strands, &horizontals)
    }
}

impl fmt::Display for StrandDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.strands.is_empty() && self.horizontals.is_empty() {
            return f.write_str("h()");
        }
        for (s, t) in &self.strands {
            write!(f, "r[{s}-{t}]")?;
        }
        for h in &self.horizontals {
            write!(f, "h({} {})", h.0, h.1)?;
        }
        Ok(())
    }
}

/// A GF(2) combination of basis diagrams.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AlgebraElement {
    terms: BTreeSet<StrandDiagram>,
}

impl AlgebraElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn terms(&self) -> impl Iterator<Item = &StrandDiagram> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn toggle(&mut self, d: StrandDiagram) {
        if !self.terms.remove(&d) {
            self.terms.insert(d);
        }
    }

    pub fn contains(&self, d: &StrandDiagram) -> bool {
        self.terms.contains(d)
    }
}

impl From<StrandDiagram> for AlgebraElement {
    fn from(d: StrandDiagram) -> Self {
        AlgebraElement {
            terms: BTreeSet::from([d]),
        }
    }
}

impl fmt::Display for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self.terms.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join(" + "))
    }
}

fn inversions(p: &[(u8, u8)]) -> usize {
    let mut count = 0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i].1 > p[j].1 {
                count += 1;
            }
        }
    }
    count
}

/// Concatenation `phi` then `psi`, if the targets of `phi` are exactly the
/// sources of `psi`.
fn concatenate(phi: &[(u8, u8)], psi: &[(u8, u8)]) -> Option<Primitive> {
    if phi.len() != psi.len() {
        return None;
    }
    let mut targets: Vec<u8> = phi.iter().map(|&(_, t)| t).collect();
    targets.sort_unstable();
    if targets.iter().zip(psi).any(|(&t, &(s, _))| t != s) {
        return None;
    }
    let out = phi
        .iter()
        .map(|&(s, t)| {
            let k = psi.binary_search_by_key(&t, |&(s2, _)| s2).expect("targets match sources");
            (s, psi[k].1)
        })
        .collect();
    Some(out)
}

/// Groups a set of primitives whose grouped lifts come in complete families.
fn regroup(c: &PointedMatchedCircle, prims: HashSet<Primitive>) -> AlgebraElement {
    let mut out = AlgebraElement::zero();
    let mut seen: HashSet<Primitive> = HashSet::new();
    let mut sorted: Vec<Primitive> = prims.iter().cloned().collect();
    sorted.sort_unstable();
    for p in sorted {
        if seen.contains(&p) {
            continue;
        }
        let strands: Vec<(u8, u8)> = p.iter().copied().filter(|&(s, t)| s != t).collect();
        let horizontals: Vec<Pair> = p
            .iter()
            .filter(|&&(s, t)| s == t)
            .map(|&(s, _)| Pair::new(s, c.partner(s)))
            .collect();
        let mut horizontals_sorted = horizontals.clone();
        horizontals_sorted.sort_unstable();
        let d = StrandDiagram {
            strands,
            horizontals: horizontals_sorted,
        };
        assert!(
            d.check(c).is_ok() && d.horizontals.windows(2).all(|w| w[0] != w[1]),
            "primitive {p:?} does not lie in the grouped algebra"
        );
        for lift in d.lifts() {
            assert!(
                prims.contains(&lift),
                "incomplete family of lifts for {d} in a regrouped sum"
            );
            seen.insert(lift);
        }
        out.toggle(d);
    }
    out
}

fn toggle(set: &mut HashSet<Primitive>, p: Primitive) {
    if !set.remove(&p) {
        set.insert(p);
    }
}

/// All basis diagrams in canonical order.
pub fn enumerate_basis(c: &PointedMatchedCircle) -> Vec<StrandDiagram> {
    let n = c.points() as u8;
    let mut out = Vec::new();
    let mut strands = Vec::new();
    enumerate_strands(c, 1, n, 0, 0, 0, &mut strands, &mut out);
    out.sort_by(|a, b| a.order_key().cmp(&b.order_key()));
    out
}

#[allow(clippy::too_many_arguments)]
fn enumerate_strands(
    c: &PointedMatchedCircle,
    s: u8,
    n: u8,
    src: u32,
    tgt: u32,
    used_targets: u64,
    strands: &mut Vec<(u8, u8)>,
    out: &mut Vec<StrandDiagram>,
) {
    if s > n {
        let free: Vec<usize> = (0..c.pairs().len())
            .filter(|&i| (src | tgt) >> i & 1 == 0)
            .collect();
        for choice in 0..1u32 << free.len() {
            let horizontals = free
                .iter()
                .enumerate()
                .filter(|(k, _)| choice >> k & 1 == 1)
                .map(|(_, &i)| c.pairs()[i])
                .collect();
            out.push(StrandDiagram {
                strands: strands.clone(),
                horizontals,
            });
        }
        return;
    }
    enumerate_strands(c, s + 1, n, src, tgt, used_targets, strands, out);
    let ps = c.pair_index(s);
    if src >> ps & 1 == 1 {
        return;
    }
    for t in s + 1..=n {
        let pt = c.pair_index(t);
        if used_targets >> t & 1 == 1 || tgt >> pt & 1 == 1 {
            continue;
        }
        strands.push((s, t));
        enumerate_strands(
            c,
            s + 1,
            n,
            src | 1 << ps,
            tgt | 1 << pt,
            used_targets | 1 << t,
            strands,
            out,
        );
        strands.pop();
    }
}

pub fn multiply(c: &PointedMatchedCircle, a: &StrandDiagram, b: &StrandDiagram) -> AlgebraElement {
    if a.target_mask(c) != b.source_mask(c) {
        return AlgebraElement::zero();
    }
    let mut prims = HashSet::new();
    let lifts_b = b.lifts();
    for phi in a.lifts() {
        let inv_phi = inversions(&phi);
        for psi in &lifts_b {
            if let Some(p) = concatenate(&phi, psi) {
                if inversions(&p) == inv_phi + inversions(psi) {
                    toggle(&mut prims, p);
                }
            }
        }
    }
    regroup(c, prims)
}

pub fn differential(c: &PointedMatchedCircle, a: &StrandDiagram) -> AlgebraElement {
    let mut prims = HashSet::new();
    for phi in a.lifts() {
        let inv = inversions(&phi);
        for i in 0..phi.len() {
            for j in i + 1..phi.len() {
                if phi[i].1 > phi[j].1 {
                    let mut psi = phi.clone();
                    psi[i].1 = phi[j].1;
                    psi[j].1 = phi[i].1;
                    if inversions(&psi) + 1 == inv {
                        toggle(&mut prims, psi);
                    }
                }
            }
        }
    }
    regroup(c, prims)
}

/// The strand algebra with basis in canonical order.
pub fn build_dga(c: &PointedMatchedCircle, name: impl Into<String>) -> DgAlgebra {
    let basis = enumerate_basis(c);
    let index: HashMap<&StrandDiagram, usize> = basis.iter().enumerate().map(|(i, d)| (d, i)).collect();
    let mut idem_of_mask = HashMap::new();
    let mut idempotents = Vec::new();
    for (i, d) in basis.iter().enumerate() {
        if d.is_idempotent() {
            idem_of_mask.insert(d.source_mask(c), i);
            idempotents.push(i);
        }
    }
    let left: Vec<usize> = basis.iter().map(|d| idem_of_mask[&d.source_mask(c)]).collect();
    let right: Vec<usize> = basis.iter().map(|d| idem_of_mask[&d.target_mask(c)]).collect();
    let to_vec = &|e: AlgebraElement| -> F2Vector { e.terms().map(|d| index[d]).collect() };
    let diff: Vec<F2Vector> = basis.par_iter().map(|d| to_vec(differential(c, d))).collect();
    let mut by_source: HashMap<u32, Vec<usize>> = HashMap::new();
    for (i, d) in basis.iter().enumerate() {
        by_source.entry(d.source_mask(c)).or_default().push(i);
    }
    let basis_ref = &basis;
    let mult: Vec<((usize, usize), F2Vector)> = basis
        .par_iter()
        .enumerate()
        .flat_map_iter(|(i, a)| {
            let partners = by_source.get(&a.target_mask(c)).cloned().unwrap_or_default();
            partners.into_iter().filter_map(move |j| {
                let v = to_vec(multiply(c, a, &basis_ref[j]));
                (!v.is_zero()).then_some(((i, j), v))
            })
        })
        .collect();
    DgAlgebra::new(
        name,
        AlgebraTables {
            names: basis.iter().map(ToString::to_string).collect(),
            idempotents,
            left,
            right,
            diff,
            mult,
        },
    )
    .expect("strand tables are well formed")
}
