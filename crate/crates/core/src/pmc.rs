//! Pointed matched circles.
//!
//! Points are numbered `1..=4g` along the orientation, starting just after
//! the basepoint, so the basepoint sits between `4g` and `1`.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PmcError {
    #[error("malformed matching: {0}")]
    MalformedMatching(String),
    #[error("degenerate matching: surgery along the pairs yields {components} circles")]
    DegenerateMatching { components: usize },
}

/// A matched pair of points, stored with the smaller point first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pair(pub u8, pub u8);

impl Pair {
    pub fn new(a: u8, b: u8) -> Pair {
        if a <= b {
            Pair(a, b)
        } else {
            Pair(b, a)
        }
    }

    pub fn contains(&self, p: u8) -> bool {
        self.0 == p || self.1 == p
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {})", self.0, self.1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PointedMatchedCircle {
    genus: usize,
    /// Sorted by smaller point.
    pairs: Vec<Pair>,
    /// `partner[p]` for points `1..=4g`; index 0 unused.
    partner: Vec<u8>,
    /// `pair_of[p]` is the index into `pairs`.
    pair_of: Vec<usize>,
}

/// Outcome of checking both validity criteria.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub surgery_components: usize,
    /// Surgery yields a single circle. Authoritative.
    pub surgery_valid: bool,
    /// No sequence of arc slides brings two matched points next to each other.
    pub handleslide_valid: bool,
    /// Number of matchings reached by the arc-slide search.
    pub handleslide_orbit: usize,
}

impl ValidationReport {
    pub fn diverges(&self) -> bool {
        self.surgery_valid != self.handleslide_valid
    }
}

impl PointedMatchedCircle {
    /// Builds a circle, rejecting matchings that are not partitions or that
    /// fail the surgery criterion.
    pub fn new(genus: usize, pairs: &[(u8, u8)]) -> Result<Self, PmcError> {
        let c = Self::from_matching(genus, pairs)?;
        let components = surgery_components(c.points(), &c.partner);
        if components != 1 {
            return Err(PmcError::DegenerateMatching { components });
        }
        Ok(c)
    }

    /// Builds the matching without the validity check.
    pub fn from_matching(genus: usize, pairs: &[(u8, u8)]) -> Result<Self, PmcError> {
        if genus == 0 {
            return Err(PmcError::MalformedMatching("genus must be at least 1".into()));
        }
        if genus > 15 {
            return Err(PmcError::MalformedMatching("genus above 15 is not supported".into()));
        }
        let n = 4 * genus;
        if pairs.len() != 2 * genus {
            return Err(PmcError::MalformedMatching(format!(
                "genus {genus} needs {} pairs, got {}",
                2 * genus,
                pairs.len()
            )));
        }
        let mut partner = vec![0u8; n + 1];
        for &(a, b) in pairs {
            for p in [a, b] {
                if p == 0 || p as usize > n {
                    return Err(PmcError::MalformedMatching(format!(
                        "point {p} outside 1..={n}"
                    )));
                }
            }
            if a == b {
                return Err(PmcError::MalformedMatching(format!("point {a} paired with itself")));
            }
            for p in [a, b] {
                if partner[p as usize] != 0 {
                    return Err(PmcError::MalformedMatching(format!(
                        "point {p} appears in two pairs"
                    )));
                }
            }
            partner[a as usize] = b;
            partner[b as usize] = a;
        }
        let mut sorted: Vec<Pair> = pairs.iter().map(|&(a, b)| Pair::new(a, b)).collect();
        sorted.sort();
        let mut pair_of = vec![usize::MAX; n + 1];
        for (i, p) in sorted.iter().enumerate() {
            pair_of[p.0 as usize] = i;
            pair_of[p.1 as usize] = i;
        }
        Ok(PointedMatchedCircle {
            genus,
            pairs: sorted,
            partner,
            pair_of,
        })
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    /// Number of marked points, `4g`.
    pub fn points(&self) -> usize {
        4 * self.genus
    }

    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    pub fn partner(&self, p: u8) -> u8 {
        self.partner[p as usize]
    }

    /// Index into [`pairs`](Self::pairs) of the pair containing `p`.
    pub fn pair_index(&self, p: u8) -> usize {
        self.pair_of[p as usize]
    }

    pub fn validate(&self) -> bool {
        surgery_components(self.points(), &self.partner) == 1
    }

    /// Runs both the surgery criterion and the arc-slide search.
    pub fn validation_report(&self) -> ValidationReport {
        let components = surgery_components(self.points(), &self.partner);
        let (handleslide_valid, orbit) = arc_slide_search(self.points(), &self.partner);
        ValidationReport {
            surgery_components: components,
            surgery_valid: components == 1,
            handleslide_valid,
            handleslide_orbit: orbit,
        }
    }

    /// Orientation reversal: point `i` goes to `4g + 1 - i`.
    pub fn reverse(&self) -> PointedMatchedCircle {
        let n = self.points() as u8;
        let pairs: Vec<(u8, u8)> = self
            .pairs
            .iter()
            .map(|p| (n + 1 - p.0, n + 1 - p.1))
            .collect();
        Self::from_matching(self.genus, &pairs).expect("reversal preserves the partition")
    }

    /// The split matching `(1 3)(2 4)(5 7)(6 8)...` of the given genus.
    pub fn split(genus: usize) -> PointedMatchedCircle {
        let pairs: Vec<(u8, u8)> = (0..genus as u8)
            .flat_map(|k| [(4 * k + 1, 4 * k + 3), (4 * k + 2, 4 * k + 4)])
            .collect();
        Self::new(genus, &pairs).expect("split matching is valid")
    }

    pub fn torus() -> PointedMatchedCircle {
        Self::split(1)
    }
}

impl fmt::Display for PointedMatchedCircle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GENUS {} PAIRS", self.genus)?;
        for p in &self.pairs {
            write!(f, " {p}")?;
        }
        Ok(())
    }
}

/// Counts boundary circles after attaching an orientable 1-handle at each pair.
///
/// Each point `p` splits into a side just before (`2p`) and just after
/// (`2p + 1`) it. Circle arcs join after-`p` to before-`p+1`; the handle on
/// `(a, b)` joins before-`a` to after-`b` and after-`a` to before-`b`.
pub(crate) fn surgery_components(n: usize, partner: &[u8]) -> usize {
    let before = |p: usize| 2 * (p - 1);
    let after = |p: usize| 2 * (p - 1) + 1;
    let mut arc = vec![0usize; 2 * n];
    let mut handle = vec![0usize; 2 * n];
    for p in 1..=n {
        let q = if p == n { 1 } else { p + 1 };
        arc[after(p)] = before(q);
        arc[before(q)] = after(p);
        let m = partner[p] as usize;
        handle[before(p)] = after(m);
        handle[after(p)] = before(m);
    }
    let mut seen = vec![false; 2 * n];
    let mut components = 0;
    for start in 0..2 * n {
        if seen[start] {
            continue;
        }
        components += 1;
        let mut node = start;
        loop {
            seen[node] = true;
            let across = arc[node];
            seen[across] = true;
            node = handle[across];
            if node == start {
                break;
            }
        }
    }
    components
}

fn canonical_matching(n: usize, partner: &[u8]) -> Vec<u8> {
    partner[1..=n].to_vec()
}

/// All single arc slides of a matching on the line `1..=n`.
///
/// A foot sitting next to a foot of a different pair slides over that
/// pair's handle and lands next to the partner foot, on the side dictated
/// by the orientable handle.
pub(crate) fn arc_slides(n: usize, partner: &[u8]) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    for p in 1..n {
        let q = p + 1;
        if partner[p] as usize == q {
            continue;
        }
        // Foot p (just before q) slides to just after partner(q).
        out.push(move_point(n, partner, p, partner[q] as usize, true));
        // Foot q (just after p) slides to just before partner(p).
        out.push(move_point(n, partner, q, partner[p] as usize, false));
    }
    out
}

/// Removes point `moving` and reinserts it adjacent to `anchor`.
fn move_point(n: usize, partner: &[u8], moving: usize, anchor: usize, after: bool) -> Vec<u8> {
    let mut order: Vec<usize> = (1..=n).filter(|&p| p != moving).collect();
    let pos = order.iter().position(|&p| p == anchor).expect("anchor present");
    order.insert(if after { pos + 1 } else { pos }, moving);
    // order[k] is the old label now at position k + 1.
    let mut new_pos = vec![0u8; n + 1];
    for (k, &old) in order.iter().enumerate() {
        new_pos[old] = (k + 1) as u8;
    }
    let mut next = vec![0u8; n + 1];
    for old in 1..=n {
        next[new_pos[old] as usize] = new_pos[partner[old] as usize];
    }
    next
}

fn has_adjacent_pair(n: usize, partner: &[u8]) -> bool {
    (1..n).any(|p| partner[p] as usize == p + 1)
}

/// Breadth-first search over the arc-slide orbit. Returns whether no
/// matching in the orbit has adjacent matched points, and the orbit size.
pub(crate) fn arc_slide_search(n: usize, partner: &[u8]) -> (bool, usize) {
    let mut seen: HashSet<Vec<u8>> = HashSet::new();
    let mut queue = VecDeque::new();
    let mut start = vec![0u8];
    start.extend(canonical_matching(n, partner));
    seen.insert(start.clone());
    queue.push_back(start);
    let mut valid = true;
    while let Some(m) = queue.pop_front() {
        if has_adjacent_pair(n, &m) {
            valid = false;
        }
        for next in arc_slides(n, &m) {
            if seen.insert(next.clone()) {
                queue.push_back(next);
            }
        }
    }
    (valid, seen.len())
}

/// Pairs as an ordered set, for callers that want set semantics.
pub fn pair_set(c: &PointedMatchedCircle) -> BTreeSet<Pair> {
    c.pairs.iter().copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn torus_is_valid() {
        let t = PointedMatchedCircle::new(1, &[(1, 3), (2, 4)]).unwrap();
        assert!(t.validate());
        let r = t.validation_report();
        assert!(r.surgery_valid && r.handleslide_valid && !r.diverges());
    }

    #[test]
    fn degenerate_matchings() {
        assert_eq!(
            PointedMatchedCircle::new(1, &[(1, 2), (3, 4)]),
            Err(PmcError::DegenerateMatching { components: 3 })
        );
        let c = PointedMatchedCircle::from_matching(1, &[(1, 4), (2, 3)]).unwrap();
        assert!(!c.validate());
        assert_eq!(c.validation_report().surgery_components, 3);
    }

    #[test]
    fn malformed_matchings() {
        for pairs in [
            vec![(1, 3)],
            vec![(1, 3), (3, 4)],
            vec![(1, 5), (2, 4)],
            vec![(1, 1), (2, 4)],
        ] {
            assert!(matches!(
                PointedMatchedCircle::new(1, &pairs),
                Err(PmcError::MalformedMatching(_))
            ));
        }
    }

    #[test]
    fn genus_two_split_is_valid() {
        let c = PointedMatchedCircle::new(2, &[(1, 3), (2, 4), (5, 7), (6, 8)]).unwrap();
        assert!(c.validate());
        assert!(!c.validation_report().diverges());
    }

    #[test]
    fn reverse_examples() {
        let t = PointedMatchedCircle::torus();
        assert_eq!(t.reverse(), t);
        let c = PointedMatchedCircle::split(2);
        let r = c.reverse();
        assert_eq!(
            r.pairs(),
            &[Pair(1, 3), Pair(2, 4), Pair(5, 7), Pair(6, 8)]
        );
        assert_eq!(r.reverse(), c);
        let c = PointedMatchedCircle::new(2, &[(1, 3), (2, 7), (4, 6), (5, 8)]).unwrap();
        let r = c.reverse();
        assert_eq!(r.pairs(), &[Pair(1, 4), Pair(2, 7), Pair(3, 5), Pair(6, 8)]);
        assert!(r.validate());
        assert_eq!(r.reverse(), c);
    }

    fn matching(genus: usize, order: &[usize]) -> Vec<(u8, u8)> {
        order
            .chunks(2)
            .map(|c| (c[0] as u8 + 1, c[1] as u8 + 1))
            .take(2 * genus)
            .collect()
    }

    proptest::proptest! {
        #[test]
        fn arc_slides_preserve_component_count(
            genus in 1usize..=3,
            order in Just((0..12).collect::<Vec<usize>>()).prop_shuffle(),
        ) {
            let order: Vec<usize> = order.into_iter().filter(|&p| p < 4 * genus).collect();
            let c = PointedMatchedCircle::from_matching(genus, &matching(genus, &order)).unwrap();
            let n = c.points();
            let before = surgery_components(n, &c.partner);
            for next in arc_slides(n, &c.partner) {
                prop_assert_eq!(surgery_components(n, &next), before);
            }
        }

        #[test]
        fn reversal_is_an_involution(
            genus in 1usize..=3,
            order in Just((0..12).collect::<Vec<usize>>()).prop_shuffle(),
        ) {
            let order: Vec<usize> = order.into_iter().filter(|&p| p < 4 * genus).collect();
            let c = PointedMatchedCircle::from_matching(genus, &matching(genus, &order)).unwrap();
            prop_assert_eq!(c.reverse().reverse(), c.clone());
            prop_assert_eq!(c.reverse().validate(), c.validate());
            if c.validate() {
                prop_assert_eq!(c.validation_report().surgery_components, 1);
            }
        }
    }
}
