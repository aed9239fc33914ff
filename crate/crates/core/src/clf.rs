//! Symbolic calculus of cornered Lefschetz fibration decompositions.
//!
//! Words are formal mapping classes written in composition order: the word
//! `b a` is `b ∘ a`, so `a` acts first. A cycle label `w@s` names the curve
//! whose twist is `T(w@s) = w⁻¹ ∘ T(s) ∘ w`; two words are equal when their
//! twist expansions agree after free reduction.
//!
//! A horizontal chain `E_1 ∘_h E_2 ∘_h ... ∘_h E_k` has boundary words
//! `E_k ∘ ... ∘ E_1`. A critical leaf `Crit(f_l, f_r, ζ)` runs from
//! `f_r ∘ f_l` to `f_r ∘ T(ζ) ∘ f_l`.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::bimodule::Bimodule;
use crate::boxtensor::{box_bimodules, box_morphisms, BoxError};
use crate::canon::{canonicalize, transport};
use crate::morphism::{compose, identity_morphism, same_bimodule, Morphism, MorphismError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClfError {
    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("boundary mismatch: `{0}` vs `{1}`")]
    BoundaryMismatch(String, String),
    #[error("not in twist form: {0}")]
    NotInTwistForm(String),
    #[error("leaf `{leaf}` has a cycle incompatible with `{expected}`")]
    IncompatibleCycle { leaf: String, expected: String },
    #[error("assignment has no entry for {0}")]
    AssignmentIncomplete(String),
    #[error("position {0} is out of range")]
    OutOfRange(usize),
    #[error(transparent)]
    Box(#[from] BoxError),
    #[error(transparent)]
    Morphism(#[from] MorphismError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    Gen { name: String, inv: bool },
    Twist { label: Box<CycleLabel>, inv: bool },
}

impl Letter {
    pub fn gen(name: &str) -> Letter {
        Letter::Gen {
            name: name.to_string(),
            inv: false,
        }
    }

    pub fn twist(label: CycleLabel) -> Letter {
        Letter::Twist {
            label: Box::new(label),
            inv: false,
        }
    }

    pub fn inverse(&self) -> Letter {
        match self {
            Letter::Gen { name, inv } => Letter::Gen {
                name: name.clone(),
                inv: !inv,
            },
            Letter::Twist { label, inv } => Letter::Twist {
                label: label.clone(),
                inv: !inv,
            },
        }
    }

    fn is_inverse_of(&self, other: &Letter) -> bool {
        match (self, other) {
            (Letter::Gen { name: a, inv: x }, Letter::Gen { name: b, inv: y }) => a == b && x != y,
            (Letter::Twist { label: a, inv: x }, Letter::Twist { label: b, inv: y }) => a == b && x != y,
            _ => false,
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let inv = match self {
            Letter::Gen { name, inv } => {
                f.write_str(name)?;
                *inv
            }
            Letter::Twist { label, inv } => {
                write!(f, "T({label})")?;
                *inv
            }
        };
        if inv {
            f.write_str("'")?;
        }
        Ok(())
    }
}

/// A freely reduced word in composition order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Word {
        Word(Vec::new())
    }

    pub fn new(letters: impl IntoIterator<Item = Letter>) -> Word {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if out.last().is_some_and(|top| top.is_inverse_of(&l)) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// `self ∘ other`.
    pub fn then_after(&self, other: &Word) -> Word {
        Word::new(self.0.iter().chain(&other.0).cloned())
    }

    pub fn inverse(&self) -> Word {
        Word::new(self.0.iter().rev().map(Letter::inverse))
    }

    /// Twist-free expansion: every `T(w@s)^±` becomes `w⁻¹ T(s)^± w`.
    pub fn expanded(&self) -> Word {
        let mut letters = Vec::new();
        for l in &self.0 {
            match l {
                Letter::Gen { .. } => letters.push(l.clone()),
                Letter::Twist { label, inv } => {
                    let w = label.prefix.expanded();
                    letters.extend(w.inverse().0);
                    letters.push(Letter::Twist {
                        label: Box::new(CycleLabel::bare(&label.base)),
                        inv: *inv,
                    });
                    letters.extend(w.0);
                }
            }
        }
        Word::new(letters)
    }

    pub fn equivalent(&self, other: &Word) -> bool {
        self.expanded() == other.expanded()
    }

    pub fn parse(text: &str) -> Result<Word, ClfError> {
        let mut p = Parser::new(text);
        let w = p.word()?;
        p.end()?;
        Ok(w)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("e");
        }
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// The curve `prefix⁻¹(base)`, recorded formally.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CycleLabel {
    pub prefix: Word,
    pub base: String,
}

impl CycleLabel {
    pub fn new(prefix: Word, base: &str) -> CycleLabel {
        CycleLabel {
            prefix,
            base: base.to_string(),
        }
    }

    pub fn bare(base: &str) -> CycleLabel {
        CycleLabel::new(Word::empty(), base)
    }

    pub fn twist(&self) -> Word {
        Word::new([Letter::twist(self.clone())])
    }

    pub fn parse(text: &str) -> Result<CycleLabel, ClfError> {
        let mut p = Parser::new(text);
        let l = p.label()?;
        p.end()?;
        Ok(l)
    }
}

impl fmt::Display for CycleLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.prefix.is_empty() {
            f.write_str(&self.base)
        } else {
            write!(f, "{}@{}", self.prefix, self.base)
        }
    }
}

/// Data `{f_l, f_r, ζ}` of a single-critical-point fibration.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AbstractClf {
    pub f_l: Word,
    pub f_r: Word,
    pub cycle: CycleLabel,
}

impl AbstractClf {
    pub fn new(f_l: Word, f_r: Word, cycle: CycleLabel) -> AbstractClf {
        AbstractClf { f_l, f_r, cycle }
    }

    pub fn pure(cycle: CycleLabel) -> AbstractClf {
        AbstractClf::new(Word::empty(), Word::empty(), cycle)
    }

    /// `f_r ∘ f_l`.
    pub fn initial(&self) -> Word {
        self.f_r.then_after(&self.f_l)
    }

    /// `f_r ∘ T(ζ) ∘ f_l`.
    pub fn resulting(&self) -> Word {
        self.f_r.then_after(&self.cycle.twist()).then_after(&self.f_l)
    }

    pub fn is_pure_twist(&self) -> bool {
        self.f_l.expanded().is_empty() && self.f_r.expanded().is_empty()
    }
}

impl fmt::Display for AbstractClf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CRIT(fl={}, fr={}, vc={})", self.f_l, self.f_r, self.cycle)
    }
}

/// Optional boundary markers (formal circle labels) on a leaf.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Sides {
    pub left: Option<String>,
    pub right: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ClfExpr {
    Identity { word: Word, sides: Sides },
    Crit { clf: AbstractClf, sides: Sides },
    /// `left ∘_h right`.
    H(Box<ClfExpr>, Box<ClfExpr>),
    /// `bottom ∘_v top`.
    V(Box<ClfExpr>, Box<ClfExpr>),
}

impl ClfExpr {
    pub fn id(word: Word) -> ClfExpr {
        ClfExpr::Identity {
            word,
            sides: Sides::default(),
        }
    }

    pub fn crit(clf: AbstractClf) -> ClfExpr {
        ClfExpr::Crit {
            clf,
            sides: Sides::default(),
        }
    }

    pub fn with_sides(self, left: Option<&str>, right: Option<&str>) -> ClfExpr {
        let sides = Sides {
            left: left.map(str::to_string),
            right: right.map(str::to_string),
        };
        match self {
            ClfExpr::Identity { word, .. } => ClfExpr::Identity { word, sides },
            ClfExpr::Crit { clf, .. } => ClfExpr::Crit { clf, sides },
            other => other,
        }
    }

    pub fn initial(&self) -> Word {
        match self {
            ClfExpr::Identity { word, .. } => word.clone(),
            ClfExpr::Crit { clf, .. } => clf.initial(),
            ClfExpr::H(a, b) => b.initial().then_after(&a.initial()),
            ClfExpr::V(bottom, _) => bottom.initial(),
        }
    }

    pub fn resulting(&self) -> Word {
        match self {
            ClfExpr::Identity { word, .. } => word.clone(),
            ClfExpr::Crit { clf, .. } => clf.resulting(),
            ClfExpr::H(a, b) => b.resulting().then_after(&a.resulting()),
            ClfExpr::V(_, top) => top.resulting(),
        }
    }

    fn left_side(&self) -> Option<&str> {
        match self {
            ClfExpr::Identity { sides, .. } | ClfExpr::Crit { sides, .. } => sides.left.as_deref(),
            ClfExpr::H(a, _) => a.left_side(),
            ClfExpr::V(a, b) => a.left_side().or(b.left_side()),
        }
    }

    fn right_side(&self) -> Option<&str> {
        match self {
            ClfExpr::Identity { sides, .. } | ClfExpr::Crit { sides, .. } => sides.right.as_deref(),
            ClfExpr::H(_, b) => b.right_side(),
            ClfExpr::V(a, b) => a.right_side().or(b.right_side()),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            ClfExpr::Identity { .. } | ClfExpr::Crit { .. } => 1,
            ClfExpr::H(a, b) | ClfExpr::V(a, b) => a.leaf_count() + b.leaf_count(),
        }
    }

    pub fn crit_count(&self) -> usize {
        match self {
            ClfExpr::Identity { .. } => 0,
            ClfExpr::Crit { .. } => 1,
            ClfExpr::H(a, b) | ClfExpr::V(a, b) => a.crit_count() + b.crit_count(),
        }
    }

    pub fn vcomp_count(&self) -> usize {
        match self {
            ClfExpr::Identity { .. } | ClfExpr::Crit { .. } => 0,
            ClfExpr::H(a, b) => a.vcomp_count() + b.vcomp_count(),
            ClfExpr::V(a, b) => 1 + a.vcomp_count() + b.vcomp_count(),
        }
    }

    /// Checks every composition node.
    pub fn validate(&self) -> Result<(), ClfError> {
        match self {
            ClfExpr::Identity { .. } | ClfExpr::Crit { .. } => Ok(()),
            ClfExpr::H(a, b) => {
                a.validate()?;
                b.validate()?;
                check_sides(a, b)
            }
            ClfExpr::V(a, b) => {
                a.validate()?;
                b.validate()?;
                check_vertical(a, b)
            }
        }
    }

    pub fn parse(text: &str) -> Result<ClfExpr, ClfError> {
        let mut p = Parser::new(text);
        let e = p.expr()?;
        p.end()?;
        Ok(e)
    }

    /// Leaves of a VComp-free expression, left to right.
    pub fn chain(&self) -> Option<Vec<ClfExpr>> {
        match self {
            ClfExpr::Identity { .. } | ClfExpr::Crit { .. } => Some(vec![self.clone()]),
            ClfExpr::H(a, b) => {
                let mut l = a.chain()?;
                l.extend(b.chain()?);
                Some(l)
            }
            ClfExpr::V(..) => None,
        }
    }

    /// Left-nested horizontal composite of a nonempty chain.
    pub fn from_chain(chain: Vec<ClfExpr>) -> ClfExpr {
        let mut it = chain.into_iter();
        let first = it.next().expect("nonempty chain");
        it.fold(first, |acc, e| ClfExpr::H(Box::new(acc), Box::new(e)))
    }
}

impl fmt::Display for ClfExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClfExpr::Identity { word, .. } => write!(f, "ID({word})"),
            ClfExpr::Crit { clf, .. } => write!(f, "{clf}"),
            ClfExpr::H(a, b) => write!(f, "H({a}, {b})"),
            ClfExpr::V(a, b) => write!(f, "V({a}, {b})"),
        }
    }
}

fn check_sides(a: &ClfExpr, b: &ClfExpr) -> Result<(), ClfError> {
    match (a.right_side(), b.left_side()) {
        (Some(r), Some(l)) if r != l => Err(ClfError::BoundaryMismatch(r.to_string(), l.to_string())),
        _ => Ok(()),
    }
}

fn check_vertical(bottom: &ClfExpr, top: &ClfExpr) -> Result<(), ClfError> {
    let (r, i) = (bottom.resulting(), top.initial());
    if r.equivalent(&i) {
        Ok(())
    } else {
        Err(ClfError::BoundaryMismatch(r.to_string(), i.to_string()))
    }
}

pub fn make_clf(f_l: Word, f_r: Word, cycle: CycleLabel) -> AbstractClf {
    AbstractClf::new(f_l, f_r, cycle)
}

pub fn compose_h(left: ClfExpr, right: ClfExpr) -> Result<ClfExpr, ClfError> {
    check_sides(&left, &right)?;
    Ok(ClfExpr::H(Box::new(left), Box::new(right)))
}

pub fn compose_v(bottom: ClfExpr, top: ClfExpr) -> Result<ClfExpr, ClfError> {
    check_vertical(&bottom, &top)?;
    Ok(ClfExpr::V(Box::new(bottom), Box::new(top)))
}

/// `Crit(f_l, f_r, ζ) ↦ ID(f_l) ∘_h Crit(e, e, ζ) ∘_h ID(f_r)`; other
/// expressions are returned unchanged.
pub fn factor_leaf(w: &ClfExpr) -> ClfExpr {
    match w {
        ClfExpr::Crit { clf, sides } => ClfExpr::from_chain(vec![
            ClfExpr::Identity {
                word: clf.f_l.clone(),
                sides: Sides {
                    left: sides.left.clone(),
                    right: None,
                },
            },
            ClfExpr::crit(AbstractClf::pure(clf.cycle.clone())),
            ClfExpr::Identity {
                word: clf.f_r.clone(),
                sides: Sides {
                    left: None,
                    right: sides.right.clone(),
                },
            },
        ]),
        other => other.clone(),
    }
}

/// Removes identity leaves whose words are trivial, keeping at least one leaf.
pub fn prune(chain: Vec<ClfExpr>) -> Vec<ClfExpr> {
    let fallback = chain.first().cloned();
    let kept: Vec<ClfExpr> = chain
        .into_iter()
        .filter(|e| !matches!(e, ClfExpr::Identity { word, .. } if word.expanded().is_empty()))
        .collect();
    if kept.is_empty() {
        fallback.into_iter().collect()
    } else {
        kept
    }
}

/// Merges adjacent identity leaves: `I(u) ∘_h I(v) = I(v ∘ u)`.
pub fn merge_identities(chain: Vec<ClfExpr>) -> Vec<ClfExpr> {
    let mut out: Vec<ClfExpr> = Vec::new();
    for e in chain {
        if let (Some(ClfExpr::Identity { word: u, sides: su }), ClfExpr::Identity { word: v, sides: sv }) =
            (out.last(), &e)
        {
            let merged = ClfExpr::Identity {
                word: v.then_after(u),
                sides: Sides {
                    left: su.left.clone(),
                    right: sv.right.clone(),
                },
            };
            out.pop();
            out.push(merged);
        } else {
            out.push(e);
        }
    }
    out
}

/// Replaces every `V(W_1, W_2)` by `W_1 ∘_h ID(f'⁻¹) ∘_h W_2`, where `f'`
/// is the shared middle word. Returns the rewritten expression and the
/// number of rewrites.
pub fn normalize_horizontal(expr: &ClfExpr) -> (ClfExpr, usize) {
    match expr {
        ClfExpr::Identity { .. } | ClfExpr::Crit { .. } => (expr.clone(), 0),
        ClfExpr::H(a, b) => {
            let (na, ca) = normalize_horizontal(a);
            let (nb, cb) = normalize_horizontal(b);
            (ClfExpr::H(Box::new(na), Box::new(nb)), ca + cb)
        }
        ClfExpr::V(a, b) => {
            let (na, ca) = normalize_horizontal(a);
            let (nb, cb) = normalize_horizontal(b);
            let middle = ClfExpr::id(na.resulting().inverse());
            let rewritten = ClfExpr::H(Box::new(ClfExpr::H(Box::new(na), Box::new(middle))), Box::new(nb));
            (rewritten, ca + cb + 1)
        }
    }
}

/// Hurwitz move at crit positions `i, i + 1` of the pruned chain:
/// `Crit(e,e,ζ) ∘_h Crit(e,e,ζ')` becomes `Crit(e,e,T(ζ) ζ') ∘_h Crit(e,e,ζ)`,
/// where the prefix of `T(ζ) ζ'` is `prefix(ζ') ∘ T(ζ)`: the twist acts
/// first, so `T(T(ζ) ζ') = T(ζ)⁻¹ T(ζ') T(ζ)`.
pub fn hurwitz(expr: &ClfExpr, i: usize) -> Result<ClfExpr, ClfError> {
    let chain = expr
        .chain()
        .ok_or_else(|| ClfError::NotInTwistForm("expression has vertical compositions".into()))?;
    let mut chain = prune(chain);
    if i + 1 >= chain.len() {
        return Err(ClfError::OutOfRange(i));
    }
    let pure = |e: &ClfExpr| match e {
        ClfExpr::Crit { clf, .. } if clf.is_pure_twist() => Some(clf.cycle.clone()),
        _ => None,
    };
    let (Some(zeta), Some(zeta2)) = (pure(&chain[i]), pure(&chain[i + 1])) else {
        return Err(ClfError::NotInTwistForm(format!(
            "positions {i} and {} are not adjacent pure twists",
            i + 1
        )));
    };
    let moved = CycleLabel::new(zeta2.prefix.then_after(&zeta.twist()), &zeta2.base);
    chain[i] = ClfExpr::crit(AbstractClf::pure(moved));
    chain[i + 1] = ClfExpr::crit(AbstractClf::pure(zeta));
    Ok(ClfExpr::from_chain(chain))
}

/// A standard form and the identity words between copies of `W_g`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StandardForm {
    pub expr: ClfExpr,
    pub conjugators: Vec<Word>,
}

/// Rewrites into `I(u_0) ∘_h W_g ∘_h I(u_1) ∘_h ... ∘_h W_g ∘_h I(u_k)`.
pub fn standard_form(expr: &ClfExpr, wg: &AbstractClf) -> Result<StandardForm, ClfError> {
    if !wg.is_pure_twist() {
        return Err(ClfError::NotInTwistForm(format!("{wg} is not a pure twist")));
    }
    let (normal, _) = normalize_horizontal(expr);
    let chain = normal.chain().expect("normalized expressions are horizontal");
    let v = wg.cycle.prefix.clone();
    let mut out = Vec::new();
    for leaf in chain {
        for piece in factor_leaf(&leaf).chain().expect("factored leaves are horizontal") {
            match piece {
                ClfExpr::Crit { clf, .. } => {
                    if clf.cycle.base != wg.cycle.base {
                        return Err(ClfError::IncompatibleCycle {
                            leaf: clf.to_string(),
                            expected: wg.to_string(),
                        });
                    }
                    let u = v.inverse().then_after(&clf.cycle.prefix);
                    out.push(ClfExpr::id(u.clone()));
                    out.push(ClfExpr::crit(wg.clone()));
                    out.push(ClfExpr::id(u.inverse()));
                }
                other => out.push(other),
            }
        }
    }
    let mut merged = merge_identities(out);
    if !matches!(merged.first(), Some(ClfExpr::Identity { .. })) {
        merged.insert(0, ClfExpr::id(Word::empty()));
    }
    if !matches!(merged.last(), Some(ClfExpr::Identity { .. })) {
        merged.push(ClfExpr::id(Word::empty()));
    }
    let conjugators = merged
        .iter()
        .filter_map(|e| match e {
            ClfExpr::Identity { word, .. } => Some(word.clone()),
            _ => None,
        })
        .collect();
    Ok(StandardForm {
        expr: ClfExpr::from_chain(merged),
        conjugators,
    })
}

/// Bimodules for letters and morphisms for critical leaves.
#[derive(Debug, Clone)]
pub struct Assignment {
    pub unit: Arc<Bimodule>,
    /// Keyed by the letter's display form, e.g. `a`, `a'`, `T(z)`.
    pub letters: HashMap<String, Arc<Bimodule>>,
    pub default_letter: Option<Arc<Bimodule>>,
    /// Keyed by the leaf's display form or by its cycle label.
    pub crits: HashMap<String, Morphism>,
    pub default_crit: Option<Morphism>,
}

impl Assignment {
    pub fn new(unit: Arc<Bimodule>) -> Assignment {
        Assignment {
            unit,
            letters: HashMap::new(),
            default_letter: None,
            crits: HashMap::new(),
            default_crit: None,
        }
    }

    fn letter(&self, l: &Letter) -> Result<Arc<Bimodule>, ClfError> {
        let key = l.to_string();
        self.letters
            .get(&key)
            .or(self.default_letter.as_ref())
            .cloned()
            .ok_or(ClfError::AssignmentIncomplete(format!("letter `{key}`")))
    }

    fn crit(&self, clf: &AbstractClf) -> Result<&Morphism, ClfError> {
        self.crits
            .get(&clf.to_string())
            .or_else(|| self.crits.get(&clf.cycle.to_string()))
            .or(self.default_crit.as_ref())
            .ok_or_else(|| ClfError::AssignmentIncomplete(format!("leaf `{clf}`")))
    }

    /// `B(l_n) ⊠ ... ⊠ B(l_1)` for the word `l_1 ... l_n`, in canonical form.
    pub fn word_bimodule(&self, w: &Word) -> Result<Arc<Bimodule>, ClfError> {
        let mut acc: Option<Arc<Bimodule>> = None;
        for l in w.letters().iter().rev() {
            let b = self.letter(l)?;
            acc = Some(match acc {
                None => b,
                Some(prev) => Arc::new(box_bimodules(&prev, &b)?),
            });
        }
        let m = acc.unwrap_or_else(|| self.unit.clone());
        Ok(canonicalize(&m)?.bimodule)
    }
}

fn canonical_morphism(f: &Morphism) -> Result<Morphism, ClfError> {
    let s = canonicalize(f.source())?;
    let t = canonicalize(f.target())?;
    Ok(transport(f, &s, &t)?)
}

fn require_boundary(actual: &Arc<Bimodule>, expected: &Arc<Bimodule>, word: &Word) -> Result<(), ClfError> {
    if same_bimodule(actual, expected) {
        Ok(())
    } else {
        Err(ClfError::BoundaryMismatch(actual.name().to_string(), format!("{} for {word}", expected.name())))
    }
}

/// Evaluates `∘_h` to box products of morphisms, `∘_v` to composition and
/// identity leaves to identity morphisms. All bimodules are kept in
/// canonical form.
pub fn evaluate(expr: &ClfExpr, assignment: &Assignment) -> Result<Morphism, ClfError> {
    match expr {
        ClfExpr::Identity { word, .. } => Ok(identity_morphism(&assignment.word_bimodule(word)?)),
        ClfExpr::Crit { clf, .. } => {
            let f = canonical_morphism(assignment.crit(clf)?)?;
            require_boundary(f.source(), &assignment.word_bimodule(&clf.initial())?, &clf.initial())?;
            require_boundary(f.target(), &assignment.word_bimodule(&clf.resulting())?, &clf.resulting())?;
            Ok(f)
        }
        ClfExpr::H(a, b) => {
            let fa = evaluate(a, assignment)?;
            let fb = evaluate(b, assignment)?;
            canonical_morphism(&box_morphisms(&fa, &fb)?)
        }
        ClfExpr::V(a, b) => {
            let fa = evaluate(a, assignment)?;
            let fb = evaluate(b, assignment)?;
            if !same_bimodule(fa.target(), fb.source()) {
                return Err(ClfError::BoundaryMismatch(
                    fa.target().name().to_string(),
                    fb.source().name().to_string(),
                ));
            }
            Ok(compose(&fb, &fa)?)
        }
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser { s: text.as_bytes(), pos: 0 }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ClfError> {
        Err(ClfError::Syntax {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<(), ClfError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected `{}`", c as char))
        }
    }

    fn end(&mut self) -> Result<(), ClfError> {
        match self.peek() {
            None => Ok(()),
            Some(_) => self.err("unexpected trailing input"),
        }
    }

    fn ident(&mut self) -> Result<String, ClfError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_') {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected a name");
        }
        Ok(String::from_utf8_lossy(&self.s[start..self.pos]).into_owned())
    }

    fn twist_follows(&self) -> bool {
        self.s.get(self.pos) == Some(&b'T') && self.s.get(self.pos + 1) == Some(&b'(')
    }

    fn word(&mut self) -> Result<Word, ClfError> {
        let mut letters = Vec::new();
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_alphanumeric() || c == b'_' => {
                    let letter = if self.twist_follows() {
                        self.pos += 2;
                        let label = self.label()?;
                        self.expect(b')')?;
                        Letter::twist(label)
                    } else {
                        let name = self.ident()?;
                        if name == "e" {
                            continue;
                        }
                        if name == "T" {
                            return self.err("`T` is reserved for twists");
                        }
                        Letter::gen(&name)
                    };
                    if self.s.get(self.pos) == Some(&b'\'') {
                        self.pos += 1;
                        letters.push(letter.inverse());
                    } else {
                        letters.push(letter);
                    }
                }
                _ => break,
            }
        }
        Ok(Word::new(letters))
    }

    fn label(&mut self) -> Result<CycleLabel, ClfError> {
        let w = self.word()?;
        if self.peek() == Some(b'@') {
            self.pos += 1;
            let base = self.ident()?;
            return Ok(CycleLabel::new(w, &base));
        }
        match w.letters() {
            [Letter::Gen { name, inv: false }] => Ok(CycleLabel::bare(name)),
            _ => self.err("expected a cycle label `word@symbol` or `symbol`"),
        }
    }

    fn expr(&mut self) -> Result<ClfExpr, ClfError> {
        let head = self.ident()?;
        self.expect(b'(')?;
        let e = match head.as_str() {
            "ID" => ClfExpr::id(self.word()?),
            "CRIT" => {
                let (mut fl, mut fr, mut vc) = (Word::empty(), Word::empty(), None);
                loop {
                    let key = self.ident()?;
                    self.expect(b'=')?;
                    match key.as_str() {
                        "fl" => fl = self.word()?,
                        "fr" => fr = self.word()?,
                        "vc" => vc = Some(self.label()?),
                        _ => return self.err(format!("unknown CRIT field `{key}`")),
                    }
                    if self.peek() == Some(b',') {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                let Some(vc) = vc else {
                    return self.err("CRIT needs vc=");
                };
                ClfExpr::crit(AbstractClf::new(fl, fr, vc))
            }
            "H" | "V" => {
                let mut parts = vec![self.expr()?];
                while self.peek() == Some(b',') {
                    self.pos += 1;
                    parts.push(self.expr()?);
                }
                if parts.len() < 2 {
                    return self.err(format!("{head} needs at least two operands"));
                }
                let mut it = parts.into_iter();
                let first = it.next().expect("two operands");
                it.fold(first, |acc, e| {
                    if head == "H" {
                        ClfExpr::H(Box::new(acc), Box::new(e))
                    } else {
                        ClfExpr::V(Box::new(acc), Box::new(e))
                    }
                })
            }
            _ => return self.err(format!("unknown constructor `{head}`")),
        };
        self.expect(b')')?;
        Ok(e)
    }
}

#[cfg(test)]
mod tests;
