use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::bimodule::identity_bimodule;
use crate::morphism::is_homotopic;
use crate::pmc::PointedMatchedCircle;
use crate::random::{random_clf, random_closed_endomorphism, TableShape};
use crate::strand::build_dga;

fn w(text: &str) -> Word {
    Word::parse(text).unwrap()
}

fn label(text: &str) -> CycleLabel {
    CycleLabel::parse(text).unwrap()
}

#[test]
fn words_reduce_and_invert() {
    assert_eq!(w("a a' b"), w("b"));
    assert_eq!(w("a b b' a'"), Word::empty());
    assert_eq!(w("a b").inverse(), w("b' a'"));
    assert_eq!(w("e").to_string(), "e");
    assert_eq!(w("T(z) T(z)'"), Word::empty());
    assert!(w("T(a@z)").equivalent(&w("a' T(z) a")));
    assert!(!w("T(a@z)").equivalent(&w("T(z)")));
    assert!(Word::parse("T").is_err());
    assert!(Word::parse("a )").is_err());
}

#[test]
fn parse_round_trip() {
    for text in [
        "ID(e)",
        "CRIT(fl=a, fr=b', vc=T(x)@z)",
        "H(ID(a b), CRIT(fl=e, fr=e, vc=a T(b@y)'@x))",
        "V(CRIT(fl=e, fr=e, vc=z), ID(T(z)))",
    ] {
        let e = ClfExpr::parse(text).unwrap();
        assert_eq!(e.to_string(), text);
        assert_eq!(ClfExpr::parse(&e.to_string()).unwrap(), e);
    }
    let chain = ClfExpr::parse("H(ID(a), ID(b), ID(c))").unwrap();
    assert_eq!(chain.to_string(), "H(H(ID(a), ID(b)), ID(c))");
    assert!(ClfExpr::parse("CRIT(fl=a)").is_err());
    assert!(ClfExpr::parse("H(ID(a))").is_err());
}

#[test]
fn boundary_words() {
    let c = make_clf(w("a"), w("b"), label("z"));
    assert_eq!(c.initial(), w("b a"));
    assert_eq!(c.resulting(), w("b T(z) a"));
    let h = compose_h(ClfExpr::id(w("u")), ClfExpr::id(w("v"))).unwrap();
    assert_eq!(h.initial(), w("v u"));
    assert_eq!(h.resulting(), w("v u"));
    let bottom = ClfExpr::crit(c);
    assert!(compose_v(bottom.clone(), ClfExpr::id(w("b T(z) a"))).is_ok());
    assert!(matches!(
        compose_v(bottom, ClfExpr::id(w("b a"))),
        Err(ClfError::BoundaryMismatch(..))
    ));
    let marked_l = ClfExpr::id(w("a")).with_sides(None, Some("Z1"));
    let marked_r = ClfExpr::id(w("a")).with_sides(Some("Z2"), None);
    assert!(matches!(compose_h(marked_l, marked_r), Err(ClfError::BoundaryMismatch(..))));
}

#[test]
fn factor_leaf_preserves_boundary() {
    let c = ClfExpr::crit(make_clf(w("a b"), w("b'"), label("a@x")));
    let f = factor_leaf(&c);
    assert_eq!(f.leaf_count(), 3);
    assert!(f.initial().equivalent(&c.initial()));
    assert!(f.resulting().equivalent(&c.resulting()));
}

#[test]
fn normalization_counts_vertical_nodes() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..200 {
        let e = random_clf(8, &mut rng);
        e.validate().unwrap();
        let (n, rewrites) = normalize_horizontal(&e);
        assert_eq!(rewrites, e.vcomp_count());
        assert_eq!(n.vcomp_count(), 0);
        n.validate().unwrap();
        assert!(n.initial().equivalent(&e.initial()));
        assert!(n.resulting().equivalent(&e.resulting()));
        assert_eq!(n.crit_count(), e.crit_count());
    }
}

#[test]
fn hurwitz_move() {
    let e = ClfExpr::parse("H(CRIT(fl=e, fr=e, vc=x), CRIT(fl=e, fr=e, vc=y))").unwrap();
    let moved = hurwitz(&e, 0).unwrap();
    assert_eq!(moved.to_string(), "H(CRIT(fl=e, fr=e, vc=T(x)@y), CRIT(fl=e, fr=e, vc=x))");
    assert!(moved.initial().equivalent(&e.initial()));
    assert!(moved.resulting().equivalent(&e.resulting()));
    let twice = hurwitz(&moved, 0).unwrap();
    assert_ne!(twice, e);
    assert!(twice.resulting().equivalent(&e.resulting()));
    let padded = ClfExpr::parse("H(ID(e), CRIT(fl=e, fr=e, vc=x), ID(a a'), CRIT(fl=e, fr=e, vc=y))").unwrap();
    assert_eq!(hurwitz(&padded, 0).unwrap(), moved);
    let impure = ClfExpr::parse("H(CRIT(fl=a, fr=e, vc=x), CRIT(fl=e, fr=e, vc=y))").unwrap();
    assert!(matches!(hurwitz(&impure, 0), Err(ClfError::NotInTwistForm(_))));
    assert!(matches!(hurwitz(&e, 1), Err(ClfError::OutOfRange(1))));

    let prefixed = ClfExpr::parse("H(CRIT(fl=e, fr=e, vc=b'@y), CRIT(fl=e, fr=e, vc=b b@y))").unwrap();
    let moved = hurwitz(&prefixed, 0).unwrap();
    assert_eq!(moved.to_string(), "H(CRIT(fl=e, fr=e, vc=b b T(b'@y)@y), CRIT(fl=e, fr=e, vc=b'@y))");
    assert!(moved.resulting().equivalent(&prefixed.resulting()));
}

#[test]
fn standard_form_conjugates() {
    let wg = AbstractClf::pure(label("z"));
    let e = ClfExpr::parse("H(CRIT(fl=a, fr=b, vc=c@z), CRIT(fl=e, fr=e, vc=z))").unwrap();
    let s = standard_form(&e, &wg).unwrap();
    assert_eq!(
        s.expr.to_string(),
        "H(H(H(H(ID(c a), CRIT(fl=e, fr=e, vc=z)), ID(b c')), CRIT(fl=e, fr=e, vc=z)), ID(e))"
    );
    assert_eq!(s.conjugators, vec![w("c a"), w("b c'"), w("e")]);
    assert!(s.expr.initial().equivalent(&e.initial()));
    assert!(s.expr.resulting().equivalent(&e.resulting()));
    let bad = ClfExpr::parse("CRIT(fl=e, fr=e, vc=y)").unwrap();
    assert!(matches!(standard_form(&bad, &wg), Err(ClfError::IncompatibleCycle { .. })));
}

#[test]
fn standard_form_of_random_trees() {
    let wg = AbstractClf::pure(label("b@z"));
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let mut seen = 0;
    for _ in 0..200 {
        let e = random_clf(8, &mut rng);
        let Ok(s) = standard_form(&e, &wg) else { continue };
        seen += 1;
        assert!(s.expr.initial().equivalent(&e.initial()));
        assert!(s.expr.resulting().equivalent(&e.resulting()));
        assert_eq!(s.conjugators.len(), e.crit_count() + 1);
    }
    assert!(seen > 10);
}

fn toy_assignment(rng: &mut ChaCha8Rng) -> Assignment {
    let a = Arc::new(build_dga(&PointedMatchedCircle::torus(), "A_T"));
    let i = Arc::new(identity_bimodule(&a));
    let mut asg = Assignment::new(i.clone());
    asg.default_letter = Some(i.clone());
    let shape = TableShape {
        max_arity: 0,
        terms: 3,
        chains_only: true,
    };
    asg.default_crit = Some(random_closed_endomorphism(&i, shape, rng));
    asg.crits.insert("x".into(), random_closed_endomorphism(&i, shape, rng));
    asg
}

#[test]
fn evaluation_survives_normalization() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let asg = toy_assignment(&mut rng);
    for _ in 0..6 {
        let e = random_clf(5, &mut rng);
        let f = evaluate(&e, &asg).unwrap();
        let (n, _) = normalize_horizontal(&e);
        let g = evaluate(&n, &asg).unwrap();
        assert!(f.is_closed() && g.is_closed());
        is_homotopic(&f, &g, 4).unwrap();
    }
}

#[test]
fn incomplete_assignment() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let mut asg = toy_assignment(&mut rng);
    asg.default_letter = None;
    let e = ClfExpr::parse("ID(a)").unwrap();
    assert!(matches!(evaluate(&e, &asg), Err(ClfError::AssignmentIncomplete(_))));
    asg.default_crit = None;
    let e = ClfExpr::parse("CRIT(fl=e, fr=e, vc=y)").unwrap();
    assert!(matches!(evaluate(&e, &asg), Err(ClfError::AssignmentIncomplete(_))));
}
