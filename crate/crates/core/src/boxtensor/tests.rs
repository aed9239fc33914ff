use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::algebra::DgAlgebra;
use crate::bimodule::identity_bimodule;
use crate::canon::{canonicalize, flatten, relabel_table};
use crate::morphism::{identity_morphism, is_homotopic, mapping_cone};
use crate::pmc::PointedMatchedCircle;
use crate::random::{random_closed_endomorphism, random_morphism, TableShape};
use crate::strand::build_dga;

fn algebra() -> Arc<DgAlgebra> {
    Arc::new(build_dga(&PointedMatchedCircle::torus(), "A_T"))
}

fn identity(a: &Arc<DgAlgebra>) -> Arc<Bimodule> {
    Arc::new(identity_bimodule(a))
}

fn cone(a: &Arc<DgAlgebra>) -> Arc<Bimodule> {
    let i = identity(a);
    Arc::new(mapping_cone(&identity_morphism(&i), "C").unwrap())
}

fn shape(max_arity: usize, terms: usize) -> TableShape {
    TableShape {
        max_arity,
        terms,
        chains_only: true,
    }
}

/// Generator map of `N ⊠ M` onto `M` (when `N` is an identity) or onto `N`.
fn unit_map(product: &Bimodule, keep_right: bool) -> Vec<usize> {
    let Origin::Box { pairs, .. } = product.origin() else {
        panic!("not a product")
    };
    pairs.iter().map(|&(x, y)| if keep_right { y } else { x }).collect()
}

#[test]
fn identity_squared_is_identity() {
    let a = algebra();
    let i = identity(&a);
    let ii = box_bimodules(&i, &i).unwrap();
    assert_eq!(ii.generators().len(), 4);
    let i0 = ii.lookup("h(1 3)~h(1 3)").unwrap();
    let i1 = ii.lookup("h(2 4)~h(2 4)").unwrap();
    let r1 = a.lookup("r[1-2]").unwrap();
    assert_eq!(
        ii.d1(i0, &[r1]).unwrap(),
        &BTreeSet::from([Out { alg: r1, gen: i1 }])
    );
    let map = unit_map(&ii, true);
    assert_eq!(relabel_table(ii.table(), &map), *i.table());
    assert_eq!(ii.homology().unwrap(), i.homology().unwrap());
    let canon = canonicalize(&Arc::new(ii)).unwrap();
    assert_eq!(*canon.bimodule, *i);
}

#[test]
fn unit_laws_for_shipped_bimodules() {
    let a = algebra();
    let i = identity(&a);
    for m in [i.clone(), cone(&a)] {
        assert!(m.check_structure().passed());
        let left = box_bimodules(&i, &m).unwrap();
        assert_eq!(left.generators().len(), m.generators().len());
        assert_eq!(relabel_table(left.table(), &unit_map(&left, true)), *m.table());
        let right = box_bimodules(&m, &i).unwrap();
        assert_eq!(right.generators().len(), m.generators().len());
        assert_eq!(relabel_table(right.table(), &unit_map(&right, false)), *m.table());
        assert!(left.check_structure().passed());
        assert!(right.check_structure().passed());
    }
}

#[test]
fn cone_products_are_valid() {
    let a = algebra();
    let c = cone(&a);
    let cc = box_bimodules(&c, &c).unwrap();
    assert!(cc.check_structure().passed());
    assert_eq!(cc.generators().len(), 16);
    assert_eq!(cc.homology().unwrap(), 0);
}

#[test]
fn zero_table_factor() {
    let a = algebra();
    let c = cone(&a);
    let i = identity(&a);
    let zero = Arc::new(Bimodule::new("Z", a.clone(), a.clone(), i.generators().to_vec(), Table::new()).unwrap());
    let p = box_bimodules(&c, &zero).unwrap();
    for (k, _) in p.table().iter() {
        assert!(k.seq.is_empty());
    }
    assert_eq!(p.table().term_count(), c.table().iter().filter(|(k, _)| k.seq.is_empty()).map(|(_, s)| s.len()).sum::<usize>());
}

#[test]
fn strict_associativity() {
    let a = algebra();
    let i = identity(&a);
    let c = cone(&a);
    for (n, m, p) in [(c.clone(), i.clone(), c.clone()), (c.clone(), c.clone(), c.clone()), (i.clone(), c.clone(), i.clone())] {
        let left = Arc::new(box_bimodules(&Arc::new(box_bimodules(&n, &m).unwrap()), &p).unwrap());
        let right = Arc::new(box_bimodules(&n, &Arc::new(box_bimodules(&m, &p).unwrap())).unwrap());
        let fl = flatten_with_identities(&left);
        let fr = flatten_with_identities(&right);
        let index: std::collections::HashMap<_, _> = fr.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        let map: Vec<usize> = fl.iter().map(|t| index[t]).collect();
        assert_eq!(relabel_table(left.table(), &map), *right.table());
    }
}

/// Generator triples, treating identity factors as atoms.
fn flatten_with_identities(m: &Arc<Bimodule>) -> Vec<Vec<usize>> {
    match m.origin() {
        Origin::Box { left, right, pairs } => {
            let l = flatten_with_identities(left);
            let r = flatten_with_identities(right);
            pairs.iter().map(|&(x, y)| [l[x].clone(), r[y].clone()].concat()).collect()
        }
        _ => (0..m.generators().len()).map(|g| vec![g]).collect(),
    }
}

#[test]
fn canonical_form_drops_units() {
    let a = algebra();
    let i = identity(&a);
    let c = cone(&a);
    let nested = Arc::new(box_bimodules(&Arc::new(box_bimodules(&i, &c).unwrap()), &i).unwrap());
    assert_eq!(flatten(&nested).factors.len(), 1);
    let canon = canonicalize(&nested).unwrap();
    assert_eq!(*canon.bimodule, *c);
}

#[test]
fn identity_morphisms_box_to_identity() {
    let a = algebra();
    let i = identity(&a);
    let c = cone(&a);
    for (n, m) in [(i.clone(), c.clone()), (c.clone(), i.clone()), (c.clone(), c.clone())] {
        let prod = Arc::new(box_bimodules(&n, &m).unwrap());
        let id = identity_morphism(&prod);
        assert_eq!(box_morphism_left(&identity_morphism(&n), &m).unwrap(), id);
        assert_eq!(box_morphism_right(&n, &identity_morphism(&m)).unwrap(), id);
        assert_eq!(box_morphisms(&identity_morphism(&n), &identity_morphism(&m)).unwrap(), id);
    }
}

#[test]
fn boxing_commutes_with_the_differential() {
    let a = algebra();
    let i = identity(&a);
    let c = cone(&a);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..6 {
        for (n, m) in [(i.clone(), c.clone()), (c.clone(), i.clone()), (c.clone(), c.clone())] {
            let f = random_morphism(&n, &n, shape(2, 5), &mut rng);
            let left = box_morphism_left(&f, &m).unwrap();
            assert_eq!(left.differential().table(), box_morphism_left(&f.differential(), &m).unwrap().table());
            let g = random_morphism(&m, &m, shape(2, 5), &mut rng);
            let right = box_morphism_right(&n, &g).unwrap();
            assert_eq!(right.differential().table(), box_morphism_right(&n, &g.differential()).unwrap().table());
        }
    }
}

#[test]
fn identity_box_reproduces_morphism() {
    let a = algebra();
    let i = identity(&a);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let g = random_closed_endomorphism(&i, shape(1, 4), &mut rng);
    let right = box_morphism_right(&i, &g).unwrap();
    let map = unit_map(right.source(), true);
    assert_eq!(relabel_table(right.table(), &map), *g.table());
    let left = box_morphism_left(&g, &i).unwrap();
    let map = unit_map(left.source(), false);
    assert_eq!(relabel_table(left.table(), &map), *g.table());
    assert!(right.is_closed() && left.is_closed());
}

#[test]
fn interchange_up_to_homotopy() {
    let a = algebra();
    let i = identity(&a);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..3 {
        let f = random_closed_endomorphism(&i, shape(0, 3), &mut rng);
        let f2 = random_closed_endomorphism(&i, shape(0, 3), &mut rng);
        let g = random_closed_endomorphism(&i, shape(0, 3), &mut rng);
        let g2 = random_closed_endomorphism(&i, shape(0, 3), &mut rng);
        let lhs = box_morphisms(&compose(&f2, &f).unwrap(), &compose(&g2, &g).unwrap()).unwrap();
        let rhs = compose(&box_morphisms(&f2, &g2).unwrap(), &box_morphisms(&f, &g).unwrap()).unwrap();
        assert!(lhs.is_closed() && rhs.is_closed());
        let w = is_homotopic(&lhs, &rhs, 4).unwrap();
        assert_eq!(w.h.differential().table(), &lhs.table().sum(rhs.table()));
    }
}

#[test]
fn middle_mismatch() {
    let a = algebra();
    let b = Arc::new(build_dga(&PointedMatchedCircle::split(2), "A_2"));
    let err = box_bimodules(&identity(&a), &identity(&b)).unwrap_err();
    assert!(matches!(err, BoxError::MiddleAlgebraMismatch(_)));
}

#[test]
fn budget_exhaustion_is_reported() {
    let a = algebra();
    let c = cone(&a);
    let err = box_bimodules_with_budget(&c, &c, 0).unwrap_err();
    assert_eq!(err, BoxError::NonConverging { budget: 0 });
}
