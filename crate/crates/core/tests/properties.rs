use std::sync::{Arc, OnceLock};

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use bfcalc::algebra::DgAlgebra;
use bfcalc::bimodule::{identity_bimodule, Bimodule};
use bfcalc::boxtensor::box_bimodules;
use bfcalc::clf::{factor_leaf, hurwitz, merge_identities, normalize_horizontal, ClfExpr};
use bfcalc::f2::{F2Matrix, F2Vector};
use bfcalc::morphism::{compose, mapping_cone};
use bfcalc::pmc::PointedMatchedCircle;
use bfcalc::random::{random_clf, random_closed_endomorphism, random_morphism, TableShape};
use bfcalc::strand::build_dga;

fn torus() -> &'static Arc<DgAlgebra> {
    static A: OnceLock<Arc<DgAlgebra>> = OnceLock::new();
    A.get_or_init(|| Arc::new(build_dga(&PointedMatchedCircle::torus(), "A_T")))
}

fn genus_two() -> &'static Arc<DgAlgebra> {
    static A: OnceLock<Arc<DgAlgebra>> = OnceLock::new();
    A.get_or_init(|| Arc::new(build_dga(&PointedMatchedCircle::split(2), "A_2")))
}

fn identity() -> Arc<Bimodule> {
    Arc::new(identity_bimodule(torus()))
}

fn shape(max_arity: usize, terms: usize, chains_only: bool) -> TableShape {
    TableShape {
        max_arity,
        terms,
        chains_only,
    }
}

fn matrix() -> impl Strategy<Value = F2Matrix> {
    (1usize..=24, 1usize..=24).prop_flat_map(|(r, c)| {
        proptest::collection::btree_set((0..r, 0..c), 0..=r * c / 2)
            .prop_map(move |e| F2Matrix::new(r, c, e).expect("in range"))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rank_plus_nullity_is_cols(m in matrix()) {
        let kernel = m.kernel_basis();
        prop_assert_eq!(m.rank() + kernel.len(), m.cols());
        for v in &kernel {
            prop_assert!(m.mul_vec(v).is_zero());
        }
    }

    #[test]
    fn solutions_are_exact(m in matrix(), seed in any::<u64>()) {
        let x = F2Vector::from_indices((0..m.cols()).filter(|i| (seed >> (i % 64)) & 1 == 1));
        let t = m.mul_vec(&x);
        let y = m.solve(&t).expect("target is in the image");
        prop_assert_eq!(m.mul_vec(&y), t);
    }

    #[test]
    fn products_respect_idempotents(a in 0usize..688, b in 0usize..688) {
        let alg = genus_two();
        if !alg.mul(a, b).is_zero() {
            prop_assert_eq!(alg.right_idempotent(a), alg.left_idempotent(b));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn morphism_differential_squares_to_zero(seed in any::<u64>(), arity in 0usize..=3) {
        let i = identity();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_morphism(&i, &i, shape(arity, 8, seed % 2 == 0), &mut rng);
        prop_assert!(h.differential().differential().is_zero());
    }

    #[test]
    fn composition_is_associative_and_closed(seed in any::<u64>()) {
        let i = identity();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let [f, g, h] = [0, 1, 2].map(|_| random_morphism(&i, &i, shape(2, 5, false), &mut rng));
        let l = compose(&h, &compose(&g, &f).unwrap()).unwrap();
        let r = compose(&compose(&h, &g).unwrap(), &f).unwrap();
        prop_assert_eq!(l.table(), r.table());
        let cf = random_closed_endomorphism(&i, shape(1, 3, true), &mut rng);
        let cg = random_closed_endomorphism(&i, shape(1, 3, true), &mut rng);
        prop_assert!(compose(&cg, &cf).unwrap().is_closed());
    }

    #[test]
    fn checked_bimodules_have_square_zero_boundary(seed in any::<u64>()) {
        let i = identity();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Arity-0 H keeps id + dH strictly unital.
        let f = random_closed_endomorphism(&i, shape(0, 4, true), &mut rng);
        let c = Arc::new(mapping_cone(&f, "C").unwrap());
        prop_assert!(c.check_structure().passed());
        let d = c.arity_zero_complex().boundary;
        prop_assert!(d.mul(&d).unwrap().is_zero());
        let p = box_bimodules(&c, &i).unwrap();
        prop_assert!(p.check_structure().passed());
        let q = box_bimodules(&i, &c).unwrap();
        prop_assert!(q.check_structure().passed());
    }

    #[test]
    fn clf_rewrites_keep_boundaries(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = random_clf(8, &mut rng);
        let (n, rewrites) = normalize_horizontal(&e);
        prop_assert_eq!(rewrites, e.vcomp_count());
        prop_assert_eq!(n.crit_count(), e.crit_count());
        let chain = n.chain().expect("normalized form is a chain");
        let factored: Vec<ClfExpr> = chain.iter().map(factor_leaf).collect();
        let merged = ClfExpr::from_chain(merge_identities(factored));
        for rewritten in [&n, &merged] {
            prop_assert!(rewritten.initial().equivalent(&e.initial()));
            prop_assert!(rewritten.resulting().equivalent(&e.resulting()));
        }
        if let Ok(moved) = hurwitz(&merged, 0) {
            prop_assert_eq!(moved.crit_count(), merged.crit_count());
            prop_assert!(moved.resulting().equivalent(&e.resulting()));
        }
    }
}
