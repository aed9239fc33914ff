use super::*;
use crate::bimodule::identity_bimodule;
use crate::pmc::PointedMatchedCircle;
use crate::random::{random_closed_endomorphism, random_morphism, TableShape};
use crate::strand::build_dga;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn torus_identity() -> Arc<Bimodule> {
    let a = Arc::new(build_dga(&PointedMatchedCircle::torus(), "A_T"));
    Arc::new(identity_bimodule(&a))
}

fn shape(max_arity: usize, terms: usize, chains_only: bool) -> TableShape {
    TableShape {
        max_arity,
        terms,
        chains_only,
    }
}

fn sequences(n: usize, max_len: usize) -> Vec<Vec<usize>> {
    let mut all = vec![vec![]];
    let mut frontier = vec![vec![]];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for s in &frontier {
            for a in 0..n {
                let mut t: Vec<usize> = s.clone();
                t.push(a);
                next.push(t);
            }
        }
        all.extend(next.iter().cloned());
        frontier = next;
    }
    all
}

/// `D_j` with `D_0(x, a) = x` for empty `a` and zero otherwise.
fn dn_or_unit(m: &Bimodule, x: usize, seq: &[usize], j: usize) -> Vec<(Vec<usize>, usize)> {
    if j == 0 {
        return if seq.is_empty() { vec![(vec![], x)] } else { vec![] };
    }
    m.compute_dn(x, seq, j).into_iter().collect()
}

/// `Σ μ_n F_{i,j} + F_{0,0} m` at one input, with `μ_n = 0` for `n >= 3`.
fn fij_relation_at(h: &Morphism, x: usize, seq: &[usize]) -> Span {
    let m = h.source();
    let n = h.target();
    let a1 = m.left_algebra();
    let a2 = m.right_algebra();
    let key = Key::new(x, seq.to_vec());
    let mut acc = Accumulator::new();
    for (i, j) in [(0, 0), (1, 0), (0, 1)] {
        for s1 in 0..=seq.len() {
            for s2 in s1..=seq.len() {
                for (chain_j, y) in dn_or_unit(m, x, &seq[..s1], j) {
                    for &o in h.table().get(&Key::new(y, seq[s1..s2].to_vec())).into_iter().flatten() {
                        for (chain_i, z) in dn_or_unit(n, o.gen, &seq[s2..], i) {
                            let mut chain = chain_j.clone();
                            chain.push(o.alg);
                            chain.extend(chain_i);
                            let value = match chain.len() {
                                1 => a1.diff(chain[0]).clone(),
                                2 => a1.mul(chain[0], chain[1]).clone(),
                                _ => F2Vector::zero(),
                            };
                            for c in value.iter() {
                                acc.toggle(key.clone(), Out { alg: c, gen: z });
                            }
                        }
                    }
                }
            }
        }
    }
    for k in 0..seq.len() {
        for d in a2.diff(seq[k]).iter() {
            let mut s = seq.to_vec();
            s[k] = d;
            for &o in h.table().get(&Key::new(x, s)).into_iter().flatten() {
                acc.toggle(key.clone(), o);
            }
        }
        if k + 1 < seq.len() {
            for p in a2.mul(seq[k], seq[k + 1]).iter() {
                let s = [&seq[..k], &[p], &seq[k + 2..]].concat();
                for &o in h.table().get(&Key::new(x, s)).into_iter().flatten() {
                    acc.toggle(key.clone(), o);
                }
            }
        }
    }
    acc.finish().get(&key).cloned().unwrap_or_default()
}

#[test]
fn scatter_agrees_with_fij_formulation() {
    let m = torus_identity();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let dim = m.right_algebra().dim();
    let seqs = sequences(dim, 3);
    for trial in 0..4 {
        let h = random_morphism(&m, &m, shape(1, 6, trial % 2 == 0), &mut rng);
        let d = morphism_differential(&h);
        let mut literal = Table::new();
        for seq in &seqs {
            for x in 0..m.generators().len() {
                literal.add_span(&Key::new(x, seq.clone()), &fij_relation_at(&h, x, seq));
            }
        }
        assert_eq!(d, literal, "trial {trial}");
        assert!(d.arity() <= h.arity() + m.arity() + 1);
    }
}

#[test]
fn differential_squares_to_zero() {
    let m = torus_identity();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for trial in 0..30 {
        let h = random_morphism(&m, &m, shape(3, 10, trial % 3 == 0), &mut rng);
        assert!(h.differential().differential().is_zero(), "trial {trial}");
    }
}

#[test]
fn identity_closed_and_neutral() {
    let m = torus_identity();
    let id = identity_morphism(&m);
    assert!(id.is_closed());
    let i0 = m.lookup("h(1 3)").unwrap();
    assert_eq!(
        id.table().get(&Key::new(i0, vec![])).unwrap(),
        &std::collections::BTreeSet::from([Out {
            alg: m.left_algebra().lookup("h(1 3)").unwrap(),
            gen: i0
        }])
    );
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let f = random_morphism(&m, &m, shape(2, 8, false), &mut rng);
    assert_eq!(compose(&id, &f).unwrap().table(), f.table());
    assert_eq!(compose(&f, &id).unwrap().table(), f.table());
    assert_eq!(compose(&id, &id).unwrap().table(), id.table());
    let zero = Morphism::zero(m.clone(), m.clone()).unwrap();
    assert!(compose(&zero, &f).unwrap().is_zero());
}

#[test]
fn compose_associative_and_preserves_closedness() {
    let m = torus_identity();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10 {
        let f = random_morphism(&m, &m, shape(2, 6, false), &mut rng);
        let g = random_morphism(&m, &m, shape(2, 6, false), &mut rng);
        let h = random_morphism(&m, &m, shape(2, 6, false), &mut rng);
        let left = compose(&h, &compose(&g, &f).unwrap()).unwrap();
        let right = compose(&compose(&h, &g).unwrap(), &f).unwrap();
        assert_eq!(left.table(), right.table());
        let cf = random_closed_endomorphism(&m, shape(1, 4, true), &mut rng);
        let cg = random_closed_endomorphism(&m, shape(1, 4, true), &mut rng);
        assert!(compose(&cg, &cf).unwrap().is_closed());
    }
}

#[test]
fn unmatched_entry_is_not_closed() {
    let m = torus_identity();
    let a = m.left_algebra();
    let x = m.lookup("h(1 3)h(2 4)").unwrap();
    let b = a.lookup("r[1-4]r[2-3]").unwrap();
    let f = Morphism::new("f", m.clone(), m.clone(), [(Key::new(x, vec![]), Out { alg: b, gen: x })].into_iter().collect()).unwrap();
    let (k, _) = f.closedness_witness().unwrap();
    assert_eq!(k, Key::new(x, vec![]));
}

#[test]
fn homotopy_search() {
    let m = torus_identity();
    let id = identity_morphism(&m);
    let w = is_homotopic(&id, &id, 0).unwrap();
    assert!(w.h.is_zero());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let h0 = random_morphism(&m, &m, shape(2, 6, true), &mut rng);
        let g = id.sum(&h0.differential()).unwrap();
        let w = is_homotopic(&id, &g, 2).unwrap();
        assert_eq!(morphism_differential(&w.h), id.table().sum(g.table()));
    }
}

fn empty_projection(m: &Arc<Bimodule>) -> Morphism {
    let a = m.left_algebra();
    let e = a.lookup("h()").unwrap();
    let x = m.lookup("h()").unwrap();
    Morphism::new("e", m.clone(), m.clone(), [(Key::new(x, vec![]), Out { alg: e, gen: x })].into_iter().collect()).unwrap()
}

#[test]
fn non_boundary_is_not_within_cap() {
    let m = torus_identity();
    let e = empty_projection(&m);
    assert!(e.is_closed());
    let id = identity_morphism(&m);
    let g = id.sum(&e).unwrap();
    for cap in 0..=3 {
        assert_eq!(
            is_homotopic(&id, &g, cap).unwrap_err(),
            HomotopyError::NotWithinCap { cap }
        );
    }
    assert!(!induced_on_homology(&e).unwrap().is_zero());
}

#[test]
fn homology_maps() {
    let m = torus_identity();
    let id = identity_morphism(&m);
    let hid = induced_on_homology(&id).unwrap();
    assert_eq!(hid, F2Matrix::identity(10));
    assert!(is_naive_quasi_iso(&id).unwrap());
    let zero = Morphism::zero(m.clone(), m.clone()).unwrap();
    assert!(!is_naive_quasi_iso(&zero).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let h = random_morphism(&m, &m, shape(1, 8, false), &mut rng);
    assert!(induced_on_homology(&h.differential()).unwrap().is_zero());
    let e = empty_projection(&m);
    let f = random_closed_endomorphism(&m, shape(1, 6, false), &mut rng).sum(&e).unwrap();
    let g = random_closed_endomorphism(&m, shape(1, 6, false), &mut rng);
    let gf = compose(&g, &f).unwrap();
    assert_eq!(
        induced_on_homology(&gf).unwrap(),
        induced_on_homology(&g).unwrap().mul(&induced_on_homology(&f).unwrap()).unwrap()
    );
    assert!(matches!(
        induced_on_homology(&h),
        Err(MorphismError::NotClosed { .. })
    ) || h.is_closed());
}
