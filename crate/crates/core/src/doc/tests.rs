use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::random::{random_morphism, TableShape};

const TORUS: &str = "\
PMC T GENUS 1 PAIRS (1 3) (2 4)
ALGEBRA A_T STRANDS T
BIMODULE I IDENTITY OVER A_T
MORPHISM idI IDENTITY OF I
BIMODULE C CONE idI
";

#[test]
fn parses_declarations() {
    let d = Document::parse(TORUS).unwrap();
    assert_eq!(d.algebra("A_T").unwrap().dim(), 16);
    assert_eq!(d.bimodule("C").unwrap().generators().len(), 8);
    assert!(d.pmc("T").unwrap().validate());
    assert_eq!(d.entries().len(), 5);
}

#[test]
fn errors_have_locations() {
    let e = Document::parse("PMC T GENUS 1 PAIRS (1 3) (2 x)").unwrap_err();
    assert_eq!((e.kind, e.loc), (DocErrorKind::Parse, Some(Loc { line: 1, col: 27 })));
    let e = Document::parse("PMC T GENUS 1 PAIRS (1 3) (1 4)").unwrap_err();
    assert_eq!(e.kind, DocErrorKind::Invalid);
    let e = Document::parse("PMC T GENUS 1 PAIRS (1 3) (2 4)\nBIMODULE I IDENTITY OVER B").unwrap_err();
    assert_eq!((e.kind, e.loc), (DocErrorKind::UnresolvedReference, Some(Loc { line: 2, col: 26 })));
    let e = Document::parse("PMC T GENUS 1 PAIRS (1 3) (2 4)\nPMC T GENUS 1 PAIRS (1 3) (2 4)").unwrap_err();
    assert_eq!(e.kind, DocErrorKind::DuplicateName);
    let e = Document::parse("CLF W = H(ID(a), ID(b)").unwrap_err();
    assert_eq!(e.kind, DocErrorKind::Parse);
}

#[test]
fn explicit_algebra_and_tables() {
    let text = "\
ALGEBRA K {
  IDEM i j;
  ELEM x L=i R=j; ELEM y L=i R=j;
  DIFF x = y;
}
BIMODULE M OVER K K {
  GEN p L=i R=i;
  GEN q L=j R=j;
  D1 p [x] = x : q;
  D1 p [y] = y : q;
  D1 p [i] = i : p; D1 q [j] = j : q;
}
MORPHISM F FROM M TO M { F p [] = i : p; F q [] = j : q; }
";
    let d = Document::parse(text).unwrap();
    let k = d.algebra("K").unwrap();
    assert_eq!(k.dim(), 4);
    assert_eq!(k.diff(k.lookup("x").unwrap()), &F2Vector::unit(k.lookup("y").unwrap()));
    let m = d.bimodule("M").unwrap();
    let report = m.check_structure();
    assert!(report.passed(), "{report:?}");
    let f = d.morphism("F").unwrap();
    assert_eq!(*f, identity_morphism(&m));
}

#[test]
fn run_lines() {
    let d = Document::parse(&format!("{TORUS}RUN algebra verify A_T --budget 10\nRUN EXPECT fail homology C\n")).unwrap();
    assert_eq!(d.runs().len(), 2);
    assert_eq!(d.runs()[0].args, ["algebra", "verify", "A_T", "--budget", "10"]);
    assert!(d.runs()[1].expect_fail);
}

fn reparse_bimodule(base: &str, m: &Bimodule) -> Arc<Bimodule> {
    let d = Document::parse(&format!("{base}{}", emit_bimodule(&m.clone().renamed("RT")))).unwrap();
    d.bimodule("RT").unwrap()
}

#[test]
fn emitted_products_reparse() {
    let d = Document::parse(TORUS).unwrap();
    let c = d.bimodule("C").unwrap();
    let cc = Arc::new(box_bimodules(&c, &c).unwrap());
    for m in [c.clone(), cc, d.bimodule("I").unwrap()] {
        assert_eq!(*reparse_bimodule(TORUS, &m), *m);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn emitted_morphisms_reparse(seed in any::<u64>(), arity in 0usize..3, terms in 0usize..12) {
        let d = Document::parse(TORUS).unwrap();
        let c = d.bimodule("C").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shape = TableShape { max_arity: arity, terms, chains_only: seed % 2 == 0 };
        let f = random_morphism(&c, &c, shape, &mut rng).renamed("R");
        let text = format!("{TORUS}{}", emit_morphism(&f));
        let back = Document::parse(&text).unwrap().morphism("R").unwrap();
        prop_assert_eq!(&*back, &f);
    }
}
