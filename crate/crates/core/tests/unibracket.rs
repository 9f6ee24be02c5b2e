mod common;

use std::collections::BTreeMap;

use clifford_bracket::model::*;
use clifford_bracket::oracle::{check_zero, eval, random_assignment, Center, UniQuotient};
use clifford_bracket::unibracket::*;
use clifford_bracket::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn open_ctx(n: usize) -> VariableContext {
    VariableContext::numbered(n).with_multiset(BTreeMap::new()).unwrap()
}

fn content(counts: &[u32]) -> Content {
    counts.iter().enumerate().filter(|(_, &k)| k > 0).map(|(i, &k)| (i as Var, k)).collect()
}

fn bpoly(terms: &[(i64, Vec<Atom>)]) -> BracketPolynomial {
    let mut p = BracketPolynomial::zero();
    for (c, atoms) in terms {
        p.add_scaled(&BracketPolynomial::term(atoms.clone(), SquarePart::one(), q(1)), &q(*c));
    }
    p
}

fn nf(p: &BracketPolynomial) -> VVPolynomial {
    UniNormalizer::new(RVariant::Refined).normal_form(&to_unibracket(p, &open_ctx(4)).unwrap()).unwrap()
}

#[test]
fn to_unibracket_examples() {
    let u = to_unibracket(&bpoly(&[(1, vec![common::bracket(&[0, 1])])]), &open_ctx(2)).unwrap();
    let half = VVPolynomial::from_terms([(Monomial::word(vec![0, 1]), qf(1, 2)), (Monomial::word(vec![1, 0]), qf(1, 2))]);
    assert_eq!(u, half);
    let u = to_unibracket(&bpoly(&[(1, vec![common::bracket(&[0, 1]), common::bracket(&[2, 3])])]), &open_ctx(4)).unwrap();
    assert_eq!(u.len(), 4);
    assert!(u.terms().all(|(_, c)| *c == qf(1, 4)));
}

#[test]
fn to_unibracket_rejects_mixed_degrees() {
    let p = bpoly(&[(1, vec![common::bracket(&[0, 1])]), (1, vec![common::bracket(&[0, 1, 2])])]);
    assert!(matches!(to_unibracket(&p, &open_ctx(3)), Err(Error::Domain(_))));
    let declared = VariableContext::numbered(3).with_multiset(content(&[1, 1, 1])).unwrap();
    let p = bpoly(&[(1, vec![common::bracket(&[0, 1, 1])])]);
    assert!(matches!(to_unibracket(&p, &declared), Err(Error::Domain(_))));
}

#[test]
fn to_unibracket_keeps_the_central_value() {
    let mut rng = common::rng(3);
    for i in 0..30 {
        let m = rng.gen_range(3..=6);
        let p = common::random_uni_input(&mut rng, m);
        let u = to_unibracket(&p, &open_ctx(4)).unwrap();
        let a = random_assignment(&(0..4).collect(), &mut ChaCha8Rng::seed_from_u64(i));
        assert_eq!(eval(&Center(&u), &a).unwrap(), eval(&p, &a).unwrap());
    }
}

#[test]
fn base_elements_lie_in_the_ideal() {
    for variant in [RVariant::Refined, RVariant::Uniform] {
        for counts in [&[1, 1, 1][..], &[2, 1, 1], &[1, 2, 1], &[2, 2, 1], &[1, 1, 1, 1], &[3, 1, 1]] {
            let base = UniGroebnerBase::generate(&content(counts), variant, &clifford_bracket::gbasis::Reducer::new(clifford_bracket::gbasis::RingKind::SquareFree)).unwrap();
            assert!(!base.is_empty());
            for e in base.elements.values() {
                assert!(check_zero(&Center(&e.reduced), 20, 1).unwrap().zero, "{} {:?}", e.family, e.leader());
                assert_eq!(e.reduced.leading().unwrap().1, &q(1));
            }
        }
    }
}

#[test]
fn multilinear_base_has_r_family_instance() {
    let ctx = VariableContext::numbered(3).with_multiset(content(&[1, 1, 1])).unwrap();
    let base = generate_bg(&ctx, RVariant::Uniform).unwrap();
    let target = nf(&bpoly(&[(1, vec![Atom::Var(0), common::bracket(&[2, 1])])]));
    assert!(target.is_zero());
    assert!(base.elements.values().any(|e| matches!(e.family, BgFamily::R1 { .. })));
}

#[test]
fn repeated_variable_admits_l_zero_elements() {
    let ctx = VariableContext::numbered(3).with_multiset(content(&[3, 1, 1])).unwrap();
    let uniform = generate_bg(&ctx, RVariant::Uniform).unwrap();
    assert!(uniform.elements.values().any(|e| e.family == BgFamily::R1 { j: 2, l: 0 }));
    let refined = generate_bg(&ctx, RVariant::Refined).unwrap();
    assert!(refined.elements.values().any(|e| e.family != BgFamily::S1));
}

#[test]
fn small_multisets_are_rejected() {
    let ctx = VariableContext::numbered(2).with_multiset(content(&[1, 1])).unwrap();
    assert!(matches!(generate_bg(&ctx, RVariant::Refined), Err(Error::Domain(_))));
}

#[test]
fn normal_form_examples() {
    let b = |w: &[Var]| vec![common::bracket(w)];
    assert_eq!(nf(&bpoly(&[(1, b(&[2, 1, 0]))])), nf(&bpoly(&[(-1, b(&[1, 2, 0]))])));
    assert_eq!(nf(&bpoly(&[(1, b(&[2, 1, 0]))])), nf(&bpoly(&[(-1, b(&[0, 1, 2]))])));
    assert_eq!(nf(&bpoly(&[(1, b(&[0, 1, 2]))])), nf(&bpoly(&[(1, b(&[1, 2, 0]))])));
    assert!(nf(&bpoly(&[(2, vec![Atom::Var(0), common::bracket(&[1, 2])])])).is_zero());
}

#[test]
fn normal_form_matches_the_linear_algebra_oracle() {
    let mut rng = common::rng(8);
    let uni = UniNormalizer::new(RVariant::Uniform);
    let mut oracles: BTreeMap<Content, UniQuotient> = BTreeMap::new();
    for _ in 0..60 {
        let m = rng.gen_range(3..=5);
        let p = common::random_uni_input(&mut rng, m);
        let u = to_unibracket(&p, &open_ctx(4)).unwrap();
        let Some((t, _)) = u.terms().next() else { continue };
        let c = t.content();
        let oracle = oracles.entry(c.clone()).or_insert_with(|| UniQuotient::new(&c).unwrap());
        let ours = uni.normal_form(&u).unwrap();
        assert_eq!(ours, oracle.normal_form(&u).unwrap());
        assert!(ours.terms().all(|(t, _)| is_unibracket_normal(t)), "{ours:?}");
        assert_eq!(uni.normal_form(&ours).unwrap(), ours);
    }
}

#[test]
fn normal_monomials_count_the_quotient() {
    for counts in [&[1, 1, 1][..], &[2, 1, 1], &[1, 1, 1, 1], &[2, 2, 1], &[1, 1, 2, 1]] {
        let c = content(counts);
        let oracle = UniQuotient::new(&c).unwrap();
        let standard = oracle.standard_monomials();
        assert_eq!(standard.len(), oracle.dimension());
        assert!(standard.iter().all(is_unibracket_normal), "{counts:?}");
    }
}

#[test]
fn fuel_is_enforced() {
    let u = to_unibracket(&bpoly(&[(1, vec![common::bracket(&[2, 1, 0])])]), &open_ctx(3)).unwrap();
    assert!(matches!(UniNormalizer::with_fuel(RVariant::Refined, 0).normal_form(&u), Err(Error::FuelExhausted(0))));
}
