mod common;

use clifford_bracket::gbasis::*;
use clifford_bracket::model::*;
use clifford_bracket::oracle::{all_monomials, brute_force_closure, check_zero};
use clifford_bracket::Error;
use proptest::prelude::*;

fn ctx(n: usize) -> VariableContext {
    VariableContext::numbered(n)
}

fn poly(terms: &[(i64, &[Var])]) -> VVPolynomial {
    VVPolynomial::from_terms(terms.iter().map(|(c, w)| (Monomial::word(w.to_vec()), q(*c))))
}

fn families(rs: &RuleSet) -> std::collections::BTreeSet<String> {
    rs.rules.iter().map(|r| r.family.to_string()).collect()
}

#[test]
fn multilinear_three_is_g3_only() {
    let rs = generate_multilinear(&ctx(3)).unwrap();
    assert_eq!(families(&rs), ["G3".to_string()].into());
    let r = rs.rules.iter().find(|r| r.lhs.left() == [2, 1, 0]).expect("v3v2v1 rule");
    assert_eq!(r.rhs, poly(&[(1, &[0, 1, 2]), (1, &[0, 2, 1]), (-1, &[1, 2, 0])]));
}

#[test]
fn multilinear_four_adds_g4() {
    let rs = generate_multilinear(&ctx(4)).unwrap();
    assert_eq!(families(&rs), ["G3".to_string(), "G4".to_string()].into());
}

#[test]
fn general_two_is_eg2_only() {
    let rs = generate_general(&ctx(2), 6).unwrap();
    assert_eq!(families(&rs), ["EG2".to_string()].into());
    let lhs: Vec<&[Var]> = rs.rules.iter().map(|r| r.lhs.left()).collect();
    assert!(lhs.contains(&&[1, 1, 0][..]));
    assert!(lhs.contains(&&[1, 0, 0][..]));
    for r in &rs.rules {
        if r.lhs.left() == [1, 1, 0] {
            assert_eq!(r.rhs.leading().unwrap().0.left(), [0, 1, 1]);
        }
    }
}

#[test]
fn general_three_has_eg3_leader() {
    let rs = generate_general(&ctx(3), 6).unwrap();
    assert!(rs.rules.iter().any(|r| r.family == Family::EG(3) && r.lhs.left() == [2, 1, 2, 0]));
}

#[test]
fn squarefree_three_families() {
    let rs = generate_squarefree(&ctx(3)).unwrap();
    let f = families(&rs);
    for name in ["G3", "EG3", "fold"] {
        assert!(f.contains(name), "missing {name} in {f:?}");
    }
    // EG4 needs four distinct variables
    assert!(!f.contains("EG4"));
    assert!(families(&generate_squarefree(&ctx(4)).unwrap()).contains("EG4"));
    let r = Reducer::new(RingKind::SquareFree);
    let nf = r.reduce(&poly(&[(1, &[0, 0, 1])])).unwrap();
    assert_eq!(nf, VVPolynomial::monomial(Monomial::new(vec![1], SquarePart::single(0, 1)), q(1)));
}

#[test]
fn too_few_variables_is_an_error() {
    assert!(matches!(generate(RingKind::Multilinear, &ctx(1), 5), Err(Error::Context(_) | Error::Domain(_))));
}

#[test]
fn every_rule_is_sound() {
    for kind in [RingKind::Multilinear, RingKind::General, RingKind::SquareFree] {
        let rs = generate(kind, &ctx(4), 6).unwrap();
        for (i, r) in rs.rules.iter().enumerate() {
            assert!(check_zero(&r.binomial(), 20, i as u64).unwrap().zero, "{kind:?} {} rule {:?}", r.family, r.lhs);
            assert!(r.rhs.terms().all(|(t, _)| t < &r.lhs), "rule does not decrease: {:?}", r.lhs);
        }
    }
}

#[test]
fn reduce_examples() {
    let r = Reducer::new(RingKind::Multilinear);
    assert_eq!(r.reduce(&poly(&[(1, &[0, 1, 2]), (-1, &[2, 1, 0])])).unwrap(), poly(&[(1, &[1, 2, 0]), (-1, &[0, 2, 1])]));
    assert_eq!(r.reduce(&poly(&[(1, &[0, 1, 2])])).unwrap(), poly(&[(1, &[0, 1, 2])]));
    let nf = r.reduce(&poly(&[(1, &[2, 1, 0])])).unwrap();
    assert_eq!(nf, poly(&[(1, &[0, 1, 2]), (1, &[0, 2, 1]), (-1, &[1, 2, 0])]));
    let closure = brute_force_closure(&Monomial::word(vec![2, 1, 0]), RingKind::Multilinear, 1000).unwrap();
    assert_eq!(closure.unique(), Some(&nf));
}

#[test]
fn normal_shape_examples() {
    assert!(is_normal_shape(&Monomial::word(vec![1, 2, 0]), RingKind::Multilinear));
    assert!(!is_normal_shape(&Monomial::word(vec![2, 1, 0]), RingKind::Multilinear));
    assert!(is_normal_shape(&Monomial::new(vec![1], SquarePart::single(0, 1)), RingKind::SquareFree));
}

#[test]
fn migrate_squares_examples() {
    let sq = |left: Word, v: Var| VVPolynomial::monomial(Monomial::new(left, SquarePart::single(v, 1)), q(1));
    assert_eq!(migrate_squares(&poly(&[(1, &[1, 0, 0])])), sq(vec![1], 0));
    assert_eq!(migrate_squares(&poly(&[(1, &[0, 0])])), sq(vec![], 0));
    let free = poly(&[(1, &[0, 1, 0])]);
    assert_eq!(migrate_squares(&free), free);
}

#[test]
fn fuel_is_enforced() {
    let r = Reducer::with_fuel(RingKind::Multilinear, 0);
    assert!(matches!(r.reduce(&poly(&[(1, &[2, 1, 0])])), Err(Error::FuelExhausted(0))));
}

#[test]
fn normal_forms_have_normal_shape() {
    for kind in [RingKind::Multilinear, RingKind::General, RingKind::SquareFree] {
        let r = Reducer::new(kind);
        for m in 0..=5 {
            for t in all_monomials(kind, 3, m) {
                let nf = r.reduce_monomial(&t).unwrap();
                for (u, _) in nf.terms() {
                    assert!(r.is_reduced(u), "{kind:?}: {u:?} not reduced");
                    assert!(is_normal_shape(u, kind), "{kind:?}: {u:?} has no normal shape");
                }
            }
        }
    }
}

fn word(n: Var, max: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(0..n, 0..=max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reduction_preserves_value(words in prop::collection::vec((word(4, 6), -3i64..=3), 1..4), seed in 0u64..1000) {
        let p = VVPolynomial::from_terms(words.into_iter().map(|(w, c)| (Monomial::word(w), q(c))));
        for kind in [RingKind::General, RingKind::SquareFree] {
            let nf = Reducer::new(kind).reduce(&p).unwrap();
            prop_assert!(check_zero(&p.sub(&nf), 4, seed).unwrap().zero);
        }
    }

    #[test]
    fn reduction_is_idempotent(w in word(4, 7)) {
        for kind in [RingKind::General, RingKind::SquareFree] {
            let r = Reducer::new(kind);
            let nf = r.reduce_monomial(&Monomial::word(w.clone())).unwrap();
            prop_assert_eq!(r.reduce(&nf).unwrap(), nf);
        }
    }

    #[test]
    fn squarefree_output_has_no_adjacent_pair(w in word(4, 8)) {
        let nf = Reducer::new(RingKind::SquareFree).reduce_monomial(&Monomial::word(w)).unwrap();
        for (t, _) in nf.terms() {
            prop_assert!(t.left().windows(2).all(|p| p[0] != p[1]));
        }
    }
}
