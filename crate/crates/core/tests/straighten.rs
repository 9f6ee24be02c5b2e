mod common;

use clifford_bracket::model::*;
use clifford_bracket::oracle::check_zero;
use clifford_bracket::straighten::*;
use clifford_bracket::Error;
use proptest::prelude::{prop, prop_assert, prop_assert_eq, proptest, ProptestConfig};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn b(w: &[Var]) -> BracketFactor {
    BracketFactor::new(w.to_vec())
}

fn term(ws: &[&[Var]]) -> BracketTerm {
    BracketTerm { coef: q(1), monomial: BracketMonomial::brackets(ws.iter().map(|w| w.to_vec()).collect(), SquarePart::one()) }
}

fn max_leader(p: &BracketPolynomial) -> Option<Monomial> {
    p.terms().filter_map(|(m, _)| leader(m)).max()
}

fn assert_equal_value(lhs: &BracketPolynomial, rhs: &BracketPolynomial) {
    assert!(check_zero(&lhs.sub(rhs), 20, 1).unwrap().zero, "{lhs:?} != {rhs:?}");
}

/// Two leader-oriented brackets in random order.
fn oriented_pair(rng: &mut ChaCha8Rng) -> Option<(BracketFactor, BracketFactor)> {
    let mut w = || -> Word { (0..rng.gen_range(2..=4)).map(|_| rng.gen_range(0..5)).collect() };
    let (x, y) = (w(), w());
    let m = BracketMonomial::brackets(vec![x, y], SquarePart::one());
    let (m, _) = normalize_term(&m, &q(1)).unwrap()?;
    if m.atoms().len() != 2 || !m.squares().is_one() {
        return None;
    }
    let f = |a: &Atom| match a {
        Atom::Bracket(f) => f.clone(),
        Atom::Var(_) => unreachable!(),
    };
    let (a, c) = (f(&m.atoms()[0]), f(&m.atoms()[1]));
    Some(if rng.gen_bool(0.5) { (a, c) } else { (c, a) })
}

#[test]
fn caianiello_examples() {
    let four = caianiello_expand(&b(&[0, 1, 2, 3]), None).unwrap();
    let mut expected = brackets(q(1), &[vec![0, 1], vec![2, 3]]);
    expected.add_scaled(&brackets(q(1), &[vec![0, 2], vec![1, 3]]), &q(-1));
    expected.add_scaled(&brackets(q(1), &[vec![0, 3], vec![1, 2]]), &q(1));
    assert_eq!(four, expected);
    assert_eq!(caianiello_expand(&b(&[0, 1]), None).unwrap(), brackets(q(1), &[vec![0, 1]]));
    let five = caianiello_expand(&b(&[0, 1, 2, 3, 4]), None).unwrap();
    assert_eq!(five.len(), 10);
    assert!(five.terms().all(|(m, _)| m.atoms().len() == 2));
    assert_equal_value(&five, &brackets(q(1), &[vec![0, 1, 2, 3, 4]]));
}

#[test]
fn caianiello_rejects_unreachable_partitions() {
    assert!(matches!(caianiello_expand(&b(&[0, 1, 2, 3]), Some(&[2, 1, 1])), Err(Error::InvalidPartition(_))));
    assert!(matches!(caianiello_expand(&b(&[0, 1, 2, 3]), Some(&[3, 3])), Err(Error::InvalidPartition(_))));
    assert!(caianiello_expand(&b(&[0, 1, 2, 3, 4, 5]), Some(&[2, 2, 2])).is_ok());
}

#[test]
fn fundamental_reduction_instances() {
    let lhs = BracketPolynomial::term(vec![Atom::Var(2), Atom::Var(1), Atom::Var(0)], SquarePart::one(), q(1));
    assert_equal_value(&lhs, &fundamental_reduction(2, &[1], 0).unwrap());
    let lhs = BracketPolynomial::term(vec![Atom::Var(3), Atom::Var(2), Atom::Var(1), Atom::Var(0)], SquarePart::one(), q(1));
    assert_equal_value(&lhs, &fundamental_reduction(3, &[2, 1], 0).unwrap());
    assert!(fundamental_reduction(0, &[1], 2).is_err());
}

#[test]
fn interior_normalize_examples() {
    let ascending = b(&[0, 1, 2, 3]);
    assert_eq!(interior_normalize(&ascending), brackets(q(1), &[vec![0, 1, 2, 3]]));
    let f = b(&[3, 2, 1, 0]);
    let r = interior_normalize(&f);
    assert!(r.len() >= 2);
    let single = brackets(q(1), &[f.entries().to_vec()]);
    assert_equal_value(&single, &r);
    assert!(max_leader(&r) < max_leader(&single));
}

#[test]
fn absorb_minimal_instance() {
    let r = absorb(&b(&[3, 0]), &b(&[2, 1])).unwrap();
    assert_equal_value(&brackets(q(1), &[vec![3, 0], vec![2, 1]]), &r);
    assert!(absorb(&b(&[0, 3]), &b(&[2, 1])).is_err());
}

#[test]
fn shuffle_three_singletons() {
    let r = shuffle(&b(&[3, 2]), &b(&[4, 1, 0])).unwrap();
    // [B] and [C] are single-variable brackets and vanish
    assert_eq!(r.len(), 3);
    assert_equal_value(&brackets(q(1), &[vec![3, 2], vec![4, 1, 0]]), &r);
}

#[test]
fn general_shuffle_smallest_full_instance() {
    let r = general_shuffle(&b(&[3, 1, 0]), &b(&[4, 0, 2])).unwrap();
    assert_equal_value(&brackets(q(1), &[vec![3, 1, 0], vec![4, 0, 2]]), &r);
}

#[test]
fn general_shuffle_with_empty_d_is_the_shuffle() {
    let (a, v, bb, w, c) = (vec![3], 2, vec![4], 1, vec![0]);
    let g = general_shuffle_rhs(&a, v, &[], &bb, w, &c);
    let s = shuffle_rhs(&a, v, &bb, w, &c);
    assert!(Straightener::new().straighten(&g.sub(&s)).unwrap().is_zero());
}

#[test]
fn split_two_cells() {
    let (a1, c1, a2, c2) = (3, 0, 2, 1);
    let r = split(&b(&[a1, c1, a2, c2])).unwrap();
    let mut expected = brackets(q(2), &[vec![a1, c1], vec![a2, c2]]);
    expected.add_scaled(&brackets(q(1), &[vec![c2, a2, a1, c1]]), &q(-1));
    assert_eq!(normalize_polynomial(&r.sub(&expected)).unwrap(), BracketPolynomial::zero());
    assert_equal_value(&brackets(q(1), &[vec![a1, c1, a2, c2]]), &r);
}

#[test]
fn split_three_cells() {
    let w = vec![4, 0, 3, 1, 2, 0];
    let r = split(&b(&w)).unwrap();
    assert_equal_value(&brackets(q(1), &[w]), &r);
}

#[test]
fn straight_examples() {
    assert!(is_straight(&term(&[&[0, 1], &[1, 2, 3]])));
    assert!(!is_straight(&term(&[&[0, 1, 3], &[1, 2]])));
    assert!(is_straight(&term(&[&[0, 1, 2]])));
    let t = to_tableau(&term(&[&[0, 1], &[1, 2, 3]])).unwrap();
    assert_eq!(t.rows, vec![vec![0, 1], vec![1, 2, 3]]);
}

#[test]
fn straighten_examples() {
    let s = Straightener::new();
    let two = brackets(q(1), &[vec![1, 0]]);
    assert_eq!(s.straighten(&two).unwrap(), two);
    let straight = brackets(q(1), &[vec![1, 0], vec![2, 3, 1]]);
    assert!(is_straight(&to_straight_form(&straight).to_terms()[0]));
    assert_eq!(s.straighten(&straight).unwrap(), straight);
    let p = brackets(q(1), &[vec![0, 1, 3], vec![1, 2]]);
    let out = s.straighten(&p).unwrap();
    assert_equal_value(&p, &out);
    assert!(to_straight_form(&out).to_terms().iter().all(is_straight));
}

/// `p` minus its uni-bracket normal form put back into a single bracket.
#[test]
fn rebracketed_normal_form_straightens_to_zero() {
    use clifford_bracket::unibracket::{to_unibracket, RVariant, UniNormalizer};
    let s = Straightener::new();
    let uni = UniNormalizer::new(RVariant::Refined);
    let ctx = VariableContext::numbered(4).with_multiset(Default::default()).unwrap();
    let mut rng = common::rng(5);
    for _ in 0..40 {
        let m = rng.gen_range(3..=6);
        let p = common::random_uni_input(&mut rng, m);
        let nf = uni.normal_form(&to_unibracket(&p, &ctx).unwrap()).unwrap();
        let mut back = BracketPolynomial::zero();
        for (t, c) in nf.terms() {
            back.add_scaled(&BracketPolynomial::term(vec![common::bracket(t.left())], t.squares().clone(), q(1)), c);
        }
        assert!(s.straighten(&p.sub(&back)).unwrap().is_zero());
    }
}

#[test]
fn bare_variables_are_a_domain_error() {
    let p = BracketPolynomial::term(vec![Atom::Var(0), common::bracket(&[1, 2])], SquarePart::one(), q(1));
    assert!(matches!(Straightener::new().straighten(&p), Err(Error::Domain(_))));
}

#[test]
fn trace_replays_to_the_result() {
    let s = Straightener::new();
    let p = brackets(q(1), &[vec![0, 1, 3], vec![1, 2]]);
    for strategy in [Strategy::Elimination, Strategy::Formulas] {
        let out = s.straighten_with(&p, strategy, true).unwrap();
        assert!(!out.trace.is_empty());
        assert_eq!(out.result, s.straighten(&p).unwrap());
    }
}

#[test]
fn fuel_is_enforced() {
    let p = brackets(q(1), &[vec![0, 1, 3], vec![1, 2]]);
    assert!(matches!(Straightener::with_fuel(0).straighten(&p), Err(Error::FuelExhausted(0))));
}

#[test]
fn operations_preserve_value_and_lower_the_leader() {
    let mut rng = common::rng(21);
    let mut applied = [0usize; 5];
    for _ in 0..3000 {
        let Some((x, y)) = oriented_pair(&mut rng) else { continue };
        let pair = BracketPolynomial::term(vec![Atom::Bracket(x.clone()), Atom::Bracket(y.clone())], SquarePart::one(), q(1));
        let single = BracketPolynomial::term(vec![Atom::Bracket(x.clone())], SquarePart::one(), q(1));
        let binary = [absorb(&x, &y), shuffle(&x, &y), general_shuffle(&x, &y)];
        for (i, r) in binary.into_iter().enumerate() {
            if let Ok(r) = r {
                applied[i] += 1;
                assert!(max_leader(&r) < max_leader(&pair), "op {i} on {x:?} {y:?}");
                assert!(check_zero(&pair.sub(&r), 4, 1).unwrap().zero);
            }
        }
        let r = interior_normalize(&x);
        if r != single {
            applied[3] += 1;
            assert!(max_leader(&r) < max_leader(&single));
            assert!(check_zero(&single.sub(&r), 4, 1).unwrap().zero);
        }
        if let Ok(r) = split(&x) {
            applied[4] += 1;
            // the main product keeps the leader, with more factors; the rest is lower
            let lead = max_leader(&single);
            assert_eq!(max_leader(&r), lead);
            for (m, _) in r.terms() {
                assert!(leader(m) < lead || m.atoms().len() > 1);
            }
            assert!(check_zero(&single.sub(&r), 4, 1).unwrap().zero);
        }
    }
    assert!(applied.iter().all(|&k| k > 20), "{applied:?}");
}

#[test]
fn strategies_agree() {
    let s = Straightener::new();
    let mut rng = common::rng(22);
    for _ in 0..150 {
        let p = common::random_bracket_poly(&mut rng, 5, 8, 4);
        let a = s.straighten_with(&p, Strategy::Elimination, false).unwrap();
        let f = s.straighten_with(&p, Strategy::Formulas, false).unwrap();
        assert_eq!(a.result, f.result);
        assert!(a.result.terms().all(|(m, _)| is_leader_normal(m)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn straighten_is_sound_and_idempotent(seed in 0u64..10_000) {
        let s = Straightener::new();
        let mut rng = common::rng(seed);
        let p = common::random_bracket_poly(&mut rng, 5, 8, 4);
        let out = s.straighten(&p).unwrap();
        prop_assert!(check_zero(&p.sub(&out), 6, seed).unwrap().zero);
        prop_assert_eq!(s.straighten(&out).unwrap(), out.clone());
        prop_assert!(to_straight_form(&out).to_terms().iter().all(is_straight));
    }

    #[test]
    fn equal_polynomials_straighten_identically(seed in 0u64..10_000) {
        let s = Straightener::new();
        let mut rng = common::rng(seed);
        let p = common::random_bracket_poly(&mut rng, 5, 8, 4);
        let p2 = common::rewrite(&mut rng, &p, 5);
        prop_assert_eq!(s.straighten(&p).unwrap(), s.straighten(&p2).unwrap());
    }

    #[test]
    fn caianiello_keeps_the_value(w in prop::collection::vec(0u16..4, 2..=7)) {
        let e = caianiello_expand(&b(&w), None).unwrap();
        prop_assert!(check_zero(&brackets(q(1), &[w]).sub(&e), 6, 2).unwrap().zero);
    }
}

#[test]
fn identity_suite_passes() {
    let report = check_basic_identities(3, 12, 8).unwrap();
    for r in &report.results {
        assert_eq!(r.passed, r.instances, "{}: {:?}", r.name, r.failures.first());
    }
}
