mod common;

use clifford_bracket::model::*;
use clifford_bracket::oracle::*;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn mv(c: [i64; 8]) -> Multivector8 {
    Mv { c: c.map(|x| BigRational::from_integer(BigInt::from(x))) }
}

fn word_poly(w: &[Var]) -> VVPolynomial {
    VVPolynomial::monomial(Monomial::word(w.to_vec()), q(1))
}

fn at(seed: u64, vars: impl IntoIterator<Item = Var>) -> Assignment {
    random_assignment(&vars.into_iter().collect(), &mut ChaCha8Rng::seed_from_u64(seed))
}

proptest! {
    #[test]
    fn product_is_associative(a in prop::array::uniform8(-5i64..5), b in prop::array::uniform8(-5i64..5), c in prop::array::uniform8(-5i64..5)) {
        let (a, b, c) = (mv(a), mv(b), mv(c));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
    }

    #[test]
    fn product_is_bilinear(a in prop::array::uniform8(-5i64..5), b in prop::array::uniform8(-5i64..5), c in prop::array::uniform8(-5i64..5)) {
        let (a, b, c) = (mv(a), mv(b), mv(c));
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
    }

    #[test]
    fn brackets_are_central(w in prop::collection::vec(0u16..4, 2..7), seed in 0u64..1000) {
        let p = BracketPolynomial::term(vec![common::bracket(&w)], SquarePart::one(), q(1));
        let x = eval(&p, &at(seed, 0..4)).unwrap();
        for g in 1..7 {
            prop_assert_eq!(&x.c[g], &BigRational::zero());
        }
    }

    #[test]
    fn eval_is_multiplicative(u in prop::collection::vec(0u16..4, 0..5), v in prop::collection::vec(0u16..4, 0..5), seed in 0u64..1000) {
        let a = at(seed, 0..4);
        let prod = word_poly(&u).mul(&word_poly(&v), true);
        prop_assert_eq!(eval(&prod, &a).unwrap(), eval(&word_poly(&u), &a).unwrap().mul(&eval(&word_poly(&v), &a).unwrap()));
    }

    #[test]
    fn folding_keeps_the_value(w in prop::collection::vec(0u16..3, 0..8), seed in 0u64..1000) {
        let mut sq = SquarePart::one();
        let left = fold_word(&w, &mut sq);
        let folded = VVPolynomial::monomial(Monomial::new(left.clone(), sq.clone()), q(1));
        prop_assert_eq!(left.len() + sq.degree(), w.len());
        prop_assert!(left.windows(2).all(|p| p[0] != p[1]));
        let a = at(seed, 0..3);
        prop_assert_eq!(eval(&folded, &a).unwrap(), eval(&word_poly(&w), &a).unwrap());
    }

    #[test]
    fn bracket_reversal_symmetry(w in prop::collection::vec(0u16..4, 2..7)) {
        let r: Word = w.iter().rev().copied().collect();
        let a = BracketFactor::new(w.clone()).expand();
        let b = BracketFactor::new(r).expand().scaled(&q(parity_sign(w.len())));
        prop_assert!(a.sub(&b).is_zero());
    }

    #[test]
    fn bracket_shift_symmetry(w in prop::collection::vec(0u16..4, 2..7), k in 0usize..7) {
        let mut s = w.clone();
        s.rotate_left(k % w.len());
        let d = BracketFactor::new(w).expand().sub(&BracketFactor::new(s).expand());
        prop_assert!(check_zero(&d, 8, 3).unwrap().zero);
    }

    #[test]
    fn monomial_order_is_degree_first(u in prop::collection::vec(0u16..4, 0..6), v in prop::collection::vec(0u16..4, 0..6)) {
        let (a, b) = (Monomial::word(u.clone()), Monomial::word(v.clone()));
        if u.len() != v.len() {
            prop_assert_eq!(a < b, u.len() < v.len());
        } else if u != v {
            prop_assert_eq!(a < b, u < v);
        }
    }

    #[test]
    fn bracket_polynomial_product_expands(seed in 0u64..500) {
        let mut rng = common::rng(seed);
        let p = common::random_any_poly(&mut rng, 3);
        let r = common::random_any_poly(&mut rng, 3);
        let lhs = p.mul(&r).expand();
        let rhs = p.expand().mul(&r.expand(), true);
        prop_assert!(lhs.folded().sub(&rhs.folded()).is_zero());
    }
}

#[test]
fn no_false_zero_on_nonzero_corpus() {
    let mut corpus = vec![word_poly(&[0]), word_poly(&[0, 1]), word_poly(&[0, 1, 2])];
    let mut anti = word_poly(&[0, 1]);
    anti.add_term(Monomial::word(vec![1, 0]), q(1));
    corpus.push(anti);
    let mut skew = word_poly(&[0, 1]);
    skew.add_term(Monomial::word(vec![1, 0]), q(-1));
    corpus.push(skew);
    for (i, p) in corpus.iter().enumerate() {
        assert!(!check_zero(p, 20, i as u64).unwrap().zero, "false zero on {p:?}");
    }
}

#[test]
fn squares_are_negative_norms() {
    let a = at(4, [0]);
    let x = eval(&word_poly(&[0, 0]), &a).unwrap();
    let [p, q_, r] = &a[&0];
    assert_eq!(x.c[0], -(p * p + q_ * q_ + r * r));
    assert!(x.c[1..].iter().all(|c| *c == BigRational::zero()));
}

#[test]
fn exact_and_integer_evaluation_agree() {
    let mut rng = common::rng(11);
    for seed in 0..20 {
        let p = common::random_any_poly(&mut rng, 4);
        let a = at(seed, 0..4);
        assert_eq!(eval(&p, &a).unwrap().is_zero(), eval_int(&p, &a).unwrap().is_zero());
    }
}

#[test]
fn three_bracket_is_pseudoscalar() {
    let p = BracketPolynomial::term(vec![common::bracket(&[0, 1, 2])], SquarePart::one(), q(1));
    let x = eval(&p, &at(2, 0..3)).unwrap();
    assert_eq!(x.c[0], BigRational::zero());
    assert_ne!(x.c[7], BigRational::zero());
}

#[test]
fn context_names_are_distinct() {
    assert!(VariableContext::new(&["a", "b", "a"]).is_err());
    let c = VariableContext::new(&["x", "y"]).unwrap();
    assert_eq!(c.lookup("y"), Some(1));
    assert_eq!(c.name(0), "x");
}

#[test]
fn ordering_and_canonical_form_examples() {
    assert!(Monomial::word(vec![0, 1]) < Monomial::word(vec![1, 0]));
    let a = Monomial::new(vec![1], SquarePart::single(0, 1));
    let b = Monomial::word(vec![0, 0, 1]).canonical().to_vec();
    assert_eq!(a.canonical(), &b[..]);
    let mut sq = SquarePart::single(0, 1);
    sq.add(2, 1);
    assert_eq!(canonical_form(&[1, 2], &sq), vec![0, 0, 1, 2, 2, 2]);
    assert_eq!(canonical_form(&[0, 1, 2], &SquarePart::one()), vec![0, 1, 2]);
    assert_eq!(canonical_form(&[], &SquarePart::single(1, 1)), vec![1, 1]);
}

#[test]
fn reversion_examples() {
    assert_eq!(reversion(&[0, 1, 2]), (vec![2, 1, 0], 1));
    assert_eq!(reversion(&[]), (vec![], 1));
    let w = vec![3, 0, 2, 2];
    assert_eq!(reversion(&reversion(&w).0).0, w);
}

#[test]
fn bracket_leader_examples() {
    assert_eq!(bracket_leader(&BracketFactor::new(vec![0, 2, 1])), (vec![1, 2, 0], -1));
    assert_eq!(bracket_leader(&BracketFactor::new(vec![0, 1])), (vec![1, 0], 1));
    assert_eq!(bracket_leader(&BracketFactor::new(vec![0, 1, 0])), (vec![0, 1, 0], 1));
}

#[test]
fn orient_brackets_examples() {
    let term = |ws: Vec<Word>, c: i64| BracketTerm { coef: q(c), monomial: BracketMonomial::brackets(ws, SquarePart::one()) };
    assert_eq!(orient_brackets(&term(vec![vec![0, 2, 1]], 1)), term(vec![vec![1, 2, 0]], -1));
    assert_eq!(orient_brackets(&term(vec![vec![1, 0]], 1)), term(vec![vec![1, 0]], 1));
    assert_eq!(orient_brackets(&term(vec![vec![0, 1], vec![0, 2]], 2)), term(vec![vec![1, 0], vec![2, 0]], 2));
}
