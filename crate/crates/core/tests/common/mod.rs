#![allow(dead_code)]

use clifford_bracket::model::*;
use clifford_bracket::straighten::{brackets, caianiello_expand, Identity};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn bracket(w: &[Var]) -> Atom {
    Atom::Bracket(BracketFactor::new(w.to_vec()))
}

pub fn small_coef(rng: &mut ChaCha8Rng) -> Coef {
    loop {
        let n: i64 = rng.gen_range(-4..=4);
        if n != 0 {
            return q(n) / q(rng.gen_range(1..=3));
        }
    }
}

/// Bracket-only polynomial: up to 3 terms, each at most `max_factors`
/// brackets of total degree at most `max_deg` over `n` variables.
pub fn random_bracket_poly(rng: &mut ChaCha8Rng, n: Var, max_deg: usize, max_factors: usize) -> BracketPolynomial {
    let mut p = BracketPolynomial::zero();
    for _ in 0..rng.gen_range(1..=3) {
        let mut ws: Vec<Word> = Vec::new();
        let mut deg = 0;
        for _ in 0..rng.gen_range(1..=max_factors) {
            let len = rng.gen_range(2..=4);
            if deg + len > max_deg {
                break;
            }
            deg += len;
            ws.push((0..len).map(|_| rng.gen_range(0..n)).collect());
        }
        if ws.is_empty() {
            continue;
        }
        p.add_scaled(&brackets(q(1), &ws), &small_coef(rng));
    }
    p
}

/// Any polynomial the printer can show: bare variables, brackets, squares,
/// rational coefficients.
pub fn random_any_poly(rng: &mut ChaCha8Rng, n: Var) -> BracketPolynomial {
    let mut p = BracketPolynomial::zero();
    for _ in 0..rng.gen_range(0..=4) {
        let mut atoms = Vec::new();
        for _ in 0..rng.gen_range(0..=3) {
            if rng.gen_bool(0.4) {
                atoms.push(Atom::Var(rng.gen_range(0..n)));
            } else {
                let len = rng.gen_range(2..=4);
                let w: Word = (0..len).map(|_| rng.gen_range(0..n)).collect();
                atoms.push(bracket(&w));
            }
        }
        let sq = if rng.gen_bool(0.3) { SquarePart::single(rng.gen_range(0..n), rng.gen_range(1..=2)) } else { SquarePart::one() };
        p.add_scaled(&BracketPolynomial::term(atoms, sq, q(1)), &small_coef(rng));
    }
    p
}

/// Random split of `len` into parts of size at least 2.
fn random_parts(rng: &mut ChaCha8Rng, len: usize) -> Vec<usize> {
    let mut parts = Vec::new();
    let mut left = len;
    while left > 0 {
        if left <= 3 {
            parts.push(left);
            break;
        }
        let k = rng.gen_range(2..=left - 2).min(left);
        parts.push(k);
        left -= k;
    }
    parts
}

/// Degree-`m` bracket polynomial whose terms all use one multiset of `m`
/// symbols over at most 4 variables.
pub fn random_uni_input(rng: &mut ChaCha8Rng, m: usize) -> BracketPolynomial {
    let k = rng.gen_range(2..=m.min(4)) as Var;
    let mut content: Word = (0..k).collect();
    while content.len() < m {
        content.push(rng.gen_range(0..k));
    }
    let mut p = BracketPolynomial::zero();
    for _ in 0..rng.gen_range(1..=4) {
        let mut w = content.clone();
        w.shuffle(rng);
        let mut ws = Vec::new();
        let mut at = 0;
        for len in random_parts(rng, m) {
            ws.push(w[at..at + len].to_vec());
            at += len;
        }
        p.add_scaled(&brackets(q(1), &ws), &small_coef(rng));
    }
    p
}

/// The term with atom `i` replaced by `with`.
fn replace_atom(m: &BracketMonomial, c: &Coef, i: usize, with: &BracketPolynomial) -> BracketPolynomial {
    let mut left: Vec<Atom> = m.atoms()[..i].to_vec();
    let right: Vec<Atom> = m.atoms()[i + 1..].to_vec();
    let l = BracketPolynomial::term(std::mem::take(&mut left), m.squares().clone(), c.clone());
    let r = BracketPolynomial::term(right, SquarePart::one(), q(1));
    l.mul(with).mul(&r)
}

/// Rewrites every term of `p` by random symmetries and expansions and adds
/// random multiples of bracket-only identity instances: the value never
/// changes.
pub fn rewrite(rng: &mut ChaCha8Rng, p: &BracketPolynomial, n: usize) -> BracketPolynomial {
    let mut out = rewrite_symmetries(rng, p);
    for _ in 0..rng.gen_range(1..=2) {
        loop {
            let id = *Identity::ALL.choose(rng).unwrap();
            let (l, r) = id.instance(rng, n, 2);
            let d = l.sub(&r);
            if d.terms().all(|(m, _)| m.is_bracket_only()) {
                out.add_scaled(&d, &small_coef(rng));
                break;
            }
        }
    }
    out
}

/// Shift, reversal, reordering and Caianiello expansion on one bracket of
/// every term; content and degree are kept.
pub fn rewrite_symmetries(rng: &mut ChaCha8Rng, p: &BracketPolynomial) -> BracketPolynomial {
    let mut out = BracketPolynomial::zero();
    for (m, c) in p.terms() {
        let idx: Vec<usize> =
            m.atoms().iter().enumerate().filter(|(_, a)| matches!(a, Atom::Bracket(_))).map(|(i, _)| i).collect();
        let Some(&i) = idx.choose(rng) else {
            out.add_term(m.clone(), c.clone());
            continue;
        };
        let Atom::Bracket(b) = &m.atoms()[i] else { unreachable!() };
        let w = b.entries().to_vec();
        let with = match rng.gen_range(0..4) {
            0 => {
                let mut s = w.clone();
                s.rotate_left(rng.gen_range(1..=w.len()) % w.len());
                brackets(q(1), &[s])
            }
            1 => {
                let s: Word = w.iter().rev().copied().collect();
                brackets(q(parity_sign(w.len())), &[s])
            }
            2 if w.len() >= 4 => caianiello_expand(b, None).expect("default partition"),
            _ => {
                let mut atoms = m.atoms().to_vec();
                atoms.shuffle(rng);
                out.add_scaled(&BracketPolynomial::term(atoms, m.squares().clone(), q(1)), c);
                continue;
            }
        };
        out.add_scaled(&replace_atom(m, c, i, &with), &q(1));
    }
    out
}
