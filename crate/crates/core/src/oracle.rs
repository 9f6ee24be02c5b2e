//! Exact evaluation in the Clifford algebra of `R^{-3}`, randomized zero tests,
//! and brute-force checks for small instances.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gbasis::{self, RingKind};
use crate::linalg::Echelon;
use crate::model::{
    Atom, BracketPolynomial, Coef, Monomial, SquarePart, VVPolynomial, Var, Word,
};

/// Blade bitmasks in the order `1, e1, e2, e3, e12, e13, e23, e123`.
pub const BASIS: [usize; 8] = [0b000, 0b001, 0b010, 0b100, 0b011, 0b101, 0b110, 0b111];

fn grade(blade: usize) -> u32 {
    blade.count_ones()
}

/// Sign of `e_a e_b` with `e_i^2 = -1`.
fn blade_sign(a: usize, b: usize) -> bool {
    let mut swaps = 0;
    let mut x = a >> 1;
    while x != 0 {
        swaps += (x & b).count_ones();
        x >>= 1;
    }
    let metric = (a & b).count_ones();
    (swaps + metric) % 2 == 1
}

/// Element of `Cl(0,3)` indexed by blade bitmask.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mv<T> {
    pub c: [T; 8],
}

pub type Multivector8 = Mv<BigRational>;

pub trait Scalar:
    Clone + Zero + One + PartialEq + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
}

impl<T> Scalar for T where
    T: Clone + Zero + One + PartialEq + Add<Output = T> + Sub<Output = T> + Mul<Output = T> + Neg<Output = T>
{
}

impl<T: Scalar> Mv<T> {
    pub fn zero() -> Self {
        Mv { c: std::array::from_fn(|_| T::zero()) }
    }

    pub fn scalar(x: T) -> Self {
        let mut m = Self::zero();
        m.c[0] = x;
        m
    }

    pub fn vector(x: T, y: T, z: T) -> Self {
        let mut m = Self::zero();
        m.c[0b001] = x;
        m.c[0b010] = y;
        m.c[0b100] = z;
        m
    }

    pub fn basis(blade: usize) -> Self {
        let mut m = Self::zero();
        m.c[blade] = T::one();
        m
    }

    /// Coordinates in the order `1, e1, e2, e3, e12, e13, e23, e123`.
    pub fn coords(&self) -> [T; 8] {
        std::array::from_fn(|i| self.c[BASIS[i]].clone())
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for a in 0..8 {
            if self.c[a].is_zero() {
                continue;
            }
            for b in 0..8 {
                if other.c[b].is_zero() {
                    continue;
                }
                let p = self.c[a].clone() * other.c[b].clone();
                let k = a ^ b;
                out.c[k] = if blade_sign(a, b) { out.c[k].clone() - p } else { out.c[k].clone() + p };
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        Mv { c: std::array::from_fn(|i| self.c[i].clone() + other.c[i].clone()) }
    }

    pub fn scale(&self, x: &T) -> Self {
        Mv { c: std::array::from_fn(|i| self.c[i].clone() * x.clone()) }
    }

    /// Grade signs `(+, -, -, +)`.
    pub fn conjugate(&self) -> Self {
        Mv {
            c: std::array::from_fn(|i| match grade(i) {
                1 | 2 => -self.c[i].clone(),
                _ => self.c[i].clone(),
            }),
        }
    }

    /// `[Q] = (Q + conj Q)/2`: the grade 0 and 3 parts.
    pub fn bracket_of(&self) -> CenterValue<T> {
        CenterValue { scalar: self.c[0].clone(), pseudo: self.c[7].clone() }
    }

    pub fn center(&self) -> Self {
        let mut m = Self::zero();
        m.c[0] = self.c[0].clone();
        m.c[7] = self.c[7].clone();
        m
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CenterValue<T> {
    pub scalar: T,
    pub pseudo: T,
}

impl<T: Scalar> CenterValue<T> {
    pub fn to_mv(&self) -> Mv<T> {
        let mut m = Mv::zero();
        m.c[0] = self.scalar.clone();
        m.c[7] = self.pseudo.clone();
        m
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.to_mv().mul(&other.to_mv()).bracket_of()
    }
}

pub fn mul(a: &Multivector8, b: &Multivector8) -> Multivector8 {
    a.mul(b)
}

pub fn conjugate(a: &Multivector8) -> Multivector8 {
    a.conjugate()
}

pub fn bracket_of(a: &Multivector8) -> CenterValue<BigRational> {
    a.bracket_of()
}

/// Each variable mapped to a rational vector.
pub type Assignment = BTreeMap<Var, [Coef; 3]>;

fn vector_of<T: Scalar>(asg: &BTreeMap<Var, [T; 3]>, v: Var) -> Result<Mv<T>> {
    let x = asg.get(&v).ok_or_else(|| Error::Domain(format!("variable {v} is not assigned")))?;
    Ok(Mv::vector(x[0].clone(), x[1].clone(), x[2].clone()))
}

fn norm2<T: Scalar>(x: &[T; 3]) -> T {
    x[0].clone() * x[0].clone() + x[1].clone() * x[1].clone() + x[2].clone() * x[2].clone()
}

fn eval_word<T: Scalar>(asg: &BTreeMap<Var, [T; 3]>, w: &[Var], squares: &SquarePart) -> Result<Mv<T>> {
    let mut acc = Mv::scalar(T::one());
    for &v in w {
        acc = acc.mul(&vector_of(asg, v)?);
    }
    for (v, k) in squares.iter() {
        let x = asg.get(&v).ok_or_else(|| Error::Domain(format!("variable {v} is not assigned")))?;
        let s = -norm2(x);
        for _ in 0..k {
            acc = acc.scale(&s);
        }
    }
    Ok(acc)
}

/// Something the oracle can evaluate over any exact scalar ring.
pub trait Evaluate {
    fn eval_with<T: Scalar>(
        &self,
        asg: &BTreeMap<Var, [T; 3]>,
        coef: &dyn Fn(&Coef) -> T,
    ) -> Result<Mv<T>>;
    fn variables(&self) -> BTreeSet<Var>;
    fn coefficients(&self) -> Vec<Coef>;
}

impl Evaluate for VVPolynomial {
    fn eval_with<T: Scalar>(
        &self,
        asg: &BTreeMap<Var, [T; 3]>,
        coef: &dyn Fn(&Coef) -> T,
    ) -> Result<Mv<T>> {
        let mut acc = Mv::zero();
        for (m, c) in self.terms() {
            acc = acc.add(&eval_word(asg, m.left(), m.squares())?.scale(&coef(c)));
        }
        Ok(acc)
    }

    fn variables(&self) -> BTreeSet<Var> {
        self.terms().flat_map(|(m, _)| m.canonical().to_vec()).collect()
    }

    fn coefficients(&self) -> Vec<Coef> {
        self.terms().map(|(_, c)| c.clone()).collect()
    }
}

impl Evaluate for BracketPolynomial {
    fn eval_with<T: Scalar>(
        &self,
        asg: &BTreeMap<Var, [T; 3]>,
        coef: &dyn Fn(&Coef) -> T,
    ) -> Result<Mv<T>> {
        let mut acc = Mv::zero();
        for (m, c) in self.terms() {
            let mut t = eval_word(asg, &[], m.squares())?;
            for a in m.atoms() {
                let f = match a {
                    Atom::Var(v) => vector_of(asg, *v)?,
                    Atom::Bracket(b) => eval_word(asg, b.entries(), &SquarePart::one())?.center(),
                };
                t = t.mul(&f);
            }
            acc = acc.add(&t.scale(&coef(c)));
        }
        Ok(acc)
    }

    fn variables(&self) -> BTreeSet<Var> {
        self.terms().flat_map(|(m, _)| m.canonical().to_vec()).collect()
    }

    fn coefficients(&self) -> Vec<Coef> {
        self.terms().map(|(_, c)| c.clone()).collect()
    }
}

/// A vector-variable polynomial read as uni-bracket terms `[w] □ s`.
pub struct Center<'a>(pub &'a VVPolynomial);

impl Evaluate for Center<'_> {
    fn eval_with<T: Scalar>(
        &self,
        asg: &BTreeMap<Var, [T; 3]>,
        coef: &dyn Fn(&Coef) -> T,
    ) -> Result<Mv<T>> {
        let mut acc = Mv::zero();
        for (m, c) in self.0.terms() {
            let w = eval_word(asg, m.left(), &SquarePart::one())?.center();
            let s = eval_word(asg, &[], m.squares())?;
            acc = acc.add(&w.mul(&s).scale(&coef(c)));
        }
        Ok(acc)
    }

    fn variables(&self) -> BTreeSet<Var> {
        self.0.variables()
    }

    fn coefficients(&self) -> Vec<Coef> {
        self.0.coefficients()
    }
}

/// Exact evaluation at a rational assignment.
pub fn eval<E: Evaluate>(p: &E, asg: &Assignment) -> Result<Multivector8> {
    p.eval_with(asg, &|c: &Coef| c.clone())
}

pub fn random_assignment(vars: &BTreeSet<Var>, rng: &mut ChaCha8Rng) -> Assignment {
    vars.iter()
        .map(|&v| {
            let x: [Coef; 3] = std::array::from_fn(|_| {
                let n: i64 = rng.gen_range(-9..=9);
                let d: i64 = rng.gen_range(1..=7);
                BigRational::new(BigInt::from(n), BigInt::from(d))
            });
            (v, x)
        })
        .collect()
}

/// Clears denominators per variable.
fn integer_scaled(asg: &Assignment) -> BTreeMap<Var, [BigInt; 3]> {
    asg.iter()
        .map(|(&v, x)| {
            let l = x.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
            let y: [BigInt; 3] =
                std::array::from_fn(|i| (&x[i] * BigRational::from_integer(l.clone())).to_integer());
            (v, y)
        })
        .collect()
}

/// Integer evaluation of a positive multiple of `p`, at `asg` with every vector
/// rescaled to integer coordinates.
pub fn eval_int<E: Evaluate>(p: &E, asg: &Assignment) -> Result<Mv<BigInt>> {
    let int = integer_scaled(asg);
    let l = p.coefficients().iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let lq = BigRational::from_integer(l);
    p.eval_with(&int, &|c: &Coef| (c * &lq).to_integer())
}

#[derive(Clone, Debug, Serialize)]
pub struct ZeroCheck {
    pub zero: bool,
    pub trials: usize,
    /// First assignment with a nonzero value.
    pub witness: Option<Vec<(Var, [String; 3])>>,
}

/// Evaluates at `trials` seeded random points, exactly.
pub fn check_zero<E: Evaluate>(p: &E, trials: usize, seed: u64) -> Result<ZeroCheck> {
    let vars = p.variables();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let asg = random_assignment(&vars, &mut rng);
        if !eval_int(p, &asg)?.is_zero() {
            let witness = asg
                .iter()
                .map(|(&v, x)| (v, std::array::from_fn(|i| x[i].to_string())))
                .collect();
            return Ok(ZeroCheck { zero: false, trials, witness: Some(witness) });
        }
    }
    Ok(ZeroCheck { zero: true, trials, witness: None })
}

/// Outcome of exhaustive rewriting from one monomial.
#[derive(Clone, Debug)]
pub struct Closure {
    /// Every normal form reachable by some rewriting order.
    pub fixed_points: Vec<VVPolynomial>,
    pub states: usize,
}

impl Closure {
    pub fn unique(&self) -> Option<&VVPolynomial> {
        match self.fixed_points.as_slice() {
            [p] => Some(p),
            _ => None,
        }
    }
}

/// Largest number of distinct fixed points tracked per monomial.
const CLOSURE_BRANCH_CAP: usize = 64;

/// Reachable normal forms of `mono` when any rule may fire at any position.
///
/// The fixed points of a monomial are the normal forms of every one-step
/// rewrite, each summand reduced independently in every possible way.
pub fn brute_force_closure(mono: &Monomial, kind: RingKind, state_cap: usize) -> Result<Closure> {
    let mut memo: HashMap<Monomial, Vec<VVPolynomial>> = HashMap::new();
    let fixed_points = closure_of(mono, kind, state_cap, &mut memo)?;
    Ok(Closure { fixed_points, states: memo.len() })
}

fn closure_of(
    m: &Monomial,
    kind: RingKind,
    cap: usize,
    memo: &mut HashMap<Monomial, Vec<VVPolynomial>>,
) -> Result<Vec<VVPolynomial>> {
    if let Some(r) = memo.get(m) {
        return Ok(r.clone());
    }
    if memo.len() >= cap {
        return Err(Error::StateSpace(format!("more than {cap} monomials in the rewriting closure")));
    }
    let wins = gbasis::all_leaders(kind, m.left());
    let mut out: Vec<VVPolynomial> = Vec::new();
    if wins.is_empty() {
        out.push(VVPolynomial::monomial(m.clone(), Coef::one()));
    }
    for win in wins {
        let rhs = gbasis::apply_window(kind, m, win);
        let mut acc = vec![VVPolynomial::zero()];
        for (t, c) in rhs.terms() {
            let sub = closure_of(t, kind, cap, memo)?;
            let mut next = Vec::new();
            for a in &acc {
                for s in &sub {
                    let mut x = a.clone();
                    x.add_scaled(s, c);
                    if !next.contains(&x) {
                        next.push(x);
                    }
                }
            }
            next.truncate(CLOSURE_BRANCH_CAP);
            acc = next;
        }
        for x in acc {
            if !out.contains(&x) {
                out.push(x);
            }
        }
        out.truncate(CLOSURE_BRANCH_CAP);
    }
    memo.insert(m.clone(), out.clone());
    Ok(out)
}

/// All words of length `len` over `0..n`, optionally with distinct letters.
pub fn all_words(n: usize, len: usize, distinct: bool) -> Vec<Word> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        let mut next = Vec::new();
        for w in &out {
            for v in 0..n as Var {
                if distinct && w.contains(&v) {
                    continue;
                }
                let mut x = w.clone();
                x.push(v);
                next.push(x);
            }
        }
        out = next;
    }
    out
}

/// The monomials of degree `m` of a ring kind over `n` variables.
pub fn all_monomials(kind: RingKind, n: usize, m: usize) -> Vec<Monomial> {
    match kind {
        RingKind::Multilinear => all_words(n, m, true).into_iter().map(Monomial::word).collect(),
        RingKind::General => all_words(n, m, false).into_iter().map(Monomial::word).collect(),
        RingKind::SquareFree => {
            let mut set = BTreeSet::new();
            for w in all_words(n, m, false) {
                set.insert(Monomial::folded(&w, SquarePart::one()));
            }
            set.into_iter().collect()
        }
    }
}

/// Instances of the defining generators V2, V3, V4 over `0..n`.
fn defining_generators(n: usize, distinct: bool) -> Vec<Vec<(i64, Word)>> {
    let ok = |idx: &[Var]| !distinct || idx.iter().collect::<BTreeSet<_>>().len() == idx.len();
    let mut out = Vec::new();
    for w in all_words(n, 2, false) {
        let (i, j) = (w[0], w[1]);
        if ok(&[i, j]) && !distinct {
            out.push(vec![(1, vec![i, i, j]), (-1, vec![j, i, i])]);
        }
    }
    for w in all_words(n, 3, false) {
        let (i, j, k) = (w[0], w[1], w[2]);
        if ok(&w) {
            out.push(vec![(1, vec![i, j, k]), (1, vec![j, i, k]), (-1, vec![k, i, j]), (-1, vec![k, j, i])]);
        }
    }
    for w in all_words(n, 4, false) {
        let (i, j, k, l) = (w[0], w[1], w[2], w[3]);
        if ok(&w) {
            out.push(vec![
                (1, vec![i, j, k, l]),
                (-1, vec![k, j, i, l]),
                (-1, vec![l, i, j, k]),
                (1, vec![l, k, j, i]),
            ]);
        }
    }
    out
}

/// Dimension of the degree-`m` component of the quotient by the syzygy ideal,
/// by rank of all products `l g r` with `g` a defining generator.
///
/// The square-free ring shares its quotient with the general one.
pub fn quotient_dimension(kind: RingKind, n: usize, m: usize) -> Result<usize> {
    let distinct = kind == RingKind::Multilinear;
    if n.pow(m as u32) > 4096 {
        return Err(Error::StateSpace(format!("degree {m} over {n} variables is too large")));
    }
    let words = all_words(n, m, distinct);
    let index: HashMap<&Word, usize> = words.iter().enumerate().map(|(i, w)| (w, i)).collect();
    let mut ech = Echelon::new();
    for g in defining_generators(n, distinct) {
        let d = g[0].1.len();
        if d > m {
            continue;
        }
        for l_len in 0..=m - d {
            for l in all_words(n, l_len, false) {
                for r in all_words(n, m - d - l_len, false) {
                    let mut v = vec![Coef::zero(); words.len()];
                    let mut inside = true;
                    for (c, w) in &g {
                        let full: Word = [&l[..], w, &r[..]].concat();
                        match index.get(&full) {
                            Some(&i) => v[i] += Coef::from_integer(BigInt::from(*c)),
                            None => inside = false,
                        }
                    }
                    if inside {
                        ech.insert(&v);
                    }
                }
            }
        }
    }
    Ok(words.len() - ech.rank())
}

/// Rank of the span of oracle values of `polys`, sampled at `points` random
/// assignments.
pub fn evaluation_rank<E: Evaluate>(polys: &[E], points: usize, seed: u64) -> Result<usize> {
    let vars: BTreeSet<Var> = polys.iter().flat_map(|p| p.variables()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let asgs: Vec<Assignment> = (0..points).map(|_| random_assignment(&vars, &mut rng)).collect();
    let mut ech = Echelon::new();
    for p in polys {
        let mut v = Vec::with_capacity(8 * points);
        for a in &asgs {
            v.extend(eval_int(p, a)?.coords().into_iter().map(BigRational::from_integer));
        }
        ech.insert(&v);
    }
    Ok(ech.rank())
}

/// Evaluation vector of a polynomial at fixed points, as rationals.
pub fn evaluation_vector<E: Evaluate>(p: &E, asgs: &[Assignment]) -> Result<Vec<Coef>> {
    let mut v = Vec::with_capacity(8 * asgs.len());
    for a in asgs {
        v.extend(eval(p, a)?.coords());
    }
    Ok(v)
}

/// The degree-`m` uni-bracket quotient for one content, by exhaustive
/// spanning of the removal ideal over `I□`-normal coordinates.
#[derive(Clone, Debug)]
pub struct UniQuotient {
    /// `I□`-normal monomials, highest first.
    coords: Vec<Monomial>,
    index: HashMap<Monomial, usize>,
    echelon: Echelon,
    reducer_kind: RingKind,
}

impl UniQuotient {
    pub fn new(content: &BTreeMap<Var, u32>) -> Result<Self> {
        let reducer = gbasis::Reducer::new(RingKind::SquareFree);
        let all = crate::unibracket::monomials_with_content(content);
        let mut coords: Vec<Monomial> = all.iter().filter(|t| reducer.is_reduced(t)).cloned().collect();
        coords.reverse();
        let index: HashMap<Monomial, usize> = coords.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        let mut q = UniQuotient { coords, index, echelon: Echelon::new(), reducer_kind: RingKind::SquareFree };
        for t in &all {
            let a = t.left().len();
            if a == 0 {
                continue;
            }
            let rev: Word = t.left().iter().rev().copied().collect();
            let sign = if a % 2 == 0 { -1 } else { 1 };
            let mut r = VVPolynomial::monomial(t.clone(), Coef::one());
            r.add_term(Monomial::new(rev, t.squares().clone()), Coef::from_integer(BigInt::from(sign)));
            let v = q.vector(&reducer.reduce(&r)?)?;
            q.echelon.insert(&v);
        }
        Ok(q)
    }

    fn vector(&self, p: &VVPolynomial) -> Result<Vec<Coef>> {
        let mut v = vec![Coef::zero(); self.coords.len()];
        for (m, c) in p.terms() {
            let i = self
                .index
                .get(m)
                .ok_or_else(|| Error::Invariant(format!("monomial {:?} outside the quotient", m.left())))?;
            v[*i] += c;
        }
        Ok(v)
    }

    pub fn dimension(&self) -> usize {
        self.coords.len() - self.echelon.rank()
    }

    /// Monomials not led by any element of the ideal.
    pub fn standard_monomials(&self) -> Vec<Monomial> {
        let zero = vec![Coef::zero(); self.coords.len()];
        self.coords
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                let mut e = zero.clone();
                e[*i] = Coef::one();
                self.echelon.reduce(&e)[*i] == Coef::one()
            })
            .map(|(_, m)| m.clone())
            .collect()
    }

    /// The lowest representative of `p` modulo `J□`.
    pub fn normal_form(&self, p: &VVPolynomial) -> Result<VVPolynomial> {
        let red = gbasis::Reducer::new(self.reducer_kind).reduce(&p.folded())?;
        let v = self.echelon.reduce(&self.vector(&red)?);
        Ok(VVPolynomial::from_terms(
            v.into_iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, c)| (self.coords[i].clone(), c)),
        ))
    }
}
