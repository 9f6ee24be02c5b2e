//! Value types: variables, square parts, monomials, polynomials, bracket terms.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// A variable is its rank in the context order.
pub type Var = u16;
pub type Word = Vec<Var>;
pub type Coef = BigRational;

pub fn q(n: i64) -> Coef {
    BigRational::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Coef {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `(-1)^n`
pub fn parity_sign(n: usize) -> i64 {
    if n.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

pub fn pow2(k: i32) -> Coef {
    if k >= 0 {
        BigRational::from_integer(BigInt::one() << k as usize)
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << (-k) as usize)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariableContext {
    names: Vec<String>,
    multiset: BTreeMap<Var, u32>,
}

impl VariableContext {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let names: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
        for (i, a) in names.iter().enumerate() {
            if a.is_empty() {
                return Err(Error::Context("empty variable name".into()));
            }
            if names[..i].contains(a) {
                return Err(Error::Context(format!("duplicate variable `{a}`")));
            }
        }
        if names.len() > Var::MAX as usize {
            return Err(Error::Context("too many variables".into()));
        }
        let multiset = (0..names.len() as Var).map(|v| (v, 1)).collect();
        Ok(VariableContext { names, multiset })
    }

    /// `v1 < v2 < ... < vn`
    pub fn numbered(n: usize) -> Self {
        let names: Vec<String> = (1..=n).map(|i| format!("v{i}")).collect();
        Self::new(&names).expect("distinct names")
    }

    pub fn with_multiset(mut self, multiset: BTreeMap<Var, u32>) -> Result<Self> {
        for (&v, &k) in &multiset {
            if v as usize >= self.names.len() {
                return Err(Error::Context(format!("multiset key {v} is not declared")));
            }
            if k == 0 {
                return Err(Error::Context("multiplicities must be positive".into()));
            }
        }
        self.multiset = multiset;
        Ok(self)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn multiset(&self) -> &BTreeMap<Var, u32> {
        &self.multiset
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn m(&self) -> usize {
        self.multiset.values().map(|&k| k as usize).sum()
    }

    pub fn name(&self, v: Var) -> &str {
        &self.names[v as usize]
    }

    pub fn lookup(&self, name: &str) -> Option<Var> {
        self.names.iter().position(|s| s == name).map(|i| i as Var)
    }

    pub fn check_word(&self, w: &[Var]) -> Result<()> {
        match w.iter().find(|&&v| v as usize >= self.names.len()) {
            Some(v) => Err(Error::Context(format!("unknown variable index {v}"))),
            None => Ok(()),
        }
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> {
        0..self.names.len() as Var
    }
}

/// Central factor `∏ v^{2k}`, stored as pair counts.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SquarePart(BTreeMap<Var, u32>);

impl SquarePart {
    pub fn one() -> Self {
        SquarePart(BTreeMap::new())
    }

    pub fn single(v: Var, pairs: u32) -> Self {
        let mut s = Self::one();
        s.add(v, pairs);
        s
    }

    pub fn add(&mut self, v: Var, pairs: u32) {
        if pairs > 0 {
            *self.0.entry(v).or_insert(0) += pairs;
        }
    }

    pub fn merge(&mut self, other: &SquarePart) {
        for (&v, &k) in &other.0 {
            self.add(v, k);
        }
    }

    pub fn product(&self, other: &SquarePart) -> SquarePart {
        let mut s = self.clone();
        s.merge(other);
        s
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.0.values().map(|&k| 2 * k as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, u32)> + '_ {
        self.0.iter().map(|(&v, &k)| (v, k))
    }

    pub fn pairs(&self, v: Var) -> u32 {
        self.0.get(&v).copied().unwrap_or(0)
    }
}

/// Removes adjacent equal pairs into the square part, cascading.
pub fn fold_word(w: &[Var], squares: &mut SquarePart) -> Word {
    let mut out: Word = Vec::with_capacity(w.len());
    for &v in w {
        if out.last() == Some(&v) {
            out.pop();
            squares.add(v, 1);
        } else {
            out.push(v);
        }
    }
    out
}

/// Inserts each square run before the first left variable above it.
pub fn canonical_form(left: &[Var], squares: &SquarePart) -> Word {
    let mut g: Word = left.to_vec();
    for (x, r) in squares.iter() {
        let t = (0..g.len()).find(|&t| g[t] > x && (t == 0 || g[t - 1] <= x));
        let at = t.unwrap_or(g.len());
        g.splice(at..at, std::iter::repeat_n(x, 2 * r as usize));
    }
    g
}

/// `w†`; the conjugate sign `(-1)^k` is left to callers.
pub fn reversion(w: &[Var]) -> (Word, i64) {
    (w.iter().rev().copied().collect(), 1)
}

pub fn is_ascending(w: &[Var]) -> bool {
    w.windows(2).all(|p| p[0] < p[1])
}

pub fn is_non_descending(w: &[Var]) -> bool {
    w.windows(2).all(|p| p[0] <= p[1])
}

/// A monic monomial `left □ squares`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    left: Word,
    squares: SquarePart,
    key: Word,
}

impl Monomial {
    pub fn new(left: Word, squares: SquarePart) -> Self {
        let key = canonical_form(&left, &squares);
        Monomial { left, squares, key }
    }

    pub fn word(left: Word) -> Self {
        Self::new(left, SquarePart::one())
    }

    /// Folds adjacent equal pairs of `left` into the square part.
    pub fn folded(left: &[Var], squares: SquarePart) -> Self {
        let mut s = squares;
        let l = fold_word(left, &mut s);
        Self::new(l, s)
    }

    pub fn one() -> Self {
        Self::word(Vec::new())
    }

    pub fn left(&self) -> &[Var] {
        &self.left
    }

    pub fn squares(&self) -> &SquarePart {
        &self.squares
    }

    pub fn canonical(&self) -> &[Var] {
        &self.key
    }

    pub fn degree(&self) -> usize {
        self.key.len()
    }

    pub fn is_folded(&self) -> bool {
        self.left.windows(2).all(|p| p[0] != p[1])
    }

    /// Multiplicity of every variable.
    pub fn content(&self) -> BTreeMap<Var, u32> {
        let mut c = BTreeMap::new();
        for &v in &self.key {
            *c.entry(v).or_insert(0) += 1;
        }
        c
    }

    pub fn mul(&self, other: &Monomial, fold: bool) -> Monomial {
        let mut left = self.left.clone();
        left.extend_from_slice(&other.left);
        let s = self.squares.product(&other.squares);
        if fold {
            Monomial::folded(&left, s)
        } else {
            Monomial::new(left, s)
        }
    }
}

/// The monomial order: degree, then lex of canonical forms.
pub fn compare(a: &Monomial, b: &Monomial) -> Ordering {
    a.key.len().cmp(&b.key.len()).then_with(|| a.key.cmp(&b.key))
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        compare(self, other)
            .then_with(|| self.left.cmp(&other.left))
            .then_with(|| self.squares.cmp(&other.squares))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Exact-rational polynomial in vector variables.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct VVPolynomial {
    terms: BTreeMap<Monomial, Coef>,
}

impl VVPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(m: Monomial, c: Coef) -> Self {
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, Coef)>>(it: I) -> Self {
        let mut p = Self::zero();
        for (m, c) in it {
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: Coef) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    pub fn add_scaled(&mut self, other: &VVPolynomial, c: &Coef) {
        for (m, d) in &other.terms {
            self.add_term(m.clone(), d * c);
        }
    }

    pub fn scaled(&self, c: &Coef) -> VVPolynomial {
        let mut p = Self::zero();
        p.add_scaled(self, c);
        p
    }

    pub fn sub(&self, other: &VVPolynomial) -> VVPolynomial {
        let mut p = self.clone();
        p.add_scaled(other, &-Coef::one());
        p
    }

    pub fn mul(&self, other: &VVPolynomial, fold: bool) -> VVPolynomial {
        let mut p = Self::zero();
        for (a, c) in &self.terms {
            for (b, d) in &other.terms {
                p.add_term(a.mul(b, fold), c * d);
            }
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Coef)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> BTreeMap<Monomial, Coef> {
        self.terms
    }

    pub fn coefficient(&self, m: &Monomial) -> Coef {
        self.terms.get(m).cloned().unwrap_or_else(Coef::zero)
    }

    pub fn leading(&self) -> Option<(&Monomial, &Coef)> {
        self.terms.iter().next_back()
    }

    pub fn pop_leading(&mut self) -> Option<(Monomial, Coef)> {
        self.terms.pop_last()
    }

    /// Folds every term; value-preserving in the square-free ring.
    pub fn folded(&self) -> VVPolynomial {
        Self::from_terms(
            self.terms
                .iter()
                .map(|(m, c)| (Monomial::folded(m.left(), m.squares().clone()), c.clone())),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BracketFactor {
    entries: Word,
}

impl BracketFactor {
    pub fn new(entries: Word) -> Self {
        BracketFactor { entries }
    }

    pub fn entries(&self) -> &[Var] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `2[A] = A + (-1)^a A†` as a vector-variable polynomial.
    pub fn expand(&self) -> VVPolynomial {
        let a = self.entries.len();
        match a {
            0 => VVPolynomial::monomial(Monomial::one(), q(1)),
            1 => VVPolynomial::zero(),
            _ => {
                let mut p = VVPolynomial::monomial(Monomial::word(self.entries.clone()), qf(1, 2));
                let rev = reversion(&self.entries).0;
                p.add_term(Monomial::word(rev), qf(parity_sign(a), 2));
                p
            }
        }
    }
}

/// The higher of `A` and `A†`, with `(-1)^a` when the reverse wins.
pub fn bracket_leader(f: &BracketFactor) -> (Word, i64) {
    let (rev, _) = reversion(&f.entries);
    if rev > f.entries {
        (rev, parity_sign(f.entries.len()))
    } else {
        (f.entries.clone(), 1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    Var(Var),
    Bracket(BracketFactor),
}

impl Atom {
    pub fn len(&self) -> usize {
        match self {
            Atom::Var(_) => 1,
            Atom::Bracket(b) => b.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Monic bracket monomial: atoms left of `□` and a square part.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BracketMonomial {
    atoms: Vec<Atom>,
    squares: SquarePart,
    key: Word,
}

impl BracketMonomial {
    pub fn new(atoms: Vec<Atom>, squares: SquarePart) -> Self {
        let rep = representative_of(&atoms);
        let key = canonical_form(&rep, &squares);
        BracketMonomial { atoms, squares, key }
    }

    pub fn brackets(factors: Vec<Word>, squares: SquarePart) -> Self {
        Self::new(
            factors.into_iter().map(|w| Atom::Bracket(BracketFactor::new(w))).collect(),
            squares,
        )
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn squares(&self) -> &SquarePart {
        &self.squares
    }

    pub fn representative(&self) -> Word {
        representative_of(&self.atoms)
    }

    pub fn canonical(&self) -> &[Var] {
        &self.key
    }

    pub fn degree(&self) -> usize {
        self.key.len()
    }

    pub fn is_bracket_only(&self) -> bool {
        self.atoms.iter().all(|a| matches!(a, Atom::Bracket(_)))
    }

    /// Full expansion of every bracket into its defining binomial.
    pub fn expand(&self) -> VVPolynomial {
        let mut acc = VVPolynomial::monomial(Monomial::new(Vec::new(), self.squares.clone()), q(1));
        for a in &self.atoms {
            let f = match a {
                Atom::Var(v) => VVPolynomial::monomial(Monomial::word(vec![*v]), q(1)),
                Atom::Bracket(b) => b.expand(),
            };
            acc = acc.mul(&f, false);
            if acc.is_zero() {
                break;
            }
        }
        acc
    }
}

fn representative_of(atoms: &[Atom]) -> Word {
    let mut w = Vec::new();
    for a in atoms {
        match a {
            Atom::Var(v) => w.push(*v),
            Atom::Bracket(b) => w.extend_from_slice(b.entries()),
        }
    }
    w
}

impl Ord for BracketMonomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key
            .len()
            .cmp(&other.key.len())
            .then_with(|| self.key.cmp(&other.key))
            .then_with(|| self.atoms.cmp(&other.atoms))
            .then_with(|| self.squares.cmp(&other.squares))
    }
}

impl PartialOrd for BracketMonomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BracketTerm {
    pub coef: Coef,
    pub monomial: BracketMonomial,
}

/// Sum of bracket terms, like terms merged structurally.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct BracketPolynomial {
    terms: BTreeMap<BracketMonomial, Coef>,
}

impl BracketPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(m: BracketMonomial, c: Coef) -> Self {
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    /// A single term; length-1 brackets annihilate it, empty brackets vanish.
    pub fn term(atoms: Vec<Atom>, squares: SquarePart, c: Coef) -> Self {
        let mut kept = Vec::with_capacity(atoms.len());
        for a in atoms {
            match &a {
                Atom::Bracket(b) if b.len() == 1 => return Self::zero(),
                Atom::Bracket(b) if b.is_empty() => {}
                _ => kept.push(a),
            }
        }
        Self::monomial(BracketMonomial::new(kept, squares), c)
    }

    pub fn from_terms<I: IntoIterator<Item = (BracketMonomial, Coef)>>(it: I) -> Self {
        let mut p = Self::zero();
        for (m, c) in it {
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: BracketMonomial, c: Coef) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    pub fn add_scaled(&mut self, other: &BracketPolynomial, c: &Coef) {
        for (m, d) in &other.terms {
            self.add_term(m.clone(), d * c);
        }
    }

    pub fn scaled(&self, c: &Coef) -> Self {
        let mut p = Self::zero();
        p.add_scaled(self, c);
        p
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut p = self.clone();
        p.add_scaled(other, &-Coef::one());
        p
    }

    /// Product, concatenating atoms and merging squares.
    pub fn mul(&self, other: &Self) -> Self {
        let mut p = Self::zero();
        for (a, c) in &self.terms {
            for (b, d) in &other.terms {
                let mut atoms = a.atoms.clone();
                atoms.extend(b.atoms.iter().cloned());
                p.add_term(BracketMonomial::new(atoms, a.squares.product(&b.squares)), c * d);
            }
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&BracketMonomial, &Coef)> {
        self.terms.iter()
    }

    pub fn to_terms(&self) -> Vec<BracketTerm> {
        self.terms
            .iter()
            .rev()
            .map(|(m, c)| BracketTerm { coef: c.clone(), monomial: m.clone() })
            .collect()
    }

    pub fn expand(&self) -> VVPolynomial {
        let mut p = VVPolynomial::zero();
        for (m, c) in &self.terms {
            p.add_scaled(&m.expand(), c);
        }
        p
    }

    pub fn from_vv(p: &VVPolynomial) -> Self {
        Self::from_terms(p.terms().map(|(m, c)| {
            let atoms = m.left().iter().map(|&v| Atom::Var(v)).collect();
            (BracketMonomial::new(atoms, m.squares().clone()), c.clone())
        }))
    }

    pub fn variables(&self) -> BTreeMap<Var, u32> {
        let mut out = BTreeMap::new();
        for m in self.terms.keys() {
            let mut c: BTreeMap<Var, u32> = BTreeMap::new();
            for &v in m.canonical() {
                *c.entry(v).or_insert(0) += 1;
            }
            for (v, k) in c {
                let e = out.entry(v).or_insert(0);
                *e = (*e).max(k);
            }
        }
        out
    }
}

/// Every bracket stored as its leader, signs pushed into the coefficient.
pub fn orient_brackets(t: &BracketTerm) -> BracketTerm {
    let mut coef = t.coef.clone();
    let atoms = t
        .monomial
        .atoms()
        .iter()
        .map(|a| match a {
            Atom::Bracket(b) if b.len() >= 2 => {
                let (w, s) = bracket_leader(b);
                if s < 0 {
                    coef = -coef.clone();
                }
                Atom::Bracket(BracketFactor::new(w))
            }
            other => other.clone(),
        })
        .collect();
    BracketTerm { coef, monomial: BracketMonomial::new(atoms, t.monomial.squares().clone()) }
}

/// Rows of variables; validity lives with straightening.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Tableau {
    pub rows: Vec<Word>,
}

pub fn coef_to_string(c: &Coef) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

pub fn is_negative(c: &Coef) -> bool {
    c.is_negative()
}
