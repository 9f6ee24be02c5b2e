//! Uni-bracket polynomials: the Gröbner base `BG[M]` of the syzygy ideal
//! `J□[M]` and the lowest-representative normal form.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::One;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gbasis::{self, Reducer, RingKind};
use crate::model::{
    is_ascending, parity_sign, q, reversion, Atom, BracketFactor, BracketMonomial, BracketPolynomial,
    Coef, Monomial, SquarePart, VVPolynomial, Var, VariableContext, Word,
};

/// Multiplicity of each variable.
pub type Content = BTreeMap<Var, u32>;

/// Which R-family completes the base.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum RVariant {
    /// `R1□[0,0]`, `Sq1□[j,l]` and `R12□[j,l]`.
    #[default]
    Refined,
    /// `R1□[j,l]`.
    Uniform,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum BgFamily {
    S1,
    R1 { j: usize, l: usize },
    Sq1 { j: usize, l: usize },
    R12 { j: usize, l: usize },
}

impl fmt::Display for BgFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BgFamily::S1 => write!(f, "S1"),
            BgFamily::R1 { j, l } => write!(f, "R1[{j},{l}]"),
            BgFamily::Sq1 { j, l } => write!(f, "Sq1[{j},{l}]"),
            BgFamily::R12 { j, l } => write!(f, "R12[{j},{l}]"),
        }
    }
}

/// One element of `BG[M]` outside the vector-variable base.
#[derive(Clone, Debug)]
pub struct BgElement {
    pub family: BgFamily,
    /// The element as written, brackets unexpanded.
    pub source: BracketPolynomial,
    /// Its `I□`-normal form, scaled to leading coefficient 1.
    pub reduced: VVPolynomial,
}

impl BgElement {
    pub fn leader(&self) -> &Monomial {
        self.reduced.leading().expect("base elements are nonzero").0
    }
}

/// `G□[M]` together with the S1 and R-family elements for one content.
#[derive(Clone, Debug)]
pub struct UniGroebnerBase {
    pub content: Content,
    pub variant: RVariant,
    pub elements: BTreeMap<Monomial, BgElement>,
}

pub fn content_of(m: &Monomial) -> Content {
    m.content()
}

pub fn degree_of(c: &Content) -> usize {
    c.values().map(|&k| k as usize).sum()
}

/// Words with the given letter counts and no two equal neighbours.
fn fold_free_words(counts: &mut BTreeMap<Var, u32>, len: usize, cur: &mut Word, out: &mut Vec<Word>) {
    if cur.len() == len {
        out.push(cur.clone());
        return;
    }
    let keys: Vec<Var> = counts.iter().filter(|(_, &k)| k > 0).map(|(&v, _)| v).collect();
    for v in keys {
        if cur.last() == Some(&v) {
            continue;
        }
        *counts.get_mut(&v).unwrap() -= 1;
        cur.push(v);
        fold_free_words(counts, len, cur, out);
        cur.pop();
        *counts.get_mut(&v).unwrap() += 1;
    }
}

/// Every folded monomial with exactly this content, ascending.
pub fn monomials_with_content(c: &Content) -> Vec<Monomial> {
    let vars: Vec<(Var, u32)> = c.iter().map(|(&v, &k)| (v, k)).collect();
    let mut out = Vec::new();
    let mut pairs = vec![0u32; vars.len()];
    loop {
        let mut s = SquarePart::one();
        let mut left: BTreeMap<Var, u32> = BTreeMap::new();
        for (i, &(v, k)) in vars.iter().enumerate() {
            s.add(v, pairs[i]);
            left.insert(v, k - 2 * pairs[i]);
        }
        let len = left.values().sum::<u32>() as usize;
        let mut words = Vec::new();
        fold_free_words(&mut left, len, &mut Vec::new(), &mut words);
        out.extend(words.into_iter().map(|w| Monomial::new(w, s.clone())));
        // next square split
        let mut i = 0;
        loop {
            if i == vars.len() {
                out.sort();
                return out;
            }
            if 2 * (pairs[i] + 1) <= vars[i].1 {
                pairs[i] += 1;
                break;
            }
            pairs[i] = 0;
            i += 1;
        }
    }
}

/// A bracket `[Y z]` read off a leader.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Cell {
    y: Word,
    z: Var,
}

/// Splits `w` into cells `Y z`, each `Y` nonempty ascending, `z < Y[0]`, with
/// `accept` judging each cell by its index and the previous cells.
fn split_cells(w: &[Var], cells: &mut Vec<Cell>, accept: &dyn Fn(&[Cell], &Cell) -> bool) -> bool {
    if w.is_empty() {
        return true;
    }
    for k in 1..w.len() {
        let y = &w[..k];
        let z = w[k];
        if !is_ascending(y) || z >= y[0] {
            if !is_ascending(y) {
                break;
            }
            continue;
        }
        let cell = Cell { y: y.to_vec(), z };
        if accept(cells, &cell) {
            cells.push(cell);
            if split_cells(&w[k + 1..], cells, accept) {
                return true;
            }
            cells.pop();
        }
    }
    false
}

fn bracket_atom(y: &[Var], z: Var) -> Atom {
    let mut e = y.to_vec();
    e.push(z);
    Atom::Bracket(BracketFactor::new(e))
}

/// Recognizes `w` as an S1 leader `A b1 B`.
fn parse_s1(w: &[Var], b1: Var) -> Option<(Word, Word)> {
    let p = w.iter().position(|&v| v == b1)?;
    (p > 0 && is_ascending(&w[..p])).then(|| (w[..p].to_vec(), w[p + 1..].to_vec()))
}

/// `b1 [Y1 b1]…[Yj b1][Y z]…`: returns `j` and the cells.
fn parse_r1(w: &[Var], b1: Var) -> Option<(usize, Vec<Cell>)> {
    if w.first() != Some(&b1) || w.len() < 3 {
        return None;
    }
    let accept = |prev: &[Cell], c: &Cell| {
        if c.y.contains(&b1) {
            return false;
        }
        c.z != b1 || prev.iter().all(|p| p.z == b1)
    };
    let mut cells = Vec::new();
    split_cells(&w[1..], &mut cells, &accept).then(|| (cells.iter().filter(|c| c.z == b1).count(), cells))
}

/// `b1 [Y1 b2]…[Yj b2][Y z]…` with `j > 0` and `z > b2` afterwards.
fn parse_r12(w: &[Var], b1: Var, b2: Var) -> Option<(usize, Vec<Cell>)> {
    if w.first() != Some(&b1) || w.len() < 3 {
        return None;
    }
    let accept = |prev: &[Cell], c: &Cell| {
        if c.y.contains(&b1) {
            return false;
        }
        if prev.is_empty() {
            return c.z == b2;
        }
        if c.z == b2 {
            prev.iter().all(|p| p.z == b2)
        } else {
            c.z > b2 && !c.y.contains(&b2)
        }
    };
    let mut cells = Vec::new();
    split_cells(&w[1..], &mut cells, &accept).then(|| (cells.iter().filter(|c| c.z == b2).count(), cells))
}

fn bracket_product(head: Vec<Atom>, cells: &[Cell], s: &SquarePart) -> BracketPolynomial {
    let mut atoms = head;
    atoms.extend(cells.iter().map(|c| bracket_atom(&c.y, c.z)));
    BracketPolynomial::term(atoms, s.clone(), q(1))
}

/// The element of the chosen families led by `t`, if any.
fn element_source(t: &Monomial, variant: RVariant) -> Option<(BgFamily, BracketPolynomial)> {
    let w = t.left();
    let s = t.squares();
    let b1 = *w.iter().min()?;
    if w.len() == 1 {
        let fam = match variant {
            RVariant::Refined | RVariant::Uniform => BgFamily::R1 { j: 0, l: 0 },
        };
        return Some((fam, BracketPolynomial::term(vec![Atom::Var(b1)], s.clone(), q(1))));
    }
    if let Some((a, b)) = parse_s1(w, b1) {
        let lead: Word = [&a[..], &[b1], &b[..]].concat();
        let tail: Word = [&[b1], &b[..], &a[..]].concat();
        let vars = |x: &[Var]| x.iter().map(|&v| Atom::Var(v)).collect::<Vec<_>>();
        let mut p = BracketPolynomial::term(vars(&lead), s.clone(), q(1));
        p.add_scaled(&BracketPolynomial::term(vars(&tail), s.clone(), q(1)), &q(-1));
        return Some((BgFamily::S1, p));
    }
    match variant {
        RVariant::Uniform => {
            let (j, cells) = parse_r1(w, b1)?;
            let fam = BgFamily::R1 { j, l: cells.len() - j };
            Some((fam, bracket_product(vec![Atom::Var(b1)], &cells, s)))
        }
        RVariant::Refined => {
            if let Some((j, cells)) = parse_r1(w, b1).filter(|(j, _)| *j > 0) {
                let fam = BgFamily::Sq1 { j, l: cells.len() - j };
                let y1 = &cells[0].y;
                let mut first = VVPolynomial::monomial(
                    Monomial::new([&[b1], &y1[..], &[b1]].concat(), SquarePart::one()),
                    q(1),
                );
                first.add_term(Monomial::new(y1.clone(), SquarePart::single(b1, 1)), q(-1));
                let rest = bracket_product(Vec::new(), &cells[1..], s);
                return Some((fam, BracketPolynomial::from_vv(&first).mul(&rest)));
            }
            let b2 = w.iter().copied().filter(|&v| v != b1).min()?;
            let (j, cells) = parse_r12(w, b1, b2)?;
            let fam = BgFamily::R12 { j, l: cells.len() - j };
            Some((fam, bracket_product(vec![Atom::Var(b1)], &cells, s)))
        }
    }
}

impl UniGroebnerBase {
    /// Enumerates the S1 and R-family elements whose leaders have content `c`.
    pub fn generate(c: &Content, variant: RVariant, reducer: &Reducer) -> Result<Self> {
        let mut elements = BTreeMap::new();
        for t in monomials_with_content(c) {
            if t.left().is_empty() || !reducer.is_reduced(&t) {
                continue;
            }
            let Some((family, source)) = element_source(&t, variant) else { continue };
            let red = reducer.reduce(&source.expand().folded())?;
            let Some((lead, lc)) = red.leading() else {
                return Err(Error::Invariant(format!("{family} element led by {:?} vanishes", t.left())));
            };
            if *lead != t {
                return Err(Error::Invariant(format!(
                    "{family} element written for {:?} is led by {:?}",
                    t.left(),
                    lead.left()
                )));
            }
            let inv = Coef::one() / lc;
            elements.insert(t, BgElement { family, source, reduced: red.scaled(&inv) });
        }
        Ok(UniGroebnerBase { content: c.clone(), variant, elements })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// `BG[M]`-enumeration for the multiset declared in `ctx`.
pub fn generate_bg(ctx: &VariableContext, variant: RVariant) -> Result<UniGroebnerBase> {
    if ctx.m() < 3 {
        return Err(Error::Domain("the uni-bracket base needs a multiset of at least 3 symbols".into()));
    }
    if ctx.multiset().len() < 2 {
        return Err(Error::Domain("the uni-bracket base needs at least 2 distinct symbols".into()));
    }
    UniGroebnerBase::generate(ctx.multiset(), variant, &Reducer::new(RingKind::SquareFree))
}

/// Uni-bracket reading of a bracket polynomial: every bracket expanded, squares
/// folded.
///
/// With a declared multiset, every term must use exactly that multiset.
pub fn to_unibracket(p: &BracketPolynomial, ctx: &VariableContext) -> Result<VVPolynomial> {
    let declared = ctx.multiset();
    let mut degree = None;
    for (m, _) in p.terms() {
        let d = m.degree();
        if !declared.is_empty() {
            let mut c = Content::new();
            for &v in m.canonical() {
                *c.entry(v).or_insert(0) += 1;
            }
            if &c != declared {
                return Err(Error::Domain(format!(
                    "a term of degree {d} does not use the declared multiset of size {}",
                    ctx.m()
                )));
            }
        }
        match degree {
            None => degree = Some(d),
            Some(e) if e != d => {
                return Err(Error::Domain(format!("degree mismatch: terms of degree {e} and {d}")))
            }
            _ => {}
        }
    }
    Ok(p.expand().folded())
}

/// Reduction to the lowest-representative normal form, with bases cached per
/// content.
#[derive(Debug)]
pub struct UniNormalizer {
    variant: RVariant,
    reducer: Reducer,
    fuel: u64,
    bases: RefCell<HashMap<Content, std::rc::Rc<UniGroebnerBase>>>,
}

impl UniNormalizer {
    pub fn new(variant: RVariant) -> Self {
        Self::with_fuel(variant, gbasis::default_fuel())
    }

    pub fn with_fuel(variant: RVariant, fuel: u64) -> Self {
        UniNormalizer {
            variant,
            reducer: Reducer::with_fuel(RingKind::SquareFree, fuel),
            fuel,
            bases: RefCell::new(HashMap::new()),
        }
    }

    pub fn variant(&self) -> RVariant {
        self.variant
    }

    pub fn base(&self, c: &Content) -> Result<std::rc::Rc<UniGroebnerBase>> {
        if let Some(b) = self.bases.borrow().get(c) {
            return Ok(b.clone());
        }
        let b = std::rc::Rc::new(UniGroebnerBase::generate(c, self.variant, &self.reducer)?);
        self.bases.borrow_mut().insert(c.clone(), b.clone());
        Ok(b)
    }

    /// Normal form of a uni-bracket polynomial given by its representative.
    pub fn normal_form(&self, p: &VVPolynomial) -> Result<VVPolynomial> {
        let mut work = self.reducer.reduce(&p.folded())?;
        let mut out = VVPolynomial::zero();
        let mut fuel = self.fuel;
        while let Some((t, c)) = work.pop_leading() {
            let base = self.base(&t.content())?;
            match base.elements.get(&t) {
                Some(e) => {
                    if fuel == 0 {
                        return Err(Error::FuelExhausted(self.fuel));
                    }
                    fuel -= 1;
                    for (m, d) in e.reduced.terms() {
                        if *m != t {
                            work.add_term(m.clone(), -(d * &c));
                        }
                    }
                }
                None => out.add_term(t, c),
            }
        }
        Ok(out)
    }

    pub fn normalize_brackets(&self, p: &BracketPolynomial, ctx: &VariableContext) -> Result<VVPolynomial> {
        self.normal_form(&to_unibracket(p, ctx)?)
    }
}

pub fn unibracket_normal_form(p: &VVPolynomial, variant: RVariant) -> Result<VVPolynomial> {
    UniNormalizer::new(variant).normal_form(p)
}

/// One reading of a normal term: `b1 Y1 b1 … Yj b1 Y z … Y z [Y]`.
fn normal_cells(w: &[Var], b1: Var, cells: &mut Vec<Cell>, strict: bool) -> bool {
    // trailing ascending block
    if !w.is_empty() && is_ascending(w) && !w.contains(&b1) {
        return true;
    }
    // the word ends with the last cell
    if w.is_empty() {
        let l_cells: Vec<&Cell> = cells.iter().filter(|c| c.z != b1).collect();
        return l_cells.iter().any(|c| if strict { c.y[0] < c.z } else { c.y[0] <= c.z });
    }
    for k in 1..w.len() {
        let y = &w[..k];
        if !is_ascending(y) || y.contains(&b1) {
            break;
        }
        let z = w[k];
        let ok = if z == b1 {
            cells.iter().all(|c| c.z == b1)
        } else {
            z < *y.last().unwrap()
        };
        if ok {
            cells.push(Cell { y: y.to_vec(), z });
            if normal_cells(&w[k + 1..], b1, cells, strict) {
                return true;
            }
            cells.pop();
        }
    }
    false
}

/// Whether an `I□`-normal term has one of the two uni-bracket normal shapes.
///
/// `strict` selects `l ≺ z` instead of `l ⪯ z` in the second shape.
pub fn is_unibracket_normal_with(t: &Monomial, strict: bool) -> bool {
    if !gbasis::is_normal_shape(t, RingKind::SquareFree) {
        return false;
    }
    let w = t.left();
    match w.len() {
        0 => true,
        1 => false,
        _ => {
            let b1 = *w.iter().min().unwrap();
            w[0] == b1 && normal_cells(&w[1..], b1, &mut Vec::new(), strict)
        }
    }
}

pub fn is_unibracket_normal(t: &Monomial) -> bool {
    is_unibracket_normal_with(t, false)
}

/// The sign relating a uni-bracket to its reversed representative.
pub fn reversal_sign(w: &[Var]) -> (Word, i64) {
    (reversion(w).0, parity_sign(w.len()))
}

/// Bracket monomial with a single bracket around `w`.
pub fn single_bracket(w: Word) -> BracketPolynomial {
    BracketPolynomial::monomial(BracketMonomial::brackets(vec![w], SquarePart::one()), Coef::one())
}
