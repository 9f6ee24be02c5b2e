//! Bracket-level normalization: Caianiello expansion, the bracket rewrite
//! formulas, leader-normal and straight forms.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use num_traits::Zero;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gbasis::{default_fuel, find_leader, Family, Reducer, RingKind};
use crate::model::*;
use crate::oracle::check_zero;

fn rev(w: &[Var]) -> Word {
    w.iter().rev().copied().collect()
}

fn cat(parts: &[&[Var]]) -> Word {
    parts.concat()
}

fn sign(n: usize) -> Coef {
    q(parity_sign(n))
}

/// A factor of a mixed product: bare variables or one bracket.
#[derive(Clone, Debug)]
pub enum Piece {
    W(Word),
    B(Word),
}

/// `c` times the ordered product of the pieces.
pub fn product(c: Coef, pieces: &[Piece]) -> BracketPolynomial {
    let mut atoms = Vec::new();
    for p in pieces {
        match p {
            Piece::W(w) => atoms.extend(w.iter().map(|&v| Atom::Var(v))),
            Piece::B(w) => atoms.push(Atom::Bracket(BracketFactor::new(w.clone()))),
        }
    }
    BracketPolynomial::term(atoms, SquarePart::one(), c)
}

/// `c` times a product of brackets.
pub fn brackets(c: Coef, factors: &[Word]) -> BracketPolynomial {
    let pieces: Vec<Piece> = factors.iter().map(|w| Piece::B(w.clone())).collect();
    product(c, &pieces)
}

fn sum(parts: Vec<BracketPolynomial>) -> BracketPolynomial {
    let mut acc = BracketPolynomial::zero();
    for p in parts {
        acc.add_scaled(&p, &q(1));
    }
    acc
}

// ---------------------------------------------------------------------------
// Caianiello expansion

fn even_peel(w: &[Var], peel: usize) -> BracketPolynomial {
    if peel == 0 || w.len() <= 2 {
        return brackets(q(1), &[w.to_vec()]);
    }
    let mut out = BracketPolynomial::zero();
    for i in 1..w.len() {
        let rest: Word = w[1..].iter().enumerate().filter(|&(k, _)| k + 1 != i).map(|(_, &v)| v).collect();
        let head = brackets(q(1), &[vec![w[0], w[i]]]);
        out.add_scaled(&head.mul(&even_peel(&rest, peel - 1)), &sign(i + 1));
    }
    out
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

fn inversions(p: &[usize]) -> usize {
    let mut n = 0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                n += 1;
            }
        }
    }
    n
}

fn odd_line(w: &[Var], rem: usize) -> BracketPolynomial {
    let len = w.len();
    let mut out = BracketPolynomial::zero();
    for s in subsets(len, len - 3) {
        let other: Vec<usize> = (0..len).filter(|i| !s.contains(i)).collect();
        let perm: Vec<usize> = s.iter().chain(other.iter()).copied().collect();
        let first: Word = s.iter().map(|&i| w[i]).collect();
        let second: Word = other.iter().map(|&i| w[i]).collect();
        let head = if first.is_empty() {
            BracketPolynomial::monomial(BracketMonomial::new(Vec::new(), SquarePart::one()), q(1))
        } else {
            even_peel(&first, (first.len() - rem) / 2)
        };
        out.add_scaled(&head.mul(&brackets(q(1), &[second])), &sign(inversions(&perm)));
    }
    out
}

/// The default partition: all twos, plus one three for odd lengths.
pub fn default_partition(len: usize) -> Vec<usize> {
    if len < 2 {
        return vec![len];
    }
    let mut p = vec![2; len / 2];
    if len % 2 == 1 {
        p.pop();
        p.push(3);
    }
    p
}

/// Expands a bracket into products of shorter brackets with the given part lengths.
///
/// Reachable partitions are those produced by the two scalar lines: peeling
/// 2-brackets off an even bracket, and for odd lengths one (len-3, 3) split first.
pub fn caianiello_expand(f: &BracketFactor, partition: Option<&[usize]>) -> Result<BracketPolynomial> {
    let w = f.entries();
    let len = w.len();
    let mut parts: Vec<usize> = match partition {
        Some(p) => p.to_vec(),
        None => default_partition(len),
    };
    if parts.iter().sum::<usize>() != len {
        return Err(Error::InvalidPartition(format!("parts {parts:?} do not sum to the bracket length {len}")));
    }
    if len < 2 {
        return Ok(brackets(q(1), &[w.to_vec()]));
    }
    if parts.iter().any(|&k| k < 2) {
        return Err(Error::InvalidPartition(format!("parts must be at least 2, got {parts:?}")));
    }
    parts.sort_unstable();
    if parts == [len] {
        return Ok(brackets(q(1), &[w.to_vec()]));
    }
    let reachable_even = |ps: &[usize]| ps.iter().all(|&k| k % 2 == 0) && ps.iter().filter(|&&k| k > 2).count() <= 1;
    if len.is_multiple_of(2) {
        if !reachable_even(&parts) {
            return Err(Error::InvalidPartition(format!("{parts:?} is not reachable from the even expansion line")));
        }
        let rem = *parts.last().unwrap();
        return Ok(even_peel(w, (len - rem) / 2));
    }
    let Some(pos) = parts.iter().position(|&k| k == 3) else {
        return Err(Error::InvalidPartition(format!("{parts:?} has no part 3 for an odd bracket")));
    };
    parts.remove(pos);
    if !reachable_even(&parts) {
        return Err(Error::InvalidPartition(format!("{parts:?} is not reachable from the odd expansion line")));
    }
    let rem = parts.last().copied().unwrap_or(0);
    Ok(odd_line(w, rem))
}

// ---------------------------------------------------------------------------
// Rewrite formulas as explicit right-hand sides

/// `uDv = 2uv[D] + 2v[uD] - Duv`.
pub fn fundamental_rhs(u: Var, d: &[Var], v: Var) -> BracketPolynomial {
    sum(vec![
        product(q(2), &[Piece::W(vec![u, v]), Piece::B(d.to_vec())]),
        product(q(2), &[Piece::W(vec![v]), Piece::B(cat(&[&[u], d]))]),
        product(q(-1), &[Piece::W(cat(&[d, &[u, v]]))]),
    ])
}

/// `[CuDvE] = 2[CuvE][D] + 2[CvE][uD] - [CDuvE]`.
pub fn bracket_reduction_rhs(c: &[Var], u: Var, d: &[Var], v: Var, e: &[Var]) -> BracketPolynomial {
    sum(vec![
        brackets(q(2), &[cat(&[c, &[u, v], e]), d.to_vec()]),
        brackets(q(2), &[cat(&[c, &[v], e]), cat(&[&[u], d])]),
        brackets(q(-1), &[cat(&[c, d, &[u, v], e])]),
    ])
}

/// `[Buv][wCd] = 1/2 [BwCduv] + (-1)^c 1/2 [BdC†wuv]`.
pub fn absorb_rhs(b: &[Var], u: Var, v: Var, w: Var, c: &[Var], d: Var) -> BracketPolynomial {
    sum(vec![
        brackets(qf(1, 2), &[cat(&[b, &[w], c, &[d, u, v]])]),
        brackets(qf(parity_sign(c.len()), 2), &[cat(&[b, &[d], &rev(c), &[w, u, v]])]),
    ])
}

/// Right side of `[Av][BwC]`.
pub fn shuffle_rhs(a: &[Var], v: Var, b: &[Var], w: Var, c: &[Var]) -> BracketPolynomial {
    let sb = sign(b.len());
    let br = rev(b);
    sum(vec![
        brackets(q(1), &[cat(&[a, &[w], c, &[v]]), b.to_vec()]),
        brackets(-sb.clone(), &[cat(&[a, &[w], &br, &[v]]), c.to_vec()]),
        brackets(-sb.clone(), &[cat(&[&[w], c, &[v]]), cat(&[a, &br])]),
        brackets(sb, &[cat(&[&[w], &br, &[v]]), cat(&[a, c])]),
        brackets(q(-1), &[cat(&[a, &[w]]), cat(&[c, &[v], b])]),
    ])
}

/// Right side of `[Buv][aDwC]`, the two-bracket lifting identity.
pub fn lifting_rhs(b: &[Var], u: Var, v: Var, a: Var, d: &[Var], w: Var, c: &[Var]) -> BracketPolynomial {
    let sd = sign(d.len());
    let dr = rev(d);
    sum(vec![
        brackets(q(1), &[cat(&[&[v, a], d, &[w]]), cat(&[b, &[u], c])]),
        brackets(sd.clone(), &[cat(&[&[w], c, &[v]]), cat(&[b, &[u], &dr, &[a]])]),
        brackets(q(-1), &[cat(&[b, &[u, w]]), cat(&[c, &[v, a], d])]),
        brackets(q(1), &[cat(&[b, &[u, w], c, &[v]]), cat(&[&[a], d])]),
        brackets(sd, &[cat(&[b, &[u, w], &dr, &[a, v]]), c.to_vec()]),
    ])
}

/// Right side of `[AvD][BwC]`.
pub fn general_shuffle_rhs(a: &[Var], v: Var, d: &[Var], b: &[Var], w: Var, c: &[Var]) -> BracketPolynomial {
    let (br, cr, dr) = (rev(b), rev(c), rev(d));
    sum(vec![
        brackets(q(1), &[cat(&[&[v], d, b, &[w]]), cat(&[a, c])]),
        brackets(-sign(b.len() + c.len()), &[cat(&[&[v], d, &cr, &[w]]), cat(&[a, &br])]),
        brackets(-sign(d.len()), &[cat(&[a, &[w]]), cat(&[&dr, &[v], b, c])]),
        brackets(q(-1), &[cat(&[&[v], d]), cat(&[a, &[w], b, c])]),
        brackets(-sign(b.len()), &[cat(&[a, &[w], &br, &[v], d]), c.to_vec()]),
        brackets(q(1), &[cat(&[a, &[w], c, &[v], d]), b.to_vec()]),
    ])
}

/// Right side of the full split of `[W1 W2 ... Wk]`.
pub fn split_rhs(cells: &[Word]) -> BracketPolynomial {
    let k = cells.len();
    if k <= 1 {
        return brackets(q(1), &[cells.concat()]);
    }
    let x = cells[..k - 1].concat();
    let wk = &cells[k - 1];
    let mut out = split_rhs(&cells[..k - 1]).mul(&brackets(q(1), std::slice::from_ref(wk))).scaled(&q(2));
    out.add_scaled(&brackets(q(1), &[cat(&[&rev(wk), &x])]), &-sign(wk.len()));
    out
}

// ---------------------------------------------------------------------------
// Guarded operations

/// The fundamental reduction of `uDv`, checked against its side conditions.
pub fn fundamental_reduction(u: Var, d: &[Var], v: Var) -> Result<BracketPolynomial> {
    if d.is_empty() {
        return Err(Error::Domain("fundamental reduction needs a nonempty middle".into()));
    }
    if u <= v || u <= d[0] || (d.len() > 1 && d[0] <= v) {
        return Err(Error::Domain("fundamental reduction side conditions violated".into()));
    }
    Ok(fundamental_rhs(u, d, v))
}

/// Applies the bracket reduction at the leftmost reducible window, or returns `[f]`.
pub fn interior_normalize(f: &BracketFactor) -> BracketPolynomial {
    let w = f.entries();
    match find_leader(RingKind::SquareFree, w) {
        Some(win) if win.family != Family::Fold => {
            let (s, e) = (win.start, win.start + win.len);
            bracket_reduction_rhs(&w[..s], w[s], &w[s + 1..e - 1], w[e - 1], &w[e..])
        }
        _ => brackets(q(1), &[w.to_vec()]),
    }
}

/// Absorbs `[wCd]` into `[Buv]` when `u > v` and `u > w > d`.
pub fn absorb(first: &BracketFactor, second: &BracketFactor) -> Result<BracketPolynomial> {
    let (f, s) = (first.entries(), second.entries());
    if f.len() < 2 || s.len() < 2 {
        return Err(Error::Domain("absorption needs brackets of length at least 2".into()));
    }
    let (u, v) = (f[f.len() - 2], f[f.len() - 1]);
    let (w, d) = (s[0], s[s.len() - 1]);
    if !(u > v && u > w && w > d) {
        return Err(Error::Domain("absorption ordering conditions violated".into()));
    }
    Ok(absorb_rhs(&f[..f.len() - 2], u, v, w, &s[1..s.len() - 1], d))
}

/// Shuffle of `[Av][BwC]`: `B` is the ascending head of the second bracket,
/// `w` the variable after it; needs `B[0] > last(A) > v > w`.
pub fn shuffle(first: &BracketFactor, second: &BracketFactor) -> Result<BracketPolynomial> {
    let (f, s) = (first.entries(), second.entries());
    if f.len() < 2 || s.len() < 2 {
        return Err(Error::Domain("shuffle needs brackets of length at least 2".into()));
    }
    let k = (1..s.len()).find(|&k| s[k] < s[k - 1]);
    let Some(k) = k else {
        return Err(Error::Domain("second bracket of a shuffle must have a descent".into()));
    };
    let (a, v) = (&f[..f.len() - 1], f[f.len() - 1]);
    let (b, w, c) = (&s[..k], s[k], &s[k + 1..]);
    let u = a[a.len() - 1];
    if !(b[0] > u && u > v && v > w) {
        return Err(Error::Domain("shuffle ordering conditions violated".into()));
    }
    Ok(shuffle_rhs(a, v, b, w, c))
}

/// Every `(A, v, D, B, w, C)` reading of `[AvD][BwC]` meeting the ordering assumptions.
fn general_shuffle_splits(f: &[Var], s: &[Var]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 1..f.len() {
        for j in 1..s.len() {
            let (la, v, d) = (f[0], f[i], &f[i + 1..]);
            let (lb, w, c) = (s[0], s[j], &s[j + 1..]);
            let td_ok = d.last().is_none_or(|&t| la > t);
            let tc_ok = c.last().is_none_or(|&t| lb > t);
            if la <= lb && td_ok && tc_ok && la > v && v > w {
                out.push((i, j));
            }
        }
    }
    out
}

/// Generalized shuffle of `[AvD][BwC]` at the first admissible reading.
pub fn general_shuffle(first: &BracketFactor, second: &BracketFactor) -> Result<BracketPolynomial> {
    let (f, s) = (first.entries(), second.entries());
    let Some(&(i, j)) = general_shuffle_splits(f, s).first() else {
        return Err(Error::Domain("no admissible reading for the generalized shuffle".into()));
    };
    Ok(general_shuffle_rhs(&f[..i], f[i], &f[i + 1..], &s[..j], s[j], &s[j + 1..]))
}

/// Cells `a B c` of a bracket cut after every descent into a smaller head.
fn split_cells(w: &[Var]) -> Option<Vec<Word>> {
    let cells = leader_cells(w)?;
    if cells.len() < 2 {
        return None;
    }
    let a1 = cells[0].0[0];
    if cells.iter().any(|(_, z)| *z >= a1) {
        return None;
    }
    Some(cells.into_iter().map(|(y, z)| cat(&[&y, &[z]])).collect())
}

/// Splits `[Y1z1 ... Ykzk]` into `2^(k-1)[Y1z1]...[Ykzk]` plus lower terms.
pub fn split(f: &BracketFactor) -> Result<BracketPolynomial> {
    match split_cells(f.entries()) {
        Some(cells) => Ok(split_rhs(&cells)),
        None => Err(Error::Domain("bracket has no decomposition into two or more cells".into())),
    }
}

// ---------------------------------------------------------------------------
// Leader-normal and straight forms

/// Parses `w = Y1 z1 ... Yk zk` with every `Y` ascending and `z_i < Y_i[0]`.
pub fn leader_cells(w: &[Var]) -> Option<Vec<(Word, Var)>> {
    if w.is_empty() {
        return Some(Vec::new());
    }
    let mut runs: Vec<Word> = vec![vec![w[0]]];
    for &x in &w[1..] {
        let last = runs.last_mut().unwrap();
        if x > *last.last().unwrap() {
            last.push(x);
        } else {
            runs.push(vec![x]);
        }
    }
    if runs.len() < 2 || runs.last().unwrap().len() != 1 {
        return None;
    }
    let mut cells = Vec::new();
    let mut y = runs[0].clone();
    for r in &runs[1..] {
        let z = r[0];
        if y.is_empty() || z >= y[0] {
            return None;
        }
        cells.push((y, z));
        y = r[1..].to_vec();
    }
    Some(cells)
}

fn cells_are_leader_normal(cells: &[(Word, Var)]) -> bool {
    let ys: Word = cells.iter().flat_map(|(y, _)| y.iter().copied()).collect();
    let zs: Word = cells.iter().map(|(_, z)| *z).collect();
    is_non_descending(&ys) && is_non_descending(&zs)
}

fn monomial_from_cells(cells: &[(Word, Var)], squares: &SquarePart) -> BracketMonomial {
    BracketMonomial::brackets(cells.iter().map(|(y, z)| cat(&[y, &[*z]])).collect(), squares.clone())
}

/// The leader-normal shape `[Y1z1]...[Ykzk] □ s` with all ordering conditions.
pub fn is_leader_normal(m: &BracketMonomial) -> bool {
    if !m.is_bracket_only() {
        return false;
    }
    let mut cells = Vec::new();
    for a in m.atoms() {
        let Atom::Bracket(b) = a else { return false };
        match leader_cells(b.entries()) {
            Some(c) if c.len() == 1 => cells.extend(c),
            _ => return false,
        }
    }
    cells_are_leader_normal(&cells)
}

/// Commutes every `[Y z]` into `[z Y]`.
pub fn to_straight_form(p: &BracketPolynomial) -> BracketPolynomial {
    BracketPolynomial::from_terms(p.terms().map(|(m, c)| {
        let atoms = m
            .atoms()
            .iter()
            .map(|a| match a {
                Atom::Bracket(b) if b.len() >= 2 => {
                    let e = b.entries();
                    Atom::Bracket(BracketFactor::new(cat(&[&e[e.len() - 1..], &e[..e.len() - 1]])))
                }
                other => other.clone(),
            })
            .collect();
        (BracketMonomial::new(atoms, m.squares().clone()), c.clone())
    }))
}

/// Rows `z_i Y_i` of a term in straight orientation.
pub fn to_tableau(t: &BracketTerm) -> Result<Tableau> {
    let mut rows = Vec::new();
    for a in t.monomial.atoms() {
        match a {
            Atom::Bracket(b) if b.len() >= 2 => rows.push(b.entries().to_vec()),
            _ => return Err(Error::Domain("tableau rows must be brackets of length at least 2".into())),
        }
    }
    Ok(Tableau { rows })
}

/// Rows ascending, columns non-descending, and `last(Y_i) <= first(Y_{i+1})`.
pub fn is_straight(t: &BracketTerm) -> bool {
    let Ok(tab) = to_tableau(t) else { return false };
    let rows = &tab.rows;
    if !rows.iter().all(|r| is_ascending(r)) {
        return false;
    }
    for pair in rows.windows(2) {
        let (r, s) = (&pair[0], &pair[1]);
        if r.iter().zip(s.iter()).any(|(x, y)| x > y) {
            return false;
        }
        if r[r.len() - 1] > s[1] {
            return false;
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Term normalization

/// Orders bracket words so that their concatenation is lexicographically least.
fn concat_order(a: &Word, b: &Word) -> Ordering {
    let ab = cat(&[a, b]);
    let ba = cat(&[b, a]);
    ab.cmp(&ba).then_with(|| a.cmp(b))
}

/// Folds equal neighbours inside brackets, orients every bracket to its leader and
/// sorts the factors; bare variables are a domain error.
pub fn normalize_term(m: &BracketMonomial, c: &Coef) -> Result<Option<(BracketMonomial, Coef)>> {
    let mut coef = c.clone();
    let mut squares = m.squares().clone();
    let mut words: Vec<Word> = Vec::new();
    for a in m.atoms() {
        let Atom::Bracket(b) = a else {
            return Err(Error::Domain("straightening needs bracket-only terms; found a bare variable".into()));
        };
        let mut w = fold_word(b.entries(), &mut squares);
        while w.len() >= 2 && w[0] == w[w.len() - 1] {
            squares.add(w[0], 1);
            w = w[1..w.len() - 1].to_vec();
            w = fold_word(&w, &mut squares);
        }
        match w.len() {
            0 => {}
            1 => return Ok(None),
            _ => {
                let (lw, s) = bracket_leader(&BracketFactor::new(w));
                if s < 0 {
                    coef = -coef;
                }
                words.push(lw);
            }
        }
    }
    words.sort_by(concat_order);
    Ok(Some((BracketMonomial::brackets(words, squares), coef)))
}

pub fn normalize_polynomial(p: &BracketPolynomial) -> Result<BracketPolynomial> {
    let mut out = BracketPolynomial::zero();
    for (m, c) in p.terms() {
        if let Some((n, d)) = normalize_term(m, c)? {
            out.add_term(n, d);
        }
    }
    Ok(out)
}

/// Highest monomial of the square-free expansion.
pub fn leader(m: &BracketMonomial) -> Option<Monomial> {
    m.expand().folded().leading().map(|(t, _)| t.clone())
}

// ---------------------------------------------------------------------------
// Straightening

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Leading-term elimination against the square-free base.
    #[default]
    Elimination,
    /// The bracket rewrite formulas, leftovers finished by elimination.
    Formulas,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub rule: String,
    pub before: BracketPolynomial,
    pub after: BracketPolynomial,
}

#[derive(Clone, Debug, Default)]
pub struct Straightened {
    /// Leader-normal form.
    pub result: BracketPolynomial,
    pub trace: Vec<TraceStep>,
    pub formula_steps: usize,
    pub fallbacks: usize,
}

/// Straightening engine with cached normal forms.
#[derive(Debug)]
pub struct Straightener {
    reducer: Reducer,
    fuel: u64,
    vv_cache: RefCell<HashMap<Monomial, VVPolynomial>>,
    bracket_cache: RefCell<HashMap<BracketMonomial, VVPolynomial>>,
}

impl Default for Straightener {
    fn default() -> Self {
        Self::new()
    }
}

impl Straightener {
    pub fn new() -> Self {
        Self::with_fuel(default_fuel())
    }

    pub fn with_fuel(fuel: u64) -> Self {
        Straightener {
            reducer: Reducer::with_fuel(RingKind::SquareFree, fuel),
            fuel,
            vv_cache: RefCell::new(HashMap::new()),
            bracket_cache: RefCell::new(HashMap::new()),
        }
    }

    pub fn reducer(&self) -> &Reducer {
        &self.reducer
    }

    fn nf_monomial(&self, m: &Monomial) -> Result<VVPolynomial> {
        if let Some(r) = self.vv_cache.borrow().get(m) {
            return Ok(r.clone());
        }
        let r = self.reducer.reduce_monomial(m)?;
        self.vv_cache.borrow_mut().insert(m.clone(), r.clone());
        Ok(r)
    }

    /// I□-normal form of a vector-variable polynomial.
    pub fn vv_normal_form(&self, p: &VVPolynomial) -> Result<VVPolynomial> {
        let mut out = VVPolynomial::zero();
        for (m, c) in p.folded().terms() {
            out.add_scaled(&self.nf_monomial(m)?, c);
        }
        Ok(out)
    }

    fn nf_bracket(&self, m: &BracketMonomial) -> Result<VVPolynomial> {
        if let Some(r) = self.bracket_cache.borrow().get(m) {
            return Ok(r.clone());
        }
        let r = self.vv_normal_form(&m.expand())?;
        self.bracket_cache.borrow_mut().insert(m.clone(), r.clone());
        Ok(r)
    }

    /// I□-normal form of the expansion of a bracket polynomial.
    pub fn expanded_normal_form(&self, p: &BracketPolynomial) -> Result<VVPolynomial> {
        let mut out = VVPolynomial::zero();
        for (m, c) in p.terms() {
            out.add_scaled(&self.nf_bracket(m)?, c);
        }
        Ok(out)
    }

    /// The leader-normal monomial whose expansion leads with `t`.
    pub fn leader_monomial(&self, t: &Monomial) -> Result<BracketMonomial> {
        let cells = leader_cells(t.left())
            .ok_or_else(|| Error::Invariant(format!("normal leading word {:?} has no bracket cell parse", t.left())))?;
        Ok(monomial_from_cells(&cells, t.squares()))
    }

    fn eliminate(&self, mut g: VVPolynomial, trace: Option<&mut Vec<TraceStep>>) -> Result<BracketPolynomial> {
        let mut out = BracketPolynomial::zero();
        let mut fuel = self.fuel;
        let mut trace = trace;
        while let Some((t, c)) = g.leading().map(|(t, c)| (t.clone(), c.clone())) {
            if fuel == 0 {
                return Err(Error::FuelExhausted(self.fuel));
            }
            fuel -= 1;
            let term = self.leader_monomial(&t)?;
            let e = self.nf_bracket(&term)?;
            let (lt, lc) = e.leading().ok_or_else(|| Error::Invariant("leader-normal monomial expands to zero".into()))?;
            if *lt != t {
                return Err(Error::Invariant(format!("leader of {:?} is not {:?}", term, t.left())));
            }
            let k = c / lc;
            g.add_scaled(&e, &-k.clone());
            let before = trace.is_some().then(|| out.clone());
            out.add_term(term, k);
            if let (Some(tr), Some(before)) = (trace.as_deref_mut(), before) {
                tr.push(TraceStep { rule: "eliminate".into(), before, after: out.clone() });
            }
        }
        Ok(out)
    }

    /// Leader-normal form by leading-term elimination.
    pub fn straighten(&self, p: &BracketPolynomial) -> Result<BracketPolynomial> {
        Ok(self.straighten_with(p, Strategy::Elimination, false)?.result)
    }

    pub fn straighten_with(&self, p: &BracketPolynomial, strategy: Strategy, trace: bool) -> Result<Straightened> {
        let p = normalize_polynomial(p)?;
        match strategy {
            Strategy::Elimination => {
                let mut steps = Vec::new();
                let g = self.expanded_normal_form(&p)?;
                let result = self.eliminate(g, trace.then_some(&mut steps))?;
                Ok(Straightened { result, trace: steps, formula_steps: 0, fallbacks: 0 })
            }
            Strategy::Formulas => self.by_formulas(&p, trace),
        }
    }

    fn emit_check(&self, m: &BracketMonomial, lead: &Monomial) -> Result<bool> {
        if !self.reducer.is_reduced(lead) {
            return Ok(false);
        }
        Ok(match leader_cells(lead.left()) {
            Some(cells) => monomial_from_cells(&cells, lead.squares()) == *m,
            None => false,
        })
    }

    /// Candidate rewrites of one normalized monomial, in pipeline order.
    fn candidates(&self, m: &BracketMonomial) -> Vec<(&'static str, BracketPolynomial)> {
        let words: Vec<BracketFactor> = m
            .atoms()
            .iter()
            .filter_map(|a| match a {
                Atom::Bracket(b) => Some(b.clone()),
                Atom::Var(_) => None,
            })
            .collect();
        let rest = |skip: &[usize]| -> BracketPolynomial {
            let others: Vec<Word> = words
                .iter()
                .enumerate()
                .filter(|(i, _)| !skip.contains(i))
                .map(|(_, b)| b.entries().to_vec())
                .collect();
            let mut r = brackets(q(1), &others);
            r = r.mul(&BracketPolynomial::monomial(BracketMonomial::new(Vec::new(), m.squares().clone()), q(1)));
            r
        };
        let mut out = Vec::new();
        for (i, b) in words.iter().enumerate() {
            let r = interior_normalize(b);
            if r != brackets(q(1), &[b.entries().to_vec()]) {
                out.push(("bracket-reduction", r.mul(&rest(&[i]))));
            }
        }
        let pairs: Vec<(usize, usize)> =
            (0..words.len()).flat_map(|i| (i + 1..words.len()).map(move |j| (i, j))).collect();
        for &(i, j) in &pairs {
            for (x, y) in [(i, j), (j, i)] {
                if let Ok(r) = absorb(&words[x], &words[y]) {
                    out.push(("absorb", r.mul(&rest(&[i, j]))));
                }
            }
        }
        for &(i, j) in &pairs {
            for (x, y) in [(i, j), (j, i)] {
                if let Ok(r) = shuffle(&words[x], &words[y]) {
                    out.push(("shuffle", r.mul(&rest(&[i, j]))));
                }
            }
        }
        for &(i, j) in &pairs {
            for (x, y) in [(i, j), (j, i)] {
                let (f, s) = (words[x].entries(), words[y].entries());
                for (a, b) in general_shuffle_splits(f, s) {
                    let r = general_shuffle_rhs(&f[..a], f[a], &f[a + 1..], &s[..b], s[b], &s[b + 1..]);
                    out.push(("general-shuffle", r.mul(&rest(&[i, j]))));
                }
            }
        }
        for (i, b) in words.iter().enumerate() {
            if let Ok(r) = split(b) {
                out.push(("split", r.mul(&rest(&[i]))));
            }
        }
        out
    }

    fn by_formulas(&self, p: &BracketPolynomial, trace: bool) -> Result<Straightened> {
        type Key = (Monomial, BracketMonomial);
        let mut work: BTreeMap<Key, Coef> = BTreeMap::new();
        let push = |work: &mut BTreeMap<Key, Coef>, m: BracketMonomial, c: Coef| {
            if let Some(l) = leader(&m) {
                let e = work.entry((l, m)).or_insert_with(Coef::zero);
                *e += c;
            }
        };
        for (m, c) in p.terms() {
            push(&mut work, m.clone(), c.clone());
        }
        let mut emitted = BracketPolynomial::zero();
        let mut residual = BracketPolynomial::zero();
        let mut steps = Vec::new();
        let (mut formula_steps, mut fallbacks) = (0usize, 0usize);
        let mut fuel = self.fuel;
        while let Some(((lead, m), c)) = work.pop_last() {
            if c.is_zero() {
                continue;
            }
            if fuel == 0 {
                return Err(Error::FuelExhausted(self.fuel));
            }
            fuel -= 1;
            if self.emit_check(&m, &lead)? {
                emitted.add_term(m, c);
                continue;
            }
            let mut applied = false;
            for (rule, rhs) in self.candidates(&m) {
                let rhs = normalize_polynomial(&rhs)?;
                // the main split product keeps the leader but has more factors
                let lower = rhs.terms().all(|(t, _)| {
                    leader(t).is_none_or(|l| l < lead || (rule == "split" && l == lead && t.atoms().len() > m.atoms().len()))
                });
                if !lower {
                    continue;
                }
                if trace {
                    steps.push(TraceStep {
                        rule: rule.into(),
                        before: BracketPolynomial::monomial(m.clone(), c.clone()),
                        after: rhs.scaled(&c),
                    });
                }
                for (t, d) in rhs.terms() {
                    push(&mut work, t.clone(), d * &c);
                }
                formula_steps += 1;
                applied = true;
                break;
            }
            if !applied {
                fallbacks += 1;
                residual.add_term(m, c);
            }
        }
        let mut tail = Vec::new();
        let g = self.expanded_normal_form(&residual)?;
        let rest = self.eliminate(g, trace.then_some(&mut tail))?;
        steps.extend(tail);
        let mut result = emitted;
        result.add_scaled(&rest, &q(1));
        Ok(Straightened { result, trace: steps, formula_steps, fallbacks })
    }
}

/// Leader-normal form with a fresh engine.
pub fn straighten(p: &BracketPolynomial) -> Result<BracketPolynomial> {
    Straightener::new().straighten(p)
}

// ---------------------------------------------------------------------------
// Identity instances

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Identity {
    Igp,
    Db,
    NewReductionFirst,
    NewReductionSecond,
    ShuffleBasic,
    Shuffle,
    Lifting,
    GeneralShuffle,
    Split2,
    Split3,
    Absorb,
    Fundamental,
    BracketReduction,
}

impl Identity {
    pub const ALL: [Identity; 13] = [
        Identity::Igp,
        Identity::Db,
        Identity::NewReductionFirst,
        Identity::NewReductionSecond,
        Identity::ShuffleBasic,
        Identity::Shuffle,
        Identity::Lifting,
        Identity::GeneralShuffle,
        Identity::Split2,
        Identity::Split3,
        Identity::Absorb,
        Identity::Fundamental,
        Identity::BracketReduction,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Identity::Igp => "igp",
            Identity::Db => "db",
            Identity::NewReductionFirst => "new-reduction-1",
            Identity::NewReductionSecond => "new-reduction-2",
            Identity::ShuffleBasic => "shuffle-basic",
            Identity::Shuffle => "shuffle",
            Identity::Lifting => "lifting",
            Identity::GeneralShuffle => "general-shuffle",
            Identity::Split2 => "split-2",
            Identity::Split3 => "split-3",
            Identity::Absorb => "absorb",
            Identity::Fundamental => "fundamental-reduction",
            Identity::BracketReduction => "bracket-reduction",
        }
    }

    /// One random instance as `(lhs, rhs)`; parts have length at most `cap`.
    pub fn instance(self, rng: &mut ChaCha8Rng, n: usize, cap: usize) -> (BracketPolynomial, BracketPolynomial) {
        let n = n.max(2) as Var;
        let var = |rng: &mut ChaCha8Rng| rng.gen_range(0..n);
        let seq = |rng: &mut ChaCha8Rng, lo: usize| -> Word {
            let len = rng.gen_range(lo..=cap.max(lo));
            (0..len).map(|_| rng.gen_range(0..n)).collect()
        };
        match self {
            Identity::Igp => {
                let v: Vec<Var> = (0..5).map(|_| var(rng)).collect();
                let lhs = sum(vec![
                    brackets(q(1), &[vec![v[0], v[1]], vec![v[2], v[3], v[4]]]),
                    brackets(q(-1), &[vec![v[0], v[2]], vec![v[1], v[3], v[4]]]),
                    brackets(q(1), &[vec![v[0], v[3]], vec![v[1], v[2], v[4]]]),
                    brackets(q(-1), &[vec![v[0], v[4]], vec![v[1], v[2], v[3]]]),
                ]);
                (lhs, BracketPolynomial::zero())
            }
            Identity::Db => {
                let v: Vec<Var> = (0..6).map(|_| var(rng)).collect();
                let lhs = brackets(q(1), &[v[..3].to_vec(), v[3..].to_vec()]);
                let perms: [([usize; 3], i64); 6] =
                    [([0, 1, 2], 1), ([0, 2, 1], -1), ([1, 0, 2], -1), ([1, 2, 0], 1), ([2, 0, 1], 1), ([2, 1, 0], -1)];
                let mut det = BracketPolynomial::zero();
                for (p, s) in perms {
                    let f: Vec<Word> = (0..3).map(|i| vec![v[i], v[3 + p[i]]]).collect();
                    det.add_scaled(&brackets(q(1), &f), &q(-s));
                }
                (lhs, det)
            }
            Identity::NewReductionFirst => {
                let (a, b) = (seq(rng, 0), seq(rng, 0));
                let lhs = sum(vec![
                    product(qf(1, 2), &[Piece::W(cat(&[&a, &b]))]),
                    product(qf(1, 2), &[Piece::W(cat(&[&b, &a]))]),
                ]);
                let sb = sign(b.len());
                let rhs = sum(vec![
                    product(q(1), &[Piece::B(cat(&[&a, &b]))]),
                    product(sb.clone(), &[Piece::W(a.clone()), Piece::B(rev(&b))]),
                    product(-sb, &[Piece::B(a.clone()), Piece::W(rev(&b))]),
                ]);
                (lhs, rhs)
            }
            Identity::NewReductionSecond => {
                let (a, b) = (seq(rng, 0), seq(rng, 0));
                let lhs = sum(vec![
                    product(qf(1, 2), &[Piece::W(cat(&[&a, &b]))]),
                    product(-sign(a.len() + b.len()) / q(2), &[Piece::W(cat(&[&rev(&a), &rev(&b)]))]),
                ]);
                let sa = sign(a.len());
                let rhs = sum(vec![
                    product(sa.clone(), &[Piece::B(rev(&a)), Piece::W(b.clone())]),
                    product(-sa, &[Piece::W(rev(&a)), Piece::B(b.clone())]),
                ]);
                (lhs, rhs)
            }
            Identity::ShuffleBasic => {
                let (v, w) = (var(rng), var(rng));
                let (b, c) = (seq(rng, 0), seq(rng, 0));
                let lhs = sum(vec![
                    product(q(1), &[Piece::W(vec![v]), Piece::B(cat(&[&b, &[w], &c]))]),
                    product(q(1), &[Piece::W(vec![w]), Piece::B(cat(&[&c, &[v], &b]))]),
                ]);
                let sb = sign(b.len());
                let br = rev(&b);
                let rhs = sum(vec![
                    product(q(1), &[Piece::W(cat(&[&[w], &c, &[v]])), Piece::B(br.clone())]),
                    product(q(-1), &[Piece::B(cat(&[&[w], &c, &[v]])), Piece::W(br.clone())]),
                    product(q(-1), &[Piece::W(cat(&[&[w], &br, &[v]])), Piece::B(c.clone())]),
                    product(q(1), &[Piece::B(cat(&[&[w], &br, &[v]])), Piece::W(c.clone())]),
                ])
                .scaled(&sb);
                (lhs, rhs)
            }
            Identity::Shuffle => {
                let (a, b, c) = (seq(rng, 0), seq(rng, 0), seq(rng, 0));
                let (v, w) = (var(rng), var(rng));
                let lhs = brackets(q(1), &[cat(&[&a, &[v]]), cat(&[&b, &[w], &c])]);
                (lhs, shuffle_rhs(&a, v, &b, w, &c))
            }
            Identity::Lifting => {
                let (b, d, c) = (seq(rng, 0), seq(rng, 0), seq(rng, 0));
                let (u, v, a, w) = (var(rng), var(rng), var(rng), var(rng));
                let lhs = brackets(q(1), &[cat(&[&b, &[u, v]]), cat(&[&[a], &d, &[w], &c])]);
                (lhs, lifting_rhs(&b, u, v, a, &d, w, &c))
            }
            Identity::GeneralShuffle => {
                let (a, b, c, d) = (seq(rng, 0), seq(rng, 0), seq(rng, 0), seq(rng, 0));
                let (v, w) = (var(rng), var(rng));
                let lhs = brackets(q(1), &[cat(&[&a, &[v], &d]), cat(&[&b, &[w], &c])]);
                (lhs, general_shuffle_rhs(&a, v, &d, &b, w, &c))
            }
            Identity::Split2 | Identity::Split3 => {
                let k = if self == Identity::Split2 { 2 } else { 3 };
                let cells: Vec<Word> = (0..k)
                    .map(|_| {
                        let mid = seq(rng, 0);
                        cat(&[&[var(rng)], &mid, &[var(rng)]])
                    })
                    .collect();
                (brackets(q(1), &[cells.concat()]), split_rhs(&cells))
            }
            Identity::Absorb => {
                let (b, c) = (seq(rng, 0), seq(rng, 0));
                let (u, v, w, d) = (var(rng), var(rng), var(rng), var(rng));
                let lhs = brackets(q(1), &[cat(&[&b, &[u, v]]), cat(&[&[w], &c, &[d]])]);
                (lhs, absorb_rhs(&b, u, v, w, &c, d))
            }
            Identity::Fundamental => {
                let d = seq(rng, 1);
                let (u, v) = (var(rng), var(rng));
                (product(q(1), &[Piece::W(cat(&[&[u], &d, &[v]]))]), fundamental_rhs(u, &d, v))
            }
            Identity::BracketReduction => {
                let (c, d, e) = (seq(rng, 0), seq(rng, 1), seq(rng, 0));
                let (u, v) = (var(rng), var(rng));
                let lhs = brackets(q(1), &[cat(&[&c, &[u], &d, &[v], &e])]);
                (lhs, bracket_reduction_rhs(&c, u, &d, v, &e))
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityResult {
    pub name: String,
    pub instances: usize,
    pub passed: usize,
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub seed: u64,
    pub results: Vec<IdentityResult>,
}

impl IdentityReport {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed == r.instances)
    }
}

/// Checks every identity on `shapes` random instances at `points` oracle points each.
pub fn check_basic_identities(seed: u64, shapes: usize, points: usize) -> Result<IdentityReport> {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut results = Vec::new();
    for id in Identity::ALL {
        let mut r = IdentityResult { name: id.name().into(), instances: shapes, passed: 0, failures: Vec::new() };
        for k in 0..shapes {
            let (lhs, rhs) = id.instance(&mut rng, 6, 2);
            let z = check_zero(&lhs.sub(&rhs), points, seed.wrapping_add(k as u64))?;
            if z.zero {
                r.passed += 1;
            } else {
                r.failures.push(format!("{lhs:?}"));
            }
        }
        results.push(r);
    }
    Ok(IdentityReport { seed, results })
}
