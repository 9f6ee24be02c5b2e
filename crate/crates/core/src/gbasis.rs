//! Closed-form Gröbner bases of the vector-variable syzygy ideals and the
//! reduction engine.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{
    is_ascending, is_non_descending, parity_sign, q, Monomial, SquarePart, VVPolynomial, Var,
    VariableContext, Word,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum RingKind {
    Multilinear,
    General,
    SquareFree,
}

impl RingKind {
    pub fn folds(self) -> bool {
        self == RingKind::SquareFree
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Family {
    Fold,
    EG2,
    G3,
    /// `EGj`; the window has length `j + 1`.
    EG(usize),
    /// `Gj` for `j > 3`; the window has length `j`.
    G(usize),
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Fold => write!(f, "fold"),
            Family::EG2 => write!(f, "EG2"),
            Family::G3 => write!(f, "G3"),
            Family::EG(j) => write!(f, "EG{j}"),
            Family::G(j) => write!(f, "G{j}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteRule {
    pub lhs: Monomial,
    pub rhs: VVPolynomial,
    pub family: Family,
}

impl RewriteRule {
    /// `lhs - rhs`, an element of the syzygy ideal.
    pub fn binomial(&self) -> VVPolynomial {
        let mut p = VVPolynomial::monomial(self.lhs.clone(), q(1));
        p.add_scaled(&self.rhs, &q(-1));
        p
    }
}

#[derive(Clone, Debug)]
pub struct RuleSet {
    pub kind: RingKind,
    pub rules: Vec<RewriteRule>,
}

/// A matched leader inside a word.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Window {
    pub family: Family,
    pub start: usize,
    pub len: usize,
}

/// First descent at or after `from`, i.e. the least `k >= from` with `w[k] < w[k-1]`.
fn first_descent(w: &[Var], from: usize) -> Option<usize> {
    (from.max(1)..w.len()).find(|&k| w[k] < w[k - 1])
}

/// `x y D z` with `z < y < x < D[0]`.
fn match_g(kind: RingKind, w: &[Var], p: usize) -> Option<usize> {
    if p + 4 > w.len() {
        return None;
    }
    let (x, y) = (w[p], w[p + 1]);
    if y >= x || w[p + 2] <= x {
        return None;
    }
    let k = first_descent(w, p + 3)?;
    let z = w[k];
    if z >= y {
        return None;
    }
    let d = &w[p + 2..k];
    let ok = match kind {
        RingKind::General => d.len() < 2 || d[d.len() - 2] < d[d.len() - 1],
        _ => is_ascending(d),
    };
    ok.then_some(k + 1 - p)
}

/// `x y x D z` with `z < y < x <= D[0]`.
fn match_eg(kind: RingKind, w: &[Var], p: usize) -> Option<usize> {
    if p + 4 > w.len() {
        return None;
    }
    let (x, y) = (w[p], w[p + 1]);
    if y >= x || w[p + 2] != x {
        return None;
    }
    let k = first_descent(w, p + 3)?;
    let z = w[k];
    if z >= y {
        return None;
    }
    let run = &w[p + 2..k];
    let ok = match kind {
        RingKind::General => run.len() < 2 || run[run.len() - 2] < run[run.len() - 1],
        RingKind::SquareFree => is_ascending(run),
        RingKind::Multilinear => false,
    };
    ok.then_some(k + 1 - p)
}

fn match_g3(w: &[Var], p: usize) -> bool {
    if p + 3 > w.len() {
        return false;
    }
    let (x, y, z) = (w[p], w[p + 1], w[p + 2]);
    (x > y && y > z) || (x > z && z > y)
}

fn match_eg2(w: &[Var], p: usize) -> bool {
    if p + 3 > w.len() {
        return false;
    }
    let (x, y, z) = (w[p], w[p + 1], w[p + 2]);
    (x == y && z < y) || (y == z && x > y)
}

/// Every rule leader starting at `p`, in family precedence order.
pub fn windows_at(kind: RingKind, w: &[Var], p: usize) -> Vec<Window> {
    let mut out = Vec::new();
    if kind == RingKind::SquareFree && p + 1 < w.len() && w[p] == w[p + 1] {
        out.push(Window { family: Family::Fold, start: p, len: 2 });
    }
    if kind == RingKind::General && match_eg2(w, p) {
        out.push(Window { family: Family::EG2, start: p, len: 3 });
    }
    if match_g3(w, p) {
        out.push(Window { family: Family::G3, start: p, len: 3 });
    }
    if let Some(len) = match_eg(kind, w, p) {
        out.push(Window { family: Family::EG(len - 1), start: p, len });
    }
    if let Some(len) = match_g(kind, w, p) {
        out.push(Window { family: Family::G(len), start: p, len });
    }
    out
}

/// Leftmost leader, ties broken by family precedence.
pub fn find_leader(kind: RingKind, w: &[Var]) -> Option<Window> {
    (0..w.len()).find_map(|p| windows_at(kind, w, p).into_iter().next())
}

pub fn all_leaders(kind: RingKind, w: &[Var]) -> Vec<Window> {
    (0..w.len()).flat_map(|p| windows_at(kind, w, p)).collect()
}

/// Right-hand side of a window, as signed words (empty list for a fold).
pub fn window_rhs(family: Family, win: &[Var]) -> Vec<(i64, Word)> {
    let rev = |s: &[Var]| -> Word { s.iter().rev().copied().collect() };
    let cat = |parts: &[&[Var]]| -> Word { parts.concat() };
    let l = win.len();
    let e = parity_sign(l);
    match family {
        Family::Fold => Vec::new(),
        Family::EG2 => {
            let mut w = win.to_vec();
            w.sort();
            vec![(1, w)]
        }
        Family::G3 => {
            // cba -> abc + acb - bca and cab -> bac + bca - acb share one shape
            let (x, y, z) = (win[0], win[1], win[2]);
            vec![(1, vec![z, y, x]), (1, vec![z, x, y]), (-1, vec![y, x, z])]
        }
        Family::G(_) => {
            let (x, y, z) = (win[0], win[1], win[l - 1]);
            let d = &win[2..l - 1];
            vec![
                (1, cat(&[&[y], d, &[z, x]])),
                (e, cat(&[&[x, z], &rev(d), &[y]])),
                (-e, cat(&[&[z], &rev(d), &[y, x]])),
            ]
        }
        Family::EG(_) => {
            let (x, y, z) = (win[0], win[1], win[l - 1]);
            let d = &win[3..l - 1];
            vec![
                (1, cat(&[&[y, x], d, &[z, x]])),
                (e, cat(&[&[x, z], &rev(d), &[x, y]])),
                (-e, cat(&[&[z], &rev(d), &[x, y, x]])),
            ]
        }
    }
}

fn rule_from_window(family: Family, win: Word) -> RewriteRule {
    let rhs = match family {
        Family::Fold => VVPolynomial::monomial(Monomial::new(Vec::new(), SquarePart::single(win[0], 1)), q(1)),
        _ => VVPolynomial::from_terms(
            window_rhs(family, &win).into_iter().map(|(c, w)| (Monomial::word(w), q(c))),
        ),
    };
    RewriteRule { lhs: Monomial::word(win), rhs, family }
}

/// Strictly increasing index tuples of length `k` below `n`.
fn combinations(n: usize, k: usize) -> Vec<Vec<Var>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<Var>, out: &mut Vec<Vec<Var>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i as Var);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Non-descending tuples of length `k` with entries in `lo..n`.
fn multichoose(lo: usize, n: usize, k: usize) -> Vec<Vec<Var>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for i in lo..n {
        for mut rest in multichoose(i, n, k - 1) {
            rest.insert(0, i as Var);
            out.push(rest);
        }
    }
    out
}

fn g3_rules(n: usize, out: &mut Vec<RewriteRule>) {
    for t in combinations(n, 3) {
        let (a, b, c) = (t[0], t[1], t[2]);
        out.push(rule_from_window(Family::G3, vec![c, b, a]));
        out.push(rule_from_window(Family::G3, vec![c, a, b]));
    }
}

/// `G3` and `Gj` over strictly increasing indices.
pub fn generate_multilinear(ctx: &VariableContext) -> Result<RuleSet> {
    let n = ctx.n();
    if n < 3 {
        return Err(Error::Domain("the multilinear base needs at least 3 variables".into()));
    }
    let mut rules = Vec::new();
    g3_rules(n, &mut rules);
    for j in 4..=n {
        for t in combinations(n, j) {
            let mut win = vec![t[2], t[1]];
            win.extend_from_slice(&t[3..]);
            win.push(t[0]);
            rules.push(rule_from_window(Family::G(j), win));
        }
    }
    Ok(RuleSet { kind: RingKind::Multilinear, rules })
}

/// `EG2`, `G3`, `Gj`, `EGj`, with leaders up to length `max_len`.
pub fn generate_general(ctx: &VariableContext, max_len: usize) -> Result<RuleSet> {
    let n = ctx.n();
    if n < 2 {
        return Err(Error::Domain("the general base needs at least 2 variables".into()));
    }
    let mut rules = Vec::new();
    for t in combinations(n, 2) {
        let (a, b) = (t[0], t[1]);
        rules.push(rule_from_window(Family::EG2, vec![b, b, a]));
        rules.push(rule_from_window(Family::EG2, vec![b, a, a]));
    }
    g3_rules(n, &mut rules);
    for t in combinations(n, 3) {
        let (i1, i2, i3) = (t[0], t[1], t[2]);
        // Gj: i3 < i4 <= ... <= i_{j-1} < i_j
        for j in 4..=max_len {
            for d in general_tails(i3 as usize + 1, n, j - 3) {
                let mut win = vec![i3, i2];
                win.extend_from_slice(&d);
                win.push(i1);
                rules.push(rule_from_window(Family::G(j), win));
            }
        }
        // EGj: i3 <= i4 <= ... <= i_{j-1} < i_j, leader of length j + 1
        for j in 3..max_len {
            let tails = if j == 3 { vec![Vec::new()] } else { general_tails(i3 as usize, n, j - 3) };
            for d in tails {
                if j > 3 && d.len() == 1 && d[0] == i3 {
                    continue;
                }
                let mut win = vec![i3, i2, i3];
                win.extend_from_slice(&d);
                win.push(i1);
                rules.push(rule_from_window(Family::EG(j), win));
            }
        }
    }
    Ok(RuleSet { kind: RingKind::General, rules })
}

/// Non-descending tails in `lo..n` whose last step is strict.
fn general_tails(lo: usize, n: usize, k: usize) -> Vec<Vec<Var>> {
    multichoose(lo, n, k)
        .into_iter()
        .filter(|d| d.len() < 2 || d[d.len() - 2] < d[d.len() - 1])
        .collect()
}

/// Folds, `G3`, `Gj` for `j <= n`, `EGk` for `3 <= k <= n + 1`.
pub fn generate_squarefree(ctx: &VariableContext) -> Result<RuleSet> {
    let n = ctx.n();
    if n < 2 {
        return Err(Error::Domain("the square-free base needs at least 2 variables".into()));
    }
    let mut rules = Vec::new();
    for v in ctx.vars() {
        rules.push(rule_from_window(Family::Fold, vec![v, v]));
    }
    g3_rules(n, &mut rules);
    for j in 4..=n {
        for t in combinations(n, j) {
            let mut win = vec![t[2], t[1]];
            win.extend_from_slice(&t[3..]);
            win.push(t[0]);
            rules.push(rule_from_window(Family::G(j), win));
        }
    }
    for k in 3..=n + 1 {
        for t in combinations(n, k) {
            let mut win = vec![t[2], t[1], t[2]];
            win.extend_from_slice(&t[3..]);
            win.push(t[0]);
            rules.push(rule_from_window(Family::EG(k), win));
        }
    }
    Ok(RuleSet { kind: RingKind::SquareFree, rules })
}

pub fn generate(kind: RingKind, ctx: &VariableContext, max_len: usize) -> Result<RuleSet> {
    match kind {
        RingKind::Multilinear => generate_multilinear(ctx),
        RingKind::General => generate_general(ctx, max_len),
        RingKind::SquareFree => generate_squarefree(ctx),
    }
}

/// Applies the rule of `win` to `m`.
pub fn apply_window(kind: RingKind, m: &Monomial, win: Window) -> VVPolynomial {
    let w = m.left();
    let (pre, mid, post) = (&w[..win.start], &w[win.start..win.start + win.len], &w[win.start + win.len..]);
    let mut out = VVPolynomial::zero();
    if win.family == Family::Fold {
        let mut s = m.squares().clone();
        s.add(mid[0], 1);
        let left = [pre, post].concat();
        out.add_term(Monomial::folded(&left, s), q(1));
        return out;
    }
    for (c, r) in window_rhs(win.family, mid) {
        let left = [pre, &r[..], post].concat();
        let mono = if kind.folds() {
            Monomial::folded(&left, m.squares().clone())
        } else {
            Monomial::new(left, m.squares().clone())
        };
        out.add_term(mono, q(c));
    }
    out
}

pub const DEFAULT_FUEL: u64 = 1_000_000;

/// Step budget: `CLIFFORD_BRACKET_FUEL` if set, else the default.
pub fn default_fuel() -> u64 {
    std::env::var("CLIFFORD_BRACKET_FUEL")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_FUEL)
}

/// Reduction by the closed-form base of one ring kind.
///
/// Always rewrites the highest non-reduced term at its leftmost leader.
#[derive(Debug)]
pub struct Reducer {
    kind: RingKind,
    fuel: u64,
    steps: RefCell<HashMap<Monomial, Option<VVPolynomial>>>,
}

impl Reducer {
    pub fn new(kind: RingKind) -> Self {
        Self::with_fuel(kind, default_fuel())
    }

    pub fn with_fuel(kind: RingKind, fuel: u64) -> Self {
        Reducer { kind, fuel, steps: RefCell::new(HashMap::new()) }
    }

    pub fn kind(&self) -> RingKind {
        self.kind
    }

    /// One rewrite at the leftmost leader, or `None` when `m` is normal.
    pub fn step(&self, m: &Monomial) -> Option<VVPolynomial> {
        if let Some(r) = self.steps.borrow().get(m) {
            return r.clone();
        }
        let r = find_leader(self.kind, m.left()).map(|win| apply_window(self.kind, m, win));
        self.steps.borrow_mut().insert(m.clone(), r.clone());
        r
    }

    pub fn is_reduced(&self, m: &Monomial) -> bool {
        find_leader(self.kind, m.left()).is_none()
    }

    pub fn reduce(&self, p: &VVPolynomial) -> Result<VVPolynomial> {
        let mut work = if self.kind.folds() { migrate_squares(p) } else { p.clone() };
        let mut out = VVPolynomial::zero();
        let mut fuel = self.fuel;
        while let Some((m, c)) = work.pop_leading() {
            match self.step(&m) {
                Some(rhs) => {
                    if fuel == 0 {
                        return Err(Error::FuelExhausted(self.fuel));
                    }
                    fuel -= 1;
                    work.add_scaled(&rhs, &c);
                }
                None => out.add_term(m, c),
            }
        }
        Ok(out)
    }

    pub fn reduce_monomial(&self, m: &Monomial) -> Result<VVPolynomial> {
        self.reduce(&VVPolynomial::monomial(m.clone(), q(1)))
    }
}

/// Folds explicit adjacent squares into the square part.
pub fn migrate_squares(p: &VVPolynomial) -> VVPolynomial {
    p.folded()
}

/// Positions `k` with `w[k] < w[k-1]`.
fn split_at_descents(w: &[Var]) -> Vec<usize> {
    (1..w.len()).filter(|&k| w[k] < w[k - 1]).collect()
}

/// The structural description of normal monomials, clause by clause.
pub fn is_normal_shape(m: &Monomial, kind: RingKind) -> bool {
    let w = m.left();
    if kind != RingKind::SquareFree && !m.squares().is_one() {
        return false;
    }
    let zs = split_at_descents(w);
    match kind {
        RingKind::Multilinear | RingKind::SquareFree => {
            // Y1 z1 ... Yk zk [Y_{k+1}], every z at a descent
            let mut ys: Vec<&[Var]> = Vec::new();
            let mut z = Vec::new();
            let mut start = 0;
            for &k in &zs {
                if k == start {
                    return false;
                }
                ys.push(&w[start..k]);
                z.push(w[k]);
                start = k + 1;
            }
            if start < w.len() {
                ys.push(&w[start..]);
            }
            let ycat: Word = ys.concat();
            let zs_ok = if kind == RingKind::Multilinear { is_ascending(&z) } else { is_non_descending(&z) };
            let ycat_ok =
                if kind == RingKind::Multilinear { is_ascending(&ycat) } else { is_non_descending(&ycat) };
            let blocks_ok = ys.iter().all(|y| !y.is_empty() && is_ascending(y));
            let trailing_ok = (0..z.len()).all(|i| z[i] < *ys[i].last().unwrap());
            zs_ok && ycat_ok && blocks_ok && trailing_ok
        }
        RingKind::General => {
            // Y1 h1 z1 ... Yk hk zk [Y_{k+1}]: the h sit just before the descents
            let mut rest: Word = Vec::new();
            let mut hs = Vec::new();
            let mut z = Vec::new();
            let mut start = 0;
            for &k in &zs {
                if k == start {
                    return false;
                }
                let seg = &w[start..k];
                let (h, y) = seg.split_last().unwrap();
                if let Some(t) = y.last() {
                    if t >= h {
                        return false;
                    }
                }
                if !is_non_descending(y) {
                    return false;
                }
                hs.push(*h);
                z.push(w[k]);
                rest.extend_from_slice(seg);
                start = k + 1;
            }
            rest.extend_from_slice(&w[start..]);
            let hz_ok = hs.iter().zip(&z).all(|(h, z)| h > z);
            is_non_descending(&z) && is_non_descending(&hs) && is_non_descending(&rest) && hz_ok
        }
    }
}

pub type RuleIndex = BTreeMap<Family, usize>;

/// Counts of rules by family.
pub fn family_counts(rs: &RuleSet) -> RuleIndex {
    let mut out = BTreeMap::new();
    for r in &rs.rules {
        *out.entry(r.family).or_insert(0) += 1;
    }
    out
}
