//! Text format for vector-variable and bracket polynomials.
//!
//! ```text
//! vars v1<v2<v3;
//! 3/2 [v1 v2][v2 v3] @ v1^2 - v2 v1
//! ```
//!
//! Without a `vars` header the variables are inferred and ordered by name
//! (alphabetic prefix, then numeric suffix).

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::model::*;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Vars,
    Ident(String),
    Num(BigInt),
    Slash,
    Lt,
    Semi,
    LBr,
    RBr,
    At,
    Caret,
    Plus,
    Minus,
    Eof,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Pos {
    line: usize,
    col: usize,
}

fn syntax(p: Pos, msg: impl Into<String>) -> Error {
    Error::Syntax { line: p.line, col: p.col, msg: msg.into() }
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>> {
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let mut out = Vec::new();
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            Tok::Num(s.parse().expect("digits"))
        } else if c.is_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            if s == "vars" {
                Tok::Vars
            } else {
                Tok::Ident(s)
            }
        } else {
            i += 1;
            match c {
                '/' => Tok::Slash,
                '<' => Tok::Lt,
                ';' => Tok::Semi,
                '[' => Tok::LBr,
                ']' => Tok::RBr,
                '@' | '□' => Tok::At,
                '^' => Tok::Caret,
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                _ => return Err(syntax(pos, format!("unexpected character `{c}`"))),
            }
        };
        col += i - start;
        out.push((tok, pos));
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

#[derive(Clone, Debug)]
enum AstAtom {
    Var(String, Pos),
    Bracket(Vec<AstAtom>, Pos),
}

#[derive(Clone, Debug)]
struct AstTerm {
    coef: Coef,
    atoms: Vec<AstAtom>,
    squares: Vec<(String, u32, Pos)>,
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<Pos> {
        let (got, p) = self.bump();
        if got == t {
            Ok(p)
        } else {
            Err(syntax(p, format!("expected {what}")))
        }
    }

    fn header(&mut self) -> Result<Option<Vec<(String, Pos)>>> {
        if *self.peek() != Tok::Vars {
            return Ok(None);
        }
        self.bump();
        let mut names = Vec::new();
        loop {
            match self.bump() {
                (Tok::Ident(s), p) => names.push((s, p)),
                (_, p) => return Err(syntax(p, "expected a variable name")),
            }
            match self.bump() {
                (Tok::Lt, _) => continue,
                (Tok::Semi, _) => break,
                (_, p) => return Err(syntax(p, "expected `<` or `;`")),
            }
        }
        Ok(Some(names))
    }

    fn coefficient(&mut self) -> Result<Option<Coef>> {
        let Tok::Num(n) = self.peek().clone() else { return Ok(None) };
        self.bump();
        if *self.peek() == Tok::Slash {
            self.bump();
            let p = self.pos();
            match self.bump() {
                (Tok::Num(d), _) if !d.is_zero() => return Ok(Some(Coef::new(n, d))),
                _ => return Err(syntax(p, "expected a nonzero denominator")),
            }
        }
        Ok(Some(Coef::from_integer(n)))
    }

    fn atom(&mut self) -> Result<Option<AstAtom>> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let p = self.pos();
                self.bump();
                Ok(Some(AstAtom::Var(s, p)))
            }
            Tok::LBr => {
                let p = self.pos();
                self.bump();
                let mut inner = Vec::new();
                while let Some(a) = self.atom()? {
                    inner.push(a);
                }
                self.expect(Tok::RBr, "`]`")?;
                Ok(Some(AstAtom::Bracket(inner, p)))
            }
            _ => Ok(None),
        }
    }

    fn term(&mut self, negative: bool) -> Result<AstTerm> {
        let start = self.pos();
        let explicit = self.coefficient()?;
        let mut atoms = Vec::new();
        while let Some(a) = self.atom()? {
            atoms.push(a);
        }
        let mut squares = Vec::new();
        let at = *self.peek() == Tok::At;
        if at {
            self.bump();
            while let Tok::Ident(s) = self.peek().clone() {
                let p = self.pos();
                self.bump();
                self.expect(Tok::Caret, "`^` after a squared variable")?;
                let ep = self.pos();
                let e = match self.bump() {
                    (Tok::Num(e), _) => e,
                    _ => return Err(syntax(ep, "expected an exponent")),
                };
                let two = BigInt::from(2);
                if e.is_zero() || !(&e % &two).is_zero() {
                    return Err(syntax(ep, "exponents behind `@` must be positive and even"));
                }
                let pairs: u32 = (e / two).try_into().map_err(|_| syntax(ep, "exponent too large"))?;
                squares.push((s, pairs, p));
            }
            if squares.is_empty() {
                return Err(syntax(self.pos(), "expected `name^2k` after `@`"));
            }
        }
        if explicit.is_none() && atoms.is_empty() && !at {
            return Err(syntax(start, "expected a term"));
        }
        let mut coef = explicit.unwrap_or_else(Coef::one);
        if negative {
            coef = -coef;
        }
        Ok(AstTerm { coef, atoms, squares })
    }

    fn expression(&mut self) -> Result<Vec<AstTerm>> {
        let mut terms = Vec::new();
        let mut negative = match self.peek() {
            Tok::Minus => {
                self.bump();
                true
            }
            Tok::Plus => {
                self.bump();
                false
            }
            _ => false,
        };
        loop {
            terms.push(self.term(negative)?);
            negative = match self.peek() {
                Tok::Plus => false,
                Tok::Minus => true,
                Tok::Eof => break,
                _ => return Err(syntax(self.pos(), "expected `+`, `-` or end of input")),
            };
            self.bump();
        }
        Ok(terms)
    }
}

/// Parse result with non-fatal diagnostics.
#[derive(Clone, Debug)]
pub struct Parsed {
    pub ctx: VariableContext,
    pub poly: BracketPolynomial,
    pub warnings: Vec<String>,
}

/// Splits `v1v2` style runs; a new name starts at a letter after a digit.
fn split_inferred(s: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut cur = String::new();
    let mut seen_digit = false;
    for c in s.chars() {
        if (c.is_alphabetic() || c == '_') && seen_digit {
            out.push(std::mem::take(&mut cur));
            seen_digit = false;
        }
        if c.is_ascii_digit() || c == '\'' {
            seen_digit = true;
        }
        cur.push(c);
    }
    out.push(cur);
    out
}

/// Greedy longest-prefix split into declared names.
fn split_declared(s: &str, ctx: &VariableContext) -> Option<Vec<Var>> {
    if let Some(v) = ctx.lookup(s) {
        return Some(vec![v]);
    }
    let mut out = Vec::new();
    let mut rest = s;
    while !rest.is_empty() {
        let best = ctx.names().iter().filter(|n| rest.starts_with(n.as_str())).max_by_key(|n| n.len())?;
        out.push(ctx.lookup(best).unwrap());
        rest = &rest[best.len()..];
    }
    Some(out)
}

fn name_key(s: &str) -> (String, u64, String) {
    let digits: String = s.chars().rev().take_while(|c| c.is_ascii_digit()).collect::<Vec<_>>().into_iter().rev().collect();
    let prefix = s[..s.len() - digits.len()].to_string();
    (prefix, digits.parse().unwrap_or(0), s.to_string())
}

fn collect_names(atoms: &[AstAtom], out: &mut Vec<String>) {
    for a in atoms {
        match a {
            AstAtom::Var(s, _) => out.extend(split_inferred(s)),
            AstAtom::Bracket(inner, _) => collect_names(inner, out),
        }
    }
}

struct Resolver<'a> {
    ctx: &'a VariableContext,
    declared: bool,
    warnings: Vec<String>,
}

impl Resolver<'_> {
    fn names(&self, s: &str, p: Pos) -> Result<Vec<Var>> {
        let found = if self.declared {
            split_declared(s, self.ctx)
        } else {
            split_inferred(s).iter().map(|n| self.ctx.lookup(n)).collect()
        };
        found.ok_or_else(|| syntax(p, format!("undeclared variable `{s}`")))
    }

    fn var(&self, s: &str, p: Pos) -> Result<Var> {
        match self.ctx.lookup(s) {
            Some(v) => Ok(v),
            None => Err(syntax(p, format!("undeclared variable `{s}`"))),
        }
    }

    /// Contents of a bracket as a combination of words; inner brackets expand as binomials.
    fn bracket_words(&mut self, items: &[AstAtom]) -> Result<Vec<(Coef, Word)>> {
        let mut acc: Vec<(Coef, Word)> = vec![(Coef::one(), Vec::new())];
        for a in items {
            match a {
                AstAtom::Var(s, p) => {
                    let vs = self.names(s, *p)?;
                    for (_, w) in acc.iter_mut() {
                        w.extend_from_slice(&vs);
                    }
                }
                AstAtom::Bracket(inner, p) => {
                    let alts = self.bracket_words(inner)?;
                    if alts.iter().any(|(_, w)| w.len() == 1) {
                        self.warnings.push(format!("line {}, column {}: length-1 bracket is zero", p.line, p.col));
                    }
                    let mut next = Vec::new();
                    for (c, w) in &acc {
                        for (d, x) in &alts {
                            let half = c * d / q(2);
                            next.push((half.clone(), cat2(w, x)));
                            let r: Word = x.iter().rev().copied().collect();
                            next.push((half * q(parity_sign(x.len())), cat2(w, &r)));
                        }
                    }
                    acc = next;
                }
            }
        }
        Ok(acc)
    }

    fn term(&mut self, t: &AstTerm) -> Result<BracketPolynomial> {
        let mut squares = SquarePart::one();
        for (s, k, p) in &t.squares {
            squares.add(self.var(s, *p)?, *k);
        }
        let unit = BracketMonomial::new(Vec::new(), squares);
        let mut acc = BracketPolynomial::monomial(unit, t.coef.clone());
        for a in &t.atoms {
            let factor = match a {
                AstAtom::Var(s, p) => {
                    let atoms = self.names(s, *p)?.into_iter().map(Atom::Var).collect();
                    BracketPolynomial::term(atoms, SquarePart::one(), Coef::one())
                }
                AstAtom::Bracket(inner, p) => {
                    let mut f = BracketPolynomial::zero();
                    for (c, w) in self.bracket_words(inner)? {
                        if w.len() == 1 {
                            self.warnings.push(format!("line {}, column {}: length-1 bracket is zero", p.line, p.col));
                        }
                        f.add_scaled(
                            &BracketPolynomial::term(vec![Atom::Bracket(BracketFactor::new(w))], SquarePart::one(), Coef::one()),
                            &c,
                        );
                    }
                    f
                }
            };
            acc = acc.mul(&factor);
        }
        Ok(acc)
    }
}

fn cat2(a: &[Var], b: &[Var]) -> Word {
    let mut w = a.to_vec();
    w.extend_from_slice(b);
    w
}

/// Parses a document; the header is optional.
pub fn parse(text: &str) -> Result<Parsed> {
    let (ctx, mut polys, warnings) = parse_all(&[text])?;
    Ok(Parsed { ctx, poly: polys.pop().unwrap(), warnings })
}

/// Parses several documents over one shared variable context.
///
/// Headers, where present, must agree; otherwise the variables of all
/// documents are inferred together.
pub fn parse_all(texts: &[&str]) -> Result<(VariableContext, Vec<BracketPolynomial>, Vec<String>)> {
    let mut docs = Vec::new();
    let mut header: Option<Vec<(String, Pos)>> = None;
    for text in texts {
        let mut p = Parser { toks: lex(text)?, at: 0 };
        let h = p.header()?;
        let terms = p.expression()?;
        if let Some(h) = h {
            if let Some(prev) = &header {
                let same = prev.len() == h.len() && prev.iter().zip(&h).all(|(a, b)| a.0 == b.0);
                if !same {
                    return Err(syntax(h[0].1, "variable declarations disagree"));
                }
            } else {
                header = Some(h);
            }
        }
        docs.push(terms);
    }
    let (ctx, declared) = match header {
        Some(names) => {
            let list: Vec<&str> = names.iter().map(|(s, _)| s.as_str()).collect();
            let ctx = VariableContext::new(&list).map_err(|e| match e {
                Error::Context(m) => syntax(names[0].1, m),
                other => other,
            })?;
            (ctx, true)
        }
        None => {
            let mut names = Vec::new();
            for t in docs.iter().flatten() {
                collect_names(&t.atoms, &mut names);
                names.extend(t.squares.iter().map(|(s, _, _)| s.clone()));
            }
            names.sort_by_key(|s| name_key(s));
            names.dedup();
            (VariableContext::new(&names)?, false)
        }
    };
    let mut r = Resolver { ctx: &ctx, declared, warnings: Vec::new() };
    let mut polys = Vec::new();
    for terms in &docs {
        let mut poly = BracketPolynomial::zero();
        for t in terms {
            poly.add_scaled(&r.term(t)?, &Coef::one());
        }
        polys.push(poly);
    }
    let warnings = std::mem::take(&mut r.warnings);
    Ok((ctx, polys, warnings))
}

/// Parses with a fixed context; the text may not carry its own header.
pub fn parse_with(text: &str, ctx: &VariableContext) -> Result<BracketPolynomial> {
    let mut p = Parser { toks: lex(text)?, at: 0 };
    if *p.peek() == Tok::Vars {
        return Err(syntax(p.pos(), "unexpected `vars` header"));
    }
    let terms = p.expression()?;
    let mut r = Resolver { ctx, declared: true, warnings: Vec::new() };
    let mut poly = BracketPolynomial::zero();
    for t in &terms {
        poly.add_scaled(&r.term(t)?, &Coef::one());
    }
    Ok(poly)
}

fn term_body(m: &BracketMonomial, ctx: &VariableContext) -> String {
    let mut s = String::new();
    let mut prev_bracket = false;
    for (i, a) in m.atoms().iter().enumerate() {
        match a {
            Atom::Var(v) => {
                if i > 0 {
                    s.push(' ');
                }
                s.push_str(ctx.name(*v));
                prev_bracket = false;
            }
            Atom::Bracket(b) => {
                if i > 0 && !prev_bracket {
                    s.push(' ');
                }
                let inner: Vec<&str> = b.entries().iter().map(|&v| ctx.name(v)).collect();
                s.push('[');
                s.push_str(&inner.join(" "));
                s.push(']');
                prev_bracket = true;
            }
        }
    }
    if !m.squares().is_one() {
        let sq: Vec<String> = m.squares().iter().map(|(v, k)| format!("{}^{}", ctx.name(v), 2 * k)).collect();
        if !s.is_empty() {
            s.push(' ');
        }
        s.push_str("@ ");
        s.push_str(&sq.join(" "));
    }
    s
}

/// The expression in descending term order; `0` for the zero polynomial.
pub fn print(p: &BracketPolynomial, ctx: &VariableContext) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, t) in p.to_terms().iter().enumerate() {
        let neg = t.coef.is_negative();
        let a = t.coef.abs();
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let body = term_body(&t.monomial, ctx);
        let show_coef = !a.is_one() || t.monomial.atoms().is_empty();
        if show_coef {
            out.push_str(&coef_to_string(&a));
            if !body.is_empty() {
                out.push(' ');
            }
        }
        out.push_str(&body);
    }
    out
}

pub fn print_vv(p: &VVPolynomial, ctx: &VariableContext) -> String {
    print(&BracketPolynomial::from_vv(p), ctx)
}

pub fn print_header(ctx: &VariableContext) -> String {
    format!("vars {};", ctx.names().join("<"))
}

/// Header plus body; `parse` reads it back exactly.
pub fn print_document(p: &BracketPolynomial, ctx: &VariableContext) -> String {
    format!("{} {}", print_header(ctx), print(p, ctx))
}

/// Machine-readable form of a polynomial.
pub fn to_json(p: &BracketPolynomial, ctx: &VariableContext) -> Value {
    let terms: Vec<Value> = p
        .to_terms()
        .iter()
        .map(|t| {
            let factors: Vec<Value> = t
                .monomial
                .atoms()
                .iter()
                .map(|a| match a {
                    Atom::Var(v) => json!({ "var": ctx.name(*v) }),
                    Atom::Bracket(b) => {
                        json!({ "bracket": b.entries().iter().map(|&v| ctx.name(v)).collect::<Vec<_>>() })
                    }
                })
                .collect();
            let squares: BTreeMap<String, u32> =
                t.monomial.squares().iter().map(|(v, k)| (ctx.name(v).to_string(), 2 * k)).collect();
            json!({ "coef": coef_to_string(&t.coef), "factors": factors, "squares": squares })
        })
        .collect();
    json!({ "vars": ctx.names(), "terms": terms, "text": print(p, ctx) })
}

pub fn vv_to_json(p: &VVPolynomial, ctx: &VariableContext) -> Value {
    to_json(&BracketPolynomial::from_vv(p), ctx)
}
