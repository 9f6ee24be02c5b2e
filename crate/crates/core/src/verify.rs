//! Oracle-backed verification suites with machine-readable reports.

use serde::Serialize;

use crate::error::Result;
use crate::gbasis::{generate, is_normal_shape, Reducer, RingKind};
use crate::model::VariableContext;
use crate::oracle::{all_monomials, brute_force_closure, check_zero, quotient_dimension, Center};
use crate::straighten::check_basic_identities;
use crate::unibracket::{Content, RVariant, UniGroebnerBase};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Identities,
    Gb,
    Confluence,
    Dimension,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub total: usize,
    pub passed: usize,
    pub failures: Vec<String>,
}

impl Check {
    fn new(name: impl Into<String>) -> Self {
        Check { name: name.into(), total: 0, passed: 0, failures: Vec::new() }
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.total += 1;
        if ok {
            self.passed += 1;
        } else if self.failures.len() < 10 {
            self.failures.push(what());
        }
    }

    pub fn ok(&self) -> bool {
        self.passed == self.total
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub trials: usize,
    pub passed: bool,
    pub checks: Vec<Check>,
}

pub fn run(suite: Suite, seed: u64, trials: usize) -> Result<SuiteReport> {
    let checks = match suite {
        Suite::Identities => identities(seed, trials)?,
        Suite::Gb => gb_soundness(seed, trials)?,
        Suite::Confluence => confluence()?,
        Suite::Dimension => dimension()?,
    };
    let passed = checks.iter().all(Check::ok);
    Ok(SuiteReport { suite, seed, trials, passed, checks })
}

/// Every identity on `trials` random shapes, 20 oracle points each.
pub fn identities(seed: u64, trials: usize) -> Result<Vec<Check>> {
    let report = check_basic_identities(seed, trials, 20)?;
    Ok(report
        .results
        .into_iter()
        .map(|r| Check { name: r.name, total: r.instances, passed: r.passed, failures: r.failures })
        .collect())
}

/// Contents with `k` distinct variables and total size `m`, every multiplicity positive.
pub fn contents(k: usize, m: usize) -> Vec<Content> {
    fn go(k: usize, left: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == k {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for x in 1..=left {
            cur.push(x as u32);
            go(k, left - x, cur, out);
            cur.pop();
        }
    }
    let mut raw = Vec::new();
    go(k, m, &mut Vec::new(), &mut raw);
    raw.into_iter().map(|v| v.into_iter().enumerate().map(|(i, x)| (i as u16, x)).collect()).collect()
}

/// Rules of every ring kind and the uni-bracket bases for `|M| <= 6`.
pub fn gb_soundness(seed: u64, trials: usize) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let plan: [(RingKind, &[usize], usize); 3] = [
        (RingKind::Multilinear, &[3, 4, 5], 5),
        (RingKind::General, &[2, 3, 4], 7),
        (RingKind::SquareFree, &[2, 3, 4], 5),
    ];
    for (kind, ns, max_len) in plan {
        for &n in ns {
            let rs = generate(kind, &VariableContext::numbered(n), max_len)?;
            let mut c = Check::new(format!("{kind:?} n={n}"));
            for (i, r) in rs.rules.iter().enumerate() {
                let z = check_zero(&r.binomial(), trials, seed.wrapping_add(i as u64))?;
                c.record(z.zero, || format!("{} rule at {:?}", r.family, r.lhs.left()));
            }
            checks.push(c);
        }
    }
    let reducer = Reducer::new(RingKind::SquareFree);
    for variant in [RVariant::Refined, RVariant::Uniform] {
        let mut c = Check::new(format!("BG {variant:?} |M|<=6"));
        for m in 3..=6 {
            for k in 2..=m.min(4) {
                for content in contents(k, m) {
                    let base = UniGroebnerBase::generate(&content, variant, &reducer)?;
                    for (i, e) in base.elements.values().enumerate() {
                        let z = check_zero(&Center(&e.reduced), trials, seed.wrapping_add(i as u64))?;
                        c.record(z.zero, || format!("{} element at {:?}", e.family, e.leader().left()));
                    }
                }
            }
        }
        checks.push(c);
    }
    Ok(checks)
}

/// Exhaustive closure of every monomial against the reducer.
pub fn confluence() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for (kind, n) in [(RingKind::General, 3), (RingKind::Multilinear, 5)] {
        let reducer = Reducer::new(kind);
        let mut c = Check::new(format!("{kind:?} n={n} degree<=5"));
        for m in 0..=5 {
            for mono in all_monomials(kind, n, m) {
                let closure = brute_force_closure(&mono, kind, 200_000)?;
                let nf = reducer.reduce_monomial(&mono)?;
                c.record(closure.unique() == Some(&nf), || format!("{:?}", mono.left()));
            }
        }
        checks.push(c);
    }
    Ok(checks)
}

/// Shape counts against the rank-computed quotient at `n = 3`, `m <= 4`.
pub fn dimension() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for kind in [RingKind::Multilinear, RingKind::General, RingKind::SquareFree] {
        let mut c = Check::new(format!("{kind:?} n=3"));
        for m in 0..=4 {
            let shapes = all_monomials(kind, 3, m).iter().filter(|t| is_normal_shape(t, kind)).count();
            let dim = quotient_dimension(kind, 3, m)?;
            c.record(shapes == dim, || format!("m={m}: {shapes} normal shapes, quotient dimension {dim}"));
        }
        checks.push(c);
    }
    Ok(checks)
}
