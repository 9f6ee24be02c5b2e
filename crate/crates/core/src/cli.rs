//! Command-line front end.

use std::io::Read;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::gbasis::{default_fuel, generate, Reducer, RingKind};
use crate::model::{Atom, BracketMonomial, BracketPolynomial, SquarePart, VVPolynomial, VariableContext};
use crate::parser::{parse_all, print, print_vv, to_json, vv_to_json};
use crate::straighten::{caianiello_expand, check_basic_identities, to_straight_form, Straightener, Strategy};
use crate::unibracket::{to_unibracket, RVariant, UniGroebnerBase, UniNormalizer};
use crate::verify::{self, Suite};

#[derive(Parser, Debug)]
#[command(name = "clifford-bracket", version, about = "Normal forms and straightening of Clifford bracket polynomials")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Rewrite step budget (overrides CLIFFORD_BRACKET_FUEL).
    #[arg(long, global = true)]
    pub fuel: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Ring {
    Multilinear,
    General,
    Squarefree,
}

impl From<Ring> for RingKind {
    fn from(r: Ring) -> Self {
        match r {
            Ring::Multilinear => RingKind::Multilinear,
            Ring::General => RingKind::General,
            Ring::Squarefree => RingKind::SquareFree,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Layer {
    Vv,
    Unibracket,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    Refined,
    Uniform,
}

impl From<Variant> for RVariant {
    fn from(v: Variant) -> Self {
        match v {
            Variant::Refined => RVariant::Refined,
            Variant::Uniform => RVariant::Uniform,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Elimination,
    Formulas,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Identities,
    Gb,
    Confluence,
    Dimension,
}

#[derive(clap::Args, Debug, Clone)]
pub struct Input {
    /// Expression text; read from --file or stdin when absent or `-`.
    #[arg(allow_hyphen_values = true)]
    pub expr: Option<String>,
    /// Read the expression from a file.
    #[arg(long)]
    pub file: Option<std::path::PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Normal form of the expansion, as vector-variable or uni-bracket polynomial.
    Normalize {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value_t = Layer::Vv)]
        layer: Layer,
        #[arg(long, value_enum, default_value_t = Ring::Squarefree)]
        ring: Ring,
        #[arg(long, value_enum, default_value_t = Variant::Refined)]
        variant: Variant,
    },
    /// Leader-normal form of a bracket polynomial.
    Straighten {
        #[command(flatten)]
        input: Input,
        /// Print the rewrite derivation.
        #[arg(long)]
        trace: bool,
        #[arg(long, value_enum, default_value_t = StrategyArg::Elimination)]
        strategy: StrategyArg,
        /// Print the straight (tableau) orientation [z Y] instead of [Y z].
        #[arg(long)]
        tableau: bool,
    },
    /// Caianiello expansion of every bracket.
    Expand {
        #[command(flatten)]
        input: Input,
        /// Part lengths, e.g. 2,2,3; applied to brackets of matching length.
        #[arg(long, value_delimiter = ',')]
        partition: Option<Vec<usize>>,
    },
    /// Print a Gröbner base.
    Gb {
        #[arg(long, value_enum, default_value_t = Ring::Multilinear)]
        ring: Ring,
        #[arg(long, value_enum, default_value_t = Layer::Vv)]
        layer: Layer,
        /// Number of variables v1 < ... < vn.
        #[arg(long, default_value_t = 3)]
        n: usize,
        /// Longest rule for the general ring.
        #[arg(long, default_value_t = 6)]
        max_len: usize,
        /// Multiplicities of v1, v2, ... for the uni-bracket layer, e.g. 1,2,1.
        #[arg(long, value_delimiter = ',')]
        multiset: Option<Vec<u32>>,
        #[arg(long, value_enum, default_value_t = Variant::Refined)]
        variant: Variant,
    },
    /// Decide whether two polynomials are equal.
    CheckEqual {
        #[arg(allow_hyphen_values = true)]
        a: String,
        #[arg(allow_hyphen_values = true)]
        b: String,
    },
    /// Run an oracle verification suite.
    Verify {
        #[arg(long, value_enum)]
        suite: SuiteArg,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 30)]
        trials: usize,
    },
    /// Check the basic bracket identities at random instances.
    CheckIdentities {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 30)]
        shapes: usize,
        #[arg(long, default_value_t = 20)]
        points: usize,
    },
    /// Parse and print.
    Fmt {
        #[command(flatten)]
        input: Input,
    },
}

/// Output of a successful run.
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

fn read_input(input: &Input) -> Result<String> {
    if let Some(path) = &input.file {
        return std::fs::read_to_string(path).map_err(|e| Error::Domain(format!("{}: {e}", path.display())));
    }
    match input.expr.as_deref() {
        Some(s) if s != "-" => Ok(s.to_string()),
        _ => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).map_err(|e| Error::Domain(format!("stdin: {e}")))?;
            Ok(s)
        }
    }
}

struct Ctx {
    format: Format,
    fuel: u64,
    stderr: String,
}

impl Ctx {
    fn poly(&self, p: &BracketPolynomial, ctx: &VariableContext) -> String {
        match self.format {
            Format::Text => print(p, ctx),
            Format::Json => to_json(p, ctx).to_string(),
        }
    }

    fn vv(&self, p: &VVPolynomial, ctx: &VariableContext) -> String {
        match self.format {
            Format::Text => print_vv(p, ctx),
            Format::Json => vv_to_json(p, ctx).to_string(),
        }
    }

    fn parse(&mut self, texts: &[&str]) -> Result<(VariableContext, Vec<BracketPolynomial>)> {
        let (ctx, polys, warnings) = parse_all(texts)?;
        for w in warnings {
            self.stderr.push_str(&format!("warning: {w}\n"));
        }
        Ok((ctx, polys))
    }
}

/// Caianiello expansion of every bracket; `partition` applies to brackets whose length is its sum.
pub fn expand_brackets(p: &BracketPolynomial, partition: Option<&[usize]>) -> Result<BracketPolynomial> {
    let target = partition.map(|ps| ps.iter().sum::<usize>());
    let mut out = BracketPolynomial::zero();
    for (m, c) in p.terms() {
        let mut acc = BracketPolynomial::monomial(BracketMonomial::new(Vec::new(), m.squares().clone()), c.clone());
        for a in m.atoms() {
            let f = match a {
                Atom::Bracket(b) => {
                    let parts = if target == Some(b.len()) { partition } else { None };
                    caianiello_expand(b, parts)?
                }
                Atom::Var(_) => BracketPolynomial::term(vec![a.clone()], SquarePart::one(), crate::model::q(1)),
            };
            acc = acc.mul(&f);
        }
        out.add_scaled(&acc, &crate::model::q(1));
    }
    if let Some(t) = target {
        let found = p.terms().any(|(m, _)| m.atoms().iter().any(|a| matches!(a, Atom::Bracket(b) if b.len() == t)));
        if !found {
            return Err(Error::InvalidPartition(format!("no bracket of length {t} in the input")));
        }
    }
    Ok(out)
}

fn run_command(cli: &Cli, cx: &mut Ctx) -> Result<(String, i32)> {
    match &cli.command {
        Command::Normalize { input, layer, ring, variant } => {
            let text = read_input(input)?;
            let (ctx, polys) = cx.parse(&[&text])?;
            let p = &polys[0];
            let nf = match layer {
                Layer::Vv => Reducer::with_fuel((*ring).into(), cx.fuel).reduce(&p.expand())?,
                Layer::Unibracket => {
                    let open = ctx.clone().with_multiset(Default::default())?;
                    let u = to_unibracket(p, &open)?;
                    UniNormalizer::with_fuel((*variant).into(), cx.fuel).normal_form(&u)?
                }
            };
            Ok((cx.vv(&nf, &ctx), 0))
        }
        Command::Straighten { input, trace, strategy, tableau } => {
            let text = read_input(input)?;
            let (ctx, polys) = cx.parse(&[&text])?;
            let s = Straightener::with_fuel(cx.fuel);
            let strat = match strategy {
                StrategyArg::Elimination => Strategy::Elimination,
                StrategyArg::Formulas => Strategy::Formulas,
            };
            let out = s.straighten_with(&polys[0], strat, *trace)?;
            let shown = if *tableau { to_straight_form(&out.result) } else { out.result.clone() };
            let text = match cx.format {
                Format::Text => {
                    let mut lines: Vec<String> = Vec::new();
                    for st in &out.trace {
                        lines.push(format!("# {}: {} => {}", st.rule, print(&st.before, &ctx), print(&st.after, &ctx)));
                    }
                    lines.push(print(&shown, &ctx));
                    lines.join("\n")
                }
                Format::Json => {
                    let trace: Vec<Value> = out
                        .trace
                        .iter()
                        .map(|st| json!({ "rule": st.rule, "before": print(&st.before, &ctx), "after": print(&st.after, &ctx) }))
                        .collect();
                    json!({
                        "result": to_json(&shown, &ctx),
                        "formula_steps": out.formula_steps,
                        "fallbacks": out.fallbacks,
                        "trace": trace,
                    })
                    .to_string()
                }
            };
            Ok((text, 0))
        }
        Command::Expand { input, partition } => {
            let text = read_input(input)?;
            let (ctx, polys) = cx.parse(&[&text])?;
            let out = expand_brackets(&polys[0], partition.as_deref())?;
            Ok((cx.poly(&out, &ctx), 0))
        }
        Command::Gb { ring, layer, n, max_len, multiset, variant } => match layer {
            Layer::Vv => {
                let ctx = VariableContext::numbered(*n);
                let rs = generate((*ring).into(), &ctx, *max_len)?;
                match cx.format {
                    Format::Text => {
                        let lines: Vec<String> = rs
                            .rules
                            .iter()
                            .map(|r| format!("{}: {} -> {}", r.family, print_vv(&VVPolynomial::monomial(r.lhs.clone(), crate::model::q(1)), &ctx), print_vv(&r.rhs, &ctx)))
                            .collect();
                        Ok((lines.join("\n"), 0))
                    }
                    Format::Json => {
                        let rules: Vec<Value> = rs
                            .rules
                            .iter()
                            .map(|r| {
                                json!({
                                    "family": r.family.to_string(),
                                    "lhs": print_vv(&VVPolynomial::monomial(r.lhs.clone(), crate::model::q(1)), &ctx),
                                    "rhs": print_vv(&r.rhs, &ctx),
                                })
                            })
                            .collect();
                        Ok((json!({ "ring": format!("{:?}", rs.kind), "n": n, "rules": rules }).to_string(), 0))
                    }
                }
            }
            Layer::Unibracket => {
                let mult = multiset.clone().unwrap_or_else(|| vec![1; *n]);
                let ctx = VariableContext::numbered(mult.len());
                let content = mult.iter().enumerate().filter(|(_, &k)| k > 0).map(|(i, &k)| (i as u16, k)).collect();
                let base = UniGroebnerBase::generate(&content, (*variant).into(), &Reducer::with_fuel(RingKind::SquareFree, cx.fuel))?;
                match cx.format {
                    Format::Text => {
                        let lines: Vec<String> = base
                            .elements
                            .values()
                            .map(|e| format!("{}: {}  ~>  {}", e.family, print(&e.source, &ctx), print_vv(&e.reduced, &ctx)))
                            .collect();
                        Ok((lines.join("\n"), 0))
                    }
                    Format::Json => {
                        let els: Vec<Value> = base
                            .elements
                            .values()
                            .map(|e| {
                                json!({
                                    "family": e.family.to_string(),
                                    "source": print(&e.source, &ctx),
                                    "normal_form": print_vv(&e.reduced, &ctx),
                                })
                            })
                            .collect();
                        Ok((json!({ "multiset": mult, "elements": els }).to_string(), 0))
                    }
                }
            }
        },
        Command::CheckEqual { a, b } => {
            let (_, polys) = cx.parse(&[a, b])?;
            let diff = polys[0].sub(&polys[1]);
            let bracket_only = diff.terms().all(|(m, _)| m.is_bracket_only());
            let (equal, method) = if bracket_only {
                (Straightener::with_fuel(cx.fuel).straighten(&diff)?.is_zero(), "straighten")
            } else {
                (Reducer::with_fuel(RingKind::SquareFree, cx.fuel).reduce(&diff.expand())?.is_zero(), "vv-normal-form")
            };
            let text = match cx.format {
                Format::Text => (if equal { "equal" } else { "not equal" }).to_string(),
                Format::Json => json!({ "equal": equal, "method": method }).to_string(),
            };
            Ok((text, 0))
        }
        Command::Verify { suite, seed, trials } => {
            let s = match suite {
                SuiteArg::Identities => Suite::Identities,
                SuiteArg::Gb => Suite::Gb,
                SuiteArg::Confluence => Suite::Confluence,
                SuiteArg::Dimension => Suite::Dimension,
            };
            let report = verify::run(s, *seed, *trials)?;
            let code = if report.passed { 0 } else { 3 };
            let text = match cx.format {
                Format::Json => serde_json::to_string_pretty(&report).expect("serializable"),
                Format::Text => {
                    let mut lines = Vec::new();
                    for c in &report.checks {
                        let tag = if c.ok() { "PASS" } else { "FAIL" };
                        lines.push(format!("{tag} {} ({}/{})", c.name, c.passed, c.total));
                        for f in &c.failures {
                            lines.push(format!("  {f}"));
                        }
                    }
                    lines.join("\n")
                }
            };
            Ok((text, code))
        }
        Command::CheckIdentities { seed, shapes, points } => {
            let report = check_basic_identities(*seed, *shapes, *points)?;
            let code = if report.all_passed() { 0 } else { 3 };
            let text = match cx.format {
                Format::Json => serde_json::to_string_pretty(&report).expect("serializable"),
                Format::Text => report
                    .results
                    .iter()
                    .map(|r| {
                        let tag = if r.passed == r.instances { "PASS" } else { "FAIL" };
                        format!("{tag} {} ({}/{})", r.name, r.passed, r.instances)
                    })
                    .collect::<Vec<_>>()
                    .join("\n"),
            };
            Ok((text, code))
        }
        Command::Fmt { input } => {
            let text = read_input(input)?;
            let (ctx, polys) = cx.parse(&[&text])?;
            let out = match cx.format {
                Format::Text => format!("{} {}", crate::parser::print_header(&ctx), print(&polys[0], &ctx)),
                Format::Json => to_json(&polys[0], &ctx).to_string(),
            };
            Ok((out, 0))
        }
    }
}

/// Runs a parsed invocation; errors map to their exit codes.
pub fn execute(cli: &Cli) -> Outcome {
    let mut cx = Ctx { format: cli.format, fuel: cli.fuel.unwrap_or_else(default_fuel), stderr: String::new() };
    match run_command(cli, &mut cx) {
        Ok((stdout, code)) => Outcome { stdout, stderr: cx.stderr, code },
        Err(e) => {
            let msg = match cli.format {
                Format::Text => format!("error: {e}\n"),
                Format::Json => format!("{}\n", json!({ "error": e.to_string(), "exit_code": e.exit_code() })),
            };
            Outcome { stdout: String::new(), stderr: cx.stderr + &msg, code: e.exit_code() }
        }
    }
}

/// Parses arguments (usage errors exit with 2) and runs.
pub fn main_with_args<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli),
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            if code == 0 {
                Outcome { stdout: rendered, stderr: String::new(), code }
            } else {
                Outcome { stdout: String::new(), stderr: rendered, code }
            }
        }
    }
}
