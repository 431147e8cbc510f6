//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when a check finds a mismatch, 2 on usage or
//! parse errors. Atom labels given on the command line are bound to fresh
//! atoms for each run.

use std::ffi::OsString;
use std::io::Write;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::analyzer::{analyze, parse_expr, AnalysisReport};
use crate::atoms::Atoms;
use crate::cardinal::{named_witness, relation_check, Relation, WITNESS_NAMES};
use crate::counting::{
    count_supported, cross_check, enumerate_symbolic, formula, universe_threshold,
    CrossCheckReport, Kind,
};
use crate::fixpoint::{iterate_to_fix, lfp_from_empty, support_of_map, FixpointError, MonotoneMap};
use crate::fscore::{support_report, supports, AtomSet, Nominal};
use crate::fsfun::{AtomFun, AtomSetFun, TupleFun, TupleShape};
use crate::oracle::FiniteModel;
use crate::text::{AtomNames, Render};

pub const EXPR_GRAMMAR: &str = "\
set expressions:
  e ::= A | Nat | Tfin | Tdelta | e x e | e + e | e^n
      | Pfin(e) | Pcofin(e) | Pus(e) | Pfs(e)
      | Fun(A, A) | Fun(A, Pfs(A)) | Fun(A, A^n) | Fun(A, Tfin) | (e)
  `x` binds tighter than `+`; both associate to the left";

pub const MAP_GRAMMAR: &str = "\
monotone maps on finite sets of atoms:
  M ::= id | cup{a,b} | img(fun{a->b, b->b; tail=id}) | perm((a b)) | (M | M) | (M ; M)
  `|` is pointwise union, `M1 ; M2` applies M1 then M2";

pub const FUN_GRAMMAR: &str = "\
functions (each carrier atom listed once, values inside the carrier):
  funAA      fun{a->b, b->a; tail=id}   or tail=const a
  funASet    fun{a->{a,b}, b->A\\{a}; tail=self+{b}}
             tails: self+{..}, cofin-self+{..}, const {..}, const A\\{..}
  funATuple  fun{a->(a,b), b->(b,b); tail=(self,a)}
  funATfin   fun{a->(a), b->(); tail=(self,a)}";

#[derive(Debug, Parser)]
#[command(
    name = "nomset",
    version,
    about = "Symbolic computation with finitely supported sets over atoms"
)]
pub struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide whether a set expression is uniformly infinite.
    Analyze {
        expr: String,
        /// Number of witness members to show and check.
        #[arg(long, default_value_t = 5)]
        witnesses: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Count the elements of a kind supported by a set of a given size.
    Count {
        #[arg(long)]
        kind: String,
        #[arg(long = "support-size", conflicts_with = "support")]
        support_size: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        support: Option<Vec<String>>,
    },
    /// List the elements of a kind supported by the given atoms.
    Enumerate {
        #[arg(long)]
        kind: String,
        #[arg(long, value_delimiter = ',', required = true)]
        support: Vec<String>,
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Iterate a monotone map to a fixed point.
    Fixpoint {
        #[arg(long)]
        map: String,
        /// Start set such as `{a,b}`; the empty set when omitted.
        #[arg(long)]
        from: Option<String>,
        #[arg(long = "max-iter")]
        max_iter: Option<usize>,
    },
    /// Normalize a function and confirm its least support.
    CheckFn {
        #[arg(long)]
        fun: String,
        /// funAA, funASet, funATuple<n> or funATfin.
        #[arg(long, default_value = "funAA")]
        kind: String,
        /// A claimed support to test.
        #[arg(long, value_delimiter = ',')]
        support: Option<Vec<String>>,
    },
    /// Compare formula, symbolic enumeration and brute force in a finite model.
    Oracle {
        #[arg(long, required_unless_present = "total_order")]
        kind: Option<String>,
        #[arg(long, value_delimiter = ',', default_value = "")]
        support: Vec<String>,
        #[arg(long)]
        universe: Option<usize>,
        /// Check instead that no total order of the atoms is supported by the support.
        #[arg(long = "total-order")]
        total_order: bool,
    },
    /// Check a cardinality witness on samples.
    CheckCard {
        #[arg(long)]
        witness: String,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// leq or leq-star; by default every relation the witness claims.
        #[arg(long)]
        relation: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalyzeOutput {
    #[serde(flatten)]
    pub report: AnalysisReport,
    pub witness_verified: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountOutput {
    pub kind: String,
    pub support_size: usize,
    pub count: u128,
    pub formula: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerateOutput {
    pub kind: String,
    pub support: Vec<String>,
    pub total: usize,
    pub elements: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixpointOutput {
    pub map: String,
    pub support: Vec<String>,
    pub chain: Vec<Vec<String>>,
    pub fixpoint: Vec<String>,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckFnOutput {
    pub kind: String,
    pub normalized: String,
    pub support: Vec<String>,
    pub support_verified: bool,
    pub claimed_support_ok: Option<bool>,
    pub injective: Option<bool>,
    pub surjective: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TotalOrderOutput {
    pub universe: usize,
    pub support_size: usize,
    pub no_total_order: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CardOutput {
    pub witness: String,
    pub kind: String,
    pub declared_support_size: usize,
    pub relations: Vec<String>,
    pub samples: usize,
    pub equivariance_perms: usize,
}

enum Failure {
    /// Bad arguments or input text; exit 2.
    Usage(String),
    /// A check ran and disagreed; exit 1.
    Mismatch(String),
}

type Outcome = Result<(), Failure>;

fn usage(msg: impl std::fmt::Display, help: &str) -> Failure {
    Failure::Usage(format!("{msg}\n\n{help}"))
}

/// Runs one invocation and returns its exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let mut sink = Output {
        out,
        json: cli.json,
    };
    match dispatch(&cli.command, &mut sink) {
        Ok(()) => 0,
        Err(Failure::Mismatch(msg)) => {
            let _ = writeln!(err, "mismatch: {msg}");
            1
        }
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
    }
}

struct Output<'a> {
    out: &'a mut dyn Write,
    json: bool,
}

impl Output<'_> {
    /// Writes `value` as JSON or `text` as is, depending on the mode.
    fn emit<T: Serialize>(&mut self, value: &T, text: impl FnOnce() -> String) -> Outcome {
        let body = if self.json {
            serde_json::to_string(value).map_err(|e| Failure::Usage(e.to_string()))?
        } else {
            text()
        };
        writeln!(self.out, "{}", body.trim_end()).map_err(|e| Failure::Usage(e.to_string()))
    }
}

fn dispatch(cmd: &Command, out: &mut Output) -> Outcome {
    match cmd {
        Command::Analyze {
            expr,
            witnesses,
            seed,
        } => cmd_analyze(expr, *witnesses, *seed, out),
        Command::Count {
            kind,
            support_size,
            support,
        } => {
            let s = match (support_size, support) {
                (Some(n), _) => *n,
                (None, Some(labels)) => bind_labels(labels, &mut AtomNames::new()).len(),
                (None, None) => {
                    return Err(Failure::Usage("give --support-size or --support".into()))
                }
            };
            cmd_count(kind, s, out)
        }
        Command::Enumerate {
            kind,
            support,
            limit,
        } => cmd_enumerate(kind, support, *limit, out),
        Command::Fixpoint {
            map,
            from,
            max_iter,
        } => cmd_fixpoint(map, from.as_deref(), *max_iter, out),
        Command::CheckFn { fun, kind, support } => cmd_check_fn(fun, kind, support.as_deref(), out),
        Command::Oracle {
            kind,
            support,
            universe,
            total_order,
        } => {
            if *total_order {
                cmd_total_order(support, *universe, out)
            } else {
                cmd_oracle(kind.as_deref().unwrap_or_default(), support, *universe, out)
            }
        }
        Command::CheckCard {
            witness,
            samples,
            seed,
            relation,
        } => cmd_check_card(witness, *samples, *seed, relation.as_deref(), out),
    }
}

fn bind_labels(labels: &[String], names: &mut AtomNames) -> Atoms {
    labels
        .iter()
        .map(|l| l.trim())
        .filter(|l| !l.is_empty())
        .map(|l| names.bind(l))
        .collect()
}

fn render_list(xs: &Atoms, names: &AtomNames) -> Vec<String> {
    xs.iter().map(|&a| names.name(a)).collect()
}

fn parse_kind(kind: &str) -> Result<Kind, Failure> {
    kind.parse().map_err(|e| Failure::Usage(format!("{e}")))
}

fn cmd_analyze(text: &str, k: usize, seed: u64, out: &mut Output) -> Outcome {
    let expr = parse_expr(text).map_err(|e| usage(e, EXPR_GRAMMAR))?;
    let verdict = analyze(&expr);
    let names = AtomNames::new();
    let check = verdict
        .witness
        .as_ref()
        .map(|w| w.check(k.max(20), 50, seed));
    let output = AnalyzeOutput {
        report: verdict.report(k, &names),
        witness_verified: check.as_ref().map(|c| c.ok()),
    };
    out.emit(&output, || {
        let r = &output.report;
        let mut s = format!("expr: {}\nresult: {}\n", r.expr, r.result);
        if !r.trace.is_empty() {
            s.push_str("trace:\n");
            for t in &r.trace {
                let mark = if t.derived { " (derived)" } else { "" };
                s.push_str(&format!(
                    "  {}: {}{} -- {}\n",
                    t.expr, t.rule, mark, t.anchor
                ));
            }
        }
        if let Some(w) = &r.witness {
            s.push_str(&format!("witness support: {{{}}}\n", w.support.join(",")));
            s.push_str(&format!("witness members: {}\n", w.first_k.join("; ")));
        }
        if let Some(ok) = output.witness_verified {
            s.push_str(&format!(
                "witness check: {}\n",
                if ok { "pass" } else { "FAIL" }
            ));
        }
        if let Some(reason) = &r.reason {
            s.push_str(&format!("reason: {reason}\n"));
        }
        s
    })?;
    match check {
        Some(c) if !c.ok() => Err(Failure::Mismatch(c.failures.join("; "))),
        _ => Ok(()),
    }
}

fn cmd_count(kind: &str, s: usize, out: &mut Output) -> Outcome {
    let kind = parse_kind(kind)?;
    let count = count_supported(kind, s).map_err(|e| Failure::Usage(e.to_string()))?;
    let output = CountOutput {
        kind: kind.name(),
        support_size: s,
        count,
        formula: formula(kind).formula.to_string(),
    };
    out.emit(&output, || count.to_string())
}

fn cmd_enumerate(kind: &str, labels: &[String], limit: Option<usize>, out: &mut Output) -> Outcome {
    let kind = parse_kind(kind)?;
    let mut names = AtomNames::new();
    let s = bind_labels(labels, &mut names);
    let all = enumerate_symbolic(kind, &s).map_err(|e| Failure::Usage(e.to_string()))?;
    let shown = limit.unwrap_or(all.len()).min(all.len());
    let output = EnumerateOutput {
        kind: kind.name(),
        support: render_list(&s, &names),
        total: all.len(),
        elements: all[..shown].iter().map(|x| x.render(&names)).collect(),
    };
    out.emit(&output, || {
        let mut s = output.elements.join("\n");
        s.push_str(&format!("\n# {} of {} elements", shown, output.total));
        s
    })
}

fn cmd_fixpoint(
    map: &str,
    from: Option<&str>,
    max_iter: Option<usize>,
    out: &mut Output,
) -> Outcome {
    let mut names = AtomNames::new();
    let m = MonotoneMap::parse(map, &mut names).map_err(|e| usage(e, MAP_GRAMMAR))?;
    let result = match from {
        None => lfp_from_empty(&m, max_iter),
        Some(text) => {
            let start = match AtomSet::parse(text, &mut names) {
                Ok(AtomSet::Finite(z)) => z,
                Ok(_) => return Err(Failure::Usage("the start set must be finite".into())),
                Err(e) => return Err(usage(e, "start sets are written {a,b}")),
            };
            iterate_to_fix(&m, &start, max_iter)
        }
    }
    .map_err(|e| Failure::Mismatch(describe_fixpoint_error(&e, &names)))?;
    let output = FixpointOutput {
        map: m.render(&names),
        support: render_list(&support_of_map(&m), &names),
        chain: result
            .chain
            .iter()
            .map(|z| render_list(z, &names))
            .collect(),
        fixpoint: render_list(&result.fixpoint, &names),
        steps: result.steps,
    };
    out.emit(&output, || {
        let mut s = String::new();
        for (i, z) in output.chain.iter().enumerate() {
            s.push_str(&format!("{i}: {{{}}}\n", z.join(",")));
        }
        s.push_str(&format!(
            "fixpoint: {{{}}} after {} steps",
            output.fixpoint.join(","),
            output.steps
        ));
        s
    })
}

fn describe_fixpoint_error(e: &FixpointError, names: &AtomNames) -> String {
    let set = |z: &Atoms| format!("{{{}}}", render_list(z, names).join(","));
    match e {
        FixpointError::BoundExceeded { max_iter, chain } => format!(
            "no fixed point within {max_iter} iterations; chain so far: {}",
            chain.iter().map(set).collect::<Vec<_>>().join(", ")
        ),
        FixpointError::OutsideSupport {
            step,
            iterate,
            bound,
        } => {
            format!(
                "iterate {step} = {} is not inside the support bound {}",
                set(iterate),
                set(bound)
            )
        }
        FixpointError::NotProgressive {
            step,
            before,
            after,
        } => {
            format!(
                "map is not progressive at step {step}: {} is not below {}",
                set(before),
                set(after)
            )
        }
        FixpointError::SupportClaim { .. } => e.to_string(),
    }
}

/// The parsed function in a uniform shape for reporting.
struct ParsedFn {
    normalized: String,
    support: Atoms,
    support_verified: bool,
    claimed_ok: Option<bool>,
    injective: Option<bool>,
    surjective: Option<bool>,
}

fn inspect<T: Nominal + Render>(f: &T, names: &AtomNames, claimed: Option<&Atoms>) -> ParsedFn {
    let mut probe: Atoms = f.support();
    probe.extend(crate::atoms::fresh_atoms(3));
    if let Some(c) = claimed {
        probe.extend(c.iter().copied());
    }
    let report = support_report(f, &probe);
    ParsedFn {
        normalized: f.render(names),
        support: report.support.clone(),
        support_verified: report.verified(),
        claimed_ok: claimed.map(|c| supports(c, f, &probe)),
        injective: None,
        surjective: None,
    }
}

fn cmd_check_fn(text: &str, kind: &str, claimed: Option<&[String]>, out: &mut Output) -> Outcome {
    let kind = parse_kind(kind)?;
    let mut names = AtomNames::new();
    let err = |e| usage(e, FUN_GRAMMAR);
    let parsed = match kind {
        Kind::FunAA => {
            let f = AtomFun::parse(text, &mut names).map_err(err)?.normalize();
            let claimed = claimed.map(|c| bind_labels(c, &mut names));
            let mut p = inspect(&f, &names, claimed.as_ref());
            p.injective = Some(f.is_injective());
            p.surjective = Some(f.is_surjective());
            p
        }
        Kind::FunASet => {
            let f = AtomSetFun::parse(text, &mut names)
                .map_err(err)?
                .normalize();
            let claimed = claimed.map(|c| bind_labels(c, &mut names));
            inspect(&f, &names, claimed.as_ref())
        }
        Kind::FunATuple(n) => {
            let f = TupleFun::parse(text, TupleShape::Fixed(n), &mut names)
                .map_err(err)?
                .normalize();
            let claimed = claimed.map(|c| bind_labels(c, &mut names));
            inspect(&f, &names, claimed.as_ref())
        }
        Kind::FunATfin => {
            let f = TupleFun::parse(text, TupleShape::Injective, &mut names)
                .map_err(err)?
                .normalize();
            let claimed = claimed.map(|c| bind_labels(c, &mut names));
            inspect(&f, &names, claimed.as_ref())
        }
        other => {
            return Err(Failure::Usage(format!(
                "{other} is not a function kind\n\n{FUN_GRAMMAR}"
            )))
        }
    };
    let output = CheckFnOutput {
        kind: kind.name(),
        normalized: parsed.normalized,
        support: render_list(&parsed.support, &names),
        support_verified: parsed.support_verified,
        claimed_support_ok: parsed.claimed_ok,
        injective: parsed.injective,
        surjective: parsed.surjective,
    };
    out.emit(&output, || {
        let mut s = format!(
            "normalized: {}\nleast support: {{{}}} ({})\n",
            output.normalized,
            output.support.join(","),
            if output.support_verified {
                "verified"
            } else {
                "NOT verified"
            }
        );
        if let Some(ok) = output.claimed_support_ok {
            s.push_str(&format!(
                "claimed support: {}\n",
                if ok { "supports" } else { "does NOT support" }
            ));
        }
        if let (Some(i), Some(j)) = (output.injective, output.surjective) {
            s.push_str(&format!("injective: {i}\nsurjective: {j}\n"));
        }
        s
    })?;
    if !output.support_verified {
        return Err(Failure::Mismatch("least support check failed".into()));
    }
    if output.claimed_support_ok == Some(false) {
        return Err(Failure::Mismatch(
            "the claimed support does not support the function".into(),
        ));
    }
    Ok(())
}

fn cmd_oracle(kind: &str, labels: &[String], universe: Option<usize>, out: &mut Output) -> Outcome {
    let kind = parse_kind(kind)?;
    let s = bind_labels(labels, &mut AtomNames::new());
    let n = universe.unwrap_or_else(|| universe_threshold(kind, s.len()));
    let report: CrossCheckReport =
        cross_check(kind, &s, n).map_err(|e| Failure::Usage(e.to_string()))?;
    out.emit(&report, || {
        let mut s = format!(
            "{} |S|={} N={}: formula {} symbolic {} oracle {} bijection {}",
            report.kind,
            report.support_size,
            report.universe,
            report.formula,
            report.symbolic,
            report.oracle,
            report.bijection
        );
        for m in &report.mismatches {
            s.push_str(&format!("\n  {m}"));
        }
        s
    })?;
    if report.ok() {
        Ok(())
    } else {
        Err(Failure::Mismatch(report.mismatches.join("; ")))
    }
}

fn cmd_total_order(labels: &[String], universe: Option<usize>, out: &mut Output) -> Outcome {
    let k = bind_labels(labels, &mut AtomNames::new()).len();
    let n = universe.unwrap_or(k + 3);
    let model = FiniteModel::new(n).map_err(|e| Failure::Usage(e.to_string()))?;
    let s: Vec<usize> = (0..k).collect();
    let none = model
        .no_total_order_on_atoms(&s)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let output = TotalOrderOutput {
        universe: n,
        support_size: k,
        no_total_order: none,
    };
    out.emit(&output, || {
        format!(
            "N={n} |S|={k}: {}",
            if none {
                "no total order on the atoms is supported by S"
            } else {
                "found a total order supported by S"
            }
        )
    })?;
    if none {
        Ok(())
    } else {
        Err(Failure::Mismatch("a supported total order exists".into()))
    }
}

fn cmd_check_card(
    name: &str,
    samples: usize,
    seed: u64,
    relation: Option<&str>,
    out: &mut Output,
) -> Outcome {
    let w = named_witness(name)
        .map_err(|e| Failure::Usage(format!("{e} (known: {})", WITNESS_NAMES.join(", "))))?;
    let relations = match relation {
        Some("leq") => vec![Relation::Leq],
        Some("leq-star") => vec![Relation::LeqStar],
        Some(other) => {
            return Err(Failure::Usage(format!(
                "unknown relation `{other}` (leq, leq-star)"
            )))
        }
        None => {
            let mut v = Vec::new();
            if w.kind.injective() {
                v.push(Relation::Leq);
            }
            if w.kind.surjective() {
                v.push(Relation::LeqStar);
            }
            v
        }
    };
    let mut perms = 0;
    for &r in &relations {
        let report =
            relation_check(r, &w, samples, seed).map_err(|e| Failure::Mismatch(e.to_string()))?;
        perms = perms.max(report.equivariance_perms);
    }
    let output = CardOutput {
        witness: w.name.clone(),
        kind: w.kind.to_string(),
        declared_support_size: w.declared_support.len(),
        relations: relations.iter().map(|r| r.to_string()).collect(),
        samples,
        equivariance_perms: perms,
    };
    out.emit(&output, || {
        format!(
            "{} ({}): certifies {} on {} samples, equivariant under {} permutations",
            output.witness,
            output.kind,
            output.relations.join(" and "),
            output.samples,
            output.equivariance_perms
        )
    })
}
