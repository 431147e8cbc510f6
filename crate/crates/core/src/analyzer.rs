//! Set expressions and the uniform-infinity analyzer.
//!
//! A set is uniformly infinite when it has an infinite subset whose members
//! all share one finite support. [`analyze`] evaluates a [`SetExpr`] bottom
//! up with a fixed rule table and returns a [`Verdict`]. Each verdict other
//! than `Unknown` carries a trace of the rules used, and every `UniformlyInfinite`
//! verdict carries a [`WitnessFamily`] that can be sampled and checked.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::atoms::{fresh_atoms, sample_fix, Atom, Atoms};
use crate::element::Element;
use crate::fscore::Nominal;
use crate::fsfun::{AtomFun, AtomSetFun, SetTail, TupleFun, TupleShape};
use crate::text::{AtomNames, Cursor, ParseError, Render};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SetExpr {
    Atoms,
    Nat,
    Prod(Box<SetExpr>, Box<SetExpr>),
    Sum(Box<SetExpr>, Box<SetExpr>),
    PFin(Box<SetExpr>),
    PCofin(Box<SetExpr>),
    PUs(Box<SetExpr>),
    PFs(Box<SetExpr>),
    /// Finitely supported functions from the first set to the second.
    Fun(Box<SetExpr>, Box<SetExpr>),
    /// `e^n`, the n-fold product.
    Power(Box<SetExpr>, u32),
    /// Finite injective tuples of atoms.
    TFin,
    /// All finite tuples of atoms.
    TDelta,
}

impl SetExpr {
    pub fn prod(x: SetExpr, y: SetExpr) -> SetExpr {
        SetExpr::Prod(Box::new(x), Box::new(y))
    }

    pub fn sum(x: SetExpr, y: SetExpr) -> SetExpr {
        SetExpr::Sum(Box::new(x), Box::new(y))
    }

    pub fn pfin(x: SetExpr) -> SetExpr {
        SetExpr::PFin(Box::new(x))
    }

    pub fn pcofin(x: SetExpr) -> SetExpr {
        SetExpr::PCofin(Box::new(x))
    }

    pub fn pus(x: SetExpr) -> SetExpr {
        SetExpr::PUs(Box::new(x))
    }

    pub fn pfs(x: SetExpr) -> SetExpr {
        SetExpr::PFs(Box::new(x))
    }

    pub fn fun(x: SetExpr, y: SetExpr) -> SetExpr {
        SetExpr::Fun(Box::new(x), Box::new(y))
    }

    pub fn power(x: SetExpr, n: u32) -> SetExpr {
        SetExpr::Power(Box::new(x), n)
    }

    pub fn parse(text: &str) -> Result<SetExpr, ParseError> {
        parse_expr(text)
    }

    /// True when every element is fixed by every permutation.
    pub fn is_trivial(&self) -> bool {
        match self {
            SetExpr::Nat => true,
            SetExpr::Prod(x, y) | SetExpr::Sum(x, y) => x.is_trivial() && y.is_trivial(),
            SetExpr::Power(x, _)
            | SetExpr::PFin(x)
            | SetExpr::PCofin(x)
            | SetExpr::PUs(x)
            | SetExpr::PFs(x) => x.is_trivial(),
            SetExpr::Atoms | SetExpr::Fun(..) | SetExpr::TFin | SetExpr::TDelta => false,
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            SetExpr::Sum(..) => 0,
            SetExpr::Prod(..) => 1,
            SetExpr::Power(..) => 2,
            _ => 3,
        }
    }
}

impl fmt::Display for SetExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // operands of equal precedence on the right get parentheses (left-assoc)
        let wrap = |f: &mut fmt::Formatter<'_>, e: &SetExpr, min: u8| {
            if e.precedence() < min {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self {
            SetExpr::Atoms => f.write_str("A"),
            SetExpr::Nat => f.write_str("Nat"),
            SetExpr::TFin => f.write_str("Tfin"),
            SetExpr::TDelta => f.write_str("Tdelta"),
            SetExpr::Sum(x, y) => {
                wrap(f, x, 0)?;
                f.write_str(" + ")?;
                wrap(f, y, 1)
            }
            SetExpr::Prod(x, y) => {
                wrap(f, x, 1)?;
                f.write_str(" x ")?;
                wrap(f, y, 2)
            }
            SetExpr::Power(x, n) => {
                wrap(f, x, 3)?;
                write!(f, "^{n}")
            }
            SetExpr::PFin(x) => write!(f, "Pfin({x})"),
            SetExpr::PCofin(x) => write!(f, "Pcofin({x})"),
            SetExpr::PUs(x) => write!(f, "Pus({x})"),
            SetExpr::PFs(x) => write!(f, "Pfs({x})"),
            SetExpr::Fun(x, y) => write!(f, "Fun({x}, {y})"),
        }
    }
}

pub fn parse_expr(text: &str) -> Result<SetExpr, ParseError> {
    let mut c = Cursor::new(text);
    let e = parse_sum(&mut c)?;
    c.finish()?;
    Ok(e)
}

fn parse_sum(c: &mut Cursor) -> Result<SetExpr, ParseError> {
    let mut e = parse_prod(c)?;
    while c.eat("+") {
        e = SetExpr::sum(e, parse_prod(c)?);
    }
    Ok(e)
}

fn parse_prod(c: &mut Cursor) -> Result<SetExpr, ParseError> {
    let mut e = parse_power(c)?;
    while c.peek_ident() == Some("x") {
        c.ident()?;
        e = SetExpr::prod(e, parse_power(c)?);
    }
    Ok(e)
}

fn parse_power(c: &mut Cursor) -> Result<SetExpr, ParseError> {
    let e = parse_primary(c)?;
    if c.eat("^") {
        let at = c.pos();
        let n = c.number()?;
        if n == 0 || n > u32::MAX as u64 {
            return Err(ParseError::new(at, "exponent must be a positive integer"));
        }
        return Ok(SetExpr::power(e, n as u32));
    }
    Ok(e)
}

fn parse_primary(c: &mut Cursor) -> Result<SetExpr, ParseError> {
    if c.eat("(") {
        let e = parse_sum(c)?;
        c.expect(")")?;
        return Ok(e);
    }
    c.skip_ws();
    let at = c.pos();
    let id = c.ident()?;
    let unary = |c: &mut Cursor, wrap: fn(SetExpr) -> SetExpr| -> Result<SetExpr, ParseError> {
        c.expect("(")?;
        let e = parse_sum(c)?;
        c.expect(")")?;
        Ok(wrap(e))
    };
    match id {
        "A" => Ok(SetExpr::Atoms),
        "Nat" => Ok(SetExpr::Nat),
        "Tfin" => Ok(SetExpr::TFin),
        "Tdelta" => Ok(SetExpr::TDelta),
        "Pfin" => unary(c, SetExpr::pfin),
        "Pcofin" => unary(c, SetExpr::pcofin),
        "Pus" => unary(c, SetExpr::pus),
        "Pfs" => unary(c, SetExpr::pfs),
        "Fun" => {
            c.expect("(")?;
            let d = parse_sum(c)?;
            c.expect(",")?;
            let r = parse_sum(c)?;
            c.expect(")")?;
            Ok(SetExpr::fun(d, r))
        }
        other => Err(ParseError::new(at, format!("unknown identifier `{other}`"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Uniformity {
    UniformlyInfinite,
    NonUniformlyInfinite,
    Unknown,
}

impl fmt::Display for Uniformity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Uniformity::UniformlyInfinite => "UniformlyInfinite",
            Uniformity::NonUniformlyInfinite => "NonUniformlyInfinite",
            Uniformity::Unknown => "Unknown",
        })
    }
}

/// One rule application. `derived` marks rules obtained by a short argument
/// on top of the base catalogue rather than stated as part of it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub expr: String,
    pub rule: String,
    pub anchor: String,
    pub derived: bool,
}

struct Rule {
    name: &'static str,
    anchor: &'static str,
    derived: bool,
}

macro_rules! rules {
    ($($id:ident = $name:literal, $derived:literal, $anchor:literal;)*) => {
        $(const $id: Rule = Rule { name: $name, anchor: $anchor, derived: $derived };)*
    };
}

rules! {
    R_ATOMS = "atoms", false,
        "an atom supported by S lies in S, so S supports at most |S| atoms";
    R_PFS_ATOMS = "fs-subsets-of-atoms", false,
        "a subset of A supported by S is a subset of S or the complement of one";
    R_TFIN = "injective-tuples", false,
        "an injective tuple supported by S only uses atoms of S";
    R_FUN_A_PFS = "fun-atoms-to-fs-subsets", false,
        "a map A -> Pfs(A) supported by S is fixed by its values on S and at one atom outside S";
    R_FUN_A_A = "fun-atoms-to-atoms", false,
        "a map A -> A supported by S is fixed by its values on S and at one atom outside S";
    R_FUN_A_AN = "fun-atoms-to-atom-tuples", false,
        "a map A -> A^n splits into n maps A -> A with the same support";
    R_FUN_A_TFIN = "fun-atoms-to-injective-tuples", false,
        "outside S the values of an S-supported map A -> Tfin have one length, so finitely many maps share S";
    R_PFIN = "finite-subsets-keep-nui", false,
        "a finite subset is supported by the union of its members' supports";
    R_PCOFIN = "cofinite-subsets-keep-nui", false,
        "complement inside X turns supported cofinite subsets into supported finite subsets";
    R_PUS = "uniform-subsets-keep-nui", false,
        "a uniformly supported subset is supported by the union of its members' supports";
    R_PUS_ATOMS = "uniform-subsets-of-atoms-are-finite", false,
        "a uniformly supported set of atoms lies inside the common support, so Pus(A) is Pfin(A)";
    R_PROD_NUI = "product-keeps-nui", false,
        "the support of a pair is the union of the supports of its components";
    R_SUM_NUI = "sum-keeps-nui", false,
        "an infinite uniform family in X + Y has infinitely many members on one side";
    R_TRIVIAL = "trivial-action", false,
        "every element of a set without atoms is fixed by every permutation";
    R_TDELTA = "constant-tuples", false,
        "the tuples (a, ..., a) of every length all have support {a}";
    R_PFS_PFIN = "sized-finite-subsets", false,
        "for each n the set of n-element subsets is equivariant, and these sets differ for infinite X";
    R_PFS_PFS = "sized-fs-subsets", false,
        "for each n the set of n-element subsets is equivariant, and these sets differ for infinite X";
    R_PFS_TFIN = "sized-injective-tuples", false,
        "for each n the set of injective n-tuples is equivariant, and these sets differ";
    R_PROD_UI = "product-with-ui-factor", true,
        "pairing a uniform family with a fixed point of the other factor keeps it uniform and injective";
    R_SUM_UI = "sum-with-ui-summand", true,
        "an injection into one summand preserves supports";
    R_POWER_UI = "power-of-ui", true,
        "pad each witness with a fixed point of X in the remaining coordinates";
    R_SINGLETONS = "singletons-of-ui", true,
        "the singleton {x} has the same support as x";
    R_COSINGLETONS = "cosingletons-of-ui", true,
        "X minus {x} is supported by the support of x since X is equivariant";
    R_TRIVIAL_SUBSETS = "subsets-of-trivial-set", true,
        "every subset of a set without atoms is fixed by every permutation, so Pus and Pfs give all subsets";
}

/// An infinite family of elements with one common support.
#[derive(Debug, Clone)]
pub struct WitnessFamily {
    common_support: Atoms,
    generator: Generator,
}

#[derive(Debug, Clone)]
enum Generator {
    Naturals,
    ConstantTuples(Atom),
    SizedSubsets(SetExpr),
    InjTuples,
    Singletons(Box<Generator>),
    CoSingletons(SetExpr, Box<Generator>),
    PairLeft(Box<Generator>, Element),
    PairRight(Element, Box<Generator>),
    TupleHead(Box<Generator>, Vec<Element>),
    Inl(Box<Generator>),
    Inr(Box<Generator>),
}

impl Generator {
    fn at(&self, i: u64) -> Element {
        match self {
            Generator::Naturals => Element::Nat(i),
            Generator::ConstantTuples(a) => Element::Tuple(vec![Element::Atom(*a); i as usize]),
            Generator::SizedSubsets(of) => Element::SizedSubsets {
                of: of.clone(),
                size: i,
            },
            Generator::InjTuples => Element::InjTuplesOfLength { len: i },
            Generator::Singletons(g) => Element::finite_set([g.at(i)]),
            Generator::CoSingletons(of, g) => Element::cofinite(of.clone(), [g.at(i)]),
            Generator::PairLeft(g, y) => Element::pair(g.at(i), y.clone()),
            Generator::PairRight(x, g) => Element::pair(x.clone(), g.at(i)),
            Generator::TupleHead(g, rest) => {
                let mut v = vec![g.at(i)];
                v.extend(rest.iter().cloned());
                Element::Tuple(v)
            }
            Generator::Inl(g) => Element::Inl(Box::new(g.at(i))),
            Generator::Inr(g) => Element::Inr(Box::new(g.at(i))),
        }
    }
}

impl WitnessFamily {
    pub fn common_support(&self) -> &Atoms {
        &self.common_support
    }

    pub fn element(&self, i: u64) -> Element {
        self.generator.at(i)
    }

    pub fn first(&self, k: usize) -> Vec<Element> {
        (0..k as u64).map(|i| self.element(i)).collect()
    }

    /// Checks the first `k` members for pairwise distinctness and for
    /// invariance under `perms` sampled permutations fixing the common support.
    pub fn check(&self, k: usize, perms: usize, seed: u64) -> WitnessCheck {
        let members = self.first(k);
        let mut failures = Vec::new();
        let mut keys = BTreeSet::new();
        for (i, m) in members.iter().enumerate() {
            if !keys.insert(m.distinctness_key()) {
                failures.push(format!("member {i} repeats an earlier member: {m}"));
            }
        }
        let distinct = failures.is_empty();
        let mut pool: Atoms = self.common_support.clone();
        pool.extend(members.iter().flat_map(|m| m.support()));
        pool.extend(fresh_atoms(4));
        let sample = sample_fix(&self.common_support, &pool, perms, seed);
        let mut invariant = true;
        for p in &sample {
            for (i, m) in members.iter().enumerate() {
                if m.act(p) != *m {
                    invariant = false;
                    failures.push(format!("member {i} moved by {p}: {m}"));
                }
            }
        }
        WitnessCheck {
            distinct,
            invariant,
            checked_members: members.len(),
            checked_perms: sample.len(),
            failures,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessCheck {
    pub distinct: bool,
    pub invariant: bool,
    pub checked_members: usize,
    pub checked_perms: usize,
    pub failures: Vec<String>,
}

impl WitnessCheck {
    pub fn ok(&self) -> bool {
        self.distinct && self.invariant
    }
}

#[derive(Debug, Clone)]
pub struct Verdict {
    pub expr: SetExpr,
    pub result: Uniformity,
    pub trace: Vec<TraceEntry>,
    pub witness: Option<WitnessFamily>,
    /// Why no rule applied, for `Unknown`.
    pub reason: Option<String>,
}

impl Verdict {
    /// The stable report form, with the first `k` witness members.
    pub fn report(&self, k: usize, names: &AtomNames) -> AnalysisReport {
        AnalysisReport {
            expr: self.expr.to_string(),
            result: self.result,
            trace: self.trace.clone(),
            witness: self.witness.as_ref().map(|w| WitnessPreview {
                support: w.common_support.iter().map(|a| names.name(*a)).collect(),
                first_k: w.first(k).iter().map(|m| m.render(names)).collect(),
            }),
            reason: self.reason.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessPreview {
    pub support: Vec<String>,
    pub first_k: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub expr: String,
    pub result: Uniformity,
    pub trace: Vec<TraceEntry>,
    pub witness: Option<WitnessPreview>,
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{expr} is not uniformly infinite by any known rule")]
pub struct NoWitness {
    pub expr: String,
}

pub fn analyze(e: &SetExpr) -> Verdict {
    let mut trace = Vec::new();
    let node = eval(e, &mut trace);
    Verdict {
        expr: e.clone(),
        result: node.result,
        trace,
        witness: node.witness,
        reason: node.reason,
    }
}

pub fn witness(e: &SetExpr) -> Result<WitnessFamily, NoWitness> {
    analyze(e).witness.ok_or_else(|| NoWitness {
        expr: e.to_string(),
    })
}

struct Node {
    result: Uniformity,
    witness: Option<WitnessFamily>,
    reason: Option<String>,
}

fn nui(trace: &mut Vec<TraceEntry>, e: &SetExpr, rule: Rule) -> Node {
    cite(trace, e, rule);
    Node {
        result: Uniformity::NonUniformlyInfinite,
        witness: None,
        reason: None,
    }
}

fn ui(
    trace: &mut Vec<TraceEntry>,
    e: &SetExpr,
    rule: Rule,
    common_support: Atoms,
    generator: Generator,
) -> Node {
    cite(trace, e, rule);
    Node {
        result: Uniformity::UniformlyInfinite,
        witness: Some(WitnessFamily {
            common_support,
            generator,
        }),
        reason: None,
    }
}

fn unknown(reason: String) -> Node {
    Node {
        result: Uniformity::Unknown,
        witness: None,
        reason: Some(reason),
    }
}

fn cite(trace: &mut Vec<TraceEntry>, e: &SetExpr, rule: Rule) {
    trace.push(TraceEntry {
        expr: e.to_string(),
        rule: rule.name.to_string(),
        anchor: rule.anchor.to_string(),
        derived: rule.derived,
    });
}

fn no_rule(e: &SetExpr) -> Node {
    unknown(format!("no rule covers {e}"))
}

/// Arity `n` when `e` is `A^n` or a product of `n` copies of `A`, with `n >= 2`.
fn atom_power(e: &SetExpr) -> Option<u32> {
    fn count(e: &SetExpr) -> Option<u32> {
        match e {
            SetExpr::Atoms => Some(1),
            SetExpr::Prod(x, y) => Some(count(x)? + count(y)?),
            SetExpr::Power(x, n) => count(x)?.checked_mul(*n),
            _ => None,
        }
    }
    count(e).filter(|&n| n >= 2)
}

fn eval(e: &SetExpr, trace: &mut Vec<TraceEntry>) -> Node {
    use Uniformity::*;
    match e {
        SetExpr::Atoms => nui(trace, e, R_ATOMS),
        SetExpr::TFin => nui(trace, e, R_TFIN),
        SetExpr::Nat => ui(trace, e, R_TRIVIAL, Atoms::new(), Generator::Naturals),
        SetExpr::TDelta => {
            let a = Atom::fresh();
            ui(
                trace,
                e,
                R_TDELTA,
                Atoms::from([a]),
                Generator::ConstantTuples(a),
            )
        }
        SetExpr::Fun(d, r) => {
            if **d != SetExpr::Atoms {
                return unknown(format!("no rule covers functions with domain {d}"));
            }
            match &**r {
                SetExpr::Atoms => nui(trace, e, R_FUN_A_A),
                SetExpr::PFs(x) if **x == SetExpr::Atoms => nui(trace, e, R_FUN_A_PFS),
                SetExpr::TFin => nui(trace, e, R_FUN_A_TFIN),
                r if atom_power(r).is_some() => nui(trace, e, R_FUN_A_AN),
                _ => unknown(format!("no rule covers functions from A to {r}")),
            }
        }
        SetExpr::Prod(x, y) => {
            let l = eval(x, trace);
            let r = eval(y, trace);
            match (l.result, r.result) {
                (NonUniformlyInfinite, NonUniformlyInfinite) => nui(trace, e, R_PROD_NUI),
                (UniformlyInfinite, _) => {
                    let w = l.witness.expect("UI verdicts carry a witness");
                    let Some(pt) = point(y) else {
                        return no_point(y);
                    };
                    let s = union(&w.common_support, &pt.support());
                    ui(
                        trace,
                        e,
                        R_PROD_UI,
                        s,
                        Generator::PairLeft(Box::new(w.generator), pt),
                    )
                }
                (_, UniformlyInfinite) => {
                    let w = r.witness.expect("UI verdicts carry a witness");
                    let Some(pt) = point(x) else {
                        return no_point(x);
                    };
                    let s = union(&w.common_support, &pt.support());
                    ui(
                        trace,
                        e,
                        R_PROD_UI,
                        s,
                        Generator::PairRight(pt, Box::new(w.generator)),
                    )
                }
                _ => no_rule(e),
            }
        }
        SetExpr::Power(x, n) => {
            let inner = eval(x, trace);
            match inner.result {
                NonUniformlyInfinite => nui(trace, e, R_PROD_NUI),
                UniformlyInfinite => {
                    let w = inner.witness.expect("UI verdicts carry a witness");
                    let Some(pt) = point(x) else {
                        return no_point(x);
                    };
                    let s = union(&w.common_support, &pt.support());
                    let rest = vec![pt; *n as usize - 1];
                    ui(
                        trace,
                        e,
                        R_POWER_UI,
                        s,
                        Generator::TupleHead(Box::new(w.generator), rest),
                    )
                }
                Unknown => no_rule(e),
            }
        }
        SetExpr::Sum(x, y) => {
            let l = eval(x, trace);
            let r = eval(y, trace);
            match (l.result, r.result) {
                (NonUniformlyInfinite, NonUniformlyInfinite) => nui(trace, e, R_SUM_NUI),
                (UniformlyInfinite, _) => {
                    let w = l.witness.expect("UI verdicts carry a witness");
                    ui(
                        trace,
                        e,
                        R_SUM_UI,
                        w.common_support,
                        Generator::Inl(Box::new(w.generator)),
                    )
                }
                (_, UniformlyInfinite) => {
                    let w = r.witness.expect("UI verdicts carry a witness");
                    ui(
                        trace,
                        e,
                        R_SUM_UI,
                        w.common_support,
                        Generator::Inr(Box::new(w.generator)),
                    )
                }
                _ => no_rule(e),
            }
        }
        SetExpr::PFin(x) => powerset(e, x, R_PFIN, trace),
        SetExpr::PCofin(x) => {
            let inner = eval(x, trace);
            match inner.result {
                NonUniformlyInfinite => nui(trace, e, R_PCOFIN),
                UniformlyInfinite => {
                    let w = inner.witness.expect("UI verdicts carry a witness");
                    let g = Generator::CoSingletons((**x).clone(), Box::new(w.generator));
                    ui(trace, e, R_COSINGLETONS, w.common_support, g)
                }
                Unknown => no_rule(e),
            }
        }
        SetExpr::PUs(x) => {
            // a uniformly supported set of atoms is a subset of its common
            // support, hence finite: Pus(A) and Pfin(A) are the same set
            if **x == SetExpr::Atoms {
                cite(trace, e, R_PUS_ATOMS);
                return powerset(e, x, R_PFIN, trace);
            }
            if x.is_trivial() {
                cite(trace, e, R_TRIVIAL_SUBSETS);
            }
            powerset(e, x, R_PUS, trace)
        }
        SetExpr::PFs(x) => match &**x {
            SetExpr::Atoms => {
                eval(x, trace);
                nui(trace, e, R_PFS_ATOMS)
            }
            SetExpr::PFin(y) => {
                eval(x, trace);
                ui(
                    trace,
                    e,
                    R_PFS_PFIN,
                    Atoms::new(),
                    Generator::SizedSubsets((**y).clone()),
                )
            }
            SetExpr::PFs(y) => {
                eval(x, trace);
                ui(
                    trace,
                    e,
                    R_PFS_PFS,
                    Atoms::new(),
                    Generator::SizedSubsets((**y).clone()),
                )
            }
            SetExpr::TFin => {
                eval(x, trace);
                ui(trace, e, R_PFS_TFIN, Atoms::new(), Generator::InjTuples)
            }
            _ => {
                if x.is_trivial() {
                    cite(trace, e, R_TRIVIAL_SUBSETS);
                }
                let inner = eval(x, trace);
                match inner.result {
                    UniformlyInfinite => {
                        let w = inner.witness.expect("UI verdicts carry a witness");
                        ui(
                            trace,
                            e,
                            R_SINGLETONS,
                            w.common_support,
                            Generator::Singletons(Box::new(w.generator)),
                        )
                    }
                    _ => no_rule(e),
                }
            }
        },
    }
}

/// Shared handling of `Pfin` and `Pus`: NUI is kept, UI lifts via singletons.
fn powerset(e: &SetExpr, x: &SetExpr, keep: Rule, trace: &mut Vec<TraceEntry>) -> Node {
    let inner = eval(x, trace);
    match inner.result {
        Uniformity::NonUniformlyInfinite => nui(trace, e, keep),
        Uniformity::UniformlyInfinite => {
            let w = inner.witness.expect("UI verdicts carry a witness");
            ui(
                trace,
                e,
                R_SINGLETONS,
                w.common_support,
                Generator::Singletons(Box::new(w.generator)),
            )
        }
        Uniformity::Unknown => no_rule(e),
    }
}

fn no_point(e: &SetExpr) -> Node {
    unknown(format!("no element descriptor for a point of {e}"))
}

fn union(x: &Atoms, y: &Atoms) -> Atoms {
    x.union(y).copied().collect()
}

/// Some element of `e`, if it has a descriptor.
pub fn point(e: &SetExpr) -> Option<Element> {
    Some(match e {
        SetExpr::Atoms => Element::Atom(Atom::fresh()),
        SetExpr::Nat => Element::Nat(0),
        SetExpr::Prod(x, y) => Element::pair(point(x)?, point(y)?),
        SetExpr::Sum(x, _) => Element::Inl(Box::new(point(x)?)),
        SetExpr::Power(x, n) => Element::Tuple(vec![point(x)?; *n as usize]),
        SetExpr::PFin(_) | SetExpr::PUs(_) | SetExpr::PFs(_) => Element::FiniteSet(Vec::new()),
        SetExpr::PCofin(x) => Element::cofinite((**x).clone(), []),
        SetExpr::TFin | SetExpr::TDelta => Element::Tuple(Vec::new()),
        SetExpr::Fun(d, r) if **d == SetExpr::Atoms => match &**r {
            SetExpr::Atoms => Element::AtomFun(AtomFun::identity()),
            SetExpr::PFs(x) if **x == SetExpr::Atoms => {
                let f =
                    AtomSetFun::new(Default::default(), SetTail::FinConst(Atoms::new())).ok()?;
                Element::SetFun(f)
            }
            SetExpr::TFin => Element::TupleFun(
                TupleFun::new(TupleShape::Injective, Default::default(), Vec::new()).ok()?,
            ),
            r => {
                let n = atom_power(r)?;
                Element::TupleFun(TupleFun::from_components(&vec![
                    AtomFun::identity();
                    n as usize
                ]))
            }
        },
        SetExpr::Fun(..) => return None,
    })
}

/// Union of the member supports. For a uniformly supported set this is its
/// least support.
pub fn supp_of_uniform_family<T: Nominal>(family: &[T]) -> Atoms {
    family.iter().flat_map(|x| x.support()).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ChainError {
    #[error("order is not total: members {0} and {1} are incomparable")]
    NotTotal(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainReport {
    pub common_support: Atoms,
    pub verified: bool,
    pub checked_perms: usize,
}

/// Checks that the members of a finitely supported chain are uniformly
/// supported by the order's support together with the chain's support.
pub fn check_chain<T: Nominal>(
    members: &[T],
    order: impl Fn(&T, &T) -> Option<Ordering>,
    order_support: &Atoms,
    samples: usize,
    seed: u64,
) -> Result<ChainReport, ChainError> {
    for i in 0..members.len() {
        for j in i + 1..members.len() {
            if order(&members[i], &members[j]).is_none() {
                return Err(ChainError::NotTotal(i, j));
            }
        }
    }
    let common = union(order_support, &supp_of_uniform_family(members));
    let mut pool = common.clone();
    pool.extend(fresh_atoms(4));
    let perms = sample_fix(&common, &pool, samples, seed);
    let verified = members.iter().all(|m| perms.iter().all(|p| m.act(p) == *m));
    Ok(ChainReport {
        common_support: common,
        verified,
        checked_perms: perms.len(),
    })
}
