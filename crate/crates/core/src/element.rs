//! Descriptors for elements of grammar-built sets.
//!
//! Witness families and cardinality witnesses produce these. Each descriptor
//! is a finite object with a permutation action and a least support, so it
//! can be checked by sampling.

use std::fmt;

use crate::analyzer::SetExpr;
use crate::atoms::{Atoms, Perm};
use crate::fscore::Nominal;
use crate::fsfun::{AtomFun, AtomSetFun, TupleFun};
use crate::text::{AtomNames, Render};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Element {
    /// An element of a non-atomic set.
    Nat(u64),
    Atom(crate::atoms::Atom),
    Pair(Box<Element>, Box<Element>),
    /// Element of an `n`-fold power.
    Tuple(Vec<Element>),
    Inl(Box<Element>),
    Inr(Box<Element>),
    /// A finite set, kept sorted without duplicates.
    FiniteSet(Vec<Element>),
    /// All of `of` except finitely many elements.
    Cofinite {
        of: SetExpr,
        missing: Vec<Element>,
    },
    /// The set of all `size`-element subsets of `of`.
    SizedSubsets {
        of: SetExpr,
        size: u64,
    },
    /// The set of all injective atom tuples of length `len`.
    InjTuplesOfLength {
        len: u64,
    },
    AtomFun(AtomFun),
    SetFun(AtomSetFun),
    TupleFun(TupleFun),
}

impl Element {
    pub fn pair(x: Element, y: Element) -> Element {
        Element::Pair(Box::new(x), Box::new(y))
    }

    pub fn finite_set(items: impl IntoIterator<Item = Element>) -> Element {
        let mut v: Vec<Element> = items.into_iter().collect();
        v.sort();
        v.dedup();
        Element::FiniteSet(v)
    }

    pub fn cofinite(of: SetExpr, missing: impl IntoIterator<Item = Element>) -> Element {
        let mut v: Vec<Element> = missing.into_iter().collect();
        v.sort();
        v.dedup();
        Element::Cofinite { of, missing: v }
    }

    /// A string that differs between any two distinct descriptors.
    pub fn distinctness_key(&self) -> String {
        self.render(&AtomNames::default())
    }
}

impl Nominal for Element {
    fn act(&self, p: &Perm) -> Self {
        match self {
            Element::Nat(n) => Element::Nat(*n),
            Element::Atom(a) => Element::Atom(p.apply(*a)),
            Element::Pair(x, y) => Element::pair(x.act(p), y.act(p)),
            Element::Tuple(xs) => Element::Tuple(xs.iter().map(|x| x.act(p)).collect()),
            Element::Inl(x) => Element::Inl(Box::new(x.act(p))),
            Element::Inr(x) => Element::Inr(Box::new(x.act(p))),
            Element::FiniteSet(xs) => Element::finite_set(xs.iter().map(|x| x.act(p))),
            // grammar sets are equivariant, so only the listed exceptions move
            Element::Cofinite { of, missing } => {
                Element::cofinite(of.clone(), missing.iter().map(|x| x.act(p)))
            }
            Element::SizedSubsets { .. } | Element::InjTuplesOfLength { .. } => self.clone(),
            Element::AtomFun(f) => Element::AtomFun(f.act(p)),
            Element::SetFun(f) => Element::SetFun(f.act(p)),
            Element::TupleFun(f) => Element::TupleFun(f.act(p)),
        }
    }

    fn support(&self) -> Atoms {
        match self {
            Element::Nat(_) | Element::SizedSubsets { .. } | Element::InjTuplesOfLength { .. } => {
                Atoms::new()
            }
            Element::Atom(a) => Atoms::from([*a]),
            Element::Pair(x, y) => x.support().union(&y.support()).copied().collect(),
            Element::Inl(x) | Element::Inr(x) => x.support(),
            Element::Tuple(xs) | Element::FiniteSet(xs) => {
                xs.iter().flat_map(|x| x.support()).collect()
            }
            Element::Cofinite { missing, .. } => missing.iter().flat_map(|x| x.support()).collect(),
            Element::AtomFun(f) => f.support(),
            Element::SetFun(f) => f.support(),
            Element::TupleFun(f) => f.support(),
        }
    }
}

fn join(xs: &[Element], names: &AtomNames) -> String {
    xs.iter()
        .map(|x| x.render(names))
        .collect::<Vec<_>>()
        .join(", ")
}

impl Render for Element {
    fn render(&self, names: &AtomNames) -> String {
        match self {
            Element::Nat(n) => n.to_string(),
            Element::Atom(a) => names.name(*a),
            Element::Pair(x, y) => format!("({}, {})", x.render(names), y.render(names)),
            Element::Tuple(xs) => format!("({})", join(xs, names)),
            Element::Inl(x) => format!("inl({})", x.render(names)),
            Element::Inr(x) => format!("inr({})", x.render(names)),
            Element::FiniteSet(xs) => format!("{{{}}}", join(xs, names)),
            Element::Cofinite { of, missing } => format!("{of} \\ {{{}}}", join(missing, names)),
            Element::SizedSubsets { of, size } => format!("subsets({of}, {size})"),
            Element::InjTuplesOfLength { len } => format!("injtuples({len})"),
            Element::AtomFun(f) => f.render(names),
            Element::SetFun(f) => f.render(names),
            Element::TupleFun(f) => f.render(names),
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&AtomNames::default()))
    }
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
