//! Finitely supported functions out of the atoms.
//!
//! A function `f : A -> Y` supported by a finite `S` is determined by its
//! values on `S` together with its value at one atom `a` outside `S`: the
//! stabilizer of `S` moves `a` to any other atom outside `S`, and `f` has to
//! follow along. Since `f(a)` is supported by `S ∪ {a}`, that single value is
//! drawn from a finite menu, which gives the "table plus uniform tail" shape
//! used by every type here:
//!
//! * [`AtomFun`] (`A -> A`): the tail is the identity or a constant in `S`.
//! * [`AtomSetFun`] (`A -> ℘fs(A)`): the tail is `{a} ∪ X`, `X`,
//!   `A \ ({a} ∪ X)` or `A \ X` for some `X ⊆ S`.
//! * [`TupleFun`] (`A -> A^n` or `A -> Tfin(A)`): each tail slot is a fixed
//!   atom of `S` or the argument itself.
//!
//! The classification is checked against brute force in the oracle tests
//! rather than taken on faith.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};

use crate::atoms::{Atom, Atoms, Perm};
use crate::fscore::{parse_atom_set, parse_finite_atoms, render_atoms, AtomSet, Nominal};
use crate::text::{AtomNames, Cursor, ParseError, Render};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FunError {
    #[error("table value {value} at {arg} lies outside the carrier")]
    ValueOutsideCarrier { arg: Atom, value: Atom },
    #[error("tail mentions {0}, which is outside the carrier")]
    TailOutsideCarrier(Atom),
    #[error("table is not total on the carrier (missing {0})")]
    NotTotal(Atom),
    #[error("table has an entry for {0}, which is outside the carrier")]
    ExtraEntry(Atom),
    #[error("expected tuples of length {expected}, found length {found}")]
    Arity { expected: usize, found: usize },
    #[error("tuple is not injective")]
    NotInjective,
}

/// Behaviour of an [`AtomFun`] outside its carrier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AtomTail {
    Identity,
    Const(Atom),
}

/// A finitely supported function `A -> A`.
///
/// Equality, ordering and hashing compare normalized forms, so two values
/// are equal exactly when they denote the same function.
#[derive(Clone)]
pub struct AtomFun {
    table: BTreeMap<Atom, Atom>,
    tail: AtomTail,
}

fn check_total<V>(carrier: &Atoms, table: &BTreeMap<Atom, V>) -> Result<(), FunError> {
    if let Some(&a) = carrier.iter().find(|a| !table.contains_key(a)) {
        return Err(FunError::NotTotal(a));
    }
    if let Some(&a) = table.keys().find(|a| !carrier.contains(a)) {
        return Err(FunError::ExtraEntry(a));
    }
    Ok(())
}

/// Validated constructor: `table` must be total on `carrier` with values in
/// `carrier`, and a constant tail must name an atom of `carrier`.
pub fn make_atom_fun(
    carrier: &Atoms,
    table: BTreeMap<Atom, Atom>,
    tail: AtomTail,
) -> Result<AtomFun, FunError> {
    check_total(carrier, &table)?;
    AtomFun::new(table, tail)
}

impl AtomFun {
    /// Builds a function whose carrier is the key set of `table`.
    pub fn new(table: BTreeMap<Atom, Atom>, tail: AtomTail) -> Result<AtomFun, FunError> {
        for (&arg, &value) in &table {
            if !table.contains_key(&value) {
                return Err(FunError::ValueOutsideCarrier { arg, value });
            }
        }
        if let AtomTail::Const(c) = tail {
            if !table.contains_key(&c) {
                return Err(FunError::TailOutsideCarrier(c));
            }
        }
        Ok(AtomFun { table, tail })
    }

    pub fn identity() -> AtomFun {
        AtomFun {
            table: BTreeMap::new(),
            tail: AtomTail::Identity,
        }
    }

    /// The constant function with value `c`.
    pub fn constant(c: Atom) -> AtomFun {
        AtomFun {
            table: BTreeMap::from([(c, c)]),
            tail: AtomTail::Const(c),
        }
    }

    /// A permutation viewed as a function.
    pub fn from_perm(p: &Perm) -> AtomFun {
        AtomFun {
            table: p.moves().clone(),
            tail: AtomTail::Identity,
        }
    }

    pub fn carrier(&self) -> Atoms {
        self.table.keys().copied().collect()
    }

    pub fn table(&self) -> &BTreeMap<Atom, Atom> {
        &self.table
    }

    pub fn tail(&self) -> AtomTail {
        self.tail
    }

    fn tail_at(&self, a: Atom) -> Atom {
        match self.tail {
            AtomTail::Identity => a,
            AtomTail::Const(c) => c,
        }
    }

    pub fn apply(&self, a: Atom) -> Atom {
        match self.table.get(&a) {
            Some(&v) => v,
            None => self.tail_at(a),
        }
    }

    /// `self ∘ g`: apply `g` first.
    pub fn compose(&self, g: &AtomFun) -> AtomFun {
        let carrier: Atoms = self.table.keys().chain(g.table.keys()).copied().collect();
        let table = carrier
            .iter()
            .map(|&a| (a, self.apply(g.apply(a))))
            .collect();
        let tail = match g.tail {
            AtomTail::Identity => self.tail,
            AtomTail::Const(c) => AtomTail::Const(self.apply(c)),
        };
        AtomFun { table, tail }.normalize()
    }

    /// Shrinks the carrier to the least support.
    ///
    /// An atom `s` can leave the carrier when the tail already produces
    /// `table(s)` at `s`, no other entry maps to `s`, and the tail does not
    /// name `s`.
    pub fn normalize(&self) -> AtomFun {
        let removable = |s: Atom| {
            self.table[&s] == self.tail_at(s)
                && self.tail != AtomTail::Const(s)
                && !self.table.iter().any(|(&t, &v)| t != s && v == s)
        };
        let table = self
            .table
            .iter()
            .filter(|(&s, _)| !removable(s))
            .map(|(&s, &v)| (s, v))
            .collect();
        AtomFun {
            table,
            tail: self.tail,
        }
    }

    /// `x ↦ p(f(p⁻¹ x))`.
    pub fn conjugate(&self, p: &Perm) -> AtomFun {
        AtomFun {
            table: self
                .table
                .iter()
                .map(|(&s, &v)| (p.apply(s), p.apply(v)))
                .collect(),
            tail: match self.tail {
                AtomTail::Identity => AtomTail::Identity,
                AtomTail::Const(c) => AtomTail::Const(p.apply(c)),
            },
        }
    }

    /// Injective iff the tail is the identity and the table is injective.
    pub fn is_injective(&self) -> bool {
        match self.tail {
            // two atoms outside the carrier collide
            AtomTail::Const(_) => false,
            AtomTail::Identity => {
                let image: Atoms = self.table.values().copied().collect();
                image.len() == self.table.len()
            }
        }
    }

    /// Surjective iff the tail is the identity and the table hits the whole carrier.
    pub fn is_surjective(&self) -> bool {
        match self.tail {
            // finite image
            AtomTail::Const(_) => false,
            AtomTail::Identity => {
                let image: Atoms = self.table.values().copied().collect();
                image == self.carrier()
            }
        }
    }

    fn key(&self) -> (BTreeMap<Atom, Atom>, AtomTail) {
        let n = self.normalize();
        (n.table, n.tail)
    }

    pub fn parse(text: &str, names: &mut AtomNames) -> Result<AtomFun, ParseError> {
        let mut cur = Cursor::new(text);
        let f = parse_atom_fun(&mut cur, names)?;
        cur.finish()?;
        Ok(f)
    }
}

impl PartialEq for AtomFun {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for AtomFun {}

impl PartialOrd for AtomFun {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for AtomFun {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl Hash for AtomFun {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state)
    }
}

impl Nominal for AtomFun {
    fn act(&self, p: &Perm) -> Self {
        self.conjugate(p)
    }

    fn support(&self) -> Atoms {
        self.normalize().carrier()
    }
}

pub fn apply_fun(f: &AtomFun, a: Atom) -> Atom {
    f.apply(a)
}

pub fn compose_funs(f: &AtomFun, g: &AtomFun) -> AtomFun {
    f.compose(g)
}

pub fn normalize(f: &AtomFun) -> AtomFun {
    f.normalize()
}

pub fn conjugate(p: &Perm, f: &AtomFun) -> AtomFun {
    f.conjugate(p)
}

/// All choices of one element from each list, in lexicographic order.
fn product<T: Clone>(choices: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for options in choices {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                options.iter().map(move |o| {
                    let mut v = prefix.clone();
                    v.push(o.clone());
                    v
                })
            })
            .collect();
    }
    out
}

/// Every function `A -> A` supported by `s`, normalized and sorted.
pub fn enumerate_atom_funs(s: &Atoms) -> Vec<AtomFun> {
    let elems: Vec<Atom> = s.iter().copied().collect();
    let rows = product(&vec![elems.clone(); elems.len()]);
    let mut tails = vec![AtomTail::Identity];
    tails.extend(elems.iter().map(|&c| AtomTail::Const(c)));
    let mut out: Vec<AtomFun> = rows
        .iter()
        .flat_map(|row| {
            let table: BTreeMap<Atom, Atom> =
                elems.iter().copied().zip(row.iter().copied()).collect();
            tails.iter().map(move |&tail| {
                AtomFun {
                    table: table.clone(),
                    tail,
                }
                .normalize()
            })
        })
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Behaviour of an [`AtomSetFun`] at an atom `a` outside its carrier.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SetTail {
    /// `{a} ∪ X`
    FinWithSelf(Atoms),
    /// `X`
    FinConst(Atoms),
    /// `A \ ({a} ∪ X)`
    CofinWithoutSelf(Atoms),
    /// `A \ X`
    CofinConst(Atoms),
}

impl SetTail {
    pub fn at(&self, a: Atom) -> AtomSet {
        match self {
            SetTail::FinWithSelf(x) => AtomSet::Finite(with(x, a)),
            SetTail::FinConst(x) => AtomSet::Finite(x.clone()),
            SetTail::CofinWithoutSelf(x) => AtomSet::Cofinite(with(x, a)),
            SetTail::CofinConst(x) => AtomSet::Cofinite(x.clone()),
        }
    }

    pub fn mentioned(&self) -> &Atoms {
        match self {
            SetTail::FinWithSelf(x)
            | SetTail::FinConst(x)
            | SetTail::CofinWithoutSelf(x)
            | SetTail::CofinConst(x) => x,
        }
    }

    fn map(&self, p: &Perm) -> SetTail {
        match self {
            SetTail::FinWithSelf(x) => SetTail::FinWithSelf(p.image(x)),
            SetTail::FinConst(x) => SetTail::FinConst(p.image(x)),
            SetTail::CofinWithoutSelf(x) => SetTail::CofinWithoutSelf(p.image(x)),
            SetTail::CofinConst(x) => SetTail::CofinConst(p.image(x)),
        }
    }

    /// The four tails built from `x`.
    pub fn all_for(x: &Atoms) -> [SetTail; 4] {
        [
            SetTail::FinWithSelf(x.clone()),
            SetTail::FinConst(x.clone()),
            SetTail::CofinWithoutSelf(x.clone()),
            SetTail::CofinConst(x.clone()),
        ]
    }
}

fn with(x: &Atoms, a: Atom) -> Atoms {
    let mut out = x.clone();
    out.insert(a);
    out
}

/// A finitely supported function `A -> ℘fs(A)`. Compared by normalized form.
#[derive(Clone)]
pub struct AtomSetFun {
    table: BTreeMap<Atom, AtomSet>,
    tail: SetTail,
}

impl AtomSetFun {
    /// Builds a function whose carrier is the key set of `table`. Every table
    /// value and the tail set must be supported by the carrier.
    pub fn new(table: BTreeMap<Atom, AtomSet>, tail: SetTail) -> Result<AtomSetFun, FunError> {
        for (&arg, v) in &table {
            if let Some(&value) = v.mentioned().iter().find(|a| !table.contains_key(a)) {
                return Err(FunError::ValueOutsideCarrier { arg, value });
            }
        }
        if let Some(&a) = tail.mentioned().iter().find(|a| !table.contains_key(a)) {
            return Err(FunError::TailOutsideCarrier(a));
        }
        Ok(AtomSetFun { table, tail })
    }

    pub fn carrier(&self) -> Atoms {
        self.table.keys().copied().collect()
    }

    pub fn table(&self) -> &BTreeMap<Atom, AtomSet> {
        &self.table
    }

    pub fn tail(&self) -> &SetTail {
        &self.tail
    }

    pub fn apply(&self, a: Atom) -> AtomSet {
        match self.table.get(&a) {
            Some(v) => v.clone(),
            None => self.tail.at(a),
        }
    }

    pub fn normalize(&self) -> AtomSetFun {
        let removable = |s: Atom| {
            self.table[&s] == self.tail.at(s)
                && !self.tail.mentioned().contains(&s)
                && !self
                    .table
                    .iter()
                    .any(|(&t, v)| t != s && v.mentioned().contains(&s))
        };
        let table = self
            .table
            .iter()
            .filter(|(&s, _)| !removable(s))
            .map(|(&s, v)| (s, v.clone()))
            .collect();
        AtomSetFun {
            table,
            tail: self.tail.clone(),
        }
    }

    pub fn conjugate(&self, p: &Perm) -> AtomSetFun {
        AtomSetFun {
            table: self
                .table
                .iter()
                .map(|(&s, v)| (p.apply(s), v.act(p)))
                .collect(),
            tail: self.tail.map(p),
        }
    }

    fn key(&self) -> (BTreeMap<Atom, AtomSet>, SetTail) {
        let n = self.normalize();
        (n.table, n.tail)
    }

    pub fn parse(text: &str, names: &mut AtomNames) -> Result<AtomSetFun, ParseError> {
        let mut cur = Cursor::new(text);
        let f = parse_set_fun(&mut cur, names)?;
        cur.finish()?;
        Ok(f)
    }
}

impl PartialEq for AtomSetFun {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for AtomSetFun {}

impl PartialOrd for AtomSetFun {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for AtomSetFun {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl Nominal for AtomSetFun {
    fn act(&self, p: &Perm) -> Self {
        self.conjugate(p)
    }

    fn support(&self) -> Atoms {
        self.normalize().carrier()
    }
}

pub fn apply_set_fun(f: &AtomSetFun, a: Atom) -> AtomSet {
    f.apply(a)
}

/// Every function `A -> ℘fs(A)` supported by `s`, normalized and sorted.
pub fn enumerate_set_funs(s: &Atoms) -> Vec<AtomSetFun> {
    let elems: Vec<Atom> = s.iter().copied().collect();
    let values = crate::fscore::sets_supported_by(s);
    let rows = product(&vec![values; elems.len()]);
    let tails: Vec<SetTail> = crate::fscore::sets_supported_by(s)
        .into_iter()
        .filter(AtomSet::is_finite)
        .flat_map(|x| SetTail::all_for(x.mentioned()))
        .collect();
    let mut out: Vec<AtomSetFun> = rows
        .iter()
        .flat_map(|row| {
            let table: BTreeMap<Atom, AtomSet> =
                elems.iter().copied().zip(row.iter().cloned()).collect();
            tails.iter().map(move |tail| {
                AtomSetFun {
                    table: table.clone(),
                    tail: tail.clone(),
                }
                .normalize()
            })
        })
        .collect();
    out.sort();
    out.dedup();
    out
}

/// One coordinate of a [`TupleFun`] tail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slot {
    Fixed(Atom),
    /// The argument itself.
    Arg,
}

/// Codomain of a [`TupleFun`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TupleShape {
    /// `A^n`: all tuples of length `n`.
    Fixed(usize),
    /// `Tfin(A)`: injective tuples of any length.
    Injective,
}

/// A finitely supported function `A -> A^n` or `A -> Tfin(A)`. Compared by
/// normalized form.
#[derive(Clone)]
pub struct TupleFun {
    shape: TupleShape,
    table: BTreeMap<Atom, Vec<Atom>>,
    tail: Vec<Slot>,
}

fn is_injective_tuple<T: PartialEq>(t: &[T]) -> bool {
    t.iter().enumerate().all(|(i, x)| !t[..i].contains(x))
}

impl TupleFun {
    pub fn new(
        shape: TupleShape,
        table: BTreeMap<Atom, Vec<Atom>>,
        tail: Vec<Slot>,
    ) -> Result<TupleFun, FunError> {
        for (&arg, row) in &table {
            if let Some(&value) = row.iter().find(|a| !table.contains_key(a)) {
                return Err(FunError::ValueOutsideCarrier { arg, value });
            }
        }
        for slot in &tail {
            if let Slot::Fixed(a) = slot {
                if !table.contains_key(a) {
                    return Err(FunError::TailOutsideCarrier(*a));
                }
            }
        }
        match shape {
            TupleShape::Fixed(n) => {
                for len in table.values().map(Vec::len).chain([tail.len()]) {
                    if len != n {
                        return Err(FunError::Arity {
                            expected: n,
                            found: len,
                        });
                    }
                }
            }
            TupleShape::Injective => {
                if !table.values().all(|r| is_injective_tuple(r)) || !is_injective_tuple(&tail) {
                    return Err(FunError::NotInjective);
                }
            }
        }
        Ok(TupleFun { shape, table, tail })
    }

    pub fn shape(&self) -> TupleShape {
        self.shape
    }

    pub fn carrier(&self) -> Atoms {
        self.table.keys().copied().collect()
    }

    pub fn table(&self) -> &BTreeMap<Atom, Vec<Atom>> {
        &self.table
    }

    pub fn tail(&self) -> &[Slot] {
        &self.tail
    }

    fn tail_at(&self, a: Atom) -> Vec<Atom> {
        self.tail
            .iter()
            .map(|slot| match slot {
                Slot::Fixed(c) => *c,
                Slot::Arg => a,
            })
            .collect()
    }

    pub fn apply(&self, a: Atom) -> Vec<Atom> {
        match self.table.get(&a) {
            Some(row) => row.clone(),
            None => self.tail_at(a),
        }
    }

    pub fn normalize(&self) -> TupleFun {
        let removable = |s: Atom| {
            self.table[&s] == self.tail_at(s)
                && !self.tail.contains(&Slot::Fixed(s))
                && !self
                    .table
                    .iter()
                    .any(|(&t, row)| t != s && row.contains(&s))
        };
        let table = self
            .table
            .iter()
            .filter(|(&s, _)| !removable(s))
            .map(|(&s, row)| (s, row.clone()))
            .collect();
        TupleFun {
            shape: self.shape,
            table,
            tail: self.tail.clone(),
        }
    }

    pub fn conjugate(&self, p: &Perm) -> TupleFun {
        TupleFun {
            shape: self.shape,
            table: self
                .table
                .iter()
                .map(|(&s, row)| (p.apply(s), row.iter().map(|&x| p.apply(x)).collect()))
                .collect(),
            tail: self
                .tail
                .iter()
                .map(|slot| match slot {
                    Slot::Fixed(c) => Slot::Fixed(p.apply(*c)),
                    Slot::Arg => Slot::Arg,
                })
                .collect(),
        }
    }

    /// Splits `A -> A^n` into its `n` coordinate functions `A -> A`.
    /// Returns `None` for the injective shape.
    pub fn components(&self) -> Option<Vec<AtomFun>> {
        let TupleShape::Fixed(n) = self.shape else {
            return None;
        };
        Some(
            (0..n)
                .map(|i| {
                    let table = self.table.iter().map(|(&s, row)| (s, row[i])).collect();
                    let tail = match self.tail[i] {
                        Slot::Fixed(c) => AtomTail::Const(c),
                        Slot::Arg => AtomTail::Identity,
                    };
                    AtomFun { table, tail }.normalize()
                })
                .collect(),
        )
    }

    /// Reassembles coordinate functions into one function `A -> A^n`.
    pub fn from_components(parts: &[AtomFun]) -> TupleFun {
        let carrier: Atoms = parts.iter().flat_map(|f| f.carrier()).collect();
        let table = carrier
            .iter()
            .map(|&s| (s, parts.iter().map(|f| f.apply(s)).collect()))
            .collect();
        let tail = parts
            .iter()
            .map(|f| match f.tail {
                AtomTail::Identity => Slot::Arg,
                AtomTail::Const(c) => Slot::Fixed(c),
            })
            .collect();
        TupleFun {
            shape: TupleShape::Fixed(parts.len()),
            table,
            tail,
        }
        .normalize()
    }

    fn key(&self) -> (TupleShape, BTreeMap<Atom, Vec<Atom>>, Vec<Slot>) {
        let n = self.normalize();
        (n.shape, n.table, n.tail)
    }

    pub fn parse(
        text: &str,
        shape: TupleShape,
        names: &mut AtomNames,
    ) -> Result<TupleFun, ParseError> {
        let mut cur = Cursor::new(text);
        let f = parse_tuple_fun(&mut cur, shape, names)?;
        cur.finish()?;
        Ok(f)
    }
}

impl PartialEq for TupleFun {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for TupleFun {}

impl PartialOrd for TupleFun {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TupleFun {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl Nominal for TupleFun {
    fn act(&self, p: &Perm) -> Self {
        self.conjugate(p)
    }

    fn support(&self) -> Atoms {
        self.normalize().carrier()
    }
}

fn enumerate_tuple_shape(s: &Atoms, shape: TupleShape) -> Vec<TupleFun> {
    let elems: Vec<Atom> = s.iter().copied().collect();
    let mut slots: Vec<Slot> = elems.iter().map(|&a| Slot::Fixed(a)).collect();
    slots.push(Slot::Arg);
    let (rows, tails): (Vec<Vec<Atom>>, Vec<Vec<Slot>>) = match shape {
        TupleShape::Fixed(n) => (product(&vec![elems.clone(); n]), product(&vec![slots; n])),
        TupleShape::Injective => (
            crate::fscore::injective_tuples_over(s),
            injective_sequences(&slots),
        ),
    };
    let tables = product(&vec![rows; elems.len()]);
    let mut out: Vec<TupleFun> = tables
        .iter()
        .flat_map(|choice| {
            let table: BTreeMap<Atom, Vec<Atom>> =
                elems.iter().copied().zip(choice.iter().cloned()).collect();
            tails.iter().map(move |tail| {
                TupleFun {
                    shape,
                    table: table.clone(),
                    tail: tail.clone(),
                }
                .normalize()
            })
        })
        .collect();
    out.sort();
    out.dedup();
    out
}

fn injective_sequences<T: Clone + PartialEq>(items: &[T]) -> Vec<Vec<T>> {
    fn go<T: Clone + PartialEq>(items: &[T], prefix: &mut Vec<T>, out: &mut Vec<Vec<T>>) {
        out.push(prefix.clone());
        for x in items {
            if !prefix.contains(x) {
                prefix.push(x.clone());
                go(items, prefix, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(items, &mut Vec::new(), &mut out);
    out
}

/// Every function `A -> A^n` supported by `s`, normalized and sorted.
pub fn enumerate_tuple_funs(s: &Atoms, n: usize) -> Vec<TupleFun> {
    enumerate_tuple_shape(s, TupleShape::Fixed(n))
}

/// Every function `A -> Tfin(A)` supported by `s`, normalized and sorted.
pub fn enumerate_injective_tuple_funs(s: &Atoms) -> Vec<TupleFun> {
    enumerate_tuple_shape(s, TupleShape::Injective)
}

// ---- text forms ----

fn parse_entries<V>(
    cur: &mut Cursor<'_>,
    names: &mut AtomNames,
    mut value: impl FnMut(&mut Cursor<'_>, &mut AtomNames) -> Result<V, ParseError>,
) -> Result<BTreeMap<Atom, V>, ParseError> {
    cur.expect("fun")?;
    cur.expect("{")?;
    let mut table = BTreeMap::new();
    if cur.peek_ident() == Some("tail") {
        return Ok(table);
    }
    if cur.eat(";") {
        return Ok(table);
    }
    loop {
        let at = cur.pos();
        let arg = names.bind(cur.ident()?);
        cur.expect("->")?;
        let v = value(cur, names)?;
        if table.insert(arg, v).is_some() {
            return Err(ParseError::new(at, "duplicate table entry"));
        }
        if cur.eat(";") {
            return Ok(table);
        }
        cur.expect(",")?;
    }
}

fn fun_error(at: usize, e: FunError) -> ParseError {
    ParseError::new(at, e.to_string())
}

pub(crate) fn parse_atom_fun(
    cur: &mut Cursor<'_>,
    names: &mut AtomNames,
) -> Result<AtomFun, ParseError> {
    let start = cur.pos();
    let table = parse_entries(cur, names, |c, n| Ok(n.bind(c.ident()?)))?;
    cur.expect("tail")?;
    cur.expect("=")?;
    let tail = if cur.eat("id") {
        AtomTail::Identity
    } else if cur.eat("const") {
        AtomTail::Const(names.bind(cur.ident()?))
    } else {
        return Err(cur.error("expected `id` or `const <atom>`"));
    };
    cur.expect("}")?;
    AtomFun::new(table, tail).map_err(|e| fun_error(start, e))
}

pub(crate) fn parse_set_fun(
    cur: &mut Cursor<'_>,
    names: &mut AtomNames,
) -> Result<AtomSetFun, ParseError> {
    let start = cur.pos();
    let table = parse_entries(cur, names, parse_atom_set)?;
    cur.expect("tail")?;
    cur.expect("=")?;
    let tail = if cur.eat("self+") {
        SetTail::FinWithSelf(parse_finite_atoms(cur, names)?)
    } else if cur.eat("cofin-self+") {
        SetTail::CofinWithoutSelf(parse_finite_atoms(cur, names)?)
    } else if cur.eat("const") {
        match parse_atom_set(cur, names)? {
            AtomSet::Finite(x) => SetTail::FinConst(x),
            AtomSet::Cofinite(x) => SetTail::CofinConst(x),
        }
    } else {
        return Err(cur.error("expected `self+{..}`, `cofin-self+{..}` or `const <set>`"));
    };
    cur.expect("}")?;
    AtomSetFun::new(table, tail).map_err(|e| fun_error(start, e))
}

fn parse_tuple(cur: &mut Cursor<'_>, names: &mut AtomNames) -> Result<Vec<Atom>, ParseError> {
    cur.expect("(")?;
    let mut out = Vec::new();
    if cur.eat(")") {
        return Ok(out);
    }
    loop {
        out.push(names.bind(cur.ident()?));
        if cur.eat(")") {
            return Ok(out);
        }
        cur.expect(",")?;
    }
}

pub(crate) fn parse_tuple_fun(
    cur: &mut Cursor<'_>,
    shape: TupleShape,
    names: &mut AtomNames,
) -> Result<TupleFun, ParseError> {
    let start = cur.pos();
    let table = parse_entries(cur, names, parse_tuple)?;
    cur.expect("tail")?;
    cur.expect("=")?;
    cur.expect("(")?;
    let mut tail = Vec::new();
    if !cur.eat(")") {
        loop {
            let label = cur.ident()?;
            tail.push(if label == "self" {
                Slot::Arg
            } else {
                Slot::Fixed(names.bind(label))
            });
            if cur.eat(")") {
                break;
            }
            cur.expect(",")?;
        }
    }
    cur.expect("}")?;
    TupleFun::new(shape, table, tail).map_err(|e| fun_error(start, e))
}

fn render_fun<V>(
    table: &BTreeMap<Atom, V>,
    names: &AtomNames,
    value: impl Fn(&V) -> String,
    tail: String,
) -> String {
    let entries: Vec<String> = table
        .iter()
        .map(|(&a, v)| format!("{}->{}", names.name(a), value(v)))
        .collect();
    if entries.is_empty() {
        format!("fun{{tail={tail}}}")
    } else {
        format!("fun{{{}; tail={tail}}}", entries.join(", "))
    }
}

fn render_tuple(t: &[Atom], names: &AtomNames) -> String {
    let inner: Vec<String> = t.iter().map(|&a| names.name(a)).collect();
    format!("({})", inner.join(","))
}

impl Render for AtomFun {
    fn render(&self, names: &AtomNames) -> String {
        let tail = match self.tail {
            AtomTail::Identity => "id".to_string(),
            AtomTail::Const(c) => format!("const {}", names.name(c)),
        };
        render_fun(&self.table, names, |&v| names.name(v), tail)
    }
}

impl Render for AtomSetFun {
    fn render(&self, names: &AtomNames) -> String {
        let tail = match &self.tail {
            SetTail::FinWithSelf(x) => format!("self+{}", render_atoms(x, names)),
            SetTail::CofinWithoutSelf(x) => format!("cofin-self+{}", render_atoms(x, names)),
            SetTail::FinConst(x) => format!("const {}", AtomSet::Finite(x.clone()).render(names)),
            SetTail::CofinConst(x) => {
                format!("const {}", AtomSet::Cofinite(x.clone()).render(names))
            }
        };
        render_fun(&self.table, names, |v| v.render(names), tail)
    }
}

impl Render for TupleFun {
    fn render(&self, names: &AtomNames) -> String {
        let slots: Vec<String> = self
            .tail
            .iter()
            .map(|s| match s {
                Slot::Fixed(a) => names.name(*a),
                Slot::Arg => "self".to_string(),
            })
            .collect();
        let tail = format!("({})", slots.join(","));
        render_fun(&self.table, names, |row| render_tuple(row, names), tail)
    }
}

macro_rules! display_via_render {
    ($($t:ty),*) => {$(
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.render(&AtomNames::default()))
            }
        }

        impl fmt::Debug for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.render(&AtomNames::default()))
            }
        }
    )*};
}

display_via_render!(AtomFun, AtomSetFun, TupleFun);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atoms::{fresh_atoms, sample_fix};
    use crate::fscore::support_report;
    use proptest::prelude::*;

    fn atoms(n: usize) -> Vec<Atom> {
        fresh_atoms(n)
    }

    fn set(xs: &[Atom]) -> Atoms {
        xs.iter().copied().collect()
    }

    #[test]
    fn identity_and_constant() {
        let v = atoms(3);
        let (a, b, c) = (v[0], v[1], v[2]);
        assert_eq!(AtomFun::identity().apply(a), a);
        let k = AtomFun::constant(a);
        assert_eq!(k.apply(b), a);
        assert_eq!(k.support(), set(&[a]));
        let swap = AtomFun::from_perm(&Perm::transpose(a, b));
        // pointwise against direct evaluation
        let kc = k.compose(&swap);
        let ck = swap.compose(&k);
        for x in [a, b, c] {
            assert_eq!(kc.apply(x), k.apply(swap.apply(x)));
            assert_eq!(ck.apply(x), swap.apply(k.apply(x)));
        }
        assert_eq!(kc, AtomFun::constant(a));
        assert_eq!(ck, AtomFun::constant(b));
    }

    #[test]
    fn construction_errors() {
        let v = atoms(3);
        let (a, b, c) = (v[0], v[1], v[2]);
        let carrier = set(&[a]);
        assert_eq!(
            make_atom_fun(&carrier, BTreeMap::from([(a, b)]), AtomTail::Identity),
            Err(FunError::ValueOutsideCarrier { arg: a, value: b })
        );
        assert_eq!(
            make_atom_fun(&carrier, BTreeMap::from([(a, a)]), AtomTail::Const(c)),
            Err(FunError::TailOutsideCarrier(c))
        );
        assert_eq!(
            make_atom_fun(&set(&[a, b]), BTreeMap::from([(a, a)]), AtomTail::Identity),
            Err(FunError::NotTotal(b))
        );
    }

    #[test]
    fn normalization_examples() {
        let v = atoms(4);
        let (a, b) = (v[0], v[1]);
        let f = make_atom_fun(
            &set(&[a, b]),
            BTreeMap::from([(a, a), (b, b)]),
            AtomTail::Identity,
        )
        .unwrap();
        assert!(f.normalize().carrier().is_empty());
        let g = make_atom_fun(
            &set(&[a, b]),
            BTreeMap::from([(a, a), (b, a)]),
            AtomTail::Const(a),
        )
        .unwrap();
        let n = g.normalize();
        assert_eq!(n.carrier(), set(&[a]));
        for x in [a, b, v[2], v[3]] {
            assert_eq!(n.apply(x), g.apply(x));
        }
        // b is the image of another entry, so it stays
        let h = make_atom_fun(
            &set(&[a, b]),
            BTreeMap::from([(a, b), (b, b)]),
            AtomTail::Identity,
        )
        .unwrap();
        assert_eq!(h.normalize().carrier(), set(&[a, b]));
    }

    #[test]
    fn conjugation_examples() {
        let v = atoms(3);
        let (a, b) = (v[0], v[1]);
        let t = Perm::transpose(a, b);
        assert_eq!(conjugate(&t, &AtomFun::identity()), AtomFun::identity());
        let got = conjugate(&t, &AtomFun::constant(a));
        for x in [a, b, v[2]] {
            // p(f(p⁻¹ x))
            assert_eq!(
                got.apply(x),
                t.apply(AtomFun::constant(a).apply(t.inverse().apply(x)))
            );
        }
        assert_eq!(got, AtomFun::constant(b));
        let other = Perm::transpose(v[2], fresh_atoms(1)[0]);
        assert_eq!(
            conjugate(&other, &AtomFun::constant(a)),
            AtomFun::constant(a)
        );
    }

    #[test]
    fn injectivity_examples() {
        let v = atoms(2);
        let (a, b) = (v[0], v[1]);
        let id = AtomFun::identity();
        assert_eq!((id.is_injective(), id.is_surjective()), (true, true));
        let k = AtomFun::constant(a);
        assert_eq!((k.is_injective(), k.is_surjective()), (false, false));
        let sw = AtomFun::new(BTreeMap::from([(a, b), (b, a)]), AtomTail::Identity).unwrap();
        assert_eq!((sw.is_injective(), sw.is_surjective()), (true, true));
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(
            enumerate_atom_funs(&Atoms::new()),
            vec![AtomFun::identity()]
        );
        let a = atoms(1)[0];
        let one = enumerate_atom_funs(&set(&[a]));
        assert_eq!(one.len(), 2);
        assert!(one.contains(&AtomFun::identity()) && one.contains(&AtomFun::constant(a)));
        assert_eq!(enumerate_atom_funs(&set(&atoms(2))).len(), 12);
        assert_eq!(enumerate_atom_funs(&set(&atoms(3))).len(), 108);

        let e = enumerate_set_funs(&Atoms::new());
        assert_eq!(e.len(), 4);
        assert_eq!(enumerate_set_funs(&set(&[a])).len(), 32);
        assert_eq!(enumerate_set_funs(&set(&atoms(2))).len(), 64 * 16);

        let diag = enumerate_tuple_funs(&Atoms::new(), 2);
        assert_eq!(diag.len(), 1);
        let x = atoms(1)[0];
        assert_eq!(diag[0].apply(x), vec![x, x]);
        assert_eq!(enumerate_tuple_funs(&set(&[a]), 1).len(), 2);
        assert_eq!(enumerate_tuple_funs(&set(&[a]), 2).len(), 4);
        assert_eq!(enumerate_injective_tuple_funs(&Atoms::new()).len(), 2);
        // T(1)^1 · T(2) = 2 · 5
        assert_eq!(enumerate_injective_tuple_funs(&set(&[a])).len(), 10);
    }

    #[test]
    fn set_fun_tails() {
        let v = atoms(2);
        let (a, b) = (v[0], v[1]);
        let f = AtomSetFun::new(
            BTreeMap::from([(a, AtomSet::finite([a]))]),
            SetTail::FinWithSelf(set(&[a])),
        )
        .unwrap();
        assert_eq!(apply_set_fun(&f, b), AtomSet::finite([a, b]));
        let e = enumerate_set_funs(&Atoms::new());
        let vals: Vec<AtomSet> = e.iter().map(|f| f.apply(b)).collect();
        for want in [
            AtomSet::finite([b]),
            AtomSet::empty(),
            AtomSet::cofinite([b]),
            AtomSet::all(),
        ] {
            assert!(vals.contains(&want));
        }
    }

    #[test]
    fn tuple_components_match_atom_funs() {
        let s = set(&atoms(2));
        let single: Vec<TupleFun> = enumerate_atom_funs(&s)
            .iter()
            .map(|f| TupleFun::from_components(std::slice::from_ref(f)))
            .collect();
        let mut sorted = single.clone();
        sorted.sort();
        assert_eq!(sorted, enumerate_tuple_funs(&s, 1));
        for f in enumerate_tuple_funs(&s, 2) {
            let parts = f.components().unwrap();
            assert_eq!(TupleFun::from_components(&parts), f);
        }
    }

    #[test]
    fn text_round_trips() {
        let mut names = AtomNames::new();
        for t in [
            "fun{a->b, b->a; tail=id}",
            "fun{a->a; tail=const a}",
            "fun{tail=id}",
        ] {
            let f = AtomFun::parse(t, &mut names).unwrap();
            assert_eq!(f.render(&names), t);
        }
        for t in [
            "fun{a->{a,b}, b->A\\{a}; tail=self+{a}}",
            "fun{tail=cofin-self+{}}",
            "fun{a->A; tail=const A\\{a}}",
            "fun{a->{}; tail=const {a}}",
        ] {
            let f = AtomSetFun::parse(t, &mut names).unwrap();
            assert_eq!(f.render(&names), t);
        }
        let t = "fun{a->(a,b), b->(b,b); tail=(self,a)}";
        let f = TupleFun::parse(t, TupleShape::Fixed(2), &mut names).unwrap();
        assert_eq!(f.render(&names), t);
        assert!(TupleFun::parse(t, TupleShape::Fixed(3), &mut names).is_err());
        assert!(AtomFun::parse("fun{a->q; tail=id}", &mut names).is_err());
    }

    #[test]
    fn inj_iff_surj_on_full_enumerations() {
        for n in 0..=3 {
            for f in enumerate_atom_funs(&set(&atoms(n))) {
                assert_eq!(f.is_injective(), f.is_surjective(), "{f}");
            }
        }
    }

    /// Restrictions to `S` and to its complement are each fixed by `Fix(S)`.
    #[test]
    fn decomposition_is_supported() {
        let sv = atoms(2);
        let s = set(&sv);
        let pool: Atoms = s.iter().copied().chain(fresh_atoms(4)).collect();
        let perms = sample_fix(&s, &pool, 20, 3);
        for f in enumerate_atom_funs(&s) {
            for p in &perms {
                let g = f.conjugate(p);
                assert_eq!(g, f);
                for &x in &sv {
                    assert_eq!(g.apply(x), f.apply(x));
                }
                assert_eq!(g.tail(), f.tail());
            }
        }
        for f in enumerate_set_funs(&s) {
            for p in &perms {
                assert_eq!(f.conjugate(p), f);
            }
        }
    }

    fn arb_atom_fun(pool: Vec<Atom>) -> impl Strategy<Value = AtomFun> {
        let n = pool.len();
        (proptest::collection::vec(0..n, n), 0..=n).prop_map(move |(rows, tail)| {
            let table = pool
                .iter()
                .copied()
                .zip(rows.iter().map(|&i| pool[i]))
                .collect();
            let tail = if tail == n {
                AtomTail::Identity
            } else {
                AtomTail::Const(pool[tail])
            };
            AtomFun::new(table, tail).unwrap()
        })
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent_and_preserves_denotation(f in arb_atom_fun(fresh_atoms(4))) {
            let n = f.normalize();
            let probe: Vec<Atom> = f.carrier().into_iter().chain(fresh_atoms(2)).collect();
            for &x in &probe {
                prop_assert_eq!(n.apply(x), f.apply(x));
            }
            prop_assert_eq!(n.normalize().carrier(), n.carrier());
        }

        #[test]
        fn normalized_carrier_is_least_support(f in arb_atom_fun(fresh_atoms(4))) {
            let report = support_report(&f, &f.carrier());
            prop_assert!(report.verified(), "{}", f);
        }

        #[test]
        fn support_equivariance(f in arb_atom_fun(fresh_atoms(4)), seed in any::<u64>()) {
            let pool: Atoms = f.carrier().into_iter().chain(fresh_atoms(3)).collect();
            for p in sample_fix(&Atoms::new(), &pool, 4, seed) {
                prop_assert_eq!(f.conjugate(&p).support(), p.image(&f.support()));
            }
        }

        #[test]
        fn composition_is_pointwise(f in arb_atom_fun(fresh_atoms(3)), g in arb_atom_fun(fresh_atoms(3))) {
            let h = f.compose(&g);
            let probe: Vec<Atom> = f.carrier().into_iter().chain(g.carrier()).chain(fresh_atoms(2)).collect();
            for &x in &probe {
                prop_assert_eq!(h.apply(x), f.apply(g.apply(x)));
            }
            let sup: Atoms = f.carrier().union(&g.carrier()).copied().collect();
            prop_assert!(h.carrier().is_subset(&sup));
        }
    }

    #[test]
    fn set_fun_supports_are_least() {
        let s = set(&atoms(2));
        for f in enumerate_set_funs(&s) {
            let r = support_report(&f, &s);
            assert!(r.verified(), "{f}");
        }
        for f in enumerate_tuple_funs(&s, 2)
            .iter()
            .chain(&enumerate_injective_tuple_funs(&s))
        {
            assert!(support_report(f, &s).verified(), "{f}");
        }
    }
}
