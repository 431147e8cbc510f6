//! Brute-force ground truth over a finite universe of concrete atoms.
//!
//! Atoms of a [`FiniteModel`] are the indices `0..n`. An element is supported
//! by `S` inside the model when every transposition of two atoms outside `S`
//! fixes it; those transpositions generate the pointwise stabilizer of `S` in
//! the symmetric group of the universe, so checking them is enough.
//!
//! Nothing here calls into the symbolic modules except [`Embedding`], which
//! translates symbolic values into model values for comparison.

use std::collections::BTreeSet;

use crate::atoms::{Atom, Atoms};
use crate::counting::Kind;
use crate::fscore::AtomSet;
use crate::fsfun::{AtomFun, AtomSetFun, TupleFun};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("universe of {n} atoms is too small for a support of size {s} (need at least {need})")]
    Threshold { n: usize, s: usize, need: usize },
    #[error("support mentions atom {0}, which is outside the universe")]
    NotInUniverse(usize),
    #[error("at least two atoms outside the support are required, found {0}")]
    TooFewFree(usize),
    #[error("universe of {0} atoms is too large for exhaustive enumeration")]
    TooLarge(usize),
    #[error("symbolic atom {0} has no image in the model")]
    Unembeddable(Atom),
}

/// A concrete element of some construction over the model's atoms.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Atom(usize),
    Set(BTreeSet<usize>),
    Tuple(Vec<usize>),
    /// A function on atoms, stored as its graph indexed by argument.
    Fun(Vec<Value>),
}

impl Value {
    /// Action of the permutation given by its image vector.
    pub fn act(&self, perm: &[usize]) -> Value {
        match self {
            Value::Atom(x) => Value::Atom(perm[*x]),
            Value::Set(xs) => Value::Set(xs.iter().map(|&x| perm[x]).collect()),
            Value::Tuple(xs) => Value::Tuple(xs.iter().map(|&x| perm[x]).collect()),
            Value::Fun(graph) => {
                // (π·f)(π x) = π·f(x)
                let mut out = graph.clone();
                for (x, v) in graph.iter().enumerate() {
                    out[perm[x]] = v.act(perm);
                }
                Value::Fun(out)
            }
        }
    }

    /// Action of the transposition `(a b)`.
    pub fn swap(&self, a: usize, b: usize) -> Value {
        let sw = |x: usize| {
            if x == a {
                b
            } else if x == b {
                a
            } else {
                x
            }
        };
        match self {
            Value::Atom(x) => Value::Atom(sw(*x)),
            Value::Set(xs) => Value::Set(xs.iter().map(|&x| sw(x)).collect()),
            Value::Tuple(xs) => Value::Tuple(xs.iter().map(|&x| sw(x)).collect()),
            Value::Fun(graph) => {
                Value::Fun((0..graph.len()).map(|x| graph[sw(x)].swap(a, b)).collect())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FiniteModel {
    n: usize,
}

/// Largest universe enumerated exhaustively; subsets are enumerated by bitmask.
pub const MAX_UNIVERSE: usize = 16;

impl FiniteModel {
    pub fn new(n: usize) -> Result<FiniteModel, OracleError> {
        if n < 2 {
            return Err(OracleError::Threshold { n, s: 0, need: 2 });
        }
        if n > MAX_UNIVERSE {
            return Err(OracleError::TooLarge(n));
        }
        Ok(FiniteModel { n })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    fn check_subset(&self, s: &[usize]) -> Result<(), OracleError> {
        match s.iter().find(|&&x| x >= self.n) {
            Some(&x) => Err(OracleError::NotInUniverse(x)),
            None => Ok(()),
        }
    }

    fn free(&self, s: &[usize]) -> Vec<usize> {
        (0..self.n).filter(|x| !s.contains(x)).collect()
    }

    /// Transpositions of atoms outside `s`: the generators of its pointwise stabilizer.
    pub fn generators(&self, s: &[usize]) -> Vec<(usize, usize)> {
        let free = self.free(s);
        let mut out = Vec::new();
        for (i, &a) in free.iter().enumerate() {
            for &b in &free[i + 1..] {
                out.push((a, b));
            }
        }
        out
    }

    /// Whether `s` supports `v` within the model.
    pub fn check_support(&self, v: &Value, s: &[usize]) -> bool {
        self.generators(s)
            .into_iter()
            .all(|(a, b)| v.swap(a, b) == *v)
    }

    fn atoms(&self) -> Vec<Value> {
        (0..self.n).map(Value::Atom).collect()
    }

    fn subsets(&self) -> Vec<Value> {
        (0u32..(1 << self.n))
            .map(|mask| Value::Set((0..self.n).filter(|i| mask & (1 << i) != 0).collect()))
            .collect()
    }

    fn tuples(&self, len: usize) -> Vec<Value> {
        let mut out = vec![Vec::new()];
        for _ in 0..len {
            out = out
                .into_iter()
                .flat_map(|t: Vec<usize>| {
                    (0..self.n).map(move |x| {
                        let mut t = t.clone();
                        t.push(x);
                        t
                    })
                })
                .collect();
        }
        out.into_iter().map(Value::Tuple).collect()
    }

    fn injective_tuples(&self) -> Vec<Value> {
        fn go(n: usize, prefix: &mut Vec<usize>, out: &mut Vec<Value>) {
            out.push(Value::Tuple(prefix.clone()));
            for x in 0..n {
                if !prefix.contains(&x) {
                    prefix.push(x);
                    go(n, prefix, out);
                    prefix.pop();
                }
            }
        }
        let mut out = Vec::new();
        go(self.n, &mut Vec::new(), &mut out);
        out
    }

    /// Codomain pool for a function kind, or the element pool for a plain kind.
    fn pool(&self, kind: Kind) -> Vec<Value> {
        match kind {
            Kind::Atoms | Kind::FunAA => self.atoms(),
            Kind::Subsets | Kind::FunASet => self.subsets(),
            Kind::InjTuples | Kind::FunATfin => self.injective_tuples(),
            Kind::FunATuple(n) => self.tuples(n),
        }
    }

    /// All elements of `kind` supported by `s` in the model, sorted.
    ///
    /// Function kinds are not found by scanning all `n^n` graphs. A candidate
    /// is fixed by its values on `s` and at one representative atom outside
    /// `s` (each value restricted to what the model says is supported by the
    /// relevant atoms), extended to the other atoms by the transposition that
    /// carries the representative there, and then kept only if the whole
    /// graph passes [`FiniteModel::check_support`].
    pub fn enumerate_supported(&self, kind: Kind, s: &[usize]) -> Result<Vec<Value>, OracleError> {
        self.check_subset(s)?;
        let s: Vec<usize> = s
            .iter()
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        // atoms only need a swap outside `s`; the other kinds need room for
        // the finite/cofinite distinction and for a representative
        let need = match kind {
            Kind::Atoms => s.len() + 2,
            _ => crate::counting::universe_threshold(kind, s.len()),
        };
        if self.n < need {
            return Err(OracleError::Threshold {
                n: self.n,
                s: s.len(),
                need,
            });
        }
        let mut out: Vec<Value> = if kind.is_function() {
            self.enumerate_functions(kind, &s)
        } else {
            self.pool(kind)
                .into_iter()
                .filter(|v| self.check_support(v, &s))
                .collect()
        };
        out.sort();
        out.dedup();
        Ok(out)
    }

    fn enumerate_functions(&self, kind: Kind, s: &[usize]) -> Vec<Value> {
        let pool = self.pool(kind);
        let rep = self.free(s)[0];
        let mut with_rep = s.to_vec();
        with_rep.push(rep);
        let on_support: Vec<Value> = pool
            .iter()
            .filter(|v| self.check_support(v, s))
            .cloned()
            .collect();
        let at_rep: Vec<Value> = pool
            .iter()
            .filter(|v| self.check_support(v, &with_rep))
            .cloned()
            .collect();

        let mut out = Vec::new();
        if on_support.is_empty() && !s.is_empty() {
            return out;
        }
        let mut choice = vec![0usize; s.len()];
        loop {
            for tail in &at_rep {
                let mut graph = vec![Value::Atom(0); self.n];
                for (i, &x) in s.iter().enumerate() {
                    graph[x] = on_support[choice[i]].clone();
                }
                for b in self.free(s) {
                    graph[b] = tail.swap(rep, b);
                }
                let f = Value::Fun(graph);
                if self.check_support(&f, s) {
                    out.push(f);
                }
            }
            // odometer over the values on `s`
            let mut i = 0;
            loop {
                if i == choice.len() {
                    return out;
                }
                choice[i] += 1;
                if choice[i] < on_support.len() {
                    break;
                }
                choice[i] = 0;
                i += 1;
            }
        }
    }

    /// Whether no strict total order on the universe is invariant under the
    /// stabilizer of `s`. Every order is tried.
    pub fn no_total_order_on_atoms(&self, s: &[usize]) -> Result<bool, OracleError> {
        self.check_subset(s)?;
        let free = self.free(s).len();
        if free < 2 {
            return Err(OracleError::TooFewFree(free));
        }
        if self.n > 8 {
            return Err(OracleError::TooLarge(self.n));
        }
        let gens = self.generators(s);
        let mut rank: Vec<usize> = (0..self.n).collect();
        let mut found = false;
        permutations(&mut rank, 0, &mut |rank| {
            let invariant = gens.iter().all(|&(a, b)| {
                let sw = |x: usize| {
                    if x == a {
                        b
                    } else if x == b {
                        a
                    } else {
                        x
                    }
                };
                (0..rank.len()).all(|x| {
                    (0..rank.len()).all(|y| (rank[x] < rank[y]) == (rank[sw(x)] < rank[sw(y)]))
                })
            });
            found |= invariant;
        });
        Ok(!found)
    }
}

fn permutations(v: &mut Vec<usize>, k: usize, visit: &mut dyn FnMut(&[usize])) {
    if k == v.len() {
        visit(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permutations(v, k + 1, visit);
        v.swap(k, i);
    }
}

/// A bijection between the model's atoms and symbolic atoms.
#[derive(Debug, Clone)]
pub struct Embedding {
    atoms: Vec<Atom>,
}

impl Embedding {
    /// Places the atoms of `support` first (in canonical order) and fills the
    /// rest of the universe with fresh atoms.
    pub fn new(model: &FiniteModel, support: &Atoms) -> Result<Embedding, OracleError> {
        if support.len() > model.size() {
            return Err(OracleError::Threshold {
                n: model.size(),
                s: support.len(),
                need: support.len(),
            });
        }
        let mut atoms: Vec<Atom> = support.iter().copied().collect();
        atoms.extend(crate::atoms::fresh_atoms(model.size() - support.len()));
        Ok(Embedding { atoms })
    }

    pub fn atom(&self, i: usize) -> Atom {
        self.atoms[i]
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn index(&self, a: Atom) -> Result<usize, OracleError> {
        self.atoms
            .iter()
            .position(|&x| x == a)
            .ok_or(OracleError::Unembeddable(a))
    }

    /// Model indices of a set of symbolic atoms.
    pub fn indices(&self, s: &Atoms) -> Result<Vec<usize>, OracleError> {
        s.iter().map(|&a| self.index(a)).collect()
    }

    pub fn embed_set(&self, x: &AtomSet) -> Result<Value, OracleError> {
        let mentioned: BTreeSet<usize> = x
            .mentioned()
            .iter()
            .map(|&a| self.index(a))
            .collect::<Result<_, _>>()?;
        Ok(Value::Set(match x {
            AtomSet::Finite(_) => mentioned,
            AtomSet::Cofinite(_) => (0..self.atoms.len())
                .filter(|i| !mentioned.contains(i))
                .collect(),
        }))
    }

    pub fn embed_tuple(&self, t: &[Atom]) -> Result<Value, OracleError> {
        Ok(Value::Tuple(
            t.iter().map(|&a| self.index(a)).collect::<Result<_, _>>()?,
        ))
    }

    pub fn embed_atom_fun(&self, f: &AtomFun) -> Result<Value, OracleError> {
        let graph = self
            .atoms
            .iter()
            .map(|&a| self.index(f.apply(a)).map(Value::Atom))
            .collect::<Result<_, _>>()?;
        Ok(Value::Fun(graph))
    }

    pub fn embed_set_fun(&self, f: &AtomSetFun) -> Result<Value, OracleError> {
        let graph = self
            .atoms
            .iter()
            .map(|&a| self.embed_set(&f.apply(a)))
            .collect::<Result<_, _>>()?;
        Ok(Value::Fun(graph))
    }

    pub fn embed_tuple_fun(&self, f: &TupleFun) -> Result<Value, OracleError> {
        let graph = self
            .atoms
            .iter()
            .map(|&a| self.embed_tuple(&f.apply(a)))
            .collect::<Result<_, _>>()?;
        Ok(Value::Fun(graph))
    }
}
