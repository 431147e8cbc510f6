//! Exact counts of the elements supported by a set of `s` atoms, for each
//! construction with a finite-slice rule, and the harness that checks them
//! against the symbolic enumerations and the brute-force oracle.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::atoms::{Atom, Atoms};
use crate::fscore::{injective_tuples_over, sets_supported_by, AtomSet};
use crate::fsfun::{
    enumerate_atom_funs, enumerate_injective_tuple_funs, enumerate_set_funs, enumerate_tuple_funs,
    AtomFun, AtomSetFun, TupleFun,
};
use crate::oracle::{Embedding, FiniteModel, OracleError, Value};
use crate::text::{AtomNames, Render};

/// A construction whose `S`-supported slice is finite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kind {
    Atoms,
    Subsets,
    InjTuples,
    FunAA,
    FunASet,
    FunATuple(usize),
    FunATfin,
}

impl Kind {
    pub fn is_function(self) -> bool {
        matches!(
            self,
            Kind::FunAA | Kind::FunASet | Kind::FunATuple(_) | Kind::FunATfin
        )
    }

    pub fn name(self) -> String {
        match self {
            Kind::Atoms => "atoms".into(),
            Kind::Subsets => "subsets".into(),
            Kind::InjTuples => "inj-tuples".into(),
            Kind::FunAA => "funAA".into(),
            Kind::FunASet => "funASet".into(),
            Kind::FunATuple(n) => format!("funATuple{n}"),
            Kind::FunATfin => "funATfin".into(),
        }
    }

    /// The kinds exercised by default, with tuple arities 1 and 2.
    pub fn standard() -> Vec<Kind> {
        vec![
            Kind::Atoms,
            Kind::Subsets,
            Kind::InjTuples,
            Kind::FunAA,
            Kind::FunASet,
            Kind::FunATuple(1),
            Kind::FunATuple(2),
            Kind::FunATfin,
        ]
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Kind {
    type Err = CountError;

    fn from_str(s: &str) -> Result<Kind, CountError> {
        Ok(match s {
            "atoms" => Kind::Atoms,
            "subsets" => Kind::Subsets,
            "inj-tuples" => Kind::InjTuples,
            "funAA" => Kind::FunAA,
            "funASet" => Kind::FunASet,
            "funATfin" => Kind::FunATfin,
            _ => match s.strip_prefix("funATuple").map(str::parse::<usize>) {
                Some(Ok(n)) if n >= 1 => Kind::FunATuple(n),
                _ => return Err(CountError::UnknownKind(s.to_string())),
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CountError {
    #[error("unknown kind `{0}` (expected atoms, subsets, inj-tuples, funAA, funASet, funATuple<n>, funATfin)")]
    UnknownKind(String),
    #[error("tuple arity must be at least 1")]
    Arity,
    #[error("count overflows 128 bits")]
    Overflow,
    #[error("universe of {n} atoms is below the threshold {need} for a support of size {s}")]
    Threshold { n: usize, s: usize, need: usize },
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Where an exact count comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    /// A published upper bound; exactness is confirmed by the oracle.
    StatedBound,
    /// Derived from the table-plus-tail classification and confirmed by the oracle.
    Derived,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountFormula {
    pub kind: Kind,
    pub formula: &'static str,
    pub provenance: Provenance,
}

pub fn formula(kind: Kind) -> CountFormula {
    let (formula, provenance) = match kind {
        Kind::Atoms => ("s", Provenance::StatedBound),
        Kind::Subsets => ("2^(s+1)", Provenance::StatedBound),
        Kind::InjTuples => ("T(s) = sum_{k=0..s} s!/(s-k)!", Provenance::StatedBound),
        Kind::FunAA => ("s^s * (s+1)", Provenance::Derived),
        Kind::FunASet => ("(2^(s+1))^s * 2^(s+2)", Provenance::Derived),
        Kind::FunATuple(_) => ("s^(n*s) * (s+1)^n", Provenance::Derived),
        Kind::FunATfin => ("T(s)^s * T(s+1)", Provenance::Derived),
    };
    CountFormula {
        kind,
        formula,
        provenance,
    }
}

fn pow(base: u128, exp: usize) -> Result<u128, CountError> {
    let exp = u32::try_from(exp).map_err(|_| CountError::Overflow)?;
    base.checked_pow(exp).ok_or(CountError::Overflow)
}

fn mul(a: u128, b: u128) -> Result<u128, CountError> {
    a.checked_mul(b).ok_or(CountError::Overflow)
}

/// Number of injective tuples over `s` atoms, the empty tuple included.
fn injective_tuple_count(s: usize) -> Result<u128, CountError> {
    let mut total = 1u128;
    let mut falling = 1u128;
    for k in 0..s {
        falling = mul(falling, (s - k) as u128)?;
        total = total.checked_add(falling).ok_or(CountError::Overflow)?;
    }
    Ok(total)
}

/// Number of elements of `kind` supported by a fixed set of `s` atoms.
pub fn count_supported(kind: Kind, s: usize) -> Result<u128, CountError> {
    let su = s as u128;
    match kind {
        Kind::Atoms => Ok(su),
        Kind::Subsets => pow(2, s + 1),
        Kind::InjTuples => injective_tuple_count(s),
        // 0^0 = 1 covers the empty support
        Kind::FunAA => mul(pow(su, s)?, su + 1),
        Kind::FunASet => mul(pow(pow(2, s + 1)?, s)?, pow(2, s + 2)?),
        Kind::FunATuple(0) => Err(CountError::Arity),
        Kind::FunATuple(n) => mul(
            pow(su, n.checked_mul(s).ok_or(CountError::Overflow)?)?,
            pow(su + 1, n)?,
        ),
        Kind::FunATfin => mul(
            pow(injective_tuple_count(s)?, s)?,
            injective_tuple_count(s + 1)?,
        ),
    }
}

/// A symbolic element from one of the enumerations.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Supported {
    Atom(Atom),
    Set(AtomSet),
    Tuple(Vec<Atom>),
    AtomFun(AtomFun),
    SetFun(AtomSetFun),
    TupleFun(TupleFun),
}

impl Supported {
    pub fn embed(&self, emb: &Embedding) -> Result<Value, OracleError> {
        match self {
            Supported::Atom(a) => Ok(Value::Atom(emb.index(*a)?)),
            Supported::Set(x) => emb.embed_set(x),
            Supported::Tuple(t) => emb.embed_tuple(t),
            Supported::AtomFun(f) => emb.embed_atom_fun(f),
            Supported::SetFun(f) => emb.embed_set_fun(f),
            Supported::TupleFun(f) => emb.embed_tuple_fun(f),
        }
    }
}

impl Render for Supported {
    fn render(&self, names: &AtomNames) -> String {
        match self {
            Supported::Atom(a) => names.name(*a),
            Supported::Set(x) => x.render(names),
            Supported::Tuple(t) => {
                let inner: Vec<String> = t.iter().map(|&a| names.name(a)).collect();
                format!("({})", inner.join(","))
            }
            Supported::AtomFun(f) => f.render(names),
            Supported::SetFun(f) => f.render(names),
            Supported::TupleFun(f) => f.render(names),
        }
    }
}

/// The symbolic enumeration of `kind` elements supported by `s`.
pub fn enumerate_symbolic(kind: Kind, s: &Atoms) -> Result<Vec<Supported>, CountError> {
    Ok(match kind {
        Kind::Atoms => s.iter().map(|&a| Supported::Atom(a)).collect(),
        Kind::Subsets => sets_supported_by(s)
            .into_iter()
            .map(Supported::Set)
            .collect(),
        Kind::InjTuples => injective_tuples_over(s)
            .into_iter()
            .map(Supported::Tuple)
            .collect(),
        Kind::FunAA => enumerate_atom_funs(s)
            .into_iter()
            .map(Supported::AtomFun)
            .collect(),
        Kind::FunASet => enumerate_set_funs(s)
            .into_iter()
            .map(Supported::SetFun)
            .collect(),
        Kind::FunATuple(0) => return Err(CountError::Arity),
        Kind::FunATuple(n) => enumerate_tuple_funs(s, n)
            .into_iter()
            .map(Supported::TupleFun)
            .collect(),
        Kind::FunATfin => enumerate_injective_tuple_funs(s)
            .into_iter()
            .map(Supported::TupleFun)
            .collect(),
    })
}

/// Result of comparing formula, symbolic enumeration and oracle enumeration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossCheckReport {
    pub kind: String,
    pub support_size: usize,
    pub universe: usize,
    pub formula: u128,
    pub symbolic: usize,
    pub oracle: usize,
    /// Whether the embedded symbolic elements are exactly the oracle's elements.
    pub bijection: bool,
    pub mismatches: Vec<String>,
}

impl CrossCheckReport {
    pub fn ok(&self) -> bool {
        self.formula == self.symbolic as u128 && self.symbolic == self.oracle && self.bijection
    }
}

/// Minimum universe size for comparisons with a support of size `s`.
///
/// Function kinds also need three free atoms: with only two, "send x to the
/// other free atom" is invariant in the model but has no symbolic counterpart.
pub fn universe_threshold(kind: Kind, s: usize) -> usize {
    if kind.is_function() {
        (2 * s + 2).max(s + 3)
    } else {
        2 * s + 2
    }
}

/// Compares the three sources for `kind` and the explicit support `s` inside
/// a model of `n` atoms.
pub fn cross_check(kind: Kind, s: &Atoms, n: usize) -> Result<CrossCheckReport, CountError> {
    let need = universe_threshold(kind, s.len());
    if n < need {
        return Err(CountError::Threshold {
            n,
            s: s.len(),
            need,
        });
    }
    let model = FiniteModel::new(n)?;
    let emb = Embedding::new(&model, s)?;
    let formula = count_supported(kind, s.len())?;
    let symbolic = enumerate_symbolic(kind, s)?;
    let oracle = model.enumerate_supported(kind, &emb.indices(s)?)?;

    let embedded: Vec<Value> = symbolic
        .iter()
        .map(|x| x.embed(&emb))
        .collect::<Result<_, _>>()?;
    let embedded_set: BTreeSet<&Value> = embedded.iter().collect();
    let oracle_set: BTreeSet<&Value> = oracle.iter().collect();
    let mut mismatches = Vec::new();
    if embedded_set.len() != embedded.len() {
        mismatches.push(format!(
            "embedding is not injective: {} symbolic elements map to {} model elements",
            embedded.len(),
            embedded_set.len()
        ));
    }
    for v in embedded_set.difference(&oracle_set).take(10) {
        mismatches.push(format!("symbolic only: {v:?}"));
    }
    for v in oracle_set.difference(&embedded_set).take(10) {
        mismatches.push(format!("oracle only: {v:?}"));
    }
    let bijection = embedded_set == oracle_set && embedded_set.len() == embedded.len();
    if formula != symbolic.len() as u128 {
        mismatches.push(format!("formula {formula} != symbolic {}", symbolic.len()));
    }
    Ok(CrossCheckReport {
        kind: kind.name(),
        support_size: s.len(),
        universe: n,
        formula,
        symbolic: symbolic.len(),
        oracle: oracle.len(),
        bijection,
        mismatches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atoms::fresh_atoms;

    fn support(n: usize) -> Atoms {
        fresh_atoms(n).into_iter().collect()
    }

    #[test]
    fn stated_values() {
        assert_eq!(count_supported(Kind::Atoms, 3), Ok(3));
        assert_eq!(count_supported(Kind::Subsets, 2), Ok(8));
        assert_eq!(count_supported(Kind::InjTuples, 2), Ok(5));
        assert_eq!(count_supported(Kind::FunAA, 0), Ok(1));
        assert_eq!(count_supported(Kind::FunAA, 3), Ok(108));
        assert_eq!(count_supported(Kind::FunASet, 0), Ok(4));
        assert_eq!(count_supported(Kind::FunASet, 1), Ok(32));
        assert_eq!(count_supported(Kind::FunATuple(2), 0), Ok(1));
        assert_eq!(count_supported(Kind::FunATuple(2), 1), Ok(4));
        assert_eq!(count_supported(Kind::FunATfin, 0), Ok(2));
    }

    #[test]
    fn overflow_and_unknown() {
        assert_eq!(
            count_supported(Kind::FunASet, 40),
            Err(CountError::Overflow)
        );
        assert!(matches!(
            "nope".parse::<Kind>(),
            Err(CountError::UnknownKind(_))
        ));
        assert!("funATuple0".parse::<Kind>().is_err());
        assert_eq!("funATuple3".parse::<Kind>(), Ok(Kind::FunATuple(3)));
        for k in Kind::standard() {
            assert_eq!(k.name().parse::<Kind>(), Ok(k));
        }
    }

    #[test]
    fn monotone_in_support_size() {
        for kind in Kind::standard() {
            let counts: Vec<u128> = (0..6).map(|s| count_supported(kind, s).unwrap()).collect();
            assert!(
                counts.windows(2).all(|w| w[0] <= w[1]),
                "{kind}: {counts:?}"
            );
        }
    }

    #[test]
    fn within_stated_bounds() {
        for s in 0..8 {
            assert!(count_supported(Kind::Subsets, s).unwrap() <= 1 << (s + 1));
            assert!(count_supported(Kind::Atoms, s).unwrap() <= s as u128);
        }
    }

    #[test]
    fn cross_check_examples() {
        let r = cross_check(Kind::Subsets, &support(2), 6).unwrap();
        assert_eq!((r.formula, r.symbolic, r.oracle), (8, 8, 8));
        assert!(r.ok(), "{r:?}");
        let r = cross_check(Kind::FunAA, &support(1), 5).unwrap();
        assert_eq!((r.formula, r.symbolic, r.oracle), (2, 2, 2));
        assert!(r.ok());
        let r = cross_check(Kind::InjTuples, &Atoms::new(), 4).unwrap();
        assert_eq!((r.formula, r.symbolic, r.oracle), (1, 1, 1));
        assert!(matches!(
            cross_check(Kind::Subsets, &support(2), 5),
            Err(CountError::Threshold { .. })
        ));
    }

    #[test]
    fn two_atom_model_has_a_spurious_swap() {
        assert_eq!(universe_threshold(Kind::FunAA, 0), 3);
        assert_eq!(universe_threshold(Kind::Subsets, 0), 2);
        assert!(matches!(
            cross_check(Kind::FunAA, &Atoms::new(), 2),
            Err(CountError::Threshold { need: 3, .. })
        ));
        let r = cross_check(Kind::FunAA, &Atoms::new(), 3).unwrap();
        assert!(r.ok(), "{r:?}");
    }

    #[test]
    fn counts_stabilize_above_threshold() {
        for kind in [Kind::Subsets, Kind::FunAA, Kind::FunASet, Kind::FunATfin] {
            let s = support(1);
            for n in 4..=6 {
                let r = cross_check(kind, &s, n).unwrap();
                assert!(r.ok(), "{kind} n={n}: {r:?}");
            }
        }
    }
}
