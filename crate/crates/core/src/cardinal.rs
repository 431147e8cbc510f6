//! Explicit injections and surjections between constructions, and
//! sample-based checks that they certify `|X| ≤ |Y|` or `|X| ≤* |Y|`.
//!
//! Maps act on [`Element`] descriptors. The two-element set `{0,1}` and the
//! naturals are both encoded with `Element::Nat`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::atoms::{fresh_atoms, sample_fix, Atom, Atoms, Perm};
use crate::element::Element;
use crate::fscore::Nominal;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CardError {
    #[error("value does not fit in 64 bits")]
    Overflow,
    #[error("the two fixed elements must differ")]
    SameElements,
    #[error("unknown witness `{0}`")]
    UnknownWitness(String),
    #[error("witness `{name}` is a {kind} and cannot certify {relation}")]
    WrongKind {
        name: String,
        kind: WitnessKind,
        relation: Relation,
    },
    #[error("composition of `{0}` and `{1}` is neither injective nor has a section")]
    NoGuarantee(String, String),
    #[error("witness `{name}` fails: {detail}")]
    Counterexample { name: String, detail: String },
}

pub fn nat_pair_inject(m: u64, n: u64) -> Result<u64, CardError> {
    let two = 2u64.checked_pow(u32::try_from(m).map_err(|_| CardError::Overflow)?);
    let three = 3u64.checked_pow(u32::try_from(n).map_err(|_| CardError::Overflow)?);
    two.zip(three)
        .and_then(|(x, y)| x.checked_mul(y))
        .ok_or(CardError::Overflow)
}

/// `(n, 0) ↦ 2^(n+1)` and `(n, 1) ↦ 3^(n+1)`. The exponent is shifted by one
/// because `2^0 = 3^0`.
pub fn nat_bool_inject(n: u64, b: bool) -> Result<u64, CardError> {
    let e = n
        .checked_add(1)
        .and_then(|e| u32::try_from(e).ok())
        .ok_or(CardError::Overflow)?;
    let base: u64 = if b { 3 } else { 2 };
    base.checked_pow(e).ok_or(CardError::Overflow)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessKind {
    Injection,
    Surjection,
    Bijection,
}

impl WitnessKind {
    pub fn injective(self) -> bool {
        matches!(self, WitnessKind::Injection | WitnessKind::Bijection)
    }

    pub fn surjective(self) -> bool {
        matches!(self, WitnessKind::Surjection | WitnessKind::Bijection)
    }
}

impl fmt::Display for WitnessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WitnessKind::Injection => "injection",
            WitnessKind::Surjection => "surjection",
            WitnessKind::Bijection => "bijection",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    /// An injection from X into Y.
    Leq,
    /// A surjection from Y onto X.
    LeqStar,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Leq => "<=",
            Relation::LeqStar => "<=*",
        })
    }
}

type MapFn = Arc<dyn Fn(&Element) -> Option<Element> + Send + Sync>;
type Sampler = Arc<dyn Fn(&mut ChaCha8Rng) -> Element + Send + Sync>;

/// A map between two constructions with a claimed support.
///
/// `map` returns `None` outside the domain. Injections are checked on inputs
/// drawn from `domain`. Surjections carry a `section` and are checked on
/// outputs drawn from `codomain`.
#[derive(Clone)]
pub struct CardWitness {
    pub name: String,
    pub kind: WitnessKind,
    pub declared_support: Atoms,
    map: MapFn,
    domain: Sampler,
    codomain: Sampler,
    section: Option<MapFn>,
}

impl fmt::Debug for CardWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CardWitness")
            .field("name", &self.name)
            .field("kind", &self.kind)
            .field("declared_support", &self.declared_support)
            .finish_non_exhaustive()
    }
}

impl CardWitness {
    pub fn apply(&self, x: &Element) -> Option<Element> {
        (self.map)(x)
    }

    pub fn section(&self, y: &Element) -> Option<Element> {
        self.section.as_ref().and_then(|s| s(y))
    }

    pub fn sample_domain(&self, rng: &mut ChaCha8Rng) -> Element {
        (self.domain)(rng)
    }

    pub fn sample_codomain(&self, rng: &mut ChaCha8Rng) -> Element {
        (self.codomain)(rng)
    }

    /// Replaces the section, turning the witness into a surjection (or a
    /// bijection when it was injective).
    pub fn with_section(
        mut self,
        section: impl Fn(&Element) -> Option<Element> + Send + Sync + 'static,
    ) -> CardWitness {
        self.section = Some(Arc::new(section));
        self.kind = if self.kind.injective() {
            WitnessKind::Bijection
        } else {
            WitnessKind::Surjection
        };
        self
    }
}

fn nat(e: &Element) -> Option<u64> {
    match e {
        Element::Nat(n) => Some(*n),
        _ => None,
    }
}

fn bit(e: &Element) -> Option<bool> {
    match e {
        Element::Nat(0) => Some(false),
        Element::Nat(1) => Some(true),
        _ => None,
    }
}

fn atom(e: &Element) -> Option<Atom> {
    match e {
        Element::Atom(a) => Some(*a),
        _ => None,
    }
}

fn pair(e: &Element) -> Option<(&Element, &Element)> {
    match e {
        Element::Pair(x, y) => Some((x, y)),
        _ => None,
    }
}

fn nat_sampler(max: u64) -> Sampler {
    Arc::new(move |rng| Element::Nat(rng.gen_range(0..=max)))
}

fn atom_sampler(pool: Vec<Atom>) -> Sampler {
    Arc::new(move |rng| Element::Atom(*pool.choose(rng).expect("pool is nonempty")))
}

fn pair_sampler(x: Sampler, y: Sampler) -> Sampler {
    Arc::new(move |rng| Element::pair(x(rng), y(rng)))
}

/// `ℕ × ℕ → ℕ`, `(m, n) ↦ 2^m 3^n`.
pub fn nat_pair_witness() -> CardWitness {
    CardWitness {
        name: "nat-pair".into(),
        kind: WitnessKind::Injection,
        declared_support: Atoms::new(),
        map: Arc::new(|e| {
            let (m, n) = pair(e)?;
            nat_pair_inject(nat(m)?, nat(n)?).ok().map(Element::Nat)
        }),
        domain: pair_sampler(nat_sampler(20), nat_sampler(20)),
        codomain: nat_sampler(1 << 20),
        section: None,
    }
}

/// `ℕ × {0,1} → ℕ` via [`nat_bool_inject`].
pub fn nat_bool_witness() -> CardWitness {
    CardWitness {
        name: "nat-bool".into(),
        kind: WitnessKind::Injection,
        declared_support: Atoms::new(),
        map: Arc::new(|e| {
            let (n, b) = pair(e)?;
            nat_bool_inject(nat(n)?, bit(b)?).ok().map(Element::Nat)
        }),
        domain: pair_sampler(nat_sampler(30), nat_sampler(1)),
        codomain: nat_sampler(1 << 20),
        section: None,
    }
}

/// `X × {0,1} → X × X`, `(x, 0) ↦ (x, x1)` and `(x, 1) ↦ (x, x2)`.
///
/// `sample_x` draws elements of `X` and `set_support` is the support of `X`.
pub fn double_inject(
    x1: Element,
    x2: Element,
    sample_x: impl Fn(&mut ChaCha8Rng) -> Element + Send + Sync + 'static,
    set_support: &Atoms,
) -> Result<CardWitness, CardError> {
    if x1 == x2 {
        return Err(CardError::SameElements);
    }
    let mut support = set_support.clone();
    support.extend(x1.support());
    support.extend(x2.support());
    let sample_x: Sampler = Arc::new(sample_x);
    let codomain = pair_sampler(sample_x.clone(), sample_x.clone());
    Ok(CardWitness {
        name: "double".into(),
        kind: WitnessKind::Injection,
        declared_support: support,
        map: Arc::new(move |e| {
            let (x, b) = pair(e)?;
            let tag = if bit(b)? { &x2 } else { &x1 };
            Some(Element::pair(x.clone(), tag.clone()))
        }),
        domain: pair_sampler(sample_x, nat_sampler(1)),
        codomain,
        section: None,
    })
}

/// [`double_inject`] on `X = A` with two fresh atoms, sampling from them and
/// 20 further atoms.
pub fn double_atoms_witness() -> CardWitness {
    let v = fresh_atoms(22);
    let (a, b) = (Element::Atom(v[0]), Element::Atom(v[1]));
    double_inject(
        a,
        b,
        move |rng| Element::Atom(*v.choose(rng).expect("nonempty")),
        &Atoms::new(),
    )
    .expect("fresh atoms differ")
}

/// `ℕ → ℕ × ℕ`, `n ↦ (n, 0)`.
pub fn inclusion_witness() -> CardWitness {
    CardWitness {
        name: "inclusion".into(),
        kind: WitnessKind::Injection,
        declared_support: Atoms::new(),
        map: Arc::new(|e| Some(Element::pair(Element::Nat(nat(e)?), Element::Nat(0)))),
        domain: nat_sampler(60),
        codomain: pair_sampler(nat_sampler(20), nat_sampler(20)),
        section: None,
    }
}

/// The identity on `A`.
pub fn identity_witness() -> CardWitness {
    let pool = fresh_atoms(20);
    CardWitness {
        name: "identity".into(),
        kind: WitnessKind::Bijection,
        declared_support: Atoms::new(),
        map: Arc::new(|e| atom(e).map(Element::Atom)),
        domain: atom_sampler(pool.clone()),
        codomain: atom_sampler(pool),
        section: Some(Arc::new(|e| atom(e).map(Element::Atom))),
    }
}

/// First projection `A × A → A`, with section `a ↦ (a, a)`.
pub fn projection_witness() -> CardWitness {
    let pool = fresh_atoms(20);
    let s = atom_sampler(pool);
    CardWitness {
        name: "projection".into(),
        kind: WitnessKind::Surjection,
        declared_support: Atoms::new(),
        map: Arc::new(|e| {
            let (x, y) = pair(e)?;
            atom(y)?;
            atom(x).map(Element::Atom)
        }),
        domain: pair_sampler(s.clone(), s.clone()),
        codomain: s,
        section: Some(Arc::new(|e| {
            let a = atom(e)?;
            Some(Element::pair(Element::Atom(a), Element::Atom(a)))
        })),
    }
}

pub const WITNESS_NAMES: [&str; 6] = [
    "nat-pair",
    "nat-bool",
    "double",
    "inclusion",
    "identity",
    "projection",
];

pub fn named_witness(name: &str) -> Result<CardWitness, CardError> {
    Ok(match name {
        "nat-pair" => nat_pair_witness(),
        "nat-bool" => nat_bool_witness(),
        "double" => double_atoms_witness(),
        "inclusion" => inclusion_witness(),
        "identity" => identity_witness(),
        "projection" => projection_witness(),
        other => return Err(CardError::UnknownWitness(other.to_string())),
    })
}

/// `then ∘ first`. Injective when both are. Gets a section when both have
/// one, or when `section` is given.
pub fn compose_witnesses(
    first: &CardWitness,
    then: &CardWitness,
    section: Option<MapFn>,
) -> Result<CardWitness, CardError> {
    let injective = first.kind.injective() && then.kind.injective();
    let section: Option<MapFn> = section.or_else(|| match (&first.section, &then.section) {
        (Some(s1), Some(s2)) => {
            let (s1, s2) = (s1.clone(), s2.clone());
            Some(Arc::new(move |z: &Element| s1(&s2(z)?)))
        }
        _ => None,
    });
    let kind = match (injective, section.is_some()) {
        (true, true) => WitnessKind::Bijection,
        (true, false) => WitnessKind::Injection,
        (false, true) => WitnessKind::Surjection,
        (false, false) => {
            return Err(CardError::NoGuarantee(
                first.name.clone(),
                then.name.clone(),
            ))
        }
    };
    let (f, g) = (first.map.clone(), then.map.clone());
    Ok(CardWitness {
        name: format!("{}*{}", then.name, first.name),
        kind,
        declared_support: first
            .declared_support
            .union(&then.declared_support)
            .copied()
            .collect(),
        map: Arc::new(move |x| g(&f(x)?)),
        domain: first.domain.clone(),
        codomain: then.codomain.clone(),
        section,
    })
}

/// A section given as a plain closure, for [`compose_witnesses`].
pub fn section_fn(f: impl Fn(&Element) -> Option<Element> + Send + Sync + 'static) -> MapFn {
    Arc::new(f)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationReport {
    pub relation: Relation,
    pub witness: String,
    pub samples: usize,
    pub equivariance_perms: usize,
}

pub const EQUIVARIANCE_PERMS: usize = 50;

/// Checks that `w` certifies `relation` on `samples` sampled inputs (for
/// `Leq`) or outputs (for `LeqStar`), and that it commutes with
/// [`EQUIVARIANCE_PERMS`] permutations fixing its declared support.
pub fn relation_check(
    relation: Relation,
    w: &CardWitness,
    samples: usize,
    seed: u64,
) -> Result<RelationReport, CardError> {
    let fail = |detail: String| CardError::Counterexample {
        name: w.name.clone(),
        detail,
    };
    let ok_kind = match relation {
        Relation::Leq => w.kind.injective(),
        Relation::LeqStar => w.kind.surjective(),
    };
    if !ok_kind {
        return Err(CardError::WrongKind {
            name: w.name.clone(),
            kind: w.kind,
            relation,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inputs = Vec::with_capacity(samples);
    match relation {
        Relation::Leq => {
            let mut seen: BTreeMap<Element, Element> = BTreeMap::new();
            for _ in 0..samples {
                let x = w.sample_domain(&mut rng);
                let y = w
                    .apply(&x)
                    .ok_or_else(|| fail(format!("undefined at {x}")))?;
                if let Some(prev) = seen.get(&y) {
                    if *prev != x {
                        return Err(fail(format!("{prev} and {x} both map to {y}")));
                    }
                }
                seen.insert(y, x.clone());
                inputs.push(x);
            }
        }
        Relation::LeqStar => {
            for _ in 0..samples {
                let y = w.sample_codomain(&mut rng);
                let x = w
                    .section(&y)
                    .ok_or_else(|| fail(format!("no preimage offered for {y}")))?;
                let back = w
                    .apply(&x)
                    .ok_or_else(|| fail(format!("undefined at {x}")))?;
                if back != y {
                    return Err(fail(format!("offered preimage {x} of {y} maps to {back}")));
                }
                inputs.push(x);
            }
        }
    }
    let perms = check_equivariance(w, &inputs, EQUIVARIANCE_PERMS, seed)?;
    Ok(RelationReport {
        relation,
        witness: w.name.clone(),
        samples,
        equivariance_perms: perms,
    })
}

/// `f(p·x) = p·f(x)` for `perms` sampled `p` fixing the declared support, on
/// every input in `inputs`. Returns the number of permutations used.
pub fn check_equivariance(
    w: &CardWitness,
    inputs: &[Element],
    perms: usize,
    seed: u64,
) -> Result<usize, CardError> {
    let mut pool = w.declared_support.clone();
    for x in inputs {
        pool.extend(x.support());
        if let Some(y) = w.apply(x) {
            pool.extend(y.support());
        }
    }
    pool.extend(fresh_atoms(2));
    let sample = sample_fix(&w.declared_support, &pool, perms, seed);
    for p in &sample {
        for x in inputs {
            let (Some(lhs), Some(rhs)) = (w.apply(&x.act(p)), w.apply(x).map(|y| y.act(p))) else {
                return Err(CardError::Counterexample {
                    name: w.name.clone(),
                    detail: format!("domain is not closed under {p} at {x}"),
                });
            };
            if lhs != rhs {
                return Err(CardError::Counterexample {
                    name: w.name.clone(),
                    detail: format!("f({p}·{x}) = {lhs} but {p}·f({x}) = {rhs}"),
                });
            }
        }
    }
    Ok(sample.len())
}

/// Two values forced on one input of any map supported away from the moved
/// atoms of `perms`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clash {
    pub input: Element,
    pub first: (Perm, Element),
    pub second: (Perm, Element),
}

/// If `f(x) = y` and every `p` in `perms` fixes `supp(f)`, then
/// `f(p·x) = p·y`. Returns two permutations forcing different values at the
/// same input, which shows no such `f` exists.
pub fn equivariance_clash(x: &Element, y: &Element, perms: &[Perm]) -> Option<Clash> {
    let mut forced: BTreeMap<Element, (Perm, Element)> = BTreeMap::new();
    for p in perms {
        let input = x.act(p);
        let value = y.act(p);
        match forced.get(&input) {
            Some((q, v)) if *v != value => {
                return Some(Clash {
                    input,
                    first: (q.clone(), v.clone()),
                    second: (p.clone(), value),
                })
            }
            Some(_) => {}
            None => {
                forced.insert(input, (p.clone(), value));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn nat_pair_values() {
        assert_eq!(nat_pair_inject(0, 0), Ok(1));
        assert_eq!(nat_pair_inject(1, 2), Ok(18));
        assert_eq!(nat_pair_inject(2, 1), Ok(12));
        assert_eq!(nat_pair_inject(64, 0), Err(CardError::Overflow));
        assert_eq!(nat_pair_inject(0, 41), Err(CardError::Overflow));
        assert_eq!(nat_pair_inject(u64::MAX, 0), Err(CardError::Overflow));
    }

    #[test]
    fn nat_pair_grid_is_injective() {
        let values: BTreeSet<u64> = (0..=10)
            .flat_map(|m| (0..=10).map(move |n| nat_pair_inject(m, n).unwrap()))
            .collect();
        assert_eq!(values.len(), 121);
    }

    #[test]
    fn nat_bool_is_injective_after_offset() {
        assert_ne!(nat_bool_inject(0, false), nat_bool_inject(0, true));
        assert_eq!(nat_bool_inject(3, false), Ok(16));
        let values: BTreeSet<u64> = (0..=10)
            .flat_map(|n| [false, true].map(|b| nat_bool_inject(n, b).unwrap()))
            .collect();
        assert_eq!(values.len(), 22);
    }

    #[test]
    fn double_on_atoms() {
        let v = fresh_atoms(22);
        let (a, b) = (Element::Atom(v[0]), Element::Atom(v[1]));
        assert_eq!(
            double_inject(a.clone(), a.clone(), |_| Element::Nat(0), &Atoms::new()).unwrap_err(),
            CardError::SameElements
        );
        let pool = v.clone();
        let w = double_inject(
            a.clone(),
            b.clone(),
            move |rng| Element::Atom(*pool.choose(rng).unwrap()),
            &Atoms::new(),
        )
        .unwrap();
        assert_eq!(w.declared_support, Atoms::from([v[0], v[1]]));
        let c = Element::Atom(v[2]);
        assert_eq!(
            w.apply(&Element::pair(c.clone(), Element::Nat(0))),
            Some(Element::pair(c.clone(), a.clone()))
        );
        assert_eq!(
            w.apply(&Element::pair(c.clone(), Element::Nat(1))),
            Some(Element::pair(c, b.clone()))
        );
        assert_ne!(
            w.apply(&Element::pair(a.clone(), Element::Nat(0))),
            w.apply(&Element::pair(a.clone(), Element::Nat(1)))
        );
        let images: BTreeSet<Element> = v[2..]
            .iter()
            .flat_map(|&x| {
                [0, 1].map(|i| {
                    w.apply(&Element::pair(Element::Atom(x), Element::Nat(i)))
                        .unwrap()
                })
            })
            .collect();
        assert_eq!(images.len(), 40);
        relation_check(Relation::Leq, &w, 100, 3).unwrap();
    }

    #[test]
    fn named_witnesses_certify_their_relations() {
        for name in WITNESS_NAMES {
            let w = named_witness(name).unwrap();
            if w.kind.injective() {
                let r = relation_check(Relation::Leq, &w, 100, 7).unwrap();
                assert_eq!(r.equivariance_perms, EQUIVARIANCE_PERMS);
            }
            if w.kind.surjective() {
                relation_check(Relation::LeqStar, &w, 100, 7).unwrap();
            }
        }
        assert!(matches!(
            named_witness("nope"),
            Err(CardError::UnknownWitness(_))
        ));
    }

    #[test]
    fn transitivity_by_composition() {
        let w = compose_witnesses(&inclusion_witness(), &nat_pair_witness(), None).unwrap();
        assert_eq!(w.kind, WitnessKind::Injection);
        assert_eq!(w.apply(&Element::Nat(3)), Some(Element::Nat(8)));
        relation_check(Relation::Leq, &w, 200, 1).unwrap();

        let double = double_atoms_witness();
        assert!(matches!(
            compose_witnesses(&double, &projection_witness(), None),
            Err(CardError::NoGuarantee(..))
        ));
        let onto = compose_witnesses(
            &double,
            &projection_witness(),
            Some(section_fn(|x| {
                Some(Element::pair(x.clone(), Element::Nat(0)))
            })),
        )
        .unwrap();
        assert_eq!(onto.kind, WitnessKind::Surjection);
        relation_check(Relation::LeqStar, &onto, 100, 2).unwrap();
    }

    #[test]
    fn wrong_witnesses_are_caught() {
        let w = identity_witness();
        let bad = CardWitness {
            name: "collapse".into(),
            kind: WitnessKind::Injection,
            map: Arc::new(|e| Some(Element::Nat(u64::from(matches!(e, Element::Nat(_)))))),
            ..w.clone()
        };
        assert!(matches!(
            relation_check(Relation::Leq, &bad, 50, 1),
            Err(CardError::Counterexample { .. })
        ));

        let a = Atom::fresh();
        let skewed = CardWitness {
            name: "skewed".into(),
            map: Arc::new(move |e| {
                atom(e)?;
                Some(Element::Atom(a))
            }),
            ..w.clone()
        };
        assert!(check_equivariance(&skewed, &[Element::Atom(Atom::fresh())], 20, 1).is_err());

        assert!(matches!(
            relation_check(Relation::LeqStar, &nat_pair_witness(), 10, 1),
            Err(CardError::WrongKind { .. })
        ));
    }

    #[test]
    fn pair_swap_clash() {
        // a map N x A -> A x A supported away from a, b, c with f(i, a) = (a, b)
        // is forced to send (i, b) to both (b, a) and (b, c)
        let v = fresh_atoms(3);
        let (a, b, c) = (v[0], v[1], v[2]);
        let x = Element::pair(Element::Nat(0), Element::Atom(a));
        let y = Element::pair(Element::Atom(a), Element::Atom(b));
        let ab = Perm::transpose(a, b);
        let via_c = Perm::transpose(b, c).compose(&Perm::transpose(a, c));
        let clash = equivariance_clash(&x, &y, &[ab.clone(), via_c.clone()]).unwrap();
        assert_eq!(
            clash.input,
            Element::pair(Element::Nat(0), Element::Atom(b))
        );
        assert_eq!(
            clash.first,
            (ab, Element::pair(Element::Atom(b), Element::Atom(a)))
        );
        assert_eq!(
            clash.second,
            (via_c, Element::pair(Element::Atom(b), Element::Atom(c)))
        );

        // no clash from a single transposition
        assert!(equivariance_clash(&x, &y, &[Perm::transpose(a, b)]).is_none());
    }
}
