//! Monotone self-maps on finite sets of atoms and their fixed points.
//!
//! Maps are built from a small set of constructors, each monotone for
//! inclusion, so their support can be computed from the syntax. Iteration from
//! any start then stays inside a finite set of atoms fixed in advance, which
//! bounds the number of steps.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::atoms::{fresh_atoms, sample_fix, Atom, Atoms, Perm};
use crate::fscore::{parse_finite_atoms, render_atoms, Nominal};
use crate::fsfun::{make_atom_fun, parse_atom_fun, AtomFun, AtomTail};
use crate::text::{AtomNames, Cursor, ParseError, Render};

#[derive(Clone, PartialEq, Eq)]
pub enum MonotoneMap {
    Identity,
    /// `Z ↦ Z ∪ C`
    ConstUnion(Atoms),
    /// `Z ↦ Z ∪ g[Z]`
    ImageUnion(AtomFun),
    /// `Z ↦ p·Z`
    PermImage(Perm),
    /// `Z ↦ f(Z) ∪ g(Z)`
    UnionOf(Box<MonotoneMap>, Box<MonotoneMap>),
    /// `Z ↦ then(first(Z))`
    ComposeOf {
        first: Box<MonotoneMap>,
        then: Box<MonotoneMap>,
    },
}

impl MonotoneMap {
    pub fn union(f: MonotoneMap, g: MonotoneMap) -> MonotoneMap {
        MonotoneMap::UnionOf(Box::new(f), Box::new(g))
    }

    pub fn compose(first: MonotoneMap, then: MonotoneMap) -> MonotoneMap {
        MonotoneMap::ComposeOf {
            first: Box::new(first),
            then: Box::new(then),
        }
    }

    pub fn apply(&self, z: &Atoms) -> Atoms {
        match self {
            MonotoneMap::Identity => z.clone(),
            MonotoneMap::ConstUnion(c) => z.union(c).copied().collect(),
            MonotoneMap::ImageUnion(g) => z.iter().flat_map(|&a| [a, g.apply(a)]).collect(),
            MonotoneMap::PermImage(p) => p.image(z),
            MonotoneMap::UnionOf(f, g) => f.apply(z).union(&g.apply(z)).copied().collect(),
            MonotoneMap::ComposeOf { first, then } => then.apply(&first.apply(z)),
        }
    }

    /// Holds when `Z ⊆ f(Z)` follows from the constructors alone.
    pub fn is_progressive(&self) -> bool {
        match self {
            MonotoneMap::Identity | MonotoneMap::ConstUnion(_) | MonotoneMap::ImageUnion(_) => true,
            MonotoneMap::PermImage(p) => p.is_identity(),
            MonotoneMap::UnionOf(f, g) => f.is_progressive() || g.is_progressive(),
            MonotoneMap::ComposeOf { first, then } => {
                first.is_progressive() && then.is_progressive()
            }
        }
    }

    /// `Z ↦ p·f(p⁻¹·Z)`, pushed through the syntax.
    pub fn conjugate(&self, p: &Perm) -> MonotoneMap {
        match self {
            MonotoneMap::Identity => MonotoneMap::Identity,
            MonotoneMap::ConstUnion(c) => MonotoneMap::ConstUnion(p.image(c)),
            MonotoneMap::ImageUnion(g) => MonotoneMap::ImageUnion(g.conjugate(p)),
            MonotoneMap::PermImage(q) => MonotoneMap::PermImage(p.compose(q).compose(&p.inverse())),
            MonotoneMap::UnionOf(f, g) => MonotoneMap::union(f.conjugate(p), g.conjugate(p)),
            MonotoneMap::ComposeOf { first, then } => {
                MonotoneMap::compose(first.conjugate(p), then.conjugate(p))
            }
        }
    }

    pub fn parse(text: &str, names: &mut AtomNames) -> Result<MonotoneMap, ParseError> {
        let mut cur = Cursor::new(text);
        let m = parse_chain(&mut cur, names)?;
        cur.finish()?;
        Ok(m)
    }
}

pub fn support_of_map(m: &MonotoneMap) -> Atoms {
    match m {
        MonotoneMap::Identity => Atoms::new(),
        MonotoneMap::ConstUnion(c) => c.clone(),
        MonotoneMap::ImageUnion(g) => g.support(),
        MonotoneMap::PermImage(p) => p.moved(),
        MonotoneMap::UnionOf(f, g) | MonotoneMap::ComposeOf { first: f, then: g } => {
            support_of_map(f)
                .union(&support_of_map(g))
                .copied()
                .collect()
        }
    }
}

impl Nominal for MonotoneMap {
    fn act(&self, p: &Perm) -> Self {
        self.conjugate(p)
    }

    fn support(&self) -> Atoms {
        support_of_map(self)
    }
}

fn parse_chain(cur: &mut Cursor<'_>, names: &mut AtomNames) -> Result<MonotoneMap, ParseError> {
    let mut m = parse_term(cur, names)?;
    loop {
        if cur.eat("|") {
            m = MonotoneMap::union(m, parse_term(cur, names)?);
        } else if cur.eat(";") {
            m = MonotoneMap::compose(m, parse_term(cur, names)?);
        } else {
            return Ok(m);
        }
    }
}

fn parse_term(cur: &mut Cursor<'_>, names: &mut AtomNames) -> Result<MonotoneMap, ParseError> {
    if cur.eat("(") {
        let m = parse_chain(cur, names)?;
        cur.expect(")")?;
        return Ok(m);
    }
    cur.skip_ws();
    let at = cur.pos();
    match cur.ident()? {
        "id" => Ok(MonotoneMap::Identity),
        "cup" => Ok(MonotoneMap::ConstUnion(parse_finite_atoms(cur, names)?)),
        "img" => {
            cur.expect("(")?;
            let g = parse_atom_fun(cur, names)?;
            cur.expect(")")?;
            Ok(MonotoneMap::ImageUnion(g))
        }
        "perm" => {
            cur.expect("(")?;
            let p = crate::atoms::parse_cycles(cur, names)?;
            cur.expect(")")?;
            Ok(MonotoneMap::PermImage(p))
        }
        other => Err(ParseError::new(
            at,
            format!("unknown map constructor `{other}`"),
        )),
    }
}

impl Render for MonotoneMap {
    fn render(&self, names: &AtomNames) -> String {
        match self {
            MonotoneMap::Identity => "id".to_string(),
            MonotoneMap::ConstUnion(c) => format!("cup{}", render_atoms(c, names)),
            MonotoneMap::ImageUnion(g) => format!("img({})", g.render(names)),
            MonotoneMap::PermImage(p) => format!("perm({})", p.render(names)),
            MonotoneMap::UnionOf(f, g) => format!("({} | {})", f.render(names), g.render(names)),
            MonotoneMap::ComposeOf { first, then } => {
                format!("({} ; {})", first.render(names), then.render(names))
            }
        }
    }
}

impl fmt::Display for MonotoneMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&AtomNames::default()))
    }
}

impl fmt::Debug for MonotoneMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A self-map on finite sets of atoms with a claimed finite support.
pub trait FinMap {
    fn eval(&self, z: &Atoms) -> Atoms;
    fn declared_support(&self) -> Atoms;
}

impl FinMap for MonotoneMap {
    fn eval(&self, z: &Atoms) -> Atoms {
        self.apply(z)
    }

    fn declared_support(&self) -> Atoms {
        support_of_map(self)
    }
}

/// A user-supplied map. It can only be built through a conjugation
/// spot-check of its declared support.
pub struct BlackBoxMap {
    support: Atoms,
    f: Box<dyn Fn(&Atoms) -> Atoms>,
}

impl BlackBoxMap {
    /// Checks `f(p·Z) = p·f(Z)` on `samples` permutations fixing `support`,
    /// each against a few sampled finite sets `Z`.
    pub fn new(
        support: Atoms,
        f: impl Fn(&Atoms) -> Atoms + 'static,
        samples: usize,
        seed: u64,
    ) -> Result<BlackBoxMap, FixpointError> {
        let mut pool = support.clone();
        pool.extend(fresh_atoms(4));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pool_vec: Vec<Atom> = pool.iter().copied().collect();
        for p in sample_fix(&support, &pool, samples, seed) {
            for _ in 0..4 {
                let z = random_subset(&pool_vec, &mut rng);
                let lhs = f(&p.image(&z));
                let rhs = p.image(&f(&z));
                if lhs != rhs {
                    return Err(FixpointError::SupportClaim { perm: p, input: z });
                }
            }
        }
        Ok(BlackBoxMap {
            support,
            f: Box::new(f),
        })
    }
}

impl FinMap for BlackBoxMap {
    fn eval(&self, z: &Atoms) -> Atoms {
        (self.f)(z)
    }

    fn declared_support(&self) -> Atoms {
        self.support.clone()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixpointResult {
    pub fixpoint: Atoms,
    pub steps: usize,
    /// Iterates from the start up to and including the repeated fixed point.
    pub chain: Vec<Atoms>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FixpointError {
    #[error("no fixed point within {max_iter} iterations; chain so far: {chain:?}")]
    BoundExceeded { max_iter: usize, chain: Vec<Atoms> },
    #[error("iterate {step} = {iterate:?} is not inside the support bound {bound:?}")]
    OutsideSupport {
        step: usize,
        iterate: Atoms,
        bound: Atoms,
    },
    #[error("map is not progressive at step {step}: {before:?} is not below {after:?}")]
    NotProgressive {
        step: usize,
        before: Atoms,
        after: Atoms,
    },
    #[error("declared support is wrong: conjugation by {perm} changes the value at {input:?}")]
    SupportClaim { perm: Perm, input: Atoms },
}

pub fn default_max_iter(bound: &Atoms) -> usize {
    bound.len() + 2
}

/// Iterates `∅, f(∅), f²(∅), …` until a repeat. The result is the least
/// fixed point of a monotone map.
pub fn lfp_from_empty<M: FinMap + ?Sized>(
    m: &M,
    max_iter: Option<usize>,
) -> Result<FixpointResult, FixpointError> {
    iterate(m, Atoms::new(), max_iter, false)
}

/// Iterates from `z0`, checking `Zₙ ⊆ f(Zₙ)` at every step.
pub fn iterate_to_fix<M: FinMap + ?Sized>(
    m: &M,
    z0: &Atoms,
    max_iter: Option<usize>,
) -> Result<FixpointResult, FixpointError> {
    iterate(m, z0.clone(), max_iter, true)
}

fn iterate<M: FinMap + ?Sized>(
    m: &M,
    z0: Atoms,
    max_iter: Option<usize>,
    check_progress: bool,
) -> Result<FixpointResult, FixpointError> {
    let bound: Atoms = m.declared_support().union(&z0).copied().collect();
    let max_iter = max_iter.unwrap_or_else(|| default_max_iter(&bound));
    let mut chain = vec![z0];
    loop {
        let step = chain.len() - 1;
        let cur = chain.last().expect("chain starts nonempty");
        if !cur.is_subset(&bound) {
            return Err(FixpointError::OutsideSupport {
                step,
                iterate: cur.clone(),
                bound,
            });
        }
        let next = m.eval(cur);
        if check_progress && !cur.is_subset(&next) {
            return Err(FixpointError::NotProgressive {
                step,
                before: cur.clone(),
                after: next,
            });
        }
        if next == *cur {
            chain.push(next.clone());
            return Ok(FixpointResult {
                fixpoint: next,
                steps: step,
                chain,
            });
        }
        chain.push(next);
        if step + 1 > max_iter {
            return Err(FixpointError::BoundExceeded { max_iter, chain });
        }
    }
}

/// All fixed points of `m` among the subsets of `universe`.
pub fn fixed_points_within<M: FinMap + ?Sized>(m: &M, universe: &Atoms) -> Vec<Atoms> {
    let elems: Vec<Atom> = universe.iter().copied().collect();
    assert!(elems.len() <= 16, "universe too large to enumerate");
    (0u32..1 << elems.len())
        .map(|mask| subset_of(&elems, mask))
        .filter(|z| m.eval(z) == *z)
        .collect()
}

fn subset_of(elems: &[Atom], mask: u32) -> Atoms {
    elems
        .iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .map(|(_, &a)| a)
        .collect()
}

fn random_subset(pool: &[Atom], rng: &mut ChaCha8Rng) -> Atoms {
    pool.iter().copied().filter(|_| rng.gen_bool(0.5)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleStatus {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleOutcome {
    pub input: Atoms,
    pub output: Atoms,
    pub status: SampleStatus,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedPointReport {
    pub outcomes: Vec<SampleOutcome>,
}

impl FixedPointReport {
    pub fn count(&self, status: SampleStatus) -> usize {
        self.outcomes.iter().filter(|o| o.status == status).count()
    }

    pub fn all_pass(&self) -> bool {
        !self.outcomes.is_empty() && self.outcomes.iter().all(|o| o.status == SampleStatus::Pass)
    }
}

/// For a progressive map, every finite `Z ⊇ supp(f)` should be fixed.
/// Samples `Z` as the support plus a random set of extra atoms.
pub fn progressive_fixed_points_check(
    m: &MonotoneMap,
    samples: usize,
    seed: u64,
) -> FixedPointReport {
    let support = support_of_map(m);
    let extra = fresh_atoms(6);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let outcomes = (0..samples)
        .map(|_| {
            let mut z = support.clone();
            z.extend(random_subset(&extra, &mut rng));
            let output = m.apply(&z);
            let status = if !m.is_progressive() {
                SampleStatus::NotApplicable
            } else if output == z {
                SampleStatus::Pass
            } else {
                SampleStatus::Fail
            };
            SampleOutcome {
                input: z,
                output,
                status,
            }
        })
        .collect();
    FixedPointReport { outcomes }
}

/// For sampled `X`, checks `f(X \ S) = X \ S` with `S = supp(f)`. A sample
/// counts only when `f` is strictly increasing on the subsets of `X ∪ S`;
/// otherwise it is marked not applicable.
pub fn strict_monotone_fixed_points_check(
    m: &MonotoneMap,
    samples: usize,
    seed: u64,
) -> FixedPointReport {
    let support = support_of_map(m);
    let mut pool: Vec<Atom> = support.iter().copied().collect();
    pool.extend(fresh_atoms(3));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let outcomes = (0..samples)
        .map(|_| {
            let x = random_subset(&pool, &mut rng);
            strict_sample(m, &support, x)
        })
        .collect();
    FixedPointReport { outcomes }
}

/// One sample of [`strict_monotone_fixed_points_check`] at a given `X`.
pub fn strict_sample(m: &MonotoneMap, support: &Atoms, x: Atoms) -> SampleOutcome {
    let input: Atoms = x.difference(support).copied().collect();
    let output = m.apply(&input);
    let universe: Atoms = x.union(support).copied().collect();
    let status = if !strictly_increasing_on(m, &universe) {
        SampleStatus::NotApplicable
    } else if output == input {
        SampleStatus::Pass
    } else {
        SampleStatus::Fail
    };
    SampleOutcome {
        input,
        output,
        status,
    }
}

/// Strictness on covering pairs `Z ⊂ Z ∪ {a}` of the subsets of `universe`,
/// which for a monotone map gives strictness on the whole sublattice.
fn strictly_increasing_on(m: &MonotoneMap, universe: &Atoms) -> bool {
    let elems: Vec<Atom> = universe.iter().copied().collect();
    let mut memo: BTreeMap<u32, Atoms> = BTreeMap::new();
    let mut image = |mask: u32| {
        memo.entry(mask)
            .or_insert_with(|| m.apply(&subset_of(&elems, mask)))
            .clone()
    };
    for mask in 0u32..1 << elems.len() {
        for i in 0..elems.len() {
            if mask >> i & 1 == 0 {
                let lo = image(mask);
                let hi = image(mask | 1 << i);
                if lo == hi || !lo.is_subset(&hi) {
                    return false;
                }
            }
        }
    }
    true
}

/// A random constructor-built map whose support lies inside `pool`.
pub fn random_map(pool: &[Atom], depth: u32, rng: &mut ChaCha8Rng) -> MonotoneMap {
    let pick = if depth == 0 {
        rng.gen_range(0..4)
    } else {
        rng.gen_range(0..6)
    };
    match pick {
        0 => MonotoneMap::Identity,
        1 => MonotoneMap::ConstUnion(random_subset(pool, rng)),
        2 => MonotoneMap::ImageUnion(random_atom_fun(pool, rng)),
        3 => MonotoneMap::PermImage(random_perm(pool, rng)),
        4 => MonotoneMap::union(
            random_map(pool, depth - 1, rng),
            random_map(pool, depth - 1, rng),
        ),
        _ => MonotoneMap::compose(
            random_map(pool, depth - 1, rng),
            random_map(pool, depth - 1, rng),
        ),
    }
}

/// A random map built only from progressive constructors.
pub fn random_progressive_map(pool: &[Atom], depth: u32, rng: &mut ChaCha8Rng) -> MonotoneMap {
    let pick = if depth == 0 {
        rng.gen_range(0..3)
    } else {
        rng.gen_range(0..5)
    };
    match pick {
        0 => MonotoneMap::Identity,
        1 => MonotoneMap::ConstUnion(random_subset(pool, rng)),
        2 => MonotoneMap::ImageUnion(random_atom_fun(pool, rng)),
        // one progressive side is enough for a union
        3 => MonotoneMap::union(
            random_progressive_map(pool, depth - 1, rng),
            random_map(pool, depth - 1, rng),
        ),
        _ => MonotoneMap::compose(
            random_progressive_map(pool, depth - 1, rng),
            random_progressive_map(pool, depth - 1, rng),
        ),
    }
}

fn random_atom_fun(pool: &[Atom], rng: &mut ChaCha8Rng) -> AtomFun {
    let mut carrier: Vec<Atom> = pool.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
    if carrier.is_empty() {
        carrier.push(*pool.choose(rng).expect("pool is nonempty"));
    }
    let table = carrier
        .iter()
        .map(|&a| (a, *carrier.choose(rng).expect("nonempty")))
        .collect();
    let tail = if rng.gen_bool(0.5) {
        AtomTail::Identity
    } else {
        AtomTail::Const(*carrier.choose(rng).expect("nonempty"))
    };
    make_atom_fun(&carrier.iter().copied().collect(), table, tail)
        .expect("values drawn from the carrier")
}

fn random_perm(pool: &[Atom], rng: &mut ChaCha8Rng) -> Perm {
    let mut chosen: Vec<Atom> = pool.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
    let mut images = chosen.clone();
    images.shuffle(rng);
    chosen.truncate(images.len());
    Perm::from_map(chosen.into_iter().zip(images).collect()).expect("shuffle is a bijection")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn abc() -> (Atom, Atom, Atom) {
        let v = fresh_atoms(3);
        (v[0], v[1], v[2])
    }

    fn set(xs: &[Atom]) -> Atoms {
        xs.iter().copied().collect()
    }

    #[test]
    fn supports_of_maps() {
        let (a, b, c) = abc();
        assert_eq!(
            support_of_map(&MonotoneMap::ConstUnion(set(&[a, b]))),
            set(&[a, b])
        );
        assert_eq!(
            support_of_map(&MonotoneMap::ImageUnion(AtomFun::constant(a))),
            set(&[a])
        );
        let m = MonotoneMap::union(
            MonotoneMap::ConstUnion(set(&[a])),
            MonotoneMap::PermImage(Perm::transpose(b, c)),
        );
        assert_eq!(support_of_map(&m), set(&[a, b, c]));
    }

    #[test]
    fn least_fixed_points() {
        let (a, b, _) = abc();
        let r = lfp_from_empty(&MonotoneMap::ConstUnion(set(&[a, b])), None).unwrap();
        assert_eq!(r.fixpoint, set(&[a, b]));
        assert_eq!(r.steps, 1);

        let r = lfp_from_empty(&MonotoneMap::Identity, None).unwrap();
        assert!(r.fixpoint.is_empty());
        assert_eq!(r.steps, 0);

        let m = MonotoneMap::union(
            MonotoneMap::ConstUnion(set(&[a])),
            MonotoneMap::PermImage(Perm::transpose(a, b)),
        );
        let r = lfp_from_empty(&m, None).unwrap();
        assert_eq!(
            r.chain,
            vec![set(&[]), set(&[a]), set(&[a, b]), set(&[a, b])]
        );
        assert_eq!(r.steps, 2);
    }

    #[test]
    fn iteration_from_a_start() {
        let (a, b, c) = abc();
        let r = iterate_to_fix(&MonotoneMap::ConstUnion(set(&[a])), &set(&[b]), None).unwrap();
        assert_eq!((r.fixpoint, r.steps), (set(&[a, b]), 1));

        let r = iterate_to_fix(&MonotoneMap::Identity, &set(&[b, c]), None).unwrap();
        assert_eq!((r.fixpoint, r.steps), (set(&[b, c]), 0));

        let r = iterate_to_fix(
            &MonotoneMap::ImageUnion(AtomFun::constant(a)),
            &set(&[b]),
            None,
        )
        .unwrap();
        assert_eq!((r.fixpoint, r.steps), (set(&[a, b]), 1));

        let err = iterate_to_fix(
            &MonotoneMap::PermImage(Perm::transpose(a, b)),
            &set(&[a]),
            None,
        )
        .unwrap_err();
        assert!(matches!(err, FixpointError::NotProgressive { step: 0, .. }));
    }

    #[test]
    fn max_iter_is_enforced() {
        let (a, b, _) = abc();
        let m = MonotoneMap::union(
            MonotoneMap::ConstUnion(set(&[a])),
            MonotoneMap::PermImage(Perm::transpose(a, b)),
        );
        let err = lfp_from_empty(&m, Some(1)).unwrap_err();
        let FixpointError::BoundExceeded { chain, .. } = err else {
            panic!("{err}")
        };
        assert_eq!(chain, vec![set(&[]), set(&[a]), set(&[a, b])]);
    }

    #[test]
    fn a_lying_black_box_is_rejected() {
        let (a, _, _) = abc();
        // claims support {a} but adds the least atom of its input's complement
        let bad = BlackBoxMap::new(
            set(&[a]),
            |z: &Atoms| {
                let mut out = z.clone();
                if let Some(&m) = z.iter().next() {
                    out.insert(Atom::from_raw(m.id() + 1_000_000));
                }
                out
            },
            20,
            1,
        );
        assert!(matches!(bad, Err(FixpointError::SupportClaim { .. })));

        let good = BlackBoxMap::new(
            set(&[a]),
            move |z: &Atoms| {
                let mut out = z.clone();
                out.insert(a);
                out
            },
            20,
            1,
        )
        .unwrap();
        assert_eq!(lfp_from_empty(&good, None).unwrap().fixpoint, set(&[a]));
    }

    #[test]
    fn progressive_maps_fix_supersets_of_support() {
        let (a, _, _) = abc();
        for m in [
            MonotoneMap::ConstUnion(set(&[a])),
            MonotoneMap::Identity,
            MonotoneMap::union(
                MonotoneMap::ConstUnion(set(&[a])),
                MonotoneMap::ImageUnion(AtomFun::constant(a)),
            ),
        ] {
            let r = progressive_fixed_points_check(&m, 30, 9);
            assert!(r.all_pass(), "{m}");
        }
        let r = progressive_fixed_points_check(
            &MonotoneMap::PermImage(Perm::transpose(a, Atom::fresh())),
            5,
            1,
        );
        assert_eq!(r.count(SampleStatus::NotApplicable), 5);
    }

    #[test]
    fn strict_monotone_examples() {
        let (a, b, c) = abc();
        let id = MonotoneMap::Identity;
        assert_eq!(
            strict_sample(&id, &Atoms::new(), set(&[a, b])).status,
            SampleStatus::Pass
        );

        let p = MonotoneMap::PermImage(Perm::transpose(a, b));
        let o = strict_sample(&p, &set(&[a, b]), set(&[a, c]));
        assert_eq!((o.input.clone(), o.status), (set(&[c]), SampleStatus::Pass));

        let k = MonotoneMap::ConstUnion(set(&[a]));
        let o = strict_sample(&k, &set(&[a]), set(&[a, b]));
        assert_eq!(o.output, set(&[a, b]));
        assert_eq!(o.status, SampleStatus::NotApplicable);

        let r = strict_monotone_fixed_points_check(&p, 40, 3);
        assert_eq!(r.count(SampleStatus::Fail), 0);
        assert_eq!(r.count(SampleStatus::Pass), 40);
    }

    #[test]
    fn text_round_trips() {
        let mut names = AtomNames::new();
        let m = MonotoneMap::parse("(cup{a} | perm((a b)))", &mut names).unwrap();
        let a = names.lookup("a").unwrap();
        let b = names.lookup("b").unwrap();
        assert_eq!(
            m,
            MonotoneMap::union(
                MonotoneMap::ConstUnion(set(&[a])),
                MonotoneMap::PermImage(Perm::transpose(a, b))
            )
        );
        for text in [
            "id",
            "cup{}",
            "img(fun{a->b, b->b; tail=const b})",
            "(id ; perm((a b c)))",
            "((cup{a} | id) ; img(fun{tail=id}))",
        ] {
            let mut names = AtomNames::new();
            let m = MonotoneMap::parse(text, &mut names).unwrap_or_else(|e| panic!("{text}: {e}"));
            let back = MonotoneMap::parse(&m.render(&names), &mut names).unwrap();
            assert_eq!(back, m, "{text}");
        }
        let e = MonotoneMap::parse("cap{a}", &mut AtomNames::new()).unwrap_err();
        assert_eq!(e.offset, 0);
    }

    fn pool6() -> Vec<Atom> {
        fresh_atoms(6)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(96))]

        #[test]
        fn lfp_is_least_and_bounded(seed in any::<u64>()) {
            let pool = pool6();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random_map(&pool, 3, &mut rng);
            let s = support_of_map(&m);
            let r = lfp_from_empty(&m, None).unwrap();
            prop_assert!(r.steps <= s.len() + 1);
            prop_assert!(r.fixpoint.is_subset(&s));
            prop_assert_eq!(m.apply(&r.fixpoint), r.fixpoint.clone());
            for w in r.chain.windows(2) {
                prop_assert!(w[0].is_subset(&w[1]));
            }
            let mut universe = s.clone();
            universe.extend(fresh_atoms(1));
            for fp in fixed_points_within(&m, &universe) {
                prop_assert!(r.fixpoint.is_subset(&fp));
            }
        }

        #[test]
        fn lfp_is_equivariant(seed in any::<u64>()) {
            let pool = pool6();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random_map(&pool, 3, &mut rng);
            let p = random_perm(&pool, &mut rng);
            let lhs = lfp_from_empty(&m.conjugate(&p), None).unwrap().fixpoint;
            let rhs = p.image(&lfp_from_empty(&m, None).unwrap().fixpoint);
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn conjugation_matches_pointwise(seed in any::<u64>()) {
            let pool = pool6();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random_map(&pool, 3, &mut rng);
            let p = random_perm(&pool, &mut rng);
            let z = random_subset(&pool, &mut rng);
            prop_assert_eq!(m.conjugate(&p).apply(&p.image(&z)), p.image(&m.apply(&z)));
        }

        #[test]
        fn progressive_iteration_from_any_start(seed in any::<u64>()) {
            let pool = pool6();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random_progressive_map(&pool, 3, &mut rng);
            prop_assert!(m.is_progressive());
            let mut wider = pool.clone();
            wider.extend(fresh_atoms(3));
            let z0 = random_subset(&wider, &mut rng);
            let r = iterate_to_fix(&m, &z0, None).unwrap();
            let bound: Atoms = support_of_map(&m).union(&z0).copied().collect();
            prop_assert!(r.steps <= bound.len() + 1);
            prop_assert!(r.chain.iter().all(|z| z.is_subset(&bound)));
            prop_assert!(progressive_fixed_points_check(&m, 10, seed).all_pass());
        }
    }
}
