//! Atoms and finitary permutations.
//!
//! An [`Atom`] carries no structure beyond identity. The ordering derived on
//! atoms exists only so that sets of atoms have a canonical representation;
//! nothing semantic depends on it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::text::{AtomNames, Cursor, ParseError, Render};

/// A finite set of atoms in canonical order.
pub type Atoms = BTreeSet<Atom>;

static NEXT_ATOM: AtomicU64 = AtomicU64::new(0);

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom(u64);

impl Atom {
    /// Issues an atom distinct from every atom issued before in this process.
    pub fn fresh() -> Atom {
        Atom(NEXT_ATOM.fetch_add(1, Ordering::Relaxed))
    }

    /// Rebuilds an atom from its serialized id. Later fresh atoms will not
    /// collide with it.
    pub fn from_raw(id: u64) -> Atom {
        NEXT_ATOM.fetch_max(id + 1, Ordering::Relaxed);
        Atom(id)
    }

    pub fn id(self) -> u64 {
        self.0
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a{}", self.0)
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a{}", self.0)
    }
}

/// `n` pairwise distinct atoms, none of them seen before.
pub fn fresh_atoms(n: usize) -> Vec<Atom> {
    (0..n).map(|_| Atom::fresh()).collect()
}

/// Atoms distinct from everything in `avoid`.
pub fn fresh_avoiding(n: usize, avoid: &Atoms) -> Vec<Atom> {
    // fresh atoms are never in `avoid` unless it holds atoms built via
    // `from_raw`, which bumps the counter past them.
    let out = fresh_atoms(n);
    debug_assert!(out.iter().all(|a| !avoid.contains(a)));
    out
}

/// A permutation of the atoms moving finitely many of them.
///
/// Stored as a move table without fixed points, so structural equality is
/// equality of permutations.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Perm {
    moves: BTreeMap<Atom, Atom>,
}

impl Perm {
    pub fn identity() -> Perm {
        Perm::default()
    }

    /// The transposition `(a b)`; the identity when `a == b`.
    pub fn transpose(a: Atom, b: Atom) -> Perm {
        let mut moves = BTreeMap::new();
        if a != b {
            moves.insert(a, b);
            moves.insert(b, a);
        }
        Perm { moves }
    }

    /// Builds a permutation from an arbitrary finite map. Fails unless the
    /// map is a bijection of its domain onto itself.
    pub fn from_map(map: BTreeMap<Atom, Atom>) -> Option<Perm> {
        let dom: Atoms = map.keys().copied().collect();
        let rng: Atoms = map.values().copied().collect();
        if dom != rng {
            return None;
        }
        let moves = map.into_iter().filter(|(k, v)| k != v).collect();
        Some(Perm { moves })
    }

    /// Builds a permutation from disjoint cycles.
    pub fn from_cycles(cycles: &[Vec<Atom>]) -> Option<Perm> {
        let mut map = BTreeMap::new();
        for cycle in cycles {
            for (i, &a) in cycle.iter().enumerate() {
                let b = cycle[(i + 1) % cycle.len()];
                if map.insert(a, b).is_some() {
                    return None;
                }
            }
        }
        Perm::from_map(map)
    }

    pub fn is_identity(&self) -> bool {
        self.moves.is_empty()
    }

    pub fn apply(&self, a: Atom) -> Atom {
        self.moves.get(&a).copied().unwrap_or(a)
    }

    /// The atoms this permutation moves.
    pub fn moved(&self) -> Atoms {
        self.moves.keys().copied().collect()
    }

    pub fn moves(&self) -> &BTreeMap<Atom, Atom> {
        &self.moves
    }

    /// `self ∘ other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &Perm) -> Perm {
        let carrier: Atoms = self
            .moves
            .keys()
            .chain(other.moves.keys())
            .copied()
            .collect();
        let moves = carrier
            .into_iter()
            .map(|a| (a, self.apply(other.apply(a))))
            .filter(|(a, b)| a != b)
            .collect();
        Perm { moves }
    }

    pub fn inverse(&self) -> Perm {
        Perm {
            moves: self.moves.iter().map(|(&a, &b)| (b, a)).collect(),
        }
    }

    pub fn pow(&self, n: u64) -> Perm {
        let mut acc = Perm::identity();
        for _ in 0..n {
            acc = self.compose(&acc);
        }
        acc
    }

    /// Disjoint cycles of length at least two, each starting at its least atom.
    pub fn cycles(&self) -> Vec<Vec<Atom>> {
        let mut seen = Atoms::new();
        let mut out = Vec::new();
        for &start in self.moves.keys() {
            if seen.contains(&start) {
                continue;
            }
            let mut cycle = vec![start];
            seen.insert(start);
            let mut cur = self.apply(start);
            while cur != start {
                seen.insert(cur);
                cycle.push(cur);
                cur = self.apply(cur);
            }
            out.push(cycle);
        }
        out
    }

    /// Least `m >= 1` with `self^m` the identity.
    pub fn order(&self) -> u64 {
        self.cycles()
            .iter()
            .map(|c| c.len() as u64)
            .fold(1, |acc, len| acc / gcd(acc, len) * len)
    }

    /// Whether this permutation fixes every atom of `set`.
    pub fn fixes_all(&self, set: &Atoms) -> bool {
        set.iter().all(|&a| self.apply(a) == a)
    }

    /// Image of a finite set of atoms.
    pub fn image(&self, set: &Atoms) -> Atoms {
        set.iter().map(|&a| self.apply(a)).collect()
    }

    /// Parses cycle notation such as `(a b)(c d e)` or `()`.
    pub fn parse(text: &str, names: &mut AtomNames) -> Result<Perm, ParseError> {
        let mut cur = Cursor::new(text);
        let p = parse_cycles(&mut cur, names)?;
        cur.finish()?;
        Ok(p)
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub(crate) fn parse_cycles(
    cur: &mut Cursor<'_>,
    names: &mut AtomNames,
) -> Result<Perm, ParseError> {
    let start = cur.pos();
    let mut cycles = Vec::new();
    if cur.peek() != Some('(') {
        return Err(cur.error("expected `(`"));
    }
    while cur.peek() == Some('(') {
        cur.expect("(")?;
        let mut cycle = Vec::new();
        while cur.peek() != Some(')') {
            let label = cur.ident()?;
            cycle.push(names.bind(label));
        }
        cur.expect(")")?;
        if !cycle.is_empty() {
            cycles.push(cycle);
        }
    }
    Perm::from_cycles(&cycles).ok_or_else(|| ParseError::new(start, "cycles are not disjoint"))
}

impl Render for Perm {
    fn render(&self, names: &AtomNames) -> String {
        if self.is_identity() {
            return "()".to_string();
        }
        self.cycles()
            .iter()
            .map(|c| {
                let inner: Vec<String> = c.iter().map(|&a| names.name(a)).collect();
                format!("({})", inner.join(" "))
            })
            .collect()
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&AtomNames::default()))
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Perm{self}")
    }
}

/// `k` permutations fixing `fixed` pointwise, drawn from a generator seeded
/// with `seed`. They move atoms of `pool` outside `fixed`; if fewer than two
/// such atoms exist the pool is padded with fresh atoms. The first
/// permutation is always a transposition.
pub fn sample_fix(fixed: &Atoms, pool: &Atoms, k: usize, seed: u64) -> Vec<Perm> {
    let mut candidates: Vec<Atom> = pool.difference(fixed).copied().collect();
    if candidates.len() < 2 {
        candidates.extend(fresh_atoms(2 - candidates.len()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(k);
    for i in 0..k {
        if i == 0 {
            let pick: Vec<Atom> = candidates.choose_multiple(&mut rng, 2).copied().collect();
            out.push(Perm::transpose(pick[0], pick[1]));
            continue;
        }
        let size = rng.gen_range(2..=candidates.len().min(6));
        let chosen: Vec<Atom> = candidates
            .choose_multiple(&mut rng, size)
            .copied()
            .collect();
        let mut images = chosen.clone();
        images.shuffle(&mut rng);
        let map = chosen.into_iter().zip(images).collect();
        out.push(Perm::from_map(map).expect("shuffle is a bijection"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn three() -> (Atom, Atom, Atom) {
        let v = fresh_atoms(3);
        (v[0], v[1], v[2])
    }

    #[test]
    fn fresh_atoms_are_distinct() {
        assert!(fresh_atoms(0).is_empty());
        let v = fresh_atoms(2);
        assert_ne!(v[0], v[1]);
        let x = fresh_atoms(1)[0];
        let y = fresh_atoms(1)[0];
        assert_ne!(x, y);
    }

    #[test]
    fn fresh_atoms_from_many_threads() {
        let handles: Vec<_> = (0..4)
            .map(|_| std::thread::spawn(|| fresh_atoms(200)))
            .collect();
        let mut all = Atoms::new();
        for h in handles {
            for a in h.join().unwrap() {
                assert!(all.insert(a));
            }
        }
        assert_eq!(all.len(), 800);
    }

    #[test]
    fn raw_atoms_do_not_collide_with_fresh() {
        let a = Atom::from_raw(1_000_000);
        assert!(Atom::fresh().id() > a.id());
    }

    #[test]
    fn transposition_basics() {
        let (a, b, c) = three();
        let t = Perm::transpose(a, b);
        assert_eq!(t.apply(a), b);
        assert_eq!(t.apply(b), a);
        assert_eq!(t.apply(c), c);
        assert!(Perm::transpose(a, a).is_identity());
        assert!(t.compose(&t).is_identity());
        assert_eq!(t.inverse(), t);
    }

    #[test]
    fn composition_is_right_to_left() {
        let (a, b, c) = three();
        let p = Perm::transpose(a, b);
        let q = Perm::transpose(b, c);
        let pq = p.compose(&q);
        // pointwise: x -> p(q(x))
        for x in [a, b, c] {
            let expected = {
                let y = if x == b {
                    c
                } else if x == c {
                    b
                } else {
                    x
                };
                if y == a {
                    b
                } else if y == b {
                    a
                } else {
                    y
                }
            };
            assert_eq!(pq.apply(x), expected);
        }
        assert_eq!(pq.apply(a), b);
        assert_eq!(q.compose(&p).apply(a), c);
    }

    #[test]
    fn orders() {
        let (a, b, c) = three();
        assert_eq!(Perm::identity().order(), 1);
        assert_eq!(Perm::transpose(a, b).order(), 2);
        let cyc = Perm::from_cycles(&[vec![a, b, c]]).unwrap();
        assert_eq!(cyc.order(), 3);
        let v = fresh_atoms(5);
        let p = Perm::from_cycles(&[vec![v[0], v[1]], vec![v[2], v[3], v[4]]]).unwrap();
        assert_eq!(p.order(), 6);
    }

    #[test]
    fn cycle_text_round_trip() {
        let mut names = AtomNames::new();
        let p = Perm::parse("(a b)(c d e)", &mut names).unwrap();
        assert_eq!(p.render(&names), "(a b)(c d e)");
        assert_eq!(Perm::parse("()", &mut names).unwrap(), Perm::identity());
        assert_eq!(Perm::identity().render(&names), "()");
        assert!(Perm::parse("(a b)(b c)", &mut names).is_err());
        assert!(Perm::parse("(a b", &mut names).is_err());
    }

    #[test]
    fn sample_fix_respects_fixed_set() {
        let v = fresh_atoms(6);
        let fixed: Atoms = v[..2].iter().copied().collect();
        let pool: Atoms = v.iter().copied().collect();
        assert!(sample_fix(&fixed, &pool, 0, 1).is_empty());
        let ps = sample_fix(&fixed, &pool, 30, 7);
        assert_eq!(ps.len(), 30);
        assert!(!ps[0].is_identity());
        for p in &ps {
            assert!(p.fixes_all(&fixed));
        }
        assert_eq!(ps, sample_fix(&fixed, &pool, 30, 7));
        // nothing left to move: padded with fresh atoms
        let ps = sample_fix(&pool, &pool, 3, 1);
        assert!(!ps[0].is_identity());
        assert!(ps.iter().all(|p| p.fixes_all(&pool)));
    }

    fn arb_perm(atoms: Vec<Atom>) -> impl Strategy<Value = Perm> {
        Just(atoms.clone())
            .prop_shuffle()
            .prop_map(move |img| Perm::from_map(atoms.iter().copied().zip(img).collect()).unwrap())
    }

    proptest! {
        #[test]
        fn group_laws(seed in any::<u64>()) {
            let pool: Atoms = fresh_atoms(6).into_iter().collect();
            let ps = sample_fix(&Atoms::new(), &pool, 3, seed);
            let (p, q, r) = (&ps[0], &ps[1], &ps[2]);
            prop_assert_eq!(p.compose(&q.compose(r)), p.compose(q).compose(r));
            prop_assert_eq!(p.compose(&Perm::identity()), p.clone());
            prop_assert_eq!(Perm::identity().compose(p), p.clone());
            prop_assert!(p.compose(&p.inverse()).is_identity());
            prop_assert!(q.inverse().compose(q).is_identity());
        }

        #[test]
        fn order_is_least_period(p in arb_perm(fresh_atoms(7))) {
            let m = p.order();
            prop_assert!(p.pow(m).is_identity());
            for j in 1..m {
                prop_assert!(!p.pow(j).is_identity());
            }
        }

        #[test]
        fn results_are_canonical(p in arb_perm(fresh_atoms(5)), q in arb_perm(fresh_atoms(5))) {
            for r in [p.compose(&q), p.inverse(), q.pow(3)] {
                prop_assert!(r.moves().iter().all(|(a, b)| a != b));
            }
        }
    }
}
