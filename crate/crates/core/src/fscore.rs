//! Finitely supported subsets of the atoms and least supports.
//!
//! A subset of the atoms has finite support exactly when it is finite or
//! cofinite, so [`AtomSet`] has those two variants and nothing else.

use std::fmt;

use crate::atoms::{fresh_atoms, Atom, Atoms, Perm};
use crate::text::{AtomNames, Cursor, ParseError, Render};

/// Values acted on by finitary permutations, with a computable least support.
pub trait Nominal: Clone + PartialEq {
    fn act(&self, p: &Perm) -> Self;
    /// The least finite set of atoms supporting `self`.
    fn support(&self) -> Atoms;
}

impl Nominal for Atom {
    fn act(&self, p: &Perm) -> Self {
        p.apply(*self)
    }

    fn support(&self) -> Atoms {
        supp_atom(*self)
    }
}

/// Elements of a non-atomic set: every permutation acts trivially.
impl Nominal for u64 {
    fn act(&self, _p: &Perm) -> Self {
        *self
    }

    fn support(&self) -> Atoms {
        Atoms::new()
    }
}

impl<X: Nominal, Y: Nominal> Nominal for (X, Y) {
    fn act(&self, p: &Perm) -> Self {
        (self.0.act(p), self.1.act(p))
    }

    fn support(&self) -> Atoms {
        supp_pair(&self.0.support(), &self.1.support())
    }
}

/// Tuples act componentwise.
impl<X: Nominal> Nominal for Vec<X> {
    fn act(&self, p: &Perm) -> Self {
        self.iter().map(|x| x.act(p)).collect()
    }

    fn support(&self) -> Atoms {
        self.iter().flat_map(|x| x.support()).collect()
    }
}

pub fn supp_atom(a: Atom) -> Atoms {
    Atoms::from([a])
}

/// Least support of a pair from the least supports of its components.
pub fn supp_pair(x_supp: &Atoms, y_supp: &Atoms) -> Atoms {
    x_supp.union(y_supp).copied().collect()
}

/// The least support together with the swaps that confirm it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportReport {
    pub support: Atoms,
    /// Each entry is a transposition tried and whether it behaved as the
    /// support predicts: moving the element for atoms inside the support,
    /// fixing it for atoms outside.
    pub witness_checks: Vec<(Perm, bool)>,
}

impl SupportReport {
    pub fn verified(&self) -> bool {
        self.witness_checks.iter().all(|(_, ok)| *ok)
    }
}

/// Computes `x.support()` and confirms it is least: swapping any support atom
/// with a fresh atom changes `x`, and swapping any atom of `outside` (that is
/// not in the support) with a fresh atom leaves it alone.
pub fn support_report<T: Nominal>(x: &T, outside: &Atoms) -> SupportReport {
    let support = x.support();
    let mut witness_checks = Vec::new();
    for &a in &support {
        let b = fresh_atoms(1)[0];
        let p = Perm::transpose(a, b);
        let moved = x.act(&p) != *x;
        witness_checks.push((p, moved));
    }
    for &a in outside.difference(&support) {
        let b = fresh_atoms(1)[0];
        let p = Perm::transpose(a, b);
        let fixed = x.act(&p) == *x;
        witness_checks.push((p, fixed));
    }
    SupportReport {
        support,
        witness_checks,
    }
}

/// Whether `set` supports `x`, judged by swapping each atom of `probe` outside
/// `set` with fresh atoms and with each other.
pub fn supports<T: Nominal>(set: &Atoms, x: &T, probe: &Atoms) -> bool {
    let free: Vec<Atom> = probe.difference(set).copied().collect();
    let fresh = fresh_atoms(2);
    let mut movable = free.clone();
    movable.extend(fresh.iter().copied());
    for (i, &a) in movable.iter().enumerate() {
        for &b in &movable[i + 1..] {
            if x.act(&Perm::transpose(a, b)) != *x {
                return false;
            }
        }
    }
    true
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AtomSet {
    Finite(Atoms),
    /// The atoms not in the given finite set.
    Cofinite(Atoms),
}

impl AtomSet {
    pub fn empty() -> AtomSet {
        AtomSet::Finite(Atoms::new())
    }

    /// All atoms.
    pub fn all() -> AtomSet {
        AtomSet::Cofinite(Atoms::new())
    }

    pub fn finite(atoms: impl IntoIterator<Item = Atom>) -> AtomSet {
        AtomSet::Finite(atoms.into_iter().collect())
    }

    pub fn cofinite(excluded: impl IntoIterator<Item = Atom>) -> AtomSet {
        AtomSet::Cofinite(excluded.into_iter().collect())
    }

    pub fn contains(&self, a: Atom) -> bool {
        match self {
            AtomSet::Finite(xs) => xs.contains(&a),
            AtomSet::Cofinite(ys) => !ys.contains(&a),
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, AtomSet::Finite(_))
    }

    pub fn complement(&self) -> AtomSet {
        match self {
            AtomSet::Finite(xs) => AtomSet::Cofinite(xs.clone()),
            AtomSet::Cofinite(ys) => AtomSet::Finite(ys.clone()),
        }
    }

    pub fn union(&self, other: &AtomSet) -> AtomSet {
        use AtomSet::*;
        match (self, other) {
            (Finite(x), Finite(y)) => Finite(x | y),
            (Finite(x), Cofinite(y)) | (Cofinite(y), Finite(x)) => Cofinite(y - x),
            (Cofinite(x), Cofinite(y)) => Cofinite(x & y),
        }
    }

    pub fn intersection(&self, other: &AtomSet) -> AtomSet {
        use AtomSet::*;
        match (self, other) {
            (Finite(x), Finite(y)) => Finite(x & y),
            (Finite(x), Cofinite(y)) | (Cofinite(y), Finite(x)) => Finite(x - y),
            (Cofinite(x), Cofinite(y)) => Cofinite(x | y),
        }
    }

    pub fn difference(&self, other: &AtomSet) -> AtomSet {
        self.intersection(&other.complement())
    }

    pub fn is_subset(&self, other: &AtomSet) -> bool {
        self.difference(other) == AtomSet::empty()
    }

    /// Number of elements of a finite set.
    pub fn len(&self) -> Option<usize> {
        match self {
            AtomSet::Finite(xs) => Some(xs.len()),
            AtomSet::Cofinite(_) => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, AtomSet::Finite(xs) if xs.is_empty())
    }

    /// The finite atom set named in either variant.
    pub fn mentioned(&self) -> &Atoms {
        match self {
            AtomSet::Finite(xs) | AtomSet::Cofinite(xs) => xs,
        }
    }

    /// Parses `{a,b}`, `A\{a}` or `A`.
    pub fn parse(text: &str, names: &mut AtomNames) -> Result<AtomSet, ParseError> {
        let mut cur = Cursor::new(text);
        let s = parse_atom_set(&mut cur, names)?;
        cur.finish()?;
        Ok(s)
    }
}

/// Acts elementwise; finite stays finite and cofinite stays cofinite.
pub fn act_set(p: &Perm, x: &AtomSet) -> AtomSet {
    match x {
        AtomSet::Finite(xs) => AtomSet::Finite(p.image(xs)),
        AtomSet::Cofinite(ys) => AtomSet::Cofinite(p.image(ys)),
    }
}

pub fn supp_set(x: &AtomSet) -> Atoms {
    x.mentioned().clone()
}

impl Nominal for AtomSet {
    fn act(&self, p: &Perm) -> Self {
        act_set(p, self)
    }

    fn support(&self) -> Atoms {
        supp_set(self)
    }
}

/// Union, intersection and difference in one call.
pub fn set_algebra(x: &AtomSet, y: &AtomSet) -> (AtomSet, AtomSet, AtomSet) {
    (x.union(y), x.intersection(y), x.difference(y))
}

pub fn member(a: Atom, x: &AtomSet) -> bool {
    x.contains(a)
}

/// Every subset of the atoms supported by `s`: the subsets of `s` and their
/// complements.
pub fn sets_supported_by(s: &Atoms) -> Vec<AtomSet> {
    let elems: Vec<Atom> = s.iter().copied().collect();
    let mut out = Vec::with_capacity(2usize << elems.len());
    for mask in 0u64..(1u64 << elems.len()) {
        let sub: Atoms = elems
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, &a)| a)
            .collect();
        out.push(AtomSet::Cofinite(sub.clone()));
        out.push(AtomSet::Finite(sub));
    }
    out.sort();
    out
}

/// Every injective tuple of atoms supported by `s`, including the empty tuple.
pub fn injective_tuples_over(s: &Atoms) -> Vec<Vec<Atom>> {
    fn go(s: &[Atom], prefix: &mut Vec<Atom>, out: &mut Vec<Vec<Atom>>) {
        out.push(prefix.clone());
        for &a in s {
            if !prefix.contains(&a) {
                prefix.push(a);
                go(s, prefix, out);
                prefix.pop();
            }
        }
    }
    let elems: Vec<Atom> = s.iter().copied().collect();
    let mut out = Vec::new();
    go(&elems, &mut Vec::new(), &mut out);
    out
}

pub(crate) fn parse_finite_atoms(
    cur: &mut Cursor<'_>,
    names: &mut AtomNames,
) -> Result<Atoms, ParseError> {
    cur.expect("{")?;
    let mut out = Atoms::new();
    if cur.eat("}") {
        return Ok(out);
    }
    loop {
        out.insert(names.bind(cur.ident()?));
        if cur.eat("}") {
            return Ok(out);
        }
        cur.expect(",")?;
    }
}

pub(crate) fn parse_atom_set(
    cur: &mut Cursor<'_>,
    names: &mut AtomNames,
) -> Result<AtomSet, ParseError> {
    match cur.peek() {
        Some('{') => Ok(AtomSet::Finite(parse_finite_atoms(cur, names)?)),
        Some('A') if cur.peek_ident() == Some("A") => {
            cur.expect("A")?;
            if cur.eat("\\") {
                Ok(AtomSet::Cofinite(parse_finite_atoms(cur, names)?))
            } else {
                Ok(AtomSet::all())
            }
        }
        _ => Err(cur.error("expected `{...}`, `A` or `A\\{...}`")),
    }
}

pub(crate) fn render_atoms(xs: &Atoms, names: &AtomNames) -> String {
    let inner: Vec<String> = xs.iter().map(|&a| names.name(a)).collect();
    format!("{{{}}}", inner.join(","))
}

impl Render for AtomSet {
    fn render(&self, names: &AtomNames) -> String {
        match self {
            AtomSet::Finite(xs) => render_atoms(xs, names),
            AtomSet::Cofinite(ys) if ys.is_empty() => "A".to_string(),
            AtomSet::Cofinite(ys) => format!("A\\{}", render_atoms(ys, names)),
        }
    }
}

impl fmt::Display for AtomSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&AtomNames::default()))
    }
}

impl fmt::Debug for AtomSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atoms::sample_fix;
    use proptest::prelude::*;

    /// Characteristic vector of `x` over an explicit list of atoms.
    fn chi(x: &AtomSet, universe: &[Atom]) -> Vec<bool> {
        universe.iter().map(|&u| x.contains(u)).collect()
    }

    #[test]
    fn action_on_sets() {
        let v = fresh_atoms(3);
        let (a, b) = (v[0], v[1]);
        let t = Perm::transpose(a, b);
        assert_eq!(act_set(&t, &AtomSet::finite([a])), AtomSet::finite([b]));
        assert_eq!(act_set(&t, &AtomSet::cofinite([a])), AtomSet::cofinite([b]));
        let x = AtomSet::cofinite([a, v[2]]);
        assert_eq!(act_set(&Perm::identity(), &x), x);
    }

    #[test]
    fn supports_of_basic_values() {
        let v = fresh_atoms(2);
        let (a, b) = (v[0], v[1]);
        assert_eq!(supp_atom(a), Atoms::from([a]));
        assert_eq!(supp_atom(b), Atoms::from([b]));
        assert_eq!(supp_set(&AtomSet::finite([a, b])), Atoms::from([a, b]));
        assert_eq!(supp_set(&AtomSet::cofinite([a])), Atoms::from([a]));
        assert!(supp_set(&AtomSet::empty()).is_empty());
        let cd = fresh_atoms(2);
        assert_eq!(a.act(&Perm::transpose(cd[0], cd[1])), a);
        assert_eq!(
            supp_pair(&Atoms::from([a]), &Atoms::from([b])),
            Atoms::from([a, b])
        );
        assert!(supp_pair(&Atoms::new(), &Atoms::new()).is_empty());
        assert_eq!(
            supp_pair(&Atoms::from([a]), &Atoms::from([a])),
            Atoms::from([a])
        );
    }

    #[test]
    fn union_against_characteristic_vectors() {
        // 5-atom model: the two mentioned atoms plus three others
        let u = fresh_atoms(5);
        let (a, b) = (u[0], u[1]);
        let x = AtomSet::finite([a]);
        let y = AtomSet::cofinite([a, b]);
        let got = x.union(&y);
        assert_eq!(got, AtomSet::cofinite([b]));
        let oracle: Vec<bool> = chi(&x, &u)
            .iter()
            .zip(chi(&y, &u))
            .map(|(p, q)| *p || q)
            .collect();
        assert_eq!(chi(&got, &u), oracle);
        assert_eq!(
            AtomSet::finite([a]).intersection(&AtomSet::finite([b])),
            AtomSet::empty()
        );
        assert!(!member(a, &AtomSet::cofinite([a])));
        assert!(member(b, &AtomSet::cofinite([a])));
    }

    #[test]
    fn finite_never_equals_cofinite() {
        let v = fresh_atoms(2);
        assert_ne!(AtomSet::finite(v.clone()), AtomSet::cofinite(v.clone()));
        assert_ne!(AtomSet::empty(), AtomSet::all());
    }

    #[test]
    fn text_forms() {
        let mut names = AtomNames::new();
        for t in ["{a,b}", "A\\{a}", "A", "{}"] {
            let s = AtomSet::parse(t, &mut names).unwrap();
            assert_eq!(s.render(&names), t);
        }
        assert!(AtomSet::parse("{a,", &mut names).is_err());
        assert!(AtomSet::parse("B", &mut names).is_err());
    }

    #[test]
    fn supported_sets_count() {
        for n in 0..4 {
            let s: Atoms = fresh_atoms(n).into_iter().collect();
            let sets = sets_supported_by(&s);
            assert_eq!(sets.len(), 1 << (n + 1));
            assert!(sets.iter().all(|x| x.support().is_subset(&s)));
        }
        let s: Atoms = fresh_atoms(3).into_iter().collect();
        assert_eq!(injective_tuples_over(&s).len(), 1 + 3 + 6 + 6);
    }

    fn arb_set(pool: Vec<Atom>) -> impl Strategy<Value = AtomSet> {
        (proptest::sample::subsequence(pool, 0..=4), any::<bool>()).prop_map(|(xs, fin)| {
            if fin {
                AtomSet::finite(xs)
            } else {
                AtomSet::cofinite(xs)
            }
        })
    }

    proptest! {
        #[test]
        fn boolean_laws_in_finite_model(
            (x, y, u) in {
                let u = fresh_atoms(6);
                (arb_set(u[..4].to_vec()), arb_set(u[..4].to_vec()), Just(u))
            }
        ) {
            // universe has every mentioned atom plus two more
            let nx = x.complement();
            let ny = y.complement();
            prop_assert_eq!(x.union(&y).complement(), nx.intersection(&ny));
            prop_assert_eq!(x.intersection(&y).complement(), nx.union(&ny));
            prop_assert_eq!(x.union(&x.intersection(&y)), x.clone());
            prop_assert_eq!(x.intersection(&x.union(&y)), x.clone());
            let (un, int, diff) = set_algebra(&x, &y);
            for (i, &a) in u.iter().enumerate() {
                let (p, q) = (chi(&x, &u)[i], chi(&y, &u)[i]);
                prop_assert_eq!(un.contains(a), p || q);
                prop_assert_eq!(int.contains(a), p && q);
                prop_assert_eq!(diff.contains(a), p && !q);
            }
        }

        #[test]
        fn support_is_equivariant_and_least(x in arb_set(fresh_atoms(5)), seed in any::<u64>()) {
            let pool: Atoms = x.mentioned().iter().copied().chain(fresh_atoms(3)).collect();
            for p in sample_fix(&Atoms::new(), &pool, 5, seed) {
                prop_assert_eq!(act_set(&p, &x).support(), p.image(&x.support()));
            }
            let report = support_report(&x, &pool);
            prop_assert!(report.verified());
        }
    }
}
