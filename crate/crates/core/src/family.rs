//! Families of k-separated sets: intersecting predicates, stars, the
//! exceptional families at `n = 2r + 2`, and identification of families
//! under rotations and reflections of the circle.

use std::collections::BTreeSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circ::{separated_sets, CircSet, Group};
use crate::error::{Error, Result};

/// A deduplicated, lexicographically ordered collection of r-sets that are
/// k-separated on the circle `[n]`.
///
/// `k = 0` imposes no separation, so arbitrary r-set families are
/// represented with `k = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct SetFamily {
    n: u32,
    r: u32,
    k: u32,
    sets: Vec<CircSet>,
}

#[derive(Deserialize)]
struct SetFamilyRepr {
    n: u32,
    r: u32,
    k: u32,
    sets: Vec<CircSet>,
}

impl<'de> Deserialize<'de> for SetFamily {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = SetFamilyRepr::deserialize(d)?;
        SetFamily::new(repr.n, repr.r, repr.k, repr.sets).map_err(serde::de::Error::custom)
    }
}

impl SetFamily {
    /// Validates every member and stores them sorted without duplicates.
    pub fn new(n: u32, r: u32, k: u32, sets: impl IntoIterator<Item = CircSet>) -> Result<Self> {
        if r == 0 {
            return Err(Error::EmptySet);
        }
        let mut v: Vec<CircSet> = Vec::new();
        for s in sets {
            if s.n() != n || s.len() != r {
                return Err(Error::WrongShape { set: s, n, r });
            }
            if !s.is_k_separated(k) {
                return Err(Error::NotSeparated { set: s, k });
            }
            v.push(s);
        }
        v.sort();
        v.dedup();
        Ok(SetFamily { n, r, k, sets: v })
    }

    pub fn empty(n: u32, r: u32, k: u32) -> Self {
        SetFamily {
            n,
            r,
            k,
            sets: Vec::new(),
        }
    }

    pub(crate) fn from_sorted_unchecked(n: u32, r: u32, k: u32, sets: Vec<CircSet>) -> Self {
        debug_assert!(sets.windows(2).all(|w| w[0] < w[1]));
        SetFamily { n, r, k, sets }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn sets(&self) -> &[CircSet] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, CircSet> {
        self.sets.iter()
    }

    pub fn contains(&self, s: &CircSet) -> bool {
        self.sets.binary_search(s).is_ok()
    }

    pub fn params(&self) -> (u32, u32, u32) {
        (self.n, self.r, self.k)
    }

    /// Keeps only the members satisfying `pred`.
    pub fn filter(&self, pred: impl Fn(&CircSet) -> bool) -> SetFamily {
        SetFamily {
            sets: self.sets.iter().copied().filter(|s| pred(s)).collect(),
            ..*self
        }
    }

    /// Same members, with the declared separation raised or lowered to `k`.
    pub fn with_separation(&self, k: u32) -> Result<SetFamily> {
        SetFamily::new(self.n, self.r, k, self.sets.iter().copied())
    }

    pub fn is_intersecting(&self) -> bool {
        is_intersecting(&self.sets)
    }

    /// Image of every member under `sym`.
    pub fn map(&self, f: impl Fn(&CircSet) -> CircSet) -> SetFamily {
        let mut sets: Vec<CircSet> = self.sets.iter().map(f).collect();
        sets.sort();
        sets.dedup();
        SetFamily { sets, ..*self }
    }

    /// One-line text form `n r k : {a,b} {c,d} ...`.
    pub fn to_line(&self) -> String {
        let mut out = format!("{} {} {} :", self.n, self.r, self.k);
        for s in &self.sets {
            out.push(' ');
            out.push_str(&s.to_string());
        }
        out
    }
}

impl fmt::Display for SetFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_line())
    }
}

impl<'a> IntoIterator for &'a SetFamily {
    type Item = &'a CircSet;
    type IntoIter = std::slice::Iter<'a, CircSet>;

    fn into_iter(self) -> Self::IntoIter {
        self.sets.iter()
    }
}

/// True iff every two members share an element. Works on arbitrary sets,
/// including mixed sizes.
pub fn is_intersecting(sets: &[CircSet]) -> bool {
    first_disjoint_pair(sets).is_none()
}

/// The first disjoint pair, in member order, if any.
pub fn first_disjoint_pair(sets: &[CircSet]) -> Option<(CircSet, CircSet)> {
    for (i, a) in sets.iter().enumerate() {
        for b in &sets[i + 1..] {
            if !a.meets(b) {
                return Some((*a, *b));
            }
        }
    }
    None
}

/// All k-separated r-sets containing element `i`.
pub fn star_family(n: u32, r: u32, k: u32, i: u32) -> Result<SetFamily> {
    check_universe(n, r, k)?;
    if i == 0 || i > n {
        return Err(Error::ElementOutOfRange { elem: i, n });
    }
    let sets = separated_sets(n, r, k)
        .into_iter()
        .filter(|s| s.contains(i))
        .collect();
    Ok(SetFamily::from_sorted_unchecked(n, r, k, sets))
}

/// The exceptional family
/// `{A in [2r+2]^(r)_1 : |A ∩ {1, 3, ..., 4i+1}| >= i + 1}`.
pub fn b_family(r: u32, i: u32) -> Result<SetFamily> {
    if r == 0 {
        return Err(Error::EmptySet);
    }
    if i == 0 || i > r / 2 {
        return Err(Error::InvalidParameter(format!(
            "b_family index {i} outside 1..={}",
            r / 2
        )));
    }
    let n = 2 * r + 2;
    let odd: u64 = (0..=2 * i).map(|j| 1u64 << (2 * j)).sum();
    let sets = separated_sets(n, r, 1)
        .into_iter()
        .filter(|s| (s.mask() & odd).count_ones() > i)
        .collect();
    Ok(SetFamily::from_sorted_unchecked(n, r, 1, sets))
}

fn check_universe(n: u32, r: u32, k: u32) -> Result<()> {
    if r == 0 {
        return Err(Error::EmptySet);
    }
    if (n as u64) < (k as u64 + 1) * r as u64 {
        return Err(Error::TooFewPoints { n, r, k });
    }
    Ok(())
}

/// Lexicographically least image of the family under the group. Two
/// families are isomorphic iff their canonical forms coincide.
pub fn canonical_form(family: &SetFamily, group: Group) -> SetFamily {
    let mut best: Option<Vec<CircSet>> = None;
    for sym in group.elements(family.n) {
        let mut image: Vec<CircSet> = family.sets.iter().map(|s| s.apply(sym)).collect();
        image.sort();
        if best.as_ref().is_none_or(|b| image < *b) {
            best = Some(image);
        }
    }
    SetFamily {
        sets: best.unwrap_or_default(),
        ..*family
    }
}

/// True iff a rotation (optionally composed with the reflection) maps the
/// members of `f` exactly onto the members of `g`.
pub fn are_isomorphic(f: &SetFamily, g: &SetFamily, group: Group) -> Result<bool> {
    if f.params() != g.params() {
        return Err(Error::ParameterMismatch(
            format!("{:?}", f.params()),
            format!("{:?}", g.params()),
        ));
    }
    if f.len() != g.len() {
        return Ok(false);
    }
    let target: BTreeSet<CircSet> = g.sets.iter().copied().collect();
    Ok(group
        .elements(f.n)
        .into_iter()
        .any(|sym| f.sets.iter().all(|s| target.contains(&s.apply(sym)))))
}

/// `g(A) = {k+2, a_2 + k, ..., a_r + k}` for `A = {1, a_2, ..., a_r}` with
/// `k + 2 ∉ A`. Maps `{C : 1 ∈ C, k+2 ∉ C}` bijectively onto
/// `{C : 1 ∉ C, k+2 ∈ C}` and `A ∩ g(A) = ∅`.
pub fn g_map(a: &CircSet, k: u32) -> Result<CircSet> {
    let n = a.n();
    if !a.contains(1) || a.contains(k + 2) {
        return Err(Error::NotInDomain {
            set: *a,
            forbidden: k + 2,
        });
    }
    if !a.is_k_separated(k) {
        return Err(Error::NotSeparated { set: *a, k });
    }
    CircSet::from_unsorted(
        n,
        std::iter::once(k + 2).chain(a.iter().skip(1).map(|x| x + k)),
    )
}

/// A maximal intersecting subfamily of `[n]^(r)_k`, grown greedily over a
/// uniformly shuffled member order.
pub fn random_maximal_intersecting<R: Rng + ?Sized>(
    n: u32,
    r: u32,
    k: u32,
    rng: &mut R,
) -> Result<SetFamily> {
    check_universe(n, r, k)?;
    let mut pool = separated_sets(n, r, k);
    pool.shuffle(rng);
    let mut chosen: Vec<CircSet> = Vec::new();
    for s in pool {
        if chosen.iter().all(|c| c.meets(&s)) {
            chosen.push(s);
        }
    }
    chosen.sort();
    Ok(SetFamily::from_sorted_unchecked(n, r, k, chosen))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circ::enumerate_separated;

    fn set(n: u32, e: &[u32]) -> CircSet {
        CircSet::new(n, e).unwrap()
    }

    fn fam(n: u32, r: u32, k: u32, sets: &[&[u32]]) -> SetFamily {
        SetFamily::new(n, r, k, sets.iter().map(|e| set(n, e))).unwrap()
    }

    #[test]
    fn intersecting_examples() {
        assert!(fam(6, 2, 1, &[&[1, 3], &[1, 4]]).is_intersecting());
        assert!(!fam(4, 2, 1, &[&[1, 3], &[2, 4]]).is_intersecting());
        assert!(star_family(7, 2, 1, 1).unwrap().is_intersecting());
        assert!(SetFamily::empty(5, 2, 1).is_intersecting());
        assert!(fam(5, 2, 1, &[&[1, 3]]).is_intersecting());
    }

    #[test]
    fn family_validation() {
        let err = SetFamily::new(6, 2, 1, [set(6, &[1, 2])]).unwrap_err();
        assert!(matches!(err, Error::NotSeparated { .. }));
        let err = SetFamily::new(6, 2, 1, [set(6, &[1, 3, 5])]).unwrap_err();
        assert!(matches!(err, Error::WrongShape { .. }));
        let f = fam(6, 2, 1, &[&[2, 4], &[1, 3], &[2, 4]]);
        assert_eq!(f.sets(), &[set(6, &[1, 3]), set(6, &[2, 4])]);
    }

    #[test]
    fn star_examples() {
        let s = star_family(7, 2, 1, 1).unwrap();
        assert_eq!(s, fam(7, 2, 1, &[&[1, 3], &[1, 4], &[1, 5], &[1, 6]]));
        assert_eq!(star_family(4, 2, 1, 2).unwrap(), fam(4, 2, 1, &[&[2, 4]]));
        assert_eq!(
            star_family(9, 3, 2, 1).unwrap(),
            fam(9, 3, 2, &[&[1, 4, 7]])
        );
        assert!(matches!(
            star_family(5, 3, 1, 1),
            Err(Error::TooFewPoints { .. })
        ));
        assert!(star_family(7, 2, 1, 8).is_err());
    }

    #[test]
    fn star_is_rotation_of_star_at_one() {
        let base = star_family(9, 3, 1, 1).unwrap();
        for i in 1..=9 {
            let rotated = base.map(|s| s.rotate(i as i64 - 1));
            assert_eq!(rotated, star_family(9, 3, 1, i).unwrap());
        }
    }

    #[test]
    fn b_family_examples() {
        let b = b_family(2, 1).unwrap();
        assert_eq!(b, fam(6, 2, 1, &[&[1, 3], &[1, 5], &[3, 5]]));
        assert_eq!(
            b.len() as u128,
            crate::circ::count_star_formula(6, 2, 1).unwrap()
        );
        assert_eq!(b_family(3, 1).unwrap().len(), 6);
        assert!(b_family(3, 2).is_err());
        assert!(b_family(4, 0).is_err());
    }

    #[test]
    fn isomorphism_examples() {
        let s1 = star_family(7, 2, 1, 1).unwrap();
        let s3 = star_family(7, 2, 1, 3).unwrap();
        assert!(are_isomorphic(&s1, &s3, Group::Dihedral).unwrap());
        assert!(are_isomorphic(&s1, &s3, Group::Rotations).unwrap());
        let b = b_family(2, 1).unwrap();
        let star6 = star_family(6, 2, 1, 1).unwrap();
        assert!(!are_isomorphic(&b, &star6, Group::Dihedral).unwrap());
        assert!(are_isomorphic(&b, &b, Group::Dihedral).unwrap());
        assert!(are_isomorphic(&s1, &star6, Group::Dihedral).is_err());
    }

    #[test]
    fn reflection_only_pair() {
        // {1,3},{1,4} in [7] reflects to {1,6},{1,5}; no rotation maps one
        // family to the other.
        let f = fam(7, 2, 1, &[&[1, 3], &[1, 4]]);
        let g = f.map(|s| s.reflect());
        assert!(are_isomorphic(&f, &g, Group::Dihedral).unwrap());
        assert!(!are_isomorphic(&f, &g, Group::Rotations).unwrap());
        assert_eq!(
            canonical_form(&f, Group::Dihedral),
            canonical_form(&g, Group::Dihedral)
        );
        assert_ne!(
            canonical_form(&f, Group::Rotations),
            canonical_form(&g, Group::Rotations)
        );
    }

    #[test]
    fn g_map_examples() {
        assert_eq!(g_map(&set(7, &[1, 4]), 1).unwrap(), set(7, &[3, 5]));
        assert_eq!(
            g_map(&set(12, &[1, 5, 9]), 2).unwrap(),
            set(12, &[4, 7, 11])
        );
        assert!(g_map(&set(7, &[2, 4]), 1).is_err());
        assert!(g_map(&set(7, &[1, 3]), 1).is_err());
    }

    #[test]
    fn g_map_bijection_counts() {
        // n = 8, r = 2, k = 1: {1,4},...,{1,7} map onto {3,5},...,{3,8}.
        let all = enumerate_separated(8, 2, 1).unwrap();
        let c1: Vec<_> = all
            .iter()
            .filter(|s| s.contains(1) && !s.contains(3))
            .collect();
        let c3: BTreeSet<_> = all
            .iter()
            .filter(|s| !s.contains(1) && s.contains(3))
            .copied()
            .collect();
        assert_eq!(c1.len(), 4);
        assert_eq!(c3.len(), 4);
        let images: BTreeSet<_> = c1.iter().map(|s| g_map(s, 1).unwrap()).collect();
        assert_eq!(images, c3);
    }

    #[test]
    fn random_families_are_maximal() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let f = random_maximal_intersecting(9, 3, 1, &mut rng).unwrap();
            assert!(f.is_intersecting());
            for s in separated_sets(9, 3, 1) {
                if !f.contains(&s) {
                    assert!(f.iter().any(|m| !m.meets(&s)));
                }
            }
        }
    }

    #[test]
    fn text_and_json_forms() {
        let f = fam(6, 2, 1, &[&[1, 3], &[1, 5]]);
        assert_eq!(f.to_line(), "6 2 1 : {1,3} {1,5}");
        let json = serde_json::to_string(&f).unwrap();
        assert_eq!(
            json,
            r#"{"n":6,"r":2,"k":1,"sets":[{"n":6,"elems":[1,3]},{"n":6,"elems":[1,5]}]}"#
        );
        let back: SetFamily = serde_json::from_str(&json).unwrap();
        assert_eq!(back, f);
        let bad = r#"{"n":6,"r":2,"k":1,"sets":[{"n":6,"elems":[1,2]}]}"#;
        assert!(serde_json::from_str::<SetFamily>(bad).is_err());
    }
}
