//! Subsets of the circularly ordered ground set `[n] = {1, ..., n}`.
//!
//! A [`CircSet`] is stored as a 64-bit mask (bit `a - 1` for element `a`)
//! together with its ambient size, so every set knows which circle it lives
//! on. Ground sets larger than 64 points are rejected.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::SetFamily;

/// Largest supported ground set.
pub const MAX_N: u32 = 64;

fn full_mask(n: u32) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

fn check_n(n: u32) -> Result<()> {
    if n == 0 || n > MAX_N {
        return Err(Error::GroundSize { n, max: MAX_N });
    }
    Ok(())
}

/// A nonempty subset of `[n]` read around the circle.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "CircSetRepr", into = "CircSetRepr")]
pub struct CircSet {
    n: u32,
    mask: u64,
}

#[derive(Serialize, Deserialize)]
struct CircSetRepr {
    n: u32,
    elems: Vec<u32>,
}

impl TryFrom<CircSetRepr> for CircSet {
    type Error = Error;

    fn try_from(repr: CircSetRepr) -> Result<Self> {
        CircSet::new(repr.n, &repr.elems)
    }
}

impl From<CircSet> for CircSetRepr {
    fn from(set: CircSet) -> Self {
        CircSetRepr {
            n: set.n,
            elems: set.elems(),
        }
    }
}

impl CircSet {
    /// Builds a set from strictly increasing elements in `1..=n`.
    pub fn new(n: u32, elems: &[u32]) -> Result<Self> {
        check_n(n)?;
        if elems.is_empty() {
            return Err(Error::EmptySet);
        }
        if elems.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::NotIncreasing {
                elems: elems.to_vec(),
            });
        }
        let mut mask = 0u64;
        for &a in elems {
            if a == 0 || a > n {
                return Err(Error::ElementOutOfRange { elem: a, n });
            }
            mask |= 1 << (a - 1);
        }
        Ok(CircSet { n, mask })
    }

    /// Builds a set from a bit mask (bit `a - 1` set for element `a`).
    pub fn from_mask(n: u32, mask: u64) -> Result<Self> {
        check_n(n)?;
        if mask == 0 {
            return Err(Error::EmptySet);
        }
        if mask & !full_mask(n) != 0 {
            return Err(Error::ElementOutOfRange {
                elem: 64 - mask.leading_zeros(),
                n,
            });
        }
        Ok(CircSet { n, mask })
    }

    /// Internal constructor for masks already known to be valid.
    pub(crate) fn from_mask_unchecked(n: u32, mask: u64) -> Self {
        debug_assert!((1..=MAX_N).contains(&n) && mask != 0 && mask & !full_mask(n) == 0);
        CircSet { n, mask }
    }

    /// Builds a set from an arbitrary collection of elements, sorting and
    /// deduplicating them first.
    pub fn from_unsorted(n: u32, elems: impl IntoIterator<Item = u32>) -> Result<Self> {
        check_n(n)?;
        let mut mask = 0u64;
        for a in elems {
            if a == 0 || a > n {
                return Err(Error::ElementOutOfRange { elem: a, n });
            }
            mask |= 1 << (a - 1);
        }
        CircSet::from_mask(n, mask)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    /// Number of elements.
    pub fn len(&self) -> u32 {
        self.mask.count_ones()
    }

    /// Always false: empty sets cannot be constructed.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, a: u32) -> bool {
        a >= 1 && a <= self.n && self.mask & (1 << (a - 1)) != 0
    }

    /// Elements in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        let mut m = self.mask;
        std::iter::from_fn(move || {
            if m == 0 {
                None
            } else {
                let b = m.trailing_zeros();
                m &= m - 1;
                Some(b + 1)
            }
        })
    }

    pub fn elems(&self) -> Vec<u32> {
        self.iter().collect()
    }

    pub fn first(&self) -> u32 {
        self.mask.trailing_zeros() + 1
    }

    pub fn meets(&self, other: &CircSet) -> bool {
        self.mask & other.mask != 0
    }

    /// Circular gaps `a_{i+1} - a_i`, with `a_{r+1} = a_1 + n`.
    pub fn gap_vector(&self) -> GapVector {
        let elems = self.elems();
        let mut gaps = Vec::with_capacity(elems.len());
        for w in elems.windows(2) {
            gaps.push(w[1] - w[0]);
        }
        gaps.push(elems[0] + self.n - elems[elems.len() - 1]);
        GapVector(gaps)
    }

    /// Smallest circular gap.
    pub fn min_gap(&self) -> u32 {
        let mut prev = None;
        let mut first = 0;
        let mut min = self.n;
        for a in self.iter() {
            match prev {
                None => first = a,
                Some(p) => min = min.min(a - p),
            }
            prev = Some(a);
        }
        let last = prev.unwrap_or(first);
        min.min(first + self.n - last)
    }

    /// True iff every circular gap exceeds `k`.
    ///
    /// A single element has one gap of length `n`; `k = 0` accepts everything.
    pub fn is_k_separated(&self, k: u32) -> bool {
        self.min_gap() > k
    }

    /// Rebuilds a set from its first element and circular gaps. Positions
    /// past `n` wrap around, so the result always contains `start` and has
    /// `gaps` as its gap vector read from `start`.
    pub fn from_gaps(start: u32, gaps: &GapVector, n: u32) -> Result<Self> {
        check_n(n)?;
        if start == 0 || start > n {
            return Err(Error::ElementOutOfRange { elem: start, n });
        }
        if gaps.total() != n as u64 {
            return Err(Error::BadGaps {
                gaps: gaps.0.clone(),
                n,
            });
        }
        let mut mask = 0u64;
        let mut pos = start - 1;
        for &g in &gaps.0 {
            mask |= 1 << pos;
            pos = (pos + g) % n;
        }
        Ok(CircSet { n, mask })
    }

    /// Rotates every element by `s` steps: `a -> ((a - 1 + s) mod n) + 1`.
    pub fn rotate(&self, s: i64) -> CircSet {
        let n = self.n;
        let s = s.rem_euclid(n as i64) as u32;
        if s == 0 {
            return *self;
        }
        let full = full_mask(n);
        let mask = ((self.mask << s) | (self.mask >> (n - s))) & full;
        CircSet { n, mask }
    }

    /// Reflection `a -> ((n + 1 - a) mod n) + 1`, which fixes 1.
    pub fn reflect(&self) -> CircSet {
        let n = self.n;
        let mut mask = 0u64;
        for a in self.iter() {
            let b = ((n + 1 - a) % n) + 1;
            mask |= 1 << (b - 1);
        }
        CircSet { n, mask }
    }

    /// Applies the dihedral symmetry `sym` to the set.
    pub fn apply(&self, sym: Symmetry) -> CircSet {
        let base = if sym.reflect { self.reflect() } else { *self };
        base.rotate(sym.shift as i64)
    }

    /// Same elements on a different circle. Fails if an element exceeds `n`.
    pub fn with_ambient(&self, n: u32) -> Result<CircSet> {
        CircSet::from_mask(n, self.mask)
    }

    /// Set with element `a` removed, or `None` when that would leave it empty.
    pub fn without(&self, a: u32) -> Option<CircSet> {
        let mask = self.mask & !(1u64 << (a - 1));
        (mask != 0).then_some(CircSet { n: self.n, mask })
    }
}

impl Ord for CircSet {
    /// Ambient size first, then lexicographic order of the sorted elements.
    fn cmp(&self, other: &Self) -> Ordering {
        self.n
            .cmp(&other.n)
            .then_with(|| lex_cmp(self.mask, other.mask))
    }
}

impl PartialOrd for CircSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Lexicographic comparison of the sorted element lists encoded by two masks.
fn lex_cmp(a: u64, b: u64) -> Ordering {
    let diff = a ^ b;
    if diff == 0 {
        return Ordering::Equal;
    }
    let p = diff.trailing_zeros();
    let above = if p == 63 { 0 } else { u64::MAX << (p + 1) };
    if a & (1 << p) != 0 {
        // a's next element is p + 1; b's next is above p, or b has ended.
        if b & above != 0 {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    } else if a & above != 0 {
        Ordering::Greater
    } else {
        Ordering::Less
    }
}

impl fmt::Display for CircSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, a) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for CircSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}/{}", self.n)
    }
}

/// Circular gap encoding of a [`CircSet`]: positive entries summing to `n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GapVector(Vec<u32>);

impl GapVector {
    pub fn new(gaps: Vec<u32>) -> Result<Self> {
        if gaps.is_empty() {
            return Err(Error::EmptySet);
        }
        if gaps.contains(&0) {
            let n = gaps.iter().sum();
            return Err(Error::BadGaps { gaps, n });
        }
        Ok(GapVector(gaps))
    }

    pub fn gaps(&self) -> &[u32] {
        &self.0
    }

    pub fn total(&self) -> u64 {
        self.0.iter().map(|&g| g as u64).sum()
    }

    pub fn min(&self) -> u32 {
        self.0.iter().copied().min().unwrap_or(0)
    }
}

/// An element of the dihedral group acting on `[n]`: optional reflection
/// `a -> n + 2 - a (mod n)` followed by rotation by `shift`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Symmetry {
    pub shift: u32,
    pub reflect: bool,
}

/// Which symmetry group of the circle is used to identify families.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Group {
    #[default]
    Dihedral,
    Rotations,
}

impl Group {
    pub fn from_rotations_only(rotations_only: bool) -> Self {
        if rotations_only {
            Group::Rotations
        } else {
            Group::Dihedral
        }
    }

    /// All group elements acting on `[n]`; the identity comes first.
    pub fn elements(self, n: u32) -> Vec<Symmetry> {
        let mut out: Vec<Symmetry> = (0..n)
            .map(|shift| Symmetry {
                shift,
                reflect: false,
            })
            .collect();
        if self == Group::Dihedral {
            out.extend((0..n).map(|shift| Symmetry {
                shift,
                reflect: true,
            }));
        }
        out
    }
}

/// `binomial(m, j)` with overflow detection.
pub fn binomial(m: u64, j: u64) -> Option<u128> {
    if j > m {
        return Some(0);
    }
    let j = j.min(m - j);
    let mut acc: u128 = 1;
    for i in 0..j {
        // acc * (m - i) is divisible by (i + 1) since acc = C(m, i).
        acc = acc.checked_mul((m - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

fn check_params(n: u32, r: u32) -> Result<()> {
    check_n(n)?;
    if r == 0 {
        return Err(Error::EmptySet);
    }
    Ok(())
}

/// Size of the star `{A in [n]^(r)_k : 1 in A}`, namely `binomial(n - kr - 1, r - 1)`.
pub fn count_star_formula(n: u32, r: u32, k: u32) -> Result<u128> {
    if r == 0 {
        return Err(Error::EmptySet);
    }
    let need = (k as u64 + 1) * r as u64;
    if (n as u64) < need {
        return Err(Error::TooFewPoints { n, r, k });
    }
    let top = n as u64 - k as u64 * r as u64 - 1;
    binomial(top, r as u64 - 1)
        .ok_or_else(|| Error::Overflow(format!("binomial({top}, {})", r - 1)))
}

/// Every k-separated r-subset of the circle `[n]`, in lexicographic order.
///
/// Returns an empty family when `n < (k+1)r`.
pub fn enumerate_separated(n: u32, r: u32, k: u32) -> Result<SetFamily> {
    check_params(n, r)?;
    let sets = separated_sets(n, r, k);
    Ok(SetFamily::from_sorted_unchecked(n, r, k, sets))
}

pub(crate) fn separated_sets(n: u32, r: u32, k: u32) -> Vec<CircSet> {
    let mut out = Vec::new();
    if (n as u64) < (k as u64 + 1) * r as u64 {
        return out;
    }
    let mut elems = Vec::with_capacity(r as usize);
    extend_separated(n, r, k, 1, 0, &mut elems, &mut out);
    out
}

fn extend_separated(
    n: u32,
    r: u32,
    k: u32,
    lo: u32,
    mask: u64,
    elems: &mut Vec<u32>,
    out: &mut Vec<CircSet>,
) {
    let placed = elems.len() as u32;
    if placed == r {
        let first = elems[0];
        let last = elems[elems.len() - 1];
        if first + n - last > k {
            out.push(CircSet { n, mask });
        }
        return;
    }
    // The remaining r - placed elements need (k+1) spacing after `a`, plus
    // the wrap-around gap back to the first element.
    let remaining = r - placed - 1;
    let first = elems.first().copied();
    let mut a = lo;
    loop {
        let span_after = remaining * (k + 1);
        let limit = match first {
            Some(f) => n.min(f + n - k - 1),
            None => n,
        };
        if a + span_after > limit {
            break;
        }
        elems.push(a);
        extend_separated(n, r, k, a + k + 1, mask | (1 << (a - 1)), elems, out);
        elems.pop();
        a += 1;
    }
}

/// Every r-subset of `[n]` (the Kneser vertex set), in lexicographic order.
pub fn enumerate_all(n: u32, r: u32) -> Result<SetFamily> {
    enumerate_separated(n, r, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(n: u32, e: &[u32]) -> CircSet {
        CircSet::new(n, e).unwrap()
    }

    #[test]
    fn separation_examples() {
        assert!(set(4, &[1, 3]).is_k_separated(1));
        assert!(!set(8, &[1, 2, 5]).is_k_separated(1));
        assert!(set(9, &[1, 4, 7]).is_k_separated(2));
        assert!(set(5, &[3]).is_k_separated(4));
        assert!(!set(5, &[3]).is_k_separated(5));
        assert!(set(3, &[1, 2, 3]).is_k_separated(0));
    }

    #[test]
    fn gap_examples() {
        assert_eq!(set(8, &[1, 3, 6]).gap_vector().gaps(), &[2, 3, 3]);
        assert_eq!(set(5, &[1]).gap_vector().gaps(), &[5]);
        assert_eq!(set(4, &[2, 4]).gap_vector().gaps(), &[2, 2]);
    }

    #[test]
    fn from_gaps_examples() {
        let g = |v: Vec<u32>| GapVector::new(v).unwrap();
        assert_eq!(
            CircSet::from_gaps(1, &g(vec![2, 2]), 4).unwrap(),
            set(4, &[1, 3])
        );
        assert_eq!(
            CircSet::from_gaps(3, &g(vec![3, 3, 3]), 9).unwrap(),
            set(9, &[3, 6, 9])
        );
        assert_eq!(
            CircSet::from_gaps(1, &g(vec![2, 4]), 6).unwrap(),
            set(6, &[1, 3])
        );
        assert_eq!(
            CircSet::from_gaps(3, &g(vec![2, 2]), 4).unwrap(),
            set(4, &[1, 3])
        );
        assert!(matches!(
            CircSet::from_gaps(1, &g(vec![2, 3]), 6),
            Err(Error::BadGaps { .. })
        ));
        assert!(GapVector::new(vec![2, 0, 4]).is_err());
    }

    #[test]
    fn rotate_and_reflect_examples() {
        assert_eq!(set(4, &[1, 3]).rotate(1), set(4, &[2, 4]));
        assert_eq!(set(4, &[1, 3]).rotate(4), set(4, &[1, 3]));
        assert_eq!(set(9, &[3, 6, 9]).rotate(3), set(9, &[3, 6, 9]));
        assert_eq!(set(5, &[1, 3]).rotate(-1), set(5, &[2, 5]));
        assert_eq!(set(5, &[1, 3]).reflect(), set(5, &[1, 4]));
        let a = set(12, &[2, 5, 9]);
        assert_eq!(a.reflect().reflect(), a);
        let b = set(64, &[1, 64]);
        assert_eq!(b.rotate(1), set(64, &[1, 2]));
    }

    #[test]
    fn reflect_of_periodic_set_is_a_rotation() {
        let a = set(9, &[1, 4, 7]);
        let image = a.reflect();
        assert!((0..9).any(|s| a.rotate(s) == image));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(CircSet::new(4, &[]), Err(Error::EmptySet)));
        assert!(matches!(
            CircSet::new(4, &[3, 1]),
            Err(Error::NotIncreasing { .. })
        ));
        assert!(matches!(
            CircSet::new(4, &[1, 5]),
            Err(Error::ElementOutOfRange { .. })
        ));
        assert!(matches!(
            CircSet::new(65, &[1]),
            Err(Error::GroundSize { .. })
        ));
        assert!(matches!(enumerate_separated(5, 0, 1), Err(Error::EmptySet)));
    }

    #[test]
    fn lexicographic_order() {
        let mut v = vec![
            set(6, &[2, 4]),
            set(6, &[1, 4]),
            set(6, &[1]),
            set(6, &[1, 3, 5]),
        ];
        v.sort();
        assert_eq!(
            v,
            vec![
                set(6, &[1]),
                set(6, &[1, 3, 5]),
                set(6, &[1, 4]),
                set(6, &[2, 4])
            ]
        );
    }

    #[test]
    fn enumeration_examples() {
        let f = enumerate_separated(4, 2, 1).unwrap();
        assert_eq!(f.sets(), &[set(4, &[1, 3]), set(4, &[2, 4])]);
        let f = enumerate_separated(6, 2, 2).unwrap();
        assert_eq!(
            f.sets(),
            &[set(6, &[1, 4]), set(6, &[2, 5]), set(6, &[3, 6])]
        );
        assert_eq!(enumerate_separated(5, 2, 1).unwrap().len(), 5);
        assert!(enumerate_separated(5, 3, 1).unwrap().is_empty());
        assert_eq!(enumerate_all(5, 2).unwrap().len(), 10);
        assert_eq!(enumerate_separated(1, 1, 0).unwrap().len(), 1);
    }

    #[test]
    fn star_counts() {
        for r in 1..6 {
            assert_eq!(count_star_formula(2 * r, r, 1).unwrap(), 1);
        }
        assert_eq!(count_star_formula(7, 2, 1).unwrap(), 4);
        assert_eq!(count_star_formula(10, 3, 1).unwrap(), 15);
        assert!(matches!(
            count_star_formula(5, 3, 1),
            Err(Error::TooFewPoints { .. })
        ));
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(7, 3), Some(35));
        assert_eq!(binomial(11, 5), Some(462));
        assert_eq!(binomial(3, 5), Some(0));
        assert_eq!(binomial(0, 0), Some(1));
        assert_eq!(binomial(64, 32), Some(1_832_624_140_942_590_534));
        assert_eq!(binomial(200, 100), None);
    }

    #[test]
    fn serde_shape() {
        let a = set(7, &[1, 3, 5]);
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(json, r#"{"n":7,"elems":[1,3,5]}"#);
        let back: CircSet = serde_json::from_str(&json).unwrap();
        assert_eq!(back, a);
        assert!(serde_json::from_str::<CircSet>(r#"{"n":3,"elems":[1,5]}"#).is_err());
    }
}
