//! The compression `f : [n] -> [n-1]` (1 stays put, every other point moves
//! down by one), the partition of an intersecting family by how its members
//! behave under `f`, the derived (r-1)-set family, and per-instance checks
//! of the structural facts the size bound rests on.
//!
//! Every [`CircSet`] carries its ambient size and `f` decrements it, so
//! membership in `[m]^(s)_k` is always read off the set itself.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::circ::CircSet;
use crate::error::{Error, Result};
use crate::family::{first_disjoint_pair, SetFamily};
use crate::par::Parallelism;

/// Image of `a` under `f`, on the circle `[n-1]`. If `a` holds both 1 and 2
/// they merge and the image has one element fewer.
pub fn f_map(a: &CircSet) -> Result<CircSet> {
    let n = a.n();
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "compression needs n >= 2, got {a:?}"
        )));
    }
    let m = a.mask();
    let mask = (m & 1) | (m >> 1);
    Ok(CircSet::from_mask_unchecked(n - 1, mask))
}

/// `f` applied `j` times; the result lives on `[n-j]`.
pub fn f_iter(a: &CircSet, j: u32) -> Result<CircSet> {
    if a.n() < j || a.n() - j < a.len() {
        return Err(Error::InvalidParameter(format!(
            "cannot compress {a:?} {j} times: n - j < r"
        )));
    }
    let mut cur = *a;
    for _ in 0..j {
        cur = f_map(&cur)?;
    }
    Ok(cur)
}

/// `{f(A) : A in sets}` as a sorted set.
pub fn f_image<'a>(sets: impl IntoIterator<Item = &'a CircSet>) -> Result<BTreeSet<CircSet>> {
    sets.into_iter().map(f_map).collect()
}

fn f_iter_image<'a>(
    sets: impl IntoIterator<Item = &'a CircSet>,
    j: u32,
) -> Result<BTreeSet<CircSet>> {
    sets.into_iter().map(|s| f_iter(s, j)).collect()
}

/// `G - {1}`: removes element 1 from every member. Members without 1 are
/// an error.
pub fn remove_one<'a>(sets: impl IntoIterator<Item = &'a CircSet>) -> Result<BTreeSet<CircSet>> {
    sets.into_iter()
        .map(|s| {
            if !s.contains(1) {
                return Err(Error::MissingOne { set: *s });
            }
            s.without(1).ok_or(Error::EmptySet)
        })
        .collect()
}

/// Classification of a family in `[n]^(r)_k` by the behaviour of `f`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PartitionResult {
    /// Members without 1 whose image stays k-separated on `[n-1]`.
    pub b: SetFamily,
    /// Members with 1 whose image stays k-separated on `[n-1]`.
    pub c: SetFamily,
    /// `d[0]`: members containing `{1, k+2}`; `d[i]`: members containing
    /// `{n+1-i, k+2-i}` for `1 <= i <= k`.
    pub d: Vec<SetFamily>,
    /// Members that fit no class or more than one. Empty for every
    /// k-separated input.
    pub anomalies: Vec<CircSet>,
}

impl PartitionResult {
    pub fn is_exact(&self) -> bool {
        self.anomalies.is_empty()
    }

    pub fn n(&self) -> u32 {
        self.b.n()
    }

    pub fn r(&self) -> u32 {
        self.b.r()
    }

    pub fn k(&self) -> u32 {
        self.b.k()
    }

    pub fn total(&self) -> usize {
        self.b.len() + self.c.len() + self.d.iter().map(SetFamily::len).sum::<usize>()
    }
}

fn check_compressible(n: u32, r: u32, k: u32) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParameter(
            "compression analysis needs k >= 1".into(),
        ));
    }
    if (n as u64) < (k as u64 + 1) * r as u64 + 1 {
        return Err(Error::InvalidParameter(format!(
            "compression needs n >= (k+1)r + 1, got n={n}, r={r}, k={k}"
        )));
    }
    Ok(())
}

fn pair_mask(x: u32, y: u32) -> u64 {
    (1u64 << (x - 1)) | (1u64 << (y - 1))
}

/// Splits `family` into `B`, `C`, `D_0..D_k`.
pub fn partition_family(family: &SetFamily) -> Result<PartitionResult> {
    let (n, r, k) = family.params();
    check_compressible(n, r, k)?;
    let d_pairs: Vec<u64> = (0..=k)
        .map(|i| {
            if i == 0 {
                pair_mask(1, k + 2)
            } else {
                pair_mask(n + 1 - i, k + 2 - i)
            }
        })
        .collect();

    let mut b = Vec::new();
    let mut c = Vec::new();
    let mut d: Vec<Vec<CircSet>> = vec![Vec::new(); k as usize + 1];
    let mut anomalies = Vec::new();
    for a in family {
        let image = f_map(a)?;
        let stays = image.len() == r && image.is_k_separated(k);
        let hits: Vec<usize> = d_pairs
            .iter()
            .enumerate()
            .filter(|(_, &p)| a.mask() & p == p)
            .map(|(i, _)| i)
            .collect();
        if stays {
            if !hits.is_empty() {
                anomalies.push(*a);
            }
            if a.contains(1) {
                c.push(*a);
            } else {
                b.push(*a);
            }
        } else {
            if let Some(&i) = hits.first() {
                d[i].push(*a);
            }
            if hits.len() != 1 {
                anomalies.push(*a);
            }
        }
    }
    let fam = |v: Vec<CircSet>| SetFamily::from_sorted_unchecked(n, r, k, v);
    Ok(PartitionResult {
        b: fam(b),
        c: fam(c),
        d: d.into_iter().map(fam).collect(),
        anomalies,
    })
}

/// A named check with the sets that witness a failure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClauseResult {
    pub clause_id: String,
    pub passed: bool,
    pub witnesses: Vec<CircSet>,
}

impl ClauseResult {
    fn new(id: &str, witnesses: Vec<CircSet>) -> Self {
        ClauseResult {
            clause_id: id.to_string(),
            passed: witnesses.is_empty(),
            witnesses,
        }
    }

    /// A check with no natural witnesses, e.g. a counting identity.
    fn check(id: &str, ok: bool, context: Vec<CircSet>) -> Self {
        ClauseResult {
            clause_id: id.to_string(),
            passed: ok,
            witnesses: if ok { Vec::new() } else { context },
        }
    }
}

/// The families built from a partition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DerivedFamilies {
    /// `f(B) ∩ f(C)`, on `[n-1]`.
    pub e: SetFamily,
    /// `f^{k-1}(E) - {1}`, on `[n-k]`.
    pub e_part: Vec<CircSet>,
    /// `f^k(D_i) - {1}`, on `[n-k]`.
    pub d_parts: Vec<Vec<CircSet>>,
    /// Union of `e_part` and all `d_parts`: the (r-1)-set family.
    pub f: Vec<CircSet>,
    /// `f(F)`, on `[n-k-1]`.
    pub f_image: Vec<CircSet>,
    /// Structural violations found while assembling `F`.
    pub violations: Vec<ClauseResult>,
}

impl DerivedFamilies {
    /// `F` as a validated family in `[n-k]^(r-1)_k`.
    pub fn f_family(&self, n: u32, r: u32, k: u32) -> Result<SetFamily> {
        SetFamily::new(n - k, r - 1, k, self.f.iter().copied())
    }
}

/// Builds `E = f(B) ∩ f(C)` and
/// `F = (f^{k-1}(E) - {1}) ∪ ⋃_i (f^k(D_i) - {1})`, together with `f(F)`.
///
/// Runs on any partition; the disjointness of the parts and membership of
/// `F` in `[n-k]^(r-1)_k` are checked and reported in `violations` rather
/// than assumed.
pub fn derive_families(p: &PartitionResult) -> Result<DerivedFamilies> {
    let (n, r, k) = (p.n(), p.r(), p.k());
    check_compressible(n, r, k)?;
    if r < 2 {
        return Err(Error::InvalidParameter(
            "the derived family needs r >= 2".into(),
        ));
    }
    let fb = f_image(p.b.iter())?;
    let fc = f_image(p.c.iter())?;
    let e_sets: Vec<CircSet> = fb.intersection(&fc).copied().collect();
    let e = SetFamily::from_sorted_unchecked(n - 1, r, k, e_sets);

    let e_part = remove_one(f_iter_image(e.iter(), k - 1)?.iter())?;
    let mut d_parts = Vec::with_capacity(p.d.len());
    for di in &p.d {
        d_parts.push(remove_one(f_iter_image(di.iter(), k)?.iter())?);
    }

    let mut violations = Vec::new();
    let mut parts: Vec<&BTreeSet<CircSet>> = vec![&e_part];
    parts.extend(d_parts.iter());
    let mut shared = Vec::new();
    for (i, x) in parts.iter().enumerate() {
        for y in &parts[i + 1..] {
            shared.extend(x.intersection(y).copied());
        }
    }
    let union: BTreeSet<CircSet> = parts.iter().flat_map(|s| s.iter().copied()).collect();
    let outside: Vec<CircSet> = union
        .iter()
        .filter(|s| !(s.n() == n - k && s.len() == r - 1 && s.is_k_separated(k)))
        .copied()
        .collect();
    if !shared.is_empty() {
        violations.push(ClauseResult::new("derived_disjoint", shared));
    }
    if !outside.is_empty() {
        violations.push(ClauseResult::new("derived_separated", outside));
    }

    let f_image = f_image(union.iter())?.into_iter().collect();
    Ok(DerivedFamilies {
        e,
        e_part: e_part.into_iter().collect(),
        d_parts: d_parts
            .into_iter()
            .map(|s| s.into_iter().collect())
            .collect(),
        f: union.into_iter().collect(),
        f_image,
        violations,
    })
}

/// Outcome of every structural check on one intersecting family.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LemmaReport {
    pub n: u32,
    pub r: u32,
    pub k: u32,
    pub size: usize,
    pub clauses: Vec<ClauseResult>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.clauses.iter().all(|c| c.passed)
    }

    pub fn failed_clauses(&self) -> Vec<&str> {
        self.clauses
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.clause_id.as_str())
            .collect()
    }

    pub fn clause(&self, id: &str) -> Option<&ClauseResult> {
        self.clauses.iter().find(|c| c.clause_id == id)
    }
}

/// Pairs of distinct members with equal `f^j` images whose symmetric
/// difference is not `{c, d}` with `1 <= c < d <= j + 1`.
fn collision_violations(sets: &[CircSet], j: u32) -> Result<Vec<CircSet>> {
    let mut groups: BTreeMap<CircSet, Vec<CircSet>> = BTreeMap::new();
    for s in sets {
        groups.entry(f_iter(s, j)?).or_default().push(*s);
    }
    let low = if j + 1 >= 64 {
        u64::MAX
    } else {
        (1u64 << (j + 1)) - 1
    };
    let mut bad = Vec::new();
    for members in groups.values() {
        for (i, a) in members.iter().enumerate() {
            for b in &members[i + 1..] {
                let diff = a.mask() ^ b.mask();
                if diff.count_ones() != 2 || diff & !low != 0 {
                    bad.push(*a);
                    bad.push(*b);
                }
            }
        }
    }
    Ok(bad)
}

fn colliding(sets: &[CircSet]) -> Result<Vec<CircSet>> {
    let mut seen: BTreeMap<CircSet, CircSet> = BTreeMap::new();
    let mut bad = Vec::new();
    for s in sets {
        if let Some(prev) = seen.insert(f_map(s)?, *s) {
            bad.push(prev);
            bad.push(*s);
        }
    }
    Ok(bad)
}

fn intersecting_witness(sets: &[CircSet]) -> Vec<CircSet> {
    first_disjoint_pair(sets)
        .map(|(a, b)| vec![a, b])
        .unwrap_or_default()
}

/// For `k = 1` the partition can also be read off pairs of points:
/// `B`: no 1 and not both 2 and n; `C`: 1 but not 3; `D_0`: 1 and 3;
/// `D_1`: 2 and n. Returns members classified differently by the two rules.
fn pair_rule_mismatches(family: &SetFamily, p: &PartitionResult) -> Vec<CircSet> {
    let n = family.n();
    let mut bad = Vec::new();
    for a in family {
        let has = |x: u32| a.contains(x);
        let expected = if has(1) && has(3) {
            &p.d[0]
        } else if has(2) && has(n) {
            &p.d[1]
        } else if has(1) {
            &p.c
        } else {
            &p.b
        };
        if !expected.contains(a) {
            bad.push(*a);
        }
    }
    bad
}

/// Checks, for one intersecting `family ⊆ [n]^(r)_k` with `n >= (k+1)r + 1`:
/// the partition is exact; `f^j` collisions (`j <= k`) differ in two points of
/// `[j+1]`; `f` is injective on `B` and on `C`; `f(B ∪ C)` is k-separated on
/// `[n-1]` and intersecting; the parts of `F` are disjoint; `F` lies in
/// `[n-k]^(r-1)_k` and is intersecting; `f(F)` lies in `[n-k-1]^(r-1)_k`
/// with `|f(F)| = |F|`; and `|A| = |f(B) ∪ f(C)| + |F|`.
pub fn verify_lemma_suite(family: &SetFamily) -> Result<LemmaReport> {
    let (n, r, k) = family.params();
    check_compressible(n, r, k)?;
    if r < 2 {
        return Err(Error::InvalidParameter(
            "the derived family needs r >= 2".into(),
        ));
    }
    if let Some((a, b)) = first_disjoint_pair(family.sets()) {
        return Err(Error::NotIntersecting { a, b });
    }

    let p = partition_family(family)?;
    let derived = derive_families(&p)?;
    let mut clauses = Vec::new();

    clauses.push(ClauseResult::new("partition_exact", p.anomalies.clone()));
    if k == 1 {
        clauses.push(ClauseResult::new(
            "k1_pair_rule",
            pair_rule_mismatches(family, &p),
        ));
    }

    let mut collisions = Vec::new();
    for j in 1..=k {
        collisions.extend(collision_violations(family.sets(), j)?);
    }
    clauses.push(ClauseResult::new(
        "collision_symmetric_difference",
        collisions,
    ));

    let mut injective = colliding(p.b.sets())?;
    injective.extend(colliding(p.c.sets())?);
    clauses.push(ClauseResult::new("compression_injective", injective));

    let bc: Vec<CircSet> = p.b.iter().chain(p.c.iter()).copied().collect();
    let fbc: Vec<CircSet> = f_image(bc.iter())?.into_iter().collect();
    let not_sep: Vec<CircSet> = fbc
        .iter()
        .filter(|s| !(s.n() == n - 1 && s.len() == r && s.is_k_separated(k)))
        .copied()
        .collect();
    clauses.push(ClauseResult::new("compression_separated", not_sep));
    clauses.push(ClauseResult::new(
        "compression_intersecting",
        intersecting_witness(&fbc),
    ));
    let f_all: Vec<CircSet> = f_image(family.iter())?.into_iter().collect();
    clauses.push(ClauseResult::new(
        "compression_preserves_intersecting",
        intersecting_witness(&f_all),
    ));

    let find = |id: &str| {
        derived
            .violations
            .iter()
            .find(|v| v.clause_id == id)
            .map(|v| v.witnesses.clone())
            .unwrap_or_default()
    };
    clauses.push(ClauseResult::new(
        "derived_disjoint",
        find("derived_disjoint"),
    ));
    clauses.push(ClauseResult::new(
        "derived_separated",
        find("derived_separated"),
    ));
    clauses.push(ClauseResult::new(
        "derived_intersecting",
        intersecting_witness(&derived.f),
    ));
    let image_bad: Vec<CircSet> = derived
        .f_image
        .iter()
        .filter(|s| !(s.n() == n - k - 1 && s.len() == r - 1 && s.is_k_separated(k)))
        .copied()
        .collect();
    clauses.push(ClauseResult::new("derived_image_separated", image_bad));
    clauses.push(ClauseResult::check(
        "derived_image_injective",
        derived.f_image.len() == derived.f.len(),
        derived.f.clone(),
    ));

    let parts_sum: usize =
        derived.e_part.len() + derived.d_parts.iter().map(Vec::len).sum::<usize>();
    let sources: usize = derived.e.len() + p.d.iter().map(SetFamily::len).sum::<usize>();
    clauses.push(ClauseResult::check(
        "derived_size",
        derived.f.len() == parts_sum && parts_sum == sources,
        derived.f.clone(),
    ));
    clauses.push(ClauseResult::check(
        "counting_identity",
        family.len() == fbc.len() + derived.f.len(),
        Vec::new(),
    ));

    Ok(LemmaReport {
        n,
        r,
        k,
        size: family.len(),
        clauses,
    })
}

/// Summary of the lemma suite over many random maximal intersecting
/// families at one parameter point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LemmaSweep {
    pub n: u32,
    pub r: u32,
    pub k: u32,
    pub samples: usize,
    pub passed: usize,
    /// `(sample index, failing clause ids)`.
    pub failures: Vec<(usize, Vec<String>)>,
}

impl LemmaSweep {
    pub fn all_passed(&self) -> bool {
        self.failures.is_empty() && self.passed == self.samples
    }
}

/// Seed for one sample, derived from the sweep seed and the parameters so
/// samples can be drawn in any order.
pub fn sample_seed(seed: u64, n: u32, r: u32, k: u32, index: usize) -> u64 {
    let mut h = seed ^ 0x9E37_79B9_7F4A_7C15;
    for x in [n as u64, r as u64, k as u64, index as u64] {
        h = (h ^ x).wrapping_mul(0x0100_0000_01B3).rotate_left(29);
    }
    h
}

/// Runs [`verify_lemma_suite`] on `samples` random maximal intersecting
/// subfamilies of `[n]^(r)_k`.
pub fn lemma_sweep(
    n: u32,
    r: u32,
    k: u32,
    samples: usize,
    seed: u64,
    par: Parallelism,
) -> Result<LemmaSweep> {
    use rand::SeedableRng;
    check_compressible(n, r, k)?;
    let idx: Vec<usize> = (0..samples).collect();
    let results = par.map(&idx, |&i| -> Result<LemmaReport> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(sample_seed(seed, n, r, k, i));
        let fam = crate::family::random_maximal_intersecting(n, r, k, &mut rng)?;
        verify_lemma_suite(&fam)
    });
    let mut failures = Vec::new();
    let mut passed = 0;
    for (i, res) in results.into_iter().enumerate() {
        let report = res?;
        if report.passed() {
            passed += 1;
        } else {
            failures.push((
                i,
                report
                    .failed_clauses()
                    .iter()
                    .map(|s| s.to_string())
                    .collect(),
            ));
        }
    }
    Ok(LemmaSweep {
        n,
        r,
        k,
        samples,
        passed,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::star_family;

    fn set(n: u32, e: &[u32]) -> CircSet {
        CircSet::new(n, e).unwrap()
    }

    fn fam(n: u32, r: u32, k: u32, sets: &[&[u32]]) -> SetFamily {
        SetFamily::new(n, r, k, sets.iter().map(|e| set(n, e))).unwrap()
    }

    #[test]
    fn f_examples() {
        assert_eq!(f_map(&set(10, &[2, 5, 9])).unwrap(), set(9, &[1, 4, 8]));
        assert_eq!(f_map(&set(8, &[1, 3, 6])).unwrap(), set(7, &[1, 2, 5]));
        assert_eq!(f_map(&set(5, &[1, 2])).unwrap(), set(4, &[1]));
        assert!(f_map(&set(1, &[1])).is_err());
    }

    #[test]
    fn f_iter_examples() {
        let a = set(9, &[1, 4, 7]);
        assert_eq!(f_iter(&a, 0).unwrap(), a);
        assert_eq!(f_iter(&a, 2).unwrap(), set(7, &[1, 2, 5]));
        assert!(f_iter(&a, 7).is_err());
        let a = set(9, &[1, 5, 7]);
        let b = set(9, &[2, 5, 7]);
        assert_eq!(f_map(&a).unwrap(), f_map(&b).unwrap());
    }

    #[test]
    fn partition_examples() {
        let p = partition_family(&star_family(6, 2, 1, 1).unwrap()).unwrap();
        assert!(p.b.is_empty());
        assert_eq!(p.c, fam(6, 2, 1, &[&[1, 4], &[1, 5]]));
        assert_eq!(p.d[0], fam(6, 2, 1, &[&[1, 3]]));
        assert!(p.d[1].is_empty());
        assert!(p.is_exact());

        let p = partition_family(&fam(6, 2, 1, &[&[2, 4]])).unwrap();
        assert_eq!(p.b.len(), 1);
        assert_eq!(p.total(), 1);

        let p = partition_family(&fam(6, 2, 1, &[&[2, 6]])).unwrap();
        assert_eq!(p.d[1], fam(6, 2, 1, &[&[2, 6]]));
        assert_eq!(p.total(), 1);
    }

    #[test]
    fn partition_rejects_base_case() {
        let f = star_family(6, 3, 1, 1).unwrap();
        assert!(partition_family(&f).is_err());
        let f = star_family(6, 2, 0, 1).unwrap();
        assert!(partition_family(&f).is_err());
    }

    #[test]
    fn derived_examples() {
        let p = partition_family(&star_family(6, 2, 1, 1).unwrap()).unwrap();
        let d = derive_families(&p).unwrap();
        assert!(d.e.is_empty());
        assert_eq!(d.f, vec![set(5, &[2])]);
        assert!(d.violations.is_empty());

        let p = partition_family(&fam(9, 3, 1, &[&[2, 5, 7]])).unwrap();
        let d = derive_families(&p).unwrap();
        assert!(d.f.len() <= 1);
    }

    #[test]
    fn derived_size_identity_on_star() {
        let star = star_family(8, 2, 1, 1).unwrap();
        let p = partition_family(&star).unwrap();
        let d = derive_families(&p).unwrap();
        let sources = d.e.len() + p.d.iter().map(SetFamily::len).sum::<usize>();
        assert_eq!(d.f.len(), sources);
    }

    #[test]
    fn remove_one_requires_one() {
        let s = [set(5, &[2, 4])];
        assert!(matches!(
            remove_one(s.iter()),
            Err(Error::MissingOne { .. })
        ));
    }

    #[test]
    fn suite_examples() {
        let report = verify_lemma_suite(&star_family(10, 3, 1, 1).unwrap()).unwrap();
        assert!(report.passed(), "{:?}", report.failed_clauses());
        assert_eq!(report.size, 15);

        let report = verify_lemma_suite(&star_family(9, 2, 2, 1).unwrap()).unwrap();
        assert!(report.passed(), "{:?}", report.failed_clauses());
        assert!(report.clause("k1_pair_rule").is_none());

        let err = verify_lemma_suite(&fam(6, 2, 1, &[&[1, 3], &[2, 4]])).unwrap_err();
        assert!(matches!(err, Error::NotIntersecting { .. }));
    }

    #[test]
    fn report_json_shape() {
        let report = verify_lemma_suite(&star_family(7, 2, 1, 1).unwrap()).unwrap();
        let v = serde_json::to_value(&report).unwrap();
        let first = &v["clauses"][0];
        assert_eq!(first["clause_id"], "partition_exact");
        assert_eq!(first["passed"], true);
        assert!(first["witnesses"].as_array().unwrap().is_empty());
    }

    #[test]
    fn sweep_is_deterministic() {
        let a = lemma_sweep(9, 2, 1, 10, 42, Parallelism::SEQUENTIAL).unwrap();
        let b = lemma_sweep(9, 2, 1, 10, 42, Parallelism::threads(3)).unwrap();
        assert_eq!(a, b);
        assert!(a.all_passed());
    }
}
