//! Brute-force oracles, written against plain `Vec<u32>` sets and sharing no
//! code with the library, cross-checked against the library on small
//! instances.

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sepekr::compression::{derive_families, partition_family, verify_lemma_suite};
use sepekr::family::random_maximal_intersecting;
use sepekr::graph::{build_schrijver, independence_number};
use sepekr::{
    count_star_formula, enumerate_separated, extremal_classes, max_intersecting, CircSet,
    Parallelism, SearchConfig,
};

type Set = Vec<u32>;

fn separated(s: &[u32], n: u32, k: u32) -> bool {
    let r = s.len();
    (0..r).all(|i| {
        let next = if i + 1 < r { s[i + 1] } else { s[0] + n };
        next - s[i] > k
    })
}

/// Every k-separated r-subset of [n], by filtering all bitmasks.
fn brute_sets(n: u32, r: u32, k: u32) -> Vec<Set> {
    let mut out: Vec<Set> = (0u64..1 << n)
        .filter(|m| m.count_ones() == r)
        .map(|m| (1..=n).filter(|&i| m >> (i - 1) & 1 == 1).collect::<Set>())
        .filter(|s| separated(s, n, k))
        .collect();
    out.sort();
    out
}

fn meets(a: &[u32], b: &[u32]) -> bool {
    a.iter().any(|x| b.contains(x))
}

/// All maximum intersecting subfamilies, by plain include/exclude recursion
/// with a remaining-count bound.
fn brute_max_families(sets: &[Set]) -> (usize, Vec<Vec<usize>>) {
    fn go(
        sets: &[Set],
        i: usize,
        chosen: &mut Vec<usize>,
        best: &mut usize,
        all: &mut Vec<Vec<usize>>,
    ) {
        if chosen.len() + (sets.len() - i) < *best {
            return;
        }
        if i == sets.len() {
            if chosen.len() > *best {
                *best = chosen.len();
                all.clear();
            }
            if chosen.len() == *best {
                all.push(chosen.clone());
            }
            return;
        }
        if chosen.iter().all(|&j| meets(&sets[j], &sets[i])) {
            chosen.push(i);
            go(sets, i + 1, chosen, best, all);
            chosen.pop();
        }
        go(sets, i + 1, chosen, best, all);
    }
    let mut best = 0;
    let mut all = Vec::new();
    go(sets, 0, &mut Vec::new(), &mut best, &mut all);
    (best, all)
}

fn dihedral_image(s: &[u32], n: u32, shift: u32, reflect: bool) -> Set {
    let mut out: Set = s
        .iter()
        .map(|&x| {
            let x = if reflect { n + 1 - x } else { x };
            (x - 1 + shift) % n + 1
        })
        .collect();
    out.sort();
    out
}

fn canonical(family: &[Set], n: u32) -> Vec<Set> {
    let mut best: Option<Vec<Set>> = None;
    for shift in 0..n {
        for reflect in [false, true] {
            let mut img: Vec<Set> = family
                .iter()
                .map(|s| dihedral_image(s, n, shift, reflect))
                .collect();
            img.sort();
            if best.as_ref().is_none_or(|b| img < *b) {
                best = Some(img);
            }
        }
    }
    best.unwrap_or_default()
}

fn small_points(max_universe: usize) -> Vec<(u32, u32, u32)> {
    let mut pts = Vec::new();
    for k in 1..=3 {
        for r in 2..=4 {
            for n in (k + 1) * r..=16 {
                let count = count_star_formula(n, r, k).unwrap() * n as u128 / r as u128;
                if count as usize <= max_universe {
                    pts.push((n, r, k));
                }
            }
        }
    }
    pts
}

#[test]
fn enumeration_matches_bitmask_filter() {
    for n in 1..=14 {
        for r in 1..=5 {
            for k in 0..=3 {
                let lib: Vec<Set> = enumerate_separated(n, r, k)
                    .unwrap()
                    .iter()
                    .map(CircSet::elems)
                    .collect();
                assert_eq!(lib, brute_sets(n, r, k), "({n},{r},{k})");
            }
        }
    }
}

#[test]
fn star_count_matches_formula() {
    for (n, r, k) in small_points(400) {
        let star = brute_sets(n, r, k).iter().filter(|s| s[0] == 1).count();
        assert_eq!(
            star as u128,
            count_star_formula(n, r, k).unwrap(),
            "({n},{r},{k})"
        );
    }
}

#[test]
fn optimum_matches_brute_force() {
    let seq = SearchConfig {
        parallelism: Parallelism::SEQUENTIAL,
        ..SearchConfig::default()
    };
    let plain = SearchConfig {
        symmetry: false,
        ..seq.clone()
    };
    for (n, r, k) in small_points(30) {
        let (best, _) = brute_max_families(&brute_sets(n, r, k));
        for cfg in [&seq, &plain, &SearchConfig::default()] {
            let res = max_intersecting(n, r, k, cfg).unwrap();
            assert_eq!(res.optimum as usize, best, "({n},{r},{k})");
            assert!(res.witness.is_intersecting());
            assert_eq!(res.witness.len(), best);
        }
        let g = build_schrijver(n, r, k).unwrap();
        assert_eq!(independence_number(&g, &seq).unwrap() as usize, best);
    }
}

#[test]
fn class_census_matches_brute_force() {
    // Frozen from the brute-force census below.
    let frozen = [
        ((6, 2, 1), 2),
        ((7, 2, 1), 1),
        ((8, 3, 1), 2),
        ((9, 3, 1), 1),
        ((9, 2, 2), 1),
    ];
    for ((n, r, k), classes) in frozen {
        let sets = brute_sets(n, r, k);
        let (_, all) = brute_max_families(&sets);
        let census: BTreeSet<Vec<Set>> = all
            .iter()
            .map(|idx| {
                let fam: Vec<Set> = idx.iter().map(|&i| sets[i].clone()).collect();
                canonical(&fam, n)
            })
            .collect();
        assert_eq!(census.len(), classes, "brute ({n},{r},{k})");

        let lib = extremal_classes(n, r, k, &SearchConfig::default()).unwrap();
        let lib_classes: BTreeSet<Vec<Set>> = lib
            .classes
            .unwrap()
            .iter()
            .map(|f| f.iter().map(CircSet::elems).collect())
            .collect();
        assert_eq!(lib_classes, census, "({n},{r},{k})");
    }
}

fn f1(s: &[u32]) -> Set {
    let mut out: Set = s.iter().map(|&x| if x == 1 { 1 } else { x - 1 }).collect();
    out.dedup();
    out
}

fn drop_one(s: &[u32]) -> Set {
    assert_eq!(s[0], 1, "{s:?} lacks 1");
    s[1..].to_vec()
}

/// The derived family for k = 1, built from the pair-rule split
/// `B`: 1 absent and not both 2, n; `C`: 1 present, 3 absent;
/// `D`: 1 and 3; `E`: 2 and n; then
/// `H = (f(D) - 1) ∪ (f(E) - 1) ∪ ((f(B) ∩ f(C)) - 1)`.
fn oracle_h(family: &[Set], n: u32) -> (BTreeSet<Set>, usize) {
    let has = |s: &Set, x: u32| s.contains(&x);
    let b: Vec<&Set> = family
        .iter()
        .filter(|s| !has(s, 1) && !(has(s, 2) && has(s, n)))
        .collect();
    let c: Vec<&Set> = family.iter().filter(|s| has(s, 1) && !has(s, 3)).collect();
    let d: Vec<&Set> = family.iter().filter(|s| has(s, 1) && has(s, 3)).collect();
    let e: Vec<&Set> = family.iter().filter(|s| has(s, 2) && has(s, n)).collect();
    let fb: BTreeSet<Set> = b.iter().map(|s| f1(s)).collect();
    let fc: BTreeSet<Set> = c.iter().map(|s| f1(s)).collect();
    let mut h = BTreeSet::new();
    h.extend(d.iter().map(|s| drop_one(&f1(s))));
    h.extend(e.iter().map(|s| drop_one(&f1(s))));
    h.extend(fb.intersection(&fc).map(|s| drop_one(s)));
    let union = fb.union(&fc).count();
    (h, union)
}

#[test]
fn derived_family_matches_pair_rule_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in 5..=11 {
        for r in 2..=3 {
            if n < 2 * r + 1 {
                continue;
            }
            for _ in 0..40 {
                let fam = random_maximal_intersecting(n, r, 1, &mut rng).unwrap();
                let plain: Vec<Set> = fam.iter().map(CircSet::elems).collect();
                let (h, union) = oracle_h(&plain, n);
                let p = partition_family(&fam).unwrap();
                let d = derive_families(&p).unwrap();
                let lib: BTreeSet<Set> = d.f.iter().map(CircSet::elems).collect();
                assert_eq!(lib, h, "({n},{r},1) {fam}");
                assert_eq!(plain.len(), union + h.len());
                assert!(verify_lemma_suite(&fam).unwrap().passed());
            }
        }
    }
}
