//! Weights `w(A) = ∏ C(gap - 1, k)` over the circular gaps of a k-separated
//! set, the blow-up `Γ(A)` of `(k+1)r`-sets realising them, and the check
//! that the heaviest intersecting family weighs `C(n-1, (k+1)r - 1)`.

use serde::Serialize;

use crate::circ::{binomial, CircSet};
use crate::error::{Error, Result};
use crate::family::SetFamily;
use crate::search::{max_intersecting_weighted, SearchConfig};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Weight(pub u128);

impl Weight {
    pub fn checked_add(self, other: Weight) -> Option<Weight> {
        self.0.checked_add(other.0).map(Weight)
    }
}

impl std::fmt::Display for Weight {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

fn require_separated(a: &CircSet, k: u32) -> Result<()> {
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    if !a.is_k_separated(k) {
        return Err(Error::NotSeparated { set: *a, k });
    }
    Ok(())
}

/// `∏_i C(g_i - 1, k)` over the gap vector of `a`.
pub fn weight(a: &CircSet, k: u32) -> Result<Weight> {
    require_separated(a, k)?;
    let mut w: u128 = 1;
    for &g in a.gap_vector().gaps() {
        let c = binomial(g as u64 - 1, k as u64)
            .ok_or_else(|| Error::Overflow(format!("C({}, {k})", g - 1)))?;
        w = w
            .checked_mul(c)
            .ok_or_else(|| Error::Overflow(format!("weight of {a}")))?;
    }
    Ok(Weight(w))
}

/// Sum of member weights, using the family's own `k`.
pub fn family_weight(family: &SetFamily) -> Result<Weight> {
    family.iter().try_fold(Weight(0), |acc, a| {
        acc.checked_add(weight(a, family.k())?)
            .ok_or_else(|| Error::Overflow("family weight".into()))
    })
}

/// All `(k+1)r`-subsets of `[n]` obtained from `a` by adding `k` points
/// strictly inside each gap. Has exactly `w(a)` members.
pub fn gamma(a: &CircSet, k: u32) -> Result<SetFamily> {
    require_separated(a, k)?;
    let n = a.n();
    let elems = a.elems();
    let r = elems.len();
    // Interior points of the gap following each element, in circular order.
    let interiors: Vec<Vec<u32>> = elems
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let next = if i + 1 < r {
                elems[i + 1]
            } else {
                elems[0] + n
            };
            (x + 1..next).map(|p| (p - 1) % n + 1).collect()
        })
        .collect();

    let mut out = Vec::new();
    fill(&interiors, k as usize, 0, a.mask(), &mut |mask| {
        out.push(CircSet::from_mask_unchecked(n, mask))
    });
    SetFamily::new(n, (k + 1) * r as u32, 0, out)
}

fn fill(interiors: &[Vec<u32>], k: usize, gap: usize, mask: u64, emit: &mut dyn FnMut(u64)) {
    if gap == interiors.len() {
        emit(mask);
        return;
    }
    let pts = &interiors[gap];
    combinations(pts, k, 0, mask, &mut |m| {
        fill(interiors, k, gap + 1, m, emit)
    });
}

fn combinations(pts: &[u32], left: usize, from: usize, mask: u64, emit: &mut dyn FnMut(u64)) {
    if left == 0 {
        emit(mask);
        return;
    }
    for i in from..pts.len() {
        if pts.len() - i < left {
            break;
        }
        combinations(pts, left - 1, i + 1, mask | 1 << (pts[i] - 1), emit);
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WeightedReport {
    pub n: u32,
    pub r: u32,
    pub k: u32,
    /// Exact maximum weight of an intersecting family.
    pub optimum: Weight,
    /// Weight of the star at 1.
    pub star_weight: Weight,
    /// `C(n-1, (k+1)r - 1)`.
    pub binomial: Weight,
    pub pass: bool,
}

/// Computes the exact weighted optimum and compares it with the star weight
/// and `C(n-1, (k+1)r - 1)`. Requires `n >= 2(k+1)r`.
pub fn verify_weighted_ekr(n: u32, r: u32, k: u32, cfg: &SearchConfig) -> Result<WeightedReport> {
    if r == 0 {
        return Err(Error::EmptySet);
    }
    let need = 2 * (k as u64 + 1) * r as u64;
    if (n as u64) < need {
        return Err(Error::InvalidParameter(format!(
            "weighted bound needs n >= 2(k+1)r = {need}, got n={n}"
        )));
    }
    let weight_u64 = |a: &CircSet| -> Result<u64> {
        let w = weight(a, k)?;
        u64::try_from(w.0).map_err(|_| Error::Overflow(format!("weight of {a}")))
    };
    // Reject overflow up front so the search closure can unwrap.
    for a in crate::circ::enumerate_separated(n, r, k)?.iter() {
        weight_u64(a)?;
    }
    let res = max_intersecting_weighted(n, r, k, |a| weight_u64(a).unwrap_or(0), cfg)?;
    let star = crate::family::star_family(n, r, k, 1)?;
    let star_weight = family_weight(&star)?;
    let bin = binomial(n as u64 - 1, (k as u64 + 1) * r as u64 - 1)
        .ok_or_else(|| Error::Overflow("binomial".into()))?;
    let optimum = Weight(res.optimum as u128);
    Ok(WeightedReport {
        n,
        r,
        k,
        optimum,
        star_weight,
        binomial: Weight(bin),
        pass: optimum == star_weight && star_weight.0 == bin,
    })
}
