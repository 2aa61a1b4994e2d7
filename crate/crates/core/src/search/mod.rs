//! Exact maximum (and maximum-weight) intersecting families of
//! `[n]^(r)_k`, and the census of extremal families up to symmetry.
//!
//! An intersecting family is an independent set of the disjointness graph,
//! i.e. a clique of the "meets" graph, which is what [`engine`] searches.
//! The top level branches over vertex orbits of the symmetry group: branch
//! `i` contains the orbit representative `rep_i` and avoids the orbits
//! before it. Every family has an image in exactly the branch of the first
//! orbit it meets, so the optimum and every isomorphism class survive.
//!
//! Results never depend on scheduling: the optimum is a maximum, the
//! witness comes from a sequential first-hit search and is then replaced by
//! its canonical form, and class representatives are canonical forms.

mod engine;

use std::collections::{BTreeSet, HashMap};
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::circ::{separated_sets, CircSet, Group};
use crate::error::{Error, Result};
use crate::family::{canonical_form, SetFamily};
use crate::par::Parallelism;

use engine::{Abort, Branch, Engine, Limits};

pub const DEFAULT_VERTEX_LIMIT: usize = 20_000;
pub const DEFAULT_CLASS_VERTEX_LIMIT: usize = 2_000;
pub const DEFAULT_SOLUTION_LIMIT: usize = 200_000;

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub vertex_limit: usize,
    /// Vertex cap for [`extremal_classes`], which enumerates every optimum.
    pub class_vertex_limit: usize,
    pub max_solutions: usize,
    pub time_limit: Option<Duration>,
    pub node_limit: Option<u64>,
    /// Group used for symmetry reduction and for identifying classes.
    pub group: Group,
    /// Branch over vertex orbits at the top level.
    pub symmetry: bool,
    pub parallelism: Parallelism,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            vertex_limit: DEFAULT_VERTEX_LIMIT,
            class_vertex_limit: DEFAULT_CLASS_VERTEX_LIMIT,
            max_solutions: DEFAULT_SOLUTION_LIMIT,
            time_limit: None,
            node_limit: None,
            group: Group::Dihedral,
            symmetry: true,
            parallelism: Parallelism::default(),
        }
    }
}

impl SearchConfig {
    fn limits(&self, start: Instant) -> Limits {
        Limits {
            deadline: self.time_limit.map(|t| start + t),
            max_nodes: self.node_limit,
            max_solutions: Some(self.max_solutions),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SearchResult {
    pub n: u32,
    pub r: u32,
    pub k: u32,
    pub optimum: u64,
    pub witness: SetFamily,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classes: Option<Vec<SetFamily>>,
    #[serde(rename = "nodes")]
    pub nodes_explored: u64,
}

impl SearchResult {
    /// JSON without the diagnostic node count.
    pub fn to_canonical_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("search results serialize");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("nodes");
        }
        v
    }
}

fn abort_error(a: Abort) -> Error {
    Error::ResourceLimit(a.to_string())
}

fn universe(n: u32, r: u32, k: u32, limit: usize) -> Result<Vec<CircSet>> {
    if r == 0 {
        return Err(Error::EmptySet);
    }
    if n == 0 || n > crate::circ::MAX_N {
        return Err(Error::GroundSize {
            n,
            max: crate::circ::MAX_N,
        });
    }
    if (n as u64) < (k as u64 + 1) * r as u64 {
        return Err(Error::TooFewPoints { n, r, k });
    }
    // |[n]^(r)_k| = n * |star| / r, checked before enumerating anything.
    let star = crate::circ::count_star_formula(n, r, k)?;
    let total = star.saturating_mul(n as u128) / r as u128;
    if total > limit as u128 {
        return Err(Error::TooLarge {
            vertices: usize::try_from(total).unwrap_or(usize::MAX),
            limit,
        });
    }
    Ok(separated_sets(n, r, k))
}

/// Vertex orbits under `group`, each sorted, ordered by smallest member.
/// Vertices must be closed under the group action.
pub(crate) fn vertex_orbits(vertices: &[CircSet], group: Group) -> Vec<Vec<usize>> {
    let Some(first) = vertices.first() else {
        return Vec::new();
    };
    let index: HashMap<CircSet, usize> =
        vertices.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let syms = group.elements(first.n());
    let mut seen = vec![false; vertices.len()];
    let mut orbits = Vec::new();
    for i in 0..vertices.len() {
        if seen[i] {
            continue;
        }
        let mut orbit: Vec<usize> = syms.iter().map(|&g| index[&vertices[i].apply(g)]).collect();
        orbit.sort_unstable();
        orbit.dedup();
        for &j in &orbit {
            seen[j] = true;
        }
        orbits.push(orbit);
    }
    orbits
}

fn orbit_branches(orbits: &[Vec<usize>]) -> Vec<Branch> {
    let mut excluded = Vec::new();
    let mut out = Vec::with_capacity(orbits.len());
    for orbit in orbits {
        out.push(Branch {
            root: orbit[0],
            excluded: excluded.clone(),
        });
        excluded.extend_from_slice(orbit);
    }
    out
}

fn plain_branches(size: usize) -> Vec<Branch> {
    (0..size)
        .map(|i| Branch {
            root: i,
            excluded: (0..i).collect(),
        })
        .collect()
}

/// Solved instance: the engine plus its top-level branches.
pub(crate) struct Instance {
    engine: Engine,
    branches: Vec<Branch>,
}

impl Instance {
    /// `orbits` must be orbits of a group preserving both compatibility and
    /// weights; `None` disables symmetry reduction.
    pub(crate) fn new(
        size: usize,
        weights: &[u64],
        compatible: impl Fn(usize, usize) -> bool,
        orbits: Option<Vec<Vec<usize>>>,
    ) -> Self {
        let engine = Engine::new(size, weights, compatible);
        let branches = match orbits {
            Some(o) => orbit_branches(&o),
            None => plain_branches(size),
        };
        Instance { engine, branches }
    }

    /// Optimum weight and a deterministic witness (sorted vertex indices).
    pub(crate) fn optimum(&self, cfg: &SearchConfig) -> Result<(u64, Vec<usize>, u64)> {
        let start = Instant::now();
        let limits = cfg.limits(start);
        let (best, nodes) = self
            .engine
            .maximize(&self.branches, 0, limits, cfg.parallelism)
            .map_err(abort_error)?;
        let (witness, more) = self
            .engine
            .find_first(&self.branches, best, limits)
            .map_err(abort_error)?;
        let witness = witness.ok_or_else(|| {
            Error::ResourceLimit("internal: optimum found but no witness reproduced".into())
        })?;
        Ok((best, witness, nodes + more))
    }

    pub(crate) fn all_optima(
        &self,
        target: u64,
        cfg: &SearchConfig,
    ) -> Result<(Vec<Vec<usize>>, u64)> {
        let limits = cfg.limits(Instant::now());
        self.engine
            .enumerate(&self.branches, target, limits, cfg.parallelism)
            .map_err(abort_error)
    }
}

fn meets_instance(vertices: &[CircSet], weights: &[u64], group: Option<Group>) -> Instance {
    let orbits = group.map(|g| vertex_orbits(vertices, g));
    Instance::new(
        vertices.len(),
        weights,
        |i, j| vertices[i].meets(&vertices[j]),
        orbits,
    )
}

fn family_of(n: u32, r: u32, k: u32, vertices: &[CircSet], idx: &[usize]) -> SetFamily {
    let mut sets: Vec<CircSet> = idx.iter().map(|&i| vertices[i]).collect();
    sets.sort();
    SetFamily::from_sorted_unchecked(n, r, k, sets)
}

/// Largest intersecting subfamily of `[n]^(r)_k`.
pub fn max_intersecting(n: u32, r: u32, k: u32, cfg: &SearchConfig) -> Result<SearchResult> {
    let vertices = universe(n, r, k, cfg.vertex_limit)?;
    let weights = vec![1u64; vertices.len()];
    let inst = meets_instance(&vertices, &weights, cfg.symmetry.then_some(cfg.group));
    let (optimum, witness, nodes) = inst.optimum(cfg)?;
    Ok(SearchResult {
        n,
        r,
        k,
        optimum,
        witness: canonical_form(&family_of(n, r, k, &vertices, &witness), cfg.group),
        classes: None,
        nodes_explored: nodes,
    })
}

/// Heaviest intersecting subfamily of `[n]^(r)_k` under `weight_fn`.
///
/// Symmetry reduction is used only when the weights are invariant under the
/// configured group.
pub fn max_intersecting_weighted(
    n: u32,
    r: u32,
    k: u32,
    weight_fn: impl Fn(&CircSet) -> u64,
    cfg: &SearchConfig,
) -> Result<SearchResult> {
    let vertices = universe(n, r, k, cfg.vertex_limit)?;
    let weights: Vec<u64> = vertices.iter().map(&weight_fn).collect();
    weights
        .iter()
        .try_fold(0u64, |acc, &w| acc.checked_add(w))
        .ok_or_else(|| Error::Overflow("total family weight".into()))?;
    let invariant = cfg.symmetry && {
        let syms = cfg.group.elements(n);
        vertices
            .iter()
            .zip(&weights)
            .all(|(v, &w)| syms.iter().all(|&g| weight_fn(&v.apply(g)) == w))
    };
    let inst = meets_instance(&vertices, &weights, invariant.then_some(cfg.group));
    let (optimum, witness, nodes) = inst.optimum(cfg)?;
    let witness = family_of(n, r, k, &vertices, &witness);
    Ok(SearchResult {
        n,
        r,
        k,
        optimum,
        witness: if invariant {
            canonical_form(&witness, cfg.group)
        } else {
            witness
        },
        classes: None,
        nodes_explored: nodes,
    })
}

/// All maximum intersecting families, one canonical representative per
/// isomorphism class (under `cfg.group`), sorted.
pub fn extremal_classes(n: u32, r: u32, k: u32, cfg: &SearchConfig) -> Result<SearchResult> {
    let vertices = universe(n, r, k, cfg.vertex_limit.min(cfg.class_vertex_limit))?;
    let weights = vec![1u64; vertices.len()];
    let inst = meets_instance(&vertices, &weights, cfg.symmetry.then_some(cfg.group));
    let (optimum, witness, nodes) = inst.optimum(cfg)?;
    let (all, more) = inst.all_optima(optimum, cfg)?;
    let classes: BTreeSet<SetFamily> = all
        .iter()
        .map(|idx| canonical_form(&family_of(n, r, k, &vertices, idx), cfg.group))
        .collect();
    Ok(SearchResult {
        n,
        r,
        k,
        optimum,
        witness: canonical_form(&family_of(n, r, k, &vertices, &witness), cfg.group),
        classes: Some(classes.into_iter().collect()),
        nodes_explored: nodes + more,
    })
}

impl PartialOrd for SetFamily {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SetFamily {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.params()
            .cmp(&other.params())
            .then_with(|| self.sets().cmp(other.sets()))
    }
}
