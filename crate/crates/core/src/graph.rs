//! Kneser and (generalised) Schrijver graphs: vertices are r-sets, edges join
//! disjoint pairs. Exact independence number via the search engine, exact
//! chromatic number by DSATUR backtracking, DIMACS and JSON export.

use std::io::Write;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::bitset::BitSet;
use crate::circ::{binomial, enumerate_separated, CircSet, Group};
use crate::error::{Error, Result};
use crate::family::SetFamily;
use crate::search::{vertex_orbits, Instance, SearchConfig, DEFAULT_VERTEX_LIMIT};

/// Default vertex cap for [`chromatic_number`].
pub const DEFAULT_COLORING_VERTEX_LIMIT: usize = 64;
/// Default backtracking node cap for [`chromatic_number`].
pub const DEFAULT_COLORING_NODE_LIMIT: u64 = 50_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DisjointnessGraph {
    vertices: SetFamily,
    adjacency: Vec<BitSet>,
}

impl DisjointnessGraph {
    fn from_vertices(vertices: SetFamily) -> Self {
        let sets = vertices.sets();
        let mut adjacency = vec![BitSet::new(sets.len()); sets.len()];
        for (i, a) in sets.iter().enumerate() {
            for (j, b) in sets.iter().enumerate().skip(i + 1) {
                if !a.meets(b) {
                    adjacency[i].insert(j);
                    adjacency[j].insert(i);
                }
            }
        }
        DisjointnessGraph {
            vertices,
            adjacency,
        }
    }

    pub fn vertices(&self) -> &SetFamily {
        &self.vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbours(&self, v: usize) -> &BitSet {
        &self.adjacency[v]
    }

    pub fn is_adjacent(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].contains(v)
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(BitSet::count).sum::<usize>() / 2
    }

    /// Every edge once as `(u, v)` with `u < v`, 0-based, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, row)| row.iter().filter(move |&v| v > u).map(move |v| (u, v)))
            .collect()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].count()
    }

    /// Writes `p edge V E` followed by one `e u v` line per edge (1-based,
    /// `u < v`, vertices in enumeration order).
    pub fn export_dimacs<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "p edge {} {}", self.vertex_count(), self.edge_count())?;
        for (u, v) in self.edges() {
            writeln!(out, "e {} {}", u + 1, v + 1)?;
        }
        out.flush()?;
        Ok(())
    }

    /// `{"vertices": [...], "edges": [[u, v], ...]}` with 0-based indices.
    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Dump<'a> {
            vertices: Vec<Vec<u32>>,
            edges: &'a [(usize, usize)],
        }
        let edges = self.edges();
        serde_json::to_value(Dump {
            vertices: self.vertices.iter().map(CircSet::elems).collect(),
            edges: &edges,
        })
        .expect("graph dump serializes")
    }
}

fn check_order(n: u32, r: u32, k: u32, limit: usize) -> Result<()> {
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
    let count = if k == 0 {
        binomial(n as u64, r as u64).unwrap_or(u128::MAX)
    } else {
        crate::circ::count_star_formula(n, r, k)?.saturating_mul(n as u128) / r as u128
    };
    if count > limit as u128 {
        return Err(Error::TooLarge {
            vertices: usize::try_from(count).unwrap_or(usize::MAX),
            limit,
        });
    }
    Ok(())
}

/// Kneser graph `K(n, r)` with the default vertex limit.
pub fn build_kneser(n: u32, r: u32) -> Result<DisjointnessGraph> {
    build_kneser_limited(n, r, DEFAULT_VERTEX_LIMIT)
}

pub fn build_kneser_limited(n: u32, r: u32, vertex_limit: usize) -> Result<DisjointnessGraph> {
    build_schrijver_limited(n, r, 0, vertex_limit)
}

/// Kneser graph induced on the k-separated r-sets; `k = 1` is the Schrijver
/// graph, `k = 0` the full Kneser graph.
pub fn build_schrijver(n: u32, r: u32, k: u32) -> Result<DisjointnessGraph> {
    build_schrijver_limited(n, r, k, DEFAULT_VERTEX_LIMIT)
}

pub fn build_schrijver_limited(
    n: u32,
    r: u32,
    k: u32,
    vertex_limit: usize,
) -> Result<DisjointnessGraph> {
    check_order(n, r, k, vertex_limit)?;
    Ok(DisjointnessGraph::from_vertices(enumerate_separated(
        n, r, k,
    )?))
}

/// Exact independence number, with the dihedral group breaking symmetry.
pub fn independence_number(g: &DisjointnessGraph, cfg: &SearchConfig) -> Result<u64> {
    let v = g.vertex_count();
    if v == 0 {
        return Ok(0);
    }
    if v > cfg.vertex_limit {
        return Err(Error::TooLarge {
            vertices: v,
            limit: cfg.vertex_limit,
        });
    }
    let weights = vec![1u64; v];
    let orbits = cfg
        .symmetry
        .then(|| vertex_orbits(g.vertices().sets(), cfg.group));
    let inst = Instance::new(v, &weights, |i, j| !g.is_adjacent(i, j), orbits);
    Ok(inst.optimum(cfg)?.0)
}

#[derive(Clone, Debug)]
pub struct ColoringConfig {
    pub vertex_limit: usize,
    pub node_limit: u64,
    pub time_limit: Option<Duration>,
}

impl Default for ColoringConfig {
    fn default() -> Self {
        ColoringConfig {
            vertex_limit: DEFAULT_COLORING_VERTEX_LIMIT,
            node_limit: DEFAULT_COLORING_NODE_LIMIT,
            time_limit: None,
        }
    }
}

/// Exact chromatic number. Colour counts are tried upwards from a greedy
/// clique bound; each attempt is a DSATUR backtracking search.
pub fn chromatic_number(g: &DisjointnessGraph, cfg: &ColoringConfig) -> Result<u32> {
    let v = g.vertex_count();
    if v == 0 {
        return Ok(0);
    }
    if v > cfg.vertex_limit {
        return Err(Error::TooLarge {
            vertices: v,
            limit: cfg.vertex_limit,
        });
    }
    let upper = dsatur_greedy(g);
    let lower = greedy_clique(g);
    let mut search = Colouring {
        g,
        colour: vec![None; v],
        nodes: 0,
        node_limit: cfg.node_limit,
        deadline: cfg.time_limit.map(|t| Instant::now() + t),
    };
    for c in lower..upper {
        search.colour.iter_mut().for_each(|x| *x = None);
        if search.try_colour(c, 0)? {
            return Ok(c);
        }
    }
    Ok(upper)
}

fn greedy_clique(g: &DisjointnessGraph) -> u32 {
    let mut order: Vec<usize> = (0..g.vertex_count()).collect();
    order.sort_by_key(|&u| std::cmp::Reverse(g.degree(u)));
    let mut best = 1;
    for &start in &order {
        let mut clique = vec![start];
        for &u in &order {
            if clique.iter().all(|&w| g.is_adjacent(u, w)) {
                clique.push(u);
            }
        }
        best = best.max(clique.len() as u32);
    }
    best
}

/// Saturation and degree tie-break; picks the uncoloured vertex that sees
/// the most distinct colours.
fn pick(g: &DisjointnessGraph, colour: &[Option<u32>]) -> Option<usize> {
    (0..colour.len())
        .filter(|&u| colour[u].is_none())
        .max_by_key(|&u| {
            let seen: u64 = g
                .neighbours(u)
                .iter()
                .filter_map(|w| colour[w])
                .fold(0, |m, c| m | 1u64.checked_shl(c).unwrap_or(0));
            (seen.count_ones(), g.degree(u), std::cmp::Reverse(u))
        })
}

fn dsatur_greedy(g: &DisjointnessGraph) -> u32 {
    let mut colour: Vec<Option<u32>> = vec![None; g.vertex_count()];
    let mut used = 0;
    while let Some(u) = pick(g, &colour) {
        let c = (0..)
            .find(|&c| g.neighbours(u).iter().all(|w| colour[w] != Some(c)))
            .expect("some colour is free");
        colour[u] = Some(c);
        used = used.max(c + 1);
    }
    used
}

struct Colouring<'a> {
    g: &'a DisjointnessGraph,
    colour: Vec<Option<u32>>,
    nodes: u64,
    node_limit: u64,
    deadline: Option<Instant>,
}

impl Colouring<'_> {
    /// Can the remaining vertices be coloured with `c` colours, given that
    /// colours `0..used` are already in play?
    fn try_colour(&mut self, c: u32, used: u32) -> Result<bool> {
        self.nodes += 1;
        if self.nodes > self.node_limit {
            return Err(Error::ResourceLimit(format!(
                "colouring exceeded {} nodes",
                self.node_limit
            )));
        }
        if self.nodes.is_multiple_of(4096) && self.deadline.is_some_and(|d| Instant::now() > d) {
            return Err(Error::ResourceLimit("colouring time limit".into()));
        }
        let Some(u) = pick(self.g, &self.colour) else {
            return Ok(true);
        };
        // A fresh colour is interchangeable with any other unused one, so
        // only the lowest is tried.
        for col in 0..c.min(used + 1) {
            if self
                .g
                .neighbours(u)
                .iter()
                .any(|w| self.colour[w] == Some(col))
            {
                continue;
            }
            self.colour[u] = Some(col);
            if self.try_colour(c, used.max(col + 1))? {
                return Ok(true);
            }
        }
        self.colour[u] = None;
        Ok(false)
    }
}

/// Vertex relabelling induced by a symmetry of the circle.
pub fn induced_permutation(
    g: &DisjointnessGraph,
    sym: crate::circ::Symmetry,
) -> Option<Vec<usize>> {
    g.vertices()
        .iter()
        .map(|s| g.vertices().sets().binary_search(&s.apply(sym)).ok())
        .collect()
}

/// Whether every symmetry of `group` maps edges to edges.
pub fn is_symmetric_under(g: &DisjointnessGraph, group: Group) -> bool {
    group.elements(g.vertices().n()).into_iter().all(|sym| {
        induced_permutation(g, sym)
            .is_some_and(|p| g.edges().iter().all(|&(u, v)| g.is_adjacent(p[u], p[v])))
    })
}
