//! Bitset branch-and-bound for maximum-weight cliques.
//!
//! The engine works on the *compatibility* graph (an edge joins two vertices
//! that may appear together), so a clique is an independent set of the
//! disjointness graph. Candidate sets are bit rows in a degree-sorted vertex
//! order; every node colours its candidates greedily into classes of
//! pairwise incompatible vertices and bounds the best completion by the sum
//! of the heaviest weight per class.
//!
//! The top level is split into independent [`Branch`]es ("contains `root`,
//! avoids `excluded`"), which is where symmetry reduction and parallelism
//! enter.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::Instant;

use crate::bitset;
use crate::par::Parallelism;

#[derive(Clone, Debug)]
pub(crate) struct Branch {
    pub root: usize,
    pub excluded: Vec<usize>,
}

#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Limits {
    pub deadline: Option<Instant>,
    pub max_nodes: Option<u64>,
    pub max_solutions: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Abort {
    Time,
    Nodes(u64),
    Solutions(usize),
}

impl std::fmt::Display for Abort {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Abort::Time => write!(f, "time limit reached"),
            Abort::Nodes(n) => write!(f, "node limit {n} reached"),
            Abort::Solutions(n) => write!(f, "more than {n} optimal families"),
        }
    }
}

pub(crate) struct Engine {
    words: usize,
    /// Compatibility rows in solver order, `size * words` words.
    adj: Vec<u64>,
    weight: Vec<u64>,
    to_orig: Vec<usize>,
    to_solver: Vec<usize>,
}

impl Engine {
    /// `compatible(i, j)` must be symmetric; the diagonal is ignored.
    pub fn new(size: usize, weights: &[u64], compatible: impl Fn(usize, usize) -> bool) -> Self {
        assert_eq!(weights.len(), size);
        let words = bitset::words_for(size).max(1);
        let mut rows = vec![0u64; size * words];
        let mut degree = vec![0usize; size];
        for i in 0..size {
            for j in i + 1..size {
                if compatible(i, j) {
                    rows[i * words + j / 64] |= 1 << (j % 64);
                    rows[j * words + i / 64] |= 1 << (i % 64);
                    degree[i] += 1;
                    degree[j] += 1;
                }
            }
        }
        // High-degree vertices first: they are coloured first and branched last.
        let mut to_orig: Vec<usize> = (0..size).collect();
        to_orig.sort_by(|&a, &b| degree[b].cmp(&degree[a]).then(a.cmp(&b)));
        let mut to_solver = vec![0; size];
        for (s, &o) in to_orig.iter().enumerate() {
            to_solver[o] = s;
        }
        let mut adj = vec![0u64; size * words];
        for s in 0..size {
            let o = to_orig[s];
            for j in bitset::Ones::new(&rows[o * words..(o + 1) * words]) {
                let t = to_solver[j];
                adj[s * words + t / 64] |= 1 << (t % 64);
            }
        }
        let weight = to_orig.iter().map(|&o| weights[o]).collect();
        Engine {
            words,
            adj,
            weight,
            to_orig,
            to_solver,
        }
    }

    fn row(&self, v: usize) -> &[u64] {
        &self.adj[v * self.words..(v + 1) * self.words]
    }

    fn branch_candidates(&self, branch: &Branch) -> Vec<u64> {
        let root = self.to_solver[branch.root];
        let mut p = self.row(root).to_vec();
        for &x in &branch.excluded {
            let t = self.to_solver[x];
            p[t / 64] &= !(1 << (t % 64));
        }
        p
    }

    fn original(&self, clique: &[usize]) -> Vec<usize> {
        let mut v: Vec<usize> = clique.iter().map(|&s| self.to_orig[s]).collect();
        v.sort_unstable();
        v
    }

    /// Best clique weight over all branches.
    pub fn maximize(
        &self,
        branches: &[Branch],
        initial: u64,
        limits: Limits,
        par: Parallelism,
    ) -> Result<(u64, u64), Abort> {
        let shared = Shared::new(initial);
        let results = par.map(branches, |b| {
            let mut w = Worker::new(self, Mode::Maximize, &shared, limits);
            let r = w.run_branch(b);
            (r, w.nodes)
        });
        let nodes = results.iter().map(|(_, n)| n).sum();
        for (r, _) in results {
            r?;
        }
        Ok((shared.best.load(Ordering::Relaxed), nodes))
    }

    /// First clique of weight at least `target` in branch order and
    /// depth-first order within a branch. Runs sequentially, so the answer
    /// is independent of thread count.
    pub fn find_first(
        &self,
        branches: &[Branch],
        target: u64,
        limits: Limits,
    ) -> Result<(Option<Vec<usize>>, u64), Abort> {
        let shared = Shared::new(0);
        let mut nodes = 0;
        for b in branches {
            let mut w = Worker::new(self, Mode::FindFirst { target }, &shared, limits);
            let r = w.run_branch(b);
            nodes += w.nodes;
            r?;
            if let Some(c) = w.found.pop() {
                return Ok((Some(self.original(&c)), nodes));
            }
        }
        Ok((None, nodes))
    }

    /// Every clique of weight exactly `target` inside the branches. Each
    /// clique is reported once per branch that contains it.
    pub fn enumerate(
        &self,
        branches: &[Branch],
        target: u64,
        limits: Limits,
        par: Parallelism,
    ) -> Result<(Vec<Vec<usize>>, u64), Abort> {
        let shared = Shared::new(0);
        let results = par.map(branches, |b| {
            let mut w = Worker::new(self, Mode::Enumerate { target }, &shared, limits);
            let r = w.run_branch(b);
            (r, w.found, w.nodes)
        });
        let mut all = Vec::new();
        let mut nodes = 0;
        for (r, found, n) in results {
            nodes += n;
            r?;
            all.extend(found.iter().map(|c| self.original(c)));
        }
        Ok((all, nodes))
    }
}

#[derive(Clone, Copy, Debug)]
enum Mode {
    Maximize,
    FindFirst { target: u64 },
    Enumerate { target: u64 },
}

struct Shared {
    best: AtomicU64,
    abort: AtomicBool,
    solutions: AtomicU64,
}

impl Shared {
    fn new(best: u64) -> Self {
        Shared {
            best: AtomicU64::new(best),
            abort: AtomicBool::new(false),
            solutions: AtomicU64::new(0),
        }
    }
}

struct Worker<'e> {
    eng: &'e Engine,
    mode: Mode,
    shared: &'e Shared,
    limits: Limits,
    nodes: u64,
    stack: Vec<usize>,
    cands: Vec<Vec<u64>>,
    verts: Vec<Vec<usize>>,
    bounds: Vec<Vec<u64>>,
    scratch_u: Vec<u64>,
    scratch_q: Vec<u64>,
    found: Vec<Vec<usize>>,
    done: bool,
}

impl<'e> Worker<'e> {
    fn new(eng: &'e Engine, mode: Mode, shared: &'e Shared, limits: Limits) -> Self {
        Worker {
            eng,
            mode,
            shared,
            limits,
            nodes: 0,
            stack: Vec::new(),
            cands: Vec::new(),
            verts: Vec::new(),
            bounds: Vec::new(),
            scratch_u: vec![0; eng.words],
            scratch_q: vec![0; eng.words],
            found: Vec::new(),
            done: false,
        }
    }

    fn run_branch(&mut self, branch: &Branch) -> Result<(), Abort> {
        if self.shared.abort.load(Ordering::Relaxed) {
            return Err(Abort::Time);
        }
        let root = self.eng.to_solver[branch.root];
        let p = self.eng.branch_candidates(branch);
        let w = self.eng.weight[root];
        self.stack.clear();
        self.stack.push(root);
        if bitset::is_empty(&p) {
            self.leaf(w);
            return self.check_solutions();
        }
        self.ensure_depth(0);
        self.cands[0] = p;
        let r = self.expand(0, w);
        if r.is_err() {
            self.shared.abort.store(true, Ordering::Relaxed);
        }
        r
    }

    fn ensure_depth(&mut self, depth: usize) {
        while self.cands.len() <= depth {
            self.cands.push(vec![0; self.eng.words]);
            self.verts.push(Vec::new());
            self.bounds.push(Vec::new());
        }
    }

    fn tick(&mut self) -> Result<(), Abort> {
        self.nodes += 1;
        if self.nodes & 1023 == 0 {
            if self.shared.abort.load(Ordering::Relaxed) {
                return Err(Abort::Time);
            }
            if let Some(d) = self.limits.deadline {
                if Instant::now() >= d {
                    return Err(Abort::Time);
                }
            }
        }
        if let Some(m) = self.limits.max_nodes {
            if self.nodes > m {
                return Err(Abort::Nodes(m));
            }
        }
        Ok(())
    }

    /// True if a node whose best completion weighs `bound` can be skipped.
    fn prune(&self, bound: u64) -> bool {
        match self.mode {
            Mode::Maximize => bound <= self.shared.best.load(Ordering::Relaxed),
            Mode::FindFirst { target } | Mode::Enumerate { target } => bound < target,
        }
    }

    fn leaf(&mut self, w: u64) {
        match self.mode {
            Mode::Maximize => {
                self.shared.best.fetch_max(w, Ordering::Relaxed);
            }
            Mode::FindFirst { target } => {
                if w >= target {
                    self.found.push(self.stack.clone());
                    self.done = true;
                }
            }
            Mode::Enumerate { target } => {
                if w == target {
                    self.found.push(self.stack.clone());
                    self.shared.solutions.fetch_add(1, Ordering::Relaxed);
                }
            }
        }
    }

    fn check_solutions(&self) -> Result<(), Abort> {
        if let Some(max) = self.limits.max_solutions {
            if self.shared.solutions.load(Ordering::Relaxed) as usize > max {
                return Err(Abort::Solutions(max));
            }
        }
        Ok(())
    }

    /// Greedy sequential colouring of `p`: fills `verts` class by class and
    /// `bounds[i]` with the summed class maxima up to the class of `verts[i]`.
    fn color(&mut self, p: &[u64], verts: &mut Vec<usize>, bounds: &mut Vec<u64>) {
        verts.clear();
        bounds.clear();
        let eng = self.eng;
        let u = &mut self.scratch_u;
        let q = &mut self.scratch_q;
        u.copy_from_slice(p);
        let mut total = 0u64;
        while !bitset::is_empty(u) {
            q.copy_from_slice(u);
            let start = verts.len();
            let mut class_max = 0u64;
            let mut wi = 0;
            while wi < q.len() {
                let word = q[wi];
                if word == 0 {
                    wi += 1;
                    continue;
                }
                let v = wi * 64 + word.trailing_zeros() as usize;
                u[wi] &= !(1 << (v % 64));
                q[wi] &= !(1 << (v % 64));
                let row = eng.row(v);
                for (qw, &rw) in q.iter_mut().zip(row).skip(wi) {
                    *qw &= !rw;
                }
                verts.push(v);
                class_max = class_max.max(eng.weight[v]);
            }
            total += class_max;
            bounds.resize(verts.len(), total);
            debug_assert!(bounds.len() > start);
        }
    }

    fn expand(&mut self, depth: usize, cur: u64) -> Result<(), Abort> {
        self.tick()?;
        self.ensure_depth(depth + 1);
        let mut p = std::mem::take(&mut self.cands[depth]);
        let mut verts = std::mem::take(&mut self.verts[depth]);
        let mut bounds = std::mem::take(&mut self.bounds[depth]);
        self.color(&p, &mut verts, &mut bounds);

        let mut result = Ok(());
        for idx in (0..verts.len()).rev() {
            if self.prune(cur + bounds[idx]) {
                break;
            }
            let v = verts[idx];
            let w = cur + self.eng.weight[v];
            let row = self.eng.row(v);
            let child = &mut self.cands[depth + 1];
            let mut any = false;
            for ((c, &a), &b) in child.iter_mut().zip(&p).zip(row) {
                *c = a & b;
                any |= *c != 0;
            }
            self.stack.push(v);
            if any {
                result = self.expand(depth + 1, w);
            } else {
                self.leaf(w);
                result = self.check_solutions();
            }
            self.stack.pop();
            if result.is_err() || self.done {
                break;
            }
            p[v / 64] &= !(1 << (v % 64));
        }

        self.cands[depth] = p;
        self.verts[depth] = verts;
        self.bounds[depth] = bounds;
        result
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_roots(size: usize) -> Vec<Branch> {
        (0..size)
            .map(|i| Branch {
                root: i,
                excluded: (0..i).collect(),
            })
            .collect()
    }

    /// Odd cycle C5: compatibility = non-adjacent in the cycle.
    fn c5() -> Engine {
        Engine::new(5, &[1; 5], |i, j| {
            let d = (i as i64 - j as i64).rem_euclid(5);
            d != 1 && d != 4
        })
    }

    #[test]
    fn c5_independence() {
        let e = c5();
        let (best, _) = e
            .maximize(&all_roots(5), 0, Limits::default(), Parallelism::SEQUENTIAL)
            .unwrap();
        assert_eq!(best, 2);
        let (all, _) = e
            .enumerate(&all_roots(5), 2, Limits::default(), Parallelism::SEQUENTIAL)
            .unwrap();
        assert_eq!(all.len(), 5);
        let (first, _) = e.find_first(&all_roots(5), 2, Limits::default()).unwrap();
        let first = first.unwrap();
        assert!(first.contains(&0) && first.len() == 2);
        assert!(all.contains(&first));
        let (again, _) = e.find_first(&all_roots(5), 2, Limits::default()).unwrap();
        assert_eq!(again, Some(first));
    }

    #[test]
    fn weighted_path() {
        // Path 0-1-2 as a conflict graph; weights favour the middle vertex.
        let e = Engine::new(3, &[2, 5, 2], |i, j| i.abs_diff(j) != 1);
        let (best, _) = e
            .maximize(&all_roots(3), 0, Limits::default(), Parallelism::SEQUENTIAL)
            .unwrap();
        assert_eq!(best, 5);
        let e = Engine::new(3, &[3, 5, 3], |i, j| i.abs_diff(j) != 1);
        let (best, _) = e
            .maximize(&all_roots(3), 0, Limits::default(), Parallelism::SEQUENTIAL)
            .unwrap();
        assert_eq!(best, 6);
    }

    #[test]
    fn node_limit_aborts() {
        let e = Engine::new(40, &[1; 40], |i, j| (i + j) % 3 != 0);
        let limits = Limits {
            max_nodes: Some(3),
            ..Limits::default()
        };
        let r = e.maximize(&all_roots(40), 0, limits, Parallelism::SEQUENTIAL);
        assert!(matches!(r, Err(Abort::Nodes(3))));
    }
}
